use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("no subtree without target-colour leaves exists; the specification admits no excursions")]
    NoExcursion,

    #[error("size class {n} is empty")]
    EmptySizeClass { n: usize },

    #[error("enumeration cap of {cap} structures exceeded")]
    CapExceeded { cap: usize },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("divergent system: the Frobenius eigenvalue does not reach 1 before the solution blows up")]
    DivergentSystem,

    #[error("parameters outside the subcritical ball (spectral radius {radius})")]
    OutsideSubcriticalBall { radius: f64 },

    #[error("tilt {eps} must be finite and non-negative")]
    InvalidTilt { eps: f64 },

    #[error("size {n} too small for the prescribed mixture (needs n >= {n_min})")]
    SizeTooSmall { n: usize, n_min: usize },

    #[error("subtree exceeded the node cap of {cap}")]
    DepthRunaway { cap: usize },

    #[error("acceptance certification breached: log r = {log_r}, error bound = {err}")]
    InvariantBreach { log_r: f64, err: f64 },

    #[error("restart budget of {budget} exceeded")]
    RestartBudgetExceeded { budget: u64 },

    #[error("step list ends at ordinate {ordinate}, expected -1")]
    BadEndpoint { ordinate: i64 },

    #[error("malformed excursion: {0}")]
    MalformedExcursion(&'static str),
}
