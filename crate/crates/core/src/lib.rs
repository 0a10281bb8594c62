//! Exact random generation for irreducible context-free combinatorial specifications.
//!
//! A specification is a polynomial system `Y = Φ(z, Y)` with nonnegative rational
//! coefficients; the first component is the class being sampled. Structures of size `n`
//! are drawn with probability `W(T) / A_n` in expected linear time by
//!
//! 1. cutting coloured trees into subtrees at every node of the target colour, which turns
//!    trees into generalised Łukasiewicz excursions,
//! 2. walking with subtrees drawn from a balanced two-point mixture of tilted critical
//!    Boltzmann measures until the walk reaches the landing diagonal,
//! 3. accepting the walk with a certified rate `r_n <= 1`,
//! 4. completing with subtrees from the finite base class, shuffling both blocks together,
//!    and rotating the result into an excursion with the cyclic lemma.
//!
//! The crate is `no_std` (it needs `alloc`). Exact counting and exact recursive sampling
//! (the [`oracle`] module) are provided as an independent reference.
//!
//! ```
//! use cfboltz_core::{models, Analysis, BitSource, Mode};
//!
//! let analysis = Analysis::new(models::binary_trees()).unwrap();
//! let sampler = analysis.sampler(50).unwrap();
//! let mut bits = BitSource::new(7);
//! let tree = sampler.sample_tree(&mut bits).unwrap();
//! assert_eq!(tree.size(analysis.spec()), 50);
//! # let _ = Mode::Excursion;
//! ```
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bridge;
pub mod catalog;
pub mod critical;
pub mod cyclic;
mod error;
pub mod hp;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod random;
pub mod shuffle;
pub mod spec;
pub mod special;
pub mod subtree;
pub mod toy;
pub mod tree;

pub use bridge::{
    invariant_breaches, AcceptancePlan, Analysis, BridgeSampler, Mode, RunStats, Structure, Tilt,
    WalkGeometry,
};
pub use catalog::{compute_catalog, SubtreeCatalog};
pub use critical::{
    derived_constants, drift_function_f, solve_characteristic, solve_reduced_system,
    CriticalData, DerivedConstants,
};
pub use error::Error;
pub use random::BitSource;
pub use spec::{validate_spec, CombinatorialSpec, MonoId, Monomial, ValidationReport, Violation};
pub use tree::{ColoredTree, Slot, Subtree, SubtreeList};

/// Exact rational numbers used for coefficients and counts.
pub type Rational = num_rational::BigRational;

pub type Result<T, E = Error> = core::result::Result<T, E>;
