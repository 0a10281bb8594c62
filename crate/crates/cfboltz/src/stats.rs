//! Pearson chi-square goodness of fit.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// `Σ (o - e)² / e` over classes with `e = total · p`. Observations outside the listed
/// classes make the statistic infinite.
pub fn chi_square(observed: &[u64], probs: &[f64], outside: u64) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let total = observed.iter().sum::<u64>() + outside;
    let norm: f64 = probs.iter().sum();
    let mut statistic = 0.0;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = total as f64 * p / norm;
        statistic += (o as f64 - e).powi(2) / e;
    }
    if outside > 0 {
        statistic = f64::INFINITY;
    }
    let dof = observed.len().saturating_sub(1);
    let p_value = if dof == 0 {
        if outside > 0 { 0.0 } else { 1.0 }
    } else if statistic.is_finite() {
        ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
    } else {
        0.0
    };
    ChiSquare { statistic, dof, p_value }
}

/// The `q` quantile of chi-square with `dof` degrees of freedom.
pub fn chi_square_quantile(dof: usize, q: f64) -> f64 {
    ChiSquared::new(dof as f64).expect("positive dof").inverse_cdf(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let c = chi_square(&[25, 25, 50], &[0.25, 0.25, 0.5], 0);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.dof, 2);
        assert!((c.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_values() {
        // Two classes, 60/40 against 50/50: statistic 4, p = 0.0455.
        let c = chi_square(&[60, 40], &[1.0, 1.0], 0);
        assert!((c.statistic - 4.0).abs() < 1e-12);
        assert!((c.p_value - 0.045_500_263_896).abs() < 1e-9);
        assert!((chi_square_quantile(19, 0.999) - 43.820).abs() < 1e-3);
        assert_eq!(chi_square(&[5], &[1.0], 1).p_value, 0.0);
    }
}
