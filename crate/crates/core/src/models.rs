//! Built-in specifications.

use alloc::string::ToString;
use alloc::vec;

use crate::spec::{CombinatorialSpec, Monomial};

/// Binary trees counted by leaves: `A = z + A^2`.
pub fn binary_trees() -> CombinatorialSpec {
    CombinatorialSpec::new(
        vec!["A".to_string()],
        vec![vec![Monomial::unit(1, vec![0]), Monomial::unit(0, vec![2])]],
    )
    .expect("builtin")
}

/// Recursive rectangle subdivisions:
/// `R = z + H^2 + V^2 + R^4; H = z + V^2 + R^4; V = z + H^2 + R^4`.
pub fn rhv() -> CombinatorialSpec {
    CombinatorialSpec::new(
        vec!["R".to_string(), "H".to_string(), "V".to_string()],
        vec![
            vec![
                Monomial::unit(1, vec![0, 0, 0]),
                Monomial::unit(0, vec![0, 2, 0]),
                Monomial::unit(0, vec![0, 0, 2]),
                Monomial::unit(0, vec![4, 0, 0]),
            ],
            vec![
                Monomial::unit(1, vec![0, 0, 0]),
                Monomial::unit(0, vec![0, 0, 2]),
                Monomial::unit(0, vec![4, 0, 0]),
            ],
            vec![
                Monomial::unit(1, vec![0, 0, 0]),
                Monomial::unit(0, vec![0, 2, 0]),
                Monomial::unit(0, vec![4, 0, 0]),
            ],
        ],
    )
    .expect("builtin")
}
