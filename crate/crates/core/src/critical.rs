//! The characteristic system `Φ(ρ, τ) = τ, det(I - K) = 0`, the reduced bivariate system
//! and the constants derived from them.

use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::SubtreeCatalog;
use crate::linalg::{frobenius_eigenvalue, is_subcritical, solve, spectral_radius, Matrix};
use crate::spec::{mono_partial, powi, CombinatorialSpec};
use crate::Error;

pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_NEWTON: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalData {
    /// Critical `z`, equal to the radius of convergence `ρ`.
    pub zeta: f64,
    /// Critical `u`, equal to `τ_0`.
    pub theta: f64,
    pub tau: Vec<f64>,
    /// Jacobian `∂Φ/∂y` at `(ρ, τ)`.
    pub kmat: Matrix,
    /// Frobenius right eigenvector of `kmat`, first component 1.
    pub frob_vec: Vec<f64>,
    pub frob_eigenvalue: f64,
    /// `max(‖Φ(ρ,τ) - τ‖∞, |λ - 1|)`.
    pub tolerance: f64,
}

/// Least nonnegative solution of `y = Φ(z, y)` by Newton iteration from below.
///
/// Returns `None` when an iterate has a non-subcritical Jacobian, which happens exactly
/// when `z` is at or beyond the singularity.
pub fn least_fixed_point(spec: &CombinatorialSpec, z: f64, start: Option<&[f64]>) -> Option<Vec<f64>> {
    let n = spec.num_symbols();
    let mut y = start.map(|s| s.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_NEWTON {
        let k = spec.jacobian(z, &y);
        if !is_subcritical(&k) {
            return None;
        }
        let phi = spec.eval(z, &y);
        let r: Vec<f64> = (0..n).map(|i| phi[i] - y[i]).collect();
        let mut a = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] -= k[(i, j)];
            }
        }
        let d = solve(&a, &r)?;
        let scale = y.iter().fold(1e-300f64, |m, &v| m.max(v.abs()));
        let step = d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        for i in 0..n {
            y[i] += d[i];
        }
        if y.iter().any(|v| !v.is_finite() || *v > 1e150) {
            return None;
        }
        // Stagnation at rounding level also counts as convergence.
        if step <= 4.0 * f64::EPSILON * scale || (step <= 1e-9 * scale && step >= 0.5 * prev) {
            return Some(y);
        }
        prev = step;
    }
    None
}

pub fn solve_characteristic(spec: &CombinatorialSpec, tol: f64) -> Result<CriticalData, Error> {
    let n = spec.num_symbols();

    // Continuation in z from 0 until the least fixed point stops existing.
    let mut z_lo = 0.0;
    let mut y_lo = vec![0.0; n];
    let mut z = 1.0 / 1024.0;
    let z_hi;
    loop {
        match least_fixed_point(spec, z, Some(&y_lo)) {
            Some(y) => {
                z_lo = z;
                y_lo = y;
                z *= 2.0;
                if z > 1e12 {
                    return Err(Error::DivergentSystem);
                }
            }
            None => {
                z_hi = z;
                break;
            }
        }
    }
    let mut z_hi = z_hi;
    for _ in 0..200 {
        if z_hi - z_lo <= 1e-11 * z_hi {
            break;
        }
        let mid = 0.5 * (z_lo + z_hi);
        match least_fixed_point(spec, mid, Some(&y_lo)) {
            Some(y) => {
                z_lo = mid;
                y_lo = y;
            }
            None => z_hi = mid,
        }
    }
    if y_lo.iter().any(|&v| v > 1e8) {
        return Err(Error::DivergentSystem);
    }

    let k = spec.jacobian(z_lo, &y_lo);
    let v_start = match frobenius_eigenvalue(&k, 1e-12) {
        Ok((_, v)) => v,
        Err(_) => vec![1.0; n],
    };
    let (zeta, tau, _) = augmented_newton(spec, z_lo, &y_lo, &v_start, tol)?;
    if !(zeta >= z_lo * (1.0 - 1e-6) && zeta <= z_hi * (1.0 + 1e-6)) {
        return Err(Error::NoConvergence { iterations: MAX_NEWTON });
    }

    let kmat = spec.jacobian(zeta, &tau);
    let (lambda, frob_vec) = frobenius_eigenvalue(&kmat, 1e-15)?;
    let phi = spec.eval(zeta, &tau);
    let residual = (0..n).fold(0.0f64, |m, i| m.max((phi[i] - tau[i]).abs()));
    Ok(CriticalData {
        zeta,
        theta: tau[0],
        tau,
        kmat,
        frob_vec,
        frob_eigenvalue: lambda,
        tolerance: residual.max((lambda - 1.0).abs()),
    })
}

/// Newton on `Φ(z, y) = y, K(z, y) v = v, v_0 = 1` in the unknowns `(z, y, v_1..v_m)`.
fn augmented_newton(
    spec: &CombinatorialSpec,
    z0: f64,
    y0: &[f64],
    v0: &[f64],
    tol: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>), Error> {
    let n = spec.num_symbols();
    let dim = 2 * n;
    let mut z = z0;
    let mut y = y0.to_vec();
    let mut v = v0.to_vec();
    v[0] = 1.0;

    let residual = |z: f64, y: &[f64], v: &[f64]| -> Vec<f64> {
        let phi = spec.eval(z, y);
        let kv = spec.jacobian(z, y).mul_vec(v);
        let mut r = Vec::with_capacity(dim);
        for i in 0..n {
            r.push(phi[i] - y[i]);
        }
        for i in 0..n {
            r.push(kv[i] - v[i]);
        }
        r
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

    let mut r = residual(z, &y, &v);
    let mut blew_up = false;
    for _ in 0..MAX_NEWTON {
        let rn = norm(&r);
        if rn <= tol * 1e-3 {
            return Ok((z, y, v));
        }
        let mut j = Matrix::zeros(dim);
        let k = spec.jacobian(z, &y);
        let dz = spec.dz(z, &y);
        for a in 0..n {
            j[(a, 0)] = dz[a];
            for b in 0..n {
                j[(a, 1 + b)] = k[(a, b)] - if a == b { 1.0 } else { 0.0 };
            }
        }
        for id in 0..spec.num_monos() {
            let m = spec.mono(crate::spec::MonoId(id as u32));
            let a = m.color as usize;
            for b in 0..n {
                if m.k[b] == 0 {
                    continue;
                }
                if m.h > 0 {
                    j[(n + a, 0)] += mono_partial(m, z, &y, 1, &[b]) * v[b];
                }
                for c in 0..n {
                    if m.k[c] == 0 || (c == b && m.k[b] < 2) {
                        continue;
                    }
                    j[(n + a, 1 + c)] += mono_partial(m, z, &y, 0, &[b, c]) * v[b];
                }
            }
        }
        for a in 0..n {
            for b in 1..n {
                j[(n + a, n + b)] = k[(a, b)] - if a == b { 1.0 } else { 0.0 };
            }
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let Some(d) = solve(&j, &rhs) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let zn = z + t * d[0];
            let yn: Vec<f64> = (0..n).map(|i| y[i] + t * d[1 + i]).collect();
            let mut vn = v.clone();
            for b in 1..n {
                vn[b] = v[b] + t * d[n + b];
            }
            if zn > 0.0 && yn.iter().all(|&x| x > 0.0) && vn.iter().all(|&x| x > 0.0) {
                let rnew = residual(zn, &yn, &vn);
                if norm(&rnew) < rn || t < 1e-6 {
                    z = zn;
                    y = yn;
                    v = vn;
                    r = rnew;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if y.iter().any(|&x| x > 1e12) {
            blew_up = true;
            break;
        }
        if !accepted {
            // Converged to rounding level.
            if rn <= tol {
                return Ok((z, y, v));
            }
            break;
        }
    }
    if norm(&r) <= tol {
        return Ok((z, y, v));
    }
    if blew_up {
        Err(Error::DivergentSystem)
    } else {
        Err(Error::NoConvergence { iterations: MAX_NEWTON })
    }
}

/// Solution of the reduced system at `(z, u)`: colour 0 is fixed to `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSolution {
    /// Full vector `(u, Y_1(z,u), …, Y_m(z,u))`.
    pub y: Vec<f64>,
    /// `A(z, u) = Φ_0(z, u, Y_1, …, Y_m)`.
    pub a: f64,
    /// Spectral radius of the reduced Jacobian.
    pub radius: f64,
}

pub fn solve_reduced_system(spec: &CombinatorialSpec, z: f64, u: f64, tol: f64) -> Result<ReducedSolution, Error> {
    let n = spec.num_symbols();
    let idx: Vec<usize> = (1..n).collect();
    let mut y = vec![0.0; n];
    y[0] = u;
    let reduced_k = |y: &[f64]| spec.jacobian(z, y).submatrix(&idx);
    let mut converged = n == 1;
    for _ in 0..MAX_NEWTON {
        if converged {
            break;
        }
        let k = reduced_k(&y);
        if !is_subcritical(&k) {
            return Err(Error::OutsideSubcriticalBall { radius: spectral_radius(&k) });
        }
        let phi = spec.eval(z, &y);
        let r: Vec<f64> = idx.iter().map(|&i| phi[i] - y[i]).collect();
        let mut a = Matrix::identity(n - 1);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                a[(i, j)] -= k[(i, j)];
            }
        }
        let Some(d) = solve(&a, &r) else {
            return Err(Error::OutsideSubcriticalBall { radius: spectral_radius(&k) });
        };
        let scale = y[1..].iter().fold(1e-300f64, |m, &v| m.max(v.abs()));
        let step = d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        for (i, &j) in idx.iter().enumerate() {
            y[j] += d[i];
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutsideSubcriticalBall { radius: f64::INFINITY });
        }
        if step <= tol.max(4.0 * f64::EPSILON) * scale.max(1e-300) {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: MAX_NEWTON });
    }
    let k = reduced_k(&y);
    let radius = spectral_radius(&k);
    if n > 1 && (radius >= 1.0 || !is_subcritical(&k)) {
        return Err(Error::OutsideSubcriticalBall { radius });
    }
    let a = spec.eval(z, &y)[0];
    Ok(ReducedSolution { y, a, radius })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedConstants {
    pub v0: u32,
    pub t0: f64,
    /// `A(ζ, θ)`.
    pub a_crit: f64,
    /// `T0 ζ^{v0} / θ`.
    pub a0: f64,
    /// `A(ζ, θ)/θ - A0`.
    pub aneq: f64,
    /// `ζ ∂_ζ (A(ζ, θ)/θ)`.
    pub vbar: f64,
    /// `√(3 A≠ / v̄)`.
    pub eps: f64,
    /// `A≠ / v̄`.
    pub kappa_star: f64,
    /// `A0 / v̄`.
    pub mu_star: f64,
    /// Asymptotic probability that the first-phase walk lands on the diagonal.
    pub reach_prob: f64,
}

/// Step of the centred differences; Richardson extrapolation removes the `h^2` term.
const FD_STEP: f64 = 1e-3;

fn richardson(g: impl Fn(f64) -> Result<f64, Error>) -> Result<f64, Error> {
    let d = |h: f64| -> Result<f64, Error> { Ok((g(h)? - g(-h)?) / (2.0 * h)) };
    let d1 = d(FD_STEP)?;
    let d2 = d(FD_STEP / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

pub fn derived_constants(
    spec: &CombinatorialSpec,
    crit: &CriticalData,
    catalog: &SubtreeCatalog,
) -> Result<DerivedConstants, Error> {
    let (zeta, theta) = (crit.zeta, crit.theta);
    let v0 = catalog.v0;
    let t0 = catalog.t0_f64();
    let a_crit = solve_reduced_system(spec, zeta, theta, DEFAULT_TOL)?.a;
    let a0 = t0 * powi(zeta, v0) / theta;
    let aneq = a_crit / theta - a0;
    let vbar = richardson(|x| Ok(solve_reduced_system(spec, zeta * libm::exp(x), theta, DEFAULT_TOL)?.a / theta))?;
    let drift = DriftFunction::new(spec, crit, catalog)?;
    let fprime = richardson(|x| drift.eval(x))?;
    Ok(DerivedConstants {
        v0,
        t0,
        a_crit,
        a0,
        aneq,
        vbar,
        eps: libm::sqrt(3.0 * aneq / vbar),
        kappa_star: aneq / vbar,
        mu_star: a0 / vbar,
        reach_prob: 1.0 / fprime,
    })
}

/// `f(x) = ln((e^{-x v0} A(ζ e^x, θ e^{x v0})/θ - A0) / A≠)`, the cumulant generating
/// function of the diagonal index `ũ` under the critical measure conditioned off the base
/// class.
#[derive(Clone, Debug)]
pub struct DriftFunction<'a> {
    spec: &'a CombinatorialSpec,
    zeta: f64,
    theta: f64,
    v0: u32,
    a0: f64,
    aneq: f64,
}

impl<'a> DriftFunction<'a> {
    pub fn new(spec: &'a CombinatorialSpec, crit: &CriticalData, catalog: &SubtreeCatalog) -> Result<Self, Error> {
        let a_crit = solve_reduced_system(spec, crit.zeta, crit.theta, DEFAULT_TOL)?.a;
        let a0 = catalog.t0_f64() * powi(crit.zeta, catalog.v0) / crit.theta;
        Ok(DriftFunction {
            spec,
            zeta: crit.zeta,
            theta: crit.theta,
            v0: catalog.v0,
            a0,
            aneq: a_crit / crit.theta - a0,
        })
    }

    /// The shifted point `(ζ e^x, θ e^{x v0})`.
    pub fn point(&self, x: f64) -> (f64, f64) {
        (self.zeta * libm::exp(x), self.theta * libm::exp(x * self.v0 as f64))
    }

    /// `f(x)` given `A` at the shifted point.
    pub fn from_a(&self, x: f64, a: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let g = libm::exp(-x * self.v0 as f64) * a / self.theta - self.a0;
        libm::log(g / self.aneq)
    }

    pub fn eval(&self, x: f64) -> Result<f64, Error> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let (z, u) = self.point(x);
        let a = solve_reduced_system(self.spec, z, u, DEFAULT_TOL)?.a;
        Ok(self.from_a(x, a))
    }
}

pub fn drift_function_f(
    spec: &CombinatorialSpec,
    crit: &CriticalData,
    catalog: &SubtreeCatalog,
    x: f64,
) -> Result<f64, Error> {
    DriftFunction::new(spec, crit, catalog)?.eval(x)
}

/// `(A(ζ,θ)/θ - 1, ∂_θ(A/θ))` at the critical point; both vanish there.
pub fn condition_residuals(spec: &CombinatorialSpec, crit: &CriticalData) -> Result<(f64, f64), Error> {
    let (zeta, theta) = (crit.zeta, crit.theta);
    let ratio = |u: f64| -> Result<f64, Error> { Ok(solve_reduced_system(spec, zeta, u, DEFAULT_TOL)?.a / u) };
    let r0 = ratio(theta)? - 1.0;
    let d = richardson(|x| ratio(theta * libm::exp(x)))? / theta;
    Ok((r0, d))
}
