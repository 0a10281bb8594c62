//! Log-gamma with explicit error bounds, digamma, trigamma, and a few stable helpers.

/// Unit roundoff of `f64`.
pub const EPS: f64 = f64::EPSILON * 0.5;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

// B_{2j} / (2j (2j - 1)) for j = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const SHIFT: f64 = 10.0;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_bounded(x).0
}

/// `ln Γ(x)` for `x > 0` together with an absolute error bound.
///
/// Arguments below 10 are shifted up with the recurrence; the Stirling series is cut
/// after seven correction terms and the first omitted term bounds the remainder.
pub fn ln_gamma_bounded(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "ln_gamma needs x > 0, got {x}");
    if x == 1.0 || x == 2.0 {
        return (0.0, 0.0);
    }
    let mut y = x;
    let mut prod = 1.0;
    let mut shifts = 0u32;
    while y < SHIFT {
        prod *= y;
        y += 1.0;
        shifts += 1;
    }
    let (s, e) = stirling(y);
    if shifts == 0 {
        return (s, e);
    }
    let lp = libm::log(prod);
    let err = e + (shifts as f64 + 2.0) * EPS * lp.abs().max(1.0) + 2.0 * EPS * (s.abs() + lp.abs());
    (s - lp, err)
}

fn stirling(y: f64) -> (f64, f64) {
    let ln_y = libm::log(y);
    let main = (y - 0.5) * ln_y - y + LN_SQRT_2PI;
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING.iter().take(7) {
        corr += c * p;
        p *= inv2;
    }
    let remainder = STIRLING[7].abs() * p;
    let value = main + corr;
    let rounding = 4.0 * EPS * ((y - 0.5) * ln_y).abs() + 2.0 * EPS * (y + LN_SQRT_2PI + corr.abs()) + 2.0 * EPS * value.abs();
    (value, remainder + rounding)
}

/// `ln n!` with an absolute error bound.
pub fn ln_factorial_bounded(n: u64) -> (f64, f64) {
    if n < 2 {
        return (0.0, 0.0);
    }
    ln_gamma_bounded(n as f64 + 1.0)
}

/// Robbins bounds: `1/(12n+1) <= ln n! - ln(√(2π) n^{n+1/2} e^{-n}) <= 1/(12n)`.
pub fn robbins_bounds(n: u64) -> (f64, f64) {
    let n = n as f64;
    (1.0 / (12.0 * n + 1.0), 1.0 / (12.0 * n))
}

/// An interval containing `ln n!` for `n >= 1`, from the Robbins bounds with rounding slack.
pub fn ln_factorial_interval(n: u64) -> (f64, f64) {
    if n <= 1 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let base = LN_SQRT_2PI + (nf + 0.5) * libm::log(nf) - nf;
    let (lo, hi) = robbins_bounds(n);
    let slack = 8.0 * EPS * ((nf + 0.5) * libm::log(nf) + nf + 1.0);
    (base + lo - slack, base + hi + slack)
}

/// Digamma `ψ(x)` for `x > 0`, absolute error about `1e-15` relative to `|ψ|`.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut y = x;
    let mut acc = 0.0;
    while y < SHIFT {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    acc + libm::log(y) - 0.5 * inv - series
}

/// Trigamma `ψ'(x)` for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut y = x;
    let mut acc = 0.0;
    while y < SHIFT {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0))))));
    acc + series
}

/// `ln cosh x` without overflow and accurate near 0.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        let s = libm::sinh(0.5 * a);
        libm::log1p(2.0 * s * s)
    } else {
        a + libm::log1p(libm::exp(-2.0 * a)) - core::f64::consts::LN_2
    }
}

/// `c(x) = -ln cosh √x + √x tanh √x`.
pub fn c_fn(x: f64) -> f64 {
    let s = libm::sqrt(x);
    -ln_cosh(s) + s * libm::tanh(s)
}

/// Rational lower and upper bounds of `c(x)`.
pub fn c_bounds(x: f64) -> (f64, f64) {
    (
        3.0 * x * (12.0 + x) / ((6.0 + x) * (12.0 + 5.0 * x)),
        3.0 * x * (6.0 + x) / (4.0 * (3.0 + x) * (3.0 + x)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_integers() {
        let mut f = 1.0f64;
        for n in 1..30u32 {
            f *= n as f64;
            let (v, e) = ln_gamma_bounded(n as f64 + 1.0);
            let exact = libm::log(f);
            assert!((v - exact).abs() <= e + 4.0 * EPS * exact.abs(), "n = {n}: {v} vs {exact}, err {e}");
            assert!(e < 1e-13 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn ln_gamma_half() {
        let (v, e) = ln_gamma_bounded(0.5);
        let exact = 0.572_364_942_924_700_1;
        assert!((v - exact).abs() <= e + 1e-16);
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-14);
        assert!((digamma(0.5) + euler + 2.0 * core::f64::consts::LN_2).abs() < 1e-14);
        let x = 123.4;
        let d = digamma(x + 1.0) - digamma(x);
        assert!((d - 1.0 / x).abs() < 1e-14);
    }

    #[test]
    fn trigamma_values() {
        let pi2_6 = core::f64::consts::PI * core::f64::consts::PI / 6.0;
        assert!((trigamma(1.0) - pi2_6).abs() < 1e-13);
        let x = 57.25;
        assert!((trigamma(x) - trigamma(x + 1.0) - 1.0 / (x * x)).abs() < 1e-15);
    }

    #[test]
    fn ln_cosh_ranges() {
        assert_eq!(ln_cosh(0.0), 0.0);
        assert!((ln_cosh(1e-8) - 5e-17).abs() < 1e-30);
        assert!((ln_cosh(1000.0) - (1000.0 - core::f64::consts::LN_2)).abs() < 1e-12);
        assert!((ln_cosh(0.7) - libm::log(libm::cosh(0.7))).abs() < 1e-15);
    }

    #[test]
    fn robbins_interval_contains_stirling_value() {
        for n in [2u64, 3, 10, 100, 10_000] {
            let (lo, hi) = ln_factorial_interval(n);
            let v = ln_gamma(n as f64 + 1.0);
            assert!(lo <= v && v <= hi, "n = {n}");
        }
    }
}
