//! Proximal operators for the nonconvex penalty `lambda * |x|^p`, `p in [0,1)`,
//! and the channel-level group prox driving the structured-sparsity update.
//!
//! The scalar operator has a jump discontinuity: inputs below the threshold
//! `kappa(lambda, p)` map to exactly zero, inputs above it map to the larger
//! positive stationary point of `lambda x^p + (x - a)^2 / 2`, which is never
//! smaller than `branch_value_c`. For `p in {0, 1/2, 2/3}` the stationary
//! point has a closed form (hard threshold, cubic, quartic); other `p` use
//! safeguarded Newton.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ProxParams {
    pub lambda: f64,
    pub p: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl ProxParams {
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam(format!("lambda must be > 0, got {lambda}")));
        }
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParam(format!("p must be in [0,1), got {p}")));
        }
        Ok(ProxParams {
            lambda,
            p,
            newton_tol: 1e-12,
            newton_max_iter: 100,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxResult {
    pub value: f64,
    /// `|a|` landed exactly on the threshold; both 0 and `sgn(a) * c` are
    /// minimizers. We return the sparser candidate 0.
    pub is_tie: bool,
}

/// Threshold below which the prox is exactly zero:
/// `kappa = (2 - p) * lambda^(1/(2-p)) * (2(1-p))^((1-p)/(p-2))`,
/// equivalently `c * (2-p) / (2(1-p))`. At the tie `a = kappa` the nonzero
/// stationary point `c` and 0 attain the same objective value; brute-force
/// grid minimization of `lambda|x|^p + (x-a)^2/2` confirms both the jump
/// location and the tie magnitude.
pub fn threshold_kappa(params: &ProxParams) -> f64 {
    let (l, p) = (params.lambda, params.p);
    if p == 0.0 {
        // general formula reduces to sqrt(2 lambda); evaluate it directly
        // so the hard-threshold boundary is exact
        return (2.0 * l).sqrt();
    }
    (2.0 - p) * l.powf(1.0 / (2.0 - p)) * (2.0 * (1.0 - p)).powf((1.0 - p) / (p - 2.0))
}

/// Magnitude of the nonzero minimizer at the tie point:
/// `c = (2 * lambda * (1 - p))^(1/(2-p))`.
pub fn branch_value_c(params: &ProxParams) -> f64 {
    let (l, p) = (params.lambda, params.p);
    (2.0 * l * (1.0 - p)).powf(1.0 / (2.0 - p))
}

/// Minimizer of `lambda |x|^p + (x - a)^2 / 2`.
pub fn scalar_prox(a: f64, params: &ProxParams) -> ProxResult {
    scalar_prox_impl(a, params, false)
}

/// Same operator, but the above-threshold stationary point is always found
/// by Newton iteration, never by a closed form. This is the deliberately
/// iterative path used by the ADMM baseline and by closed-form agreement
/// tests.
pub fn scalar_prox_iterative(a: f64, params: &ProxParams) -> ProxResult {
    scalar_prox_impl(a, params, true)
}

fn scalar_prox_impl(a: f64, params: &ProxParams, force_newton: bool) -> ProxResult {
    let abs = a.abs();
    let kappa = threshold_kappa(params);
    if abs < kappa {
        return ProxResult { value: 0.0, is_tie: false };
    }
    if abs == kappa {
        return ProxResult { value: 0.0, is_tie: true };
    }
    let mag = if force_newton && params.p > 0.0 {
        solve_varpi_newton(abs, params).expect("newton varpi failed above threshold")
    } else {
        solve_varpi(abs, params).expect("varpi failed above threshold")
    };
    ProxResult {
        value: a.signum() * mag,
        is_tie: false,
    }
}

/// Larger positive root of `x - a + lambda * p * x^(p-1) = 0` for
/// `a > kappa(lambda, p)`. Dispatches to closed forms for `p in {0, 1/2, 2/3}`.
pub fn solve_varpi(a_abs: f64, params: &ProxParams) -> Result<f64> {
    let p = params.p;
    if p == 0.0 {
        // hard thresholding keeps the magnitude
        return Ok(a_abs);
    }
    if p == 0.5 {
        return Ok(varpi_half(a_abs, params.lambda));
    }
    if (p - 2.0 / 3.0).abs() < 1e-15 {
        return Ok(varpi_two_thirds(a_abs, params.lambda));
    }
    solve_varpi_newton(a_abs, params)
}

/// p = 1/2: substituting x = y^2 turns the stationarity condition into the
/// cubic y^3 - a y + lambda/2 = 0; the prox value is the square of its
/// largest real root.
fn varpi_half(a_abs: f64, lambda: f64) -> f64 {
    let y = largest_real_root_depressed_cubic(-a_abs, lambda / 2.0);
    y * y
}

/// p = 2/3: substituting x = y^3 gives the quartic y^4 - a y + 2*lambda/3 = 0.
/// Factor through the resolvent cubic z^3 - 4c z - a^2 = 0 (c = 2*lambda/3);
/// with s = sqrt(z*) the largest quartic root is (s + sqrt(2a/s - s^2)) / 2.
fn varpi_two_thirds(a_abs: f64, lambda: f64) -> f64 {
    let c = 2.0 * lambda / 3.0;
    let z = largest_real_root_depressed_cubic(-4.0 * c, -a_abs * a_abs);
    let s = z.max(0.0).sqrt();
    let disc = (2.0 * a_abs / s - s * s).max(0.0);
    let y = (s + disc.sqrt()) / 2.0;
    y * y * y
}

/// Largest real root of `y^3 + p y + q = 0` (trigonometric / hyperbolic
/// Cardano, no iteration).
fn largest_real_root_depressed_cubic(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return (-q).cbrt();
    }
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    if disc <= 0.0 {
        // three real roots (p < 0 here)
        let m = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let theta = arg.clamp(-1.0, 1.0).acos();
        2.0 * m * (theta / 3.0).cos()
    } else if p < 0.0 {
        let m = (-p / 3.0).sqrt();
        let arg = -3.0 * q.abs() / (2.0 * p) * (-3.0 / p).sqrt();
        -2.0 * q.signum() * m * ((arg.max(1.0)).acosh() / 3.0).cosh()
    } else {
        let m = (p / 3.0).sqrt();
        let arg = 3.0 * q / (2.0 * p) * (3.0 / p).sqrt();
        -2.0 * m * (arg.asinh() / 3.0).sinh()
    }
}

/// Newton's method on `f(x) = x - a + lambda p x^(p-1)` from `x0 = a`,
/// safeguarded by bisection on `[c(lambda,p), a]`. On that interval f is
/// strictly increasing with f(c) <= 0 <= f(a), so the bracket always holds.
pub fn solve_varpi_newton(a_abs: f64, params: &ProxParams) -> Result<f64> {
    let (l, p) = (params.lambda, params.p);
    if p == 0.0 {
        return Ok(a_abs);
    }
    let f = |x: f64| x - a_abs + l * p * x.powf(p - 1.0);
    let df = |x: f64| 1.0 + l * p * (p - 1.0) * x.powf(p - 2.0);

    let mut lo = branch_value_c(params).min(a_abs);
    let mut hi = a_abs;
    let mut x = a_abs;
    for _ in 0..params.newton_max_iter {
        let fx = f(x);
        if fx.abs() < params.newton_tol {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || d <= 0.0 {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    // pure bisection fallback
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < params.newton_tol || hi - lo < f64::EPSILON * hi.abs() {
            return Ok(mid);
        }
        if fm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    if f(x).abs() < 1e-8 {
        Ok(x)
    } else {
        Err(Error::NonFinite(format!(
            "varpi root finding stalled at x={x}, a={a_abs}, lambda={l}, p={p}"
        )))
    }
}

/// Group prox of Eq-(16) shape: prox of the l2 norm, output rescaled along
/// the input direction. Returns exactly zero or a positive multiple of `n`.
pub fn group_prox64(n: &[f64], params: &ProxParams) -> Vec<f64> {
    let norm = n.iter().map(|&v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; n.len()];
    }
    let shrunk = scalar_prox(norm, params).value;
    if shrunk == 0.0 {
        return vec![0.0; n.len()];
    }
    let scale = shrunk / norm;
    n.iter().map(|&v| v * scale).collect()
}

/// f32 convenience wrapper over [`group_prox64`]; arithmetic stays in f64.
pub fn group_prox(n: &[f32], params: &ProxParams) -> Vec<f32> {
    let n64: Vec<f64> = n.iter().map(|&v| v as f64).collect();
    group_prox64(&n64, params).iter().map(|&v| v as f32).collect()
}

/// Objective of the scalar prox problem, used by tests and the prox-check
/// verification sweep.
pub fn prox_objective(x: f64, a: f64, params: &ProxParams) -> f64 {
    let pen = if params.p == 0.0 {
        if x == 0.0 { 0.0 } else { params.lambda }
    } else {
        params.lambda * x.abs().powf(params.p)
    };
    pen + 0.5 * (x - a) * (x - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, p: f64) -> ProxParams {
        ProxParams::new(lambda, p).unwrap()
    }

    #[test]
    fn kappa_hard_threshold_values() {
        // p = 0: kappa = sqrt(2 lambda)
        assert!((threshold_kappa(&params(2.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!((threshold_kappa(&params(1.0, 0.0)) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn branch_value_cases() {
        assert!((branch_value_c(&params(2.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!((branch_value_c(&params(0.5, 0.0)) - 1.0).abs() < 1e-12);
        // 2 * lambda * (1 - p) = 2/3, exponent 1/(2 - p) = 3/4
        let expect = (2.0f64 / 3.0).powf(0.75);
        assert!((branch_value_c(&params(1.0, 2.0 / 3.0)) - expect).abs() < 1e-12);
    }

    #[test]
    fn hard_threshold_anchor_cases() {
        let pr = params(2.0, 0.0);
        assert_eq!(scalar_prox(3.0, &pr).value, 3.0);
        assert_eq!(scalar_prox(1.0, &pr).value, 0.0);
        assert_eq!(scalar_prox(-1.0, &pr).value, 0.0);
        assert_eq!(scalar_prox(-3.0, &pr).value, -3.0);
    }

    #[test]
    fn tie_returns_zero_and_flags() {
        let pr = params(2.0, 0.0);
        let r = scalar_prox(2.0, &pr);
        assert_eq!(r.value, 0.0);
        assert!(r.is_tie);
        // both candidates achieve the same objective at the tie
        let c = branch_value_c(&pr);
        let f0 = prox_objective(0.0, 2.0, &pr);
        let fc = prox_objective(c, 2.0, &pr);
        assert!((f0 - fc).abs() < 1e-12);
    }

    #[test]
    fn varpi_p0_is_identity() {
        assert_eq!(solve_varpi(5.0, &params(2.0, 0.0)).unwrap(), 5.0);
    }

    #[test]
    fn varpi_residuals_vanish() {
        for (l, p) in [(1.0, 0.5), (1.0, 2.0 / 3.0), (0.5, 0.3)] {
            let pr = params(l, p);
            let a = 1.5 * threshold_kappa(&pr);
            let x = solve_varpi(a, &pr).unwrap();
            let resid = x - a + l * p * x.powf(p - 1.0);
            assert!(resid.abs() < 1e-10, "residual {resid} at l={l} p={p} a={a}");
        }
    }

    #[test]
    fn closed_forms_match_newton() {
        for p in [0.5, 2.0 / 3.0] {
            for l in [0.05, 0.5, 1.0, 3.0] {
                let pr = params(l, p);
                let kappa = threshold_kappa(&pr);
                for step in 1..30 {
                    let a = kappa * (1.0 + 0.2 * step as f64);
                    let closed = solve_varpi(a, &pr).unwrap();
                    let newton = solve_varpi_newton(a, &pr).unwrap();
                    assert!(
                        (closed - newton).abs() < 1e-9,
                        "p={p} l={l} a={a}: closed={closed} newton={newton}"
                    );
                }
            }
        }
    }

    #[test]
    fn odd_symmetry_and_shrinkage() {
        for p in [0.0, 0.3, 0.5, 2.0 / 3.0, 0.9] {
            let pr = params(0.7, p);
            for i in 0..100 {
                let a = -5.0 + 0.1 * i as f64;
                let pos = scalar_prox(a, &pr).value;
                let neg = scalar_prox(-a, &pr).value;
                assert_eq!(pos, -neg);
                assert!(pos.abs() <= a.abs() + 1e-12);
            }
        }
    }

    #[test]
    fn dead_zone_and_jump() {
        for p in [0.0, 0.3, 0.5, 2.0 / 3.0, 0.9] {
            let pr = params(1.3, p);
            let kappa = threshold_kappa(&pr);
            let c = branch_value_c(&pr);
            assert_eq!(scalar_prox(kappa * 0.999, &pr).value, 0.0);
            let above = scalar_prox(kappa * 1.001, &pr).value;
            assert!(above >= c * 0.999, "p={p}: {above} < c={c}");
        }
    }

    #[test]
    fn group_prox_trivial_cases() {
        let pr = params(2.0, 0.0);
        assert_eq!(group_prox(&[0.0, 0.0, 0.0], &pr), vec![0.0, 0.0, 0.0]);
        // norm 5 > kappa 2, p=0 keeps the vector
        assert_eq!(group_prox(&[3.0, 4.0], &pr), vec![3.0, 4.0]);
        // norm 1 < kappa 2
        assert_eq!(group_prox(&[0.6, 0.8], &pr), vec![0.0, 0.0]);
    }

    #[test]
    fn group_prox_scalar_consistency() {
        let pr = params(0.5, 0.5);
        let n = [0.8f32, -0.3, 1.2, 0.05, -2.0];
        let out = group_prox(&n, &pr);
        let out_norm = crate::tensor::sum_sq(&out).sqrt();
        let in_norm = crate::tensor::sum_sq(&n).sqrt();
        let expect = scalar_prox(in_norm, &pr).value.abs();
        assert!((out_norm - expect).abs() < 1e-5);
        // direction preserved
        for (o, i) in out.iter().zip(&n) {
            assert_eq!(o.signum(), i.signum());
        }
    }

    #[test]
    fn single_element_group_matches_scalar() {
        for p in [0.0, 0.5, 2.0 / 3.0] {
            let pr = params(0.9, p);
            for a in [-3.0f32, -0.5, 0.4, 2.5] {
                let g = group_prox(&[a], &pr)[0] as f64;
                let s = scalar_prox(a as f64, &pr).value;
                assert!((g - s).abs() < 1e-6, "p={p} a={a}: {g} vs {s}");
            }
        }
    }
}
