//! One-dimensional root finding.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket, stopping once the bracket is no
/// wider than `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::BadBracket { f_lo: fa, f_hi: fb });
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Solves `ln_tail(x) = ln_target` for a monotone tail probability.
///
/// `increasing` says whether the tail grows with `x` (a CDF) or shrinks (a
/// survival function); `ln_slope(x)` is ln |d tail / dx|. Newton steps are
/// taken on the log scale, which is well conditioned in both tails, with a
/// bisection fallback whenever a step leaves the current bracket.
pub(crate) fn invert_ln_tail(
    ln_tail: impl Fn(f64) -> f64,
    ln_slope: impl Fn(f64) -> f64,
    increasing: bool,
    ln_target: f64,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
) -> f64 {
    let mut x = if x0 > lo && x0 < hi && x0.is_finite() {
        x0
    } else {
        fallback_point(lo, hi, 0.0, true)
    };
    for _ in 0..300 {
        let lt = ln_tail(x);
        let h = lt - ln_target;
        if h == 0.0 {
            return x;
        }
        let root_below = if h.is_nan() {
            // Both infinite: tail saturated at 0 where the target is too.
            return x;
        } else {
            (h > 0.0) == increasing
        };
        if root_below {
            hi = x;
        } else {
            lo = x;
        }
        let sign = if increasing { 1.0 } else { -1.0 };
        let deriv = sign * (ln_slope(x) - lt).exp();
        let mut next = x - h / deriv;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = fallback_point(lo, hi, x, root_below);
        }
        let scale = x.abs().max(next.abs()).max(f64::MIN_POSITIVE);
        if (next - x).abs() <= 4.0 * f64::EPSILON * scale {
            return next;
        }
        if lo.is_finite() && hi.is_finite() && hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return 0.5 * (lo + hi);
        }
        x = next;
    }
    x
}

fn fallback_point(lo: f64, hi: f64, x: f64, root_below: bool) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => {
            let base = if x > lo { x } else { lo };
            base + (2.0 * base.abs()).max(1.0)
        }
        (false, true) => {
            let base = if x < hi { x } else { hi };
            base - (2.0 * base.abs()).max(1.0)
        }
        (false, false) => {
            if root_below {
                x - (2.0 * x.abs()).max(1.0)
            } else {
                x + (2.0 * x.abs()).max(1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{binom_cdf, ln_norm_cdf, ln_norm_pdf};

    #[test]
    fn bisect_linear() {
        let r = bisect(|x| x - 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(matches!(
            bisect(|x| x * x, 1.0, 2.0, 1e-12),
            Err(Error::BadBracket { .. })
        ));
    }

    #[test]
    fn bisect_binomial_median_equation() {
        let r = bisect(|p| binom_cdf(4, 16, p) - 0.5, 0.0, 1.0, 1e-13).unwrap();
        assert!((binom_cdf(4, 16, r) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn inverts_normal_tails() {
        for &z in &[-30.0, -5.0, -1.0, 0.3, 2.0] {
            let t = ln_norm_cdf(z);
            let x = invert_ln_tail(ln_norm_cdf, ln_norm_pdf, true, t, f64::NEG_INFINITY, f64::INFINITY, 0.0);
            assert!((x - z).abs() < 1e-12 * z.abs().max(1.0), "{z} -> {x}");
        }
    }
}
