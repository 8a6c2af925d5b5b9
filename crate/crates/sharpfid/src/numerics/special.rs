//! Special functions.
//!
//! Gamma, beta and error functions come from `statrs`; this module adds the
//! log-scale and tail-accurate variants the samplers need, plus an exact
//! finite-sum path for incomplete beta functions with integer parameters
//! (the binomial case), which is both faster and more accurate in the tails.

use statrs::function::{beta as sbeta, erf, gamma as sgamma};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// ln √(2π)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// ln(e^a + e^b) without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// ln(e^a − e^b) for a ≥ b.
pub fn ln_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp_m1()).ln()
}

// ---------------------------------------------------------------- normal

pub fn ln_norm_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

pub fn norm_pdf(z: f64) -> f64 {
    ln_norm_pdf(z).exp()
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn norm_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// ln Φ(z), accurate far into the lower tail.
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z > -20.0 {
        if z > 0.0 {
            (-norm_sf(z)).ln_1p()
        } else {
            norm_cdf(z).ln()
        }
    } else {
        // Asymptotic Mills-ratio series; the truncation error is below 1e-11 here.
        let r = 1.0 / (z * z);
        let series =
            1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
        ln_norm_pdf(z) - (-z).ln() + series.ln()
    }
}

pub fn ln_norm_sf(z: f64) -> f64 {
    ln_norm_cdf(-z)
}

pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        -SQRT_2 * erf::erfc_inv(2.0 * p)
    }
}

/// Inverse survival function: z with P(Z > z) = q.
pub fn norm_isf(q: f64) -> f64 {
    -norm_quantile(q)
}

/// ln P(a ≤ Z ≤ b) for a standard normal Z, without cancellation.
pub fn ln_norm_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return f64::NEG_INFINITY;
    }
    if a < 0.0 && b > 0.0 {
        // Both erf terms are positive here.
        return (0.5 * (libm::erf(b * FRAC_1_SQRT_2) + libm::erf(-a * FRAC_1_SQRT_2))).ln();
    }
    if a >= 0.0 {
        if b < 1.0 {
            let d = 0.5 * (libm::erf(b * FRAC_1_SQRT_2) - libm::erf(a * FRAC_1_SQRT_2));
            return d.ln();
        }
        ln_sub_exp(ln_norm_sf(a), ln_norm_sf(b))
    } else {
        ln_norm_interval(-b, -a)
    }
}

// ---------------------------------------------------------------- beta

/// Regularized incomplete beta I_x(a, b).
pub fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        sbeta::beta_reg(a, b, x)
    }
}

/// 1 − I_x(a, b), computed as I_{1−x}(b, a) so that small values keep precision.
pub fn beta_sf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        sbeta::beta_reg(b, a, 1.0 - x)
    }
}

/// Table of ln C(n, j) for j = 0..=n.
#[derive(Debug, Clone)]
pub struct LnChoose {
    n: u64,
    table: Vec<f64>,
}

impl LnChoose {
    pub fn new(n: u64) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        let lg_n = ln_gamma(n as f64 + 1.0);
        for j in 0..=n {
            table.push(lg_n - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64 + 1.0));
        }
        LnChoose { n, table }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn get(&self, j: u64) -> f64 {
        self.table[j as usize]
    }

    /// ln P(X = k) for X ~ Bin(n, p).
    pub fn ln_pmf(&self, k: u64, p: f64) -> f64 {
        let n = self.n;
        if k > n {
            return f64::NEG_INFINITY;
        }
        if p <= 0.0 {
            return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        if p >= 1.0 {
            return if k == n { 0.0 } else { f64::NEG_INFINITY };
        }
        self.get(k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
    }

    /// (ln P(X ≤ k), ln P(X > k)) for X ~ Bin(n, p).
    ///
    /// Whichever tail lies away from the mean is summed directly, so it
    /// keeps full relative precision even when it is astronomically small.
    pub fn ln_tails(&self, k: i64, p: f64) -> (f64, f64) {
        let n = self.n as i64;
        if k < 0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if k >= n {
            return (0.0, f64::NEG_INFINITY);
        }
        if p <= 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if p >= 1.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        let q = 1.0 - p;
        if (k as f64) < n as f64 * p {
            // Lower tail: terms shrink as j decreases from k.
            let lead = self.ln_pmf(k as u64, p);
            let r = q / p;
            let mut term = 1.0;
            let mut sum = 1.0;
            let mut j = k;
            while j > 0 {
                term *= j as f64 / (n - j + 1) as f64 * r;
                sum += term;
                if term < 1e-17 * sum {
                    break;
                }
                j -= 1;
            }
            let lower = lead + sum.ln();
            (lower, (-lower.exp()).ln_1p())
        } else {
            let lead = self.ln_pmf(k as u64 + 1, p);
            let r = p / q;
            let mut term = 1.0;
            let mut sum = 1.0;
            let mut j = k + 1;
            while j < n {
                term *= (n - j) as f64 / (j + 1) as f64 * r;
                sum += term;
                if term < 1e-17 * sum {
                    break;
                }
                j += 1;
            }
            let upper = lead + sum.ln();
            ((-upper.exp()).ln_1p(), upper)
        }
    }
}

/// Binomial CDF P(X ≤ k) for X ~ Bin(n, p).
pub fn binom_cdf(k: i64, n: u64, p: f64) -> f64 {
    LnChoose::new(n).ln_tails(k, p).0.exp()
}

// ---------------------------------------------------------------- gamma

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        sgamma::gamma_lr(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        sgamma::gamma_ur(a, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_values() {
        assert_relative_eq!(norm_cdf(1.959963984540054), 0.975, epsilon = 1e-14);
        assert_relative_eq!(norm_quantile(0.975), 1.959963984540054, epsilon = 1e-12);
        assert_relative_eq!(norm_isf(1e-10), 6.361340902404056, max_relative = 1e-12);
    }

    #[test]
    fn ln_norm_cdf_is_continuous_across_branch() {
        let a = ln_norm_cdf(-20.0 + 1e-9);
        let b = ln_norm_cdf(-20.0 - 1e-9);
        assert_relative_eq!(a, b, max_relative = 1e-9);
        // scipy.stats.norm.logcdf(-40)
        assert_relative_eq!(ln_norm_cdf(-40.0), -804.6084420137538, max_relative = 1e-12);
    }

    #[test]
    fn normal_interval_straddling_zero() {
        let w = 1e-7;
        let p = ln_norm_interval(-w, w).exp();
        assert_relative_eq!(p, 2.0 * w * norm_pdf(0.0), max_relative = 1e-9);
        assert_relative_eq!(ln_norm_interval(-1.96, 1.96).exp(), 0.950004209703559, epsilon = 1e-13);
        // Deep tail where Φ differences would underflow to zero.
        let far = ln_norm_interval(40.0, 41.0);
        assert!(far.is_finite() && far < -800.0);
    }

    #[test]
    fn binomial_tails_match_beta() {
        let t = LnChoose::new(16);
        for &p in &[0.01, 0.2, 0.5, 0.77, 0.999] {
            for k in 0..16 {
                let (lo, hi) = t.ln_tails(k, p);
                // P(X ≤ k) = I_{1−p}(n − k, k + 1)
                let reference = beta_cdf(16.0 - k as f64, k as f64 + 1.0, 1.0 - p);
                assert_relative_eq!(lo.exp(), reference, max_relative = 1e-10, epsilon = 1e-300);
                assert_relative_eq!(lo.exp() + hi.exp(), 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn binomial_tail_keeps_tiny_values() {
        let t = LnChoose::new(30);
        // P(X ≤ 0) at p = 0.99 is 0.01^30.
        let (lo, _) = t.ln_tails(0, 0.99);
        assert_relative_eq!(lo, 30.0 * 0.01f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn log_sum_helpers() {
        assert_relative_eq!(ln_add_exp(1000.0, 1000.0), 1000.0 + 2f64.ln());
        assert_relative_eq!(ln_sub_exp(0.0, -1e-20), (1e-20f64).ln(), max_relative = 1e-12);
    }
}
