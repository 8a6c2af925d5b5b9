//! Univariate distributions with tail-accurate CDFs and quantiles.
//!
//! Everything here samples by inversion, so a draw is a deterministic
//! function of one uniform variate.

use super::rng::uniform_open;
use super::roots::invert_ln_tail;
use super::special::{
    beta_cdf, beta_sf, gamma_p, gamma_q, ln_add_exp, ln_beta, ln_gamma, ln_norm_cdf,
    ln_norm_interval, ln_norm_pdf, ln_norm_sf, ln_sub_exp, norm_cdf, norm_isf, norm_quantile,
    norm_sf, LnChoose,
};
use rand::RngCore;
use std::fmt;

/// A continuous distribution on the real line (or a part of it).
pub trait Univariate: Send + Sync + fmt::Debug {
    fn ln_pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn sf(&self, x: f64) -> f64;
    fn median(&self) -> f64;
    fn support(&self) -> (f64, f64);

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }

    fn ln_sf(&self, x: f64) -> f64 {
        self.sf(x).ln()
    }

    /// Starting point for numerical inversion.
    fn quantile_guess(&self, _p: f64) -> f64 {
        self.median()
    }

    fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        let x0 = self.quantile_guess(p);
        if p <= 0.5 {
            invert_ln_tail(|x| self.ln_cdf(x), |x| self.ln_pdf(x), true, p.ln(), lo, hi, x0)
        } else {
            invert_ln_tail(|x| self.ln_sf(x), |x| self.ln_pdf(x), false, (-p).ln_1p(), lo, hi, x0)
        }
    }

    /// x with P(X > x) = q.
    fn isf(&self, q: f64) -> f64 {
        let (lo, hi) = self.support();
        if q <= 0.0 {
            return hi;
        }
        if q >= 1.0 {
            return lo;
        }
        let x0 = self.quantile_guess(1.0 - q);
        if q <= 0.5 {
            invert_ln_tail(|x| self.ln_sf(x), |x| self.ln_pdf(x), false, q.ln(), lo, hi, x0)
        } else {
            invert_ln_tail(|x| self.ln_cdf(x), |x| self.ln_pdf(x), true, (-q).ln_1p(), lo, hi, x0)
        }
    }

    /// ln P(a ≤ X ≤ b), working on whichever tail avoids cancellation.
    fn ln_interval(&self, a: f64, b: f64) -> f64 {
        if a >= b {
            return f64::NEG_INFINITY;
        }
        let m = self.median();
        if a >= m {
            ln_sub_exp(self.ln_sf(a), self.ln_sf(b))
        } else if b <= m {
            ln_sub_exp(self.ln_cdf(b), self.ln_cdf(a))
        } else {
            (1.0 - self.cdf(a) - self.sf(b)).ln()
        }
    }

    /// Inverse-CDF draw from the distribution restricted to [a, b], given a
    /// uniform variate `u`.
    fn draw_between(&self, a: f64, b: f64, u: f64) -> f64 {
        let x0 = if a.is_finite() && b.is_finite() {
            0.5 * (a + b)
        } else {
            self.median().clamp(a, b)
        };
        let x = if a >= self.median() {
            let (la, lb) = (self.ln_sf(a), self.ln_sf(b));
            let target = ln_add_exp(lb, (-u).ln_1p() + ln_sub_exp(la, lb));
            invert_ln_tail(|x| self.ln_sf(x), |x| self.ln_pdf(x), false, target, a, b, x0)
        } else {
            let (la, lb) = (self.ln_cdf(a), self.ln_cdf(b));
            let target = ln_add_exp(la, u.ln() + ln_sub_exp(lb, la));
            invert_ln_tail(|x| self.ln_cdf(x), |x| self.ln_pdf(x), true, target, a, b, x0)
        };
        x.clamp(a, b)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(uniform_open(rng))
    }
}

// ---------------------------------------------------------------- normal

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Self {
        Normal { mean, sd }
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

impl Univariate for Normal {
    fn ln_pdf(&self, x: f64) -> f64 {
        ln_norm_pdf(self.z(x)) - self.sd.ln()
    }
    fn cdf(&self, x: f64) -> f64 {
        norm_cdf(self.z(x))
    }
    fn sf(&self, x: f64) -> f64 {
        norm_sf(self.z(x))
    }
    fn ln_cdf(&self, x: f64) -> f64 {
        ln_norm_cdf(self.z(x))
    }
    fn ln_sf(&self, x: f64) -> f64 {
        ln_norm_sf(self.z(x))
    }
    fn median(&self) -> f64 {
        self.mean
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn quantile(&self, p: f64) -> f64 {
        self.mean + self.sd * norm_quantile(p)
    }
    fn isf(&self, q: f64) -> f64 {
        self.mean + self.sd * norm_isf(q)
    }
    fn ln_interval(&self, a: f64, b: f64) -> f64 {
        ln_norm_interval(self.z(a), self.z(b))
    }
    fn draw_between(&self, a: f64, b: f64, u: f64) -> f64 {
        let (za, zb) = (self.z(a), self.z(b));
        let z = if za >= 0.0 {
            let (sa, sb) = (norm_sf(za), norm_sf(zb));
            if sa < 1e-290 {
                return default_draw_between(self, a, b, u);
            }
            norm_isf(sb + (1.0 - u) * (sa - sb))
        } else if zb <= 0.0 {
            let (ca, cb) = (norm_cdf(za), norm_cdf(zb));
            if cb < 1e-290 {
                return default_draw_between(self, a, b, u);
            }
            norm_quantile(ca + u * (cb - ca))
        } else {
            let (ca, cb) = (norm_cdf(za), norm_cdf(zb));
            norm_quantile(ca + u * (cb - ca))
        };
        (self.mean + self.sd * z).clamp(a, b)
    }
}

/// The generic log-scale inversion, reachable from overriding impls.
fn default_draw_between<D: Univariate>(d: &D, a: f64, b: f64, u: f64) -> f64 {
    struct Generic<'a, D>(&'a D);
    impl<D: Univariate> fmt::Debug for Generic<'_, D> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            self.0.fmt(f)
        }
    }
    impl<D: Univariate> Univariate for Generic<'_, D> {
        fn ln_pdf(&self, x: f64) -> f64 {
            self.0.ln_pdf(x)
        }
        fn cdf(&self, x: f64) -> f64 {
            self.0.cdf(x)
        }
        fn sf(&self, x: f64) -> f64 {
            self.0.sf(x)
        }
        fn ln_cdf(&self, x: f64) -> f64 {
            self.0.ln_cdf(x)
        }
        fn ln_sf(&self, x: f64) -> f64 {
            self.0.ln_sf(x)
        }
        fn median(&self) -> f64 {
            self.0.median()
        }
        fn support(&self) -> (f64, f64) {
            self.0.support()
        }
    }
    Generic(d).draw_between(a, b, u)
}

// ---------------------------------------------------------------- student t

/// Location-scale Student t with `df` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    pub loc: f64,
    pub scale: f64,
    pub df: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(loc: f64, scale: f64, df: f64) -> Self {
        let ln_norm = ln_gamma(0.5 * (df + 1.0))
            - ln_gamma(0.5 * df)
            - 0.5 * (df * std::f64::consts::PI).ln()
            - scale.ln();
        StudentT { loc, scale, df, ln_norm }
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.loc) / self.scale
    }

    /// P(T > t) for the standard t and t ≥ 0.
    fn upper(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        let nu = self.df;
        0.5 * beta_cdf(0.5 * nu, 0.5, nu / (nu + t * t))
    }
}

impl Univariate for StudentT {
    fn ln_pdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        self.ln_norm - 0.5 * (self.df + 1.0) * (z * z / self.df).ln_1p()
    }
    fn cdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if z < 0.0 {
            self.upper(-z)
        } else {
            1.0 - self.upper(z)
        }
    }
    fn sf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if z > 0.0 {
            self.upper(z)
        } else {
            1.0 - self.upper(-z)
        }
    }
    fn median(&self) -> f64 {
        self.loc
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn quantile_guess(&self, p: f64) -> f64 {
        self.loc + self.scale * norm_quantile(p)
    }
}

// ---------------------------------------------------------------- beta

/// Beta(a, b). Integer shape pairs use an exact binomial-sum CDF.
#[derive(Debug, Clone)]
pub struct BetaDist {
    pub a: f64,
    pub b: f64,
    ln_b: f64,
    table: Option<LnChoose>,
}

impl BetaDist {
    pub fn new(a: f64, b: f64) -> Self {
        let integral = a.fract() == 0.0 && b.fract() == 0.0 && a + b <= 4001.0;
        let table = integral.then(|| LnChoose::new((a + b - 1.0) as u64));
        BetaDist { a, b, ln_b: ln_beta(a, b), table }
    }

    /// (ln I_x(a, b), ln(1 − I_x(a, b)))
    fn ln_both(&self, x: f64) -> (f64, f64) {
        if x <= 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if x >= 1.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        match &self.table {
            Some(t) => {
                // I_x(a, b) = P(Bin(a + b − 1, x) ≥ a)
                let (below, above) = t.ln_tails(self.a as i64 - 1, x);
                (above, below)
            }
            None => (beta_cdf(self.a, self.b, x).ln(), beta_sf(self.a, self.b, x).ln()),
        }
    }
}

impl Univariate for BetaDist {
    fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        let la = if self.a == 1.0 { 0.0 } else { (self.a - 1.0) * x.ln() };
        let lb = if self.b == 1.0 { 0.0 } else { (self.b - 1.0) * (-x).ln_1p() };
        la + lb - self.ln_b
    }
    fn cdf(&self, x: f64) -> f64 {
        self.ln_both(x).0.exp()
    }
    fn sf(&self, x: f64) -> f64 {
        self.ln_both(x).1.exp()
    }
    fn ln_cdf(&self, x: f64) -> f64 {
        self.ln_both(x).0
    }
    fn ln_sf(&self, x: f64) -> f64 {
        self.ln_both(x).1
    }
    fn median(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        if a >= 1.0 && b >= 1.0 {
            (a - 1.0 / 3.0) / (a + b - 2.0 / 3.0)
        } else {
            a / (a + b)
        }
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

// ---------------------------------------------------------------- gamma

/// Gamma(shape, scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDist {
    pub shape: f64,
    pub scale: f64,
    ln_norm: f64,
}

impl GammaDist {
    pub fn new(shape: f64, scale: f64) -> Self {
        GammaDist { shape, scale, ln_norm: -ln_gamma(shape) - shape * scale.ln() }
    }
}

impl Univariate for GammaDist {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_norm + (self.shape - 1.0) * x.ln() - x / self.scale
    }
    fn cdf(&self, x: f64) -> f64 {
        gamma_p(self.shape, x / self.scale)
    }
    fn sf(&self, x: f64) -> f64 {
        gamma_q(self.shape, x / self.scale)
    }
    fn median(&self) -> f64 {
        self.quantile_guess(0.5)
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn quantile_guess(&self, p: f64) -> f64 {
        // Wilson–Hilferty
        let k = self.shape;
        let c = 1.0 - 1.0 / (9.0 * k) + norm_quantile(p) / (3.0 * k.sqrt());
        let g = k * c * c * c;
        if g > 0.0 {
            g * self.scale
        } else {
            (p * k * ln_gamma(k).exp()).powf(1.0 / k).max(f64::MIN_POSITIVE) * self.scale
        }
    }
}

/// Inverse gamma with density ∝ x^{−(shape+1)} e^{−scale/x}; 1/X ~ Gamma(shape, rate = scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGamma {
    pub shape: f64,
    pub scale: f64,
    gamma: GammaDist,
}

impl InverseGamma {
    pub fn new(shape: f64, scale: f64) -> Self {
        InverseGamma { shape, scale, gamma: GammaDist::new(shape, 1.0) }
    }

    pub fn mean(&self) -> f64 {
        if self.shape > 1.0 {
            self.scale / (self.shape - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

impl Univariate for InverseGamma {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.scale.ln() - ln_gamma(self.shape) - (self.shape + 1.0) * x.ln()
            - self.scale / x
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_q(self.shape, self.scale / x)
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            gamma_p(self.shape, self.scale / x)
        }
    }
    fn median(&self) -> f64 {
        self.scale / self.gamma.median()
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn quantile(&self, p: f64) -> f64 {
        self.scale / self.gamma.isf(p)
    }
    fn isf(&self, q: f64) -> f64 {
        self.scale / self.gamma.quantile(q)
    }
}
