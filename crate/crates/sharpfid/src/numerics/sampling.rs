//! Truncated and inverse-gamma samplers.

use super::dist::{BetaDist, InverseGamma, Normal, Univariate};
use super::rng::uniform_open;
use super::special::ln_add_exp;
use crate::error::{check_finite, check_positive, Error, Result};
use rand::RngCore;

/// Regions below this probability are treated as empty.
pub const MIN_REGION_MASS: f64 = 1e-300;

/// Part of the line a truncated draw is restricted to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// The closed interval [lo, hi].
    Inside(f64, f64),
    /// The complement of the open interval (lo, hi).
    Outside(f64, f64),
}

impl Region {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Region::Inside(lo, hi) => lo <= x && x <= hi,
            Region::Outside(lo, hi) => x <= lo || x >= hi,
        }
    }

    fn validate(&self) -> Result<()> {
        let (Region::Inside(lo, hi) | Region::Outside(lo, hi)) = *self;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid("region", format!("[{lo}, {hi}] is not an interval")));
        }
        Ok(())
    }
}

/// ln of the probability `d` assigns to `region`.
pub fn ln_region_mass<D: Univariate + ?Sized>(d: &D, region: Region) -> f64 {
    match region {
        Region::Inside(lo, hi) => {
            if lo == hi {
                f64::NEG_INFINITY
            } else {
                d.ln_interval(lo, hi)
            }
        }
        Region::Outside(lo, hi) => ln_add_exp(d.ln_cdf(lo), d.ln_sf(hi)),
    }
}

/// Inverse-CDF draw from `d` restricted to `region`, given uniform `u`.
pub(crate) fn truncated_draw<D: Univariate + ?Sized>(d: &D, region: Region, u: f64, v: f64) -> f64 {
    match region {
        Region::Inside(lo, hi) => d.draw_between(lo, hi, u),
        Region::Outside(lo, hi) => {
            let (left, right) = (d.ln_cdf(lo), d.ln_sf(hi));
            let p_left = (left - ln_add_exp(left, right)).exp();
            if v < p_left {
                d.draw_between(d.support().0, lo, u)
            } else {
                d.draw_between(hi, d.support().1, u)
            }
        }
    }
}

/// Checks the region mass and draws once. `Outside` regions consume two
/// uniforms (piece choice, then position); `Inside` regions consume one.
pub fn sample_truncated<D: Univariate + ?Sized>(
    d: &D,
    region: Region,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    region.validate()?;
    let mass = ln_region_mass(d, region).exp();
    if !(mass >= MIN_REGION_MASS) {
        return Err(Error::ZeroRegionMass { mass });
    }
    let v = match region {
        Region::Inside(..) => 0.0,
        Region::Outside(..) => uniform_open(rng),
    };
    let u = uniform_open(rng);
    Ok(truncated_draw(d, region, u, v))
}

pub fn sample_truncated_normal(
    mean: f64,
    sd: f64,
    region: Region,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    check_finite("mean", mean)?;
    check_positive("sd", sd)?;
    sample_truncated(&Normal::new(mean, sd), region, rng)
}

/// Beta(alpha, beta) restricted to [lo, hi] ⊆ [0, 1].
pub fn sample_truncated_beta(
    alpha: f64,
    beta: f64,
    lo: f64,
    hi: f64,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::invalid("interval", format!("[{lo}, {hi}] is not inside [0, 1]")));
    }
    sample_truncated(&BetaDist::new(alpha, beta), Region::Inside(lo, hi), rng)
}

/// Draw X with 1/X ~ Gamma(shape, rate = scale).
pub fn sample_inverse_gamma(shape: f64, scale: f64, rng: &mut dyn RngCore) -> Result<f64> {
    check_positive("shape", shape)?;
    check_positive("scale", scale)?;
    Ok(InverseGamma::new(shape, scale).sample(rng))
}
