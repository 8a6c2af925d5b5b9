//! Normal mean with known variance.
//!
//! The fiducial density of μ is N(x̄, σ²/n), and the likelihood of the
//! observed mean is the same function of μ, so every evidence integral has
//! a normal closed form except the bump moments of a smoothed weighting.

use crate::engine::matched::{matched_analyze, matched_components, matched_fit};
use crate::error::{check_finite, check_positive, check_probability, Error, Result};
use crate::inference::{DensityHandle, Evidence, GpdSpec, IntervalHypothesis, PostDataResult};
use crate::numerics::dist::{Normal, Univariate};
use std::sync::Arc;

/// Sample size, sample mean and the known standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalKnownSummary {
    n: u64,
    xbar: f64,
    sigma: f64,
}

impl NormalKnownSummary {
    pub fn new(n: u64, xbar: f64, sigma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "sample size must be at least 1"));
        }
        check_finite("xbar", xbar)?;
        check_positive("sigma", sigma)?;
        Ok(NormalKnownSummary { n, xbar, sigma })
    }

    /// A summary described only by its mean and standard error.
    pub fn from_standard_error(xbar: f64, se: f64) -> Result<Self> {
        NormalKnownSummary::new(1, xbar, se)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn xbar(&self) -> f64 {
        self.xbar
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn standard_error(&self) -> f64 {
        self.sigma / (self.n as f64).sqrt()
    }

    /// x̄ / se.
    pub fn z(&self) -> f64 {
        self.xbar / self.standard_error()
    }

    fn fiducial(&self) -> Normal {
        Normal::new(self.xbar, self.standard_error())
    }
}

/// The fiducial density conditioned on the hypothesis and on its
/// complement. The complement is `None` when the hypothesis covers the
/// whole line.
pub fn fiducial_components(
    s: &NormalKnownSummary,
    hyp: &IntervalHypothesis,
) -> Result<(DensityHandle, Option<DensityHandle>)> {
    let base: Arc<dyn Univariate> = Arc::new(s.fiducial());
    matched_components(base, hyp, &GpdSpec::Flat)
}

pub fn predictive_evidence(s: &NormalKnownSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<Evidence> {
    let fit = matched_fit(&s.fiducial(), hyp, gpd)?;
    Ok(Evidence { ln_m_in: fit.ln_m_in, ln_m_out: fit.ln_m_out, tau: fit.tau })
}

/// Post-data probability that μ equals the hypothesised value exactly,
/// where z is the standardized distance of x̄ from it:
///
/// ```text
/// p0 / (p0 + (1 − p0)·exp(z²/2)/√2)
/// ```
///
/// A prior outside [0, 1] gives NaN.
pub fn post_prob_sharp(z: f64, p0: f64) -> f64 {
    if !(0.0..=1.0).contains(&p0) {
        return f64::NAN;
    }
    let d = (-p0).ln_1p() - p0.ln() + 0.5 * z * z - 0.5 * std::f64::consts::LN_2;
    1.0 / (1.0 + d.exp())
}

/// |z| below which the sharp post-data probability exceeds the prior.
pub fn crossover_z() -> f64 {
    std::f64::consts::LN_2.sqrt()
}

/// The smallest posterior probability of the point null over all priors
/// for μ under the alternative:
///
/// ```text
/// (1 + ((1 − p0)/p0)·exp(z²/2))⁻¹
/// ```
pub fn berger_sellke_lower_bound(z: f64, p0: f64) -> Result<f64> {
    check_probability("prior probability", p0)?;
    if p0 == 0.0 || p0 == 1.0 {
        return Err(Error::invalid("prior probability", "must lie strictly between 0 and 1"));
    }
    let d = (-p0).ln_1p() - p0.ln() + 0.5 * z * z;
    Ok(1.0 / (1.0 + d.exp()))
}

/// Post-data probability of the hypothesis and both conditioned densities.
/// A smoothed weighting with [`Tau::Continuity`](crate::Tau) has its τ
/// solved so the mixture is continuous at both endpoints.
pub fn analyze(s: &NormalKnownSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<PostDataResult> {
    matched_analyze(&s.fiducial(), hyp, gpd)
}

/// Post-data probability that μ lies in [lo, hi], read off the full
/// mixture density (atom included).
pub fn interval_probability(result: &PostDataResult, lo: f64, hi: f64) -> Result<f64> {
    Ok(result.mixture()?.mass_between(lo, hi))
}
