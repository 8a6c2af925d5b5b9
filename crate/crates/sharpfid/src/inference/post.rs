use super::density::{DensityHandle, Mixture, TiltedDensity, TruncatedDensity};
use super::hypothesis::GpdSpec;
use super::sample::WeightedSample;
use crate::error::{check_probability, Error, Result};
use crate::numerics::dist::Univariate;
use crate::numerics::sampling::Region;
use std::sync::Arc;

/// p0·m_in / (p0·m_in + (1 − p0)·m_out).
///
/// ```
/// use sharpfid::post_data_probability;
/// assert_eq!(post_data_probability(0.5, 2.0, 2.0).unwrap(), 0.5);
/// assert_eq!(post_data_probability(0.0, 3.0, 1.0).unwrap(), 0.0);
/// ```
pub fn post_data_probability(p0: f64, m_in: f64, m_out: f64) -> Result<f64> {
    for (what, m) in [("m_in", m_in), ("m_out", m_out)] {
        if !(m >= 0.0) || m.is_infinite() {
            return Err(Error::invalid(what, format!("{m} is not a finite nonnegative number")));
        }
    }
    post_data_probability_ln(p0, m_in.ln(), m_out.ln())
}

/// [`post_data_probability`] with the evidence given as logarithms, so
/// that values far below the smallest double still combine correctly.
pub fn post_data_probability_ln(p0: f64, ln_m_in: f64, ln_m_out: f64) -> Result<f64> {
    check_probability("prior probability", p0)?;
    if ln_m_in.is_nan() || ln_m_out.is_nan() || ln_m_in == f64::INFINITY || ln_m_out == f64::INFINITY {
        return Err(Error::invalid("evidence", "log evidence must be finite or -inf"));
    }
    if p0 == 0.0 {
        return Ok(0.0);
    }
    if p0 == 1.0 {
        return Ok(1.0);
    }
    match (ln_m_in == f64::NEG_INFINITY, ln_m_out == f64::NEG_INFINITY) {
        (true, true) => Err(Error::IndeterminateEvidence),
        (true, false) => Ok(0.0),
        (false, true) => Ok(1.0),
        (false, false) => {
            let d = ((-p0).ln_1p() + ln_m_out) - (p0.ln() + ln_m_in);
            Ok(1.0 / (1.0 + d.exp()))
        }
    }
}

/// p_in·f_in + (1 − p_in)·f_out for components on disjoint supports.
pub fn mixture_post_density(components: (DensityHandle, DensityHandle), p_in: f64) -> Result<DensityHandle> {
    check_probability("p_in", p_in)?;
    let (f_in, f_out) = components;
    for &(a1, b1) in &f_in.support() {
        for &(a2, b2) in &f_out.support() {
            let overlap = b1.min(b2) - a1.max(a2);
            let scale = [a1, b1, a2, b2]
                .iter()
                .filter(|v| v.is_finite())
                .fold(1.0f64, |m, v| m.max(v.abs()));
            if overlap > 1e-12 * scale {
                return Err(Error::SupportOverlap);
            }
        }
    }
    if p_in == 1.0 {
        return Ok(f_in);
    }
    if p_in == 0.0 {
        return Ok(f_out);
    }
    Ok(DensityHandle::Mixture(Arc::new(Mixture::new(vec![(p_in, f_in), (1.0 - p_in, f_out)])?)))
}

/// Multiplies a sample's weights by the pre-data weighting restricted to a
/// support, then renormalizes them to sum to one.
///
/// `inside` is the support predicate and `coord` maps a draw to the
/// coordinate the bump is evaluated at. A smoothed weighting must carry a
/// fixed τ here; continuity solving happens in the model backends.
pub fn apply_gpd_weight<T: Clone>(
    base: &WeightedSample<T>,
    gpd: &GpdSpec,
    inside: impl Fn(&T) -> bool,
    coord: impl Fn(&T) -> f64,
) -> Result<WeightedSample<T>> {
    gpd.validate()?;
    let weight = gpd.resolved()?;
    let w = base.reweight(|v| {
        if !inside(v) {
            0.0
        } else {
            match weight {
                None => 1.0,
                Some((bump, tau)) => 1.0 + tau * bump.eval(coord(v)),
            }
        }
    });
    match w {
        Err(Error::ZeroMass(_)) => Err(Error::ZeroMass("no draws fall inside the support".into())),
        other => other.map(WeightedSample::normalized),
    }
}

/// The closed-form counterpart of [`apply_gpd_weight`]: `base` restricted to
/// [lo, hi] and multiplied by the weighting. A point interval gives an atom.
pub fn apply_gpd_weight_density(
    base: Arc<dyn Univariate>,
    gpd: &GpdSpec,
    lo: f64,
    hi: f64,
) -> Result<DensityHandle> {
    gpd.validate()?;
    if lo == hi {
        return Ok(DensityHandle::Atom(lo));
    }
    match gpd.resolved()? {
        Some((bump, tau)) if tau > 0.0 => {
            Ok(DensityHandle::continuous(TiltedDensity::new(base, lo, hi, bump, tau)?))
        }
        _ => Ok(DensityHandle::continuous(TruncatedDensity::new(base, Region::Inside(lo, hi))?)),
    }
}

/// Predictive evidence for the two hypotheses, on the log scale. Only the
/// difference of the two logs is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub ln_m_in: f64,
    pub ln_m_out: f64,
    /// τ used for the inside component, for smoothed weightings.
    pub tau: Option<f64>,
}

impl Evidence {
    /// m_in / m_out.
    pub fn ratio(&self) -> f64 {
        (self.ln_m_in - self.ln_m_out).exp()
    }

    pub fn post_data_probability(&self, p0: f64) -> Result<f64> {
        post_data_probability_ln(p0, self.ln_m_in, self.ln_m_out)
    }
}

/// Post-data probability of a hypothesis with its two conditional
/// densities and diagnostics.
#[derive(Debug, Clone)]
pub struct PostDataResult {
    pub p_in: f64,
    pub p_out: f64,
    pub density_in: DensityHandle,
    pub density_out: DensityHandle,
    pub tau_used: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub ess: Option<f64>,
}

impl PostDataResult {
    /// The full post-data density p_in·f_in + p_out·f_out.
    pub fn mixture(&self) -> Result<DensityHandle> {
        mixture_post_density((self.density_in.clone(), self.density_out.clone()), self.p_in)
    }
}
