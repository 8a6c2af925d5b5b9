//! Evidence and components when the data kernel matches the fiducial base.
//!
//! In the normal examples the likelihood of the observed summary, viewed as
//! a function of μ (and averaged over σ in the unknown-variance case), is
//! proportional to the fiducial base density f itself. The predictive
//! evidence of a region R is then
//!
//! ```text
//! m_R ∝ ∫_R w f² / ∫_R w f
//! ```
//!
//! with w = 1 + τh inside and w = 1 outside, and the common factor cancels
//! from every post-data probability. A point hypothesis {a} has m ∝ f(a).

use crate::error::{Error, Result};
use crate::inference::{
    apply_gpd_weight_density, post_data_probability_ln, BumpDensity, DensityHandle, GpdSpec,
    IntervalHypothesis, PostDataResult, Tau, TruncatedDensity,
};
use crate::numerics::dist::{Normal, StudentT, Univariate};
use crate::numerics::sampling::{ln_region_mass, Region};
use crate::numerics::special::{ln_add_exp, ln_beta, ln_norm_cdf, ln_norm_interval, ln_norm_sf};
use crate::numerics::{integrate, solve_tau, AffineTauModel, QuadratureSpec};
use std::sync::Arc;

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec::relative(1e-12)
}

/// Integrals of the squared base density.
pub(crate) trait SquaredMass: Univariate {
    /// ln ∫_R f².
    fn ln_sq_total(&self) -> f64;

    fn ln_sq_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        ln_sq_quadrature(self, lo, hi)
    }

    fn ln_sq_outside(&self, lo: f64, hi: f64) -> Result<f64> {
        let left = ln_sq_quadrature(self, f64::NEG_INFINITY, lo)?;
        let right = ln_sq_quadrature(self, hi, f64::INFINITY)?;
        Ok(ln_add_exp(left, right))
    }
}

/// ln ∫_a^b f², scaled by the density at the point of [a, b] nearest the
/// median so that far-tail intervals keep full relative accuracy.
fn ln_sq_quadrature<D: Univariate + ?Sized>(d: &D, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Ok(f64::NEG_INFINITY);
    }
    let anchor = d.median().clamp(a, b);
    let ln_fa = d.ln_pdf(anchor);
    let v = integrate(|x| (2.0 * (d.ln_pdf(x) - ln_fa)).exp(), a, b, &quad_spec())?;
    Ok(v.ln() + 2.0 * ln_fa)
}

/// ln ∫_a^b h·f^k for k = 1, 2, with the same anchoring.
fn ln_bump_moment<D: Univariate + ?Sized>(d: &D, bump: &BumpDensity, a: f64, b: f64, k: f64) -> Result<f64> {
    let anchor = d.median().clamp(a, b);
    let ln_fa = d.ln_pdf(anchor);
    let v = integrate(|x| bump.eval(x) * (k * (d.ln_pdf(x) - ln_fa)).exp(), a, b, &quad_spec())?;
    Ok(v.ln() + k * ln_fa)
}

impl SquaredMass for Normal {
    fn ln_sq_total(&self) -> f64 {
        -(2.0 * std::f64::consts::PI.sqrt() * self.sd).ln()
    }

    fn ln_sq_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        let r = std::f64::consts::SQRT_2 / self.sd;
        Ok(self.ln_sq_total() + ln_norm_interval(r * (lo - self.mean), r * (hi - self.mean)))
    }

    fn ln_sq_outside(&self, lo: f64, hi: f64) -> Result<f64> {
        let r = std::f64::consts::SQRT_2 / self.sd;
        Ok(self.ln_sq_total()
            + ln_add_exp(ln_norm_cdf(r * (lo - self.mean)), ln_norm_sf(r * (hi - self.mean))))
    }
}

impl SquaredMass for StudentT {
    fn ln_sq_total(&self) -> f64 {
        // ∫ t_ν(z)² dz = c² √ν B(1/2, ν + 1/2), c the t normalizing constant.
        let nu = self.df;
        let ln_c = self.ln_pdf(self.loc) + self.scale.ln();
        2.0 * ln_c + 0.5 * nu.ln() + ln_beta(0.5, nu + 0.5) - self.scale.ln()
    }
}

/// Log evidence for both hypotheses, with the smoothing model when used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MatchedFit {
    pub ln_m_in: f64,
    pub ln_m_out: f64,
    pub tau: Option<f64>,
    pub model: Option<AffineTauModel>,
}

pub(crate) fn matched_fit<D: SquaredMass>(base: &D, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<MatchedFit> {
    gpd.validate()?;
    let (lo, hi, p0) = (hyp.lo(), hyp.hi(), hyp.prior_prob());
    if hyp.is_sharp() {
        return Ok(MatchedFit {
            ln_m_in: base.ln_pdf(lo),
            ln_m_out: base.ln_sq_total(),
            tau: None,
            model: None,
        });
    }
    let ln_z_in = ln_region_mass(base, Region::Inside(lo, hi));
    let ln_z_out = ln_region_mass(base, Region::Outside(lo, hi));
    if ln_z_in == f64::NEG_INFINITY && ln_z_out == f64::NEG_INFINITY {
        return Err(Error::ZeroRegionMass { mass: 0.0 });
    }
    let ln_m_in0 = if ln_z_in == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        base.ln_sq_interval(lo, hi)? - ln_z_in
    };
    let ln_m_out = if ln_z_out == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        base.ln_sq_outside(lo, hi)? - ln_z_out
    };
    let (bump, tau_rule) = match *gpd {
        GpdSpec::Flat => return Ok(MatchedFit { ln_m_in: ln_m_in0, ln_m_out, tau: None, model: None }),
        GpdSpec::Smoothed { bump, tau } => (bump, tau),
    };
    let (blo, bhi) = bump.interval();
    let (blo, bhi) = (blo.max(lo), bhi.min(hi));
    let ln_sq_in = ln_m_in0 + ln_z_in;
    let r_mass = (ln_bump_moment(base, &bump, blo, bhi, 1.0)? - ln_z_in).exp();
    let r_evidence = (ln_bump_moment(base, &bump, blo, bhi, 2.0)? - ln_sq_in).exp();
    let model = AffineTauModel {
        prior: p0,
        ln_mass_in0: ln_z_in,
        r_mass,
        ln_evidence_in0: ln_m_in0,
        r_evidence,
        ln_mass_out: ln_z_out,
        ln_evidence_out: ln_m_out,
    };
    let tau = match tau_rule {
        Tau::Fixed(t) => t,
        Tau::Continuity => solve_tau(&model)?.tau,
    };
    let ln_m_in = ln_m_in0 + (tau * r_evidence).ln_1p() - (tau * r_mass).ln_1p();
    Ok(MatchedFit { ln_m_in, ln_m_out, tau: Some(tau), model: Some(model) })
}

/// The conditioned components: inside (atom, truncation or tilt) and the
/// complement. `None` for the complement when it has no mass.
pub(crate) fn matched_components(
    base: Arc<dyn Univariate>,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
) -> Result<(DensityHandle, Option<DensityHandle>)> {
    let (lo, hi) = (hyp.lo(), hyp.hi());
    let inside = if hyp.is_sharp() {
        DensityHandle::Atom(lo)
    } else {
        apply_gpd_weight_density(base.clone(), gpd, lo, hi)?
    };
    let out_region = Region::Outside(lo, hi);
    let outside = if ln_region_mass(base.as_ref(), out_region) == f64::NEG_INFINITY {
        None
    } else {
        Some(DensityHandle::continuous(TruncatedDensity::new(base, out_region)?))
    };
    Ok((inside, outside))
}

/// Full post-data result for a matched-kernel model.
pub(crate) fn matched_analyze<D: SquaredMass + Clone + 'static>(
    base: &D,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
) -> Result<PostDataResult> {
    let fit = matched_fit(base, hyp, gpd)?;
    let p_in = post_data_probability_ln(hyp.prior_prob(), fit.ln_m_in, fit.ln_m_out)?;
    let resolved = match fit.tau {
        Some(t) => gpd.with_tau(t),
        None => GpdSpec::Flat,
    };
    let shared: Arc<dyn Univariate> = Arc::new(base.clone());
    let (density_in, density_out) = matched_components(shared, hyp, &resolved)?;
    let density_out = density_out.ok_or_else(|| Error::ZeroMass("the complement of the hypothesis has no mass".into()))?;
    Ok(PostDataResult {
        p_in,
        p_out: 1.0 - p_in,
        density_in,
        density_out,
        tau_used: fit.tau,
        mc_stderr: None,
        ess: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_square_integrals_match_quadrature() {
        let d = Normal::new(2.1, 1.3);
        assert_relative_eq!(d.ln_sq_total(), ln_sq_quadrature(&d, f64::NEG_INFINITY, f64::INFINITY).unwrap(), max_relative = 1e-11);
        assert_relative_eq!(d.ln_sq_interval(-0.2, 0.2).unwrap(), ln_sq_quadrature(&d, -0.2, 0.2).unwrap(), max_relative = 1e-11);
        let q = ln_add_exp(
            ln_sq_quadrature(&d, f64::NEG_INFINITY, -0.2).unwrap(),
            ln_sq_quadrature(&d, 0.2, f64::INFINITY).unwrap(),
        );
        assert_relative_eq!(d.ln_sq_outside(-0.2, 0.2).unwrap(), q, max_relative = 1e-11);
    }

    #[test]
    fn student_square_total_matches_quadrature() {
        let d = StudentT::new(2.1, 1.0, 8.0);
        let q = ln_sq_quadrature(&d, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_relative_eq!(d.ln_sq_total(), q, max_relative = 1e-11);
    }

    #[test]
    fn sharp_normal_ratio_at_zero_is_root_two() {
        let d = Normal::new(0.0, 1.0);
        let h = IntervalHypothesis::sharp(0.0, 0.5).unwrap();
        let f = matched_fit(&d, &h, &GpdSpec::Flat).unwrap();
        assert_relative_eq!((f.ln_m_in - f.ln_m_out).exp(), 2f64.sqrt(), max_relative = 1e-14);
    }
}
