//! Relative risk in a two-arm trial.
//!
//! Each arm's success probability gets its own binomial fiducial density,
//! and the joint fiducial density is their product. The hypothesis says the
//! relative risk ρ = π_t/π_c lies in [1/(1+ε), 1+ε], and the smoothing bump
//! is a Beta density on log ρ so that swapping the arms leaves it alone.

use crate::binomial::{sample_fs_seeded, BinomialCount};
use crate::engine::importance::{endpoint_gaps, importance_fit, Draw, EndpointGaps};
use crate::error::{check_probability, Error, Result};
use crate::inference::{BumpDensity, DensityHandle, GpdSpec, McConfig, PostDataResult, Tau};
use crate::numerics::dist::{BetaDist, Univariate};
use crate::numerics::rng::partitioned_draws;
use crate::numerics::special::LnChoose;
use crate::numerics::stats::freedman_diaconis_width;
use crate::numerics::Histogram;

/// Events and sizes of the treatment and control arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoArmCounts {
    treatment: BinomialCount,
    control: BinomialCount,
}

impl TwoArmCounts {
    pub fn new(e_t: u64, n_t: u64, e_c: u64, n_c: u64) -> Result<Self> {
        Ok(TwoArmCounts { treatment: BinomialCount::new(e_t, n_t)?, control: BinomialCount::new(e_c, n_c)? })
    }

    pub fn treatment(&self) -> BinomialCount {
        self.treatment
    }

    pub fn control(&self) -> BinomialCount {
        self.control
    }

    /// The same trial with the arms exchanged.
    pub fn swapped(&self) -> Self {
        TwoArmCounts { treatment: self.control, control: self.treatment }
    }
}

/// ρ ∈ [1/(1+ε), 1+ε] with prior probability `prior_prob`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioHypothesis {
    eps: f64,
    prior_prob: f64,
}

impl RatioHypothesis {
    pub fn new(eps: f64, prior_prob: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid("eps", format!("{eps} must be finite and positive")));
        }
        check_probability("prior_prob", prior_prob)?;
        Ok(RatioHypothesis { eps, prior_prob })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn prior_prob(&self) -> f64 {
        self.prior_prob
    }

    pub fn lo(&self) -> f64 {
        1.0 / (1.0 + self.eps)
    }

    pub fn hi(&self) -> f64 {
        1.0 + self.eps
    }

    pub fn contains(&self, rho: f64) -> bool {
        self.lo() <= rho && rho <= self.hi()
    }

    /// Beta(4, 4) on log ρ with τ chosen for continuity.
    pub fn default_gpd(&self) -> GpdSpec {
        GpdSpec::Smoothed { bump: BumpDensity::default_on_ratio(self.eps), tau: Tau::Continuity }
    }
}

/// Post-data result on the ρ scale, plus the arm marginals and the draws.
#[derive(Debug, Clone)]
pub struct RelativeRiskAnalysis {
    /// Mixture on ρ.
    pub result: PostDataResult,
    pub pi_t: DensityHandle,
    pub pi_c: DensityHandle,
    /// (π_t, π_c) pairs.
    pub draws: Vec<(f64, f64)>,
    /// Weight of each pair in the post-data mixture; sums to one.
    pub weights: Vec<f64>,
    /// Jumps of the ρ-marginal at the two endpoints, for smoothed weightings.
    pub gaps: Option<EndpointGaps>,
}

/// Stream offset of the control arm, far beyond any treatment partition.
const CONTROL_STREAMS: u64 = 1 << 32;

/// `draws` independent (π_t, π_c) pairs from the product of the two arm
/// fiducial densities.
pub fn sample_joint_fs(c: &TwoArmCounts, draws: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if draws == 0 {
        return Err(Error::EmptySample);
    }
    let t = sample_fs_seeded(&c.treatment, draws, seed, 0)?;
    let k = sample_fs_seeded(&c.control, draws, seed, CONTROL_STREAMS)?;
    Ok(t.into_iter().zip(k).collect())
}

/// Beta(e + 1/2, n − e + 1/2) pairs: the Jeffreys posteriors standing in
/// for the fiducial densities.
pub fn sample_jeffreys(c: &TwoArmCounts, draws: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if draws == 0 {
        return Err(Error::EmptySample);
    }
    let arm = |b: &BinomialCount, base: u64| {
        let d = BetaDist::new(b.x() as f64 + 0.5, (b.n() - b.x()) as f64 + 0.5);
        partitioned_draws(seed, base, draws, |r| Ok(d.sample(r)))
    };
    let t = arm(&c.treatment, 0)?;
    let k = arm(&c.control, CONTROL_STREAMS)?;
    Ok(t.into_iter().zip(k).collect())
}

/// Post-data probability of the ratio hypothesis from the joint fiducial
/// sample, with τ solved on the same draws that give the estimates.
pub fn analyze(c: &TwoArmCounts, hyp: &RatioHypothesis, gpd: &GpdSpec, mc: &McConfig) -> Result<RelativeRiskAnalysis> {
    mc.validate()?;
    analyze_pairs(c, hyp, gpd, sample_joint_fs(c, mc.samples, mc.seed)?)
}

/// [`analyze`] with Jeffreys posteriors in place of the fiducial densities.
pub fn jeffreys_approx(
    c: &TwoArmCounts,
    hyp: &RatioHypothesis,
    gpd: &GpdSpec,
    mc: &McConfig,
) -> Result<RelativeRiskAnalysis> {
    mc.validate()?;
    analyze_pairs(c, hyp, gpd, sample_jeffreys(c, mc.samples, mc.seed)?)
}

fn weighted_hist(values: &[f64], weights: &[f64], ranges: &[(f64, f64)]) -> Result<DensityHandle> {
    let width = freedman_diaconis_width(values, weights);
    Ok(DensityHandle::Histogram(Histogram::over_ranges(values, weights, ranges, width)?))
}

fn analyze_pairs(
    c: &TwoArmCounts,
    hyp: &RatioHypothesis,
    gpd: &GpdSpec,
    pairs: Vec<(f64, f64)>,
) -> Result<RelativeRiskAnalysis> {
    gpd.validate()?;
    let lt = LnChoose::new(c.treatment.n());
    let lc = LnChoose::new(c.control.n());
    let rhos: Vec<f64> = pairs.iter().map(|&(t, k)| t / k).collect();
    let draws: Vec<Draw> = pairs
        .iter()
        .zip(&rhos)
        .map(|(&(t, k), &rho)| {
            let inside = hyp.contains(rho);
            Draw {
                weight: 1.0,
                inside,
                bump: if inside { gpd.bump().map_or(0.0, |b| b.eval(rho)) } else { 0.0 },
                ln_lik: lt.ln_pmf(c.treatment.x(), t) + lc.ln_pmf(c.control.x(), k),
            }
        })
        .collect();
    let fit = importance_fit(&draws, hyp.prior_prob(), gpd).map_err(|e| match e {
        Error::ZeroMass(m) => Error::ZeroMass(format!("{m} (effective sample size 0 inside [{}, {}])", hyp.lo(), hyp.hi())),
        e => e,
    })?;

    let (lo, hi) = (hyp.lo(), hyp.hi());
    let split = |want: bool| -> (Vec<f64>, Vec<f64>) {
        draws
            .iter()
            .zip(&rhos)
            .zip(&fit.component_weights)
            .filter(|((d, _), _)| d.inside == want)
            .map(|((_, &r), &w)| (r, w))
            .unzip()
    };
    let (vin, win) = split(true);
    let (vout, wout) = split(false);
    let (rmin, rmax) = vout.iter().fold((lo, hi), |(a, b), &r| (a.min(r), b.max(r)));
    let density_in = weighted_hist(&vin, &win, &[(lo, hi)])?;
    let density_out = weighted_hist(&vout, &wout, &[(rmin, lo), (hi, rmax)])?;

    let (pt, pc): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let pi_t = weighted_hist(&pt, &fit.mixture_weights, &[(0.0, 1.0)])?;
    let pi_c = weighted_hist(&pc, &fit.mixture_weights, &[(0.0, 1.0)])?;

    let gaps = matches!(gpd, GpdSpec::Smoothed { .. }).then(|| {
        let base = vec![1.0; rhos.len()];
        endpoint_gaps(&rhos, &base, &fit.mixture_weights, lo, hi, hyp.eps() / 10.0)
    });
    Ok(RelativeRiskAnalysis {
        result: PostDataResult {
            p_in: fit.p_in,
            p_out: 1.0 - fit.p_in,
            density_in,
            density_out,
            tau_used: fit.tau,
            mc_stderr: fit.mc_stderr,
            ess: Some(fit.ess),
        },
        pi_t,
        pi_c,
        draws: pairs,
        weights: fit.mixture_weights,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stats::{ks_two_sample, pearson};

    fn trial(e_t: u64) -> TwoArmCounts {
        TwoArmCounts::new(e_t, 20, 18, 30).unwrap()
    }

    #[test]
    fn hypothesis_is_symmetric_on_log_scale() {
        let h = RatioHypothesis::new(0.045, 0.4).unwrap();
        assert!((h.lo().ln() + h.hi().ln()).abs() < 1e-15);
        assert!(RatioHypothesis::new(0.0, 0.4).is_err());
        let b = BumpDensity::default_on_ratio(0.045);
        let r = 1.02;
        assert!((b.eval(r) - b.eval(1.0 / r)).abs() < 1e-9 * b.eval(r));
    }

    #[test]
    fn arms_are_independent_and_match_single_arm() {
        let c = trial(6);
        let pairs = sample_joint_fs(&c, 100_000, 3).unwrap();
        let (t, k): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        assert!(pearson(&t, &k).abs() < 3.0 / (1e5f64).sqrt());
        let single = |b: BinomialCount| sample_fs_seeded(&b, 100_000, 99, 0).unwrap();
        assert!(ks_two_sample(&t, &single(c.treatment())).p_value > 0.001);
        assert!(ks_two_sample(&k, &single(c.control())).p_value > 0.001);
        assert_eq!(sample_joint_fs(&c, 1, 3).unwrap().len(), 1);
    }

    #[test]
    fn zero_event_arm_stays_near_zero() {
        let c = TwoArmCounts::new(0, 20, 5, 20).unwrap();
        let pairs = sample_joint_fs(&c, 10_000, 1).unwrap();
        let bound = 1.0 - 1e-6f64.powf(1.0 / 20.0);
        assert!(pairs.iter().all(|p| p.0 < bound));
    }

    #[test]
    fn flat_arm_swap_symmetry() {
        let c = trial(6);
        let h = RatioHypothesis::new(0.2, 0.4).unwrap();
        let mc = McConfig::new(200_000, 5);
        let a = analyze(&c, &h, &GpdSpec::Flat, &mc).unwrap().result;
        let b = analyze(&c.swapped(), &h, &GpdSpec::Flat, &mc).unwrap().result;
        let se = a.mc_stderr.unwrap().hypot(b.mc_stderr.unwrap());
        assert!((a.p_in - b.p_in).abs() < 4.0 * se, "{} {} {se}", a.p_in, b.p_in);
    }

    #[test]
    fn smoothed_value_at_small_scale() {
        let h = RatioHypothesis::new(0.045, 0.4).unwrap();
        let r = analyze(&trial(6), &h, &h.default_gpd(), &McConfig::new(400_000, 7)).unwrap();
        assert!((r.result.p_in - 0.0927).abs() < 0.02, "{}", r.result.p_in);
        assert!(r.result.tau_used.unwrap() > 0.0);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn jeffreys_is_deterministic_and_handles_full_arm() {
        let c = TwoArmCounts::new(20, 20, 18, 30).unwrap();
        let h = RatioHypothesis::new(0.2, 0.4).unwrap();
        let mc = McConfig::new(20_000, 2);
        let a = jeffreys_approx(&c, &h, &GpdSpec::Flat, &mc).unwrap();
        let b = jeffreys_approx(&c, &h, &GpdSpec::Flat, &mc).unwrap();
        assert_eq!(a.result.p_in, b.result.p_in);
    }

    #[test]
    fn empty_sample_is_an_error() {
        let h = RatioHypothesis::new(0.045, 0.4).unwrap();
        assert!(analyze(&trial(5), &h, &GpdSpec::Flat, &McConfig::new(0, 1)).is_err());
    }
}
