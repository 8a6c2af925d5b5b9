//! Normal mean and standard deviation both unknown, by Gibbs sampling.
//!
//! The chain alternates between the post-data density of μ given σ (the
//! known-variance analysis with σ plugged in) and the fiducial density of
//! σ given μ. Nothing forces these two conditionals to be compatible, so
//! the joint limiting density may depend on the scanning order even when
//! its marginals do not.

use crate::engine::matched::matched_fit;
use crate::error::{Error, Result};
use crate::inference::{
    post_data_probability_ln, DensityHandle, GpdSpec, IntervalHypothesis, McConfig, PostDataResult, UnivariateDensity,
};
use crate::normal_known::{self, NormalKnownSummary};
use crate::numerics::dist::{Normal, Univariate};
use crate::numerics::rng::uniform_open;
use crate::numerics::sampling::{sample_truncated, Region};
use crate::numerics::stats::{freedman_diaconis_width, gelman_rubin, ks_one_sample, normal_two_sided_p, pearson, KsResult};
use crate::numerics::{Histogram, RngStream};
use std::sync::Arc;

pub use crate::normal_direct::NormalSummary;

/// A parameter of the normal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Mu,
    Sigma,
}

/// How the conditionals are cycled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanOrder {
    /// Every transition updates each parameter once, in this order.
    Fixed(Vec<Param>),
    /// Every transition updates one parameter chosen with probability 1/2.
    UniformRandom,
}

impl ScanOrder {
    pub fn mu_first() -> Self {
        ScanOrder::Fixed(vec![Param::Mu, Param::Sigma])
    }

    pub fn sigma_first() -> Self {
        ScanOrder::Fixed(vec![Param::Sigma, Param::Mu])
    }

    pub fn validate(&self) -> Result<()> {
        if let ScanOrder::Fixed(order) = self {
            let ok = order.len() == 2 && order.contains(&Param::Mu) && order.contains(&Param::Sigma);
            if !ok {
                return Err(Error::invalid("scan order", "a fixed order must list μ and σ once each"));
            }
        }
        Ok(())
    }
}

/// Which density the μ update draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuConditional {
    /// The fiducial N(x̄, σ²/n); the chain then targets the joint fiducial.
    Fiducial,
    /// The post-data mixture for the hypothesis.
    #[default]
    PostData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSettings {
    pub scan: ScanOrder,
    pub samples: usize,
    pub burn_in: usize,
    /// Defaults to (x̄, s).
    pub start: Option<(f64, f64)>,
    pub mu_update: MuConditional,
}

impl GibbsSettings {
    pub fn new(scan: ScanOrder, samples: usize, burn_in: usize) -> Self {
        GibbsSettings { scan, samples, burn_in, start: None, mu_update: MuConditional::PostData }
    }

    pub fn with_start(mut self, mu: f64, sigma: f64) -> Self {
        self.start = Some((mu, sigma));
        self
    }

    pub fn with_mu_update(mut self, mu_update: MuConditional) -> Self {
        self.mu_update = mu_update;
        self
    }
}

/// Recorded states of one chain, burn-in excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    /// (μ, σ) after each completed transition.
    pub samples: Vec<(f64, f64)>,
    pub burn_in: usize,
    pub scan: ScanOrder,
    pub mu_update: MuConditional,
    pub seed: u64,
    pub stream_id: u64,
}

impl ChainOutput {
    pub fn mu(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.0).collect()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.1).collect()
    }

    /// Sample correlation between μ and σ.
    pub fn correlation(&self) -> f64 {
        pearson(&self.mu(), &self.sigma())
    }

    /// Fraction of recorded μ values in [lo, hi].
    pub fn fraction_in(&self, lo: f64, hi: f64) -> f64 {
        let k = self.samples.iter().filter(|p| lo <= p.0 && p.0 <= hi).count();
        k as f64 / self.samples.len().max(1) as f64
    }
}

/// σ² given μ: Inv-Gamma(n/2, n·σ̂²(μ)/2).
pub fn conditional_sigma2(mu: f64, s: &NormalSummary) -> DensityHandle {
    DensityHandle::continuous(UnivariateDensity(Arc::new(s.sigma2_given_mu(mu))))
}

/// Post-data density of μ with σ treated as known.
pub fn conditional_mu(sigma: f64, s: &NormalSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<PostDataResult> {
    let known = NormalKnownSummary::new(s.n(), s.xbar(), sigma)?;
    normal_known::analyze(&known, hyp, gpd)
}

/// The μ update for one σ, built without the density objects that
/// [`conditional_mu`] returns.
#[derive(Debug)]
struct MuKernel {
    base: Normal,
    p_in: f64,
    lo: f64,
    hi: f64,
    /// (h, τ, max of 1 + τh) for rejection from the truncated base.
    tilt: Option<(crate::inference::BumpDensity, f64, f64)>,
}

impl MuKernel {
    fn new(sigma: f64, s: &NormalSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<Self> {
        let base = s.mu_given_sigma(sigma);
        let fit = matched_fit(&base, hyp, gpd)?;
        let p_in = post_data_probability_ln(hyp.prior_prob(), fit.ln_m_in, fit.ln_m_out)?;
        let tilt = match (gpd.bump(), fit.tau) {
            (Some(b), Some(t)) if t > 0.0 => Some((b, t, 1.0 + t * b.max_value())),
            _ => None,
        };
        Ok(MuKernel { base, p_in, lo: hyp.lo(), hi: hyp.hi(), tilt })
    }

    fn draw(&self, rng: &mut RngStream) -> Result<f64> {
        if !(uniform_open(rng) < self.p_in) {
            return sample_truncated(&self.base, Region::Outside(self.lo, self.hi), rng);
        }
        if self.lo == self.hi {
            return Ok(self.lo);
        }
        loop {
            let x = sample_truncated(&self.base, Region::Inside(self.lo, self.hi), rng)?;
            match self.tilt {
                None => return Ok(x),
                Some((b, t, top)) => {
                    if uniform_open(rng) * top <= 1.0 + t * b.eval(x) {
                        return Ok(x);
                    }
                }
            }
        }
    }
}

fn draw_sigma(mu: f64, s: &NormalSummary, rng: &mut RngStream) -> f64 {
    s.sigma2_given_mu(mu).sample(rng).sqrt()
}

/// Runs one chain from `settings.start` (or (x̄, s)).
pub fn gibbs_run(
    s: &NormalSummary,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
    settings: &GibbsSettings,
    rng: &mut RngStream,
) -> Result<ChainOutput> {
    settings.scan.validate()?;
    gpd.validate()?;
    let (mut mu, mut sigma) = settings.start.unwrap_or((s.xbar(), s.s()));
    if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
        return Err(Error::invalid("start", format!("({mu}, {sigma}) needs finite μ and positive σ")));
    }
    let update = |p: Param, mu: &mut f64, sigma: &mut f64, rng: &mut RngStream| -> Result<()> {
        match p {
            Param::Sigma => *sigma = draw_sigma(*mu, s, rng),
            Param::Mu => {
                *mu = match settings.mu_update {
                    MuConditional::Fiducial => s.mu_given_sigma(*sigma).quantile(uniform_open(rng)),
                    MuConditional::PostData => MuKernel::new(*sigma, s, hyp, gpd)?.draw(rng)?,
                }
            }
        }
        Ok(())
    };
    let mut samples = Vec::with_capacity(settings.samples);
    for t in 0..settings.burn_in + settings.samples {
        match &settings.scan {
            ScanOrder::Fixed(order) => {
                for &p in order {
                    update(p, &mut mu, &mut sigma, rng)?;
                }
            }
            ScanOrder::UniformRandom => {
                let p = if uniform_open(rng) < 0.5 { Param::Mu } else { Param::Sigma };
                update(p, &mut mu, &mut sigma, rng)?;
            }
        }
        if t >= settings.burn_in {
            samples.push((mu, sigma));
        }
    }
    Ok(ChainOutput {
        samples,
        burn_in: settings.burn_in,
        scan: settings.scan.clone(),
        mu_update: settings.mu_update,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}

/// Runs independent jobs on scoped threads, keeping their order.
fn run_all<T: Send>(jobs: Vec<Box<dyn FnOnce() -> Result<T> + Send + '_>>) -> Result<Vec<T>> {
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get());
    if workers <= 1 {
        return jobs.into_iter().map(|j| j()).collect();
    }
    std::thread::scope(|sc| {
        let handles: Vec<_> = jobs.into_iter().map(|j| sc.spawn(j)).collect();
        handles.into_iter().map(|h| h.join().expect("chain worker panicked")).collect()
    })
}

/// Batch-means standard error of the mean of a chain statistic.
fn batch_stderr(values: &[f64], batches: usize) -> Option<f64> {
    if values.len() < 2 * batches {
        return None;
    }
    let size = values.len() / batches;
    let means: Vec<f64> = (0..batches).map(|k| values[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    Some((var / batches as f64).sqrt())
}

/// Post-data probability of the hypothesis and the μ-marginal, read off a
/// single chain: smoothing applied to each conditional of μ given σ.
pub fn post_prob_gibbs(
    s: &NormalSummary,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
    settings: &GibbsSettings,
    rng: &mut RngStream,
) -> Result<(PostDataResult, ChainOutput)> {
    if settings.samples == 0 {
        return Err(Error::EmptySample);
    }
    let chain = gibbs_run(s, hyp, gpd, settings, rng)?;
    let (lo, hi) = (hyp.lo(), hyp.hi());
    let mus = chain.mu();
    let ind: Vec<f64> = mus.iter().map(|&m| if lo <= m && m <= hi { 1.0 } else { 0.0 }).collect();
    let p_in = ind.iter().sum::<f64>() / ind.len() as f64;
    let mc_stderr = batch_stderr(&ind, 20);
    let (vin, vout): (Vec<f64>, Vec<f64>) = mus.iter().partition(|&&m| lo <= m && m <= hi);
    let component = |v: &[f64], inside: bool| -> Result<DensityHandle> {
        if inside && lo == hi {
            return Ok(DensityHandle::Atom(lo));
        }
        if v.is_empty() {
            return Err(Error::ZeroMass(format!(
                "no chain states fall {} the hypothesis",
                if inside { "inside" } else { "outside" }
            )));
        }
        let w = vec![1.0; v.len()];
        let width = freedman_diaconis_width(v, &w);
        let (a, b) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let ranges = if inside {
            vec![(lo, hi)]
        } else {
            vec![(a.min(lo), lo), (hi, b.max(hi))]
        };
        Ok(DensityHandle::Histogram(Histogram::over_ranges(v, &w, &ranges, width)?))
    };
    let density_in = if vin.is_empty() && lo < hi {
        DensityHandle::continuous(crate::inference::TruncatedDensity::new(
            Arc::new(s.mu_given_sigma(s.s())) as Arc<dyn Univariate>,
            Region::Inside(lo, hi),
        )?)
    } else {
        component(&vin, true)?
    };
    let density_out = component(&vout, false)?;
    let ess = mc_stderr.filter(|se| *se > 0.0).map(|se| p_in * (1.0 - p_in) / (se * se));
    let result = PostDataResult { p_in, p_out: 1.0 - p_in, density_in, density_out, tau_used: None, mc_stderr, ess };
    Ok((result, chain))
}

/// Correlations under the two fixed scans and a test of their difference.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanDiagnostic {
    /// One correlation per replicate run, μ updated first.
    pub mu_first: Vec<f64>,
    /// The same with σ updated first.
    pub sigma_first: Vec<f64>,
    /// Mean over replicates of each order's correlation.
    pub corr_mu_first: f64,
    pub corr_sigma_first: f64,
    /// Difference of the mean Fisher-transformed correlations over its
    /// standard error estimated from the spread between replicates.
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticSettings {
    pub samples: usize,
    pub burn_in: usize,
    /// Independent runs per order; at least 2.
    pub replicates: usize,
    pub seed: u64,
    pub mu_update: MuConditional,
}

pub fn scan_order_diagnostic(
    s: &NormalSummary,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
    d: &DiagnosticSettings,
) -> Result<ScanDiagnostic> {
    if d.samples < 3 {
        return Err(Error::invalid("samples", "need at least three samples per run"));
    }
    if d.replicates < 2 {
        return Err(Error::invalid("replicates", "need at least two runs per order"));
    }
    let mut jobs: Vec<Box<dyn FnOnce() -> Result<f64> + Send + '_>> = Vec::new();
    for (k, scan) in [ScanOrder::mu_first(), ScanOrder::sigma_first()].into_iter().enumerate() {
        for r in 0..d.replicates {
            let settings = GibbsSettings::new(scan.clone(), d.samples, d.burn_in).with_mu_update(d.mu_update);
            let stream = (k * d.replicates + r) as u64;
            jobs.push(Box::new(move || {
                let mut rng = RngStream::new(d.seed, stream);
                Ok(gibbs_run(s, hyp, gpd, &settings, &mut rng)?.correlation())
            }));
        }
    }
    let corr = run_all(jobs)?;
    let (mu_first, sigma_first) = corr.split_at(d.replicates);
    let fisher = |rs: &[f64]| -> (f64, f64) {
        let z: Vec<f64> = rs.iter().map(|r| r.atanh()).collect();
        let m = z.iter().sum::<f64>() / z.len() as f64;
        let v = z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (z.len() as f64 - 1.0);
        (m, v / z.len() as f64)
    };
    let (m1, v1) = fisher(mu_first);
    let (m2, v2) = fisher(sigma_first);
    let z = (m1 - m2) / (v1 + v2).sqrt();
    let mean = |rs: &[f64]| rs.iter().sum::<f64>() / rs.len() as f64;
    Ok(ScanDiagnostic {
        mu_first: mu_first.to_vec(),
        sigma_first: sigma_first.to_vec(),
        corr_mu_first: mean(mu_first),
        corr_sigma_first: mean(sigma_first),
        z,
        p_value: normal_two_sided_p(z),
    })
}

/// Fewest chain points a σ-slice needs in [`conditional_discrepancy`].
pub const MIN_SLICE_POINTS: usize = 500;

/// Comparison of the chain's μ values in one σ-slice with the conditional
/// density of μ at the slice midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceDiscrepancy {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub ks: KsResult,
}

/// Per-slice KS comparison of the chain against the μ conditional it was
/// built from. Every `thin`-th point of a slice is used, which weakens the
/// serial dependence the KS p-value ignores.
pub fn conditional_discrepancy(
    chain: &ChainOutput,
    s: &NormalSummary,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
    sigma_slices: &[(f64, f64)],
    thin: usize,
) -> Result<Vec<SliceDiscrepancy>> {
    let thin = thin.max(1);
    let mut out = Vec::with_capacity(sigma_slices.len());
    for &(lo, hi) in sigma_slices {
        let mus: Vec<f64> = chain.samples.iter().filter(|p| lo <= p.1 && p.1 < hi).map(|p| p.0).collect();
        if mus.len() < MIN_SLICE_POINTS {
            return Err(Error::InsufficientSlicePopulation { lo, hi, count: mus.len(), required: MIN_SLICE_POINTS });
        }
        let mid = if hi.is_finite() { 0.5 * (lo + hi) } else { lo.max(s.s()) };
        let used: Vec<f64> = mus.iter().step_by(thin).copied().collect();
        let ks = match chain.mu_update {
            MuConditional::Fiducial => {
                let d = s.mu_given_sigma(mid);
                ks_one_sample(&used, |x| d.cdf(x))
            }
            MuConditional::PostData => {
                let m = conditional_mu(mid, s, hyp, gpd)?.mixture()?;
                ks_one_sample(&used, |x| m.cdf(x))
            }
        };
        out.push(SliceDiscrepancy { lo, hi, count: mus.len(), ks });
    }
    Ok(out)
}

/// Potential scale reduction for μ and σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GelmanRubinReport {
    pub r_mu: f64,
    pub r_sigma: f64,
}

/// R̂ for both parameters over chains of equal length. Identical chains
/// (e.g. from a repeated seed) are rejected.
pub fn gelman_rubin_chains(chains: &[ChainOutput]) -> Result<GelmanRubinReport> {
    for (i, a) in chains.iter().enumerate() {
        if chains[i + 1..].iter().any(|b| b.samples == a.samples) {
            return Err(Error::DegenerateChains);
        }
    }
    let mus: Vec<Vec<f64>> = chains.iter().map(|c| c.mu()).collect();
    let sigmas: Vec<Vec<f64>> = chains.iter().map(|c| c.sigma()).collect();
    Ok(GelmanRubinReport { r_mu: gelman_rubin(&mus)?, r_sigma: gelman_rubin(&sigmas)? })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GelmanRubinStudy {
    pub chains: usize,
    pub samples: usize,
    pub burn_in: usize,
    /// Start chains spread over ±4 standard errors in μ and a factor of 8
    /// in σ instead of all at (x̄, s).
    pub overdispersed: bool,
    pub scan: ScanOrder,
    pub mu_update: MuConditional,
    pub seed: u64,
}

/// Runs `study.chains` chains on streams 0, 1, ... of the seed.
pub fn gelman_rubin_study(
    s: &NormalSummary,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
    study: &GelmanRubinStudy,
) -> Result<GelmanRubinReport> {
    if study.chains < 2 {
        return Err(Error::invalid("chains", "need at least two chains"));
    }
    let k = study.chains;
    let jobs: Vec<Box<dyn FnOnce() -> Result<ChainOutput> + Send + '_>> = (0..k)
        .map(|i| {
            let f = 2.0 * i as f64 / (k - 1) as f64 - 1.0;
            let start = if study.overdispersed {
                (s.xbar() + 4.0 * f * s.standard_error(), s.s() * 8f64.powf(f))
            } else {
                (s.xbar(), s.s())
            };
            let settings = GibbsSettings::new(study.scan.clone(), study.samples, study.burn_in)
                .with_start(start.0, start.1)
                .with_mu_update(study.mu_update);
            let seed = study.seed;
            Box::new(move || gibbs_run(s, hyp, gpd, &settings, &mut RngStream::new(seed, i as u64)))
                as Box<dyn FnOnce() -> Result<ChainOutput> + Send + '_>
        })
        .collect();
    gelman_rubin_chains(&run_all(jobs)?)
}

/// Post-data probability and μ-marginal with τ applied at either level.
pub fn post_prob_by_level(
    s: &NormalSummary,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
    level: crate::normal_direct::SmoothingLevel,
    mc: &McConfig,
) -> Result<PostDataResult> {
    match level {
        crate::normal_direct::SmoothingLevel::Marginal => crate::normal_direct::post_prob_direct(s, hyp, gpd),
        crate::normal_direct::SmoothingLevel::Conditional => {
            mc.validate()?;
            let settings = GibbsSettings::new(ScanOrder::UniformRandom, mc.samples, mc.burn_in);
            post_prob_gibbs(s, hyp, gpd, &settings, &mut RngStream::new(mc.seed, 0)).map(|r| r.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::ContinuousDensity;
    use crate::normal_direct::joint_fs;
    use crate::numerics::stats::{ks_two_sample, mean};

    fn worked() -> NormalSummary {
        NormalSummary::new(9, 2.1, 3.0).unwrap()
    }

    fn hyp() -> IntervalHypothesis {
        IntervalHypothesis::symmetric(0.0, 0.2, 0.33).unwrap()
    }

    #[test]
    fn sigma_conditional_moments() {
        let s = worked();
        let d = conditional_sigma2(0.0, &s);
        let mut r = RngStream::new(1, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut r)).collect();
        // Inv-Gamma(4.5, 55.845) has mean 55.845/3.5.
        assert!((mean(&xs) - 55.845 / 3.5).abs() < 0.2);
    }

    #[test]
    fn zero_prior_is_the_outside_fiducial() {
        let s = worked();
        let h = IntervalHypothesis::symmetric(0.0, 0.2, 0.0).unwrap();
        let r = conditional_mu(3.0, &s, &h, &GpdSpec::Flat).unwrap();
        assert_eq!(r.p_in, 0.0);
        let m = r.mixture().unwrap();
        assert_eq!(m.pdf(0.0), 0.0);
        let base = s.mu_given_sigma(3.0);
        assert!((m.pdf(1.0) - base.pdf(1.0) / (1.0 - base.ln_interval(-0.2, 0.2).exp())).abs() < 1e-12);
    }

    #[test]
    fn kernel_matches_conditional_mu() {
        let s = worked();
        let g = GpdSpec::smoothed_on(-0.2, 0.2);
        let k = MuKernel::new(2.5, &s, &hyp(), &g).unwrap();
        let r = conditional_mu(2.5, &s, &hyp(), &g).unwrap();
        assert!((k.p_in - r.p_in).abs() < 1e-14);
        let mut rng = RngStream::new(2, 0);
        let xs: Vec<f64> = (0..40_000).map(|_| k.draw(&mut rng).unwrap()).collect();
        let m = r.mixture().unwrap();
        assert!(ks_one_sample(&xs, |x| m.cdf(x)).p_value > 0.01);
    }

    #[test]
    fn fiducial_chain_targets_joint_fiducial() {
        let s = worked();
        let settings = GibbsSettings::new(ScanOrder::UniformRandom, 100_000, 1000).with_mu_update(MuConditional::Fiducial);
        let chain = gibbs_run(&s, &hyp(), &GpdSpec::Flat, &settings, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(chain.samples.len(), 100_000);
        let j = joint_fs(&s);
        let t = j.mu_marginal();
        // Every 10th state keeps serial dependence small enough for KS.
        let mu: Vec<f64> = chain.mu().into_iter().step_by(10).collect();
        let sg: Vec<f64> = chain.sigma().into_iter().step_by(10).collect();
        assert!(ks_one_sample(&mu, |x| t.cdf(x)).p_value > 0.01);
        let sm = j.sigma_marginal();
        assert!(ks_one_sample(&sg, |x| sm.cdf(x)).p_value > 0.01);
    }

    #[test]
    fn empty_run_and_bad_scan() {
        let s = worked();
        let settings = GibbsSettings::new(ScanOrder::mu_first(), 0, 10);
        let c = gibbs_run(&s, &hyp(), &GpdSpec::Flat, &settings, &mut RngStream::new(1, 0)).unwrap();
        assert!(c.samples.is_empty());
        let bad = GibbsSettings::new(ScanOrder::Fixed(vec![Param::Mu, Param::Mu]), 10, 0);
        assert!(gibbs_run(&s, &hyp(), &GpdSpec::Flat, &bad, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn repeated_seed_is_degenerate() {
        let s = worked();
        let settings = GibbsSettings::new(ScanOrder::UniformRandom, 200, 0);
        let a = gibbs_run(&s, &hyp(), &GpdSpec::Flat, &settings, &mut RngStream::new(9, 0)).unwrap();
        let b = gibbs_run(&s, &hyp(), &GpdSpec::Flat, &settings, &mut RngStream::new(9, 0)).unwrap();
        assert_eq!(gelman_rubin_chains(&[a, b]), Err(Error::DegenerateChains));
    }

    #[test]
    fn thin_slice_is_rejected() {
        let s = worked();
        let settings = GibbsSettings::new(ScanOrder::UniformRandom, 2000, 0);
        let c = gibbs_run(&s, &hyp(), &GpdSpec::Flat, &settings, &mut RngStream::new(3, 0)).unwrap();
        let e = conditional_discrepancy(&c, &s, &hyp(), &GpdSpec::Flat, &[(100.0, 200.0)], 1);
        assert!(matches!(e, Err(Error::InsufficientSlicePopulation { count: 0, .. })));
    }

    #[test]
    fn huge_sigma_flat_ratio_is_root_two() {
        // With a nearly flat likelihood the matched-kernel evidence tends to
        // f(0) against the integral of f², which differ by √2.
        let s = worked();
        let ev = predictive_evidence_known(1e6, &s);
        assert!((ev.ratio() - std::f64::consts::SQRT_2).abs() < 1e-3);
    }

    fn predictive_evidence_known(sigma: f64, s: &NormalSummary) -> crate::inference::Evidence {
        let k = NormalKnownSummary::new(s.n(), s.xbar(), sigma).unwrap();
        normal_known::predictive_evidence(&k, &hyp(), &GpdSpec::Flat).unwrap()
    }

    #[test]
    fn fiducial_slices_match_conditionals() {
        let s = worked();
        let settings = GibbsSettings::new(ScanOrder::mu_first(), 200_000, 500).with_mu_update(MuConditional::Fiducial);
        let c = gibbs_run(&s, &hyp(), &GpdSpec::Flat, &settings, &mut RngStream::new(11, 0)).unwrap();
        let slices = [(2.0, 2.2), (2.8, 3.0), (3.6, 3.8)];
        for d in conditional_discrepancy(&c, &s, &hyp(), &GpdSpec::Flat, &slices, 5).unwrap() {
            assert!(d.ks.p_value > 0.001, "{d:?}");
        }
    }

    #[test]
    fn fiducial_scans_have_equal_correlation() {
        let s = worked();
        let d = DiagnosticSettings { samples: 20_000, burn_in: 100, replicates: 6, seed: 4, mu_update: MuConditional::Fiducial };
        let r = scan_order_diagnostic(&s, &hyp(), &GpdSpec::Flat, &d).unwrap();
        assert!(r.p_value > 0.001, "{r:?}");
        assert!(r.corr_mu_first.abs() < 0.02);
        let zero = DiagnosticSettings { samples: 0, ..d };
        assert!(scan_order_diagnostic(&s, &hyp(), &GpdSpec::Flat, &zero).is_err());
    }

    #[test]
    fn overdispersed_chains_converge() {
        let s = worked();
        let study = GelmanRubinStudy {
            chains: 4,
            samples: 20_000,
            burn_in: 500,
            overdispersed: true,
            scan: ScanOrder::UniformRandom,
            mu_update: MuConditional::Fiducial,
            seed: 8,
        };
        let r = gelman_rubin_study(&s, &hyp(), &GpdSpec::Flat, &study).unwrap();
        assert!(r.r_mu < 1.02 && r.r_sigma < 1.02, "{r:?}");
        let post = GelmanRubinStudy { mu_update: MuConditional::PostData, ..study };
        let r = gelman_rubin_study(&s, &hyp(), &GpdSpec::smoothed_on(-0.2, 0.2), &post).unwrap();
        assert!(r.r_mu < 1.05 && r.r_sigma < 1.05, "{r:?}");
    }

    #[test]
    fn random_scan_marginals_match_fixed_scan() {
        let s = worked();
        let g = GpdSpec::smoothed_on(-0.2, 0.2);
        // Random scan moves one coordinate per transition, so it is thinned
        // twice as hard to compare like with like.
        let run = |scan: ScanOrder, n: usize, step: usize, stream: u64| {
            let c = gibbs_run(&s, &hyp(), &g, &GibbsSettings::new(scan, n, 1000), &mut RngStream::new(21, stream)).unwrap();
            let mu: Vec<f64> = c.mu().into_iter().step_by(step).collect();
            let sg: Vec<f64> = c.sigma().into_iter().step_by(step).collect();
            (mu, sg)
        };
        let (mr, sr) = run(ScanOrder::UniformRandom, 100_000, 20, 0);
        let (mf, sf) = run(ScanOrder::sigma_first(), 50_000, 10, 1);
        assert!(ks_two_sample(&mr, &mf).p_value > 0.001);
        assert!(ks_two_sample(&sr, &sf).p_value > 0.001);
    }
}
