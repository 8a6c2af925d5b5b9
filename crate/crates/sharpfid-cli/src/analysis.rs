//! Turns an [`AnalysisSpec`] into a result record and a density table.

use crate::error::{CliError, CliResult};
use crate::spec::{AnalysisSpec, GpdChoice, Model, ScanArg};
use serde::Serialize;
use sharpfid::normal_direct::{self, NormalSummary};
use sharpfid::normal_gibbs::{self, GibbsSettings, ScanOrder};
use sharpfid::normal_known::{self, NormalKnownSummary};
use sharpfid::numerics::RngStream;
use sharpfid::relative_risk::{self, RatioHypothesis, TwoArmCounts};
use sharpfid::{binomial, DensityHandle, EndpointGaps, GpdSpec, IntervalHypothesis, McConfig, PostDataResult};
use std::collections::BTreeMap;

pub const DEFAULT_SEED: u64 = 20_260_101;
pub const DEFAULT_GIBBS_SAMPLES: usize = 200_000;
pub const DEFAULT_BURN_IN: usize = 1_000;
pub const DEFAULT_IMPORTANCE_SAMPLES: usize = 1_000_000;
const DENSITY_POINTS: usize = 801;

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub model: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub prior: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub tau: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub ess: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Model-specific extras: endpoint gaps, chain correlation, point mass.
    pub diagnostics: BTreeMap<&'static str, f64>,
}

pub struct Outcome {
    pub record: Record,
    /// (x, density of the continuous part) on an even grid.
    pub density: Vec<(f64, f64)>,
}

fn need<T: Copy>(v: Option<T>, name: &str, model: Model) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("{} needs --{name}", model.name())))
}

fn forbid<T>(v: &Option<T>, name: &str, model: Model) -> CliResult<()> {
    match v {
        Some(_) => Err(CliError::Usage(format!("--{name} does not apply to {}", model.name()))),
        None => Ok(()),
    }
}

fn interval(spec: &AnalysisSpec, default_centre: f64) -> CliResult<IntervalHypothesis> {
    let h = &spec.hypothesis;
    let prior = need(h.prior, "prior", spec.model)?;
    let hyp = match (h.lo, h.hi, h.eps) {
        (Some(lo), Some(hi), None) => {
            forbid(&h.centre, "centre", spec.model)?;
            IntervalHypothesis::new(lo, hi, prior)?
        }
        (None, None, Some(eps)) => IntervalHypothesis::symmetric(h.centre.unwrap_or(default_centre), eps, prior)?,
        _ => return Err(CliError::Usage("give either --eps (with optional --centre) or both --lo and --hi".into())),
    };
    Ok(hyp)
}

/// Evenly spaced points covering the union of `ranges`.
fn grid(ranges: &[(f64, f64)]) -> Vec<f64> {
    let lo = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let hi = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return vec![];
    }
    (0..DENSITY_POINTS).map(|i| lo + (hi - lo) * i as f64 / (DENSITY_POINTS - 1) as f64).collect()
}

fn tabulate(d: &DensityHandle, ranges: &[(f64, f64)]) -> Vec<(f64, f64)> {
    grid(ranges).into_iter().map(|x| (x, d.pdf(x))).collect()
}

impl Record {
    fn new(spec: &AnalysisSpec, lo: f64, hi: f64, prior: f64, r: &PostDataResult) -> Self {
        Record {
            model: spec.model.name(),
            lo,
            hi,
            prior,
            p_in: r.p_in,
            p_out: r.p_out,
            tau: r.tau_used,
            mc_stderr: r.mc_stderr,
            ess: r.ess,
            samples: None,
            seed: None,
            diagnostics: BTreeMap::new(),
        }
    }

    fn with_mc(mut self, samples: usize, seed: u64) -> Self {
        self.samples = Some(samples);
        self.seed = Some(seed);
        self
    }

    fn note_atom(&mut self, d: &DensityHandle) {
        if let Some((at, mass)) = d.atom() {
            self.diagnostics.insert("atom_at", at);
            self.diagnostics.insert("atom_mass", mass);
        }
    }

    fn note_gaps(&mut self, gaps: &Option<EndpointGaps>) {
        if let Some(g) = gaps {
            self.diagnostics.insert("gap_lo", g.base_normalized.0);
            self.diagnostics.insert("gap_hi", g.base_normalized.1);
            self.diagnostics.insert("gap_lo_raw", g.raw.0);
            self.diagnostics.insert("gap_hi_raw", g.raw.1);
        }
    }
}

pub fn run(spec: &AnalysisSpec) -> CliResult<Outcome> {
    let d = &spec.data;
    let model = spec.model;
    let seed = spec.mc.seed.unwrap_or(DEFAULT_SEED);
    if model != Model::NormalGibbs {
        forbid(&spec.mc.scan, "scan", model)?;
        forbid(&spec.mc.burn_in, "burn-in", model)?;
    }
    match model {
        Model::NormalKnown => {
            let xbar = need(d.xbar, "xbar", model)?;
            let s = match (d.se, d.sigma, d.n) {
                (Some(se), None, None) => NormalKnownSummary::from_standard_error(xbar, se)?,
                (None, Some(sigma), Some(n)) => NormalKnownSummary::new(n, xbar, sigma)?,
                _ => return Err(CliError::Usage("normal-known needs either --se or both --sigma and --n".into())),
            };
            forbid(&spec.mc.samples, "samples", model)?;
            let hyp = interval(spec, 0.0)?;
            let r = normal_known::analyze(&s, &hyp, &spec.gpd_for(hyp.lo(), hyp.hi()))?;
            let mix = r.mixture()?;
            let mut record = Record::new(spec, hyp.lo(), hyp.hi(), hyp.prior_prob(), &r);
            record.note_atom(&mix);
            let se = s.standard_error();
            let span = [(xbar - 6.0 * se, xbar + 6.0 * se), (hyp.lo() - se, hyp.hi() + se)];
            Ok(Outcome { record, density: tabulate(&mix, &span) })
        }
        Model::NormalDirect | Model::NormalGibbs => {
            let xbar = need(d.xbar, "xbar", model)?;
            let s = NormalSummary::new(need(d.n, "n", model)?, xbar, need(d.sd, "sd", model)?)?;
            let hyp = interval(spec, 0.0)?;
            let gpd = spec.gpd_for(hyp.lo(), hyp.hi());
            let se = s.standard_error();
            let span = [(xbar - 8.0 * se, xbar + 8.0 * se), (hyp.lo() - se, hyp.hi() + se)];
            if model == Model::NormalDirect {
                forbid(&spec.mc.samples, "samples", model)?;
                let r = normal_direct::post_prob_direct(&s, &hyp, &gpd)?;
                let mix = r.mixture()?;
                let mut record = Record::new(spec, hyp.lo(), hyp.hi(), hyp.prior_prob(), &r);
                record.note_atom(&mix);
                return Ok(Outcome { record, density: tabulate(&mix, &span) });
            }
            let samples = spec.mc.samples.unwrap_or(DEFAULT_GIBBS_SAMPLES);
            let scan = spec.mc.scan.clone().map_or_else(ScanOrder::mu_first, |ScanArg(o)| o);
            let settings = GibbsSettings::new(scan, samples, spec.mc.burn_in.unwrap_or(DEFAULT_BURN_IN));
            let (r, chain) = normal_gibbs::post_prob_gibbs(&s, &hyp, &gpd, &settings, &mut RngStream::new(seed, 0))?;
            let mix = r.mixture()?;
            let mut record = Record::new(spec, hyp.lo(), hyp.hi(), hyp.prior_prob(), &r).with_mc(samples, seed);
            record.diagnostics.insert("correlation", chain.correlation());
            record.note_atom(&mix);
            Ok(Outcome { record, density: tabulate(&mix, &span) })
        }
        Model::Binomial => {
            let count = binomial::BinomialCount::new(need(d.x, "x", model)?, need(d.n, "n", model)?)?;
            let hyp = interval(spec, 0.5)?;
            if hyp.is_sharp() {
                if spec.gpd != GpdChoice::Flat {
                    return Err(CliError::Usage("a smoothed weighting needs an interval of positive width".into()));
                }
                forbid(&spec.mc.samples, "samples", model)?;
                let ev = binomial::flat_evidence(&count, &hyp)?;
                let p_in = ev.post_data_probability(hyp.prior_prob())?;
                let mut record = Record {
                    model: model.name(),
                    lo: hyp.lo(),
                    hi: hyp.hi(),
                    prior: hyp.prior_prob(),
                    p_in,
                    p_out: 1.0 - p_in,
                    tau: None,
                    mc_stderr: None,
                    ess: None,
                    samples: None,
                    seed: None,
                    diagnostics: BTreeMap::new(),
                };
                record.diagnostics.insert("atom_at", hyp.lo());
                record.diagnostics.insert("atom_mass", p_in);
                let density = grid(&[(0.0, 1.0)])
                    .into_iter()
                    .map(|x| Ok((x, (1.0 - p_in) * binomial::fiducial_pdf(&count, x)?)))
                    .collect::<sharpfid::Result<_>>()?;
                return Ok(Outcome { record, density });
            }
            let samples = spec.mc.samples.unwrap_or(DEFAULT_IMPORTANCE_SAMPLES);
            let gpd = spec.gpd_for(hyp.lo(), hyp.hi());
            let a = binomial::analyze_detailed(&count, &hyp, &gpd, &McConfig::new(samples, seed))?;
            let mix = a.result.mixture()?;
            let mut record = Record::new(spec, hyp.lo(), hyp.hi(), hyp.prior_prob(), &a.result).with_mc(samples, seed);
            record.note_gaps(&a.gaps);
            Ok(Outcome { record, density: tabulate(&mix, &mix.support()) })
        }
        Model::RelativeRisk => {
            let c = TwoArmCounts::new(
                need(d.e_t, "e-t", model)?,
                need(d.n_t, "n-t", model)?,
                need(d.e_c, "e-c", model)?,
                need(d.n_c, "n-c", model)?,
            )?;
            let h = &spec.hypothesis;
            forbid(&h.lo, "lo", model)?;
            forbid(&h.hi, "hi", model)?;
            forbid(&h.centre, "centre", model)?;
            let hyp = RatioHypothesis::new(need(h.eps, "eps", model)?, need(h.prior, "prior", model)?)?;
            let gpd = match spec.gpd {
                GpdChoice::Flat => GpdSpec::Flat,
                _ => spec.gpd_for(hyp.lo(), hyp.hi()),
            };
            let samples = spec.mc.samples.unwrap_or(DEFAULT_IMPORTANCE_SAMPLES);
            let a = relative_risk::analyze(&c, &hyp, &gpd, &McConfig::new(samples, seed))?;
            let mix = a.result.mixture()?;
            let mut record = Record::new(spec, hyp.lo(), hyp.hi(), hyp.prior_prob(), &a.result).with_mc(samples, seed);
            record.note_gaps(&a.gaps);
            Ok(Outcome { record, density: tabulate(&mix, &mix.support()) })
        }
    }
}
