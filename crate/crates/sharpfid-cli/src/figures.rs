//! Data behind the nine figures: one CSV per curve or histogram and a
//! `figN_meta.json` describing the settings and files.

use crate::error::{CliError, CliResult};
use crate::output::{curve_rows, histogram_rows, write_csv, write_json};
use serde_json::{json, Value};
use sharpfid::normal_direct::{self, joint_fs, NormalSummary};
use sharpfid::normal_gibbs::{self, GibbsSettings, ScanOrder};
use sharpfid::normal_known::{self, NormalKnownSummary};
use sharpfid::numerics::dist::Univariate;
use sharpfid::numerics::{Histogram, RngStream};
use sharpfid::relative_risk::{self, RatioHypothesis, TwoArmCounts};
use sharpfid::{binomial, ContinuousDensity, DensityHandle, GpdSpec, IntervalHypothesis, McConfig};
use std::path::{Path, PathBuf};

pub const CURVE_HEADER: [&str; 3] = ["label", "x", "y"];
pub const HISTOGRAM_HEADER: [&str; 4] = ["label", "bin_lo", "bin_hi", "density"];

#[derive(Debug, Clone, Copy)]
pub struct FigureOptions {
    pub paper_scale: bool,
    pub seed: u64,
}

/// 0 to 5 in steps of 0.025.
fn xbar_grid() -> Vec<f64> {
    (0..=200).map(|i| i as f64 * 0.025).collect()
}

/// `lo` to `hi` inclusive in steps of `step`, computed by index.
fn even(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn tag(x: f64) -> String {
    format!("{x}")
}

struct Writer<'a> {
    dir: &'a Path,
    id: u8,
    files: Vec<Value>,
}

impl Writer<'_> {
    fn path(&self, slug: &str) -> PathBuf {
        self.dir.join(format!("fig{}_{slug}.csv", self.id))
    }

    fn curve(&mut self, slug: &str, label: &str, y: &str, points: &[(f64, f64)]) -> CliResult<()> {
        let path = self.path(slug);
        write_csv(&path, &CURVE_HEADER, curve_rows(label, points))?;
        self.files.push(json!({"file": file_name(&path), "label": label, "kind": "curve", "y": y}));
        Ok(())
    }

    fn histogram(&mut self, slug: &str, label: &str, h: &Histogram) -> CliResult<()> {
        let path = self.path(slug);
        write_csv(&path, &HISTOGRAM_HEADER, histogram_rows(label, h))?;
        self.files.push(json!({"file": file_name(&path), "label": label, "kind": "histogram"}));
        Ok(())
    }

    fn finish(self, settings: Value) -> CliResult<Vec<PathBuf>> {
        let meta = self.dir.join(format!("fig{}_meta.json", self.id));
        let mut out: Vec<PathBuf> = self.files.iter().map(|f| self.dir.join(f["file"].as_str().unwrap_or_default())).collect();
        write_json(&meta, &json!({"figure": self.id, "settings": settings, "files": self.files}))?;
        out.push(meta);
        Ok(out)
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn pdf_curve(d: &DensityHandle, xs: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().map(|&x| (x, d.pdf(x))).collect()
}

/// Bins of `width` from 0 to just past the largest value.
fn positive_edges(values: &[f64], width: f64) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    let n = ((max / width).floor() as usize + 1).max(1);
    (0..=n).map(|i| i as f64 * width).collect()
}

/// Histogram read as a polyline through the bin centres.
fn histogram_curve(h: &Histogram) -> Vec<(f64, f64)> {
    h.centers().into_iter().zip(h.densities().iter().copied()).collect()
}

pub fn generate(id: u8, dir: &Path, opts: FigureOptions) -> CliResult<Vec<PathBuf>> {
    if !(1..=9).contains(&id) {
        return Err(CliError::Usage(format!("figure {id} does not exist (1 to 9)")));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    let mut w = Writer { dir, id, files: Vec::new() };
    let settings = match id {
        1 => {
            for eps in [0.0, 0.25, 0.5] {
                for p0 in [0.3, 0.5] {
                    let pts = xbar_grid()
                        .into_iter()
                        .map(|xbar| {
                            let s = NormalKnownSummary::from_standard_error(xbar, 1.0)?;
                            let h = IntervalHypothesis::symmetric(0.0, eps, p0)?;
                            Ok((xbar, normal_known::analyze(&s, &h, &GpdSpec::Flat)?.p_in))
                        })
                        .collect::<sharpfid::Result<Vec<_>>>()?;
                    let label = format!("eps={} prior={}", tag(eps), tag(p0));
                    w.curve(&format!("eps{}_prior{}", tag(eps), tag(p0)), &label, "p_in", &pts)?;
                }
            }
            json!({"model": "normal-known", "se": 1.0, "gpd": "flat", "eps": [0.0, 0.25, 0.5],
                   "prior": [0.3, 0.5], "xbar_grid": {"from": 0.0, "to": 5.0, "step": 0.025}})
        }
        2 | 5 => {
            let (eps, p0, gpd) = if id == 2 {
                (0.1, 0.3, GpdSpec::Flat)
            } else {
                (0.2, 0.33, GpdSpec::smoothed_on(-0.2, 0.2))
            };
            let mu = even(-2.0, 6.0, 0.005);
            for xbar in [1.7, 2.1, 2.5] {
                let s = NormalKnownSummary::from_standard_error(xbar, 1.0)?;
                let h = IntervalHypothesis::symmetric(0.0, eps, p0)?;
                let mix = normal_known::analyze(&s, &h, &gpd)?.mixture()?;
                w.curve(&format!("xbar{}", tag(xbar)), &format!("xbar={}", tag(xbar)), "density", &pdf_curve(&mix, &mu))?;
            }
            let gpd_name = if id == 2 { "flat" } else { "smoothed beta(4,4), continuity tau" };
            json!({"model": "normal-known", "se": 1.0, "gpd": gpd_name, "eps": eps, "prior": p0,
                   "xbar": [1.7, 2.1, 2.5], "mu_grid": {"from": -2.0, "to": 6.0, "step": 0.005}})
        }
        3 => {
            for eps in [0.0, 0.1, 0.2] {
                for p0 in [0.3, 0.5] {
                    let pts = xbar_grid()
                        .into_iter()
                        .map(|xbar| {
                            let s = NormalKnownSummary::from_standard_error(xbar, 1.0)?;
                            let h = IntervalHypothesis::symmetric(0.0, eps, p0)?;
                            let r = normal_known::analyze(&s, &h, &GpdSpec::Flat)?;
                            Ok((xbar, normal_known::interval_probability(&r, -0.2, 0.2)?))
                        })
                        .collect::<sharpfid::Result<Vec<_>>>()?;
                    let label = format!("eps={} prior={}", tag(eps), tag(p0));
                    w.curve(&format!("eps{}_prior{}", tag(eps), tag(p0)), &label, "probability of [-0.2, 0.2]", &pts)?;
                }
            }
            json!({"model": "normal-known", "se": 1.0, "gpd": "flat", "eps": [0.0, 0.1, 0.2], "prior": [0.3, 0.5],
                   "fixed_interval": [-0.2, 0.2], "xbar_grid": {"from": 0.0, "to": 5.0, "step": 0.025}})
        }
        4 => {
            let samples = if opts.paper_scale { 2_000_000 } else { 200_000 };
            let h = IntervalHypothesis::symmetric(0.5, 0.01, 0.3)?;
            let edges = even(0.0, 1.0, 0.01);
            let mut p_in = Vec::new();
            for x in [5, 4, 3] {
                let c = binomial::BinomialCount::new(x, 16)?;
                let a = binomial::analyze_detailed(&c, &h, &GpdSpec::Flat, &McConfig::new(samples, opts.seed))?;
                let hist = Histogram::from_edges(&a.draws, &a.weights, edges.clone())?;
                w.histogram(&format!("x{x}"), &format!("x={x}"), &hist)?;
                p_in.push(a.result.p_in);
            }
            json!({"model": "binomial", "n": 16, "x": [5, 4, 3], "interval": [0.49, 0.51], "prior": 0.3,
                   "gpd": "flat", "samples": samples, "seed": opts.seed, "bin_width": 0.01, "p_in": p_in})
        }
        6 => {
            let samples = if opts.paper_scale { 5_000_000 } else { 500_000 };
            let s = NormalSummary::new(9, 2.1, 3.0)?;
            let h = IntervalHypothesis::symmetric(0.0, 0.2, 0.33)?;
            let settings = GibbsSettings::new(ScanOrder::UniformRandom, samples, 1000);
            let gpd = GpdSpec::smoothed_on(-0.2, 0.2);
            let (r, chain) = normal_gibbs::post_prob_gibbs(&s, &h, &gpd, &settings, &mut RngStream::new(opts.seed, 0))?;
            let (mu, sigma) = (chain.mu(), chain.sigma());
            let ones = vec![1.0; mu.len()];
            let mu_edges = even(-6.0, 10.0, 0.05);
            let sigma_edges = even(0.0, 20.0, 0.05);
            w.histogram("mu_hist", "mu gibbs", &Histogram::from_edges(&mu, &ones, mu_edges)?)?;
            w.histogram("sigma_hist", "sigma gibbs", &Histogram::from_edges(&sigma, &ones, sigma_edges)?)?;
            let j = joint_fs(&s);
            let t = j.mu_marginal();
            let sm = j.sigma_marginal();
            let mu_curve: Vec<(f64, f64)> = even(-6.0, 10.0, 0.01).into_iter().map(|x| (x, t.pdf(x))).collect();
            let sigma_curve: Vec<(f64, f64)> = even(0.0, 20.0, 0.01).into_iter().map(|x| (x, sm.pdf(x))).collect();
            w.curve("mu_fiducial", "mu fiducial", "density", &mu_curve)?;
            w.curve("sigma_fiducial", "sigma fiducial", "density", &sigma_curve)?;
            json!({"model": "normal-gibbs", "n": 9, "xbar": 2.1, "sd": 3.0, "eps": 0.2, "prior": 0.33,
                   "gpd": "smoothed beta(4,4), continuity tau per conditional", "scan": "random",
                   "samples": samples, "burn_in": 1000, "seed": opts.seed, "bin_width": 0.05,
                   "p_in": r.p_in, "mc_stderr": r.mc_stderr})
        }
        7 => {
            for eps in [0.0, 0.25, 0.5] {
                for p0 in [0.3, 0.5] {
                    let pts = xbar_grid()
                        .into_iter()
                        .map(|xbar| {
                            let s = NormalSummary::new(9, xbar, 3.0)?;
                            let h = IntervalHypothesis::symmetric(0.0, eps, p0)?;
                            Ok((xbar, normal_direct::post_prob_direct(&s, &h, &GpdSpec::Flat)?.p_in))
                        })
                        .collect::<sharpfid::Result<Vec<_>>>()?;
                    let label = format!("eps={} prior={}", tag(eps), tag(p0));
                    w.curve(&format!("eps{}_prior{}", tag(eps), tag(p0)), &label, "p_in", &pts)?;
                }
            }
            json!({"model": "normal-direct", "n": 9, "sd": 3.0, "gpd": "flat", "eps": [0.0, 0.25, 0.5],
                   "prior": [0.3, 0.5], "xbar_grid": {"from": 0.0, "to": 5.0, "step": 0.025}})
        }
        8 => {
            let h = IntervalHypothesis::symmetric(0.0, 0.2, 0.33)?;
            let gpd = GpdSpec::smoothed_on(-0.2, 0.2);
            let mu = even(-4.0, 8.0, 0.01);
            for xbar in [1.7, 2.1, 2.5] {
                let s = NormalSummary::new(9, xbar, 3.0)?;
                let d = normal_direct::marginal_post_density(&s, &h, &gpd)?;
                w.curve(&format!("mu_xbar{}", tag(xbar)), &format!("mu xbar={}", tag(xbar)), "density", &pdf_curve(&d, &mu))?;
            }
            let s = NormalSummary::new(9, 2.1, 3.0)?;
            let sigma = even(0.05, 12.0, 0.01);
            let post = normal_direct::joint_post_density(&s, &h, &gpd)?.sigma_marginal();
            let fid = joint_fs(&s).sigma_marginal();
            let post_pts: Vec<(f64, f64)> = sigma.iter().map(|&x| (x, post.pdf(x))).collect();
            let fid_pts: Vec<(f64, f64)> = sigma.iter().map(|&x| (x, fid.pdf(x))).collect();
            w.curve("sigma_post", "sigma post-data xbar=2.1", "density", &post_pts)?;
            w.curve("sigma_fiducial", "sigma fiducial xbar=2.1", "density", &fid_pts)?;
            json!({"model": "normal-direct", "n": 9, "sd": 3.0, "eps": 0.2, "prior": 0.33,
                   "gpd": "smoothed beta(4,4) on the mu marginal, continuity tau", "xbar": [1.7, 2.1, 2.5],
                   "mu_grid": {"from": -4.0, "to": 8.0, "step": 0.01}, "sigma_grid": {"from": 0.05, "to": 12.0, "step": 0.01}})
        }
        9 => {
            let samples = if opts.paper_scale { 4_000_000 } else { 400_000 };
            let hyp = RatioHypothesis::new(0.045, 0.4)?;
            let gpd = hyp.default_gpd();
            let mc = McConfig::new(samples, opts.seed);
            let width = 0.01;
            let split = |pairs: &[(f64, f64)]| {
                let t: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let c: Vec<f64> = pairs.iter().map(|p| p.1).collect();
                let r: Vec<f64> = pairs.iter().map(|p| p.0 / p.1).collect();
                [t, c, r]
            };
            let names = ["pi_t", "pi_c", "rho"];
            let fid = relative_risk::analyze(&TwoArmCounts::new(6, 20, 18, 30)?, &hyp, &gpd, &mc)?;
            for (name, v) in names.iter().zip(split(&fid.draws)) {
                let hist = Histogram::from_edges(&v, &fid.weights, positive_edges(&v, width))?;
                w.histogram(&format!("{name}_hist_et6"), &format!("{name} e_t=6"), &hist)?;
            }
            let mut p_in = Vec::new();
            for e_t in [5, 6, 7] {
                let a = relative_risk::jeffreys_approx(&TwoArmCounts::new(e_t, 20, 18, 30)?, &hyp, &gpd, &mc)?;
                for (name, v) in names.iter().zip(split(&a.draws)) {
                    let hist = Histogram::from_edges(&v, &a.weights, positive_edges(&v, width))?;
                    let label = format!("{name} jeffreys e_t={e_t}");
                    w.curve(&format!("{name}_jeffreys_et{e_t}"), &label, "density", &histogram_curve(&hist))?;
                }
                p_in.push(a.result.p_in);
            }
            json!({"model": "relative-risk", "n_t": 20, "e_c": 18, "n_c": 30, "e_t_histograms": 6,
                   "e_t_curves": [5, 6, 7], "eps": 0.045, "prior": 0.4,
                   "gpd": "log-scale beta(4,4) bump, continuity tau", "samples": samples, "seed": opts.seed,
                   "bin_width": width, "fiducial_p_in_et6": fid.result.p_in, "jeffreys_p_in": p_in})
        }
        _ => unreachable!(),
    };
    w.finish(settings)
}
