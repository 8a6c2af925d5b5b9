//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Monte Carlo settings are the full published scales, so this
//! takes several minutes.

use sharpfid::binomial::{self, fiducial_pdf, flat_evidence, BinomialCount};
use sharpfid::normal_direct::{joint_fs, post_prob_direct, NormalSummary};
use sharpfid::normal_gibbs::{
    conditional_mu, gibbs_run, post_prob_gibbs, scan_order_diagnostic, DiagnosticSettings, GibbsSettings,
    MuConditional, ScanOrder,
};
use sharpfid::normal_known::{self, crossover_z, post_prob_sharp, NormalKnownSummary};
use sharpfid::numerics::dist::{StudentT, Univariate};
use sharpfid::numerics::stats::ks_one_sample;
use sharpfid::numerics::{integrate, Histogram, QuadratureSpec, RngStream};
use sharpfid::relative_risk::{self, RatioHypothesis, TwoArmCounts};
use sharpfid::{post_data_probability, ContinuousDensity, GpdSpec, IntervalHypothesis, McConfig};
use std::time::{Duration, Instant};

type Check = std::result::Result<String, String>;

struct Runner {
    failures: usize,
}

impl Runner {
    fn run(&mut self, name: &str, limit: Duration, f: impl FnOnce() -> Check) {
        let t = Instant::now();
        let out = f();
        let took = t.elapsed();
        let out = match out {
            Ok(d) if took > limit => Err(format!("{d}; took {took:.1?}, limit {limit:?}")),
            o => o,
        };
        match out {
            Ok(d) => println!("PASS {name}: {d} [{took:.1?}]"),
            Err(d) => {
                self.failures += 1;
                println!("FAIL {name}: {d} [{took:.1?}]");
            }
        }
    }
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn gap(l: f64, r: f64) -> f64 {
    (l - r).abs() / l.max(r)
}

fn sharp_null() -> Check {
    let mut worst = 0f64;
    for (p0, want) in [(0.5, [0.1716, 0.0488, 0.0063]), (0.3, [0.0816, 0.0215, 0.0027])] {
        for (z, w) in [1.96, 2.5758, 3.2905].into_iter().zip(want) {
            worst = worst.max((post_prob_sharp(z, p0) - w).abs());
        }
    }
    ensure(worst < 5e-4, format!("max deviation {worst:.2e} (tolerance 5e-4)"))
}

fn crossover() -> Check {
    let z = crossover_z();
    let at = post_prob_sharp(z, 0.4);
    ensure(
        (at - 0.4).abs() < 1e-12 && (z - 0.8325).abs() < 5e-4,
        format!("z = {z:.6}, post at z with p0 = 0.4 is {at:.15}"),
    )
}

/// Seed-averaged over three seeds.
fn binomial_cases() -> Check {
    let h = IntervalHypothesis::symmetric(0.5, 0.01, 0.3).map_err(e)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (x, want) in [(5, 0.1580), (4, 0.0689), (3, 0.0204)] {
        let t = Instant::now();
        let c = BinomialCount::new(x, 16).map_err(e)?;
        let mut sum = 0.0;
        for seed in 1..=3 {
            sum += binomial::analyze(&c, &h, &GpdSpec::Flat, &McConfig::new(2_000_000, seed)).map_err(e)?.p_in;
        }
        let p = sum / 3.0;
        let took = t.elapsed();
        ok &= (p - want).abs() < 0.005 && took < Duration::from_secs(120);
        parts.push(format!("x={x}: {p:.4} (reference {want}, {took:.0?})"));
    }
    ensure(ok, parts.join("; "))
}

fn direct_sharp() -> Check {
    let t8 = StudentT::new(0.0, 1.0, 8.0);
    let mut worst = 0f64;
    let mut got = Vec::new();
    for (p, a, b) in [(0.05, 0.1301, 0.0602), (0.01, 0.0277, 0.0120), (0.001, 0.0024, 0.0010)] {
        let s = NormalSummary::new(9, t8.isf(p / 2.0), 3.0).map_err(e)?;
        for (p0, want) in [(0.5, a), (0.3, b)] {
            let h = IntervalHypothesis::sharp(0.0, p0).map_err(e)?;
            let v = post_prob_direct(&s, &h, &GpdSpec::Flat).map_err(e)?.p_in;
            worst = worst.max((v - want).abs());
            got.push(format!("{v:.4}"));
        }
    }
    ensure(worst < 0.002, format!("{} (max deviation {worst:.1e}, tolerance 0.002)", got.join(" ")))
}

fn section_summary() -> NormalSummary {
    NormalSummary::new(9, 2.1, 3.0).expect("valid summary")
}

fn section_hyp() -> IntervalHypothesis {
    IntervalHypothesis::symmetric(0.0, 0.2, 0.33).expect("valid hypothesis")
}

fn gibbs_vs_direct() -> Check {
    let (s, h, g) = (section_summary(), section_hyp(), GpdSpec::smoothed_on(-0.2, 0.2));
    let settings = GibbsSettings::new(ScanOrder::UniformRandom, 500_000, 1000);
    let (r, _) = post_prob_gibbs(&s, &h, &g, &settings, &mut RngStream::new(2024, 0)).map_err(e)?;
    let d = post_prob_direct(&s, &h, &g).map_err(e)?.p_in;
    let gibbs = r.p_in;
    ensure(
        (gibbs - 0.105).abs() < 0.01 && (d - 0.092).abs() < 0.005 && d < gibbs,
        format!("Gibbs {gibbs:.4} ± {:.4} (reference 0.105), direct {d:.4} (reference 0.092)", r.mc_stderr.unwrap_or(f64::NAN)),
    )
}

fn scan_orders() -> Check {
    let (s, h, g) = (section_summary(), section_hyp(), GpdSpec::smoothed_on(-0.2, 0.2));
    // 10 independent runs of 5·10⁴ per order: 5·10⁵ states per order.
    let d = DiagnosticSettings { samples: 50_000, burn_in: 1000, replicates: 10, seed: 77, mu_update: MuConditional::PostData };
    let r = scan_order_diagnostic(&s, &h, &g, &d).map_err(e)?;
    let (a, b) = (r.corr_mu_first, r.corr_sigma_first);
    // The reference values are magnitudes; under this model both correlations are
    // negative, which the detail line shows.
    let ok = (a.abs() - 0.075).abs() < 0.02 && (b.abs() - 0.120).abs() < 0.02 && a.abs() < b.abs() && r.p_value < 0.05;
    ensure(
        ok,
        format!("μ first {a:+.4}, σ first {b:+.4} (reference 0.075, 0.120 unsigned); z = {:.2}, p = {:.1e}", r.z, r.p_value),
    )
}

fn relative_risk_cases(swap: &mut Option<(f64, f64, f64)>, gaps: &mut Vec<f64>) -> Check {
    let h = RatioHypothesis::new(0.045, 0.4).map_err(e)?;
    let mut parts = Vec::new();
    let mut ok = true;
    let mut values = Vec::new();
    for (e_t, want) in [(5, 0.0424), (6, 0.0927), (7, 0.168)] {
        let t = Instant::now();
        let c = TwoArmCounts::new(e_t, 20, 18, 30).map_err(e)?;
        let r = relative_risk::analyze(&c, &h, &h.default_gpd(), &McConfig::new(4_000_000, 11)).map_err(e)?;
        let took = t.elapsed();
        if e_t == 6 {
            *swap = Some((r.result.p_in, r.result.mc_stderr.unwrap_or(f64::NAN), 0.0));
        }
        if let Some(g) = r.gaps {
            gaps.push(g.max_base_normalized());
        }
        let p = r.result.p_in;
        values.push(p);
        ok &= (p - want).abs() < 0.01 && p <= 0.4 && took < Duration::from_secs(300);
        parts.push(format!("e_t={e_t}: {p:.4} (reference {want}, {took:.0?})"));
    }
    ok &= values.windows(2).all(|w| w[0] < w[1]);
    ensure(ok, parts.join("; "))
}

fn oracle_equivalence() -> Check {
    let s = section_summary();
    let settings = GibbsSettings::new(ScanOrder::UniformRandom, 100_000, 1000).with_mu_update(MuConditional::Fiducial);
    let chain = gibbs_run(&s, &section_hyp(), &GpdSpec::Flat, &settings, &mut RngStream::new(5, 0)).map_err(e)?;
    let j = joint_fs(&s);
    let (t, sm) = (j.mu_marginal(), j.sigma_marginal());
    // Every 10th state, to keep the serial dependence KS ignores small.
    let mu: Vec<f64> = chain.mu().into_iter().step_by(10).collect();
    let sg: Vec<f64> = chain.sigma().into_iter().step_by(10).collect();
    let p_mu = ks_one_sample(&mu, |x| t.cdf(x)).p_value;
    let p_sigma = ks_one_sample(&sg, |x| sm.cdf(x)).p_value;

    let c = BinomialCount::new(5, 16).map_err(e)?;
    let draws = binomial::sample_fs_seeded(&c, 2_000_000, 3, 0).map_err(e)?;
    let w = vec![1.0; draws.len()];
    let edges: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    let hist = Histogram::from_edges(&draws, &w, edges.clone()).map_err(e)?;
    let spec = QuadratureSpec::relative(1e-6);
    let mut oracle = Vec::new();
    for k in 0..50 {
        let m = integrate(|p| fiducial_pdf(&c, p).unwrap_or(f64::NAN), edges[k], edges[k + 1], &spec).map_err(e)?;
        oracle.push(m * 50.0);
    }
    let peak = oracle.iter().cloned().fold(0.0, f64::max);
    let sup = hist.densities().iter().zip(&oracle).map(|(h, o)| (h - o).abs()).fold(0.0, f64::max);
    let rel = sup / peak;
    ensure(
        p_mu > 0.01 && p_sigma > 0.01 && rel < 0.03,
        format!("Gibbs KS p: μ {p_mu:.3}, σ {p_sigma:.3}; binomial histogram sup error {rel:.4} of peak"),
    )
}

fn continuity(rr_gaps: &[f64]) -> Check {
    let mut closed = 0f64;
    let h = IntervalHypothesis::symmetric(0.0, 0.2, 0.33).map_err(e)?;
    let g = GpdSpec::smoothed_on(-0.2, 0.2);
    let mut probe = |m: &sharpfid::DensityHandle| {
        for x in [-0.2, 0.2] {
            let (l, r) = m.side_limits(x);
            closed = closed.max(gap(l, r));
        }
    };
    for xbar in [0.3, 0.5, 0.8] {
        let r = normal_known::analyze(&NormalKnownSummary::from_standard_error(xbar, 0.1).map_err(e)?, &h, &g)
            .map_err(e)?;
        probe(&r.mixture().map_err(e)?);
    }
    for xbar in [1.7, 2.1, 2.5] {
        let r = post_prob_direct(&NormalSummary::new(9, xbar, 3.0).map_err(e)?, &h, &g).map_err(e)?;
        probe(&r.mixture().map_err(e)?);
    }
    for sigma in [1.0, 3.0, 6.0] {
        probe(&conditional_mu(sigma, &section_summary(), &h, &g).map_err(e)?.mixture().map_err(e)?);
    }

    // Histogram gaps are compared after dividing out the fiducial density
    // in each bin; the raw gap also contains the density's own slope.
    let bh = IntervalHypothesis::symmetric(0.5, 0.03, 0.3).map_err(e)?;
    let c = BinomialCount::new(5, 16).map_err(e)?;
    let b = binomial::analyze_detailed(&c, &bh, &GpdSpec::smoothed_on(0.47, 0.53), &McConfig::new(2_000_000, 9))
        .map_err(e)?;
    let bg = b.gaps.ok_or("no gaps for a smoothed run")?;
    let bin_gap = bg.max_base_normalized();
    let rr = rr_gaps.iter().cloned().fold(0.0, f64::max);
    ensure(
        closed < 1e-6 && bin_gap < 0.05 && rr < 0.05 && rr_gaps.len() == 3,
        format!(
            "closed-form max {closed:.1e}; binomial histogram {bin_gap:.4} (raw {:.4}); relative-risk histogram {rr:.4}",
            bg.max_raw()
        ),
    )
}

fn invariance(swap: Option<(f64, f64, f64)>) -> Check {
    let mut ratio = 0f64;
    for p0 in [0.1, 0.33, 0.5, 0.9] {
        for (a, b) in [(0.2, 3.0), (1e-5, 2e-5), (4.0, 0.5)] {
            for c in [1e-8, 0.37, 1e7] {
                let x = post_data_probability(p0, a, b).map_err(e)?;
                let y = post_data_probability(p0, c * a, c * b).map_err(e)?;
                ratio = ratio.max((x - y).abs());
            }
        }
    }

    let mut loc = 0f64;
    for smooth in [false, true] {
        for (xbar, sd) in [(0.1, 1.0), (0.35, 0.5)] {
            let run = |x: f64, s: f64, lo: f64, hi: f64| -> std::result::Result<f64, String> {
                let h = IntervalHypothesis::new(lo, hi, 0.4).map_err(e)?;
                let g = if smooth { GpdSpec::smoothed_on(lo, hi) } else { GpdSpec::Flat };
                Ok(normal_known::analyze(&NormalKnownSummary::new(1, x, s).map_err(e)?, &h, &g).map_err(e)?.p_in)
            };
            let a = run(xbar, sd, -0.2, 0.2)?;
            let b = run(3.0 - 2.5 * xbar, 2.5 * sd, 3.0 - 0.5, 3.0 + 0.5)?;
            loc = loc.max((a - b).abs());
        }
    }

    let mut refl = 0f64;
    for (x, lo, hi) in [(5, 0.49, 0.51), (3, 0.1, 0.3), (12, 0.6, 0.9)] {
        let a = flat_evidence(&BinomialCount::new(x, 16).map_err(e)?, &IntervalHypothesis::new(lo, hi, 0.3).map_err(e)?)
            .map_err(e)?;
        let b = flat_evidence(
            &BinomialCount::new(16 - x, 16).map_err(e)?,
            &IntervalHypothesis::new(1.0 - hi, 1.0 - lo, 0.3).map_err(e)?,
        )
        .map_err(e)?;
        refl = refl.max((a.ratio() / b.ratio() - 1.0).abs());
    }

    let (p, se, _) = swap.ok_or("relative-risk run missing")?;
    let h = RatioHypothesis::new(0.045, 0.4).map_err(e)?;
    let c = TwoArmCounts::new(6, 20, 18, 30).map_err(e)?.swapped();
    let q = relative_risk::analyze(&c, &h, &h.default_gpd(), &McConfig::new(4_000_000, 12)).map_err(e)?.result;
    let tol = 4.0 * se.hypot(q.mc_stderr.unwrap_or(f64::NAN));
    ensure(
        ratio < 1e-12 && loc < 1e-8 && refl < 1e-6 && (p - q.p_in).abs() < tol,
        format!(
            "ratio {ratio:.1e}; location-scale {loc:.1e}; reflection {refl:.1e}; arm swap {p:.4} vs {:.4} (4 se = {tol:.4})",
            q.p_in
        ),
    )
}

fn main() {
    let mut r = Runner { failures: 0 };
    let mins = |m: u64| Duration::from_secs(60 * m);
    r.run("closed-form sharp null", Duration::from_secs(1), sharp_null);
    r.run("crossover", Duration::from_secs(1), crossover);
    r.run("binomial", mins(6), binomial_cases);
    r.run("normal unknown variance, direct", mins(1), direct_sharp);
    r.run("Gibbs vs direct", mins(10), gibbs_vs_direct);
    r.run("scanning-order incompatibility", mins(10), scan_orders);
    let mut swap = None;
    let mut gaps = Vec::new();
    r.run("relative risk", mins(15), || relative_risk_cases(&mut swap, &mut gaps));
    r.run("oracle equivalence", mins(10), oracle_equivalence);
    r.run("continuity suite", mins(10), || continuity(&gaps));
    r.run("invariance suite", mins(10), || invariance(swap));
    if r.failures > 0 {
        println!("{} criteria failed", r.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
