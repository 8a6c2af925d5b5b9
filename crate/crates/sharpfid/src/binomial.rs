//! Binomial proportion.
//!
//! The data are generated as x = φ(Γ, π), with Γ uniform on (0, 1) and φ the
//! step function that inverts the binomial CDF. For a fixed γ the values of
//! π that reproduce the observed x form an interval. Under a uniform local
//! pre-data function, the fiducial draw given γ is Beta(x + 1, n − x + 1)
//! truncated to that interval.

use crate::engine::importance::{bump_at, endpoint_gaps, importance_fit, Draw, EndpointGaps};
use crate::error::{check_probability, Error, Result};
use crate::inference::{DensityHandle, Evidence, GpdSpec, IntervalHypothesis, McConfig, PostDataResult, WeightedSample};
use crate::numerics::dist::{BetaDist, Univariate};
use crate::numerics::rng::{partitioned_draws, uniform_open};
use crate::numerics::special::{ln_beta, LnChoose};
use crate::numerics::stats::freedman_diaconis_width;
use crate::numerics::{integrate, Histogram, QuadratureSpec};
use rand::RngCore;

/// x successes in n trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialCount {
    x: u64,
    n: u64,
}

impl BinomialCount {
    pub fn new(x: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one trial"));
        }
        if x > n {
            return Err(Error::invalid("x", format!("{x} successes exceed {n} trials")));
        }
        Ok(BinomialCount { x, n })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// The count with successes and failures swapped.
    pub fn reflected(&self) -> Self {
        BinomialCount { x: self.n - self.x, n: self.n }
    }
}

/// The π values that, together with γ, generate the observed count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreimageInterval {
    pub gamma: f64,
    pub lo: f64,
    pub hi: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("gamma", format!("{gamma} is not in (0, 1)")))
    }
}

/// The smallest y with F(y; π, n) > γ.
pub fn phi_binomial(gamma: f64, pi: f64, n: u64) -> Result<u64> {
    check_gamma(gamma)?;
    check_probability("pi", pi)?;
    if n == 0 {
        return Err(Error::invalid("n", "need at least one trial"));
    }
    let t = LnChoose::new(n);
    Ok((0..n).find(|&y| t.ln_tails(y as i64, pi).0.exp() > gamma).unwrap_or(n))
}

/// Everything about a count that does not change from draw to draw.
#[derive(Debug, Clone)]
struct Preimages {
    // F(x − 1; π) is the survival function of Beta(x, n − x + 1) at π, and
    // F(x; π) that of Beta(x + 1, n − x).
    lower: Option<BetaDist>,
    upper: Option<BetaDist>,
    base: BetaDist,
}

impl Preimages {
    fn new(c: &BinomialCount) -> Self {
        let (x, n) = (c.x as f64, c.n as f64);
        Preimages {
            lower: (c.x > 0).then(|| BetaDist::new(x, n - x + 1.0)),
            upper: (c.x < c.n).then(|| BetaDist::new(x + 1.0, n - x)),
            base: BetaDist::new(x + 1.0, n - x + 1.0),
        }
    }

    fn at(&self, gamma: f64) -> (f64, f64) {
        let lo = self.lower.as_ref().map_or(0.0, |d| d.isf(gamma));
        let hi = self.upper.as_ref().map_or(1.0, |d| d.isf(gamma));
        (lo, hi)
    }

    /// F(x − 1; π) and F(x; π).
    fn cdf_pair(&self, pi: f64) -> (f64, f64) {
        let below = self.lower.as_ref().map_or(0.0, |d| d.sf(pi));
        let at = self.upper.as_ref().map_or(1.0, |d| d.sf(pi));
        (below, at)
    }

    fn draw(&self, rng: &mut dyn RngCore) -> Result<f64> {
        let (lo, hi) = self.at(uniform_open(rng));
        if !(lo < hi) {
            return Err(Error::ZeroRegionMass { mass: 0.0 });
        }
        Ok(self.base.draw_between(lo, hi, uniform_open(rng)))
    }
}

/// {π : F(x − 1; π) ≤ γ < F(x; π)}.
pub fn preimage_interval(gamma: f64, x: u64, n: u64) -> Result<PreimageInterval> {
    check_gamma(gamma)?;
    let (lo, hi) = Preimages::new(&BinomialCount::new(x, n)?).at(gamma);
    Ok(PreimageInterval { gamma, lo, hi })
}

/// `draws` values from the fiducial density f_S(π | x), unit weights.
pub fn sample_fs(count: &BinomialCount, draws: usize, rng: &mut dyn RngCore) -> Result<WeightedSample> {
    let p = Preimages::new(count);
    let xs = (0..draws).map(|_| p.draw(rng)).collect::<Result<Vec<_>>>()?;
    WeightedSample::unweighted(xs)
}

/// [`sample_fs`] split over independent streams of `seed` starting at
/// `stream_base`; the result does not depend on the thread count.
pub fn sample_fs_seeded(count: &BinomialCount, draws: usize, seed: u64, stream_base: u64) -> Result<Vec<f64>> {
    let p = Preimages::new(count);
    partitioned_draws(seed, stream_base, draws, |r| p.draw(r))
}

// The nested Beta inversions carry about 1e-12 relative noise, which
// stalls tighter requests on evidence far in a tail.
fn oracle_spec() -> QuadratureSpec {
    QuadratureSpec::relative(1e-8)
}

/// f_S(π | x) by quadrature over γ:
///
/// ```text
/// b(π) ∫ 1/M(γ) dγ  over F(x − 1; π) ≤ γ < F(x; π)
/// ```
///
/// with b the Beta(x + 1, n − x + 1) density and M(γ) its mass on the
/// preimage of γ.
pub fn fiducial_pdf(count: &BinomialCount, pi: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Ok(0.0);
    }
    let p = Preimages::new(count);
    let (g0, g1) = p.cdf_pair(pi);
    // Same reflection as in the evidence: γ close to 1 has no resolution.
    if g0 > 0.5 && count.x < count.n {
        return fiducial_pdf(&count.reflected(), 1.0 - pi);
    }
    let inv_mass = |g: f64| {
        let (lo, hi) = p.at(g);
        (-p.base.ln_interval(lo, hi)).exp()
    };
    // The nested inversions are good to about 1e-12, so ask for less. Near
    // the ends b(π) is vanishingly small and only the product must be
    // accurate, which the absolute tolerance expresses.
    let b = p.base.pdf(pi);
    if b == 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec { abs_tol: 1e-13 / b, ..QuadratureSpec::relative(1e-8) };
    Ok(b * integrate(inv_mass, g0, g1, &spec)?)
}

fn check_in_unit(hyp: &IntervalHypothesis) -> Result<()> {
    if hyp.lo() < 0.0 || hyp.hi() > 1.0 {
        return Err(Error::invalid("hypothesis", format!("[{}, {}] is not inside [0, 1]", hyp.lo(), hyp.hi())));
    }
    Ok(())
}

/// Evidence under a flat weighting, without sampling.
///
/// The likelihood times the base Beta(x + 1, n − x + 1) density is a
/// multiple K of the Beta(2x + 1, 2n − 2x + 1) density c, so
///
/// ```text
/// m_R = K ∫ c(P(γ) ∩ R)/b(P(γ)) dγ / ∫ b(P(γ) ∩ R)/b(P(γ)) dγ
/// ```
///
/// where P(γ) is the preimage and b(·), c(·) are interval masses. A point
/// hypothesis {a} has m_in equal to the binomial probability at a.
pub fn flat_evidence(count: &BinomialCount, hyp: &IntervalHypothesis) -> Result<Evidence> {
    check_in_unit(hyp)?;
    // The γ cuts near 1 lose their absolute precision; the reflected
    // problem (n − x, 1 − π) moves them next to 0, where doubles are dense.
    let p = Preimages::new(count);
    let near_one = [&p.lower, &p.upper].into_iter().flatten().map(|d| d.sf(hyp.lo()).min(d.sf(hyp.hi()))).any(|g| g > 0.5);
    if near_one {
        let flipped = if hyp.is_sharp() {
            IntervalHypothesis::sharp(1.0 - hyp.lo(), hyp.prior_prob())?
        } else {
            IntervalHypothesis::new(1.0 - hyp.hi(), 1.0 - hyp.lo(), hyp.prior_prob())?
        };
        let r = count.reflected();
        let q = Preimages::new(&r);
        let again = [&q.lower, &q.upper].into_iter().flatten().map(|d| d.sf(flipped.lo()).min(d.sf(flipped.hi()))).any(|g| g > 0.5);
        if !again {
            return flat_evidence_oriented(&r, &flipped);
        }
    }
    flat_evidence_oriented(count, hyp)
}

fn flat_evidence_oriented(count: &BinomialCount, hyp: &IntervalHypothesis) -> Result<Evidence> {
    let (x, n) = (count.x as f64, count.n as f64);
    let p = Preimages::new(count);
    let c = BetaDist::new(2.0 * x + 1.0, 2.0 * n - 2.0 * x + 1.0);
    let table = LnChoose::new(count.n);
    let ln_k = table.get(count.x) + ln_beta(2.0 * x + 1.0, 2.0 * n - 2.0 * x + 1.0) - ln_beta(x + 1.0, n - x + 1.0);
    let (a, b) = (hyp.lo(), hyp.hi());

    // γ where a preimage endpoint crosses a or b; the integrands kink there.
    let mut cuts = vec![0.0, 1.0];
    for d in [&p.lower, &p.upper].into_iter().flatten() {
        for e in [a, b] {
            cuts.push(d.sf(e));
        }
    }
    cuts.retain(|g| (0.0..=1.0).contains(g));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let over_gamma = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        cuts.windows(2).map(|w| integrate(f, w[0], w[1], &oracle_spec())).sum()
    };
    let ratio = |d: &BetaDist, g: f64, clip: Option<(f64, f64)>| {
        let (lo, hi) = p.at(g);
        let (l, h) = match clip {
            Some((a, b)) => (lo.max(a), hi.min(b)),
            None => (lo, hi),
        };
        if !(l < h) {
            return 0.0;
        }
        (d.ln_interval(l, h) - p.base.ln_interval(lo, hi)).exp()
    };

    let c_total = over_gamma(&|g| ratio(&c, g, None))?;
    if hyp.is_sharp() {
        return Ok(Evidence { ln_m_in: table.ln_pmf(count.x, a), ln_m_out: ln_k + c_total.ln(), tau: None });
    }
    let a_in = over_gamma(&|g| ratio(&p.base, g, Some((a, b))))?;
    let c_in = over_gamma(&|g| ratio(&c, g, Some((a, b))))?;
    let ln_m_in = if a_in > 0.0 { ln_k + c_in.ln() - a_in.ln() } else { f64::NEG_INFINITY };
    let ln_m_out = if a_in < 1.0 { ln_k + (c_total - c_in).ln() - (1.0 - a_in).ln() } else { f64::NEG_INFINITY };
    Ok(Evidence { ln_m_in, ln_m_out, tau: None })
}

/// Post-data result with the draws behind it.
#[derive(Debug, Clone)]
pub struct BinomialAnalysis {
    pub result: PostDataResult,
    /// Fiducial draws of π.
    pub draws: Vec<f64>,
    /// Weight of each draw in the post-data mixture; sums to one.
    pub weights: Vec<f64>,
    /// Jumps of the mixture at the interval endpoints, for smoothed weightings.
    pub gaps: Option<EndpointGaps>,
}

/// Fraction of the interval width used for the one-sided endpoint bins.
const GAP_BIN_FRACTION: f64 = 1.0 / 20.0;

/// Post-data probability of `hyp` by importance weighting a fiducial
/// sample. The hypothesis must have positive width; [`flat_evidence`]
/// handles a point.
pub fn analyze(count: &BinomialCount, hyp: &IntervalHypothesis, gpd: &GpdSpec, mc: &McConfig) -> Result<PostDataResult> {
    analyze_detailed(count, hyp, gpd, mc).map(|a| a.result)
}

pub fn analyze_detailed(
    count: &BinomialCount,
    hyp: &IntervalHypothesis,
    gpd: &GpdSpec,
    mc: &McConfig,
) -> Result<BinomialAnalysis> {
    check_in_unit(hyp)?;
    mc.validate()?;
    gpd.validate()?;
    if hyp.is_sharp() {
        return Err(Error::invalid("hypothesis", "a sampled analysis needs an interval of positive width"));
    }
    let (lo, hi) = (hyp.lo(), hyp.hi());
    let pis = sample_fs_seeded(count, mc.samples, mc.seed, 0)?;
    let table = LnChoose::new(count.n);
    let draws: Vec<Draw> = pis
        .iter()
        .map(|&pi| {
            let inside = hyp.contains(pi);
            Draw {
                weight: 1.0,
                inside,
                bump: if inside { bump_at(gpd, pi) } else { 0.0 },
                ln_lik: table.ln_pmf(count.x, pi),
            }
        })
        .collect();
    let fit = importance_fit(&draws, hyp.prior_prob(), gpd)?;

    let split = |want: bool| -> (Vec<f64>, Vec<f64>) {
        draws
            .iter()
            .zip(&pis)
            .zip(&fit.component_weights)
            .filter(|((d, _), _)| d.inside == want)
            .map(|((_, &pi), &w)| (pi, w))
            .unzip()
    };
    let (vin, win) = split(true);
    let (vout, wout) = split(false);
    let hist_in = Histogram::over_ranges(&vin, &win, &[(lo, hi)], freedman_diaconis_width(&vin, &win))?;
    let hist_out = Histogram::over_ranges(&vout, &wout, &[(0.0, lo), (hi, 1.0)], freedman_diaconis_width(&vout, &wout))?;

    let gaps = matches!(gpd, GpdSpec::Smoothed { .. }).then(|| {
        let base = vec![1.0; pis.len()];
        endpoint_gaps(&pis, &base, &fit.mixture_weights, lo, hi, (hi - lo) * GAP_BIN_FRACTION)
    });
    Ok(BinomialAnalysis {
        result: PostDataResult {
            p_in: fit.p_in,
            p_out: 1.0 - fit.p_in,
            density_in: DensityHandle::Histogram(hist_in),
            density_out: DensityHandle::Histogram(hist_out),
            tau_used: fit.tau,
            mc_stderr: fit.mc_stderr,
            ess: Some(fit.ess),
        },
        draws: pis,
        weights: fit.mixture_weights,
        gaps,
    })
}
