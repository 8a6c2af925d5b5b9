//! Post-data probabilities from a fixed fiducial sample.
//!
//! Every draw is classified inside or outside the hypothesis region. The
//! evidence of each region is the self-normalized mean of the likelihood
//! over the draws in it, weighted by 1 + τh inside. All τ-dependent sums
//! are taken once, so the continuity equation is solved on the same draws
//! that produce the final estimates.

use crate::error::{Error, Result};
use crate::inference::{post_data_probability_ln, BumpDensity, GpdSpec, Tau};
use crate::numerics::stats::ess_of;
use crate::numerics::{solve_tau, AffineTauModel};

/// Number of contiguous batches for the batch-means standard error.
pub(crate) const BATCHES: usize = 20;

/// One fiducial draw as the engine sees it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Draw {
    pub weight: f64,
    pub inside: bool,
    /// h at the draw (zero outside).
    pub bump: f64,
    pub ln_lik: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    w_in: f64,
    w_out: f64,
    h_in: f64,
    l_in: f64,
    hl_in: f64,
    l_out: f64,
}

impl Sums {
    fn add(&mut self, d: &Draw, shift: f64) {
        let l = (d.ln_lik - shift).exp();
        if d.inside {
            self.w_in += d.weight;
            self.h_in += d.weight * d.bump;
            self.l_in += d.weight * l;
            self.hl_in += d.weight * d.bump * l;
        } else {
            self.w_out += d.weight;
            self.l_out += d.weight * l;
        }
    }

    fn model(&self, prior: f64, shift: f64) -> AffineTauModel {
        let w = self.w_in + self.w_out;
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        AffineTauModel {
            prior,
            ln_mass_in0: (self.w_in / w).ln(),
            r_mass: ratio(self.h_in, self.w_in),
            ln_evidence_in0: (self.l_in / self.w_in).ln() + shift,
            r_evidence: ratio(self.hl_in, self.l_in),
            ln_mass_out: (self.w_out / w).ln(),
            ln_evidence_out: (self.l_out / self.w_out).ln() + shift,
        }
    }
}

/// Result of weighting a fiducial sample.
#[derive(Debug, Clone)]
pub(crate) struct ImportanceFit {
    pub p_in: f64,
    pub tau: Option<f64>,
    /// Weight of each draw in the post-data mixture; sums to one.
    pub mixture_weights: Vec<f64>,
    /// Component weights before mixing: (1 + τh)·w inside, w outside.
    pub component_weights: Vec<f64>,
    pub mc_stderr: Option<f64>,
    /// Effective sample size of the scarcer component.
    pub ess: f64,
}

fn p_in_for(model: &AffineTauModel, tau: f64) -> Result<f64> {
    let ln_m_in = model.ln_evidence_in0 + (tau * model.r_evidence).ln_1p() - (tau * model.r_mass).ln_1p();
    post_data_probability_ln(model.prior, ln_m_in, model.ln_evidence_out)
}

pub(crate) fn importance_fit(draws: &[Draw], prior: f64, gpd: &GpdSpec) -> Result<ImportanceFit> {
    gpd.validate()?;
    if draws.is_empty() {
        return Err(Error::EmptySample);
    }
    let shift = draws.iter().map(|d| d.ln_lik).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(Error::IndeterminateEvidence);
    }
    let mut sums = Sums::default();
    for d in draws {
        sums.add(d, shift);
    }
    if !(sums.w_in > 0.0) {
        return Err(Error::ZeroMass(format!(
            "none of the {} fiducial draws fall inside the hypothesis; increase the sample size",
            draws.len()
        )));
    }
    if !(sums.w_out > 0.0) {
        return Err(Error::ZeroMass("every fiducial draw falls inside the hypothesis".into()));
    }
    let model = sums.model(prior, shift);
    let tau = match *gpd {
        GpdSpec::Flat => None,
        GpdSpec::Smoothed { tau: Tau::Fixed(t), .. } => Some(t),
        GpdSpec::Smoothed { tau: Tau::Continuity, .. } => Some(solve_tau(&model)?.tau),
    };
    let t = tau.unwrap_or(0.0);
    let p_in = p_in_for(&model, t)?;

    let z_in = sums.w_in + t * sums.h_in;
    let component_weights: Vec<f64> = draws
        .iter()
        .map(|d| if d.inside { d.weight * (1.0 + t * d.bump) } else { d.weight })
        .collect();
    let mixture_weights: Vec<f64> = draws
        .iter()
        .zip(&component_weights)
        .map(|(d, c)| if d.inside { p_in * c / z_in } else { (1.0 - p_in) * c / sums.w_out })
        .collect();
    let (cin, cout): (Vec<_>, Vec<_>) = draws.iter().zip(&component_weights).partition(|(d, _)| d.inside);
    let ess_in = ess_of(&cin.iter().map(|(_, c)| **c).collect::<Vec<_>>());
    let ess_out = ess_of(&cout.iter().map(|(_, c)| **c).collect::<Vec<_>>());

    let mc_stderr = batch_stderr(draws, prior, t, shift);
    Ok(ImportanceFit {
        p_in,
        tau,
        mixture_weights,
        component_weights,
        mc_stderr,
        ess: ess_in.min(ess_out),
    })
}

/// Batch-means standard error of p_in with τ held at its full-sample value.
fn batch_stderr(draws: &[Draw], prior: f64, tau: f64, shift: f64) -> Option<f64> {
    if draws.len() < BATCHES * 2 {
        return None;
    }
    let size = draws.len() / BATCHES;
    let mut ps = Vec::with_capacity(BATCHES);
    for k in 0..BATCHES {
        let end = if k + 1 == BATCHES { draws.len() } else { (k + 1) * size };
        let mut s = Sums::default();
        for d in &draws[k * size..end] {
            s.add(d, shift);
        }
        if !(s.w_in > 0.0 && s.w_out > 0.0 && s.l_in > 0.0) {
            return None;
        }
        ps.push(p_in_for(&s.model(prior, shift), tau).ok()?);
    }
    let m = ps.iter().sum::<f64>() / BATCHES as f64;
    let var = ps.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / (BATCHES as f64 - 1.0);
    Some((var / BATCHES as f64).sqrt())
}

/// Relative jumps of an estimated mixture density at the two endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointGaps {
    /// |inside − outside| / max, from raw one-sided histogram bins.
    pub raw: (f64, f64),
    /// The same comparison after dividing each bin's mixture weight by its
    /// fiducial weight, which removes the slope of the fiducial density
    /// across the two bins and most of their shared sampling noise.
    pub base_normalized: (f64, f64),
}

impl EndpointGaps {
    pub fn max_raw(&self) -> f64 {
        self.raw.0.max(self.raw.1)
    }

    pub fn max_base_normalized(&self) -> f64 {
        self.base_normalized.0.max(self.base_normalized.1)
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m > 0.0 {
        (a - b).abs() / m
    } else {
        0.0
    }
}

/// One-sided bins of `width` on each side of `lo` and `hi`.
pub(crate) fn endpoint_gaps(
    coords: &[f64],
    base_weights: &[f64],
    mixture_weights: &[f64],
    lo: f64,
    hi: f64,
    width: f64,
) -> EndpointGaps {
    // [outside-left of lo, inside-right of lo, inside-left of hi, outside-right of hi]
    let bins = [(lo - width, lo), (lo, lo + width), (hi - width, hi), (hi, hi + width)];
    let mut mix = [0.0; 4];
    let mut base = [0.0; 4];
    for ((&x, &b), &m) in coords.iter().zip(base_weights).zip(mixture_weights) {
        for (k, &(a, c)) in bins.iter().enumerate() {
            let hit = if k == 0 || k == 2 { a <= x && x < c } else { a < x && x <= c };
            if hit {
                mix[k] += m;
                base[k] += b;
            }
        }
    }
    let ratio = |k: usize| if base[k] > 0.0 { mix[k] / base[k] } else { 0.0 };
    EndpointGaps {
        raw: (rel_gap(mix[0], mix[1]), rel_gap(mix[2], mix[3])),
        base_normalized: (rel_gap(ratio(0), ratio(1)), rel_gap(ratio(2), ratio(3))),
    }
}

/// h at a coordinate, or zero under a flat weighting.
pub(crate) fn bump_at(gpd: &GpdSpec, x: f64) -> f64 {
    gpd.bump().map_or(0.0, |b: BumpDensity| b.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(n: usize) -> Vec<Draw> {
        (0..n)
            .map(|i| {
                // Low-discrepancy order so every batch sees both regions.
                let x = (i as f64 * 0.618_033_988_749_895).fract();
                let inside = (0.4..=0.6).contains(&x);
                let h = if inside { 6.0 * (x - 0.4) * (0.6 - x) / 0.008 } else { 0.0 };
                Draw { weight: 1.0, inside, bump: h, ln_lik: -((x - 0.45) * (x - 0.45)) * 10.0 }
            })
            .collect()
    }

    #[test]
    fn weights_sum_to_one_and_split_by_p_in() {
        let d = draws(10_000);
        let f = importance_fit(&d, 0.3, &GpdSpec::Flat).unwrap();
        let total: f64 = f.mixture_weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let inside: f64 = f.mixture_weights.iter().zip(&d).filter(|(_, d)| d.inside).map(|(w, _)| w).sum();
        assert!((inside - f.p_in).abs() < 1e-12);
        assert!(f.mc_stderr.is_some());
    }

    #[test]
    fn zero_prior_gives_zero() {
        let f = importance_fit(&draws(1000), 0.0, &GpdSpec::Flat).unwrap();
        assert_eq!(f.p_in, 0.0);
    }

    #[test]
    fn no_inside_draws_is_zero_mass() {
        let mut d = draws(100);
        for x in &mut d {
            x.inside = false;
        }
        assert!(matches!(importance_fit(&d, 0.3, &GpdSpec::Flat), Err(Error::ZeroMass(_))));
    }

    #[test]
    fn gap_estimators_see_a_jump() {
        let coords: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let base = vec![1.0; coords.len()];
        let mix: Vec<f64> = coords.iter().map(|x| if (0.4..=0.6).contains(x) { 2.0 } else { 1.0 }).collect();
        let g = endpoint_gaps(&coords, &base, &mix, 0.4, 0.6, 0.02);
        assert!((g.raw.0 - 0.5).abs() < 0.02 && (g.base_normalized.1 - 0.5).abs() < 1e-12);
    }
}
