//! The smoothing-constant solver.
//!
//! With an inside component proportional to (1 + τh)·f and h vanishing at
//! both interval endpoints, the mixture density is continuous at the
//! endpoints exactly when
//!
//! ```text
//! P_in(τ) / Z_in(τ) = P_out / Z_out
//! ```
//!
//! where Z are the base masses of the two regions. The solver works with
//! the log of the ratio of the two sides, which has the same root.

use crate::error::{Error, Result};

/// Largest τ tried before giving up.
pub const TAU_MAX: f64 = 1e8;
const REL_TOL: f64 = 1e-10;

/// Everything the continuity equation needs, on the log scale.
pub trait TauModel {
    fn prior(&self) -> f64;
    /// ln Z_in(τ) = ln ∫_in (1 + τh) f.
    fn ln_mass_in(&self, tau: f64) -> f64;
    fn ln_mass_out(&self) -> f64;
    /// ln of the predictive evidence under the τ-weighted inside component.
    fn ln_evidence_in(&self, tau: f64) -> f64;
    fn ln_evidence_out(&self) -> f64;
}

/// ln(P_in/Z_in) − ln(P_out/Z_out). Positive means the inside side of the
/// mixture is too high at the endpoints.
pub fn continuity_gap<M: TauModel + ?Sized>(model: &M, tau: f64) -> f64 {
    let p0 = model.prior();
    let logit = p0.ln() - (-p0).ln_1p();
    logit + model.ln_evidence_in(tau) - model.ln_evidence_out() - model.ln_mass_in(tau)
        + model.ln_mass_out()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauSolveReport {
    pub tau: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Finds τ ≥ 0 making the mixture continuous at the interval endpoints.
///
/// The bracket starts at [0, 1] and its upper end doubles until the gap
/// changes sign or [`TAU_MAX`] is passed. A degenerate prior (0 or 1) leaves
/// only one component, so τ = 0 is returned without solving.
pub fn solve_tau<M: TauModel + ?Sized>(model: &M) -> Result<TauSolveReport> {
    let p0 = model.prior();
    if p0 <= 0.0 || p0 >= 1.0 {
        return Ok(TauSolveReport { tau: 0.0, residual: 0.0, iterations: 0, bracket: (0.0, 0.0) });
    }
    let g0 = continuity_gap(model, 0.0);
    if g0.is_nan() {
        return Err(Error::NoRoot { g_zero: g0, g_max: f64::NAN, tau_max: TAU_MAX });
    }
    if g0 == 0.0 {
        return Ok(TauSolveReport { tau: 0.0, residual: 0.0, iterations: 0, bracket: (0.0, 0.0) });
    }
    if g0 < 0.0 {
        return Err(Error::NoRoot {
            g_zero: g0,
            g_max: continuity_gap(model, TAU_MAX),
            tau_max: TAU_MAX,
        });
    }
    let mut iterations = 0;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut g_hi = continuity_gap(model, hi);
    while g_hi > 0.0 {
        iterations += 1;
        if hi >= TAU_MAX {
            return Err(Error::NoRoot { g_zero: g0, g_max: g_hi, tau_max: TAU_MAX });
        }
        lo = hi;
        hi = (2.0 * hi).min(TAU_MAX);
        g_hi = continuity_gap(model, hi);
    }
    if g_hi.is_nan() {
        return Err(Error::NoRoot { g_zero: g0, g_max: g_hi, tau_max: TAU_MAX });
    }
    let bracket = (lo, hi);
    let mut best = (hi, g_hi);
    while hi - lo > REL_TOL * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = continuity_gap(model, mid);
        if g.abs() < best.1.abs() {
            best = (mid, g);
        }
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = if best.1 == 0.0 { best.0 } else { 0.5 * (lo + hi) };
    Ok(TauSolveReport {
        tau,
        residual: continuity_gap(model, tau),
        iterations,
        bracket,
    })
}

/// A model whose τ dependence is affine in both the inside mass and the
/// inside evidence integral:
///
/// ```text
/// Z_in(τ) = Z_in(0)·(1 + τ·r_mass)
/// m_in(τ) = m_in(0)·(1 + τ·r_evidence) / (1 + τ·r_mass)
/// ```
///
/// with r_mass = ∫h f / ∫f and r_evidence = ∫h L f / ∫L f over the inside
/// region. Every model in this crate has this shape, whether the integrals
/// come from quadrature or from a fixed Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTauModel {
    pub prior: f64,
    pub ln_mass_in0: f64,
    pub r_mass: f64,
    pub ln_evidence_in0: f64,
    pub r_evidence: f64,
    pub ln_mass_out: f64,
    pub ln_evidence_out: f64,
}

impl TauModel for AffineTauModel {
    fn prior(&self) -> f64 {
        self.prior
    }
    fn ln_mass_in(&self, tau: f64) -> f64 {
        self.ln_mass_in0 + (tau * self.r_mass).ln_1p()
    }
    fn ln_mass_out(&self) -> f64 {
        self.ln_mass_out
    }
    fn ln_evidence_in(&self, tau: f64) -> f64 {
        self.ln_evidence_in0 + (tau * self.r_evidence).ln_1p() - (tau * self.r_mass).ln_1p()
    }
    fn ln_evidence_out(&self) -> f64 {
        self.ln_evidence_out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(gap0: f64) -> AffineTauModel {
        AffineTauModel {
            prior: 0.5,
            ln_mass_in0: -gap0,
            r_mass: 2.0,
            ln_evidence_in0: 0.0,
            r_evidence: 2.1,
            ln_mass_out: 0.0,
            ln_evidence_out: 0.0,
        }
    }

    #[test]
    fn already_continuous_gives_zero() {
        let r = solve_tau(&model(0.0)).unwrap();
        assert_eq!(r.tau, 0.0);
    }

    #[test]
    fn root_has_small_residual() {
        let m = model(1.5);
        let r = solve_tau(&m).unwrap();
        assert!(r.tau > 0.0);
        assert!(r.residual.abs() < 1e-8, "{r:?}");
        assert!(r.bracket.0 <= r.tau && r.tau <= r.bracket.1);
    }

    #[test]
    fn negative_gap_is_no_root() {
        match solve_tau(&model(-0.3)) {
            Err(Error::NoRoot { g_zero, .. }) => assert!(g_zero < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unreachable_gap_is_no_root() {
        // A weak bump cannot pull a large gap back within the bracket.
        let m = AffineTauModel { r_mass: 1e-6, r_evidence: 1e-6, ..model(10.0) };
        assert!(matches!(solve_tau(&m), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn degenerate_prior_skips_solve() {
        let m = AffineTauModel { prior: 1.0, ..model(1.0) };
        assert_eq!(solve_tau(&m).unwrap().tau, 0.0);
    }
}
