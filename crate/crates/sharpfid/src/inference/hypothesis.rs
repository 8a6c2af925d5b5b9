use crate::error::{check_finite, check_positive, check_probability, Error, Result};
use crate::numerics::special::ln_beta;

/// An interval hypothesis θ ∈ [lo, hi] with its prior probability.
/// `lo == hi` is a sharp hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalHypothesis {
    lo: f64,
    hi: f64,
    prior_prob: f64,
}

impl IntervalHypothesis {
    pub fn new(lo: f64, hi: f64, prior_prob: f64) -> Result<Self> {
        check_probability("prior probability", prior_prob)?;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid("hypothesis interval", format!("[{lo}, {hi}]")));
        }
        Ok(IntervalHypothesis { lo, hi, prior_prob })
    }

    pub fn sharp(at: f64, prior_prob: f64) -> Result<Self> {
        check_finite("hypothesis point", at)?;
        IntervalHypothesis::new(at, at, prior_prob)
    }

    /// [centre − eps, centre + eps].
    pub fn symmetric(centre: f64, eps: f64, prior_prob: f64) -> Result<Self> {
        check_finite("interval centre", centre)?;
        if !(eps >= 0.0) || eps.is_infinite() {
            return Err(Error::invalid("eps", format!("{eps} is not a finite nonnegative number")));
        }
        IntervalHypothesis::new(centre - eps, centre + eps, prior_prob)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn prior_prob(&self) -> f64 {
        self.prior_prob
    }

    pub fn is_sharp(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn with_prior(self, prior_prob: f64) -> Result<Self> {
        IntervalHypothesis::new(self.lo, self.hi, prior_prob)
    }
}

/// The shape h in a smoothed weighting 1 + τh: a continuous unimodal
/// density on the hypothesis interval that vanishes at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BumpDensity {
    /// Beta(alpha, beta) rescaled from [0, 1] onto [lo, hi].
    BetaOnInterval { alpha: f64, beta: f64, lo: f64, hi: f64 },
    /// A ratio ρ whose logarithm is Beta(alpha, beta) rescaled onto
    /// [−ln(1+eps), ln(1+eps)], evaluated as a function of ρ without the
    /// change-of-variables factor 1/ρ. The smoothing constant absorbs any
    /// overall scale, and the omitted factor is within eps of 1 on the
    /// interval.
    LogScaleBetaOnRatio { alpha: f64, beta: f64, eps: f64 },
}

impl BumpDensity {
    /// The Beta(4, 4) bump used throughout the worked examples.
    pub fn default_on(lo: f64, hi: f64) -> Self {
        BumpDensity::BetaOnInterval { alpha: 4.0, beta: 4.0, lo, hi }
    }

    pub fn default_on_ratio(eps: f64) -> Self {
        BumpDensity::LogScaleBetaOnRatio { alpha: 4.0, beta: 4.0, eps }
    }

    pub fn validate(&self) -> Result<()> {
        let (alpha, beta) = self.shape();
        // Shapes above 1 make the density vanish at both ends.
        if !(alpha > 1.0 && beta > 1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::invalid(
                "bump shape",
                format!("Beta({alpha}, {beta}) must have both shapes finite and above 1"),
            ));
        }
        match *self {
            BumpDensity::BetaOnInterval { lo, hi, .. } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::invalid("bump interval", format!("[{lo}, {hi}]")));
                }
            }
            BumpDensity::LogScaleBetaOnRatio { eps, .. } => check_positive("bump eps", eps)?,
        }
        Ok(())
    }

    pub fn shape(&self) -> (f64, f64) {
        match *self {
            BumpDensity::BetaOnInterval { alpha, beta, .. }
            | BumpDensity::LogScaleBetaOnRatio { alpha, beta, .. } => (alpha, beta),
        }
    }

    /// The interval the bump lives on, in the coordinate it is evaluated at.
    pub fn interval(&self) -> (f64, f64) {
        match *self {
            BumpDensity::BetaOnInterval { lo, hi, .. } => (lo, hi),
            BumpDensity::LogScaleBetaOnRatio { eps, .. } => (1.0 / (1.0 + eps), 1.0 + eps),
        }
    }

    /// The largest value of h, at the mode of the beta shape.
    pub fn max_value(&self) -> f64 {
        let (alpha, beta) = self.shape();
        let mode = (alpha - 1.0) / (alpha + beta - 2.0);
        let x = match *self {
            BumpDensity::BetaOnInterval { lo, hi, .. } => lo + mode * (hi - lo),
            BumpDensity::LogScaleBetaOnRatio { eps, .. } => {
                let c = eps.ln_1p();
                (-c + 2.0 * mode * c).exp()
            }
        };
        self.eval(x)
    }

    /// h(x); zero outside the interval.
    pub fn eval(&self, x: f64) -> f64 {
        let (alpha, beta) = self.shape();
        let (u, width) = match *self {
            BumpDensity::BetaOnInterval { lo, hi, .. } => ((x - lo) / (hi - lo), hi - lo),
            BumpDensity::LogScaleBetaOnRatio { eps, .. } => {
                let c = eps.ln_1p();
                if !(x > 0.0) {
                    return 0.0;
                }
                ((x.ln() + c) / (2.0 * c), 2.0 * c)
            }
        };
        if !(u > 0.0 && u < 1.0) {
            return 0.0;
        }
        ((alpha - 1.0) * u.ln() + (beta - 1.0) * (-u).ln_1p() - ln_beta(alpha, beta)).exp() / width
    }
}

/// How the smoothing constant τ is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    /// Solve for continuity of the mixture at the interval endpoints.
    Continuity,
    Fixed(f64),
}

/// The global pre-data weighting applied to the inside component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GpdSpec {
    /// Constant weight: the plain conditioned fiducial density.
    #[default]
    Flat,
    /// Weight 1 + τh on the inside region.
    Smoothed { bump: BumpDensity, tau: Tau },
}

impl GpdSpec {
    /// Beta(4, 4) smoothing on [lo, hi] with τ chosen for continuity.
    pub fn smoothed_on(lo: f64, hi: f64) -> Self {
        GpdSpec::Smoothed { bump: BumpDensity::default_on(lo, hi), tau: Tau::Continuity }
    }

    pub fn validate(&self) -> Result<()> {
        if let GpdSpec::Smoothed { bump, tau } = self {
            bump.validate()?;
            if let Tau::Fixed(t) = tau {
                if !(*t >= 0.0) || t.is_infinite() {
                    return Err(Error::invalid("tau", format!("{t} is not a finite nonnegative number")));
                }
            }
        }
        Ok(())
    }

    /// The weight function with τ resolved; `None` means flat.
    pub(crate) fn resolved(&self) -> Result<Option<(BumpDensity, f64)>> {
        match *self {
            GpdSpec::Flat => Ok(None),
            GpdSpec::Smoothed { tau: Tau::Continuity, .. } => Err(Error::UnresolvedTau),
            GpdSpec::Smoothed { bump, tau: Tau::Fixed(t) } => Ok(Some((bump, t))),
        }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        match *self {
            GpdSpec::Flat => GpdSpec::Flat,
            GpdSpec::Smoothed { bump, .. } => GpdSpec::Smoothed { bump, tau: Tau::Fixed(tau) },
        }
    }

    pub fn bump(&self) -> Option<BumpDensity> {
        match *self {
            GpdSpec::Flat => None,
            GpdSpec::Smoothed { bump, .. } => Some(bump),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureSpec};
    use approx::assert_relative_eq;

    #[test]
    fn hypothesis_validation() {
        assert!(IntervalHypothesis::new(1.0, 0.0, 0.5).is_err());
        assert!(IntervalHypothesis::new(0.0, 1.0, 1.5).is_err());
        assert!(IntervalHypothesis::sharp(0.0, 0.5).unwrap().is_sharp());
        let h = IntervalHypothesis::symmetric(0.5, 0.01, 0.3).unwrap();
        assert!(h.contains(0.505) && !h.contains(0.52));
    }

    #[test]
    fn bump_integrates_to_one_and_vanishes_at_ends() {
        let b = BumpDensity::default_on(-0.2, 0.2);
        let total = integrate(|x| b.eval(x), -0.2, 0.2, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        assert_eq!(b.eval(-0.2), 0.0);
        assert_eq!(b.eval(0.2), 0.0);
        assert!(b.eval(0.0) > b.eval(0.1));
    }

    #[test]
    fn log_bump_is_symmetric_in_log_ratio() {
        let b = BumpDensity::default_on_ratio(0.045);
        for &r in &[1.01, 1.02, 1.04] {
            assert_relative_eq!(b.eval(r), b.eval(1.0 / r), max_relative = 1e-12);
        }
        let (lo, hi) = b.interval();
        assert!(b.eval(lo) < 1e-30 && b.eval(hi) < 1e-30);
    }

    #[test]
    fn unresolved_tau() {
        assert_eq!(GpdSpec::smoothed_on(-1.0, 1.0).resolved(), Err(Error::UnresolvedTau));
        assert_eq!(GpdSpec::Flat.resolved(), Ok(None));
    }
}
