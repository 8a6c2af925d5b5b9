//! Normal mean and standard deviation both unknown, handled directly from
//! the joint fiducial density of (μ, σ).
//!
//! Averaging the full-data likelihood over σ given μ leaves a multiple of
//! the t_{n−1}(x̄, s/√n) density in μ, which is also the μ-marginal of the
//! joint fiducial. So the evidence for an interval on μ is the same
//! matched-kernel computation as with a known variance, on a t base. A
//! smoothed weighting is applied to that marginal, with τ chosen for its
//! continuity.

use crate::engine::matched::{matched_analyze, matched_fit};
use crate::error::{check_finite, check_positive, Error, Result};
use crate::inference::{
    ContinuousDensity, DensityHandle, Evidence, GpdSpec, IntervalHypothesis, PostDataResult,
};
use crate::numerics::dist::{InverseGamma, Normal, StudentT, Univariate};
use crate::numerics::rng::uniform_open;
use crate::numerics::special::gamma_q;
use crate::numerics::{integrate, QuadratureSpec};
use rand::RngCore;

/// Sample size, mean and standard deviation (divisor n − 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSummary {
    n: u64,
    xbar: f64,
    s: f64,
}

impl NormalSummary {
    pub fn new(n: u64, xbar: f64, s: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "need at least two observations"));
        }
        check_finite("xbar", xbar)?;
        check_positive("s", s)?;
        Ok(NormalSummary { n, xbar, s })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn xbar(&self) -> f64 {
        self.xbar
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// s/√n.
    pub fn standard_error(&self) -> f64 {
        self.s / (self.n as f64).sqrt()
    }

    /// ((n − 1)s² + n(x̄ − μ)²)/n, the mean squared deviation about μ.
    pub fn sigma_hat2(&self, mu: f64) -> f64 {
        let n = self.n as f64;
        ((n - 1.0) * self.s * self.s + n * (self.xbar - mu).powi(2)) / n
    }

    /// σ² given μ: Inv-Gamma(n/2, n·σ̂²(μ)/2).
    pub fn sigma2_given_mu(&self, mu: f64) -> InverseGamma {
        let n = self.n as f64;
        InverseGamma::new(0.5 * n, 0.5 * n * self.sigma_hat2(mu))
    }

    /// μ given σ: N(x̄, σ²/n).
    pub fn mu_given_sigma(&self, sigma: f64) -> Normal {
        Normal::new(self.xbar, sigma / (self.n as f64).sqrt())
    }
}

/// Density of σ when σ² has the given inverse gamma distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaFromVariance(pub InverseGamma);

impl ContinuousDensity for SigmaFromVariance {
    fn pdf(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        2.0 * sigma * self.0.pdf(sigma * sigma)
    }

    fn cdf(&self, sigma: f64) -> f64 {
        self.0.cdf(sigma.max(0.0).powi(2))
    }

    fn support(&self) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY)]
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.0.sample(rng).sqrt()
    }
}

/// The joint fiducial density f_S(μ, σ | x): σ² ~ Inv-Gamma((n − 1)/2,
/// (n − 1)s²/2) and μ | σ ~ N(x̄, σ²/n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointFiducialNormal {
    summary: NormalSummary,
}

pub fn joint_fs(s: &NormalSummary) -> JointFiducialNormal {
    JointFiducialNormal { summary: *s }
}

impl JointFiducialNormal {
    pub fn summary(&self) -> &NormalSummary {
        &self.summary
    }

    /// μ-marginal t_{n−1}(x̄, s/√n).
    pub fn mu_marginal(&self) -> StudentT {
        let s = &self.summary;
        StudentT::new(s.xbar, s.standard_error(), s.n as f64 - 1.0)
    }

    pub fn sigma2_marginal(&self) -> InverseGamma {
        let s = &self.summary;
        let m = s.n as f64 - 1.0;
        InverseGamma::new(0.5 * m, 0.5 * m * s.s * s.s)
    }

    pub fn sigma_marginal(&self) -> SigmaFromVariance {
        SigmaFromVariance(self.sigma2_marginal())
    }

    /// Log density with respect to (μ, σ).
    pub fn ln_pdf(&self, mu: f64, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let v = sigma * sigma;
        self.sigma2_marginal().ln_pdf(v) + (2.0 * sigma).ln() + self.summary.mu_given_sigma(sigma).ln_pdf(mu)
    }

    pub fn pdf(&self, mu: f64, sigma: f64) -> f64 {
        self.ln_pdf(mu, sigma).exp()
    }

    /// One draw of (μ, σ).
    pub fn sample(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        let sigma = self.sigma2_marginal().sample(rng).sqrt();
        let mu = self.summary.mu_given_sigma(sigma).quantile(uniform_open(rng));
        (mu, sigma)
    }
}

/// Where the smoothing constant τ is applied when σ is unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothingLevel {
    /// Inside each conditional density of μ given σ, sampled by Gibbs.
    Conditional,
    /// Once, on the marginal density of μ.
    #[default]
    Marginal,
}

pub fn predictive_evidence(s: &NormalSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<Evidence> {
    let fit = matched_fit(&joint_fs(s).mu_marginal(), hyp, gpd)?;
    Ok(Evidence { ln_m_in: fit.ln_m_in, ln_m_out: fit.ln_m_out, tau: fit.tau })
}

/// Post-data probability of an interval (or point) hypothesis on μ and the
/// two conditioned μ-marginals. A smoothed weighting acts on the marginal.
pub fn post_prob_direct(s: &NormalSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<PostDataResult> {
    matched_analyze(&joint_fs(s).mu_marginal(), hyp, gpd)
}

/// p̃(μ | x), atom included for a point hypothesis.
pub fn marginal_post_density(s: &NormalSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<DensityHandle> {
    post_prob_direct(s, hyp, gpd)?.mixture()
}

/// p̃(μ, σ | x) = p̃(μ | x)·f_S(σ | μ, x).
#[derive(Debug, Clone)]
pub struct JointPostDensity {
    summary: NormalSummary,
    mu: DensityHandle,
}

pub fn joint_post_density(s: &NormalSummary, hyp: &IntervalHypothesis, gpd: &GpdSpec) -> Result<JointPostDensity> {
    Ok(JointPostDensity { summary: *s, mu: marginal_post_density(s, hyp, gpd)? })
}

impl JointPostDensity {
    pub fn mu_marginal(&self) -> &DensityHandle {
        &self.mu
    }

    /// f_S(σ | μ, x).
    pub fn sigma_given_mu(&self, mu: f64) -> SigmaFromVariance {
        SigmaFromVariance(self.summary.sigma2_given_mu(mu))
    }

    /// Joint density of the continuous part; the slice through an atom of
    /// the μ-marginal is `atom mass × sigma_given_mu(atom)`.
    pub fn pdf(&self, mu: f64, sigma: f64) -> f64 {
        self.mu.pdf(mu) * self.sigma_given_mu(mu).pdf(sigma)
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        let mu = self.mu.sample(rng);
        (mu, self.sigma_given_mu(mu).sample(rng))
    }

    /// The σ-marginal ∫ p̃(μ | x) f_S(σ | μ, x) dμ, by quadrature.
    pub fn sigma_marginal(&self) -> SigmaMarginal {
        SigmaMarginal { joint: self.clone() }
    }
}

/// σ-marginal of a [`JointPostDensity`].
#[derive(Debug, Clone)]
pub struct SigmaMarginal {
    joint: JointPostDensity,
}

impl SigmaMarginal {
    /// ∫ p̃(μ) g(μ) dμ over the continuous part plus the atom term.
    fn average(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mu = &self.joint.mu;
        let mut cuts: Vec<f64> = mu.support().iter().flat_map(|&(a, b)| [a, b]).filter(|v| v.is_finite()).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(cuts);
        edges.push(f64::INFINITY);
        let spec = QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-9, ..Default::default() };
        let mut total: f64 = edges
            .windows(2)
            .map(|w| integrate(|m| mu.pdf(m) * g(m), w[0], w[1], &spec).unwrap_or(f64::NAN))
            .sum();
        if let Some((a, mass)) = mu.atom() {
            total += mass * g(a);
        }
        total
    }
}

impl ContinuousDensity for SigmaMarginal {
    fn pdf(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        self.average(|m| self.joint.sigma_given_mu(m).pdf(sigma))
    }

    fn cdf(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        let n = self.joint.summary.n as f64;
        let v = sigma * sigma;
        self.average(|m| gamma_q(0.5 * n, 0.5 * n * self.joint.summary.sigma_hat2(m) / v))
    }

    fn support(&self) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY)]
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.joint.sample(rng).1
    }
}
