//! Density representations shared by every model backend.

use super::hypothesis::BumpDensity;
use crate::error::{Error, Result};
use crate::numerics::dist::Univariate;
use crate::numerics::rng::uniform_open;
use crate::numerics::sampling::{ln_region_mass, truncated_draw, Region, MIN_REGION_MASS};
use crate::numerics::stats::Histogram;
use crate::numerics::{integrate, QuadratureSpec};
use rand::RngCore;
use std::fmt;
use std::sync::Arc;

/// A normalized density with no atoms.
pub trait ContinuousDensity: Send + Sync + fmt::Debug {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    /// Disjoint closed intervals, in increasing order, outside of which the
    /// density is zero.
    fn support(&self) -> Vec<(f64, f64)>;
    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    fn mass_between(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }
}

/// A post-data density in one of its concrete forms.
#[derive(Debug, Clone)]
pub enum DensityHandle {
    /// Unit point mass.
    Atom(f64),
    Continuous(Arc<dyn ContinuousDensity>),
    Histogram(Histogram),
    Mixture(Arc<Mixture>),
}

impl DensityHandle {
    pub fn continuous(d: impl ContinuousDensity + 'static) -> Self {
        DensityHandle::Continuous(Arc::new(d))
    }

    /// Density of the continuous part. Atoms contribute nothing here; see
    /// [`DensityHandle::atom`].
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            DensityHandle::Atom(_) => 0.0,
            DensityHandle::Continuous(d) => d.pdf(x),
            DensityHandle::Histogram(h) => h.pdf(x),
            DensityHandle::Mixture(m) => m.parts.iter().map(|(w, d)| w * d.pdf(x)).sum(),
        }
    }

    /// P(X ≤ x), atoms included.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DensityHandle::Atom(c) => {
                if x >= *c {
                    1.0
                } else {
                    0.0
                }
            }
            DensityHandle::Continuous(d) => d.cdf(x),
            DensityHandle::Histogram(h) => h.cdf(x),
            DensityHandle::Mixture(m) => m.parts.iter().map(|(w, d)| w * d.cdf(x)).sum(),
        }
    }

    /// P(a ≤ X ≤ b), atoms included.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if !(a <= b) {
            return 0.0;
        }
        match self {
            DensityHandle::Atom(c) => {
                if a <= *c && *c <= b {
                    1.0
                } else {
                    0.0
                }
            }
            DensityHandle::Continuous(d) => d.mass_between(a, b),
            DensityHandle::Histogram(h) => (h.cdf(b) - h.cdf(a)).max(0.0),
            DensityHandle::Mixture(m) => m.parts.iter().map(|(w, d)| w * d.mass_between(a, b)).sum(),
        }
    }

    /// Location and mass of the point mass, if there is one.
    pub fn atom(&self) -> Option<(f64, f64)> {
        match self {
            DensityHandle::Atom(c) => Some((*c, 1.0)),
            DensityHandle::Mixture(m) => {
                let mut found: Option<(f64, f64)> = None;
                for (w, d) in &m.parts {
                    if let Some((c, mass)) = d.atom() {
                        let add = w * mass;
                        if add > 0.0 {
                            found = Some(match found {
                                Some((c0, m0)) if c0 == c => (c, m0 + add),
                                Some(prev) => prev,
                                None => (c, add),
                            });
                        }
                    }
                }
                found
            }
            _ => None,
        }
    }

    pub fn support(&self) -> Vec<(f64, f64)> {
        match self {
            DensityHandle::Atom(c) => vec![(*c, *c)],
            DensityHandle::Continuous(d) => d.support(),
            DensityHandle::Histogram(h) => h.support(),
            DensityHandle::Mixture(m) => {
                let mut all: Vec<(f64, f64)> = m
                    .parts
                    .iter()
                    .filter(|(w, _)| *w > 0.0)
                    .flat_map(|(_, d)| d.support())
                    .collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut out: Vec<(f64, f64)> = Vec::new();
                for (a, b) in all {
                    match out.last_mut() {
                        Some(last) if a <= last.1 => last.1 = last.1.max(b),
                        _ => out.push((a, b)),
                    }
                }
                out
            }
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            DensityHandle::Atom(c) => *c,
            DensityHandle::Continuous(d) => d.sample(rng),
            DensityHandle::Histogram(h) => {
                let u = uniform_open(rng);
                let v = uniform_open(rng);
                h.draw(u, v)
            }
            DensityHandle::Mixture(m) => {
                let u = uniform_open(rng);
                m.component_for(u).sample(rng)
            }
        }
    }

    /// Left and right limits of the continuous part at `x`, probed at a
    /// relative offset.
    pub fn side_limits(&self, x: f64) -> (f64, f64) {
        let dx = 1e-9 * x.abs().max(1e-3);
        (self.pdf(x - dx), self.pdf(x + dx))
    }
}

/// A finite mixture with nonnegative weights summing to one.
#[derive(Debug, Clone)]
pub struct Mixture {
    parts: Vec<(f64, DensityHandle)>,
}

impl Mixture {
    pub fn new(parts: Vec<(f64, DensityHandle)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptySample);
        }
        if parts.iter().any(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("mixture weights", "weights must be finite and nonnegative"));
        }
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("mixture weights", format!("weights sum to {total}, not 1")));
        }
        Ok(Mixture { parts })
    }

    pub fn parts(&self) -> &[(f64, DensityHandle)] {
        &self.parts
    }

    fn component_for(&self, u: f64) -> &DensityHandle {
        let mut acc = 0.0;
        for (w, d) in &self.parts {
            acc += w;
            if u < acc && *w > 0.0 {
                return d;
            }
        }
        // Rounding left u past the last cumulative weight.
        &self.parts.iter().rev().find(|(w, _)| *w > 0.0).expect("positive weight").1
    }
}

// ---------------------------------------------------------------- closed forms

/// A univariate distribution used as a density as it stands.
#[derive(Debug, Clone)]
pub struct UnivariateDensity(pub Arc<dyn Univariate>);

impl ContinuousDensity for UnivariateDensity {
    fn pdf(&self, x: f64) -> f64 {
        self.0.pdf(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }

    fn support(&self) -> Vec<(f64, f64)> {
        vec![self.0.support()]
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.0.sample(rng)
    }

    fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.0.ln_interval(a, b).exp()
    }
}

// ---------------------------------------------------------------- truncation

/// A univariate distribution conditioned on a region.
#[derive(Debug, Clone)]
pub struct TruncatedDensity {
    base: Arc<dyn Univariate>,
    region: Region,
    ln_mass: f64,
}

impl TruncatedDensity {
    pub fn new(base: Arc<dyn Univariate>, region: Region) -> Result<Self> {
        let ln_mass = ln_region_mass(base.as_ref(), region);
        if !(ln_mass.exp() >= MIN_REGION_MASS) {
            return Err(Error::ZeroRegionMass { mass: ln_mass.exp() });
        }
        Ok(TruncatedDensity { base, region, ln_mass })
    }

    pub fn ln_mass(&self) -> f64 {
        self.ln_mass
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn base(&self) -> &Arc<dyn Univariate> {
        &self.base
    }
}

impl ContinuousDensity for TruncatedDensity {
    fn pdf(&self, x: f64) -> f64 {
        if self.region.contains(x) {
            (self.base.ln_pdf(x) - self.ln_mass).exp()
        } else {
            0.0
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let v = match self.region {
            Region::Inside(lo, hi) => {
                if x <= lo {
                    0.0
                } else if x >= hi {
                    1.0
                } else {
                    (self.base.ln_interval(lo, x) - self.ln_mass).exp()
                }
            }
            Region::Outside(lo, hi) => {
                if x <= lo {
                    (self.base.ln_cdf(x) - self.ln_mass).exp()
                } else if x < hi {
                    (self.base.ln_cdf(lo) - self.ln_mass).exp()
                } else {
                    1.0 - (self.base.ln_sf(x) - self.ln_mass).exp()
                }
            }
        };
        v.clamp(0.0, 1.0)
    }

    fn support(&self) -> Vec<(f64, f64)> {
        let (s0, s1) = self.base.support();
        let pieces = match self.region {
            Region::Inside(lo, hi) => vec![(lo.max(s0), hi.min(s1))],
            Region::Outside(lo, hi) => vec![(s0, lo.min(s1)), (hi.max(s0), s1)],
        };
        pieces.into_iter().filter(|(a, b)| a < b).collect()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let v = match self.region {
            Region::Inside(..) => 0.0,
            Region::Outside(..) => uniform_open(rng),
        };
        let u = uniform_open(rng);
        truncated_draw(self.base.as_ref(), self.region, u, v)
    }

    fn mass_between(&self, a: f64, b: f64) -> f64 {
        if let Region::Inside(lo, hi) = self.region {
            let (a, b) = (a.max(lo), b.min(hi));
            if a >= b {
                return 0.0;
            }
            return (self.base.ln_interval(a, b) - self.ln_mass).exp().min(1.0);
        }
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }
}

// ---------------------------------------------------------------- tilting

const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

/// Ten-point Gauss–Legendre rule on [a, b].
fn gauss10(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for i in 0..5 {
        s += GL_W[i] * (f(c - h * GL_X[i]) + f(c + h * GL_X[i]));
    }
    s * h
}

/// A distribution restricted to [lo, hi] and reweighted by 1 + τh:
///
/// ```text
/// f(x) ∝ (1 + τ h(x)) · base(x),   lo ≤ x ≤ hi
/// ```
///
/// All internal integrals are scaled by the base density at the point of
/// [lo, hi] closest to the base median, so far-tail intervals do not
/// underflow. The CDF of the h-weighted part is tabulated on Gauss–Legendre
/// panels, refined until it agrees with adaptive quadrature.
#[derive(Debug, Clone)]
pub struct TiltedDensity {
    base: Arc<dyn Univariate>,
    lo: f64,
    hi: f64,
    bump: BumpDensity,
    tau: f64,
    ln_anchor: f64,
    edges: Vec<f64>,
    /// Scaled ∫_lo^edge base and ∫_lo^edge h·base at each edge.
    cum_base: Vec<f64>,
    cum_bump: Vec<f64>,
    total: f64,
}

impl TiltedDensity {
    pub fn new(base: Arc<dyn Univariate>, lo: f64, hi: f64, bump: BumpDensity, tau: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("tilted interval", format!("[{lo}, {hi}]")));
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::invalid("tau", format!("{tau}")));
        }
        let ln_mass = base.ln_interval(lo, hi);
        if !(ln_mass.exp() >= MIN_REGION_MASS) {
            return Err(Error::ZeroRegionMass { mass: ln_mass.exp() });
        }
        let anchor = base.median().clamp(lo, hi);
        let ln_anchor = base.ln_pdf(anchor);
        let hb = |x: f64| bump.eval(x) * (base.ln_pdf(x) - ln_anchor).exp();
        let reference = integrate(hb, lo, hi, &QuadratureSpec::relative(1e-12))?;
        let mut panels = 16usize;
        let (edges, cum_bump) = loop {
            let edges: Vec<f64> = (0..=panels)
                .map(|i| if i == panels { hi } else { lo + (hi - lo) * i as f64 / panels as f64 })
                .collect();
            let mut cum = Vec::with_capacity(panels + 1);
            cum.push(0.0);
            for w in edges.windows(2) {
                let last = *cum.last().unwrap();
                cum.push(last + gauss10(&hb, w[0], w[1]));
            }
            let got = cum[panels];
            if (got - reference).abs() <= 1e-10 * reference.abs() || panels >= 4096 {
                break (edges, cum);
            }
            panels *= 2;
        };
        let cum_base: Vec<f64> = edges
            .iter()
            .map(|&e| if e <= lo { 0.0 } else { (base.ln_interval(lo, e) - ln_anchor).exp() })
            .collect();
        let total = cum_base[panels] + tau * cum_bump[panels];
        Ok(TiltedDensity { base, lo, hi, bump, tau, ln_anchor, edges, cum_base, cum_bump, total })
    }

    /// ln ∫ (1 + τh)·base over [lo, hi].
    pub fn ln_mass(&self) -> f64 {
        self.total.ln() + self.ln_anchor
    }

    /// ∫h·base / ∫base over [lo, hi].
    pub fn bump_ratio(&self) -> f64 {
        let n = self.edges.len() - 1;
        self.cum_bump[n] / self.cum_base[n]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn scaled_pdf(&self, x: f64) -> f64 {
        (1.0 + self.tau * self.bump.eval(x)) * (self.base.ln_pdf(x) - self.ln_anchor).exp()
    }

    /// Unnormalized scaled CDF.
    fn scaled_cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return self.total;
        }
        let k = (self.edges.partition_point(|&e| e <= x) - 1).min(self.edges.len() - 2);
        let base_part = (self.base.ln_interval(self.lo, x) - self.ln_anchor).exp();
        let hb = |t: f64| self.bump.eval(t) * (self.base.ln_pdf(t) - self.ln_anchor).exp();
        let bump_part = self.cum_bump[k] + gauss10(&hb, self.edges[k], x);
        base_part + self.tau * bump_part
    }

    /// Inverse CDF at `u`.
    pub fn draw(&self, u: f64) -> f64 {
        let target = u * self.total;
        let cum = |k: usize| self.cum_base[k] + self.tau * self.cum_bump[k];
        let n = self.edges.len() - 1;
        // Panel holding the target.
        let (mut a, mut b) = (0usize, n);
        while b - a > 1 {
            let m = (a + b) / 2;
            if cum(m) <= target {
                a = m;
            } else {
                b = m;
            }
        }
        let (mut lo, mut hi) = (self.edges[a], self.edges[b]);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let h = self.scaled_cdf(x) - target;
            if h > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.scaled_pdf(x);
            let mut next = if d > 0.0 { x - h / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
                || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs())
            {
                return next.clamp(self.lo, self.hi);
            }
            x = next;
        }
        x.clamp(self.lo, self.hi)
    }
}

impl ContinuousDensity for TiltedDensity {
    fn pdf(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        self.scaled_pdf(x) / self.total
    }

    fn cdf(&self, x: f64) -> f64 {
        (self.scaled_cdf(x) / self.total).clamp(0.0, 1.0)
    }

    fn support(&self) -> Vec<(f64, f64)> {
        vec![(self.lo, self.hi)]
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.draw(uniform_open(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dist::Normal;
    use crate::numerics::stats::ks_one_sample;
    use crate::numerics::RngStream;
    use approx::assert_relative_eq;

    fn normal(m: f64, s: f64) -> Arc<dyn Univariate> {
        Arc::new(Normal::new(m, s))
    }

    #[test]
    fn truncated_outside_normalizes() {
        let d = TruncatedDensity::new(normal(2.1, 1.0), Region::Outside(-0.2, 0.2)).unwrap();
        let s = QuadratureSpec::relative(1e-11);
        let total = integrate(|x| d.pdf(x), f64::NEG_INFINITY, -0.2, &s).unwrap()
            + integrate(|x| d.pdf(x), 0.2, f64::INFINITY, &s).unwrap();
        assert_relative_eq!(total, 1.0, epsilon = 1e-9);
        assert_eq!(d.pdf(0.0), 0.0);
        assert_relative_eq!(d.cdf(0.0), d.cdf(-0.2), epsilon = 1e-15);
    }

    #[test]
    fn tilted_with_zero_tau_is_truncated() {
        let t = TiltedDensity::new(normal(2.1, 1.0), -0.2, 0.2, BumpDensity::default_on(-0.2, 0.2), 0.0).unwrap();
        let d = TruncatedDensity::new(normal(2.1, 1.0), Region::Inside(-0.2, 0.2)).unwrap();
        for &x in &[-0.15, 0.0, 0.1, 0.19] {
            assert_relative_eq!(t.pdf(x), d.pdf(x), max_relative = 1e-10);
            assert_relative_eq!(t.cdf(x), d.cdf(x), max_relative = 1e-10);
        }
    }

    #[test]
    fn tilted_normalizes_and_samples() {
        let bump = BumpDensity::default_on(-0.2, 0.2);
        let t = TiltedDensity::new(normal(2.1, 1.0), -0.2, 0.2, bump, 3.7).unwrap();
        let total = integrate(|x| t.pdf(x), -0.2, 0.2, &QuadratureSpec::relative(1e-12)).unwrap();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        let mut r = RngStream::new(11, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| t.sample(&mut r)).collect();
        assert!(xs.iter().all(|x| (-0.2..=0.2).contains(x)));
        assert!(ks_one_sample(&xs, |x| t.cdf(x)).p_value > 0.01);
    }

    #[test]
    fn tilted_far_tail_does_not_underflow() {
        let bump = BumpDensity::default_on(-0.2, 0.2);
        let t = TiltedDensity::new(normal(30.0, 1.0), -0.2, 0.2, bump, 10.0).unwrap();
        assert!(t.pdf(0.0).is_finite() && t.pdf(0.0) > 0.0);
        let x = t.draw(0.5);
        assert!((-0.2..=0.2).contains(&x));
    }

    #[test]
    fn mixture_reports_atom() {
        let out = DensityHandle::continuous(TruncatedDensity::new(normal(1.0, 1.0), Region::Outside(0.0, 0.0)).unwrap());
        let m = DensityHandle::Mixture(Arc::new(Mixture::new(vec![(0.3, DensityHandle::Atom(0.0)), (0.7, out)]).unwrap()));
        assert_eq!(m.atom(), Some((0.0, 0.3)));
        assert_relative_eq!(m.mass_between(-1e-12, 1e-12), 0.3, epsilon = 1e-9);
        assert_relative_eq!(m.cdf(f64::INFINITY), 1.0, epsilon = 1e-12);
    }
}
