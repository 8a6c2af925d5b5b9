//! Weighted histograms, effective sample size, convergence and
//! goodness-of-fit statistics.

use super::special::norm_sf;
use crate::error::{Error, Result};
use crate::inference::{DensityHandle, WeightedSample};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Kish effective sample size (Σw)²/Σw².
pub fn ess_of(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

pub fn ess<T>(sample: &WeightedSample<T>) -> f64 {
    ess_of(sample.weights())
}

/// Weighted quantile by linear search over the sorted cumulative weights.
pub fn weighted_quantiles(values: &[f64], weights: &[f64], probs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(probs.len());
    for &p in probs {
        let target = p * total;
        let mut acc = 0.0;
        let mut chosen = values[idx[idx.len() - 1]];
        for &i in &idx {
            acc += weights[i];
            if acc >= target {
                chosen = values[i];
                break;
            }
        }
        out.push(chosen);
    }
    out
}

/// Freedman–Diaconis bin width 2·IQR·n^{−1/3}, with the effective sample
/// size standing in for n.
pub fn freedman_diaconis_width(values: &[f64], weights: &[f64]) -> f64 {
    let q = weighted_quantiles(values, weights, &[0.25, 0.75]);
    let iqr = q[1] - q[0];
    let n = ess_of(weights).max(1.0);
    let w = 2.0 * iqr / n.cbrt();
    if w > 0.0 {
        w
    } else {
        let (lo, hi) = min_max(values);
        ((hi - lo) / n.sqrt()).max(f64::MIN_POSITIVE)
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// How to bin a histogram.
#[derive(Debug, Clone, PartialEq)]
pub enum BinSpec {
    FreedmanDiaconis,
    Width(f64),
    Count(usize),
    Edges(Vec<f64>),
}

const MAX_BINS: usize = 100_000;

/// Equal-width edges exactly covering [lo, hi] with bins no wider than `width`.
pub fn uniform_edges(lo: f64, hi: f64, width: f64) -> Vec<f64> {
    let n = if hi > lo {
        (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
    } else {
        1
    };
    let hi = if hi > lo { hi } else { lo + width.max(f64::MIN_POSITIVE) };
    let mut edges: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    edges[n] = hi;
    edges
}

/// A normalized piecewise-constant density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    density: Vec<f64>,
}

impl Histogram {
    /// Bins `values` with `weights`; points outside the edges are dropped.
    pub fn from_edges(values: &[f64], weights: &[f64], edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("histogram edges", "need at least two increasing edges"));
        }
        let nb = edges.len() - 1;
        let mut mass = vec![0.0; nb];
        let (lo, hi) = (edges[0], edges[nb]);
        for (&v, &w) in values.iter().zip(weights) {
            if v < lo || v > hi || w == 0.0 {
                continue;
            }
            let i = edges.partition_point(|&e| e <= v).saturating_sub(1).min(nb - 1);
            mass[i] += w;
        }
        let total: f64 = mass.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass("no weight falls inside the histogram range".into()));
        }
        let density = mass
            .iter()
            .enumerate()
            .map(|(i, m)| m / total / (edges[i + 1] - edges[i]))
            .collect();
        Ok(Histogram { edges, density })
    }

    /// Histogram over one or more disjoint ranges, bins of about `width`
    /// aligned to each range; gaps between ranges get a zero-density bin.
    pub fn over_ranges(
        values: &[f64],
        weights: &[f64],
        ranges: &[(f64, f64)],
        width: f64,
    ) -> Result<Self> {
        let mut edges: Vec<f64> = Vec::new();
        for &(a, b) in ranges {
            if !(b > a) {
                continue;
            }
            let e = uniform_edges(a, b, width);
            match edges.last() {
                Some(&last) if last == a => edges.extend_from_slice(&e[1..]),
                _ => edges.extend_from_slice(&e),
            }
        }
        Histogram::from_edges(values, weights, edges)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        let nb = self.density.len();
        if x < self.edges[0] || x > self.edges[nb] {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= x).saturating_sub(1).min(nb - 1))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.bin_of(x).map_or(0.0, |i| self.density[i])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, d) in self.density.iter().enumerate() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            if x >= b {
                acc += d * (b - a);
            } else {
                if x > a {
                    acc += d * (x - a);
                }
                break;
            }
        }
        acc.min(1.0)
    }

    /// Maximal runs of positive-density bins.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &d) in self.density.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            match out.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => out.push((a, b)),
            }
        }
        out
    }

    /// Inverse-CDF draw given two uniforms (bin, then position).
    pub fn draw(&self, u: f64, v: f64) -> f64 {
        let mut acc = 0.0;
        let last = self.density.len() - 1;
        for (i, d) in self.density.iter().enumerate() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            acc += d * (b - a);
            if u <= acc || i == last {
                return a + v * (b - a);
            }
        }
        unreachable!()
    }
}

/// Weighted histogram of a scalar sample, normalized to integrate to one.
pub fn weighted_histogram(sample: &WeightedSample<f64>, bins: &BinSpec) -> Result<DensityHandle> {
    let (values, weights) = (sample.values(), sample.weights());
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let (lo, hi) = min_max(values);
    let hist = match bins {
        BinSpec::Edges(e) => Histogram::from_edges(values, weights, e.clone())?,
        BinSpec::Width(w) => Histogram::from_edges(values, weights, uniform_edges(lo, hi, *w))?,
        BinSpec::Count(n) => {
            let w = if hi > lo { (hi - lo) / (*n).max(1) as f64 } else { 1.0 };
            Histogram::from_edges(values, weights, uniform_edges(lo, hi, w))?
        }
        BinSpec::FreedmanDiaconis => {
            let w = freedman_diaconis_width(values, weights);
            Histogram::from_edges(values, weights, uniform_edges(lo, hi, w))?
        }
    };
    Ok(DensityHandle::Histogram(hist))
}

/// Split-chain potential scale reduction factor.
///
/// Each chain is cut in half and the halves are treated as separate chains.
/// Constant chains (zero within- and between-chain variance) give exactly 1.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::invalid("chains", "need at least two chains"));
    }
    let len = chains[0].len();
    if chains.iter().any(|c| c.len() != len) {
        return Err(Error::invalid("chains", "chains must have equal length"));
    }
    let half = len / 2;
    if half < 2 {
        return Err(Error::EmptySample);
    }
    let mut pieces: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        pieces.push(&c[..half]);
        pieces.push(&c[len - half..]);
    }
    let n = half as f64;
    let means: Vec<f64> = pieces.iter().map(|p| mean(p)).collect();
    let w = pieces.iter().map(|p| variance(p)).sum::<f64>() / pieces.len() as f64;
    let b = n * variance(&means);
    if w == 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    Ok((var_plus / w).sqrt())
}

/// Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            s += (-m * m * c).exp();
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d) }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sn = ne.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d) }
}

/// Two-sided p-value of a standard normal statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    2.0 * norm_sf(z.abs())
}
