//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! Infinite ranges are mapped onto (0, 1] with x = a + (1 − t)/t. The rule
//! never evaluates endpoints, so integrable endpoint singularities are fine.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 1 << 14,
        }
    }
}

impl QuadratureSpec {
    /// Purely relative tolerance, for integrands of unknown magnitude.
    pub fn relative(rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol: f64::MIN_POSITIVE,
            rel_tol,
            ..Default::default()
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(centre - x);
        let f2 = f(centre + x);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let (v, e) = gk21(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut pieces = 1usize;
    loop {
        if !total.is_finite() {
            return Err(Error::NonConvergence {
                subdivisions: pieces,
                estimate: total,
                error: total_err,
            });
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok((total, total_err));
        }
        if pieces >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                subdivisions: pieces,
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment cannot be split further in floating point.
            return Err(Error::NonConvergence {
                subdivisions: pieces,
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        pieces += 1;
        if pieces % 64 == 0 {
            // Refresh the running sums to stop rounding drift.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// ∫_a^b f(x) dx with an error estimate. Either bound may be infinite.
pub fn integrate_with_error(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::invalid("integration bounds", "NaN bound"));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    if a > b {
        let (v, e) = integrate_with_error(f, b, a, spec)?;
        return Ok((-v, e));
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(&f, a, b, spec),
        (true, false) => adapt(
            &|t: f64| {
                let x = a + (1.0 - t) / t;
                f(x) / (t * t)
            },
            0.0,
            1.0,
            spec,
        ),
        (false, true) => adapt(
            &|t: f64| {
                let x = b - (1.0 - t) / t;
                f(x) / (t * t)
            },
            0.0,
            1.0,
            spec,
        ),
        (false, false) => adapt(
            &|t: f64| {
                let x = (1.0 - t) / t;
                (f(x) + f(-x)) / (t * t)
            },
            0.0,
            1.0,
            spec,
        ),
    }
}

/// ∫_a^b f(x) dx. Either bound may be infinite.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_with_error(f, a, b, spec).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{ln_gamma, norm_pdf};
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn constant() {
        assert_relative_eq!(integrate(|_| 1.0, 0.0, 1.0, &spec()).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn normal_central_interval() {
        let v = integrate(norm_pdf, -1.96, 1.96, &spec()).unwrap();
        assert!((v - 0.950_004_209_703_559).abs() < 1e-6);
    }

    #[test]
    fn beta_kernel() {
        // B(6, 12) = 5! 11! / 17!
        let exact = 120.0 * 39_916_800.0 / 355_687_428_096_000.0;
        let v = integrate(|p| p.powi(5) * (1.0 - p).powi(11), 0.0, 1.0, &QuadratureSpec::relative(1e-12)).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-12);
    }

    #[test]
    fn infinite_ranges() {
        let s = QuadratureSpec::relative(1e-11);
        assert_relative_eq!(integrate(norm_pdf, f64::NEG_INFINITY, f64::INFINITY, &s).unwrap(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(integrate(norm_pdf, 0.0, f64::INFINITY, &s).unwrap(), 0.5, max_relative = 1e-10);
        assert_relative_eq!(integrate(norm_pdf, f64::NEG_INFINITY, -1.0, &s).unwrap(), 0.158_655_253_931_457_05, max_relative = 1e-10);
        // Gamma kernel: ∫ x^{3.5} e^{-x} = Γ(4.5)
        let g = integrate(|x: f64| x.powf(3.5) * (-x).exp(), 0.0, f64::INFINITY, &s).unwrap();
        assert_relative_eq!(g, ln_gamma(4.5).exp(), max_relative = 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &QuadratureSpec::relative(1e-9)).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn reversed_bounds() {
        let v = integrate(|x| x, 1.0, 0.0, &spec()).unwrap();
        assert_relative_eq!(v, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn reports_nonconvergence() {
        let tight = QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-300, max_subdivisions: 8 };
        assert!(matches!(
            integrate(|x: f64| (1.0 / x).sin(), 0.0, 1.0, &tight),
            Err(Error::NonConvergence { .. })
        ));
    }
}
