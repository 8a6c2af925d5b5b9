use proptest::prelude::*;
use sharpfid::binomial::{flat_evidence, BinomialCount};
use sharpfid::normal_known::{analyze, post_prob_sharp, NormalKnownSummary};
use sharpfid::{post_data_probability, Error, GpdSpec, IntervalHypothesis};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evidence_scale_cancels(p0 in 0.0..=1.0f64, m_in in 1e-8..1e3f64, m_out in 1e-8..1e3f64, c in 1e-6..1e6f64) {
        let a = post_data_probability(p0, m_in, m_out).unwrap();
        let b = post_data_probability(p0, c * m_in, c * m_out).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn post_probability_grows_with_prior(p in 0.01..0.98f64, d in 0.001..0.01f64, z in 0.0..4.0f64) {
        prop_assert!(post_prob_sharp(z, p) < post_prob_sharp(z, p + d));
    }

    #[test]
    fn normal_known_location_scale(
        xbar in -1.0..1.0f64,
        sigma in 0.5..3.0f64,
        eps in 0.05..0.5f64,
        shift in -5.0..5.0f64,
        scale in 0.2..5.0f64,
        smooth in any::<bool>(),
    ) {
        let p0 = 0.3;
        let run = |x: f64, s: f64, lo: f64, hi: f64| {
            let h = IntervalHypothesis::new(lo, hi, p0).unwrap();
            let g = if smooth { GpdSpec::smoothed_on(lo, hi) } else { GpdSpec::Flat };
            analyze(&NormalKnownSummary::new(4, x, s).unwrap(), &h, &g).map(|r| r.p_in)
        };
        let a = run(xbar, sigma, -eps, eps);
        let b = run(shift + scale * xbar, scale * sigma, shift - scale * eps, shift + scale * eps);
        // Data well inside a wide interval leave no continuity root; that
        // verdict must be invariant too.
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b),
            (Err(Error::NoRoot { .. }), Err(Error::NoRoot { .. })) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn binomial_reflection(n in 2u64..30, frac in 0.0..=1.0f64, lo in 0.05..0.6f64, w in 0.01..0.3f64) {
        let x = (frac * n as f64).round() as u64;
        let hi = (lo + w).min(0.99);
        let a = flat_evidence(&BinomialCount::new(x, n).unwrap(), &IntervalHypothesis::new(lo, hi, 0.3).unwrap()).unwrap();
        let b = flat_evidence(
            &BinomialCount::new(n - x, n).unwrap(),
            &IntervalHypothesis::new(1.0 - hi, 1.0 - lo, 0.3).unwrap(),
        )
        .unwrap();
        prop_assert!((a.ratio() / b.ratio() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn mixture_is_a_distribution() {
    let h = IntervalHypothesis::symmetric(0.0, 0.3, 0.5).unwrap();
    let r = analyze(&NormalKnownSummary::new(1, 1.2, 1.0).unwrap(), &h, &GpdSpec::smoothed_on(-0.3, 0.3)).unwrap();
    let m = r.mixture().unwrap();
    assert!(m.cdf(-40.0) < 1e-12 && (m.cdf(40.0) - 1.0).abs() < 1e-12);
    assert!((m.mass_between(-0.3, 0.3) - r.p_in).abs() < 1e-9);
    for e in [-0.3, 0.3] {
        let (l, rr) = m.side_limits(e);
        assert!((l - rr).abs() / l.max(rr) < 1e-6);
    }
}
