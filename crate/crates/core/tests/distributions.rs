mod common;

use common::binom_sigma;
use conetest::cone::PolyhedralCone;
use conetest::dist::{
    chi2_cdf, chi2_pdf, chi2_quantile, fratio_quantile, isotonic_weights, mc_weights,
    mixture_quantile, orthant_weights, ChiBarMixture,
};
use conetest::project::CovarianceSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};

#[test]
fn quantile_inverts_cdf() {
    for df in [1u32, 2, 3, 5, 10, 25, 50, 100] {
        for i in 0..60 {
            let x = 0.01 * (5000.0_f64).powf(i as f64 / 59.0);
            let prob = chi2_cdf(df, x);
            // Skip points where rounding the cdf to a double already moves x
            // by more than 1e-8 relative.
            let rounding = f64::EPSILON * prob / (chi2_pdf(df, x) * x);
            if rounding > 1e-8 {
                continue;
            }
            let back = chi2_quantile(df, prob).unwrap();
            assert!((back - x).abs() <= 1e-7 * x, "df {df} x {x} back {back}");
        }
    }
}

#[test]
fn known_quantiles() {
    let z = 1.959963984540054_f64;
    assert!((chi2_quantile(1, 0.95).unwrap() - z * z).abs() < 1e-9);
    assert!((chi2_quantile(2, 0.95).unwrap() + 2.0 * 0.05_f64.ln()).abs() < 1e-9);
    assert_eq!(chi2_cdf(0, 1.0), 1.0);
    assert_eq!(chi2_quantile(0, 0.3).unwrap(), 0.0);
}

#[test]
fn ratio_quantile_matches_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (a, b) = (
        ChiSquared::new(1.0).unwrap(),
        ChiSquared::new(10.0).unwrap(),
    );
    let mut draws: Vec<f64> = (0..1_000_000)
        .map(|_| a.sample(&mut rng) / b.sample(&mut rng))
        .collect();
    draws.sort_by(f64::total_cmp);
    let empirical = draws[950_000];
    let q = fratio_quantile(1, 10, 0.95).unwrap();
    assert!((q - empirical).abs() < 0.005, "{q} vs {empirical}");
    assert!((q - 0.4965).abs() < 1e-3);
    assert!((fratio_quantile(2, 2, 0.95).unwrap() - 19.0).abs() < 1e-8);
    assert!((fratio_quantile(7, 7, 0.5).unwrap() - 1.0).abs() < 1e-9);
}

/// Unsigned Stirling numbers of the first kind, by the integer recurrence.
fn stirling_first(n: usize) -> Vec<u128> {
    let mut row = vec![1u128];
    for m in 1..=n {
        let mut next = vec![0u128; m + 1];
        for (k, slot) in next.iter_mut().enumerate().skip(1) {
            let left = row.get(k - 1).copied().unwrap_or(0);
            let stay = row.get(k).copied().unwrap_or(0);
            *slot = left + (m as u128 - 1) * stay;
        }
        row = next;
    }
    row
}

#[test]
fn isotonic_weights_are_stirling_ratios() {
    for p in 2..=20 {
        let s = stirling_first(p);
        let fact: u128 = (1..=p as u128).product();
        let w = isotonic_weights(p).unwrap();
        assert_eq!(w.weights().len(), p);
        for i in 0..p {
            let want = s[p - i] as f64 / fact as f64;
            assert!(
                (w.weight(i) - want).abs() <= 1e-14 * want.max(1e-300) + 1e-300,
                "p {p} i {i}"
            );
        }
        assert!((w.weight(0) - 1.0 / fact as f64).abs() < 1e-15);
    }
}

#[test]
fn weights_sum_to_one() {
    for p in 1..=200 {
        let s: f64 = orthant_weights(p).weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-12, "orthant {p}");
        if p >= 2 {
            let s: f64 = isotonic_weights(p).unwrap().weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "isotonic {p}");
        }
    }
}

fn assert_within_3_sigma(mc: &ChiBarMixture, exact: &ChiBarMixture, nsim: usize) {
    for df in 0..=exact.max_df() {
        let w = exact.weight(df);
        assert!(
            (mc.weight(df) - w).abs() <= 3.0 * binom_sigma(w, nsim),
            "df {df}: {} vs {w}",
            mc.weight(df)
        );
    }
}

#[test]
fn simulated_weights_match_exact() {
    let nsim = 100_000;
    for (cone, exact) in [
        (PolyhedralCone::orthant(1).unwrap(), orthant_weights(1)),
        (PolyhedralCone::orthant(2).unwrap(), orthant_weights(2)),
        (
            PolyhedralCone::isotonic(3).unwrap(),
            isotonic_weights(3).unwrap(),
        ),
    ] {
        let cov = CovarianceSpec::identity(cone.dim());
        let mc = mc_weights(&cone, &cov, nsim, 77).unwrap();
        assert_within_3_sigma(&mc, &exact, nsim);
        assert_eq!(mc, mc_weights(&cone, &cov, nsim, 77).unwrap());
    }
}

#[test]
fn simulated_weights_converge() {
    // Quadrupling the sample size should halve the RMS error.
    let cone = PolyhedralCone::isotonic(3).unwrap();
    let cov = CovarianceSpec::identity(3);
    let exact = isotonic_weights(3).unwrap();
    let mse = |nsim: usize| -> f64 {
        (0..12u64)
            .map(|seed| {
                let mc = mc_weights(&cone, &cov, nsim, 1000 + seed).unwrap();
                (0..3)
                    .map(|i| (mc.weight(i) - exact.weight(i)).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / 12.0
    };
    let ratio = (mse(10_000) / mse(40_000)).sqrt();
    assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "RMS ratio {ratio}");
}

#[test]
fn orthant_mixture_quantile_bracketed() {
    for p in 2..=40 {
        let q = mixture_quantile(&orthant_weights(p), 0.05).unwrap();
        let lo = chi2_quantile((p / 2) as u32, 0.95).unwrap();
        let hi = chi2_quantile(p as u32, 0.95).unwrap();
        assert!(lo < q && q < hi, "p {p}: {lo} < {q} < {hi}");
    }
}

#[test]
fn mixture_quantile_is_monotone_and_exact() {
    let mix = isotonic_weights(6).unwrap();
    let mut last = f64::INFINITY;
    for i in 1..60 {
        let alpha = i as f64 / 100.0;
        let q = mixture_quantile(&mix, alpha).unwrap();
        assert!(q <= last);
        if q > 0.0 {
            assert!((mix.sf(q) - alpha).abs() < 1e-8);
        }
        last = q;
    }
    let q = mixture_quantile(&isotonic_weights(3).unwrap(), 0.05).unwrap();
    assert!((q - 4.6).abs() < 0.05);
    let q = mixture_quantile(&orthant_weights(2), 0.05).unwrap();
    assert!((q - 4.23).abs() < 0.01);
}

#[test]
fn weights_csv_round_trip() {
    let mix = isotonic_weights(5).unwrap();
    let mut buf = Vec::new();
    mix.write_csv(&mut buf).unwrap();
    let back = ChiBarMixture::read_csv(&buf[..]).unwrap();
    for i in 0..5 {
        assert!((back.weight(i) - mix.weight(i)).abs() <= 5e-10 * mix.weight(i));
    }
}
