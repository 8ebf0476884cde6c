use aurc::special::harmonic_prefix;
use aurc::theory::{
    avg_mse_closed_form, avg_mse_direct, bias_alpha_prime, bias_sele, bias_sele_sum, mc_rank_mse, mc_weight_stats,
    mse_alpha_hat, mse_alpha_hat_telescoped, mse_alpha_prime, mse_at_percentile, mse_bound,
};
use aurc::{RngHandle, WeightKind};

#[test]
fn direct_average_is_harmonic_over_n() {
    let h = harmonic_prefix(20_000);
    for n in [1, 7, 64, 1000, 20_000] {
        let direct = avg_mse_direct(n).unwrap();
        assert!((direct - h.get(n) / n as f64).abs() < 1e-12 * direct.max(1.0), "n={n}");
    }
}

#[test]
fn average_ratio_approaches_one_from_above() {
    // H_n/n over (n+1)ln(n+1)/n² − 1/n tends to 1 only logarithmically
    let ratio = |n: usize| avg_mse_direct(n).unwrap() / avg_mse_closed_form(n).unwrap();
    let sizes = [64, 128, 256, 512, 1024, 2048, 4096, 8192];
    let rs: Vec<f64> = sizes.iter().map(|&n| ratio(n)).collect();
    assert!(rs.windows(2).all(|w| w[1] < w[0]), "{rs:?}");
    assert!(rs.iter().all(|&r| r > 1.0));
    for (&n, &r) in sizes.iter().zip(&rs) {
        if n >= 2048 {
            assert!((0.8..=1.25).contains(&r), "n={n} ratio={r}");
        }
    }
}

#[test]
fn trigamma_and_telescoped_forms_agree() {
    for n in [1, 2, 17, 300] {
        for r in 1..=n {
            let a = mse_alpha_hat(n, r).unwrap();
            let b = mse_alpha_hat_telescoped(n, r).unwrap();
            assert!((a - b).abs() < 1e-13, "n={n} r={r}");
        }
    }
}

#[test]
fn fixed_percentile_mse_matches_simulation() {
    let mut rng = RngHandle::new(77);
    for kind in WeightKind::ALL {
        for (n, beta) in [(8, 0.2), (32, 0.7), (128, 0.95)] {
            let s = mc_weight_stats(n, beta, kind, 200_000, &mut rng).unwrap();
            let exact = mse_at_percentile(kind, n, beta).unwrap();
            assert!((s.mse_est - exact).abs() < 4.0 * s.stderr_mse, "{kind} n={n} β={beta}");
        }
    }
}

#[test]
fn fixed_percentile_and_fixed_rank_mse_differ() {
    // the two conditioning schemes are different quantities
    let a = mse_at_percentile(WeightKind::AlphaHat, 8, 1.0 / 9.0).unwrap();
    let b = mse_alpha_hat(8, 1).unwrap();
    assert!((a - b).abs() > 0.01, "{a} {b}");
}

#[test]
fn rank_mse_within_envelope_band() {
    for n in [8usize, 64, 512] {
        for r in 1..=n {
            let beta = r as f64 / (n as f64 + 1.0);
            let bound = mse_bound(n, beta).unwrap();
            let hat = mse_alpha_hat(n, r).unwrap() / bound;
            let prime = mse_alpha_prime(n, r).unwrap() / bound;
            assert!((0.25..=4.0).contains(&hat), "α̂ n={n} r={r}: {hat}");
            assert!((0.25..=4.0).contains(&prime), "α̂′ n={n} r={r}: {prime}");
        }
    }
}

#[test]
fn rank_mse_simulation_tail_ranks() {
    let mut rng = RngHandle::new(5);
    for kind in [WeightKind::AlphaHat, WeightKind::AlphaPrime] {
        let e = mc_rank_mse(64, 64, kind, 200_000, &mut rng).unwrap();
        let exact = if kind == WeightKind::AlphaHat { mse_alpha_hat(64, 64) } else { mse_alpha_prime(64, 64) }.unwrap();
        assert!((e.mean - exact).abs() < 4.0 * e.stderr, "{kind}");
    }
}

#[test]
fn prime_bias_is_below_hat_bias() {
    for n in [2usize, 8, 100] {
        for k in 1..20 {
            let b = k as f64 / 20.0;
            let hat = aurc::theory::bias_alpha_hat(n, b).unwrap();
            assert!(bias_alpha_prime(n, b).unwrap() <= hat + 1e-15);
            assert!(bias_sele(n, b).unwrap() <= hat + 1e-12);
            assert!((bias_sele(n, b).unwrap() - bias_sele_sum(n, b).unwrap()).abs() < 1e-10);
        }
    }
}
