mod common;

use bmw_core::rate_engine::{
    fading_log_rate, forwarding_rate, level_rate_at, level_rates, mode_mix_rate, wcs_secrecy_rate, ChannelParams,
    CodeDesign,
};
use bmw_core::mac_region::eve_capacity_term;
use bmw_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use common::closed_form_rate;

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs().max(1e-300)
}

/// Sample mean and standard error of `E log2(1 + a h / (b + c h))`.
fn monte_carlo(lambda: f64, a: f64, b: f64, c: f64, samples: usize, seed: u64) -> (f64, f64) {
    let exp = Exp::new(lambda).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let h: f64 = exp.sample(&mut rng);
        let v = (1.0 + a * h / (b + c * h)).log2();
        s += v;
        s2 += v * v;
    }
    let m = s / samples as f64;
    let var = (s2 / samples as f64 - m * m).max(0.0);
    (m, (var / samples as f64).sqrt())
}

#[test]
fn frozen_rate_values() {
    assert!(close(fading_log_rate(1.0, 1.0, 1.0, 0.0).unwrap(), 0.860_347_382_270_885_9, 1e-10));
    assert!(close(fading_log_rate(0.3, 10.0, 1.0, 0.0).unwrap(), 4.399_119_539_390_188, 1e-10));
    assert!(close(mode_mix_rate(0.5, 2.0, 1.0).unwrap(), 1.160_964_047_443_681, 1e-12));
    let weak = ChannelParams::weak_eavesdropper(10.0).unwrap();
    assert!(close(eve_capacity_term(&weak, 0.5, 5.0, 2.0).unwrap(), 0.522_861_655_556_374, 1e-10));
    assert!(close(wcs_secrecy_rate(&weak).unwrap(), 0.244_776_851_627_264_23, 1e-10));
}

#[test]
fn frozen_values_agree_with_independent_estimates() {
    // The c = 0 values against the exponential-integral closed form.
    assert!(close(0.860_347_382_270_885_9, closed_form_rate(1.0, 1.0, 1.0), 1e-12));
    assert!(close(4.399_119_539_390_188, closed_form_rate(0.3, 10.0, 1.0), 1e-12));
    // q = 1/2, x = 2, y = 1: half the time log2(3), half the time log2(1 + 2/3).
    let by_hand = 0.5 * 3f64.log2() + 0.5 * (5.0f64 / 3.0).log2();
    assert!(close(1.160_964_047_443_681, by_hand, 1e-15));
    let (m, se) = monte_carlo(0.3, 10.0, 1.0, 0.0, 1_000_000, 1);
    assert!((m - 4.399_119_539_390_188).abs() <= 4.0 * se);
}

#[test]
fn quadrature_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for k in 0..50 {
        let lambda = rng.random_range(0.1..5.0);
        let a = rng.random_range(0.1..50.0);
        let b = rng.random_range(0.5..5.0);
        let c = if k % 3 == 0 { 0.0 } else { rng.random_range(0.0..20.0) };
        let q = fading_log_rate(lambda, a, b, c).unwrap();
        let (m, se) = monte_carlo(lambda, a, b, c, 1_000_000, 100 + k);
        assert!(
            (q - m).abs() <= 4.0 * se,
            "lambda {lambda} a {a} b {b} c {c}: quadrature {q}, MC {m} ± {se}"
        );
    }
}

#[test]
fn wcs_rate_is_nondecreasing_and_concave_in_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let lambda_m = rng.random_range(0.05..1.0);
        let jam = rng.random_range(0.0..10.0);
        let noise = rng.random_range(0.5..2.0);
        let lambda_w = lambda_m * (1.0 + jam / noise) * rng.random_range(1.05..4.0);
        let rates: Vec<f64> = (1..=60)
            .map(|k| {
                let p = ChannelParams::new(lambda_m, lambda_w, 0.5 * k as f64, jam, noise).unwrap();
                wcs_secrecy_rate(&p).unwrap()
            })
            .collect();
        assert!(rates[0] > 0.0);
        for w in rates.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in rates.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9);
        }
    }
}

#[test]
fn jammed_rate_is_convex_in_jam_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let lambda = rng.random_range(0.1..2.0);
        let p = rng.random_range(0.5..30.0);
        let noise = rng.random_range(0.5..2.0);
        let g = |j: f64| fading_log_rate(lambda, p, noise + j, 0.0).unwrap();
        let values: Vec<f64> = (0..100).map(|k| g(0.2 * k as f64)).collect();
        for w in values.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9);
        }
        // A two-point mixture with the same mean never helps the jammer.
        let (j1, j2) = (rng.random_range(0.0..20.0), rng.random_range(0.0..20.0));
        let w = rng.random::<f64>();
        let mean = w * j1 + (1.0 - w) * j2;
        assert!(w * g(j1) + (1.0 - w) * g(j2) >= g(mean) - 1e-12);
    }
}

#[test]
fn two_level_rates_example() {
    let params = ChannelParams::new(0.2, 1.5, 10.0, 5.0, 1.0).unwrap();
    let design = CodeDesign::new(vec![0.5], vec![0.5]).unwrap();
    let levels = level_rates(&params, &design).unwrap();
    assert!(close(levels.rate(1), 0.725_624_741_684_039_6, 1e-10));
    assert!(close(levels.rate(2), 2.729_583_250_770_11, 1e-10));
    assert!(close(forwarding_rate(&levels, 2).unwrap(), 3.455_207_992_454_149_2, 1e-10));
    assert!(matches!(forwarding_rate(&levels, 3), Err(Error::IndexOutOfRange { .. })));
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(ChannelParams::new(0.0, 1.0, 1.0, 1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(ChannelParams::new(1.0, 1.0, -1.0, 1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(CodeDesign::new(vec![0.6, 0.4], vec![0.5, 0.5]), Err(Error::InvalidDesign(_))));
    assert!(matches!(CodeDesign::new(vec![0.5], vec![1.5]), Err(Error::InvalidDesign(_))));
    assert!(matches!(mode_mix_rate(1.5, 1.0, 1.0), Err(Error::Domain(_))));
}

fn design_strategy() -> impl Strategy<Value = CodeDesign> {
    (1usize..6).prop_flat_map(|n| {
        (
            proptest::collection::vec(0.001f64..0.999, n - 1),
            proptest::collection::vec(0.0f64..=1.0, n - 1),
        )
            .prop_map(|(mut qs, alphas)| {
                qs.sort_by(f64::total_cmp);
                qs.dedup();
                let alphas = alphas[..qs.len()].to_vec();
                CodeDesign::new(qs, alphas).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mode_mix_increasing_and_convex(x in 0.01f64..100.0, y in 0.01f64..100.0, q in 0.0f64..0.98) {
        let h = 0.01;
        let f0 = mode_mix_rate(q, x, y).unwrap();
        let f1 = mode_mix_rate(q + h, x, y).unwrap();
        let f2 = mode_mix_rate(q + 2.0 * h, x, y).unwrap();
        prop_assert!(f1 > f0 && f2 > f1);
        prop_assert!(f2 - 2.0 * f1 + f0 >= -1e-9);
    }

    #[test]
    fn level_powers_sum_to_budget(design in design_strategy(), power in 0.0f64..100.0) {
        let powers = design.level_powers(power);
        prop_assert_eq!(powers.len(), design.n());
        prop_assert!(powers.iter().all(|&p| p >= 0.0));
        let sum: f64 = powers.iter().sum();
        prop_assert!((sum - power).abs() <= 1e-12 * power.max(1.0));
    }

    #[test]
    fn level_rates_grow_with_listening(design in design_strategy(), power in 0.5f64..30.0, q in 0.0f64..0.95) {
        let params = ChannelParams::new(0.3, 1.0, power, 5.0, 1.0).unwrap();
        for i in 1..=design.n() {
            let lo = level_rate_at(&params, &design, i, q).unwrap();
            let hi = level_rate_at(&params, &design, i, q + 0.05).unwrap();
            prop_assert!(hi >= lo);
        }
    }

    #[test]
    fn wcs_rate_is_nonnegative(lambda_m in 0.05f64..3.0, lambda_w in 0.05f64..3.0, power in 0.0f64..30.0, jam in 0.0f64..10.0) {
        let params = ChannelParams::new(lambda_m, lambda_w, power, jam, 1.0).unwrap();
        let r = wcs_secrecy_rate(&params).unwrap();
        prop_assert!(r >= 0.0);
        if lambda_m * (1.0 + jam) >= lambda_w {
            prop_assert_eq!(r, 0.0);
        }
    }
}
