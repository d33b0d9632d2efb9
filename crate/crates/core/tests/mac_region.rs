mod common;

use bmw_core::mac_region::{
    classify_two_level, eve_capacity_term, eve_decodable_set, split_levels, DecodabilitySplit, EveMac, TwoLevelRegion,
};
use bmw_core::rate_engine::{level_rates, ChannelParams, CodeDesign, LevelRates};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_decodable, brute_force_decodable_set, random_channel, random_design};

fn three_level_instance() -> (ChannelParams, CodeDesign, LevelRates) {
    let params = ChannelParams::weak_eavesdropper(10.0).unwrap();
    let design = CodeDesign::new(vec![0.3, 0.7], vec![0.5, 0.5]).unwrap();
    let rates = LevelRates::new(vec![0.4, 0.15, 0.9]).unwrap();
    (params, design, rates)
}

#[test]
fn three_level_decodable_set() {
    let (params, design, _) = three_level_instance();
    let powers = design.level_powers(params.power());
    let cases: [([f64; 3], f64, &[usize]); 6] = [
        ([3.0, 0.1, 0.2], 0.2, &[]),
        ([3.0, 0.1, 0.2], 0.5, &[2]),
        ([3.0, 0.1, 0.2], 0.8, &[2, 3]),
        ([0.05, 0.6, 0.9], 0.5, &[1]),
        ([0.4, 0.15, 0.9], 0.6, &[1, 2]),
        ([0.4, 0.15, 0.9], 1.0, &[1, 2, 3]),
    ];
    for (rates, q, frozen) in cases {
        let oracle = brute_force_decodable_set(&params, q, &powers, &rates);
        assert_eq!(oracle, frozen, "oracle for {rates:?} at q = {q}");
        let got = eve_decodable_set(&params, q, &design, &LevelRates::new(rates.to_vec()).unwrap()).unwrap();
        assert_eq!(got.levels, frozen, "library for {rates:?} at q = {q}");
        assert!(!got.ambiguous);
    }
}

#[test]
fn split_partitions_levels() {
    let (params, design, rates) = three_level_instance();
    for q in [0.0, 0.2, 0.6, 1.0] {
        for prefix in 1..=3 {
            let s = split_levels(&params, q, &design, &rates, prefix).unwrap();
            let mut all: Vec<usize> = s.ordering.clone();
            all.sort_unstable();
            assert_eq!(all, vec![1, 2, 3]);
            assert!(s.key_capable.iter().all(|&j| j <= prefix && !s.eve_decodable.contains(&j)));
            assert!(s.neither.iter().all(|&j| j > prefix && !s.eve_decodable.contains(&j)));
        }
    }
    assert!(DecodabilitySplit::from_eve_set(3, &[4], 1).is_err());
    assert!(DecodabilitySplit::from_eve_set(3, &[1], 0).is_err());
}

#[test]
fn capacity_is_submodular() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let params = random_channel(&mut rng);
        let q = rng.random::<f64>();
        let n = 5;
        let powers: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let cap = |mask: u32| {
            let s: f64 = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| powers[j]).sum();
            eve_capacity_term(&params, q, s, 0.0).unwrap()
        };
        let t: u32 = rng.random_range(0..(1 << n));
        let s = t & rng.random_range(0..(1u32 << n));
        let outside: Vec<usize> = (0..n).filter(|j| t & (1 << j) == 0).collect();
        for r in outside {
            let bit = 1 << r;
            let gain_s = cap(s | bit) - cap(s);
            let gain_t = cap(t | bit) - cap(t);
            assert!(gain_s >= gain_t - 1e-9);
        }
    }
}

#[test]
fn returned_set_is_maximal() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for k in 0..200 {
        let n = 1 + k % 6;
        let params = random_channel(&mut rng);
        let design = random_design(&mut rng, n);
        let powers = design.level_powers(params.power());
        let q = rng.random::<f64>();
        let mac = EveMac::new(&params, &design);
        let rates: Vec<f64> = (0..n)
            .map(|j| mac.capacity(1.0, 1 << j, 0).unwrap() * rng.random_range(0.0..1.5))
            .collect();
        let got = eve_decodable_set(&params, q, &design, &LevelRates::new(rates.clone()).unwrap()).unwrap();
        let chosen: Vec<usize> = got.levels.iter().map(|j| j - 1).collect();
        assert!(brute_decodable(&params, q, &powers, &rates, &chosen));
        for extra in (0..n).filter(|j| !chosen.contains(j)) {
            let mut bigger = chosen.clone();
            bigger.push(extra);
            bigger.sort_unstable();
            assert!(!brute_decodable(&params, q, &powers, &rates, &bigger));
        }
    }
}

#[test]
fn treating_undecoded_users_as_noise_is_optimal_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..500 {
        let noise = rng.random_range(0.1..3.0);
        let m = rng.random_range(2..6);
        let powers: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..20.0)).collect();
        let total: f64 = powers.iter().sum();
        for mask in 1..(1u32 << m) - 1 {
            let members: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
            let lhs: f64 = members
                .iter()
                .map(|&j| (1.0 + powers[j] / (noise + total - powers[j])).log2())
                .sum();
            let rhs = (1.0 + members.iter().map(|&j| powers[j]).sum::<f64>() / noise).log2();
            assert!(lhs <= rhs + 1e-12);
        }
    }
}

#[test]
fn classifier_agrees_with_decoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut seen = std::collections::HashSet::new();
    for k in 0..1000 {
        let params = random_channel(&mut rng);
        let design = random_design(&mut rng, 2);
        let q = if k % 20 == 0 { 0.0 } else { rng.random::<f64>() };
        let rates = if k % 2 == 0 {
            level_rates(&params, &design).unwrap()
        } else {
            let mac = EveMac::new(&params, &design);
            LevelRates::new(
                (0..2)
                    .map(|j| mac.capacity(1.0, 1 << j, 0).unwrap() * rng.random_range(0.0..1.5))
                    .collect(),
            )
            .unwrap()
        };
        let region = classify_two_level(&params, q, &design, &rates).unwrap();
        let decoded = eve_decodable_set(&params, q, &design, &rates).unwrap();
        assert_eq!(region.eve_levels(), decoded.levels.as_slice(), "instance {k}: {}", region.name());
        seen.insert(region);
    }
    for r in [TwoLevelRegion::InsideCapacity, TwoLevelRegion::Omega1, TwoLevelRegion::Omega2] {
        assert!(seen.contains(&r), "{} never produced", r.name());
    }
}
