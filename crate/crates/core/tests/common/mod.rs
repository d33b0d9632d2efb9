//! Oracles shared by the integration tests. Nothing here calls the
//! library's search or solver code; only the basic rate primitive is reused.

#![allow(dead_code)]

use bmw_core::rate_engine::{fading_log_rate, ChannelParams};
use rand::Rng;

/// Exponential integral E1(x) for x > 0: power series up to 1, continued
/// fraction (modified Lentz) beyond.
pub fn e1(x: f64) -> f64 {
    assert!(x > 0.0);
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        -EULER - x.ln() + sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `E[log2(1 + a h / b)]`, `h ~ Exp(lambda)`, in closed form.
pub fn closed_form_rate(lambda: f64, a: f64, b: f64) -> f64 {
    let x = lambda * b / a;
    x.exp() * e1(x) / std::f64::consts::LN_2
}

/// Eve's capacity for decoding `signal` levels with `noise` levels as
/// interference, recomputed from the rate primitive.
pub fn eve_cap(params: &ChannelParams, q: f64, powers: &[f64], signal: &[usize], noise: &[usize]) -> f64 {
    let s: f64 = signal.iter().map(|&j| powers[j]).sum();
    let i: f64 = noise.iter().map(|&j| powers[j]).sum();
    if q == 0.0 || s == 0.0 {
        return 0.0;
    }
    q * fading_log_rate(params.lambda_w(), s, params.noise_var(), i).unwrap()
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &it in items {
        let more: Vec<Vec<usize>> = out
            .iter()
            .map(|s| {
                let mut t = s.clone();
                t.push(it);
                t
            })
            .collect();
        out.extend(more);
    }
    out
}

/// Whether Eve can decode every level of `set` (0-based) while treating the
/// rest as noise.
pub fn brute_decodable(params: &ChannelParams, q: f64, powers: &[f64], rates: &[f64], set: &[usize]) -> bool {
    let n = powers.len();
    let noise: Vec<usize> = (0..n).filter(|j| !set.contains(j)).collect();
    subsets(set).into_iter().filter(|s| !s.is_empty()).all(|s| {
        let demand: f64 = s.iter().map(|&j| rates[j]).sum();
        demand <= eve_cap(params, q, powers, &s, &noise)
    })
}

/// Largest decodable set by exhaustive enumeration; ties go to the larger
/// total rate, then to the lexicographically smallest list. 1-based output.
pub fn brute_force_decodable_set(params: &ChannelParams, q: f64, powers: &[f64], rates: &[f64]) -> Vec<usize> {
    let n = powers.len();
    let all: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<usize>> = None;
    for mut set in subsets(&all) {
        set.sort_unstable();
        if !brute_decodable(params, q, powers, rates, &set) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                let (rs, rb): (f64, f64) = (set.iter().map(|&j| rates[j]).sum(), b.iter().map(|&j| rates[j]).sum());
                set.len() > b.len() || (set.len() == b.len() && (rs > rb || (rs == rb && set < *b)))
            }
        };
        if better {
            best = Some(set);
        }
    }
    best.unwrap().into_iter().map(|j| j + 1).collect()
}

pub fn random_channel<R: Rng>(rng: &mut R) -> ChannelParams {
    ChannelParams::new(
        rng.random_range(0.1..1.0),
        rng.random_range(0.1..3.0),
        rng.random_range(0.5..30.0),
        rng.random_range(0.0..10.0),
        rng.random_range(0.5..2.0),
    )
    .unwrap()
}

/// Random design with `n` levels.
pub fn random_design<R: Rng>(rng: &mut R, n: usize) -> bmw_core::CodeDesign {
    let mut q: Vec<f64> = (1..n).map(|_| rng.random_range(0.02..0.98)).collect();
    q.sort_by(f64::total_cmp);
    q.dedup();
    while q.len() < n - 1 {
        q.push(q.last().copied().unwrap_or(0.5) + 1e-3);
    }
    let a: Vec<f64> = (1..n).map(|_| rng.random_range(0.0..1.0)).collect();
    bmw_core::CodeDesign::new(q, a).unwrap()
}
