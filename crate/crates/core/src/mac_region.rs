//! The eavesdropper's view of the encoding levels as a multiple-access channel.
//!
//! Every level reaches Eve through the same fading coefficient, so the
//! capacity of a group of levels only depends on the total power of the group
//! and on the total power of the levels treated as noise. Level sets are
//! carried internally as bitmasks (bit `j - 1` for level `j`).

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rate_engine::{fading_log_rate, ChannelParams, CodeDesign, LevelRates};

/// Largest level count accepted by the exhaustive decodable-set search.
pub const MAX_ENUMERATED_LEVELS: usize = 20;

/// `q · E[log2(1 + signal·h_W / (σ² + interference·h_W))]`.
pub fn eve_capacity_term(params: &ChannelParams, q: f64, signal_power: f64, interference_power: f64) -> Result<f64> {
    check_probability(q)?;
    if !(signal_power >= 0.0 && interference_power >= 0.0) {
        return Err(Error::Domain(format!(
            "powers must be nonnegative (signal = {signal_power}, interference = {interference_power})"
        )));
    }
    if q == 0.0 || signal_power == 0.0 {
        return Ok(0.0);
    }
    Ok(q * fading_log_rate(params.lambda_w(), signal_power, params.noise_var(), interference_power)?)
}

fn check_probability(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {q} not in [0, 1]")))
    }
}

/// Eve's multiple-access channel for a fixed set of level powers.
///
/// Expectations do not depend on `q`, so they are cached by power pair and
/// reused across Eve strategies.
#[derive(Debug)]
pub struct EveMac {
    lambda_w: f64,
    noise_var: f64,
    powers: Vec<f64>,
    cache: RefCell<HashMap<(u64, u64), f64>>,
}

impl EveMac {
    pub fn new(params: &ChannelParams, design: &CodeDesign) -> Self {
        Self {
            lambda_w: params.lambda_w(),
            noise_var: params.noise_var(),
            powers: design.level_powers(params.power()),
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn from_powers(params: &ChannelParams, powers: Vec<f64>) -> Result<Self> {
        if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Domain(format!("level power {p} must be finite and nonnegative")));
        }
        Ok(Self {
            lambda_w: params.lambda_w(),
            noise_var: params.noise_var(),
            powers,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// Total power of the levels in `mask`, summed in increasing level order.
    pub fn power_sum(&self, mask: u32) -> f64 {
        self.powers
            .iter()
            .enumerate()
            .filter(|(j, _)| mask & (1 << j) != 0)
            .map(|(_, p)| p)
            .sum()
    }

    /// Full-listening expectation `E[log2(1 + s·h_W / (σ² + i·h_W))]`.
    pub fn expectation(&self, signal: f64, interference: f64) -> Result<f64> {
        if signal == 0.0 {
            return Ok(0.0);
        }
        let key = (signal.to_bits(), interference.to_bits());
        if let Some(&v) = self.cache.borrow().get(&key) {
            return Ok(v);
        }
        let v = fading_log_rate(self.lambda_w, signal, self.noise_var, interference)?;
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    /// Capacity bound for jointly decoding the levels in `signal_mask` while
    /// treating the levels in `noise_mask` as noise.
    pub fn capacity(&self, q: f64, signal_mask: u32, noise_mask: u32) -> Result<f64> {
        if q == 0.0 || signal_mask == 0 {
            return Ok(0.0);
        }
        Ok(q * self.expectation(self.power_sum(signal_mask), self.power_sum(noise_mask))?)
    }

    /// True when every nonempty subset of `set` satisfies its sum-rate bound
    /// with the complement of `set` treated as noise.
    pub fn is_decodable(&self, q: f64, rates: &[f64], set: u32) -> Result<bool> {
        let full = full_mask(self.n());
        let noise = full & !set;
        let mut sub = set;
        while sub != 0 {
            let demand: f64 = mask_sum(rates, sub);
            if demand > self.capacity(q, sub, noise)? {
                return Ok(false);
            }
            sub = (sub - 1) & set;
        }
        Ok(true)
    }

    /// Largest decodable set as a bitmask, plus a flag raised when several
    /// sets of that size are decodable.
    ///
    /// Ties are broken by larger total rate, then by the lexicographically
    /// smallest index list.
    pub fn decodable_mask(&self, q: f64, rates: &[f64]) -> Result<(u32, bool)> {
        let n = self.n();
        if n > MAX_ENUMERATED_LEVELS {
            return Err(Error::SizeGuard {
                what: "levels",
                size: n,
                limit: MAX_ENUMERATED_LEVELS,
            });
        }
        if rates.len() != n {
            return Err(Error::Domain(format!("{} rates for {n} levels", rates.len())));
        }
        for size in (0..=n).rev() {
            let mut best: Option<u32> = None;
            let mut count = 0usize;
            for set in 0..=full_mask(n) {
                if set.count_ones() as usize != size || !self.is_decodable(q, rates, set)? {
                    continue;
                }
                count += 1;
                best = Some(match best {
                    None => set,
                    Some(b) => prefer(b, set, rates),
                });
            }
            if let Some(b) = best {
                return Ok((b, count > 1));
            }
        }
        unreachable!("the empty set is always decodable")
    }
}

fn prefer(a: u32, b: u32, rates: &[f64]) -> u32 {
    let (ra, rb) = (mask_sum(rates, a), mask_sum(rates, b));
    if rb > ra {
        b
    } else if ra > rb {
        a
    } else if lex_less(b, a) {
        b
    } else {
        a
    }
}

/// Compares the ascending index lists of two equal-size masks.
fn lex_less(a: u32, b: u32) -> bool {
    // With equal cardinality the first differing index decides; the list
    // holding the lower index is smaller.
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub(crate) fn mask_sum(values: &[f64], mask: u32) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(j, _)| mask & (1 << j) != 0)
        .map(|(_, v)| v)
        .sum()
}

pub(crate) fn mask_to_levels(mask: u32) -> Vec<usize> {
    (0..32).filter(|j| mask & (1 << j) != 0).map(|j| j + 1).collect()
}

/// Largest set of levels Eve can decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EveDecodable {
    /// Ascending level indices.
    pub levels: Vec<usize>,
    /// Several decodable sets of the maximal size existed.
    pub ambiguous: bool,
}

/// Eve's maximal decodable set when she listens with probability `q`.
pub fn eve_decodable_set(
    params: &ChannelParams,
    q: f64,
    design: &CodeDesign,
    levels: &LevelRates,
) -> Result<EveDecodable> {
    check_probability(q)?;
    check_level_count(design, levels)?;
    let mac = EveMac::new(params, design);
    let (mask, ambiguous) = mac.decodable_mask(q, levels.as_slice())?;
    Ok(EveDecodable {
        levels: mask_to_levels(mask),
        ambiguous,
    })
}

fn check_level_count(design: &CodeDesign, levels: &LevelRates) -> Result<()> {
    if design.n() != levels.n() {
        return Err(Error::Domain(format!(
            "design has {} levels but {} rates were given",
            design.n(),
            levels.n()
        )));
    }
    Ok(())
}

/// Levels split into Eve-decodable, key-capable and undecodable sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodabilitySplit {
    pub eve_decodable: Vec<usize>,
    /// Decoded by the legitimate receiver but not by Eve.
    pub key_capable: Vec<usize>,
    pub neither: Vec<usize>,
    /// `eve_decodable`, then `key_capable`, then `neither`.
    pub ordering: Vec<usize>,
    pub ambiguous: bool,
}

impl DecodabilitySplit {
    /// Builds the split from an Eve-decodable set and the receiver's
    /// decodable prefix `1..=bob_prefix`.
    pub fn from_eve_set(n: usize, eve_decodable: &[usize], bob_prefix: usize) -> Result<Self> {
        if bob_prefix == 0 || bob_prefix > n {
            return Err(Error::IndexOutOfRange { index: bob_prefix, max: n });
        }
        let mut eve = Vec::with_capacity(eve_decodable.len());
        for &j in eve_decodable {
            if j == 0 || j > n {
                return Err(Error::IndexOutOfRange { index: j, max: n });
            }
            if !eve.contains(&j) {
                eve.push(j);
            }
        }
        eve.sort_unstable();
        let (key_capable, neither): (Vec<usize>, Vec<usize>) =
            (1..=n).filter(|j| !eve.contains(j)).partition(|&j| j <= bob_prefix);
        let ordering = eve.iter().chain(&key_capable).chain(&neither).copied().collect();
        Ok(Self {
            eve_decodable: eve,
            key_capable,
            neither,
            ordering,
            ambiguous: false,
        })
    }

    /// Key-capable and undecodable levels together, ascending.
    pub fn not_eve_decodable(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.key_capable.iter().chain(&self.neither).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Three-way split for Eve listening with probability `q` and the receiver
/// decoding levels `1..=bob_prefix`.
pub fn split_levels(
    params: &ChannelParams,
    q: f64,
    design: &CodeDesign,
    levels: &LevelRates,
    bob_prefix: usize,
) -> Result<DecodabilitySplit> {
    let eve = eve_decodable_set(params, q, design, levels)?;
    let mut split = DecodabilitySplit::from_eve_set(design.n(), &eve.levels, bob_prefix)?;
    split.ambiguous = eve.ambiguous;
    Ok(split)
}

/// Position of a two-level rate pair relative to Eve's capacity pentagon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoLevelRegion {
    /// Both levels decodable.
    InsideCapacity,
    /// Only level 2 decodable (level 1 treated as noise).
    Omega1,
    /// Only level 1 decodable (level 2 treated as noise).
    Omega2,
    /// Neither decodable; level 1 above its single-user bound, level 2 below.
    Omega3,
    /// Neither decodable; level 2 above its single-user bound, level 1 below.
    Omega4,
    /// Neither decodable; both above their single-user bounds.
    Omega5,
    /// Neither decodable; both single-user bounds hold but the sum bound fails,
    /// or Eve has no capacity at all.
    OmegaN,
}

impl TwoLevelRegion {
    pub fn name(self) -> &'static str {
        match self {
            TwoLevelRegion::InsideCapacity => "InsideCapacity",
            TwoLevelRegion::Omega1 => "Omega1",
            TwoLevelRegion::Omega2 => "Omega2",
            TwoLevelRegion::Omega3 => "Omega3",
            TwoLevelRegion::Omega4 => "Omega4",
            TwoLevelRegion::Omega5 => "Omega5",
            TwoLevelRegion::OmegaN => "OmegaN",
        }
    }

    /// Levels Eve decodes in this region.
    pub fn eve_levels(self) -> &'static [usize] {
        match self {
            TwoLevelRegion::InsideCapacity => &[1, 2],
            TwoLevelRegion::Omega1 => &[2],
            TwoLevelRegion::Omega2 => &[1],
            _ => &[],
        }
    }
}

/// The five bounds describing Eve's two-level pentagon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelCaps {
    /// Level 1 alone, level 2 already removed.
    pub single1: f64,
    /// Level 2 alone, level 1 already removed.
    pub single2: f64,
    pub sum: f64,
    /// Level 1 with level 2 as noise.
    pub corner1: f64,
    /// Level 2 with level 1 as noise.
    pub corner2: f64,
}

impl TwoLevelCaps {
    pub fn compute(mac: &EveMac, q: f64) -> Result<Self> {
        if mac.n() != 2 {
            return Err(Error::Domain(format!("two-level bounds need n = 2, got {}", mac.n())));
        }
        Ok(Self {
            single1: mac.capacity(q, 0b01, 0)?,
            single2: mac.capacity(q, 0b10, 0)?,
            sum: mac.capacity(q, 0b11, 0)?,
            corner1: mac.capacity(q, 0b01, 0b10)?,
            corner2: mac.capacity(q, 0b10, 0b01)?,
        })
    }

    /// Region of `(r1, r2)`; agrees with [`EveMac::decodable_mask`] on the same bounds.
    pub fn classify(&self, r1: f64, r2: f64) -> TwoLevelRegion {
        if r1 <= self.single1 && r2 <= self.single2 && r1 + r2 <= self.sum {
            return TwoLevelRegion::InsideCapacity;
        }
        let first = r1 <= self.corner1;
        let second = r2 <= self.corner2;
        match (first, second) {
            (true, true) => {
                if r2 > r1 {
                    TwoLevelRegion::Omega1
                } else {
                    TwoLevelRegion::Omega2
                }
            }
            (true, false) => TwoLevelRegion::Omega2,
            (false, true) => TwoLevelRegion::Omega1,
            (false, false) => {
                if self.sum <= 0.0 {
                    return TwoLevelRegion::OmegaN;
                }
                match (r1 > self.single1, r2 > self.single2) {
                    (true, true) => TwoLevelRegion::Omega5,
                    (false, true) => TwoLevelRegion::Omega4,
                    (true, false) => TwoLevelRegion::Omega3,
                    (false, false) => TwoLevelRegion::OmegaN,
                }
            }
        }
    }
}

/// Region of the level rates of a two-level design for Eve listening with probability `q`.
pub fn classify_two_level(
    params: &ChannelParams,
    q: f64,
    design: &CodeDesign,
    levels: &LevelRates,
) -> Result<TwoLevelRegion> {
    check_probability(q)?;
    if design.n() != 2 {
        return Err(Error::Domain(format!("two-level classification needs n = 2, got {}", design.n())));
    }
    check_level_count(design, levels)?;
    let mac = EveMac::new(params, design);
    let caps = TwoLevelCaps::compute(&mac, q)?;
    Ok(caps.classify(levels.rate(1), levels.rate(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ChannelParams {
        ChannelParams::weak_eavesdropper(10.0).unwrap()
    }

    #[test]
    fn capacity_term_trivial_cases() {
        let p = params();
        assert_eq!(eve_capacity_term(&p, 0.0, 5.0, 2.0).unwrap(), 0.0);
        assert_eq!(eve_capacity_term(&p, 1.0, 0.0, 7.0).unwrap(), 0.0);
        assert!(eve_capacity_term(&p, 1.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn reordering_example() {
        let s = DecodabilitySplit::from_eve_set(7, &[1, 4, 6, 7], 4).unwrap();
        assert_eq!(s.key_capable, vec![2, 3]);
        assert_eq!(s.neither, vec![5]);
        assert_eq!(s.ordering, vec![1, 4, 6, 7, 2, 3, 5]);
        assert_eq!(s.not_eve_decodable(), vec![2, 3, 5]);
    }

    #[test]
    fn split_rejects_bad_prefix() {
        assert!(DecodabilitySplit::from_eve_set(3, &[], 0).is_err());
        assert!(DecodabilitySplit::from_eve_set(3, &[], 4).is_err());
        assert!(DecodabilitySplit::from_eve_set(3, &[5], 2).is_err());
    }

    #[test]
    fn all_eve_decodable_leaves_no_key() {
        let s = DecodabilitySplit::from_eve_set(4, &[1, 2, 3, 4], 2).unwrap();
        assert!(s.key_capable.is_empty());
        assert!(s.neither.is_empty());
    }

    #[test]
    fn zero_rates_always_decodable() {
        let d = CodeDesign::new(vec![0.3, 0.6], vec![0.5, 0.5]).unwrap();
        let l = LevelRates::new(vec![0.0; 3]).unwrap();
        let e = eve_decodable_set(&params(), 0.0, &d, &l).unwrap();
        assert_eq!(e.levels, vec![1, 2, 3]);
    }

    #[test]
    fn no_listening_decodes_nothing() {
        let d = CodeDesign::new(vec![0.3, 0.6], vec![0.5, 0.5]).unwrap();
        let l = LevelRates::new(vec![0.1, 0.2, 0.3]).unwrap();
        let e = eve_decodable_set(&params(), 0.0, &d, &l).unwrap();
        assert!(e.levels.is_empty());
        assert!(!e.ambiguous);
    }

    #[test]
    fn two_level_trivial_labels() {
        let d = CodeDesign::new(vec![0.5], vec![0.5]).unwrap();
        let zero = LevelRates::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(
            classify_two_level(&params(), 0.7, &d, &zero).unwrap(),
            TwoLevelRegion::InsideCapacity
        );
        let pos = LevelRates::new(vec![0.4, 0.3]).unwrap();
        assert_eq!(classify_two_level(&params(), 0.0, &d, &pos).unwrap(), TwoLevelRegion::OmegaN);
        let three = CodeDesign::new(vec![0.3, 0.6], vec![0.5, 0.5]).unwrap();
        let l3 = LevelRates::new(vec![0.1, 0.2, 0.3]).unwrap();
        assert!(classify_two_level(&params(), 0.5, &three, &l3).is_err());
    }

    #[test]
    fn lexicographic_order_on_masks() {
        assert!(lex_less(0b0011, 0b0101)); // {1,2} < {1,3}
        assert!(lex_less(0b0101, 0b0110)); // {1,3} < {2,3}
        assert!(!lex_less(0b0110, 0b0101));
        assert!(!lex_less(0b0110, 0b0110));
    }

    #[test]
    fn size_guard() {
        let p = params();
        let mac = EveMac::from_powers(&p, vec![0.1; 21]).unwrap();
        let err = mac.decodable_mask(0.5, &[0.0; 21]).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
    }
}
