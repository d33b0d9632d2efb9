//! Secret-key rates per Eve strategy interval and the resulting game value.

use crate::error::{Error, Result};
use crate::lp::{DummyRateProblem, LpOutcome, MAX_LP_VARIABLES};
use crate::mac_region::{full_mask, mask_to_levels, DecodabilitySplit, EveMac, TwoLevelCaps, TwoLevelRegion};
use crate::rate_engine::{level_rates, wcs_secrecy_rate, ChannelParams, CodeDesign, LevelRates};

/// Default slack below Eve's capacity bounds, in bits per channel use.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyRateStatus {
    Feasible,
    /// Feasible only after dropping the lower bound on the first level's
    /// dummy rate; the game cap then realizes time sharing.
    TimeSharingFallback,
    NoKey,
}

impl KeyRateStatus {
    pub fn name(self) -> &'static str {
        match self {
            KeyRateStatus::Feasible => "feasible",
            KeyRateStatus::TimeSharingFallback => "time-sharing",
            KeyRateStatus::NoKey => "no-key",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateSolution {
    /// `(level, dummy rate)` for every level Eve cannot decode, ascending by level.
    pub dummy_rates: Vec<(usize, f64)>,
    pub key_rate: f64,
    pub status: KeyRateStatus,
    pub split: DecodabilitySplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub optimal_interval: usize,
    pub per_interval_key_rates: Vec<f64>,
    pub secrecy_rate: f64,
}

/// Dummy-rate problem of one interval, with the levels its variables stand for.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalProblem {
    pub split: DecodabilitySplit,
    /// Level of each LP variable, ascending.
    pub variable_levels: Vec<usize>,
    /// Problem including the lower bound on the first level's dummy rate, when that level is a variable.
    pub problem: DummyRateProblem,
    pub has_first_level_bound: bool,
}

impl IntervalProblem {
    /// Same problem without the first level's lower bound.
    pub fn relaxed(&self) -> DummyRateProblem {
        let mut p = self.problem.clone();
        p.lower.iter_mut().for_each(|l| *l = 0.0);
        p
    }
}

/// Evaluates key rates and the game for one channel and design, sharing the
/// level rates and Eve's expectations across intervals.
#[derive(Debug)]
pub struct GameEvaluator {
    params: ChannelParams,
    design: CodeDesign,
    levels: LevelRates,
    mac: EveMac,
    epsilon: f64,
}

impl GameEvaluator {
    pub fn new(params: &ChannelParams, design: &CodeDesign, epsilon: f64) -> Result<Self> {
        let levels = level_rates(params, design)?;
        Self::with_levels(params, design, levels, epsilon)
    }

    pub fn with_levels(params: &ChannelParams, design: &CodeDesign, levels: LevelRates, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if levels.n() != design.n() {
            return Err(Error::Domain(format!(
                "design has {} levels but {} rates were given",
                design.n(),
                levels.n()
            )));
        }
        Ok(Self {
            params: *params,
            design: design.clone(),
            levels,
            mac: EveMac::new(params, design),
            epsilon,
        })
    }

    pub fn levels(&self) -> &LevelRates {
        &self.levels
    }

    pub fn mac(&self) -> &EveMac {
        &self.mac
    }

    pub fn design(&self) -> &CodeDesign {
        &self.design
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn check_interval(&self, i: usize) -> Result<()> {
        let n = self.design.n();
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        Ok(())
    }

    /// Level split for interval `i`: Eve listens with probability `q_i`,
    /// the receiver decodes levels `1..=i`.
    pub fn split(&self, i: usize) -> Result<DecodabilitySplit> {
        self.check_interval(i)?;
        let q = self.design.threshold(i);
        let (mask, ambiguous) = self.mac.decodable_mask(q, self.levels.as_slice())?;
        let mut split = DecodabilitySplit::from_eve_set(self.design.n(), &mask_to_levels(mask), i)?;
        split.ambiguous = ambiguous;
        Ok(split)
    }

    /// The dummy-rate problem of interval `i`, or `None` when no level can carry key.
    pub fn interval_problem(&self, i: usize) -> Result<Option<IntervalProblem>> {
        let split = self.split(i)?;
        if split.key_capable.is_empty() {
            return Ok(None);
        }
        let vars = split.not_eve_decodable();
        let d = vars.len();
        if d > MAX_LP_VARIABLES {
            return Err(Error::SizeGuard {
                what: "levels hidden from Eve",
                size: d,
                limit: MAX_LP_VARIABLES,
            });
        }
        let q = self.design.threshold(i);
        let global = |local: u32| -> u32 {
            (0..d)
                .filter(|j| local & (1 << j) != 0)
                .fold(0u32, |acc, j| acc | 1 << (vars[j] - 1))
        };
        let mut budgets = vec![0.0; 1 << d];
        for local in 1..=full_mask(d) {
            budgets[local as usize] = self.mac.capacity(q, global(local), 0)? - self.epsilon;
        }
        let upper: Vec<f64> = vars.iter().map(|&l| self.levels.rate(l)).collect();
        let has_first_level_bound = vars[0] == 1;
        let mut lower = vec![0.0; d];
        if has_first_level_bound {
            lower[0] = 0.5 * self.levels.rate(1);
        }
        let key_mask = (0..d)
            .filter(|&j| split.key_capable.contains(&vars[j]))
            .fold(0u32, |acc, j| acc | 1 << j);
        Ok(Some(IntervalProblem {
            split,
            variable_levels: vars,
            problem: DummyRateProblem {
                lower,
                upper,
                budgets,
                key_mask,
            },
            has_first_level_bound,
        }))
    }

    /// Largest secret-key rate for interval `i`.
    pub fn solve_key_rate(&self, i: usize) -> Result<KeyRateSolution> {
        let Some(ip) = self.interval_problem(i)? else {
            return Ok(KeyRateSolution {
                dummy_rates: Vec::new(),
                key_rate: 0.0,
                status: KeyRateStatus::NoKey,
                split: self.split(i)?,
            });
        };
        let mut outcome = ip.problem.solve()?;
        let mut status = KeyRateStatus::Feasible;
        if outcome == LpOutcome::Infeasible && ip.has_first_level_bound {
            outcome = ip.relaxed().solve()?;
            status = KeyRateStatus::TimeSharingFallback;
        }
        let LpOutcome::Optimal { x, .. } = outcome else {
            return Ok(KeyRateSolution {
                dummy_rates: Vec::new(),
                key_rate: 0.0,
                status: KeyRateStatus::NoKey,
                split: ip.split,
            });
        };
        let key_rate = ip
            .split
            .key_capable
            .iter()
            .map(|&l| {
                let j = ip.variable_levels.iter().position(|&v| v == l).expect("key level is a variable");
                self.levels.rate(l) - x[j]
            })
            .sum::<f64>()
            .max(0.0);
        Ok(KeyRateSolution {
            dummy_rates: ip.variable_levels.iter().copied().zip(x).collect(),
            key_rate,
            status,
            split: ip.split,
        })
    }

    /// Eve picks the interval minimizing the key rate; the secrecy rate is
    /// that key rate capped at half the first level's rate.
    ///
    /// A single-level design is the plain worst-case Wyner code.
    pub fn solve_game(&self) -> Result<GameSolution> {
        let n = self.design.n();
        if n == 1 {
            let rate = wcs_secrecy_rate(&self.params)?;
            return Ok(GameSolution {
                optimal_interval: 1,
                per_interval_key_rates: vec![rate],
                secrecy_rate: rate,
            });
        }
        let keys = (1..=n)
            .map(|i| self.solve_key_rate(i).map(|s| s.key_rate))
            .collect::<Result<Vec<_>>>()?;
        let cap = 0.5 * self.levels.rate(1);
        let (mut best, mut best_key) = (1, keys[0]);
        for (i, &k) in keys.iter().enumerate().skip(1) {
            if k < best_key {
                best = i + 1;
                best_key = k;
            }
        }
        if best_key >= cap {
            best = 1;
        }
        Ok(GameSolution {
            optimal_interval: best,
            secrecy_rate: cap.min(best_key),
            per_interval_key_rates: keys,
        })
    }
}

/// Key rate of interval `i` for a design, see [`GameEvaluator::solve_key_rate`].
pub fn solve_key_rate(params: &ChannelParams, design: &CodeDesign, i: usize, epsilon: f64) -> Result<KeyRateSolution> {
    GameEvaluator::new(params, design, epsilon)?.solve_key_rate(i)
}

/// Game value of a design with the default epsilon.
pub fn solve_game(params: &ChannelParams, design: &CodeDesign) -> Result<GameSolution> {
    GameEvaluator::new(params, design, DEFAULT_EPSILON)?.solve_game()
}

/// Result of the direct two-level case analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSolution {
    pub secrecy_rate: f64,
    /// Capped secrecy rate when Eve listens with probability `q_1`.
    pub first_branch: f64,
    /// Capped secrecy rate when Eve always listens.
    pub second_branch: f64,
    pub first_region: TwoLevelRegion,
    pub second_region: TwoLevelRegion,
    pub r1: f64,
    pub r2: f64,
}

/// Two-level game value by explicit case analysis over Eve's pentagon, without
/// a linear program. Agrees with [`solve_game`] on two-level designs.
pub fn two_level_solve(params: &ChannelParams, q1: f64, alpha1: f64) -> Result<TwoLevelSolution> {
    two_level_solve_with_epsilon(params, q1, alpha1, DEFAULT_EPSILON)
}

pub fn two_level_solve_with_epsilon(params: &ChannelParams, q1: f64, alpha1: f64, epsilon: f64) -> Result<TwoLevelSolution> {
    let design = CodeDesign::new(vec![q1], vec![alpha1])?;
    let ev = GameEvaluator::new(params, &design, epsilon)?;
    let (r1, r2) = (ev.levels.rate(1), ev.levels.rate(2));
    let eps = epsilon;
    let cap = 0.5 * r1;

    // Eve listens with probability q_1; the receiver only decodes level 1.
    let at_q1 = TwoLevelCaps::compute(ev.mac(), q1)?;
    let first_region = at_q1.classify(r1, r2);
    let first_key = match first_region {
        TwoLevelRegion::InsideCapacity | TwoLevelRegion::Omega2 => 0.0,
        TwoLevelRegion::Omega1 => single_level_key(r1, at_q1.single1 - eps),
        _ => {
            // Level 2 absorbs as much of Eve's sum budget as it can.
            let sum = at_q1.sum - eps;
            let room2 = r2.min(at_q1.single2 - eps);
            let lo = (sum - room2).max(0.0);
            let hi = r1.min(at_q1.single1 - eps).min(sum);
            if room2 >= 0.0 && hi >= 0.0 && lo <= hi {
                r1 - lo
            } else {
                0.0
            }
        }
    };

    // Eve always listens; the receiver decodes both levels.
    let at_one = TwoLevelCaps::compute(ev.mac(), 1.0)?;
    let second_region = at_one.classify(r1, r2);
    let second_key = match second_region {
        TwoLevelRegion::InsideCapacity => 0.0,
        TwoLevelRegion::Omega2 => single_level_key(r2, at_one.single2 - eps),
        TwoLevelRegion::Omega1 => single_level_key(r1, at_one.single1 - eps),
        _ => {
            let sum = at_one.sum - eps;
            let room1 = r1.min(at_one.single1 - eps);
            let room2 = r2.min(at_one.single2 - eps);
            if room1 >= 0.0 && room2 >= 0.0 && sum >= 0.0 && sum <= room1 + room2 {
                r1 + r2 - sum
            } else {
                0.0
            }
        }
    };

    let first_branch = cap.min(first_key.max(0.0));
    let second_branch = cap.min(second_key.max(0.0));
    Ok(TwoLevelSolution {
        secrecy_rate: first_branch.min(second_branch),
        first_branch,
        second_branch,
        first_region,
        second_region,
        r1,
        r2,
    })
}

/// Key left when a single hidden level must carry dummy rate `budget`.
fn single_level_key(rate: f64, budget: f64) -> f64 {
    if budget >= 0.0 && budget <= rate {
        rate - budget
    } else {
        0.0
    }
}
