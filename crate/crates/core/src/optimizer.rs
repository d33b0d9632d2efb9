//! Design search: a coarse grid over thresholds and power splits followed by
//! compass (pattern) search around the best grid point.
//!
//! Grid evaluation runs on rayon; set `BMW_WORKERS` to bound the worker
//! count. Results do not depend on scheduling.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::key_rate::{GameEvaluator, DEFAULT_EPSILON};
use crate::rate_engine::{ChannelParams, CodeDesign};

/// Environment variable bounding the number of grid-evaluation threads.
pub const WORKERS_ENV: &str = "BMW_WORKERS";

const Q_MIN: f64 = 1e-6;
const Q_MAX: f64 = 1.0 - 1e-6;
const COINCIDENT_SHIFT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    /// Thresholds fixed at `i/n`; only power splits are searched.
    Uniform,
    Free,
}

impl SearchMode {
    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Uniform => "uniform",
            SearchMode::Free => "free",
        }
    }
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(SearchMode::Uniform),
            "free" => Ok(SearchMode::Free),
            other => Err(Error::Config(format!("unknown mode `{other}` (expected uniform or free)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Grid points per dimension.
    pub grid_points: usize,
    /// Pattern search stops once every step is below this.
    pub min_step: f64,
    pub epsilon: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            grid_points: 21,
            min_step: 1e-4,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub design: CodeDesign,
    pub secrecy_rate: f64,
    pub mode: SearchMode,
    /// Distinct designs evaluated.
    pub evaluations: usize,
    /// Pattern-search steps at termination, threshold steps first (free mode).
    pub final_steps: Vec<f64>,
}

/// Number of grid points evaluated before refinement.
pub fn grid_size(n: usize, mode: SearchMode, opts: &OptimizerOptions) -> usize {
    if n <= 1 {
        return 1;
    }
    let k = n - 1;
    let alphas = opts.grid_points.saturating_pow(k as u32);
    match mode {
        SearchMode::Uniform => alphas,
        SearchMode::Free => binomial(opts.grid_points, k).saturating_mul(alphas).saturating_add(alphas),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Best design for `n` levels with at most `budget` distinct evaluations.
pub fn optimize_design(params: &ChannelParams, n: usize, mode: SearchMode, budget: usize) -> Result<OptimizationResult> {
    optimize_design_with(params, n, mode, budget, &OptimizerOptions::default())
}

pub fn optimize_design_with(
    params: &ChannelParams,
    n: usize,
    mode: SearchMode,
    budget: usize,
    opts: &OptimizerOptions,
) -> Result<OptimizationResult> {
    if n == 0 {
        return Err(Error::InvalidDesign("at least one level is required".into()));
    }
    if opts.grid_points < 2 || opts.min_step.is_nan() || opts.min_step <= 0.0 {
        return Err(Error::Domain("grid needs at least 2 points and a positive minimum step".into()));
    }
    let grid = grid_size(n, mode, opts);
    if budget < grid {
        return Err(Error::BudgetTooSmall { budget, grid });
    }
    let mut search = Search::new(params, n, budget, opts);
    with_workers(|| match mode {
        SearchMode::Uniform => search.uniform(),
        SearchMode::Free => search.free(),
    })
}

fn with_workers<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let workers = std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    match workers {
        Some(k) if k > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} workers: {e}")))?
            .install(f),
        _ => f(),
    }
}

/// Point in search space: thresholds (free mode only) then alphas.
type Point = Vec<f64>;

struct Search<'a> {
    params: &'a ChannelParams,
    n: usize,
    budget: usize,
    opts: &'a OptimizerOptions,
    cache: HashMap<Vec<u64>, f64>,
}

impl<'a> Search<'a> {
    fn new(params: &'a ChannelParams, n: usize, budget: usize, opts: &'a OptimizerOptions) -> Self {
        Self {
            params,
            n,
            budget,
            opts,
            cache: HashMap::new(),
        }
    }

    fn objective(params: &ChannelParams, design: &CodeDesign, epsilon: f64) -> Result<f64> {
        Ok(GameEvaluator::new(params, design, epsilon)?.solve_game()?.secrecy_rate)
    }

    fn key(design: &CodeDesign) -> Vec<u64> {
        design.thresholds().iter().chain(design.alphas()).map(|v| v.to_bits()).collect()
    }

    /// Evaluates designs in parallel, in order; already cached designs are not recomputed.
    fn evaluate_all(&mut self, designs: &[CodeDesign]) -> Result<Vec<f64>> {
        let missing: Vec<&CodeDesign> = designs.iter().filter(|d| !self.cache.contains_key(&Self::key(d))).collect();
        let params = *self.params;
        let eps = self.opts.epsilon;
        let values = missing
            .par_iter()
            .map(|d| Self::objective(&params, d, eps))
            .collect::<Result<Vec<_>>>()?;
        for (d, v) in missing.into_iter().zip(values) {
            self.cache.insert(Self::key(d), v);
        }
        Ok(designs.iter().map(|d| self.cache[&Self::key(d)]).collect())
    }

    fn evaluate(&mut self, design: &CodeDesign) -> Result<f64> {
        Ok(self.evaluate_all(std::slice::from_ref(design))?[0])
    }

    fn alpha_grid(&self) -> Vec<Vec<f64>> {
        let g = self.opts.grid_points;
        let values: Vec<f64> = (0..g).map(|k| k as f64 / (g - 1) as f64).collect();
        product(&values, self.n - 1)
    }

    fn threshold_grid(&self) -> Vec<Vec<f64>> {
        let g = self.opts.grid_points;
        let values: Vec<f64> = (0..g).map(|k| 0.01 + 0.98 * k as f64 / (g - 1) as f64).collect();
        increasing_tuples(&values, self.n - 1)
    }

    fn q_step(&self) -> f64 {
        0.98 / (self.opts.grid_points - 1) as f64
    }

    fn alpha_step(&self) -> f64 {
        1.0 / (self.opts.grid_points - 1) as f64
    }

    fn best_of(designs: Vec<CodeDesign>, values: &[f64]) -> (CodeDesign, f64) {
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[best] {
                best = i;
            }
        }
        (designs[best].clone(), values[best])
    }

    fn single(&mut self, mode: SearchMode) -> Result<OptimizationResult> {
        let design = CodeDesign::single();
        let secrecy_rate = self.evaluate(&design)?;
        Ok(OptimizationResult {
            design,
            secrecy_rate,
            mode,
            evaluations: self.cache.len(),
            final_steps: Vec::new(),
        })
    }

    fn uniform(&mut self) -> Result<OptimizationResult> {
        if self.n == 1 {
            return self.single(SearchMode::Uniform);
        }
        let designs = self
            .alpha_grid()
            .into_iter()
            .map(CodeDesign::uniform)
            .collect::<Result<Vec<_>>>()?;
        let values = self.evaluate_all(&designs)?;
        let (start, _) = Self::best_of(designs, &values);
        let steps = vec![self.alpha_step(); self.n - 1];
        let point = start.alphas().to_vec();
        self.refine(point, steps, SearchMode::Uniform)
    }

    fn free(&mut self) -> Result<OptimizationResult> {
        if self.n == 1 {
            return self.single(SearchMode::Free);
        }
        let uniform = self.uniform()?;
        let mut designs = Vec::new();
        for q in self.threshold_grid() {
            for a in self.alpha_grid() {
                designs.push(CodeDesign::new(q.clone(), a)?);
            }
        }
        let values = self.evaluate_all(&designs)?;
        let (grid_best, grid_value) = Self::best_of(designs, &values);
        let start = if uniform.secrecy_rate > grid_value {
            uniform.design
        } else {
            grid_best
        };
        let k = self.n - 1;
        let mut steps = vec![self.q_step(); k];
        steps.extend(vec![self.alpha_step(); k]);
        let point: Point = start.thresholds().iter().chain(start.alphas()).copied().collect();
        self.refine(point, steps, SearchMode::Free)
    }

    /// Maps a search point to a design; `None` when thresholds cross.
    fn design_at(&self, point: &[f64], mode: SearchMode) -> Result<Option<CodeDesign>> {
        match mode {
            SearchMode::Uniform => CodeDesign::uniform(point.to_vec()).map(Some),
            SearchMode::Free => {
                let k = self.n - 1;
                let mut q = point[..k].to_vec();
                for j in 1..k {
                    if q[j] < q[j - 1] {
                        return Ok(None);
                    }
                    if q[j] == q[j - 1] {
                        q[j] = q[j - 1] + COINCIDENT_SHIFT;
                    }
                }
                if q[k - 1] >= 1.0 {
                    return Ok(None);
                }
                CodeDesign::new(q, point[k..].to_vec()).map(Some)
            }
        }
    }

    fn bounds(&self, coord: usize, mode: SearchMode) -> (f64, f64) {
        match mode {
            SearchMode::Free if coord < self.n - 1 => (Q_MIN, Q_MAX),
            _ => (0.0, 1.0),
        }
    }

    /// Compass search: poll every coordinate in both directions, move to the
    /// best strict improvement, otherwise halve all steps.
    fn refine(&mut self, mut point: Point, mut steps: Vec<f64>, mode: SearchMode) -> Result<OptimizationResult> {
        let mut design = self.design_at(&point, mode)?.expect("start point is a valid design");
        let mut value = self.evaluate(&design)?;
        while steps.iter().any(|&s| s >= self.opts.min_step) {
            let mut candidates: Vec<(Point, CodeDesign)> = Vec::new();
            for c in 0..point.len() {
                let (lo, hi) = self.bounds(c, mode);
                for dir in [1.0, -1.0] {
                    let mut p = point.clone();
                    p[c] = (p[c] + dir * steps[c]).clamp(lo, hi);
                    if p[c] == point[c] {
                        continue;
                    }
                    if let Some(d) = self.design_at(&p, mode)? {
                        candidates.push((p, d));
                    }
                }
            }
            let fresh = candidates
                .iter()
                .filter(|(_, d)| !self.cache.contains_key(&Self::key(d)))
                .count();
            if self.cache.len() + fresh > self.budget {
                break;
            }
            let designs: Vec<CodeDesign> = candidates.iter().map(|(_, d)| d.clone()).collect();
            let values = self.evaluate_all(&designs)?;
            let mut best: Option<usize> = None;
            for (i, &v) in values.iter().enumerate() {
                if v > best.map_or(value, |b| values[b]) {
                    best = Some(i);
                }
            }
            match best {
                Some(b) => {
                    point = candidates[b].0.clone();
                    design = candidates[b].1.clone();
                    value = values[b];
                }
                None => steps.iter_mut().for_each(|s| *s *= 0.5),
            }
        }
        Ok(OptimizationResult {
            design,
            secrecy_rate: value,
            mode,
            evaluations: self.cache.len(),
            final_steps: steps,
        })
    }
}

fn product(values: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

fn increasing_tuples(values: &[f64], k: usize) -> Vec<Vec<f64>> {
    fn rec(values: &[f64], start: usize, k: usize, prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if k == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in start..values.len() {
            prefix.push(values[i]);
            rec(values, i + 1, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(values, 0, k, &mut Vec::new(), &mut out);
    out
}

/// One optimized point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub power: f64,
    pub n: usize,
    pub result: OptimizationResult,
}

/// Optimizes every `(power, n)` pair; rows are ordered by power, then by `n`.
pub fn sweep(
    params_base: &ChannelParams,
    n_list: &[usize],
    power_grid: &[f64],
    mode: SearchMode,
    budget: usize,
) -> Result<Vec<SweepRow>> {
    if n_list.is_empty() || power_grid.is_empty() {
        return Err(Error::Domain("sweep needs at least one level count and one power".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len() * power_grid.len());
    for &power in power_grid {
        let params = params_base.with_power(power)?;
        for &n in n_list {
            let result = optimize_design(&params, n, mode, budget)?;
            rows.push(SweepRow { power, n, result });
        }
    }
    Ok(rows)
}
