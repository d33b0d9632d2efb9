//! Frame-level simulation of key chaining: every frame distills a key from
//! the levels hidden from Eve, and the next frames spend banked key bits as a
//! one-time pad on the secret message.

pub mod binning;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::key_rate::{GameEvaluator, DEFAULT_EPSILON};
use crate::rate_engine::{ChannelParams, CodeDesign};

pub use binning::{exact_equivocation, measure_equivocation, BinningRecipe, EveObservation, ToyBinning};

/// How Eve picks her listening probability each frame.
#[derive(Debug, Clone, PartialEq)]
pub enum EveStrategy {
    Constant(f64),
    /// Cycled frame by frame.
    Sequence(Vec<f64>),
    /// Drawn uniformly from `[0, 1)` every frame.
    Uniform,
}

impl EveStrategy {
    fn validate(&self) -> Result<()> {
        let bad = match self {
            EveStrategy::Constant(q) => !(0.0..=1.0).contains(q),
            EveStrategy::Sequence(qs) => qs.is_empty() || qs.iter().any(|q| !(0.0..=1.0).contains(q)),
            EveStrategy::Uniform => false,
        };
        if bad {
            return Err(Error::Domain("Eve's listening probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn q(&self, frame: usize, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            EveStrategy::Constant(q) => *q,
            EveStrategy::Sequence(qs) => qs[frame % qs.len()],
            EveStrategy::Uniform => rng.random::<f64>(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub frames: usize,
    /// Channel uses per frame; scales rates to bits.
    pub symbols_per_frame: f64,
    /// Standard deviation of the receiver's error when estimating Eve's `q`; zero is perfect estimation.
    pub estimation_noise: f64,
    pub seed: u64,
    pub epsilon: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            frames: 1000,
            symbols_per_frame: 1e4,
            estimation_noise: 0.0,
            seed: 0,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTrace {
    /// Starts at 1.
    pub frame_index: usize,
    pub eve_q: f64,
    /// Interval index fed back by the receiver.
    pub interval_index: usize,
    pub key_generated: f64,
    pub message_delivered: f64,
    pub ledger_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub frames: usize,
    pub total_key_bits: f64,
    pub total_message_bits: f64,
    /// Delivered message bits per channel use.
    pub throughput: f64,
    /// Game value of the design.
    pub secrecy_rate: f64,
    /// Frames whose fed-back interval differed from the interval of Eve's
    /// actual `q` (only possible with estimation noise).
    pub deviation_frames: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub trace: Vec<FrameTrace>,
    pub summary: SimulationSummary,
}

/// Simulates `config.frames` frames. The first frame only produces key; each
/// later frame delivers as much message as the banked key allows, up to half
/// the first level's rate (the full Wyner rate for single-level designs).
pub fn run_protocol(
    params: &ChannelParams,
    design: &CodeDesign,
    strategy: &EveStrategy,
    config: &SimulationConfig,
) -> Result<SimulationRun> {
    if config.frames == 0 {
        return Err(Error::Domain("at least one frame is required".into()));
    }
    if !(config.symbols_per_frame > 0.0 && config.symbols_per_frame.is_finite()) {
        return Err(Error::Domain("symbols per frame must be positive".into()));
    }
    strategy.validate()?;
    let noise = if config.estimation_noise > 0.0 {
        Some(
            Normal::new(0.0, config.estimation_noise)
                .map_err(|e| Error::Domain(format!("estimation noise: {e}")))?,
        )
    } else {
        None
    };

    let evaluator = GameEvaluator::new(params, design, config.epsilon)?;
    let game = evaluator.solve_game()?;
    let key_rates = game.per_interval_key_rates.clone();
    let message_cap = if design.n() == 1 {
        game.secrecy_rate
    } else {
        0.5 * evaluator.levels().rate(1)
    };
    let scale = config.symbols_per_frame;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ledger = 0.0f64;
    let mut trace = Vec::with_capacity(config.frames);
    let (mut total_key, mut total_msg, mut deviations) = (0.0, 0.0, 0usize);
    for t in 0..config.frames {
        let q = strategy.q(t, &mut rng);
        let estimate = match &noise {
            Some(d) => (q + d.sample(&mut rng)).clamp(0.0, 1.0),
            None => q,
        };
        let interval = design.interval_of(estimate);
        if interval != design.interval_of(q) {
            deviations += 1;
        }
        let message = if t == 0 { 0.0 } else { ledger.min(scale * message_cap) };
        let key = scale * key_rates[interval - 1];
        ledger = (ledger - message).max(0.0) + key;
        total_key += key;
        total_msg += message;
        trace.push(FrameTrace {
            frame_index: t + 1,
            eve_q: q,
            interval_index: interval,
            key_generated: key,
            message_delivered: message,
            ledger_after: ledger,
        });
    }
    Ok(SimulationRun {
        summary: SimulationSummary {
            frames: config.frames,
            total_key_bits: total_key,
            total_message_bits: total_msg,
            throughput: total_msg / (config.frames as f64 * scale),
            secrecy_rate: game.secrecy_rate,
            deviation_frames: deviations,
        },
        trace,
    })
}
