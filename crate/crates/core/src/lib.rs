//! Multi-level (block-Markov) Wyner secrecy coding against an eavesdropper
//! that alternates between jamming and listening.
//!
//! The crate computes ergodic rates of superposition codes over Rayleigh
//! fading, the set of levels an eavesdropper can decode, the secret-key rate
//! distilled from the levels it cannot, optimal code designs, and a
//! frame-level simulation of the key ledger.

pub mod cli;
pub mod config;
pub mod error;
pub mod key_rate;
pub mod lp;
pub mod mac_region;
pub mod optimizer;
pub mod protocol;
pub mod quadrature;
pub mod rate_engine;
pub mod table;

pub use error::{Error, Result};
pub use key_rate::{
    solve_game, solve_key_rate, two_level_solve, GameEvaluator, GameSolution, KeyRateSolution, KeyRateStatus,
    TwoLevelSolution, DEFAULT_EPSILON,
};
pub use mac_region::{
    classify_two_level, eve_capacity_term, eve_decodable_set, split_levels, DecodabilitySplit, EveDecodable,
    TwoLevelRegion,
};
pub use rate_engine::{
    fading_log_rate, forwarding_rate, level_rates, mode_mix_rate, wcs_secrecy_rate, wcs_secrecy_rate_with_jam,
    ChannelParams, CodeDesign, LevelRates,
};
pub use optimizer::{optimize_design, sweep, OptimizationResult, SearchMode, SweepRow};
pub use protocol::{run_protocol, EveStrategy, FrameTrace, SimulationConfig, SimulationRun, SimulationSummary};
