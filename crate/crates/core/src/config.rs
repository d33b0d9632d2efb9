//! Flat `key = value` run configuration. Lines starting with `#` are
//! comments; list values are comma-separated.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::key_rate::DEFAULT_EPSILON;
use crate::optimizer::SearchMode;
use crate::protocol::EveStrategy;
use crate::rate_engine::{ChannelParams, CodeDesign};

/// Keys accepted in configuration files and `--set` overrides.
pub const KEYS: &[&str] = &[
    "lambda_m",
    "lambda_w",
    "power",
    "jam",
    "noise_var",
    "n",
    "thresholds",
    "alphas",
    "mode",
    "power_grid",
    "n_list",
    "seed",
    "output",
    "frames",
    "eve_q",
    "budget",
    "epsilon",
    "n_eff",
    "interval",
    "estimation_noise",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda_m: f64,
    pub lambda_w: f64,
    pub power: f64,
    pub jam: f64,
    pub noise_var: f64,
    pub n: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub mode: Option<SearchMode>,
    pub power_grid: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub frames: usize,
    pub eve_q: Option<EveStrategy>,
    pub budget: usize,
    pub epsilon: f64,
    pub n_eff: f64,
    pub interval: Option<usize>,
    pub estimation_noise: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda_m: 0.2,
            lambda_w: 1.5,
            power: 10.0,
            jam: 5.0,
            noise_var: 1.0,
            n: None,
            thresholds: None,
            alphas: None,
            mode: None,
            power_grid: None,
            n_list: None,
            seed: 0,
            output: None,
            frames: 1000,
            eve_q: None,
            budget: 200_000,
            epsilon: DEFAULT_EPSILON,
            n_eff: 1e4,
            interval: None,
            estimation_noise: 0.0,
        }
    }
}

/// How the command obtains its code design.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignSource {
    Explicit(CodeDesign),
    Optimize { n: usize, mode: SearchMode },
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a nonnegative integer")))
}

fn parse_list<T>(key: &str, v: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| item(key, s)).collect()
}

impl RunConfig {
    /// Parses configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.apply_assignment(line)
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(&e))))?;
        }
        Ok(())
    }

    /// Applies one `key = value` (or `key=value`) assignment.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected `key = value`, got `{assignment}`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lambda_m" => self.lambda_m = parse_f64(key, value)?,
            "lambda_w" => self.lambda_w = parse_f64(key, value)?,
            "power" => self.power = parse_f64(key, value)?,
            "jam" => self.jam = parse_f64(key, value)?,
            "noise_var" => self.noise_var = parse_f64(key, value)?,
            "n" => self.n = Some(parse_usize(key, value)?),
            "thresholds" => self.thresholds = Some(parse_list(key, value, parse_f64)?),
            "alphas" => self.alphas = Some(parse_list(key, value, parse_f64)?),
            "mode" => self.mode = Some(value.parse().map_err(|e| Error::Config(strip_prefix(&e)))?),
            "power_grid" => self.power_grid = Some(parse_list(key, value, parse_f64)?),
            "n_list" => self.n_list = Some(parse_list(key, value, parse_usize)?),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("`seed`: `{value}` is not an unsigned integer")))?
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "frames" => self.frames = parse_usize(key, value)?,
            "eve_q" => {
                self.eve_q = Some(if value.eq_ignore_ascii_case("uniform") {
                    EveStrategy::Uniform
                } else {
                    let qs = parse_list(key, value, parse_f64)?;
                    match qs.as_slice() {
                        [] => return Err(Error::Config("`eve_q` is empty".into())),
                        [q] => EveStrategy::Constant(*q),
                        _ => EveStrategy::Sequence(qs),
                    }
                })
            }
            "budget" => self.budget = parse_usize(key, value)?,
            "epsilon" => self.epsilon = parse_f64(key, value)?,
            "n_eff" => self.n_eff = parse_f64(key, value)?,
            "interval" => self.interval = Some(parse_usize(key, value)?),
            "estimation_noise" => self.estimation_noise = parse_f64(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}` (known keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.lambda_m, self.lambda_w, self.power, self.jam, self.noise_var)
    }

    /// Resolves the design: an explicit design and an optimizer mode are
    /// mutually exclusive; without either, only `n = 1` is meaningful.
    pub fn design_source(&self) -> Result<DesignSource> {
        let explicit = self.thresholds.is_some() || self.alphas.is_some();
        if explicit && self.mode.is_some() {
            return Err(Error::InvalidDesign(
                "an explicit design (thresholds/alphas) and an optimizer mode are mutually exclusive".into(),
            ));
        }
        if explicit {
            let design = CodeDesign::new(
                self.thresholds.clone().unwrap_or_default(),
                self.alphas.clone().unwrap_or_default(),
            )?;
            if let Some(n) = self.n {
                if n != design.n() {
                    return Err(Error::InvalidDesign(format!(
                        "n = {n} but the explicit design has {} levels",
                        design.n()
                    )));
                }
            }
            return Ok(DesignSource::Explicit(design));
        }
        let n = self.n.unwrap_or(1);
        match self.mode {
            Some(mode) => Ok(DesignSource::Optimize { n, mode }),
            None if n == 1 => Ok(DesignSource::Explicit(CodeDesign::single())),
            None => Err(Error::InvalidDesign(format!(
                "n = {n} needs either thresholds/alphas or an optimizer mode"
            ))),
        }
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}
