//! Command-line front end for the `bmw` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{DesignSource, RunConfig};
use crate::error::{Error, Result};
use crate::key_rate::GameEvaluator;
use crate::optimizer::{optimize_design, sweep, OptimizationResult, SearchMode, SweepRow};
use crate::protocol::{run_protocol, EveStrategy, SimulationConfig, SimulationRun};
use crate::rate_engine::{wcs_secrecy_rate, ChannelParams, CodeDesign};
use crate::table::{format_list, format_number as num, Table};

#[derive(Debug, Parser)]
#[command(name = "bmw", version, about = "Multi-level Wyner secrecy coding against a jamming eavesdropper")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file with one `key = value` per line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Overrides a configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Writes the CSV here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Worst-case Wyner rate, level powers and level rates.
    Rate,
    /// Eve-decodable, key-capable and undecodable levels per interval.
    DecodeSet,
    /// Dummy-rate allocation and key rate per interval.
    Keyrate,
    /// Eve's optimal interval and the resulting secrecy rate.
    Game,
    /// Optimized design for one power.
    Optimize,
    /// Optimized designs over a grid of powers and level counts.
    Sweep,
    /// Frame-by-frame key ledger trace.
    Simulate,
}

/// Output of one command: the CSV document and an optional human summary for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub csv: String,
    pub summary: Option<String>,
}

/// Loads the configuration file and applies overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for s in &cli.set {
        cfg.apply_assignment(s)?;
    }
    if let Some(out) = &cli.output {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

/// Parses, runs and writes output; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bmw: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = execute(cli.command, &cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &out.csv)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.csv.as_bytes())?;
        }
    }
    if let Some(s) = out.summary {
        eprint!("{s}");
    }
    Ok(())
}

fn resolve_design(params: &ChannelParams, cfg: &RunConfig) -> Result<CodeDesign> {
    match cfg.design_source()? {
        DesignSource::Explicit(d) => Ok(d),
        DesignSource::Optimize { n, mode } => Ok(optimize_design(params, n, mode, cfg.budget)?.design),
    }
}

fn intervals(cfg: &RunConfig, n: usize) -> Result<Vec<usize>> {
    match cfg.interval {
        Some(i) if i == 0 || i > n => Err(Error::IndexOutOfRange { index: i, max: n }),
        Some(i) => Ok(vec![i]),
        None => Ok((1..=n).collect()),
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<CommandOutput> {
    let params = cfg.channel()?;
    let csv = match command {
        Command::Rate => rate_table(&params, &resolve_design(&params, cfg)?)?,
        Command::DecodeSet => decode_set_table(&params, &resolve_design(&params, cfg)?, cfg)?,
        Command::Keyrate => keyrate_table(&params, &resolve_design(&params, cfg)?, cfg)?,
        Command::Game => game_table(&params, &resolve_design(&params, cfg)?, cfg)?,
        Command::Optimize => {
            let (n, mode) = optimizer_target(cfg)?;
            let r = optimize_design(&params, n, mode, cfg.budget)?;
            optimize_table(params.power(), n, &r)
        }
        Command::Sweep => {
            let (_, mode) = optimizer_target(cfg)?;
            let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![1, 2]);
            let powers = cfg.power_grid.clone().unwrap_or_else(|| vec![params.power()]);
            sweep_table(&sweep(&params, &n_list, &powers, mode, cfg.budget)?)
        }
        Command::Simulate => {
            let design = resolve_design(&params, cfg)?;
            let run = simulate(&params, &design, cfg)?;
            let s = &run.summary;
            let summary = format!(
                "frames = {}\ntotal_key_bits = {}\ntotal_message_bits = {}\nthroughput = {}\nsecrecy_rate = {}\ndeviation_frames = {}\n",
                s.frames,
                num(s.total_key_bits),
                num(s.total_message_bits),
                num(s.throughput),
                num(s.secrecy_rate),
                s.deviation_frames
            );
            return Ok(CommandOutput {
                csv: trace_table(&run).to_csv(),
                summary: Some(summary),
            });
        }
    };
    Ok(CommandOutput {
        csv: csv.to_csv(),
        summary: None,
    })
}

fn optimizer_target(cfg: &RunConfig) -> Result<(usize, SearchMode)> {
    if cfg.thresholds.is_some() || cfg.alphas.is_some() {
        return Err(Error::InvalidDesign("optimization does not take an explicit design".into()));
    }
    Ok((cfg.n.unwrap_or(2), cfg.mode.unwrap_or(SearchMode::Free)))
}

pub fn rate_table(params: &ChannelParams, design: &CodeDesign) -> Result<Table> {
    let ev = GameEvaluator::new(params, design, crate::key_rate::DEFAULT_EPSILON)?;
    let mut t = Table::new(["quantity", "level", "value"]);
    t.push(vec!["wcs_secrecy_rate".into(), String::new(), num(wcs_secrecy_rate(params)?)]);
    let powers = design.level_powers(params.power());
    for (j, p) in powers.iter().enumerate() {
        t.push(vec!["level_power".into(), (j + 1).to_string(), num(*p)]);
    }
    for (j, r) in ev.levels().as_slice().iter().enumerate() {
        t.push(vec!["level_rate".into(), (j + 1).to_string(), num(*r)]);
    }
    Ok(t)
}

pub fn decode_set_table(params: &ChannelParams, design: &CodeDesign, cfg: &RunConfig) -> Result<Table> {
    let ev = GameEvaluator::new(params, design, cfg.epsilon)?;
    let mut t = Table::new([
        "interval",
        "q",
        "eve_decodable",
        "key_capable",
        "neither",
        "ordering",
        "ambiguous",
    ]);
    for i in intervals(cfg, design.n())? {
        let s = ev.split(i)?;
        t.push(vec![
            i.to_string(),
            num(design.threshold(i)),
            format_list(&s.eve_decodable),
            format_list(&s.key_capable),
            format_list(&s.neither),
            format_list(&s.ordering),
            s.ambiguous.to_string(),
        ]);
    }
    Ok(t)
}

pub fn keyrate_table(params: &ChannelParams, design: &CodeDesign, cfg: &RunConfig) -> Result<Table> {
    let ev = GameEvaluator::new(params, design, cfg.epsilon)?;
    let mut t = Table::new(["interval", "q", "status", "key_rate", "dummy_levels", "dummy_rates"]);
    for i in intervals(cfg, design.n())? {
        let s = ev.solve_key_rate(i)?;
        let levels: Vec<usize> = s.dummy_rates.iter().map(|(l, _)| *l).collect();
        let rates: Vec<String> = s.dummy_rates.iter().map(|(_, r)| num(*r)).collect();
        t.push(vec![
            i.to_string(),
            num(design.threshold(i)),
            s.status.name().into(),
            num(s.key_rate),
            format_list(&levels),
            rates.join(" "),
        ]);
    }
    Ok(t)
}

pub fn game_table(params: &ChannelParams, design: &CodeDesign, cfg: &RunConfig) -> Result<Table> {
    let g = GameEvaluator::new(params, design, cfg.epsilon)?.solve_game()?;
    let mut header = vec!["optimal_interval".to_string(), "eve_q".into(), "secrecy_rate".into()];
    header.extend((1..=design.n()).map(|i| format!("key_rate_{i}")));
    let mut t = Table::new(header);
    let mut row = vec![
        g.optimal_interval.to_string(),
        num(design.threshold(g.optimal_interval)),
        num(g.secrecy_rate),
    ];
    row.extend(g.per_interval_key_rates.iter().map(|&k| num(k)));
    t.push(row);
    Ok(t)
}

fn design_header(max_n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..max_n).map(|i| format!("q_{i}")).collect();
    h.extend((1..max_n).map(|i| format!("alpha_{i}")));
    h
}

fn design_cells(design: &CodeDesign, max_n: usize) -> Vec<String> {
    let pad = |v: &[f64]| -> Vec<String> {
        let mut cells: Vec<String> = v.iter().map(|&x| num(x)).collect();
        cells.resize(max_n - 1, String::new());
        cells
    };
    let mut cells = pad(design.thresholds());
    cells.extend(pad(design.alphas()));
    cells
}

pub fn optimize_table(power: f64, n: usize, r: &OptimizationResult) -> Table {
    let mut header = vec![
        "power".to_string(),
        "n".into(),
        "mode".into(),
        "secrecy_rate".into(),
        "evaluations".into(),
    ];
    header.extend(design_header(n));
    let mut t = Table::new(header);
    let mut row = vec![
        num(power),
        n.to_string(),
        r.mode.name().into(),
        num(r.secrecy_rate),
        r.evaluations.to_string(),
    ];
    row.extend(design_cells(&r.design, n));
    t.push(row);
    t
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let max_n = rows.iter().map(|r| r.n).max().unwrap_or(1);
    let mut header = vec!["power".to_string(), "n".into(), "mode".into(), "secrecy_rate".into()];
    header.extend(design_header(max_n));
    let mut t = Table::new(header);
    for r in rows {
        let mut row = vec![
            num(r.power),
            r.n.to_string(),
            r.result.mode.name().into(),
            num(r.result.secrecy_rate),
        ];
        row.extend(design_cells(&r.result.design, max_n));
        t.push(row);
    }
    t
}

/// Runs the simulation described by `cfg`. Without `eve_q`, Eve plays the
/// constant strategy of her optimal interval.
pub fn simulate(params: &ChannelParams, design: &CodeDesign, cfg: &RunConfig) -> Result<SimulationRun> {
    let strategy = match &cfg.eve_q {
        Some(s) => s.clone(),
        None => {
            let g = GameEvaluator::new(params, design, cfg.epsilon)?.solve_game()?;
            EveStrategy::Constant(design.threshold(g.optimal_interval))
        }
    };
    let sim = SimulationConfig {
        frames: cfg.frames,
        symbols_per_frame: cfg.n_eff,
        estimation_noise: cfg.estimation_noise,
        seed: cfg.seed,
        epsilon: cfg.epsilon,
    };
    run_protocol(params, design, &strategy, &sim)
}

pub fn trace_table(run: &SimulationRun) -> Table {
    let mut t = Table::new(["frame", "q", "interval", "key_bits", "msg_bits", "ledger"]);
    for f in &run.trace {
        t.push(vec![
            f.frame_index.to_string(),
            num(f.eve_q),
            f.interval_index.to_string(),
            num(f.key_generated),
            num(f.message_delivered),
            num(f.ledger_after),
        ]);
    }
    t
}
