//! Command implementations behind the `mixprobe` binary.
//!
//! Every command writes into `<out_dir>/<command>-<hash>`, where the hash
//! covers the command and its full configuration, so reruns with the same
//! inputs overwrite the same files with identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::dataset::{build_dataset, config_hash, read_manifest, read_split, write_dataset, LinkRecord, SPLITS};
use crate::encoding::SEQUENCE_LENGTHS;
use crate::error::{Error, Result};
use crate::game::masked_group;
use crate::metrics::aggregate;
use crate::sweep::{run_sweep, write_fig3, write_fig4};
use crate::traffic::{assign_contacts, latency_stats, run_burn_in, LatencyStats, Population, Simulator};
use crate::seed;

#[derive(Debug, Parser)]
#[command(name = "mixprobe", version, about = "Mix network privacy measurement")]
pub struct Cli {
    /// TOML experiment config. Defaults apply when omitted.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set game.strategy.n=50`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Master seed (same as `--set seed=N`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output root (same as `--set out_dir=DIR`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Burn in one network and export its link trace.
    Simulate,
    /// Play game rounds and write a train/validation/test dataset.
    GenDataset,
    /// Score a dataset with the baseline attacker and write the report.
    Metrics {
        /// Dataset directory written by gen-dataset.
        dataset: PathBuf,
    },
    /// Latency versus privacy over the configured strategy grid.
    Sweep,
}

/// Exit status for an error: 2 for bad configuration, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::TooFewUsers(_) | Error::BadLength(_) | Error::Anytrust(_) | Error::MaskTooLong { .. } => 2,
        _ => 3,
    }
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(o) = &cli.out {
        overrides.push(format!("out_dir={}", toml::Value::String(o.display().to_string())));
    }
    ExperimentConfig::load(cli.config.as_deref(), &overrides)
}

/// Runs the parsed command and returns the directory it wrote.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Simulate => cmd_simulate(&config),
        Command::GenDataset => cmd_gen_dataset(&config),
        Command::Metrics { dataset } => cmd_metrics(&config, dataset),
        Command::Sweep => cmd_sweep(&config),
    }
}

#[derive(Serialize)]
struct RunManifest<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config_hash: String,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    details: T,
}

fn run_dir(config: &ExperimentConfig, command: &str, extra: &str) -> Result<(PathBuf, String)> {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(serde_json::to_vec(config)?);
    h.update(extra.as_bytes());
    let hash = hex::encode(h.finalize());
    let dir = config.out_dir.join(format!("{command}-{}", &hash[..12]));
    fs::create_dir_all(&dir)?;
    Ok((dir, hash))
}

fn write_manifest<T: Serialize>(dir: &Path, command: &str, hash: String, config: &ExperimentConfig, details: T) -> Result<()> {
    let m = RunManifest { command, seed: config.seed, config_hash: hash, config, details };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateDetails {
    burn_in_offset: f64,
    duration: u64,
    events: usize,
    delivered: usize,
    latency: Option<LatencyStats>,
    link_map: Vec<LinkRecord>,
}

/// Burns in the configured network with every user active, records
/// `simulate.duration` seconds and writes `trace.jsonl`, `ledger.jsonl`
/// and `manifest.json`.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<PathBuf> {
    config.validate()?;
    let g = &config.game;
    let topology = g.topology.build(g.users, g.strategy)?;
    topology.check_anytrust()?;
    let population = assign_contacts(Population::uniform(g.users, g.rate)?, seed::derive(config.seed, &["contacts"]))?;
    let mut sim = Simulator::new(topology, population, config.seed)?;
    run_burn_in(&mut sim, &g.burn_in, config.seed)?;
    sim.start_recording();
    sim.run_for(config.simulate.duration)?;
    let trace = sim.finish();

    let (dir, hash) = run_dir(config, "simulate", "")?;
    write_jsonl(&dir.join("trace.jsonl"), &trace.events)?;
    write_jsonl(&dir.join("ledger.jsonl"), &trace.ledger)?;
    let links = sim.topology().links();
    let details = SimulateDetails {
        burn_in_offset: trace.start,
        duration: config.simulate.duration,
        events: trace.events.len(),
        delivered: trace.deliveries.len(),
        latency: latency_stats(&trace).ok(),
        link_map: links.iter().map(|(id, l)| LinkRecord { id: id.0, from: l.from, to: l.to }).collect(),
    };
    write_manifest(&dir, "simulate", hash, config, details)?;
    Ok(dir)
}

/// Builds the dataset described by `game` and `dataset`.
pub fn cmd_gen_dataset(config: &ExperimentConfig) -> Result<PathBuf> {
    config.validate()?;
    let data = build_dataset(&config.game, config.dataset.samples, config.dataset.ratios, config.seed)?;
    let (dir, _) = run_dir(config, "gen-dataset", "")?;
    write_dataset(&dir, &config.game, config.dataset.ratios, config.seed, &data)?;
    Ok(dir)
}

/// Scores every split of a dataset at each configured observation length
/// and writes `report.csv` and `report.json` into a metrics run directory.
pub fn cmd_metrics(config: &ExperimentConfig, dataset: &Path) -> Result<PathBuf> {
    let manifest = read_manifest(dataset).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", dataset.display()))),
        other => other,
    })?;
    if config_hash(&manifest.config)? != manifest.config_hash {
        return Err(Error::config("dataset manifest hash does not match its config"));
    }
    let mut instances = Vec::new();
    for split in SPLITS {
        instances.extend(read_split(dataset, &manifest, split)?);
    }
    let label = manifest.config.strategy.label();
    let lengths: Vec<usize> = SEQUENCE_LENGTHS
        .iter()
        .copied()
        .filter(|l| config.metrics.lengths.contains(l) && *l <= manifest.seq_len)
        .collect();
    if lengths.is_empty() {
        return Err(Error::config(format!("no metrics length fits sequences of {}", manifest.seq_len)));
    }
    let groups = lengths
        .iter()
        .map(|&l| masked_group(&instances, &label, l, config.seed))
        .collect::<Result<Vec<_>>>()?;
    let report = aggregate(&groups)?;

    let (dir, hash) = run_dir(config, "metrics", &manifest.config_hash)?;
    report.write_csv(fs::File::create(dir.join("report.csv"))?)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    #[derive(Serialize)]
    struct Details<'a> {
        dataset_config_hash: &'a str,
        samples: usize,
        lengths: &'a [usize],
    }
    let details = Details { dataset_config_hash: &manifest.config_hash, samples: instances.len(), lengths: &lengths };
    write_manifest(&dir, "metrics", hash, config, details)?;
    Ok(dir)
}

/// Writes `fig3.csv` (accuracy against latency-aligned x) and `fig4.csv`
/// (measured latency mean and spread).
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<PathBuf> {
    config.validate()?;
    let points = run_sweep(&config.game, &config.sweep, config.seed)?;
    let (dir, hash) = run_dir(config, "sweep", "")?;
    write_fig3(&points, fs::File::create(dir.join("fig3.csv"))?)?;
    write_fig4(&points, fs::File::create(dir.join("fig4.csv"))?)?;
    write_manifest(&dir, "sweep", hash, config, serde_json::json!({ "points": points.len() }))?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::config("x")), 2);
        assert_eq!(exit_code(&Error::TooFewUsers(2)), 2);
        assert_eq!(exit_code(&Error::Insufficient("x".into())), 3);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
    }

    #[test]
    fn arguments_parse() {
        let cli = Cli::try_parse_from(["mixprobe", "metrics", "d", "--seed", "3", "--set", "game.users=10"]).unwrap();
        assert!(matches!(cli.command, Command::Metrics { .. }));
        assert_eq!(cli.seed, Some(3));
        assert_eq!(cli.overrides, vec!["game.users=10".to_string()]);
    }
}
