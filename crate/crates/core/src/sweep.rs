//! Latency versus privacy across mixing strategies.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{masked_group, play_rounds, GameConfig};
use crate::metrics::report::csv_err;
use crate::metrics::wilson_interval;
use crate::mix::MixStrategy;
use crate::seed;
use crate::traffic::{assign_contacts, latency_stats, simulate, LatencyStats, Population};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub thresholds: Vec<usize>,
    /// Pool sizes; each is combined with every threshold above it. 0 is the
    /// plain threshold series.
    pub pools: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub rounds: usize,
    /// Seconds of traffic recorded for the latency measurement.
    pub latency_seconds: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            thresholds: (1..=10).map(|i| i * 10).collect(),
            pools: vec![0, 10],
            lambdas: (1..=10).map(|i| i as f64 * 5.0).collect(),
            rounds: 200,
            latency_seconds: 20_000,
        }
    }
}

impl SweepGrid {
    /// Every strategy in the grid, tagged with its series name.
    pub fn strategies(&self) -> Result<Vec<(String, MixStrategy)>> {
        let mut out = Vec::new();
        for &pool in &self.pools {
            for &n in self.thresholds.iter().filter(|&&n| n > pool) {
                let s = MixStrategy::pool(n, pool).canonical();
                s.validate()?;
                out.push((format!("pool={pool}"), s));
            }
        }
        for &lambda in &self.lambdas {
            let s = MixStrategy::poisson(lambda);
            s.validate()?;
            out.push(("poisson".to_string(), s));
        }
        if out.is_empty() {
            return Err(Error::config("sweep grid is empty"));
        }
        if self.rounds < 2 {
            return Err(Error::config("sweep needs at least 2 rounds per point"));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub series: String,
    pub strategy: MixStrategy,
    pub nominal_latency: f64,
    pub rounds: usize,
    pub accuracy: f64,
    pub accuracy_lo: f64,
    pub accuracy_hi: f64,
    pub latency: LatencyStats,
}

/// Plays `rounds` games for one strategy and scores the full observation.
pub fn accuracy_point(base: &GameConfig, strategy: MixStrategy, rounds: usize, seed: u64) -> Result<(f64, f64, f64)> {
    let config = GameConfig { strategy, ..base.clone() };
    let label = strategy.label();
    let games = play_rounds(&config, rounds, &label, seed)?;
    let g = masked_group(&games, &label, config.seq_len, seed)?;
    let wins = g.correct.iter().filter(|&&c| c).count();
    let (lo, hi) = wilson_interval(wins, g.correct.len());
    Ok((g.accuracy(), lo, hi))
}

/// Measures end-to-end latency of `strategy` under the base population.
pub fn latency_point(base: &GameConfig, strategy: MixStrategy, seconds: u64, seed: u64) -> Result<LatencyStats> {
    let topology = base.topology.build(base.users, strategy)?;
    let population = assign_contacts(Population::uniform(base.users, base.rate)?, seed::derive(seed, &["contacts"]))?;
    let trace = simulate(&topology, &population, seconds, &base.burn_in, seed)?;
    latency_stats(&trace)
}

pub fn run_sweep(base: &GameConfig, grid: &SweepGrid, seed: u64) -> Result<Vec<SweepPoint>> {
    base.validate()?;
    grid.strategies()?
        .into_par_iter()
        .map(|(series, strategy)| {
            let label = strategy.label();
            let (accuracy, lo, hi) = accuracy_point(base, strategy, grid.rounds, seed::derive(seed, &["accuracy", &label]))?;
            let latency = latency_point(base, strategy, grid.latency_seconds, seed::derive(seed, &["latency", &label]))?;
            Ok(SweepPoint {
                series,
                strategy,
                nominal_latency: strategy.nominal_latency(),
                rounds: grid.rounds,
                accuracy,
                accuracy_lo: lo,
                accuracy_hi: hi,
                latency,
            })
        })
        .collect()
}

fn param(s: &MixStrategy) -> (String, usize) {
    match *s {
        MixStrategy::Threshold { n } => (n.to_string(), 0),
        MixStrategy::Pool { n, pool } => (n.to_string(), pool),
        MixStrategy::Poisson { lambda } => (lambda.to_string(), 0),
    }
}

/// Accuracy against latency-aligned x positions.
pub fn write_fig3<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "param", "pool", "x_latency", "accuracy", "accuracy_lo", "accuracy_hi", "rounds"])
        .map_err(csv_err)?;
    for p in points {
        let (param, pool) = param(&p.strategy);
        w.write_record([
            p.series.clone(),
            param,
            pool.to_string(),
            format!("{}", p.nominal_latency),
            format!("{:.4}", p.accuracy),
            format!("{:.4}", p.accuracy_lo),
            format!("{:.4}", p.accuracy_hi),
            p.rounds.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Measured latency mean and standard deviation per configuration.
pub fn write_fig4<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "param", "pool", "nominal_latency", "latency_mean", "latency_std", "messages"])
        .map_err(csv_err)?;
    for p in points {
        let (param, pool) = param(&p.strategy);
        w.write_record([
            p.series.clone(),
            param,
            pool.to_string(),
            format!("{}", p.nominal_latency),
            format!("{:.4}", p.latency.mean),
            format!("{:.4}", p.latency.std),
            p.latency.count.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
