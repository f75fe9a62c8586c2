use std::io::Write;

use serde::{Deserialize, Serialize};

use super::stats::{welch_t_test, wilson_interval, Summary, TTest};
use crate::error::{Error, Result};

/// Raw per-group measurements before aggregation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupSamples {
    /// Configuration label, e.g. `threshold-100`.
    pub config: String,
    /// Observation length in events.
    pub observations: usize,
    /// One entry per round: did the attacker guess right.
    pub correct: Vec<bool>,
    /// One entry per round: messages from the true sender to the target
    /// inside the observation.
    pub messages: Vec<f64>,
    /// One entry per message delivered to the target.
    pub epsilon: Vec<f64>,
    /// Target-bound messages neither suspect could have sent.
    pub epsilon_excluded: usize,
    /// Entropy of messages the true sender sent to the target.
    pub entropy_suspect: Vec<f64>,
    /// Entropy of every delivered message.
    pub entropy_all: Vec<f64>,
    /// Per-round means of `epsilon` and `entropy_suspect`, skipping rounds
    /// without samples. Significance tests run on these because messages
    /// within a round share suspects and are not independent.
    pub epsilon_rounds: Vec<f64>,
    pub entropy_rounds: Vec<f64>,
}

impl GroupSamples {
    pub fn new(config: impl Into<String>, observations: usize) -> Self {
        GroupSamples { config: config.into(), observations, ..Default::default() }
    }

    pub fn accuracy_values(&self) -> Vec<f64> {
        self.correct.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct.iter().filter(|&&c| c).count() as f64 / self.correct.len() as f64
    }
}

/// Significance of one metric against the neighbouring rows of the same
/// configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Adjacent {
    pub p_prev: Option<f64>,
    pub p_next: Option<f64>,
    /// Significant against every existing neighbour.
    pub star: bool,
}

fn adjacent(prev: Option<TTest>, next: Option<TTest>) -> Adjacent {
    let star = match (prev, next) {
        (None, None) => false,
        (a, b) => a.is_none_or(|t| t.significant()) && b.is_none_or(|t| t.significant()),
    };
    Adjacent { p_prev: prev.map(|t| t.p_value), p_next: next.map(|t| t.p_value), star }
}

/// One row per (configuration, observation length).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub config: String,
    pub observations: usize,
    pub rounds: usize,
    pub mean_messages: f64,
    pub accuracy: f64,
    pub accuracy_lo: f64,
    pub accuracy_hi: f64,
    pub mean_epsilon: f64,
    pub epsilon_samples: usize,
    pub epsilon_excluded: usize,
    pub mean_entropy: f64,
    pub mean_entropy_all: f64,
    pub accuracy_sig: Adjacent,
    pub epsilon_sig: Adjacent,
    pub entropy_sig: Adjacent,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<ReportRow>,
}

fn test_pair(a: &[f64], b: &[f64]) -> Option<TTest> {
    welch_t_test(a, b).ok()
}

/// Collapses groups into report rows. Within a configuration, rows are
/// ordered by decreasing observation length and each metric is tested
/// against the rows directly above and below.
pub fn aggregate(groups: &[GroupSamples]) -> Result<MetricsReport> {
    for g in groups {
        if g.correct.len() < 2 {
            return Err(Error::Insufficient(format!(
                "group {}/{} has {} rounds",
                g.config,
                g.observations,
                g.correct.len()
            )));
        }
    }
    let mut order: Vec<&GroupSamples> = groups.iter().collect();
    order.sort_by(|a, b| a.config.cmp(&b.config).then(b.observations.cmp(&a.observations)));

    let mut rows = Vec::with_capacity(order.len());
    for (i, g) in order.iter().enumerate() {
        let prev = (i > 0 && order[i - 1].config == g.config).then(|| order[i - 1]);
        let next = order.get(i + 1).filter(|n| n.config == g.config).copied();
        let acc = g.accuracy_values();
        let sig = |f: &dyn Fn(&GroupSamples) -> Vec<f64>| {
            let mine = f(g);
            adjacent(
                prev.and_then(|p| test_pair(&mine, &f(p))),
                next.and_then(|n| test_pair(&mine, &f(n))),
            )
        };
        let wins = g.correct.iter().filter(|&&c| c).count();
        let (lo, hi) = wilson_interval(wins, g.correct.len());
        rows.push(ReportRow {
            config: g.config.clone(),
            observations: g.observations,
            rounds: g.correct.len(),
            mean_messages: Summary::of(&g.messages).mean,
            accuracy: Summary::of(&acc).mean,
            accuracy_lo: lo,
            accuracy_hi: hi,
            mean_epsilon: Summary::of(&g.epsilon).mean,
            epsilon_samples: g.epsilon.len(),
            epsilon_excluded: g.epsilon_excluded,
            mean_entropy: Summary::of(&g.entropy_suspect).mean,
            mean_entropy_all: Summary::of(&g.entropy_all).mean,
            accuracy_sig: sig(&|x: &GroupSamples| x.accuracy_values()),
            epsilon_sig: sig(&|x: &GroupSamples| x.epsilon_rounds.clone()),
            entropy_sig: sig(&|x: &GroupSamples| x.entropy_rounds.clone()),
        });
    }
    Ok(MetricsReport { rows })
}

impl MetricsReport {
    pub fn row(&self, config: &str, observations: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.config == config && r.observations == observations)
    }

    /// Writes the report as CSV. Significant means carry a `*` in the
    /// matching `*_star` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "config",
            "observations",
            "rounds",
            "messages",
            "accuracy",
            "accuracy_lo",
            "accuracy_hi",
            "accuracy_star",
            "epsilon",
            "epsilon_star",
            "epsilon_samples",
            "epsilon_excluded",
            "entropy",
            "entropy_star",
            "entropy_all",
        ])
        .map_err(csv_err)?;
        let star = |a: &Adjacent| if a.star { "*" } else { "" }.to_string();
        for r in &self.rows {
            w.write_record([
                r.config.clone(),
                r.observations.to_string(),
                r.rounds.to_string(),
                format!("{:.3}", r.mean_messages),
                format!("{:.4}", r.accuracy),
                format!("{:.4}", r.accuracy_lo),
                format!("{:.4}", r.accuracy_hi),
                star(&r.accuracy_sig),
                format!("{:.4}", r.mean_epsilon),
                star(&r.epsilon_sig),
                r.epsilon_samples.to_string(),
                r.epsilon_excluded.to_string(),
                format!("{:.4}", r.mean_entropy),
                star(&r.entropy_sig),
                format!("{:.4}", r.mean_entropy_all),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
