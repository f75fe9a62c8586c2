use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mix::{Message, MixNode, MixStrategy, ProvenanceTracker, VirtualTime};
use crate::seed;

/// One observable event at a single honest node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Step {
    /// A message from `sender` enters at `time`.
    Arrive { sender: usize, time: VirtualTime },
    /// A Poisson node emits a message at `time`. Batching nodes ignore
    /// these; their outputs follow from the arrival count.
    Egress { time: VirtualTime },
}

/// A small scenario with a single node where the exact sender posterior of
/// one output can be checked by brute force.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub strategy: MixStrategy,
    pub users: usize,
    pub steps: Vec<Step>,
    /// Index of the output (in emission order) whose posterior is queried.
    pub query: usize,
}

impl Fixture {
    fn arrivals(&self) -> impl Iterator<Item = (usize, VirtualTime)> + '_ {
        self.steps.iter().filter_map(|s| match *s {
            Step::Arrive { sender, time } => Some((sender, time)),
            Step::Egress { .. } => None,
        })
    }

    fn egress_times(&self) -> Vec<VirtualTime> {
        self.steps
            .iter()
            .filter_map(|s| match *s {
                Step::Egress { time } => Some(time),
                Step::Arrive { .. } => None,
            })
            .collect()
    }
}

/// Posterior of the queried output as computed by [`ProvenanceTracker`].
pub fn analytic_posterior(fx: &Fixture) -> Result<Vec<f64>> {
    let mut tracker = ProvenanceTracker::new(fx.strategy, fx.users);
    let mut outputs: Vec<std::sync::Arc<[f64]>> = Vec::new();
    for step in &fx.steps {
        match (*step, fx.strategy.batch()) {
            (Step::Arrive { sender, time }, batch) => {
                tracker.ingest_user(sender, time);
                if let Some((n, retain)) = batch {
                    if tracker.occupancy() == n {
                        let mix = tracker.flush(n - retain)?;
                        outputs.extend(std::iter::repeat_n(mix, n - retain));
                    }
                }
            }
            (Step::Egress { time }, None) => outputs.push(tracker.release(time)?),
            (Step::Egress { .. }, Some(_)) => {}
        }
    }
    outputs
        .get(fx.query)
        .map(|m| m.to_vec())
        .ok_or_else(|| Error::NoFeasibleInput(format!("query {} of {} outputs", fx.query, outputs.len())))
}

/// Settings for the brute-force estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarlo {
    pub trials: usize,
    /// Half-open acceptance window `[e, e + delta)` around each observed
    /// Poisson egress.
    pub delta: f64,
    /// Target absolute error per coordinate. Fewer accepted samples than a
    /// three sigma bound at this tolerance is an error.
    pub tol: f64,
    pub seed: u64,
}

/// Accepted samples needed so that three standard errors of a frequency
/// stay below `tol`.
pub fn required_samples(tol: f64) -> usize {
    (9.0 / (4.0 * tol * tol)).ceil() as usize
}

/// Estimates the queried posterior by resimulating the node with fresh
/// randomness and recording who actually sent the queried output.
///
/// Poisson fixtures are conditioned on the observed egress times by
/// rejection: a trial counts only if its first `m` departures fall into
/// the windows of the `m` observed egresses and nothing else leaves before
/// the last window closes.
pub fn monte_carlo_posterior(fx: &Fixture, mc: MonteCarlo) -> Result<Vec<f64>> {
    let mut counts = vec![0u64; fx.users];
    let mut accepted = 0usize;
    let egress = fx.egress_times();
    for trial in 0..mc.trials {
        let mut node = MixNode::new(fx.strategy, true, seed::derive_indexed(mc.seed, "trial", trial as u64))?;
        let mut outputs = Vec::new();
        for (i, (sender, time)) in fx.arrivals().enumerate() {
            let msg = Message::new(i as u64, sender as u32, 0, time);
            outputs.extend(node.ingest(msg, time));
        }
        let sender = if fx.strategy.batch().is_some() {
            outputs.get(fx.query).map(|e| e.msg.sender.index())
        } else {
            outputs.sort_by(|a, b| a.time.total_cmp(&b.time));
            let fits = egress.iter().enumerate().all(|(k, &e)| {
                outputs.get(k).is_some_and(|o| o.time >= e && o.time < e + mc.delta)
            });
            let last = egress.last().map_or(f64::NEG_INFINITY, |e| e + mc.delta);
            let quiet = outputs.get(egress.len()).is_none_or(|o| o.time >= last);
            (fits && quiet).then(|| outputs[fx.query].msg.sender.index())
        };
        if let Some(s) = sender {
            counts[s] += 1;
            accepted += 1;
        }
    }
    let need = required_samples(mc.tol);
    if accepted < need {
        return Err(Error::Insufficient(format!(
            "{}: {accepted} accepted samples, need {need}",
            fx.name
        )));
    }
    Ok(counts.iter().map(|&c| c as f64 / accepted as f64).collect())
}

/// Largest coordinate difference between two distributions.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Reference scenarios covering threshold, pool and Poisson nodes.
pub fn standard_fixtures() -> Vec<Fixture> {
    let arrive = |sender, time| Step::Arrive { sender, time };
    let egress = |time| Step::Egress { time };
    vec![
        Fixture {
            name: "threshold-4-skewed".into(),
            strategy: MixStrategy::threshold(4),
            users: 2,
            steps: vec![arrive(0, 0.0), arrive(0, 1.0), arrive(0, 2.0), arrive(1, 3.0)],
            query: 0,
        },
        Fixture {
            name: "threshold-3-distinct".into(),
            strategy: MixStrategy::threshold(3),
            users: 3,
            steps: vec![arrive(0, 0.0), arrive(1, 1.0), arrive(2, 2.0)],
            query: 2,
        },
        Fixture {
            name: "pool-3-1-two-rounds".into(),
            strategy: MixStrategy::pool(3, 1),
            users: 5,
            steps: vec![arrive(0, 0.0), arrive(1, 1.0), arrive(2, 2.0), arrive(3, 3.0), arrive(4, 4.0)],
            query: 2,
        },
        Fixture {
            name: "pool-2-1-chain".into(),
            strategy: MixStrategy::pool(2, 1),
            users: 3,
            steps: vec![arrive(0, 0.0), arrive(1, 1.0), arrive(2, 2.0)],
            query: 1,
        },
        Fixture {
            name: "poisson-three-first".into(),
            strategy: MixStrategy::poisson(5.0),
            users: 3,
            steps: vec![arrive(0, 0.0), arrive(1, 1.0), arrive(2, 2.0), egress(4.0)],
            query: 0,
        },
        Fixture {
            name: "poisson-three-second".into(),
            strategy: MixStrategy::poisson(5.0),
            users: 3,
            steps: vec![arrive(0, 0.0), arrive(1, 1.0), arrive(2, 2.0), egress(4.0), egress(6.0)],
            query: 1,
        },
        Fixture {
            name: "poisson-interleaved".into(),
            strategy: MixStrategy::poisson(5.0),
            users: 3,
            steps: vec![arrive(0, 0.0), egress(2.0), arrive(1, 3.0), arrive(2, 3.5), egress(5.0)],
            query: 1,
        },
    ]
}
