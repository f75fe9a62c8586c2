use std::sync::Arc;

use super::{MixStrategy, VirtualTime};
use crate::error::{Error, Result};

/// Hazard rate of an exponential delay with mean `lambda`, evaluated at the
/// implied delay `egress - ingress`. Zero for negative delays.
///
/// Given that every occupant of a Poisson node is still inside at time `t`,
/// the likelihood that occupant `i` is the one leaving is its delay density
/// times the survival of all others. Dividing through by the joint survival
/// leaves the per-occupant hazard, which for an exponential is `1 / lambda`
/// regardless of how long the message has waited.
pub fn exponential_hazard(delay: f64, lambda: f64) -> f64 {
    if delay < 0.0 {
        0.0
    } else {
        1.0 / lambda
    }
}

/// Adversary-side sender provenance for one honest node.
///
/// The adversary sees how many messages enter, each with a known sender
/// distribution (a point mass for a user uplink, a mixture for an upstream
/// honest node), and when outputs leave. Every output of a batch flush and
/// every Poisson departure is a uniform draw over the current occupants, so
/// the tracker only needs the summed mass of the occupants and their count.
/// Retained pool items inherit the flush mixture as their new provenance.
#[derive(Clone, Debug)]
pub struct ProvenanceTracker {
    strategy: MixStrategy,
    mass: Vec<f64>,
    count: usize,
    latest_ingress: VirtualTime,
}

impl ProvenanceTracker {
    pub fn new(strategy: MixStrategy, users: usize) -> Self {
        ProvenanceTracker {
            strategy,
            mass: vec![0.0; users],
            count: 0,
            latest_ingress: f64::NEG_INFINITY,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.count
    }

    /// Current per-occupant mixture, if the node is non-empty.
    pub fn mixture(&self) -> Option<Vec<f64>> {
        if self.count == 0 {
            return None;
        }
        let k = self.count as f64;
        Some(self.mass.iter().map(|m| m / k).collect())
    }

    /// Records an arrival whose sender distribution is `dist`.
    pub fn ingest(&mut self, dist: &[f64], t: VirtualTime) {
        debug_assert_eq!(dist.len(), self.mass.len());
        for (m, p) in self.mass.iter_mut().zip(dist) {
            *m += p;
        }
        self.count += 1;
        self.latest_ingress = self.latest_ingress.max(t);
    }

    /// Records an arrival from a user uplink.
    pub fn ingest_user(&mut self, user: usize, t: VirtualTime) {
        self.mass[user] += 1.0;
        self.count += 1;
        self.latest_ingress = self.latest_ingress.max(t);
    }

    /// A batch flush released `outputs` messages. Returns the posterior
    /// shared by every flushed output.
    pub fn flush(&mut self, outputs: usize) -> Result<Arc<[f64]>> {
        let (n, retain) = self
            .strategy
            .batch()
            .ok_or_else(|| Error::NoFeasibleInput("flush on a poisson node".into()))?;
        if self.count != n || outputs != n - retain {
            return Err(Error::NoFeasibleInput(format!(
                "flush of {outputs} from {} occupants, expected {} of {n}",
                self.count,
                n - retain
            )));
        }
        let mix = self.take_mixture()?;
        let r = retain as f64;
        for (m, p) in self.mass.iter_mut().zip(mix.iter()) {
            *m = p * r;
        }
        self.count = retain;
        Ok(mix)
    }

    /// A Poisson node released one message at time `t`.
    pub fn release(&mut self, t: VirtualTime) -> Result<Arc<[f64]>> {
        let lambda = match self.strategy {
            MixStrategy::Poisson { lambda } => lambda,
            _ => return Err(Error::NoFeasibleInput("release on a batching node".into())),
        };
        // Occupants arrived no later than `latest_ingress`; each has the same
        // hazard, so the weights are uniform only if all of them are feasible.
        if self.count == 0 || exponential_hazard(t - self.latest_ingress, lambda) == 0.0 {
            return Err(Error::NoFeasibleInput(format!(
                "egress at {t} with {} occupants, latest ingress {}",
                self.count, self.latest_ingress
            )));
        }
        let mix = self.take_mixture()?;
        for (m, p) in self.mass.iter_mut().zip(mix.iter()) {
            *m -= p;
            if *m < 0.0 {
                *m = 0.0;
            }
        }
        self.count -= 1;
        Ok(mix)
    }

    fn take_mixture(&self) -> Result<Arc<[f64]>> {
        let total: f64 = self.mass.iter().sum();
        if self.count == 0 || total <= 0.0 {
            return Err(Error::NoFeasibleInput("empty node".into()));
        }
        // renormalize by total mass rather than count to stop rounding drift
        Ok(self.mass.iter().map(|m| m / total).collect::<Vec<_>>().into())
    }
}
