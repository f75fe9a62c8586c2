//! Mixing strategies and the node state machines that realize them.
//!
//! A [`MixNode`] holds ground-truth messages and decides when they leave. The
//! matching [`ProvenanceTracker`] runs on the adversary's side of the wire: it
//! only sees how many indistinguishable messages went in and came out, and
//! turns that into a sender posterior for every output.

mod node;
mod provenance;

pub use node::{Egress, MixNode};
pub use provenance::{exponential_hazard, ProvenanceTracker};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Virtual time in seconds. Time is event-indexed: a unit of time passes per
/// transmitted message at global rate 1.
pub type VirtualTime = f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageId(pub u64);

/// An application-layer message. All messages look identical on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub sender: UserId,
    pub recipient: UserId,
    /// Time the message entered the network.
    pub ingress_time: VirtualTime,
}

impl Message {
    pub fn new(id: u64, sender: u32, recipient: u32, ingress_time: VirtualTime) -> Self {
        Message {
            id: MessageId(id),
            sender: UserId(sender),
            recipient: UserId(recipient),
            ingress_time,
        }
    }
}

/// How a node delays and reorders messages.
///
/// `Threshold { n }` behaves exactly like `Pool { n, pool: 0 }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MixStrategy {
    Threshold { n: usize },
    Pool { n: usize, pool: usize },
    /// Independent exponential delay with mean `lambda` seconds.
    Poisson { lambda: f64 },
}

impl MixStrategy {
    pub fn threshold(n: usize) -> Self {
        MixStrategy::Threshold { n }
    }

    pub fn pool(n: usize, pool: usize) -> Self {
        MixStrategy::Pool { n, pool }
    }

    pub fn poisson(lambda: f64) -> Self {
        MixStrategy::Poisson { lambda }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MixStrategy::Threshold { n } if n == 0 => Err(Error::config("threshold n must be positive")),
            MixStrategy::Pool { n, .. } if n == 0 => Err(Error::config("pool n must be positive")),
            MixStrategy::Pool { n, pool } if pool >= n => Err(Error::config(format!(
                "pool count {pool} must be smaller than threshold {n}"
            ))),
            MixStrategy::Poisson { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::config(format!("poisson mean delay must be positive, got {lambda}")))
            }
            _ => Ok(()),
        }
    }

    /// `(threshold, retained)` for batching strategies.
    pub fn batch(&self) -> Option<(usize, usize)> {
        match *self {
            MixStrategy::Threshold { n } => Some((n, 0)),
            MixStrategy::Pool { n, pool } => Some((n, pool)),
            MixStrategy::Poisson { .. } => None,
        }
    }

    /// Pool ratio `p = pool / n`; zero for threshold and Poisson nodes.
    pub fn pool_ratio(&self) -> f64 {
        match *self {
            MixStrategy::Pool { n, pool } => pool as f64 / n as f64,
            _ => 0.0,
        }
    }

    pub fn pool_count(&self) -> usize {
        self.batch().map_or(0, |(_, p)| p)
    }

    /// Expected mean latency at an arrival rate of one message per second.
    ///
    /// A threshold batch waits on average n/2 (exactly `(n - 1) / 2` with
    /// Poisson arrivals, since the last arrival leaves at once). With a pool, only `n - pool`
    /// arrivals fill each round, so the first round costs `(n - pool) / 2`;
    /// every retention (probability `pool / n`) costs another `n - pool`
    /// seconds, which adds `pool` seconds in expectation.
    pub fn nominal_latency(&self) -> f64 {
        match *self {
            MixStrategy::Threshold { n } => n as f64 / 2.0,
            MixStrategy::Pool { n, pool } => (n + pool) as f64 / 2.0,
            MixStrategy::Poisson { lambda } => lambda,
        }
    }

    /// Normalizes `Pool { pool: 0 }` to `Threshold`.
    pub fn canonical(self) -> Self {
        match self {
            MixStrategy::Pool { n, pool: 0 } => MixStrategy::Threshold { n },
            s => s,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MixStrategy::Threshold { n } => format!("threshold-{n}"),
            MixStrategy::Pool { n, pool } => format!("pool-{n}-{pool}"),
            MixStrategy::Poisson { lambda } => format!("poisson-{lambda}"),
        }
    }
}

impl fmt::Display for MixStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
