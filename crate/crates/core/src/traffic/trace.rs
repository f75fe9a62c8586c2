use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::LinkId;
use crate::error::{Error, Result};
use crate::mix::{Message, MessageId, UserId, VirtualTime};
use crate::posterior::SenderPosterior;

/// One observed transmission on a link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: VirtualTime,
    pub link: LinkId,
    pub msg: MessageId,
}

/// Ground truth for one message that appeared in the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    #[serde(flatten)]
    pub msg: Message,
    /// Node index chosen in each layer.
    pub route: Vec<usize>,
    pub delivered_at: Option<VirtualTime>,
}

/// A message handed to its recipient during recording, with the sender
/// posterior the adversary computes for that final transmission.
#[derive(Clone, Debug)]
pub struct Delivery {
    /// Index into [`Trace::events`] of the final transmission.
    pub event: usize,
    pub time: VirtualTime,
    pub msg: Message,
    pub posterior: Arc<[f64]>,
}

impl Delivery {
    pub fn latency(&self) -> f64 {
        self.time - self.msg.ingress_time
    }

    pub fn recipient(&self) -> UserId {
        self.msg.recipient
    }

    pub fn sender_posterior(&self) -> SenderPosterior {
        SenderPosterior::new(self.msg.id, self.posterior.clone())
    }
}

/// Everything recorded between [`super::Simulator::start_recording`] and the
/// end of the run.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    /// Virtual time at which recording started (the burn-in offset).
    pub start: VirtualTime,
    pub end: VirtualTime,
    pub events: Vec<TraceEvent>,
    pub ledger: Vec<LedgerEntry>,
    pub deliveries: Vec<Delivery>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// End-to-end latency over every delivery in the trace. In steady state the
/// delivered set is an unbiased sample of the latency distribution.
pub fn latency_stats(trace: &Trace) -> Result<LatencyStats> {
    latency_from(trace.deliveries.iter().map(Delivery::latency))
}

pub(crate) fn latency_from(latencies: impl Iterator<Item = f64>) -> Result<LatencyStats> {
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for x in latencies {
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    if n == 0 {
        return Err(Error::Insufficient("no delivered messages".into()));
    }
    let std = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(LatencyStats { mean, std, count: n })
}
