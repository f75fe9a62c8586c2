use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{Message, MessageId, MixStrategy, VirtualTime};
use crate::error::Result;
use crate::seed;

/// A message scheduled to leave a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Egress {
    pub msg: Message,
    pub time: VirtualTime,
}

/// Ground-truth state of one mix node.
///
/// Honest batching nodes hold at most `n - 1` messages between flushes.
/// Poisson nodes hold every message that is still in flight. Corrupt nodes
/// forward immediately in arrival order and never buffer.
#[derive(Clone, Debug)]
pub struct MixNode {
    strategy: MixStrategy,
    honest: bool,
    buffer: Vec<Message>,
    rng: ChaCha8Rng,
    delay: Option<Exp<f64>>,
    ingested: u64,
    egressed: u64,
}

impl MixNode {
    pub fn new(strategy: MixStrategy, honest: bool, seed: u64) -> Result<Self> {
        strategy.validate()?;
        let delay = match strategy {
            MixStrategy::Poisson { lambda } => {
                Some(Exp::new(1.0 / lambda).expect("validated positive rate"))
            }
            _ => None,
        };
        Ok(MixNode {
            strategy,
            honest,
            buffer: Vec::new(),
            rng: seed::rng(seed),
            delay,
            ingested: 0,
            egressed: 0,
        })
    }

    pub fn strategy(&self) -> MixStrategy {
        self.strategy
    }

    pub fn is_honest(&self) -> bool {
        self.honest
    }

    /// Messages currently held (buffered, pooled or in flight).
    pub fn occupancy(&self) -> usize {
        self.buffer.len()
    }

    pub fn buffered(&self) -> &[Message] {
        &self.buffer
    }

    pub fn ingested(&self) -> u64 {
        self.ingested
    }

    pub fn egressed(&self) -> u64 {
        self.egressed
    }

    /// Accepts `msg` at time `t` and returns whatever leaves as a consequence.
    ///
    /// Batching nodes return the whole flush (in shuffled order) once the
    /// buffer reaches the threshold. Poisson nodes return the message with
    /// its sampled departure time; call [`MixNode::depart`] when that time is
    /// reached.
    pub fn ingest(&mut self, msg: Message, t: VirtualTime) -> Vec<Egress> {
        debug_assert!(
            !self.buffer.iter().any(|m| m.id == msg.id),
            "message {:?} ingested twice",
            msg.id
        );
        self.ingested += 1;
        if !self.honest {
            self.egressed += 1;
            return vec![Egress { msg, time: t }];
        }
        match self.strategy.batch() {
            Some((n, retain)) => {
                self.buffer.push(msg);
                if self.buffer.len() < n {
                    return Vec::new();
                }
                // a uniform permutation's prefix is a uniform subset in uniform order
                self.buffer.shuffle(&mut self.rng);
                let kept = self.buffer.split_off(n - retain);
                let out = std::mem::replace(&mut self.buffer, kept);
                self.egressed += out.len() as u64;
                out.into_iter().map(|msg| Egress { msg, time: t }).collect()
            }
            None => {
                let delay = self
                    .delay
                    .as_ref()
                    .expect("poisson node has a delay sampler")
                    .sample(&mut self.rng);
                self.buffer.push(msg);
                vec![Egress { msg, time: t + delay }]
            }
        }
    }

    /// Completes a scheduled Poisson departure.
    pub fn depart(&mut self, id: MessageId) -> Option<Message> {
        let pos = self.buffer.iter().position(|m| m.id == id)?;
        self.egressed += 1;
        Some(self.buffer.swap_remove(pos))
    }

    /// Removes and returns every residual message.
    pub fn drain(&mut self) -> Vec<Message> {
        std::mem::take(&mut self.buffer)
    }

    /// Samples one delay from the node's delay distribution. Test hook for
    /// Poisson nodes; returns `None` for batching nodes.
    pub fn sample_delay(&mut self) -> Option<f64> {
        let d = self.delay.as_ref()?;
        Some(d.sample(&mut self.rng))
    }
}
