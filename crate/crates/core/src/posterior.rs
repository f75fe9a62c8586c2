use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mix::{MessageId, UserId};

/// Tolerance on the total mass of a sender distribution.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Probability distribution over senders for one delivered message, as the
/// passive adversary can compute it from link observations alone.
///
/// Stored densely over the user population; several outputs of the same
/// flush share one allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SenderPosterior {
    pub message: MessageId,
    pub probs: Arc<[f64]>,
}

impl SenderPosterior {
    pub fn new(message: MessageId, probs: Arc<[f64]>) -> Self {
        SenderPosterior { message, probs }
    }

    /// Builds and validates a posterior from raw probabilities.
    pub fn from_probs(message: MessageId, probs: Vec<f64>) -> Result<Self> {
        let p = SenderPosterior { message, probs: probs.into() };
        p.check()?;
        Ok(p)
    }

    pub fn point(message: MessageId, user: UserId, users: usize) -> Self {
        let mut v = vec![0.0; users];
        v[user.index()] = 1.0;
        SenderPosterior { message, probs: v.into() }
    }

    pub fn get(&self, user: UserId) -> f64 {
        self.probs.get(user.index()).copied().unwrap_or(0.0)
    }

    /// Users with non-zero probability.
    pub fn support(&self) -> impl Iterator<Item = (UserId, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(u, &p)| (UserId(u as u32), p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn check(&self) -> Result<()> {
        let s = self.total();
        if (s - 1.0).abs() > NORMALIZATION_TOL || self.probs.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::Unnormalized(s));
        }
        Ok(())
    }
}
