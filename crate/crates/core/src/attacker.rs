//! Analytic baseline adversary: accumulates the log-likelihood ratio of the
//! two suspects over every message delivered to the target recipient.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mix::UserId;
use crate::posterior::SenderPosterior;

/// Added to both suspect probabilities before taking logs.
pub const SMOOTHING: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub suspects: (UserId, UserId),
    pub recipient: UserId,
    /// `ln P(trace | b = 0) - ln P(trace | b = 1)`, accumulated.
    pub log_odds: f64,
    pub updates: usize,
}

impl BeliefState {
    pub fn new(suspects: (UserId, UserId), recipient: UserId) -> Self {
        BeliefState { suspects, recipient, log_odds: 0.0, updates: 0 }
    }

    /// Folds in one delivered message. Messages to anyone but the target
    /// are ignored.
    pub fn update(&mut self, recipient: UserId, post: &SenderPosterior) -> Result<()> {
        if recipient != self.recipient {
            return Ok(());
        }
        post.check()?;
        self.update_probs(post.get(self.suspects.0), post.get(self.suspects.1));
        Ok(())
    }

    pub fn update_probs(&mut self, p0: f64, p1: f64) {
        self.log_odds += (p0 + SMOOTHING).ln() - (p1 + SMOOTHING).ln();
        self.updates += 1;
    }

    /// Guess for `b`: 0 if the evidence favours the first suspect, 1 if the
    /// second, a fair coin on an exact tie.
    pub fn decide<R: Rng>(&self, rng: &mut R) -> u8 {
        if self.log_odds > 0.0 {
            0
        } else if self.log_odds < 0.0 {
            1
        } else {
            u8::from(rng.random_bool(0.5))
        }
    }

    /// Posterior probability that `b = 0` under a uniform prior.
    pub fn prob_b0(&self) -> f64 {
        1.0 / (1.0 + (-self.log_odds).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mix::MessageId;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn belief() -> BeliefState {
        BeliefState::new((UserId(0), UserId(1)), UserId(2))
    }

    fn post(p: Vec<f64>) -> SenderPosterior {
        SenderPosterior::from_probs(MessageId(0), p).unwrap()
    }

    #[test]
    fn symmetric_evidence_leaves_odds_unchanged() {
        let mut b = belief();
        b.update(UserId(2), &post(vec![0.4, 0.4, 0.2])).unwrap();
        assert_eq!(b.log_odds, 0.0);
        assert_eq!(b.updates, 1);
    }

    #[test]
    fn other_recipients_are_ignored() {
        let mut b = belief();
        b.update(UserId(1), &post(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(b.updates, 0);
    }

    #[test]
    fn evidence_accumulates() {
        let mut b = belief();
        for _ in 0..2 {
            b.update(UserId(2), &post(vec![0.75, 0.25, 0.0])).unwrap();
        }
        assert_abs_diff_eq!(b.log_odds, 2.0 * 3f64.ln(), epsilon = 1e-5);
        assert!(b.prob_b0() > 0.89 && b.prob_b0() < 0.91);
        assert_eq!(b.decide(&mut crate::seed::rng(0)), 0);
    }

    #[test]
    fn tie_is_a_fair_coin() {
        let b = belief();
        let mut rng = crate::seed::rng(9);
        let ones: u32 = (0..10_000).map(|_| u32::from(b.decide(&mut rng))).sum();
        assert!((4_800..5_200).contains(&ones), "{ones}");
    }

    #[test]
    fn exact_zero_is_smoothed() {
        let mut b = belief();
        b.update_probs(0.0, 0.5);
        assert!(b.log_odds.is_finite() && b.log_odds < -13.0);
    }

    // Tiny model where the likelihood-ratio rule is the Bayes rule: each of k
    // messages names the true sender with probability q, else the other
    // suspect. Enumerate all outcomes and compare the rule's accuracy with
    // the Bayes-optimal accuracy.
    #[test]
    fn matches_bayes_optimal_on_enumerated_model() {
        let q: f64 = 0.7;
        let k = 5;
        let mut rule = 0.0;
        let mut bayes = 0.0;
        for b in 0..2u8 {
            for mask in 0u32..(1 << k) {
                let hits = mask.count_ones() as i32;
                let prob = 0.5 * q.powi(hits) * (1.0 - q).powi(k as i32 - hits);
                let mut s = belief();
                for i in 0..k {
                    let says_true = mask >> i & 1 == 1;
                    let points_to_0 = says_true == (b == 0);
                    if points_to_0 {
                        s.update_probs(q, 1.0 - q);
                    } else {
                        s.update_probs(1.0 - q, q);
                    }
                }
                if s.decide(&mut crate::seed::rng(0)) == b {
                    rule += prob;
                }
                // b=0 and b=1 see mirror-image evidence; Bayes picks the
                // hypothesis with the larger likelihood
                let l_true = q.powi(hits) * (1.0 - q).powi(k as i32 - hits);
                let l_false = (1.0 - q).powi(hits) * q.powi(k as i32 - hits);
                if l_true > l_false {
                    bayes += prob;
                }
            }
        }
        assert_abs_diff_eq!(rule, bayes, epsilon = 1e-12);
        assert!(rule > 0.8);
    }

    proptest! {
        #[test]
        fn swapping_suspects_negates_odds(ps in proptest::collection::vec((0.0f64..0.5, 0.0f64..0.5), 1..20)) {
            let mut a = belief();
            let mut b = BeliefState::new((UserId(1), UserId(0)), UserId(2));
            for (p0, p1) in ps {
                let p = post(vec![p0, p1, 1.0 - p0 - p1]);
                a.update(UserId(2), &p).unwrap();
                b.update(UserId(2), &p).unwrap();
            }
            prop_assert!((a.log_odds + b.log_odds).abs() < 1e-9);
        }
    }
}
