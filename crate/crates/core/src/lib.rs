//! Privacy measurement for mix networks.
//!
//! Simulates users sending through threshold, pool and Poisson mix nodes,
//! encodes what a global passive adversary sees as a sequence of link ids,
//! plays the "one of two" sender game and quantifies the leakage with
//! entropy, the likelihood difference and a Bayesian baseline attacker.
//!
//! ```
//! use mixprobe::game::{play_round, GameConfig};
//! use mixprobe::mix::MixStrategy;
//! use mixprobe::traffic::BurnIn;
//!
//! let config = GameConfig {
//!     users: 20,
//!     rate: 0.05,
//!     strategy: MixStrategy::threshold(5),
//!     seq_len: 256,
//!     burn_in: BurnIn { base: 100, jitter: 100 },
//!     ..GameConfig::default()
//! };
//! let round = play_round(&config, 42).unwrap();
//! assert_eq!(round.observation.len(), 256);
//! ```

pub mod attacker;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod game;
pub mod metrics;
pub mod mix;
pub mod posterior;
pub mod seed;
pub mod sweep;
pub mod traffic;

pub use error::{Error, Result};
