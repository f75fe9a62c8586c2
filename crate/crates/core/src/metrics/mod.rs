//! Anonymity metrics, statistics and the brute-force posterior oracle.

pub mod anonymity;
pub mod oracle;
pub mod report;
pub mod stats;

pub use crate::posterior::SenderPosterior;
pub use anonymity::{effective_anonymity_set, entropy, entropy_bits, epsilon, likelihood_diff, EPSILON_FLOOR};
pub use report::{aggregate, Adjacent, GroupSamples, MetricsReport, ReportRow};
pub use stats::{ols_slope, one_sample_t_test, welch_t_test, wilson_interval, Summary, TTest, ALPHA};
