//! User populations, network topology and the discrete-event simulator that
//! turns them into link-level traces.

mod population;
mod sim;
mod topology;
mod trace;

pub use population::{assign_contacts, Population};
pub use sim::{occupancy_series, run_burn_in, simulate, BurnIn, Simulator};
pub use topology::{Endpoint, Link, LinkId, LinkMap, NodeSpec, Topology};
pub use trace::{latency_stats, Delivery, LatencyStats, LedgerEntry, Trace, TraceEvent};
