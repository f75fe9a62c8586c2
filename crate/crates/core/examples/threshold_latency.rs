//! Measured end-to-end latency of single-node threshold mixes next to the
//! n/2 rule of thumb (100 users, one message per second overall).
//!
//!     cargo run --release --example threshold_latency

use mixprobe::mix::MixStrategy;
use mixprobe::traffic::{assign_contacts, latency_stats, simulate, BurnIn, Population, Topology};

fn main() -> mixprobe::Result<()> {
    let population = assign_contacts(Population::uniform(100, 0.01)?, 1)?;
    let burn = BurnIn { base: 1000, jitter: 1000 };
    println!("n     measured   n/2");
    for n in [10, 25, 50, 100, 200] {
        let strategy = MixStrategy::threshold(n);
        let topology = Topology::single(100, strategy)?;
        let trace = simulate(&topology, &population, 20_000, &burn, n as u64)?;
        let s = latency_stats(&trace)?;
        println!("{n:<5} {:>8.2}   {:>5.1}", s.mean, strategy.nominal_latency());
    }
    Ok(())
}
