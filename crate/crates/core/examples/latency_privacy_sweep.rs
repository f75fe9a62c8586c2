//! Attacker accuracy and measured latency for threshold, pool and Poisson
//! nodes on a latency-aligned grid.
//!
//!     cargo run --release --example latency_privacy_sweep -- [rounds]

use mixprobe::game::GameConfig;
use mixprobe::sweep::{run_sweep, write_fig3, SweepGrid};

fn main() -> mixprobe::Result<()> {
    let rounds = std::env::args().nth(1).map_or(100, |a| a.parse().expect("rounds"));
    let base = GameConfig { seq_len: 1024, ..GameConfig::default() };
    let grid = SweepGrid { rounds, latency_seconds: 10_000, ..SweepGrid::default() };
    let mut points = run_sweep(&base, &grid, 7)?;
    points.sort_by(|a, b| a.series.cmp(&b.series).then(a.nominal_latency.total_cmp(&b.nominal_latency)));
    println!("{:<8} {:<16} {:>7} {:>8} {:>9} {:>8}", "series", "strategy", "x", "acc", "lat mean", "lat std");
    for p in &points {
        println!(
            "{:<8} {:<16} {:>7.1} {:>8.3} {:>9.2} {:>8.2}",
            p.series, p.strategy.label(), p.nominal_latency, p.accuracy, p.latency.mean, p.latency.std
        );
    }
    write_fig3(&points, std::io::sink())?;
    Ok(())
}
