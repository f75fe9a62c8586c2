//! Occupancy of a Poisson mix filling up from empty. The buffer settles near
//! rate * lambda, which is why rounds discard a burn-in period first.
//!
//!     cargo run --release --example poisson_burn_in -- [lambda]

use mixprobe::mix::MixStrategy;
use mixprobe::traffic::{assign_contacts, occupancy_series, Population, Topology};

fn main() -> mixprobe::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map_or(30.0, |a| a.parse().expect("lambda"));
    let population = assign_contacts(Population::uniform(100, 0.01)?, 7)?;
    let topology = Topology::single(100, MixStrategy::poisson(lambda))?;

    let reps = 50;
    let seconds = (10.0 * lambda) as u64;
    let mut mean = vec![0.0; seconds as usize];
    for r in 0..reps {
        for (m, occ) in mean.iter_mut().zip(occupancy_series(&topology, &population, seconds, r)?) {
            *m += occ as f64 / reps as f64;
        }
    }
    let target = population.global_rate() * lambda;
    println!("steady state ~ {target:.1}");
    for t in (0..seconds as usize).step_by((lambda / 2.0).max(1.0) as usize) {
        let bar = "#".repeat(mean[t].round() as usize);
        println!("{t:>5}s {:>6.2} {bar}", mean[t]);
    }
    Ok(())
}
