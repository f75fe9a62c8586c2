//! Baseline attacker accuracy, likelihood difference and entropy as the
//! observation shrinks from 4096 to 256 events, at threshold 100 with 100
//! users.
//!
//!     cargo run --release --example table1_pattern -- [rounds] [seed]

use mixprobe::encoding::SEQUENCE_LENGTHS;
use mixprobe::game::{masked_group, play_rounds, GameConfig};
use mixprobe::metrics::aggregate;

fn main() -> mixprobe::Result<()> {
    let mut args = std::env::args().skip(1);
    let rounds: usize = args.next().map_or(500, |a| a.parse().expect("rounds"));
    let seed: u64 = args.next().map_or(2024, |a| a.parse().expect("seed"));

    let config = GameConfig::default();
    let label = config.strategy.label();
    let rounds = play_rounds(&config, rounds, "table1", seed)?;
    let groups = SEQUENCE_LENGTHS
        .iter()
        .map(|&len| masked_group(&rounds, &label, len, seed))
        .collect::<mixprobe::Result<Vec<_>>>()?;
    let report = aggregate(&groups)?;

    println!("obs   msgs   acc    95% CI          eps     H(suspect)  H(all)");
    for r in &report.rows {
        println!(
            "{:<5} {:>5.2}  {:.3}{} [{:.3}, {:.3}]  {:.3}{}  {:.3}{}      {:.3}",
            r.observations,
            r.mean_messages,
            r.accuracy,
            if r.accuracy_sig.star { "*" } else { " " },
            r.accuracy_lo,
            r.accuracy_hi,
            r.mean_epsilon,
            if r.epsilon_sig.star { "*" } else { " " },
            r.mean_entropy,
            if r.entropy_sig.star { "*" } else { " " },
            r.mean_entropy_all,
        );
    }
    report.write_csv(std::io::stdout().lock())?;
    Ok(())
}
