//! Plays a few rounds of the two-suspect game on a small network and shows
//! how the attacker's belief ends up.
//!
//!     cargo run --release --example privacy_game

use mixprobe::game::{evaluate_window, play_round, GameConfig};
use mixprobe::mix::MixStrategy;
use mixprobe::seed;

fn main() -> mixprobe::Result<()> {
    let config = GameConfig {
        users: 30,
        rate: 0.03,
        strategy: MixStrategy::threshold(10),
        seq_len: 1024,
        ..GameConfig::default()
    };
    let mut rng = seed::rng(0);
    for s in 0..8 {
        let g = play_round(&config, s)?;
        let o = evaluate_window(&g, 0..config.seq_len, &mut rng);
        println!(
            "round {s}: suspects {} / {} -> {}, b={}  msgs={:<2} log-odds={:>7.2}  guess={} {}",
            g.suspects.0,
            g.suspects.1,
            g.recipient,
            g.b,
            o.messages,
            o.belief_log_odds,
            o.guess,
            if o.guess == g.b { "ok" } else { "wrong" }
        );
    }
    Ok(())
}
