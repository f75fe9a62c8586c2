//! How a pool mix smears a sender across flushes.
//!
//! Three users feed a pool mix that flushes at 4 and keeps 2. User 0 sends
//! only in the first batch; afterwards the retained mass leaks out a little
//! further with each flush.
//!
//!     cargo run --example pool_provenance

use mixprobe::metrics::entropy_bits;
use mixprobe::mix::{MixStrategy, ProvenanceTracker};

fn main() -> mixprobe::Result<()> {
    let mut tracker = ProvenanceTracker::new(MixStrategy::pool(4, 2), 3);
    let mut t = 0.0;
    let mut senders = vec![0, 0, 1, 2];
    for round in 0..6 {
        for &u in &senders {
            t += 1.0;
            tracker.ingest_user(u, t);
        }
        let post = tracker.flush(2)?;
        println!(
            "flush {round}: P(user0)={:.4} P(user1)={:.4} P(user2)={:.4}  H={:.3} bits",
            post[0],
            post[1],
            post[2],
            entropy_bits(&post)
        );
        // later batches: two fresh messages, alternating users 1 and 2
        senders = vec![1 + round % 2, 2 - round % 2];
    }
    Ok(())
}
