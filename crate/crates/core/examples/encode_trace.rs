//! Encodes a short trace from a five-user, two-layer network as link ids
//! and decodes it back.
//!
//!     cargo run --example encode_trace

use mixprobe::encoding::{decode, encode, prepend_cls, Window};
use mixprobe::mix::MixStrategy;
use mixprobe::traffic::{assign_contacts, simulate, BurnIn, NodeSpec, Population, Topology};

fn main() -> mixprobe::Result<()> {
    let node = |honest| NodeSpec { strategy: MixStrategy::threshold(3), honest };
    let topology = Topology::new(5, vec![vec![node(true), node(true)], vec![node(false)]])?;
    let links = topology.links();
    println!("{} links, vocabulary {}", links.len(), links.vocab_size());

    let population = assign_contacts(Population::uniform(5, 0.2)?, 3)?;
    let trace = simulate(&topology, &population, 30, &BurnIn { base: 20, jitter: 10 }, 3)?;
    let n = trace.len().min(256);
    let seq = prepend_cls(&encode(&trace, Window::new(0, n), 256, links)?);
    println!("tokens: {:?} ... ({} active)", &seq.tokens()[..n.min(24)], seq.active());

    for link in decode(&seq, links)?.iter().take(8) {
        println!("  {} -> {}", link.from, link.to);
    }
    Ok(())
}
