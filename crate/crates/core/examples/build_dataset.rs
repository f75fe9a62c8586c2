//! Writes a small labelled dataset to disk and reads a split back.
//!
//!     cargo run --release --example build_dataset -- [dir]

use std::path::PathBuf;

use mixprobe::dataset::{build_dataset, read_manifest, read_rows, write_dataset, SplitRatios, SPLITS};
use mixprobe::game::GameConfig;
use mixprobe::mix::MixStrategy;

fn main() -> mixprobe::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("mixprobe-dataset"), PathBuf::from);
    let config = GameConfig {
        users: 20,
        rate: 0.05,
        strategy: MixStrategy::threshold(5),
        seq_len: 512,
        ..GameConfig::default()
    };
    let data = build_dataset(&config, 100, SplitRatios::default(), 11)?;
    write_dataset(&dir, &config, SplitRatios::default(), 11, &data)?;

    let manifest = read_manifest(&dir)?;
    println!("{}: vocab {} seq_len {} hash {}", dir.display(), manifest.vocab_size, manifest.seq_len, &manifest.config_hash[..12]);
    for split in SPLITS {
        let rows = read_rows(&dir, split)?;
        let ones = rows.iter().filter(|r| r.label == 1).count();
        println!("  {split:<10} {:>3} rows, {ones} labelled 1", rows.len());
    }
    Ok(())
}
