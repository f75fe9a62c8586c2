//! Labeled game datasets on disk.
//!
//! A dataset directory holds `manifest.json`, one `<split>.jsonl` file of
//! token rows per split and a `<split>.ledger.jsonl` companion with the
//! ground truth needed to score any sub-window.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::TokenSequence;
use crate::error::{Error, Result};
use crate::game::{play_rounds, GameConfig, GameInstance, SampleLedger};
use crate::mix::UserId;
use crate::traffic::Endpoint;

pub const FORMAT_VERSION: u32 = 1;
pub const SPLITS: [&str; 3] = ["train", "validation", "test"];

/// Hex SHA-256 of the config's JSON form.
pub fn config_hash(config: &GameConfig) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.8, validation: 0.1, test: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn get(&self, split: &str) -> usize {
        match split {
            "train" => self.train,
            "validation" => self.validation,
            _ => self.test,
        }
    }
}

/// Splits `n` samples: validation and test get their rounded share, train
/// the remainder.
pub fn split_sizes(n: usize, ratios: SplitRatios) -> Result<SplitSizes> {
    if n < 3 {
        return Err(Error::Insufficient(format!("{n} samples, need at least 3")));
    }
    let r = [ratios.train, ratios.validation, ratios.test];
    if r.iter().any(|x| !(0.0..=1.0).contains(x)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("split ratios {r:?} must be in [0, 1] and sum to 1")));
    }
    let validation = (n as f64 * ratios.validation).round() as usize;
    let test = (n as f64 * ratios.test).round() as usize;
    let train = n
        .checked_sub(validation + test)
        .ok_or_else(|| Error::config("split ratios round past the sample count"))?;
    Ok(SplitSizes { train, validation, test })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub train: Vec<GameInstance>,
    pub validation: Vec<GameInstance>,
    pub test: Vec<GameInstance>,
}

impl Dataset {
    pub fn split(&self, name: &str) -> &[GameInstance] {
        match name {
            "train" => &self.train,
            "validation" => &self.validation,
            _ => &self.test,
        }
    }
}

/// Plays every round of the three splits. Each split derives its round
/// seeds from its own label, so no round is shared between splits.
pub fn build_dataset(config: &GameConfig, n_samples: usize, ratios: SplitRatios, seed: u64) -> Result<Dataset> {
    let sizes = split_sizes(n_samples, ratios)?;
    config.validate()?;
    Ok(Dataset {
        train: play_rounds(config, sizes.train, "train", seed)?,
        validation: play_rounds(config, sizes.validation, "validation", seed)?,
        test: play_rounds(config, sizes.test, "test", seed)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub id: u32,
    pub from: Endpoint,
    pub to: Endpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub vocab_size: u32,
    pub cls_token: u32,
    pub seq_len: usize,
    pub link_map: Vec<LinkRecord>,
    pub splits: SplitSizes,
    pub ratios: SplitRatios,
    pub master_seed: u64,
    pub config: GameConfig,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMeta {
    pub config_hash: String,
    pub seed: u64,
    pub suspects: (UserId, UserId),
    pub recipient: UserId,
    pub messages_from_true_sender: usize,
}

/// One line of a split file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub tokens: Vec<u32>,
    pub label: u8,
    pub meta: RowMeta,
}

/// One line of a split's ledger file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub seed: u64,
    pub burn_in: u64,
    #[serde(flatten)]
    pub ledger: SampleLedger,
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Writes the dataset into `dir`, creating it if needed.
pub fn write_dataset(dir: &Path, config: &GameConfig, ratios: SplitRatios, seed: u64, data: &Dataset) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let topology = config.topology.build(config.users, config.strategy)?;
    let links = topology.links();
    let hash = config_hash(config)?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        vocab_size: links.vocab_size(),
        cls_token: links.cls_token(),
        seq_len: config.seq_len,
        link_map: links.iter().map(|(id, l)| LinkRecord { id: id.0, from: l.from, to: l.to }).collect(),
        splits: SplitSizes { train: data.train.len(), validation: data.validation.len(), test: data.test.len() },
        ratios,
        master_seed: seed,
        config: config.clone(),
        config_hash: hash.clone(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    for split in SPLITS {
        let rows = data.split(split).iter().map(|g| Row {
            tokens: g.observation.tokens().to_vec(),
            label: g.b,
            meta: RowMeta {
                config_hash: hash.clone(),
                seed: g.seed,
                suspects: g.suspects,
                recipient: g.recipient,
                messages_from_true_sender: g.messages_from_true_sender(),
            },
        });
        write_jsonl(&dir.join(format!("{split}.jsonl")), rows)?;
        let ledgers = data.split(split).iter().map(|g| LedgerRow {
            seed: g.seed,
            burn_in: g.burn_in,
            ledger: g.ledger.clone(),
        });
        write_jsonl(&dir.join(format!("{split}.ledger.jsonl")), ledgers)?;
    }
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    if m.format_version != FORMAT_VERSION {
        return Err(Error::config(format!("unsupported dataset format {}", m.format_version)));
    }
    Ok(m)
}

pub fn read_rows(dir: &Path, split: &str) -> Result<Vec<Row>> {
    read_jsonl(&dir.join(format!("{split}.jsonl")))
}

/// Reassembles the game instances of one split from rows and ledger.
pub fn read_split(dir: &Path, manifest: &Manifest, split: &str) -> Result<Vec<GameInstance>> {
    let rows = read_rows(dir, split)?;
    let ledgers: Vec<LedgerRow> = read_jsonl(&dir.join(format!("{split}.ledger.jsonl")))?;
    if rows.len() != ledgers.len() || rows.len() != manifest.splits.get(split) {
        return Err(Error::config(format!(
            "{split}: {} rows, {} ledger lines, manifest says {}",
            rows.len(),
            ledgers.len(),
            manifest.splits.get(split)
        )));
    }
    rows.into_iter()
        .zip(ledgers)
        .map(|(row, l)| {
            if row.meta.seed != l.seed || row.meta.config_hash != manifest.config_hash {
                return Err(Error::config(format!("{split}: row and ledger disagree for seed {}", row.meta.seed)));
            }
            Ok(GameInstance {
                seed: row.meta.seed,
                suspects: row.meta.suspects,
                recipient: row.meta.recipient,
                b: row.label,
                burn_in: l.burn_in,
                observation: TokenSequence::new(row.tokens, manifest.vocab_size)?,
                ledger: l.ledger,
            })
        })
        .collect()
}

/// Regenerates a dataset from its manifest alone.
pub fn regenerate(manifest: &Manifest) -> Result<Dataset> {
    let n = manifest.splits.train + manifest.splits.validation + manifest.splits.test;
    build_dataset(&manifest.config, n, manifest.ratios, manifest.master_seed)
}
