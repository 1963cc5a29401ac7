//! Next-k-mer classification dataset.
//!
//! Each example takes a window of at least `50 + k` bases, hybrid-encodes
//! the first 50 with special tokens, pads the ids to a fixed budget of 80,
//! and labels it with the k bases that follow (1-based positions 51 to
//! 50 + k, i.e. `bases[50..50 + k]`) as one of 4^k classes.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{to_jsonl, write_atomic};
use crate::error::{Error, Result};
use crate::kmer::{decode_kmer, encode_kmer};
use crate::sequence_io::{split_items, NucleotideSequence};
use crate::vocab::{HybridTokenizer, PAD_ID};

/// Number of leading bases used as model input.
pub const INPUT_BASES: usize = 50;
/// Fixed length of every `input_ids` vector.
pub const TOKEN_BUDGET: usize = 80;
pub const MIN_LABEL_K: usize = 2;
pub const MAX_LABEL_K: usize = 6;

/// Class index of a k-mer: base-4 value with A=0, C=1, G=2, T=3.
pub fn label_of(kmer: &str) -> Result<u32> {
    encode_kmer(kmer)
}

pub fn kmer_of(label: u32, k: usize) -> Result<String> {
    decode_kmer(label, k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextKmerExample {
    pub input_ids: Vec<u32>,
    pub label: u32,
    pub k: usize,
    pub source_id: String,
    pub offset: usize,
}

fn check_label_k(k: usize) -> Result<()> {
    if (MIN_LABEL_K..=MAX_LABEL_K).contains(&k) {
        Ok(())
    } else {
        Err(Error::param(
            "k",
            format!("next-k-mer k must be in {MIN_LABEL_K}..={MAX_LABEL_K}, got {k}"),
        ))
    }
}

pub fn make_example(
    window: &NucleotideSequence,
    k: usize,
    tokenizer: &HybridTokenizer<'_>,
) -> Result<NextKmerExample> {
    check_label_k(k)?;
    let needed = INPUT_BASES + k;
    if window.len() < needed {
        return Err(Error::WindowTooShort {
            len: window.len(),
            needed,
        });
    }
    let bases = window.bases();
    let enc = tokenizer.encode(&bases[..INPUT_BASES], true)?;
    if enc.len() > TOKEN_BUDGET {
        return Err(Error::TokenBudgetExceeded {
            needed: enc.len(),
            budget: TOKEN_BUDGET,
        });
    }
    let mut input_ids = enc.ids;
    input_ids.resize(TOKEN_BUDGET, PAD_ID);
    Ok(NextKmerExample {
        input_ids,
        label: label_of(&bases[INPUT_BASES..needed])?,
        k,
        source_id: window.source_id().to_owned(),
        offset: window.offset(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMode {
    /// Any failing window fails the whole run.
    #[default]
    Strict,
    /// Failing windows are skipped and reported.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub test: usize,
    pub skipped: usize,
}

#[derive(Debug)]
pub struct NextKmerDataset {
    pub train: Vec<NextKmerExample>,
    pub test: Vec<NextKmerExample>,
    /// Windows that failed in [`ErrorMode::Skip`], with provenance attached.
    pub skipped: Vec<Error>,
}

impl NextKmerDataset {
    pub fn counts(&self) -> SplitCounts {
        SplitCounts {
            train: self.train.len(),
            test: self.test.len(),
            skipped: self.skipped.len(),
        }
    }
}

/// Sidecar written next to the JSONL files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextKmerManifest {
    pub k: usize,
    pub vocab_digest: String,
    pub merge_digest: String,
    pub counts: SplitCounts,
    pub split_seed: u64,
    pub train_fraction: f64,
    pub token_budget: usize,
    pub input_bases: usize,
}

/// Splits the windows (seeded shuffle, cut at `round(fraction * n)`) and
/// builds one example per window. Examples keep the split's order.
pub fn emit_nextkmer_dataset(
    windows: Vec<NucleotideSequence>,
    k: usize,
    tokenizer: &HybridTokenizer<'_>,
    train_fraction: f64,
    seed: u64,
    mode: ErrorMode,
) -> Result<NextKmerDataset> {
    check_label_k(k)?;
    let (train_w, test_w) = split_items(windows, train_fraction, seed)?;
    let build = |ws: &[NucleotideSequence]| -> Vec<Result<NextKmerExample>> {
        ws.par_iter()
            .map(|w| {
                make_example(w, k, tokenizer).map_err(|e| e.at_segment(w.source_id(), w.offset()))
            })
            .collect()
    };
    let mut skipped = Vec::new();
    let mut collect = |results: Vec<Result<NextKmerExample>>| -> Result<Vec<NextKmerExample>> {
        let mut out = Vec::with_capacity(results.len());
        for r in results {
            match (r, mode) {
                (Ok(ex), _) => out.push(ex),
                (Err(e), ErrorMode::Strict) => return Err(e),
                (Err(e), ErrorMode::Skip) => skipped.push(e),
            }
        }
        Ok(out)
    };
    let train = collect(build(&train_w))?;
    let test = collect(build(&test_w))?;
    Ok(NextKmerDataset {
        train,
        test,
        skipped,
    })
}

/// Writes `train.jsonl`, `test.jsonl` and `manifest.json` into `dir`.
pub fn write_dataset(
    dir: &Path,
    dataset: &NextKmerDataset,
    manifest: &NextKmerManifest,
) -> Result<()> {
    write_atomic(dir.join("train.jsonl"), &to_jsonl(&dataset.train)?)?;
    write_atomic(dir.join("test.jsonl"), &to_jsonl(&dataset.test)?)?;
    let mut m = serde_json::to_vec_pretty(manifest)?;
    m.push(b'\n');
    write_atomic(dir.join("manifest.json"), &m)
}
