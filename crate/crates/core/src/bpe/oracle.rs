//! Reference implementations used to cross-check the optimized trainer and
//! encoder. Both work directly on token strings and rescan everything on
//! every cycle; they share no code with the fast paths beyond
//! [`MergeTable::from_pairs`].

use std::collections::BTreeMap;

use super::{MergeTable, TrainConfig};
use crate::artifact::corpus_digest;
use crate::error::{Error, Result};

/// Largest corpus (total bases) the oracle trainer accepts.
pub const ORACLE_LIMIT: usize = 10_000;

fn replace_pair(seq: &[String], left: &str, right: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        if i + 1 < seq.len() && seq[i] == left && seq[i + 1] == right {
            out.push(format!("{left}{right}"));
            i += 2;
        } else {
            out.push(seq[i].clone());
            i += 1;
        }
    }
    out
}

/// Naive BPE training with the same contract as [`super::bpe_train`].
pub fn train<S: AsRef<str>>(corpus: &[S], config: TrainConfig) -> Result<MergeTable> {
    let total: usize = corpus.iter().map(|s| s.as_ref().len()).sum();
    if total > ORACLE_LIMIT {
        return Err(Error::CorpusTooLarge {
            len: total,
            limit: ORACLE_LIMIT,
        });
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    for s in corpus {
        if let Some((position, base)) = s
            .as_ref()
            .char_indices()
            .find(|&(_, c)| !"ACGT".contains(c))
        {
            return Err(Error::InvalidBase { base, position });
        }
    }

    let mut working: Vec<Vec<String>> = corpus
        .iter()
        .map(|s| s.as_ref().chars().map(String::from).collect())
        .collect();
    let mut rules: Vec<(String, String)> = Vec::new();
    let mut early_stop = false;

    for _ in 0..config.cycles {
        let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for seq in &working {
            for i in 1..seq.len() {
                *counts
                    .entry((seq[i - 1].clone(), seq[i].clone()))
                    .or_default() += 1;
            }
        }
        // BTreeMap iterates in key order, so strict `>` keeps the smallest key on ties.
        let mut best: Option<(&(String, String), u64)> = None;
        for (pair, &count) in &counts {
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((pair, count));
            }
        }
        match best {
            Some(((l, r), count)) if count >= config.min_pair_count => {
                let (l, r) = (l.clone(), r.clone());
                working = working.iter().map(|s| replace_pair(s, &l, &r)).collect();
                rules.push((l, r));
            }
            _ => {
                early_stop = true;
                break;
            }
        }
    }

    MergeTable::from_pairs(
        rules,
        corpus_digest(corpus.iter().map(|s| s.as_ref())),
        early_stop,
    )
}

/// Replays every rule in rank order over the whole sequence.
pub fn encode(bases: &str, table: &MergeTable) -> Vec<String> {
    let mut seq: Vec<String> = bases.chars().map(String::from).collect();
    for rule in table.rules() {
        seq = replace_pair(&seq, &rule.left, &rule.right);
    }
    seq
}
