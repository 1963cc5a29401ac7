//! Byte pair encoding over the nucleotide alphabet.
//!
//! Training starts from the four single-base tokens and repeatedly merges
//! the most frequent adjacent pair. Pair counts include every adjacent
//! position (so `AAAA` holds three `(A, A)` pairs); replacement is
//! left-to-right and non-overlapping. Ties on count go to the
//! lexicographically smallest `(left, right)` pair, which makes training a
//! pure function of the corpus.
//!
//! Encoding replays the learned rules in rank order. [`MergeTable::encode_ids`]
//! does this with a priority queue over a linked list of symbols, which
//! yields exactly the same tokens as a literal rule-by-rule replay (see
//! [`oracle::encode`]) because a merge can only create pairs whose rule has
//! a higher rank than the merge itself.

pub mod oracle;
mod train;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmer::{base_code, ALPHABET};

pub use train::{bpe_train, TrainConfig, Trainer, DEFAULT_CYCLES, DEFAULT_MIN_PAIR_COUNT};

/// Internal token id. Ids 0..4 are `A`, `C`, `G`, `T`; later ids are the
/// distinct merge results in order of first appearance.
pub type TokenId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub result: String,
    pub rank: usize,
}

/// Ordered list of learned merge rules plus the lookup structures used to
/// apply them.
#[derive(Debug, Clone)]
pub struct MergeTable {
    rules: Vec<MergeRule>,
    corpus_digest: String,
    early_stop: bool,
    tokens: Vec<String>,
    token_ids: FxHashMap<String, TokenId>,
    // (left, right) -> (rank, result)
    pair_rank: FxHashMap<(TokenId, TokenId), (u32, TokenId)>,
}

impl PartialEq for MergeTable {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
            && self.corpus_digest == other.corpus_digest
            && self.early_stop == other.early_stop
    }
}

impl Eq for MergeTable {}

impl MergeTable {
    /// Builds a table from `(left, right)` pairs in rank order, checking that
    /// every operand is a base or the result of an earlier rule.
    pub fn from_pairs<I, L, R>(
        pairs: I,
        corpus_digest: impl Into<String>,
        early_stop: bool,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (L, R)>,
        L: Into<String>,
        R: Into<String>,
    {
        let mut table = MergeTable {
            rules: Vec::new(),
            corpus_digest: corpus_digest.into(),
            early_stop,
            tokens: Vec::new(),
            token_ids: FxHashMap::default(),
            pair_rank: FxHashMap::default(),
        };
        for b in ALPHABET {
            table.intern((b as char).to_string());
        }
        for (rank, (left, right)) in pairs.into_iter().enumerate() {
            let (left, right) = (left.into(), right.into());
            let l = *table.token_ids.get(&left).ok_or_else(|| {
                Error::InvalidMergeTable(format!(
                    "rule {rank}: left operand {left:?} is not derivable"
                ))
            })?;
            let r = *table.token_ids.get(&right).ok_or_else(|| {
                Error::InvalidMergeTable(format!(
                    "rule {rank}: right operand {right:?} is not derivable"
                ))
            })?;
            let result = format!("{left}{right}");
            let id = table.intern(result.clone());
            if table.pair_rank.insert((l, r), (rank as u32, id)).is_some() {
                return Err(Error::InvalidMergeTable(format!(
                    "rule {rank}: pair ({left:?}, {right:?}) appears twice"
                )));
            }
            table.rules.push(MergeRule {
                left,
                right,
                result,
                rank,
            });
        }
        Ok(table)
    }

    /// A table with no rules; encoding yields single-base tokens.
    pub fn empty() -> Self {
        Self::from_pairs(Vec::<(String, String)>::new(), String::new(), false)
            .expect("empty table is valid")
    }

    fn intern(&mut self, s: String) -> TokenId {
        if let Some(&id) = self.token_ids.get(&s) {
            return id;
        }
        let id = self.tokens.len() as TokenId;
        self.tokens.push(s.clone());
        self.token_ids.insert(s, id);
        id
    }

    pub fn alphabet(&self) -> &[String] {
        &self.tokens[..ALPHABET.len()]
    }

    pub fn rules(&self) -> &[MergeRule] {
        &self.rules
    }

    /// Number of completed merge cycles (one rule each).
    pub fn cycles(&self) -> usize {
        self.rules.len()
    }

    pub fn corpus_digest(&self) -> &str {
        &self.corpus_digest
    }

    /// True when training stopped before the requested number of cycles.
    pub fn early_stop(&self) -> bool {
        self.early_stop
    }

    /// Distinct token strings: the alphabet followed by distinct merge
    /// results. Can be shorter than `4 + cycles` when two rules produce the
    /// same string.
    pub fn token_strings(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn token_id(&self, s: &str) -> Option<TokenId> {
        self.token_ids.get(s).copied()
    }

    /// The table made of the first `n` rules of this one.
    pub fn prefix(&self, n: usize) -> MergeTable {
        let n = n.min(self.rules.len());
        Self::from_pairs(
            self.rules[..n]
                .iter()
                .map(|r| (r.left.clone(), r.right.clone())),
            self.corpus_digest.clone(),
            false,
        )
        .expect("prefix of a valid table is valid")
    }

    /// Encodes canonical bases into internal token ids.
    ///
    /// Non-ACGT bytes are not expected; they are mapped to `A` so the
    /// function stays total.
    pub fn encode_ids(&self, bases: &[u8]) -> Vec<TokenId> {
        let n = bases.len();
        if n == 0 {
            return Vec::new();
        }
        let mut ids: Vec<TokenId> = bases.iter().map(|&b| base_code(b).unwrap_or(0)).collect();
        if self.rules.is_empty() || n == 1 {
            return ids;
        }

        const NONE: u32 = u32::MAX;
        let mut prev: Vec<u32> = (0..n as u32).map(|i| i.wrapping_sub(1)).collect();
        prev[0] = NONE;
        let mut next: Vec<u32> = (1..=n as u32).collect();
        next[n - 1] = NONE;
        let mut alive = vec![true; n];

        let mut heap = BinaryHeap::with_capacity(n);
        for i in 0..n - 1 {
            if let Some(&(rank, _)) = self.pair_rank.get(&(ids[i], ids[i + 1])) {
                heap.push(Reverse((rank, i as u32)));
            }
        }

        while let Some(Reverse((rank, pos))) = heap.pop() {
            let p = pos as usize;
            if !alive[p] || next[p] == NONE {
                continue;
            }
            let q = next[p] as usize;
            let Some(&(r, merged)) = self.pair_rank.get(&(ids[p], ids[q])) else {
                continue;
            };
            if r != rank {
                continue;
            }
            ids[p] = merged;
            alive[q] = false;
            next[p] = next[q];
            if next[q] != NONE {
                prev[next[q] as usize] = pos;
            }
            if prev[p] != NONE {
                let l = prev[p] as usize;
                if let Some(&(r2, _)) = self.pair_rank.get(&(ids[l], merged)) {
                    heap.push(Reverse((r2, prev[p])));
                }
            }
            if next[p] != NONE {
                if let Some(&(r2, _)) = self.pair_rank.get(&(merged, ids[next[p] as usize])) {
                    heap.push(Reverse((r2, pos)));
                }
            }
        }

        let mut out = Vec::new();
        let mut i = 0u32;
        while i != NONE {
            out.push(ids[i as usize]);
            i = next[i as usize];
        }
        out
    }

    /// Encodes bases into token strings; concatenating them gives back the input.
    pub fn encode(&self, bases: &str) -> Vec<String> {
        self.encode_ids(bases.as_bytes())
            .into_iter()
            .map(|id| self.token(id).to_owned())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&MergeTableFile::from(self))?;
        s.push('\n');
        Ok(s)
    }

    /// SHA-256 of the JSON form.
    pub fn digest(&self) -> Result<String> {
        Ok(crate::artifact::sha256_hex(self.to_json()?.as_bytes()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: MergeTableFile = serde_json::from_str(s)?;
        file.try_into()
    }
}

/// Applies the table to one sequence.
pub fn bpe_encode(bases: &str, table: &MergeTable) -> Vec<String> {
    table.encode(bases)
}

/// On-disk form: `{alphabet, rules: [[left, right], ...], cycles, corpus_digest, early_stop}`.
#[derive(Debug, Serialize, Deserialize)]
struct MergeTableFile {
    alphabet: Vec<String>,
    rules: Vec<[String; 2]>,
    cycles: usize,
    corpus_digest: String,
    early_stop: bool,
}

impl From<&MergeTable> for MergeTableFile {
    fn from(t: &MergeTable) -> Self {
        MergeTableFile {
            alphabet: t.alphabet().to_vec(),
            rules: t
                .rules
                .iter()
                .map(|r| [r.left.clone(), r.right.clone()])
                .collect(),
            cycles: t.cycles(),
            corpus_digest: t.corpus_digest.clone(),
            early_stop: t.early_stop,
        }
    }
}

impl TryFrom<MergeTableFile> for MergeTable {
    type Error = Error;

    fn try_from(f: MergeTableFile) -> Result<Self> {
        let expected: Vec<String> = ALPHABET.iter().map(|&b| (b as char).to_string()).collect();
        if f.alphabet != expected {
            return Err(Error::InvalidMergeTable(format!(
                "alphabet must be {expected:?}, got {:?}",
                f.alphabet
            )));
        }
        if f.cycles != f.rules.len() {
            return Err(Error::InvalidMergeTable(format!(
                "cycles = {} but {} rules are listed",
                f.cycles,
                f.rules.len()
            )));
        }
        MergeTable::from_pairs(
            f.rules.into_iter().map(|[l, r]| (l, r)),
            f.corpus_digest,
            f.early_stop,
        )
    }
}

impl Serialize for MergeTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MergeTableFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MergeTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MergeTableFile::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(pairs: &[(&str, &str)]) -> MergeTable {
        MergeTable::from_pairs(pairs.iter().copied(), "", false).unwrap()
    }

    #[test]
    fn hand_traced_encodings() {
        let t = table(&[("A", "C")]);
        assert_eq!(t.encode("ACAC"), ["AC", "AC"]);
        assert_eq!(t.encode("GGGG"), ["G", "G", "G", "G"]);
        assert_eq!(t.encode("ACACACACAC"), ["AC"; 5]);
        assert_eq!(table(&[("A", "A")]).encode("AAAAA"), ["AA", "AA", "A"]);
    }

    #[test]
    fn rank_order_beats_position() {
        // (C,G) outranks (A,C): ACG -> A CG, not AC G.
        let t = table(&[("C", "G"), ("A", "C")]);
        assert_eq!(t.encode("ACG"), ["A", "CG"]);
        let t = table(&[("A", "C"), ("C", "G")]);
        assert_eq!(t.encode("ACG"), ["AC", "G"]);
    }

    #[test]
    fn duplicate_results_share_a_token() {
        let t = table(&[("A", "C"), ("C", "G"), ("A", "CG"), ("AC", "G")]);
        assert_eq!(t.cycles(), 4);
        assert_eq!(t.token_strings(), ["A", "C", "G", "T", "AC", "CG", "ACG"]);
    }

    #[test]
    fn load_rejects_underivable_operand() {
        let err = MergeTable::from_pairs([("AC", "G")], "", false).unwrap_err();
        assert_eq!(err.kind(), "InvalidMergeTable");
        let json = r#"{"alphabet":["A","C","G","T"],"rules":[["A","C"]],"cycles":2,"corpus_digest":"","early_stop":false}"#;
        assert!(MergeTable::from_json(json).is_err());
        let json = r#"{"alphabet":["A","C","G","T","N"],"rules":[],"cycles":0,"corpus_digest":"","early_stop":false}"#;
        assert!(MergeTable::from_json(json).is_err());
    }

    #[test]
    fn json_shape_and_round_trip() {
        let t = table(&[("A", "C"), ("AC", "G")]);
        let v: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "alphabet": ["A", "C", "G", "T"],
                "rules": [["A", "C"], ["AC", "G"]],
                "cycles": 2,
                "corpus_digest": "",
                "early_stop": false
            })
        );
        assert_eq!(MergeTable::from_json(&t.to_json().unwrap()).unwrap(), t);
    }

    #[test]
    fn empty_table_is_identity() {
        let t = MergeTable::empty();
        assert_eq!(t.encode("GATTACA").concat(), "GATTACA");
        assert_eq!(t.encode("GATTACA").len(), 7);
        assert!(t.encode("").is_empty());
    }
}
