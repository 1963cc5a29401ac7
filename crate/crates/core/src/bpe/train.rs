use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{MergeRule, MergeTable, TokenId};
use crate::artifact::corpus_digest;
use crate::error::{Error, Result};
use crate::kmer::{base_code, ALPHABET};

pub const DEFAULT_CYCLES: usize = 600;
pub const DEFAULT_MIN_PAIR_COUNT: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainConfig {
    pub cycles: usize,
    /// Training stops once the most frequent pair occurs fewer times than this.
    pub min_pair_count: u64,
}

impl TrainConfig {
    pub fn new(cycles: usize) -> Self {
        Self {
            cycles,
            min_pair_count: DEFAULT_MIN_PAIR_COUNT,
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::new(DEFAULT_CYCLES)
    }
}

type Pair = (TokenId, TokenId);

/// Incremental BPE trainer.
///
/// Keeps global pair counts plus, per pair, the list of sequences that may
/// contain it. A merge only rewrites those sequences and adjusts the counts
/// of the pairs around each merged site, so one cycle costs time
/// proportional to the number of affected sequences rather than the corpus.
pub struct Trainer {
    seqs: Vec<Vec<TokenId>>,
    tokens: Vec<String>,
    token_ids: FxHashMap<String, TokenId>,
    counts: FxHashMap<Pair, u64>,
    // may hold stale or duplicate sequence indices
    locations: FxHashMap<Pair, Vec<u32>>,
    rules: Vec<(String, String)>,
    digest: String,
    min_pair_count: u64,
}

impl Trainer {
    pub fn new<S: AsRef<str> + Sync>(corpus: &[S]) -> Result<Self> {
        Self::with_min_pair_count(corpus, DEFAULT_MIN_PAIR_COUNT)
    }

    pub fn with_min_pair_count<S: AsRef<str> + Sync>(
        corpus: &[S],
        min_pair_count: u64,
    ) -> Result<Self> {
        if corpus.iter().all(|s| s.as_ref().is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        let seqs = corpus
            .par_iter()
            .map(|s| {
                let s = s.as_ref();
                s.bytes()
                    .enumerate()
                    .map(|(i, b)| {
                        base_code(b).ok_or(Error::InvalidBase {
                            base: s[i..].chars().next().unwrap_or('?'),
                            position: i,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let counts = seqs
            .par_iter()
            .fold(FxHashMap::default, |mut acc: FxHashMap<Pair, u64>, seq| {
                for w in seq.windows(2) {
                    *acc.entry((w[0], w[1])).or_default() += 1;
                }
                acc
            })
            .reduce(FxHashMap::default, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });

        let mut locations: FxHashMap<Pair, Vec<u32>> = FxHashMap::default();
        for (i, seq) in seqs.iter().enumerate() {
            for w in seq.windows(2) {
                let v = locations.entry((w[0], w[1])).or_default();
                if v.last() != Some(&(i as u32)) {
                    v.push(i as u32);
                }
            }
        }

        let mut tokens = Vec::new();
        let mut token_ids = FxHashMap::default();
        for (i, b) in ALPHABET.iter().enumerate() {
            let s = (*b as char).to_string();
            token_ids.insert(s.clone(), i as TokenId);
            tokens.push(s);
        }

        Ok(Trainer {
            seqs,
            tokens,
            token_ids,
            counts,
            locations,
            rules: Vec::new(),
            digest: corpus_digest(corpus.iter().map(|s| s.as_ref())),
            min_pair_count,
        })
    }

    fn best_pair(&self) -> Option<(Pair, u64)> {
        let mut best: Option<(Pair, u64)> = None;
        for (&pair, &count) in &self.counts {
            let better = match best {
                None => true,
                Some((b, c)) => {
                    count > c
                        || (count == c
                            && (
                                self.tokens[pair.0 as usize].as_str(),
                                self.tokens[pair.1 as usize].as_str(),
                            ) < (
                                self.tokens[b.0 as usize].as_str(),
                                self.tokens[b.1 as usize].as_str(),
                            ))
                }
            };
            if better {
                best = Some((pair, count));
            }
        }
        best
    }

    /// Runs one merge cycle. Returns `None` when no pair reaches the
    /// minimum count.
    pub fn step(&mut self) -> Option<MergeRule> {
        let (pair, count) = self.best_pair()?;
        if count < self.min_pair_count {
            return None;
        }
        let left = self.tokens[pair.0 as usize].clone();
        let right = self.tokens[pair.1 as usize].clone();
        let result = format!("{left}{right}");
        let merged = match self.token_ids.get(&result) {
            Some(&id) => id,
            None => {
                let id = self.tokens.len() as TokenId;
                self.tokens.push(result.clone());
                self.token_ids.insert(result.clone(), id);
                id
            }
        };

        let mut seq_ids = self.locations.remove(&pair).unwrap_or_default();
        seq_ids.sort_unstable();
        seq_ids.dedup();
        for sid in seq_ids {
            self.merge_in_sequence(sid, pair, merged);
        }
        debug_assert!(!self.counts.contains_key(&pair));

        let rank = self.rules.len();
        self.rules.push((left.clone(), right.clone()));
        Some(MergeRule {
            left,
            right,
            result,
            rank,
        })
    }

    fn merge_in_sequence(&mut self, sid: u32, (a, b): Pair, merged: TokenId) {
        let old = &self.seqs[sid as usize];
        let n = old.len();
        let mut sites = Vec::new();
        let mut i = 0;
        while i + 1 < n {
            if old[i] == a && old[i + 1] == b {
                sites.push(i);
                i += 2;
            } else {
                i += 1;
            }
        }
        if sites.is_empty() {
            return;
        }

        let mut removed: Vec<Pair> = Vec::new();
        let mut added: Vec<Pair> = Vec::new();
        let mut local: Vec<TokenId> = Vec::new();
        // Sites at distance 2 form one cluster of back-to-back merges.
        let mut c = 0;
        while c < sites.len() {
            let mut e = c;
            while e + 1 < sites.len() && sites[e + 1] == sites[e] + 2 {
                e += 1;
            }
            let lo = sites[c];
            let hi = sites[e] + 1;
            let first_pair = lo.saturating_sub(1);
            let last_pair = hi.min(n - 2);
            for j in first_pair..=last_pair {
                removed.push((old[j], old[j + 1]));
            }
            local.clear();
            if lo > 0 {
                local.push(old[lo - 1]);
            }
            local.extend(std::iter::repeat_n(merged, e - c + 1));
            if hi + 1 < n {
                local.push(old[hi + 1]);
            }
            for w in local.windows(2) {
                added.push((w[0], w[1]));
            }
            c = e + 1;
        }

        let mut rebuilt = Vec::with_capacity(n - sites.len());
        let mut next_site = sites.iter().peekable();
        let mut i = 0;
        while i < n {
            if next_site.peek() == Some(&&i) {
                rebuilt.push(merged);
                next_site.next();
                i += 2;
            } else {
                rebuilt.push(old[i]);
                i += 1;
            }
        }
        self.seqs[sid as usize] = rebuilt;

        for p in removed {
            if let Some(c) = self.counts.get_mut(&p) {
                *c -= 1;
                if *c == 0 {
                    self.counts.remove(&p);
                }
            }
        }
        for p in added {
            *self.counts.entry(p).or_default() += 1;
            let v = self.locations.entry(p).or_default();
            if v.last() != Some(&sid) {
                v.push(sid);
            }
        }
    }

    /// Current tokenization of every training sequence.
    pub fn working_corpus(&self) -> Vec<Vec<&str>> {
        self.seqs
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&id| self.tokens[id as usize].as_str())
                    .collect()
            })
            .collect()
    }

    pub fn into_table(self, early_stop: bool) -> MergeTable {
        MergeTable::from_pairs(self.rules, self.digest, early_stop)
            .expect("trainer only emits derivable rules")
    }
}

/// Trains a merge table over `corpus`, running up to `config.cycles` cycles.
pub fn bpe_train<S: AsRef<str> + Sync>(corpus: &[S], config: TrainConfig) -> Result<MergeTable> {
    let mut trainer = Trainer::with_min_pair_count(corpus, config.min_pair_count)?;
    let mut early_stop = false;
    for cycle in 0..config.cycles {
        if trainer.step().is_none() {
            log::info!(
                "no pair reaches count {} after {cycle} cycles",
                config.min_pair_count
            );
            early_stop = true;
            break;
        }
    }
    Ok(trainer.into_table(early_stop))
}
