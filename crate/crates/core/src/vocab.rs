//! The merged k-mer ∪ BPE vocabulary and the hybrid encoding built on it.
//!
//! A segment is encoded twice, once as overlapping k-mers and once with
//! BPE, and the two streams are concatenated with the k-mer region first.
//! With specials the layout is `[CLS] kmers.. [SEP] bpe.. [SEP]`; the bare
//! layout is just `kmers.. bpe..`.

use std::collections::{BTreeSet, HashMap};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::artifact::sha256_hex;
use crate::bpe::MergeTable;
use crate::error::{Error, Result};
use crate::kmer::{self, kmer_codes};

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const MASK: &str = "[MASK]";
pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const SPECIAL_TOKENS: [&str; 5] = [CLS, SEP, MASK, PAD, UNK];

pub const CLS_ID: u32 = 0;
pub const SEP_ID: u32 = 1;
pub const MASK_ID: u32 = 2;
pub const PAD_ID: u32 = 3;
pub const UNK_ID: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabCounts {
    pub kmer: usize,
    pub bpe: usize,
    pub shared: usize,
    pub special: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabMetadata {
    pub k: usize,
    pub bpe_cycles: usize,
    pub corpus_digest: String,
    pub counts: VocabCounts,
}

/// Token string ↔ id map. Ids 0..5 are the special tokens, the rest are
/// sorted by (length, lexicographic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    id_of: HashMap<String, u32>,
    metadata: VocabMetadata,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    specials: Vec<String>,
    tokens: Vec<String>,
    metadata: VocabMetadata,
}

impl Vocabulary {
    /// Merges `kmer_tokens` with the distinct strings of `table` (alphabet
    /// included) and prepends the special tokens.
    pub fn from_token_sets<K, B>(
        kmer_tokens: K,
        bpe_tokens: B,
        k: usize,
        bpe_cycles: usize,
        corpus_digest: impl Into<String>,
    ) -> Self
    where
        K: IntoIterator,
        K::Item: AsRef<str>,
        B: IntoIterator,
        B::Item: AsRef<str>,
    {
        let kmer: BTreeSet<String> = kmer_tokens
            .into_iter()
            .map(|s| s.as_ref().to_owned())
            .collect();
        let bpe: BTreeSet<String> = bpe_tokens
            .into_iter()
            .map(|s| s.as_ref().to_owned())
            .collect();
        let shared = kmer.intersection(&bpe).count();
        let mut body: Vec<String> = kmer.union(&bpe).cloned().collect();
        body.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

        let tokens: Vec<String> = SPECIAL_TOKENS
            .iter()
            .map(|s| s.to_string())
            .chain(body)
            .collect();
        let counts = VocabCounts {
            kmer: kmer.len(),
            bpe: bpe.len(),
            shared,
            special: SPECIAL_TOKENS.len(),
            total: tokens.len(),
        };
        let id_of = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            tokens,
            id_of,
            metadata: VocabMetadata {
                k,
                bpe_cycles,
                corpus_digest: corpus_digest.into(),
                counts,
            },
        }
    }

    /// All 4^k k-mers plus every string the merge table can produce.
    pub fn build(k: usize, table: &MergeTable) -> Result<Self> {
        let kmers = kmer::kmer_vocabulary(k)?;
        Ok(build_vocabulary(&kmers, table))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.id_of.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Everything except the special tokens.
    pub fn body(&self) -> &[String] {
        &self.tokens[SPECIAL_TOKENS.len()..]
    }

    pub fn metadata(&self) -> &VocabMetadata {
        &self.metadata
    }

    pub fn k(&self) -> usize {
        self.metadata.k
    }

    pub fn to_json(&self) -> Result<String> {
        let file = VocabFile {
            specials: SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect(),
            tokens: self.tokens.clone(),
            metadata: self.metadata.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    /// One token per line; line number (0-based) is the id.
    pub fn to_text(&self) -> String {
        let mut s = self.tokens.join("\n");
        s.push('\n');
        s
    }

    /// SHA-256 of the JSON form.
    pub fn digest(&self) -> Result<String> {
        Ok(sha256_hex(self.to_json()?.as_bytes()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: VocabFile = serde_json::from_str(s)?;
        if file.specials != SPECIAL_TOKENS {
            return Err(Error::InvalidVocabulary(format!(
                "specials must be {SPECIAL_TOKENS:?}"
            )));
        }
        if file.tokens.len() < SPECIAL_TOKENS.len()
            || file.tokens[..SPECIAL_TOKENS.len()] != SPECIAL_TOKENS
        {
            return Err(Error::InvalidVocabulary(
                "tokens must start with the special tokens".into(),
            ));
        }
        if file.metadata.counts.total != file.tokens.len() {
            return Err(Error::InvalidVocabulary(format!(
                "metadata total {} != {} tokens",
                file.metadata.counts.total,
                file.tokens.len()
            )));
        }
        let mut id_of = HashMap::with_capacity(file.tokens.len());
        for (i, t) in file.tokens.iter().enumerate() {
            if id_of.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidVocabulary(format!("duplicate token {t:?}")));
            }
        }
        Ok(Vocabulary {
            tokens: file.tokens,
            id_of,
            metadata: file.metadata,
        })
    }
}

/// Vocabulary from an explicit k-mer list and a merge table. `k` is taken
/// from the k-mer token length.
pub fn build_vocabulary<S: AsRef<str>>(kmer_tokens: &[S], table: &MergeTable) -> Vocabulary {
    let k = kmer_tokens.first().map_or(0, |t| t.as_ref().len());
    Vocabulary::from_token_sets(
        kmer_tokens,
        table.token_strings(),
        k,
        table.cycles(),
        table.corpus_digest(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    /// Missing tokens become `[UNK]`.
    #[default]
    Lenient,
    /// Missing tokens are an error.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Kmer,
    Bpe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HybridEncoding {
    pub ids: Vec<u32>,
    pub kmer_region: Range<usize>,
    pub bpe_region: Range<usize>,
    pub with_specials: bool,
}

impl HybridEncoding {
    pub fn region(&self, region: Region) -> &[u32] {
        match region {
            Region::Kmer => &self.ids[self.kmer_region.clone()],
            Region::Bpe => &self.ids[self.bpe_region.clone()],
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Precomputed k-mer and BPE id lookups for one (vocabulary, table) pair.
pub struct HybridTokenizer<'a> {
    vocab: &'a Vocabulary,
    table: &'a MergeTable,
    k: usize,
    kmer_ids: Vec<u32>,
    bpe_ids: Vec<u32>,
    policy: UnknownPolicy,
}

impl<'a> HybridTokenizer<'a> {
    pub fn new(vocab: &'a Vocabulary, table: &'a MergeTable) -> Result<Self> {
        let k = vocab.k();
        kmer::check_k(k)?;
        let kmer_ids = kmer::kmer_vocabulary(k)?
            .iter()
            .map(|t| vocab.id(t).unwrap_or(UNK_ID))
            .collect();
        let bpe_ids = table
            .token_strings()
            .iter()
            .map(|t| vocab.id(t).unwrap_or(UNK_ID))
            .collect();
        if !vocab.metadata().corpus_digest.is_empty()
            && vocab.metadata().corpus_digest != table.corpus_digest()
        {
            log::warn!("vocabulary and merge table were built from different corpora");
        }
        Ok(Self {
            vocab,
            table,
            k,
            kmer_ids,
            bpe_ids,
            policy: UnknownPolicy::Lenient,
        })
    }

    pub fn with_policy(mut self, policy: UnknownPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vocab(&self) -> &'a Vocabulary {
        self.vocab
    }

    pub fn table(&self) -> &'a MergeTable {
        self.table
    }

    fn check(&self, id: u32, token: impl FnOnce() -> String) -> Result<u32> {
        if id == UNK_ID && self.policy == UnknownPolicy::Strict {
            Err(Error::UnknownToken(token()))
        } else {
            Ok(id)
        }
    }

    /// Hybrid encoding of canonical A/C/G/T bases.
    pub fn encode(&self, bases: &str, with_specials: bool) -> Result<HybridEncoding> {
        let bytes = bases.as_bytes();
        if bytes.len() < self.k {
            return Err(Error::SequenceTooShort {
                len: bytes.len(),
                k: self.k,
            });
        }
        let bpe = self.table.encode_ids(bytes);
        let n_kmer = bytes.len() - self.k + 1;
        let extra = if with_specials { 3 } else { 0 };
        let mut ids = Vec::with_capacity(n_kmer + bpe.len() + extra);

        if with_specials {
            ids.push(CLS_ID);
        }
        let kmer_start = ids.len();
        for (i, code) in kmer_codes(bytes, self.k).enumerate() {
            let id = self.kmer_ids[code as usize];
            ids.push(self.check(id, || bases[i..i + self.k].to_owned())?);
        }
        let kmer_region = kmer_start..ids.len();
        if with_specials {
            ids.push(SEP_ID);
        }
        let bpe_start = ids.len();
        for t in bpe {
            let id = self.bpe_ids[t as usize];
            ids.push(self.check(id, || self.table.token(t).to_owned())?);
        }
        let bpe_region = bpe_start..ids.len();
        if with_specials {
            ids.push(SEP_ID);
        }
        Ok(HybridEncoding {
            ids,
            kmer_region,
            bpe_region,
            with_specials,
        })
    }

    /// Token strings of the bare hybrid stream (k-mers then BPE).
    pub fn tokens(&self, bases: &str) -> Result<Vec<&'a str>> {
        let enc = self.encode(bases, false)?;
        Ok(enc
            .ids
            .iter()
            .map(|&id| self.vocab.token(id).unwrap_or(UNK))
            .collect())
    }
}

/// One-off hybrid encoding. For bulk work build a [`HybridTokenizer`] once.
pub fn hybrid_encode(
    bases: &str,
    vocab: &Vocabulary,
    table: &MergeTable,
    with_specials: bool,
    policy: UnknownPolicy,
) -> Result<HybridEncoding> {
    HybridTokenizer::new(vocab, table)?
        .with_policy(policy)
        .encode(bases, with_specials)
}

/// Recovers the original bases from one region of an encoding.
pub fn decode_region(enc: &HybridEncoding, region: Region, vocab: &Vocabulary) -> Result<String> {
    let name = match region {
        Region::Kmer => "kmer",
        Region::Bpe => "bpe",
    };
    let ids = enc.region(region);
    let mut tokens = Vec::with_capacity(ids.len());
    for (index, &id) in ids.iter().enumerate() {
        match vocab.token(id) {
            Some(t) if (id as usize) >= SPECIAL_TOKENS.len() => tokens.push(t),
            _ => {
                return Err(Error::LossyEncoding {
                    region: name,
                    index,
                })
            }
        }
    }
    Ok(match region {
        Region::Kmer => kmer::reconstruct(&tokens),
        Region::Bpe => tokens.concat(),
    })
}
