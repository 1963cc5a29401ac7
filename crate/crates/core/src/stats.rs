//! Token distribution diagnostics: frequency, Gini coefficient over the
//! whole vocabulary, vocabulary utilization and compression.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bpe::MergeTable;
use crate::error::{Error, Result};
use crate::kmer::{self, kmer_codes};
use crate::sequence_io::Segment;
use crate::vocab::{HybridTokenizer, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenStatsReport {
    pub frequency: BTreeMap<String, u64>,
    pub total_tokens: u64,
    pub nucleotides: u64,
    pub gini: f64,
    pub vocab_utilization: f64,
    pub tokens_per_nt: f64,
    pub length_histogram: BTreeMap<usize, u64>,
}

/// Gini coefficient of a count vector, zeros included. 0 means every entry
/// is equal; a single non-zero entry among `n` gives `1 - 1/n`.
pub fn gini(counts: &[u64]) -> f64 {
    let n = counts.len();
    let total: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    if n == 0 || total == 0 {
        return 0.0;
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let weighted: u128 = sorted
        .iter()
        .enumerate()
        .map(|(i, &c)| (i as u128 + 1) * u128::from(c))
        .sum();
    let g = (2.0 * weighted as f64) / (n as f64 * total as f64) - (n as f64 + 1.0) / n as f64;
    g.clamp(0.0, 1.0)
}

fn report_from_counts<S: AsRef<str>>(
    frequency: BTreeMap<String, u64>,
    nucleotides: u64,
    vocabulary: &[S],
) -> Result<TokenStatsReport> {
    let total_tokens: u64 = frequency.values().sum();
    if total_tokens == 0 {
        return Err(Error::EmptyStream);
    }
    let vocab_counts: Vec<u64> = vocabulary
        .iter()
        .map(|t| frequency.get(t.as_ref()).copied().unwrap_or(0))
        .collect();
    let used = vocab_counts.iter().filter(|&&c| c > 0).count();
    let mut length_histogram = BTreeMap::new();
    for (t, &c) in &frequency {
        *length_histogram.entry(t.len()).or_default() += c;
    }
    Ok(TokenStatsReport {
        gini: gini(&vocab_counts),
        vocab_utilization: if vocabulary.is_empty() {
            0.0
        } else {
            used as f64 / vocabulary.len() as f64
        },
        tokens_per_nt: if nucleotides == 0 {
            0.0
        } else {
            total_tokens as f64 / nucleotides as f64
        },
        frequency,
        total_tokens,
        nucleotides,
        length_histogram,
    })
}

/// Exact statistics of a token stream that covered `nucleotides` bases.
/// The Gini coefficient and utilization are taken over `vocabulary`.
pub fn compute_stats<'a, I, S>(
    tokens: I,
    nucleotides: u64,
    vocabulary: &[S],
) -> Result<TokenStatsReport>
where
    I: IntoIterator<Item = &'a str>,
    S: AsRef<str>,
{
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t).or_default() += 1;
    }
    let frequency = counts.into_iter().map(|(k, v)| (k.to_owned(), v)).collect();
    report_from_counts(frequency, nucleotides, vocabulary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Kmer(usize),
    Bpe,
    Hybrid(usize),
}

impl Scheme {
    pub fn name(&self) -> String {
        match self {
            Scheme::Kmer(k) => format!("kmer{k}"),
            Scheme::Bpe => "bpe".into(),
            Scheme::Hybrid(k) => format!("hybrid{k}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// `kmer6`, `kmer`, `bpe`, `hybrid`, `hybrid6`; k defaults to 6.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let k_of = |rest: &str| -> Result<usize> {
            if rest.is_empty() {
                return Ok(kmer::DEFAULT_K);
            }
            let k = rest
                .parse()
                .map_err(|_| Error::param("scheme", format!("bad k in {s:?}")))?;
            kmer::check_k(k)?;
            Ok(k)
        };
        if s == "bpe" {
            Ok(Scheme::Bpe)
        } else if let Some(rest) = s.strip_prefix("kmer") {
            Ok(Scheme::Kmer(k_of(rest)?))
        } else if let Some(rest) = s.strip_prefix("hybrid") {
            Ok(Scheme::Hybrid(k_of(rest)?))
        } else {
            Err(Error::param("scheme", format!("unknown scheme {s:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeReport {
    pub scheme: String,
    pub report: TokenStatsReport,
    /// Longest encoding of a single segment (bare layout for hybrid).
    pub max_segment_tokens: u64,
    pub nt_per_sec: f64,
    pub parallel: bool,
}

/// Per-id counts over the corpus plus the longest single-segment encoding.
fn count_ids<F>(
    corpus: &[Segment],
    slots: usize,
    parallel: bool,
    encode: F,
) -> Result<(Vec<u64>, u64)>
where
    F: Fn(&str, &mut Vec<u64>) -> Result<u64> + Sync,
{
    let step = |(mut acc, max): (Vec<u64>, u64), s: &Segment| -> Result<(Vec<u64>, u64)> {
        let n = encode(s.bases(), &mut acc)?;
        Ok((acc, max.max(n)))
    };
    if parallel {
        corpus
            .par_iter()
            .try_fold(|| (vec![0u64; slots], 0), step)
            .try_reduce(
                || (vec![0u64; slots], 0),
                |(mut a, ma), (b, mb)| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok((a, ma.max(mb)))
                },
            )
    } else {
        corpus.iter().try_fold((vec![0u64; slots], 0), step)
    }
}

fn named_counts<S: AsRef<str>>(names: &[S], counts: &[u64]) -> BTreeMap<String, u64> {
    names
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c > 0)
        .map(|(n, &c)| (n.as_ref().to_owned(), c))
        .collect()
}

/// Tokenizes the corpus under every scheme and reports statistics plus
/// throughput. Throughput is single-threaded unless `parallel` is set.
pub fn compare_tokenizers(
    corpus: &[Segment],
    schemes: &[Scheme],
    table: &MergeTable,
    parallel: bool,
) -> Result<Vec<SchemeReport>> {
    if schemes.is_empty() {
        return Err(Error::param("schemes", "at least one scheme is required"));
    }
    let nucleotides: u64 = corpus.iter().map(|s| s.len() as u64).sum();
    let mut rows = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let started = Instant::now();
        let (report, max_segment_tokens) = match scheme {
            Scheme::Kmer(k) => {
                kmer::check_k(k)?;
                let (counts, max) = count_ids(corpus, 1 << (2 * k), parallel, |b, acc| {
                    let mut n = 0;
                    kmer_codes(b.as_bytes(), k).for_each(|c| {
                        acc[c as usize] += 1;
                        n += 1;
                    });
                    Ok(n)
                })?;
                let vocab = kmer::kmer_vocabulary(k)?;
                (
                    report_from_counts(named_counts(&vocab, &counts), nucleotides, &vocab)?,
                    max,
                )
            }
            Scheme::Bpe => {
                let names = table.token_strings();
                let (counts, max) = count_ids(corpus, names.len(), parallel, |b, acc| {
                    let ids = table.encode_ids(b.as_bytes());
                    ids.iter().for_each(|&id| acc[id as usize] += 1);
                    Ok(ids.len() as u64)
                })?;
                (
                    report_from_counts(named_counts(names, &counts), nucleotides, names)?,
                    max,
                )
            }
            Scheme::Hybrid(k) => {
                let vocab = Vocabulary::build(k, table)?;
                let tok = HybridTokenizer::new(&vocab, table)?;
                let (counts, max) = count_ids(corpus, vocab.len(), parallel, |b, acc| {
                    if b.len() < k {
                        return Ok(0);
                    }
                    let ids = tok.encode(b, false)?.ids;
                    ids.iter().for_each(|&id| acc[id as usize] += 1);
                    Ok(ids.len() as u64)
                })?;
                let report = report_from_counts(
                    named_counts(vocab.tokens(), &counts),
                    nucleotides,
                    vocab.body(),
                )?;
                (report, max)
            }
        };
        let secs = started.elapsed().as_secs_f64();
        rows.push(SchemeReport {
            scheme: scheme.name(),
            report,
            max_segment_tokens,
            nt_per_sec: if secs > 0.0 {
                nucleotides as f64 / secs
            } else {
                f64::INFINITY
            },
            parallel,
        });
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 6] = [
    "scheme",
    "total_tokens",
    "tokens_per_nt",
    "gini",
    "vocab_utilization",
    "nt_per_sec",
];

fn row_fields(r: &SchemeReport) -> [String; 6] {
    [
        r.scheme.clone(),
        r.report.total_tokens.to_string(),
        format!("{:.6}", r.report.tokens_per_nt),
        format!("{:.6}", r.report.gini),
        format!("{:.6}", r.report.vocab_utilization),
        format!("{:.0}", r.nt_per_sec),
    ]
}

pub fn render_csv(rows: &[SchemeReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(row_fields(r))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn render_markdown(rows: &[SchemeReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "| {} |", CSV_HEADER.join(" | "));
    let _ = writeln!(s, "|{}", "---|".repeat(CSV_HEADER.len()));
    for r in rows {
        let _ = writeln!(s, "| {} |", row_fields(r).join(" | "));
    }
    s
}
