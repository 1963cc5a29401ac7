//! File-to-file commands. Each function reads its inputs, runs one stage
//! and writes its outputs atomically; the `dnatok` binary is a thin
//! argument parser over these.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifact::{file_digest, to_jsonl, write_atomic};
use crate::bpe::{bpe_train, MergeTable, TrainConfig};
use crate::error::{Error, Result};
use crate::masking::{write_mlm_jsonl, MaskingConfig};
use crate::nextkmer::{
    emit_nextkmer_dataset, write_dataset, ErrorMode, NextKmerDataset, NextKmerManifest,
};
use crate::sequence_io::{
    extract_windows, load_sequences, segment, NucleotideSequence, Segment, SequenceFormat,
    WindowParams,
};
use crate::stats::{compare_tokenizers, render_csv, render_markdown, Scheme, SchemeReport};
use crate::vocab::{HybridTokenizer, UnknownPolicy, Vocabulary};

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_merges(path: &Path) -> Result<MergeTable> {
    MergeTable::from_json(&read_to_string(path)?)
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary> {
    Vocabulary::from_json(&read_to_string(path)?)
}

/// Input corpus description shared by every command that reads sequences.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusInput {
    pub path: PathBuf,
    /// Guessed from the extension when `None`.
    pub format: Option<SequenceFormat>,
}

impl CorpusInput {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            format: None,
        }
    }

    pub fn load(&self) -> Result<Vec<NucleotideSequence>> {
        let format = self
            .format
            .unwrap_or_else(|| SequenceFormat::from_path(&self.path));
        load_sequences(&self.path, format)
    }

    fn segments(&self, length: usize) -> Result<Vec<Segment>> {
        segment(&self.load()?, length)
    }
}

impl Serialize for SequenceFormat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            SequenceFormat::Fasta => "fasta",
            SequenceFormat::Plain => "plain",
        })
    }
}

/// Writes the corpus as `{source_id, offset, bases}` JSONL segments.
pub fn run_segment(input: &CorpusInput, length: usize, out: &Path) -> Result<usize> {
    let segs = input.segments(length)?;
    write_atomic(out, &to_jsonl(&segs)?)?;
    Ok(segs.len())
}

#[derive(Debug, Clone)]
pub struct TrainBpeArgs {
    pub input: CorpusInput,
    pub config: TrainConfig,
    /// Train on fixed-length segments instead of whole sequence runs.
    pub segment_length: Option<usize>,
    pub out: PathBuf,
}

pub fn run_train_bpe(args: &TrainBpeArgs) -> Result<MergeTable> {
    let seqs = args.input.load()?;
    let table = match args.segment_length {
        Some(len) => {
            let segs = segment(&seqs, len)?;
            if segs.is_empty() {
                return Err(Error::EmptyCorpus);
            }
            bpe_train(&segs, args.config)?
        }
        None => bpe_train(&seqs, args.config)?,
    };
    write_atomic(&args.out, table.to_json()?.as_bytes())?;
    Ok(table)
}

/// `out` gets the JSON vocabulary; `<out stem>.txt` the one-token-per-line companion.
pub fn run_build_vocab(merges: &Path, k: usize, out: &Path) -> Result<Vocabulary> {
    let table = load_merges(merges)?;
    let vocab = Vocabulary::build(k, &table)?;
    write_atomic(out, vocab.to_json()?.as_bytes())?;
    write_atomic(out.with_extension("txt"), vocab.to_text().as_bytes())?;
    Ok(vocab)
}

#[derive(Debug, Serialize)]
struct TokenizedRecord<'a> {
    source_id: &'a str,
    offset: usize,
    ids: &'a [u32],
    kmer_region: [usize; 2],
    bpe_region: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct TokenizeArgs {
    pub vocab: PathBuf,
    pub merges: PathBuf,
    pub input: CorpusInput,
    pub segment_length: usize,
    pub bare: bool,
    pub strict: bool,
    pub out: PathBuf,
}

pub fn run_tokenize(args: &TokenizeArgs) -> Result<usize> {
    let vocab = load_vocab(&args.vocab)?;
    let table = load_merges(&args.merges)?;
    let policy = if args.strict {
        UnknownPolicy::Strict
    } else {
        UnknownPolicy::Lenient
    };
    let tok = HybridTokenizer::new(&vocab, &table)?.with_policy(policy);
    let segs = args.input.segments(args.segment_length)?;
    let mut out = Vec::new();
    for s in &segs {
        let enc = tok
            .encode(s.bases(), !args.bare)
            .map_err(|e| e.at_segment(s.source_id(), s.offset()))?;
        let rec = TokenizedRecord {
            source_id: s.source_id(),
            offset: s.offset(),
            ids: &enc.ids,
            kmer_region: [enc.kmer_region.start, enc.kmer_region.end],
            bpe_region: [enc.bpe_region.start, enc.bpe_region.end],
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.push(b'\n');
    }
    write_atomic(&args.out, &out)?;
    Ok(segs.len())
}

#[derive(Debug, Clone)]
pub struct EmitMlmArgs {
    pub vocab: PathBuf,
    pub merges: PathBuf,
    pub input: CorpusInput,
    pub segment_length: usize,
    pub masking: MaskingConfig,
    pub out: PathBuf,
}

pub fn run_emit_mlm(args: &EmitMlmArgs) -> Result<usize> {
    let vocab = load_vocab(&args.vocab)?;
    let table = load_merges(&args.merges)?;
    let tok = HybridTokenizer::new(&vocab, &table)?;
    let segs = args.input.segments(args.segment_length)?;
    let mut buf = Vec::new();
    let n = write_mlm_jsonl(&segs, &tok, &args.masking, &mut buf)?;
    write_atomic(&args.out, &buf)?;
    Ok(n)
}

#[derive(Debug, Clone)]
pub struct EmitNextKmerArgs {
    pub vocab: PathBuf,
    pub merges: PathBuf,
    pub input: CorpusInput,
    pub windows: WindowParams,
    pub k: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub skip_errors: bool,
    pub out_dir: PathBuf,
}

pub fn run_emit_nextkmer(args: &EmitNextKmerArgs) -> Result<(NextKmerDataset, NextKmerManifest)> {
    let vocab = load_vocab(&args.vocab)?;
    let table = load_merges(&args.merges)?;
    let tok = HybridTokenizer::new(&vocab, &table)?;
    let seqs = args.input.load()?;
    let params = WindowParams {
        seed: args.seed,
        ..args.windows
    };
    let sample = extract_windows(&seqs, &params)?;
    if sample.is_short() {
        log::warn!(
            "only {} of {} requested windows are available",
            sample.windows.len(),
            sample.requested
        );
    }
    let mode = if args.skip_errors {
        ErrorMode::Skip
    } else {
        ErrorMode::Strict
    };
    let dataset = emit_nextkmer_dataset(
        sample.windows,
        args.k,
        &tok,
        args.train_fraction,
        args.seed,
        mode,
    )?;
    for e in &dataset.skipped {
        log::warn!("skipped window: {e}");
    }
    let manifest = NextKmerManifest {
        k: args.k,
        vocab_digest: file_digest(&args.vocab)?,
        merge_digest: file_digest(&args.merges)?,
        counts: dataset.counts(),
        split_seed: args.seed,
        train_fraction: args.train_fraction,
        token_budget: crate::nextkmer::TOKEN_BUDGET,
        input_bases: crate::nextkmer::INPUT_BASES,
    };
    write_dataset(&args.out_dir, &dataset, &manifest)?;
    Ok((dataset, manifest))
}

#[derive(Debug, Clone)]
pub struct StatsArgs {
    pub input: CorpusInput,
    pub merges: PathBuf,
    pub segment_length: usize,
    pub schemes: Vec<Scheme>,
    pub parallel: bool,
    pub out: PathBuf,
    pub markdown: Option<PathBuf>,
}

pub fn run_stats(args: &StatsArgs) -> Result<Vec<SchemeReport>> {
    let table = load_merges(&args.merges)?;
    let segs = args.input.segments(args.segment_length)?;
    let rows = compare_tokenizers(&segs, &args.schemes, &table, args.parallel)?;
    write_atomic(&args.out, render_csv(&rows)?.as_bytes())?;
    if let Some(md) = &args.markdown {
        write_atomic(md, render_markdown(&rows).as_bytes())?;
    }
    Ok(rows)
}

/// Optimizer and schedule settings recorded for downstream trainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHyperparameters {
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub weight_decay: f64,
    pub train_batch: u32,
    pub eval_batch: u32,
    pub grad_accum: u32,
    pub warmup_steps: u32,
    pub max_steps: u32,
    pub save_every: u32,
    pub save_total_limit: u32,
    pub eval_every: u32,
    pub log_every: u32,
}

impl Default for TrainingHyperparameters {
    fn default() -> Self {
        Self {
            learning_rate: 4e-4,
            adam_epsilon: 1e-6,
            beta1: 0.9,
            beta2: 0.98,
            weight_decay: 0.01,
            train_batch: 16,
            eval_batch: 32,
            grad_accum: 25,
            warmup_steps: 1000,
            max_steps: 20_000,
            save_every: 2500,
            save_total_limit: 20,
            eval_every: 2500,
            log_every: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub vocab_digest: String,
    pub merge_digest: String,
    pub corpus_digest: String,
    pub parameters: BTreeMap<String, Value>,
    pub hyperparameters: TrainingHyperparameters,
}

#[derive(Debug, Clone)]
pub struct ManifestArgs {
    pub vocab: PathBuf,
    pub merges: PathBuf,
    /// Corpus file to hash; falls back to the digest stored in the merge table.
    pub corpus: Option<PathBuf>,
    pub parameters: BTreeMap<String, Value>,
    pub out: PathBuf,
}

pub fn run_manifest(args: &ManifestArgs) -> Result<PipelineManifest> {
    let table = load_merges(&args.merges)?;
    let vocab = load_vocab(&args.vocab)?;
    let corpus_digest = match &args.corpus {
        Some(p) => file_digest(p)?,
        None => table.corpus_digest().to_owned(),
    };
    let mut parameters = args.parameters.clone();
    parameters
        .entry("bpe_cycles".into())
        .or_insert(json!(table.cycles()));
    parameters.entry("k".into()).or_insert(json!(vocab.k()));
    let manifest = PipelineManifest {
        vocab_digest: file_digest(&args.vocab)?,
        merge_digest: file_digest(&args.merges)?,
        corpus_digest,
        parameters,
        hyperparameters: TrainingHyperparameters::default(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(&args.out, &bytes)?;
    Ok(manifest)
}
