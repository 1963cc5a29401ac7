use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dnatok::bpe::{TrainConfig, DEFAULT_CYCLES, DEFAULT_MIN_PAIR_COUNT};
use dnatok::masking::{MaskingConfig, DEFAULT_MASK_PROBABILITY};
use dnatok::pipeline::{self, CorpusInput};
use dnatok::sequence_io::{
    SequenceFormat, WindowParams, DEFAULT_KEEP, DEFAULT_SEGMENT_LENGTH, DEFAULT_WINDOW,
};
use dnatok::stats::Scheme;

#[derive(Parser, Debug)]
#[command(
    name = "dnatok",
    version,
    about = "Hybrid k-mer + BPE tokenization for DNA corpora"
)]
struct Cli {
    /// Worker threads for parallel stages (outputs do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print diagnostics as JSON lines on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// fasta or plain; guessed from the extension by default.
    #[arg(long)]
    format: Option<SequenceFormat>,
}

impl InputArgs {
    fn corpus(&self) -> CorpusInput {
        CorpusInput {
            path: self.input.clone(),
            format: self.format,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cut a corpus into fixed-length segments (JSONL).
    Segment {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LENGTH)]
        segment_length: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a BPE merge table.
    TrainBpe {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_CYCLES)]
        cycles: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_PAIR_COUNT)]
        min_pair_count: u64,
        /// Train on segments of this length instead of whole sequences.
        #[arg(long)]
        segment_length: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge the k-mer and BPE token sets into one vocabulary.
    BuildVocab {
        #[arg(long)]
        merges: PathBuf,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hybrid-encode every segment of a corpus.
    Tokenize {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        merges: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LENGTH)]
        segment_length: usize,
        /// Omit [CLS]/[SEP].
        #[arg(long)]
        bare: bool,
        /// Fail on tokens missing from the vocabulary instead of emitting [UNK].
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit masked-LM examples.
    EmitMlm {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        merges: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LENGTH)]
        segment_length: usize,
        #[arg(long, default_value_t = DEFAULT_MASK_PROBABILITY)]
        mask_probability: f64,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-2,-1,0,1,2,3"
        )]
        span_offsets: Vec<i32>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the next-k-mer classification dataset (train/test JSONL + manifest).
    EmitNextkmer {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        merges: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_KEEP)]
        keep: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Number of windows to sample (all when omitted).
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long)]
        seed: u64,
        /// Skip failing windows instead of aborting.
        #[arg(long)]
        skip_errors: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Token distribution statistics per tokenizer (CSV, optional Markdown).
    Stats {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        merges: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LENGTH)]
        segment_length: usize,
        #[arg(long, value_delimiter = ',', default_value = "kmer6,bpe,hybrid")]
        schemes: Vec<Scheme>,
        /// Measure multi-threaded throughput.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        markdown: Option<PathBuf>,
    },
    /// Write the pipeline manifest (artifact digests + training hyperparameters).
    Manifest {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        merges: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Extra KEY=VALUE pairs echoed into `parameters`.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))
}

fn run(cmd: Command) -> dnatok::Result<Value> {
    Ok(match cmd {
        Command::Segment {
            input,
            segment_length,
            out,
        } => {
            let n = pipeline::run_segment(&input.corpus(), segment_length, &out)?;
            json!({ "segments": n })
        }
        Command::TrainBpe {
            input,
            cycles,
            min_pair_count,
            segment_length,
            out,
        } => {
            let table = pipeline::run_train_bpe(&pipeline::TrainBpeArgs {
                input: input.corpus(),
                config: TrainConfig {
                    cycles,
                    min_pair_count,
                },
                segment_length,
                out,
            })?;
            json!({
                "rules": table.cycles(),
                "distinct_tokens": table.token_strings().len(),
                "early_stop": table.early_stop(),
            })
        }
        Command::BuildVocab { merges, k, out } => {
            let vocab = pipeline::run_build_vocab(&merges, k, &out)?;
            serde_json::to_value(vocab.metadata().counts)?
        }
        Command::Tokenize {
            vocab,
            merges,
            input,
            segment_length,
            bare,
            strict,
            out,
        } => {
            let n = pipeline::run_tokenize(&pipeline::TokenizeArgs {
                vocab,
                merges,
                input: input.corpus(),
                segment_length,
                bare,
                strict,
                out,
            })?;
            json!({ "segments": n })
        }
        Command::EmitMlm {
            vocab,
            merges,
            input,
            segment_length,
            mask_probability,
            span_offsets,
            seed,
            out,
        } => {
            let n = pipeline::run_emit_mlm(&pipeline::EmitMlmArgs {
                vocab,
                merges,
                input: input.corpus(),
                segment_length,
                masking: MaskingConfig {
                    mask_probability,
                    span_offsets,
                    seed,
                },
                out,
            })?;
            json!({ "examples": n })
        }
        Command::EmitNextkmer {
            vocab,
            merges,
            input,
            k,
            window,
            keep,
            stride,
            count,
            train_fraction,
            seed,
            skip_errors,
            out_dir,
        } => {
            let (_, manifest) = pipeline::run_emit_nextkmer(&pipeline::EmitNextKmerArgs {
                vocab,
                merges,
                input: input.corpus(),
                windows: WindowParams {
                    window,
                    keep,
                    stride,
                    count,
                    seed,
                },
                k,
                train_fraction,
                seed,
                skip_errors,
                out_dir,
            })?;
            serde_json::to_value(manifest.counts)?
        }
        Command::Stats {
            input,
            merges,
            segment_length,
            schemes,
            parallel,
            out,
            markdown,
        } => {
            let rows = pipeline::run_stats(&pipeline::StatsArgs {
                input: input.corpus(),
                merges,
                segment_length,
                schemes,
                parallel,
                out,
                markdown,
            })?;
            let summary: Vec<Value> = rows
                .iter()
                .map(|r| json!({ "scheme": r.scheme, "max_segment_tokens": r.max_segment_tokens }))
                .collect();
            json!({ "schemes": summary })
        }
        Command::Manifest {
            vocab,
            merges,
            corpus,
            params,
            out,
        } => {
            let mut parameters: BTreeMap<String, Value> = params
                .into_iter()
                .map(|(k, v)| {
                    let value = serde_json::from_str(&v).unwrap_or(Value::String(v));
                    (k, value)
                })
                .collect();
            parameters.insert("vocab".into(), json!(vocab));
            parameters.insert("merges".into(), json!(merges));
            if let Some(c) = &corpus {
                parameters.insert("corpus".into(), json!(c));
            }
            let m = pipeline::run_manifest(&pipeline::ManifestArgs {
                vocab,
                merges,
                corpus,
                parameters,
                out,
            })?;
            json!({ "vocab_digest": m.vocab_digest, "merge_digest": m.merge_digest })
        }
    })
}

fn report(json_errors: bool, kind: &str, message: &str) {
    if json_errors {
        eprintln!(
            "{}",
            json!({ "level": "error", "kind": kind, "message": message })
        );
    } else {
        eprintln!("error[{kind}]: {message}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let json_errors = std::env::args().any(|a| a == "--json-errors");
            report(json_errors, "Usage", e.to_string().trim_end());
            return ExitCode::from(1);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            report(cli.json_errors, "Internal", &e.to_string());
            return ExitCode::from(3);
        }
    }

    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(cli.json_errors, e.kind(), &e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
