// The full file-to-file pipeline, as the `dnatok` binary runs it.
//
// `cargo run --example file_pipeline`

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dnatok::bpe::TrainConfig;
use dnatok::masking::MaskingConfig;
use dnatok::pipeline::*;
use dnatok::sequence_io::WindowParams;
use dnatok::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> dnatok::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| Error::io("tempdir", e))?;
    let p = |name: &str| dir.path().join(name);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut fasta = String::new();
    for chrom in ["chrA", "chrB"] {
        writeln!(fasta, ">{chrom}").unwrap();
        let seq: String = (0..6_000)
            .map(|_| b"ACGT"[rng.gen_range(0..4)] as char)
            .collect();
        for line in seq.as_bytes().chunks(60) {
            writeln!(fasta, "{}", std::str::from_utf8(line).unwrap()).unwrap();
        }
    }
    std::fs::write(p("genome.fa"), fasta).map_err(|e| Error::io(p("genome.fa"), e))?;
    let input = CorpusInput::new(p("genome.fa"));

    let table = run_train_bpe(&TrainBpeArgs {
        input: input.clone(),
        config: TrainConfig::new(120),
        segment_length: None,
        out: p("merges.json"),
    })?;
    let vocab = run_build_vocab(&p("merges.json"), 6, &p("vocab.json"))?;
    println!(
        "{} rules, {} vocabulary entries",
        table.cycles(),
        vocab.len()
    );

    let n = run_emit_mlm(&EmitMlmArgs {
        vocab: p("vocab.json"),
        merges: p("merges.json"),
        input: input.clone(),
        segment_length: 305,
        masking: MaskingConfig::new(2),
        out: p("mlm.jsonl"),
    })?;
    println!("{n} masked examples");

    let (_, nk) = run_emit_nextkmer(&EmitNextKmerArgs {
        vocab: p("vocab.json"),
        merges: p("merges.json"),
        input: input.clone(),
        windows: WindowParams::new(50, Some(60), 2),
        k: 3,
        train_fraction: 0.8,
        seed: 2,
        skip_errors: true,
        out_dir: p("nextkmer"),
    })?;
    println!("next-3-mer split {:?}", nk.counts);

    let manifest = run_manifest(&ManifestArgs {
        vocab: p("vocab.json"),
        merges: p("merges.json"),
        corpus: Some(p("genome.fa")),
        parameters: BTreeMap::from([("k".to_owned(), 6.into())]),
        out: p("manifest.json"),
    })?;
    println!(
        "manifest: lr={} warmup={} max_steps={}",
        manifest.hyperparameters.learning_rate,
        manifest.hyperparameters.warmup_steps,
        manifest.hyperparameters.max_steps
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
