// Sample windows and write the next-k-mer train/test JSONL plus manifest.
//
// `cargo run --example nextkmer_dataset`

use dnatok::bpe::{bpe_train, TrainConfig};
use dnatok::nextkmer::{
    emit_nextkmer_dataset, kmer_of, write_dataset, ErrorMode, NextKmerManifest,
};
use dnatok::nextkmer::{INPUT_BASES, TOKEN_BUDGET};
use dnatok::sequence_io::{extract_windows, NucleotideSequence, WindowParams};
use dnatok::vocab::{HybridTokenizer, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> dnatok::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bases: String = (0..20_000)
        .map(|_| b"ACGT"[rng.gen_range(0..4)] as char)
        .collect();
    let chrom = NucleotideSequence::new(bases, "synthetic", 0)?;

    let table = bpe_train(&[chrom.bases()], TrainConfig::new(200))?;
    let vocab = Vocabulary::build(6, &table)?;
    let tok = HybridTokenizer::new(&vocab, &table)?;

    let params = WindowParams::new(37, Some(100), 9);
    let sample = extract_windows(&[chrom], &params)?;
    println!(
        "sampled {} of {} candidate windows",
        sample.windows.len(),
        sample.available
    );

    let k = 4;
    // Skip mode: windows whose 50 bases do not fit the token budget are reported, not fatal.
    let ds = emit_nextkmer_dataset(sample.windows, k, &tok, 0.8, 9, ErrorMode::Skip)?;
    let counts = ds.counts();
    println!(
        "train={} test={} skipped={}",
        counts.train, counts.test, counts.skipped
    );
    if let Some(ex) = ds.train.first() {
        println!("first label {} = {}", ex.label, kmer_of(ex.label, k)?);
    }

    let manifest = NextKmerManifest {
        k,
        vocab_digest: vocab.digest()?,
        merge_digest: table.digest()?,
        counts,
        split_seed: 9,
        train_fraction: 0.8,
        token_budget: TOKEN_BUDGET,
        input_bases: INPUT_BASES,
    };
    let dir = tempfile::tempdir().map_err(|e| dnatok::Error::io("tempdir", e))?;
    write_dataset(dir.path(), &ds, &manifest)?;
    for name in ["train.jsonl", "test.jsonl", "manifest.json"] {
        let len = std::fs::metadata(dir.path().join(name))
            .map(|m| m.len())
            .unwrap_or(0);
        println!("wrote {name} ({len} bytes)");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
