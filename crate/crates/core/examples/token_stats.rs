// Compare k-mer, BPE and hybrid tokenization on one corpus.
//
// `cargo run --example token_stats`

use dnatok::bpe::{bpe_train, TrainConfig};
use dnatok::sequence_io::{segment, NucleotideSequence};
use dnatok::stats::{compare_tokenizers, gini, render_markdown, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> dnatok::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // AT-rich background so token frequencies are visibly unbalanced.
    let bases: String = (0..30_500)
        .map(|_| b"AAATTTCG"[rng.gen_range(0..8)] as char)
        .collect();
    let seqs = [NucleotideSequence::new(bases, "at_rich", 0)?];
    let table = bpe_train(&seqs, TrainConfig::new(100))?;
    let corpus = segment(&seqs, 305)?;

    let rows = compare_tokenizers(
        &corpus,
        &[Scheme::Kmer(6), Scheme::Bpe, Scheme::Hybrid(6)],
        &table,
        false,
    )?;
    print!("{}", render_markdown(&rows));

    println!("gini of [1, 1, 1, 1] = {}", gini(&[1, 1, 1, 1]));
    println!("gini of [0, 0, 0, 8] = {}", gini(&[0, 0, 0, 8]));
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
