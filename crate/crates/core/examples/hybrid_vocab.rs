// Build the combined vocabulary and hybrid-encode a segment.
//
// `cargo run --example hybrid_vocab`

use dnatok::bpe::{bpe_train, TrainConfig};
use dnatok::vocab::{decode_region, HybridTokenizer, Region, Vocabulary};

pub fn run_example() -> dnatok::Result<()> {
    let corpus = ["ACACACACGTGTGTACACAC", "GTGTACACGTGTACACGT", "ACGTACGTACGT"];
    let table = bpe_train(&corpus, TrainConfig::new(6))?;
    let vocab = Vocabulary::build(6, &table)?;
    let c = vocab.metadata().counts;
    println!(
        "vocabulary: {} kmer + {} bpe - {} shared + {} special = {}",
        c.kmer, c.bpe, c.shared, c.special, c.total
    );

    let tok = HybridTokenizer::new(&vocab, &table)?;
    let bases = "ACACACACGTGTAC";
    let enc = tok.encode(bases, true)?;
    let names: Vec<_> = enc
        .ids
        .iter()
        .map(|&i| vocab.token(i).unwrap_or("?"))
        .collect();
    println!("{bases} -> {names:?}");

    // Both regions decode back to the input independently.
    assert_eq!(decode_region(&enc, Region::Kmer, &vocab)?, bases);
    assert_eq!(decode_region(&enc, Region::Bpe, &vocab)?, bases);

    let bare = tok.encode(bases, false)?;
    println!("{} ids with specials, {} without", enc.len(), bare.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
