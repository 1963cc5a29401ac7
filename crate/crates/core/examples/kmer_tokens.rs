// Overlapping k-mers, their integer codes and the reconstruction law.
//
// `cargo run --example kmer_tokens`

use dnatok::kmer::{encode_kmer, kmer_tokenize, kmer_vocabulary, reconstruct};

pub fn run_example() -> dnatok::Result<()> {
    let bases = "ACGTACGTAC";
    let tokens = kmer_tokenize(bases, 6)?;
    println!("{bases} -> {tokens:?}");
    assert_eq!(tokens.len(), bases.len() - 6 + 1);
    assert_eq!(reconstruct(&tokens), bases);

    for t in &tokens {
        println!("{t} = {}", encode_kmer(t)?);
    }

    let vocab = kmer_vocabulary(3)?;
    println!(
        "3-mer vocabulary: {} tokens, first {:?}, last {:?}",
        vocab.len(),
        vocab[0],
        vocab[63]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
