// Train a BPE merge table, encode with it and serialize it.
//
// `cargo run --example train_bpe`

use dnatok::bpe::{bpe_encode, bpe_train, MergeTable, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Random background with a planted repeat, so a few merges are obvious.
fn corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut s: String = (0..200)
                .map(|_| b"ACGT"[rng.gen_range(0..4)] as char)
                .collect();
            s.insert_str(rng.gen_range(0..200), "TTAGGGTTAGGGTTAGGG");
            s
        })
        .collect()
}

pub fn run_example() -> dnatok::Result<()> {
    let seqs = corpus(50, 7);
    let table = bpe_train(&seqs, TrainConfig::new(40))?;
    println!(
        "learned {} rules (early stop: {})",
        table.cycles(),
        table.early_stop()
    );
    for rule in table.rules().iter().take(5) {
        println!(
            "  #{:<2} {} + {} -> {}",
            rule.rank, rule.left, rule.right, rule.result
        );
    }

    let tokens = bpe_encode("GATTAGGGTTAGGGCA", &table);
    println!("GATTAGGGTTAGGGCA -> {tokens:?}");
    assert_eq!(tokens.concat(), "GATTAGGGTTAGGGCA");

    let json = table.to_json()?;
    let back = MergeTable::from_json(&json)?;
    assert_eq!(back, table);
    println!("merge table digest {}", table.digest()?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
