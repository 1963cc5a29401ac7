// Span masking over the k-mer region plus token masking over the BPE region.
//
// `cargo run --example mask_mlm`

use dnatok::bpe::{bpe_train, TrainConfig};
use dnatok::masking::{emit_mlm_corpus, mask_hybrid, MaskingConfig, IGNORE_INDEX};
use dnatok::sequence_io::{segment, NucleotideSequence};
use dnatok::vocab::{HybridTokenizer, Vocabulary, MASK_ID};

pub fn run_example() -> dnatok::Result<()> {
    let genome = NucleotideSequence::new("ACGTTGCAAGGCTTAACCGGTATACGCGATAT".repeat(20), "demo", 0)?;
    let table = bpe_train(&[genome.bases()], TrainConfig::new(20))?;
    let vocab = Vocabulary::build(6, &table)?;
    let tok = HybridTokenizer::new(&vocab, &table)?;

    let enc = tok.encode(&genome.bases()[..120], true)?;
    let ex = mask_hybrid(&enc, &MaskingConfig::new(11))?;
    let masked = ex.input_ids.iter().filter(|&&i| i == MASK_ID).count();
    let scored = ex.target_ids.iter().filter(|&&t| t != IGNORE_INDEX).count();
    println!(
        "{} ids, {masked} masked, {scored} scored",
        ex.input_ids.len()
    );
    let runs: String = ex
        .input_ids
        .iter()
        .map(|&i| if i == MASK_ID { '#' } else { '.' })
        .collect();
    println!("{runs}");

    // Same seed, same masks.
    assert_eq!(mask_hybrid(&enc, &MaskingConfig::new(11))?, ex);

    let segments = segment(&[genome], 100)?;
    for rec in emit_mlm_corpus(&segments, &tok, &MaskingConfig::new(11)) {
        let rec = rec?;
        println!(
            "segment @{}: {} positions masked",
            rec.offset,
            rec.example.mask_positions.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
