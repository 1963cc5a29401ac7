// Parse FASTA, cut 305-nt segments and make a seeded 80/20 split.
//
// `cargo run --example segment_corpus`

use std::path::Path;

use dnatok::sequence_io::{parse_sequences, segment, split, SequenceFormat};

const FASTA: &str = "\
>chr_demo first record
ACGTACGGTTCAGCTAGCTAGGATCCATGACNNNNNTTTGACCATGCATGCAAGTCGATCGTACGATCG
acgtagctagctagctgatcgatcgtagctagctagtcgatcgatgctagctagctagtcgatcgat
>chr_other
GGGGCCCCAAAATTTTGGGGCCCCAAAATTTT
";

pub fn run_example() -> dnatok::Result<()> {
    let seqs = parse_sequences(
        FASTA.as_bytes(),
        SequenceFormat::Fasta,
        Path::new("inline.fa"),
    )?;
    // N splits a record into runs; offsets stay relative to the record.
    for s in &seqs {
        println!("{:>10} @ {:>3}: {} nt", s.source_id(), s.offset(), s.len());
    }

    let segments = segment(&seqs, 16)?;
    println!(
        "{} segments of 16 nt (trailing partial segments dropped)",
        segments.len()
    );

    let parts = split(segments, 0.8, 42)?;
    println!("train={} test={}", parts.train.len(), parts.test.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> dnatok::Result<()> {
    run_example()
}
