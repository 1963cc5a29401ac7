// The fine-tuning harness reads these files with a plain JSON parser, so the
// checks below use untyped values rather than the crate's own structs.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use dnatok::artifact::sha256_hex;
use dnatok::bpe::{bpe_train, TrainConfig};
use dnatok::nextkmer::{
    emit_nextkmer_dataset, write_dataset, ErrorMode, NextKmerManifest, INPUT_BASES, TOKEN_BUDGET,
};
use dnatok::sequence_io::{extract_windows, NucleotideSequence, WindowParams};
use dnatok::vocab::{HybridTokenizer, Vocabulary, PAD_ID};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn emit(dir: &Path, k: usize) -> (Vocabulary, Vec<NucleotideSequence>) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let bases: String = (0..30_000)
        .map(|_| b"ACGT"[rng.gen_range(0..4)] as char)
        .collect();
    let chrom = NucleotideSequence::new(bases, "chrS", 0).unwrap();
    let table = bpe_train(&[chrom.bases()], TrainConfig::new(300)).unwrap();
    let vocab = Vocabulary::build(6, &table).unwrap();
    let tok = HybridTokenizer::new(&vocab, &table).unwrap();
    let windows = extract_windows(&[chrom], &WindowParams::new(11, Some(250), 4))
        .unwrap()
        .windows;
    let ds = emit_nextkmer_dataset(windows.clone(), k, &tok, 0.8, 4, ErrorMode::Skip).unwrap();
    let manifest = NextKmerManifest {
        k,
        vocab_digest: vocab.digest().unwrap(),
        merge_digest: table.digest().unwrap(),
        counts: ds.counts(),
        split_seed: 4,
        train_fraction: 0.8,
        token_budget: TOKEN_BUDGET,
        input_bases: INPUT_BASES,
    };
    write_dataset(dir, &ds, &manifest).unwrap();
    (vocab, windows)
}

fn lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn jsonl_records_have_the_consumer_schema() {
    let dir = tempfile::tempdir().unwrap();
    let k = 3;
    let (vocab, windows) = emit(dir.path(), k);
    let by_offset: std::collections::HashMap<u64, &str> = windows
        .iter()
        .map(|w| (w.offset() as u64, w.bases()))
        .collect();

    for split in ["train.jsonl", "test.jsonl"] {
        for rec in lines(&dir.path().join(split)) {
            let obj = rec.as_object().unwrap();
            let keys: BTreeSet<&str> = obj.keys().map(String::as_str).collect();
            assert_eq!(
                keys,
                BTreeSet::from(["input_ids", "label", "k", "source_id", "offset"])
            );

            let ids = obj["input_ids"].as_array().unwrap();
            assert_eq!(ids.len(), TOKEN_BUDGET);
            assert!(ids
                .iter()
                .all(|i| (i.as_u64().unwrap() as usize) < vocab.len()));
            // Padding is a suffix.
            let first_pad = ids
                .iter()
                .position(|i| i.as_u64() == Some(u64::from(PAD_ID)))
                .unwrap_or(ids.len());
            assert!(ids[first_pad..]
                .iter()
                .all(|i| i.as_u64() == Some(u64::from(PAD_ID))));

            assert_eq!(obj["k"].as_u64(), Some(k as u64));
            assert_eq!(obj["source_id"], "chrS");
            let label = obj["label"].as_u64().unwrap();
            assert!(label < 4u64.pow(k as u32));
            let raw = by_offset[&obj["offset"].as_u64().unwrap()];
            let expected = raw[INPUT_BASES..INPUT_BASES + k]
                .bytes()
                .fold(0u64, |acc, b| {
                    acc * 4 + b"ACGT".iter().position(|&x| x == b).unwrap() as u64
                });
            assert_eq!(label, expected);
        }
    }
}

#[test]
fn manifest_sidecar_matches_files() {
    let dir = tempfile::tempdir().unwrap();
    let (vocab, _) = emit(dir.path(), 5);
    let m: Value =
        serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    let keys: BTreeSet<&str> = m.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        BTreeSet::from([
            "k",
            "vocab_digest",
            "merge_digest",
            "counts",
            "split_seed",
            "train_fraction",
            "token_budget",
            "input_bases",
        ])
    );
    assert_eq!(m["k"], 5);
    assert_eq!(m["token_budget"], 80);
    assert_eq!(m["input_bases"], 50);
    assert_eq!(
        m["vocab_digest"],
        sha256_hex(vocab.to_json().unwrap().as_bytes())
    );

    let train = lines(&dir.path().join("train.jsonl")).len();
    let test = lines(&dir.path().join("test.jsonl")).len();
    assert_eq!(m["counts"]["train"].as_u64(), Some(train as u64));
    assert_eq!(m["counts"]["test"].as_u64(), Some(test as u64));
    assert_eq!(m["counts"]["skipped"], 0);
    assert_eq!((train, test), (200, 50));
}
