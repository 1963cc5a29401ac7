mod segment_corpus {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/segment_corpus.rs"
    ));
}

#[test]
fn segment_corpus_example_runs() {
    segment_corpus::run_example().expect("segment_corpus example should run");
}

mod kmer_tokens {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/kmer_tokens.rs"
    ));
}

#[test]
fn kmer_tokens_example_runs() {
    kmer_tokens::run_example().expect("kmer_tokens example should run");
}

mod train_bpe {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/train_bpe.rs"
    ));
}

#[test]
fn train_bpe_example_runs() {
    train_bpe::run_example().expect("train_bpe example should run");
}

mod hybrid_vocab {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/hybrid_vocab.rs"
    ));
}

#[test]
fn hybrid_vocab_example_runs() {
    hybrid_vocab::run_example().expect("hybrid_vocab example should run");
}

mod mask_mlm {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/mask_mlm.rs"));
}

#[test]
fn mask_mlm_example_runs() {
    mask_mlm::run_example().expect("mask_mlm example should run");
}

mod nextkmer_dataset {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/nextkmer_dataset.rs"
    ));
}

#[test]
fn nextkmer_dataset_example_runs() {
    nextkmer_dataset::run_example().expect("nextkmer_dataset example should run");
}

mod token_stats {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/token_stats.rs"
    ));
}

#[test]
fn token_stats_example_runs() {
    token_stats::run_example().expect("token_stats example should run");
}

mod file_pipeline {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/file_pipeline.rs"
    ));
}

#[test]
fn file_pipeline_example_runs() {
    file_pipeline::run_example().expect("file_pipeline example should run");
}
