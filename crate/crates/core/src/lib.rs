//! Hybrid k-mer + BPE tokenization for DNA language model data pipelines.
//!
//! The pipeline, bottom-up:
//!
//! * [`sequence_io`] loads FASTA / plain text, splits on non-ACGT characters,
//!   cuts fixed-length segments and samples overlapping windows.
//! * [`kmer`] produces overlapping k-mers and the 4^k k-mer vocabulary.
//! * [`bpe`] trains and applies a nucleotide BPE merge table.
//! * [`vocab`] merges both token sets with five special tokens and encodes
//!   segments as the k-mer stream followed by the BPE stream.
//! * [`masking`] turns hybrid encodings into masked-LM examples.
//! * [`nextkmer`] builds the fixed-length next-k-mer classification dataset.
//! * [`stats`] reports token balance and compression per tokenizer.
//! * [`pipeline`] wires everything into file-to-file commands (used by the
//!   `dnatok` binary).
//!
//! ```
//! use dnatok::{bpe_train, HybridTokenizer, TrainConfig, Vocabulary};
//!
//! let table = bpe_train(&["ACGTACGGTTACGTAC", "ACGTTTACGA"], TrainConfig::new(10))?;
//! let vocab = Vocabulary::build(6, &table)?;
//! let tok = HybridTokenizer::new(&vocab, &table)?;
//! let enc = tok.encode("ACGTACGGTTAC", true)?;
//! assert_eq!(enc.kmer_region.len(), 12 - 6 + 1);
//! # Ok::<(), dnatok::Error>(())
//! ```

pub mod artifact;
pub mod bpe;
pub mod error;
pub mod kmer;
pub mod masking;
pub mod nextkmer;
pub mod pipeline;
pub mod sequence_io;
pub mod stats;
pub mod vocab;

pub use bpe::{bpe_encode, bpe_train, MergeRule, MergeTable, TrainConfig};
pub use error::{Error, Result};
pub use kmer::{kmer_tokenize, kmer_vocabulary};
pub use masking::{mask_hybrid, MaskedExample, MaskingConfig};
pub use nextkmer::{kmer_of, label_of, make_example, NextKmerExample};
pub use sequence_io::{
    load_sequences, segment, split, NucleotideSequence, Segment, SequenceFormat,
};
pub use stats::{compare_tokenizers, compute_stats, Scheme, TokenStatsReport};
pub use vocab::{
    build_vocabulary, decode_region, hybrid_encode, HybridEncoding, HybridTokenizer, Region,
    Vocabulary,
};
