//! Masked-LM example generation over hybrid encodings.
//!
//! The k-mer region is masked in spans: anchors are scanned left to right,
//! each eligible anchor is picked with probability `mask_probability`, and a
//! picked anchor masks `anchor + offset` for every configured offset,
//! clipped to the region. An anchor is eligible only if its span would
//! neither overlap nor touch an earlier span, so every masked run in the
//! k-mer region is exactly one span. The BPE region is masked token by
//! token with the same probability. Special tokens are never masked.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence_io::Segment;
use crate::vocab::{HybridEncoding, HybridTokenizer, MASK_ID};

/// Value stored in `target_ids` at unmasked positions.
pub const IGNORE_INDEX: i64 = -100;
pub const DEFAULT_MASK_PROBABILITY: f64 = 0.15;
pub const DEFAULT_SPAN_OFFSETS: [i32; 6] = [-2, -1, 0, 1, 2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingConfig {
    pub mask_probability: f64,
    pub span_offsets: Vec<i32>,
    pub seed: u64,
}

impl MaskingConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            mask_probability: DEFAULT_MASK_PROBABILITY,
            span_offsets: DEFAULT_SPAN_OFFSETS.to_vec(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.mask_probability;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param(
                "mask_probability",
                format!("must lie in (0, 1), got {p}"),
            ));
        }
        let offs = &self.span_offsets;
        let contiguous = offs.windows(2).all(|w| w[1] == w[0] + 1);
        if offs.is_empty() || !contiguous || !offs.contains(&0) {
            return Err(Error::param(
                "span_offsets",
                format!("must be increasing, contiguous and contain 0, got {offs:?}"),
            ));
        }
        Ok(())
    }

    fn span_bounds(&self) -> (i64, i64) {
        (
            i64::from(*self.span_offsets.first().unwrap()),
            i64::from(*self.span_offsets.last().unwrap()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedExample {
    pub input_ids: Vec<u32>,
    pub target_ids: Vec<i64>,
    pub mask_positions: Vec<usize>,
}

/// JSONL record: `{input_ids, target_ids, mask_positions, source_id, offset}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlmRecord {
    #[serde(flatten)]
    pub example: MaskedExample,
    pub source_id: String,
    pub offset: usize,
}

/// Masks one encoding; deterministic in `(enc, cfg)`.
pub fn mask_hybrid(enc: &HybridEncoding, cfg: &MaskingConfig) -> Result<MaskedExample> {
    cfg.validate()?;
    let span = cfg.span_offsets.len();
    let region = enc.kmer_region.clone();
    if region.len() < span {
        return Err(Error::RegionTooSmall {
            region: region.len(),
            span,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = cfg.mask_probability;
    let mut masked = vec![false; enc.ids.len()];

    let (lo_off, hi_off) = cfg.span_bounds();
    let (r_lo, r_hi) = (region.start as i64, region.end as i64 - 1);
    let mut last_end: Option<i64> = None;
    for anchor in r_lo..=r_hi {
        let start = (anchor + lo_off).max(r_lo);
        let end = (anchor + hi_off).min(r_hi);
        if start > end {
            continue;
        }
        if last_end.is_some_and(|e| start <= e + 1) {
            continue;
        }
        if rng.gen::<f64>() < p {
            for i in start..=end {
                masked[i as usize] = true;
            }
            last_end = Some(end);
        }
    }

    for i in enc.bpe_region.clone() {
        if rng.gen::<f64>() < p {
            masked[i] = true;
        }
    }

    let mut input_ids = enc.ids.clone();
    let mut target_ids = vec![IGNORE_INDEX; enc.ids.len()];
    let mut mask_positions = Vec::new();
    for (i, &m) in masked.iter().enumerate() {
        if m {
            target_ids[i] = i64::from(enc.ids[i]);
            input_ids[i] = MASK_ID;
            mask_positions.push(i);
        }
    }
    Ok(MaskedExample {
        input_ids,
        target_ids,
        mask_positions,
    })
}

/// Per-example seed derived from the run seed and the example index
/// (SplitMix64 finalizer), so results do not depend on processing order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mask_segment(
    index: usize,
    segment: &Segment,
    tokenizer: &HybridTokenizer<'_>,
    cfg: &MaskingConfig,
) -> Result<MlmRecord> {
    let run = || {
        let enc = tokenizer.encode(segment.bases(), true)?;
        let local = MaskingConfig {
            seed: derive_seed(cfg.seed, index as u64),
            ..cfg.clone()
        };
        mask_hybrid(&enc, &local)
    };
    let example = run().map_err(|e| e.at_segment(segment.source_id(), segment.offset()))?;
    Ok(MlmRecord {
        example,
        source_id: segment.source_id().to_owned(),
        offset: segment.offset(),
    })
}

/// One masked example per segment, in input order.
pub fn emit_mlm_corpus<'s, 't>(
    segments: &'s [Segment],
    tokenizer: &'s HybridTokenizer<'t>,
    cfg: &'s MaskingConfig,
) -> impl Iterator<Item = Result<MlmRecord>> + 's {
    segments
        .iter()
        .enumerate()
        .map(move |(i, s)| mask_segment(i, s, tokenizer, cfg))
}

/// Writes the masked corpus as JSONL, masking chunks of segments in
/// parallel. Output bytes do not depend on the thread count.
pub fn write_mlm_jsonl<W: Write>(
    segments: &[Segment],
    tokenizer: &HybridTokenizer<'_>,
    cfg: &MaskingConfig,
    mut out: W,
) -> Result<usize> {
    cfg.validate()?;
    const CHUNK: usize = 4096;
    for (c, chunk) in segments.chunks(CHUNK).enumerate() {
        let records = chunk
            .par_iter()
            .enumerate()
            .map(|(i, s)| mask_segment(c * CHUNK + i, s, tokenizer, cfg))
            .collect::<Result<Vec<_>>>()?;
        let bytes = crate::artifact::to_jsonl(&records)?;
        out.write_all(&bytes)
            .map_err(|e| Error::io("<mlm output>", e))?;
    }
    Ok(segments.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpe::MergeTable;
    use crate::vocab::{Vocabulary, CLS_ID, SEP_ID};

    fn fixture() -> (Vocabulary, MergeTable) {
        let t = MergeTable::from_pairs([("A", "C"), ("G", "T")], "", false).unwrap();
        let v = Vocabulary::build(6, &t).unwrap();
        (v, t)
    }

    fn seq(n: usize, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| b"ACGT"[rng.gen_range(0..4)] as char)
            .collect()
    }

    #[test]
    fn config_validation() {
        assert!(MaskingConfig::new(0).validate().is_ok());
        let mut c = MaskingConfig::new(0);
        c.mask_probability = 0.0;
        assert!(c.validate().is_err());
        c.mask_probability = 0.15;
        c.span_offsets = vec![1, 2, 3];
        assert!(c.validate().is_err());
        c.span_offsets = vec![-1, 0, 2];
        assert!(c.validate().is_err());
    }

    #[test]
    fn vanishing_probability_masks_nothing() {
        let bases = seq(305, 1);
        let (v, t) = fixture();
        let enc = HybridTokenizer::new(&v, &t)
            .unwrap()
            .encode(&bases, true)
            .unwrap();
        let cfg = MaskingConfig {
            mask_probability: f64::MIN_POSITIVE,
            ..MaskingConfig::new(9)
        };
        let ex = mask_hybrid(&enc, &cfg).unwrap();
        assert!(ex.mask_positions.is_empty());
        assert_eq!(ex.input_ids, enc.ids);
        assert!(ex.target_ids.iter().all(|&t| t == IGNORE_INDEX));
    }

    #[test]
    fn region_too_small() {
        let (v, t) = fixture();
        let enc = HybridTokenizer::new(&v, &t)
            .unwrap()
            .encode("ACGTACGTAC", true)
            .unwrap();
        assert_eq!(enc.kmer_region.len(), 5);
        assert!(matches!(
            mask_hybrid(&enc, &MaskingConfig::new(0)),
            Err(Error::RegionTooSmall { region: 5, span: 6 })
        ));
    }

    #[test]
    fn structure_and_determinism() {
        let (v, t) = fixture();
        let tok = HybridTokenizer::new(&v, &t).unwrap();
        for s in 0..200 {
            let bases = seq(305, s);
            let enc = tok.encode(&bases, true).unwrap();
            let cfg = MaskingConfig::new(s);
            let ex = mask_hybrid(&enc, &cfg).unwrap();
            assert_eq!(ex, mask_hybrid(&enc, &cfg).unwrap());
            assert_eq!(ex.input_ids.len(), ex.target_ids.len());
            for (i, (&inp, &tgt)) in ex.input_ids.iter().zip(&ex.target_ids).enumerate() {
                let masked = ex.mask_positions.binary_search(&i).is_ok();
                assert_eq!(inp == MASK_ID, masked);
                assert_eq!(tgt != IGNORE_INDEX, masked);
                if masked {
                    assert_eq!(tgt, i64::from(enc.ids[i]));
                } else {
                    assert_eq!(inp, enc.ids[i]);
                }
            }
            assert_eq!(ex.input_ids[0], CLS_ID);
            assert_eq!(ex.input_ids[enc.kmer_region.end], SEP_ID);
            assert_eq!(*ex.input_ids.last().unwrap(), SEP_ID);
        }
    }

    #[test]
    fn custom_offsets_are_honoured() {
        let (v, t) = fixture();
        let enc = HybridTokenizer::new(&v, &t)
            .unwrap()
            .encode(&seq(305, 3), false)
            .unwrap();
        let cfg = MaskingConfig {
            span_offsets: vec![-3, -2, -1, 0, 1, 2],
            mask_probability: 0.5,
            seed: 4,
        };
        let ex = mask_hybrid(&enc, &cfg).unwrap();
        let kmer: Vec<usize> = ex
            .mask_positions
            .iter()
            .copied()
            .filter(|&p| p < enc.kmer_region.end)
            .collect();
        assert!(!kmer.is_empty());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(5, 7), derive_seed(5, 7));
    }
}
