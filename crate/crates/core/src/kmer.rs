//! Overlapping k-mer tokenization.
//!
//! A k-mer is identified by its base-4 code (A=0, C=1, G=2, T=3, most
//! significant digit first), which is also its index in the
//! lexicographically ordered vocabulary returned by [`kmer_vocabulary`].

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 6;
/// Largest supported k; keeps 4^k enumerable and codes inside a `u32`.
pub const MAX_K: usize = 12;

pub const ALPHABET: [u8; 4] = *b"ACGT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmerConfig {
    k: usize,
}

impl KmerConfig {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Default for KmerConfig {
    fn default() -> Self {
        Self { k: DEFAULT_K }
    }
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if (1..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(Error::param(
            "k",
            format!("k must be in 1..={MAX_K}, got {k}"),
        ))
    }
}

#[inline]
pub(crate) fn base_code(b: u8) -> Option<u32> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

/// Base-4 code of an uppercase k-mer.
pub fn encode_kmer(kmer: &str) -> Result<u32> {
    if kmer.is_empty() || kmer.len() > MAX_K {
        return Err(Error::param(
            "kmer",
            format!("length must be in 1..={MAX_K}, got {}", kmer.len()),
        ));
    }
    kmer.bytes().enumerate().try_fold(0u32, |acc, (i, b)| {
        base_code(b)
            .map(|c| acc << 2 | c)
            .ok_or(Error::InvalidBase {
                base: kmer[i..].chars().next().unwrap_or('?'),
                position: i,
            })
    })
}

/// Inverse of [`encode_kmer`].
pub fn decode_kmer(code: u32, k: usize) -> Result<String> {
    check_k(k)?;
    if u64::from(code) >= 1u64 << (2 * k) {
        return Err(Error::param(
            "code",
            format!("{code} is out of range for k = {k}"),
        ));
    }
    Ok(decode_unchecked(code, k))
}

fn decode_unchecked(code: u32, k: usize) -> String {
    (0..k)
        .rev()
        .map(|i| ALPHABET[((code >> (2 * i)) & 3) as usize] as char)
        .collect()
}

/// Rolling codes of every overlapping k-mer in `bases`. Bases must be
/// canonical A/C/G/T; anything else is treated as `A`.
pub(crate) fn kmer_codes(bases: &[u8], k: usize) -> impl Iterator<Item = u32> + '_ {
    let mask = if k >= 16 {
        u32::MAX
    } else {
        (1u32 << (2 * k)) - 1
    };
    let mut code = 0u32;
    bases.iter().enumerate().filter_map(move |(i, &b)| {
        code = (code << 2 | base_code(b).unwrap_or(0)) & mask;
        (i + 1 >= k).then_some(code)
    })
}

/// Overlapping k-mers of `bases`: exactly `len - k + 1` tokens, token `i`
/// being `bases[i..i + k]`.
pub fn kmer_tokenize(bases: &str, k: usize) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::param("k", "k must be >= 1"));
    }
    if bases.len() < k {
        return Err(Error::SequenceTooShort {
            len: bases.len(),
            k,
        });
    }
    Ok(bases
        .as_bytes()
        .windows(k)
        .map(|w| String::from_utf8_lossy(w).into_owned())
        .collect())
}

/// All 4^k k-mers in lexicographic order under A < C < G < T.
pub fn kmer_vocabulary(k: usize) -> Result<Vec<String>> {
    check_k(k)?;
    Ok((0..1u32 << (2 * k))
        .map(|c| decode_unchecked(c, k))
        .collect())
}

/// Rebuilds a sequence from its overlapping k-mers.
pub fn reconstruct<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    if let Some(first) = tokens.first() {
        out.push_str(first.as_ref());
        for t in &tokens[1..] {
            if let Some(c) = t.as_ref().chars().last() {
                out.push(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerates every string of length k by repeated extension, then sorts.
    fn enumerate_oracle(k: usize) -> Vec<String> {
        let mut words = vec![String::new()];
        for _ in 0..k {
            words = words
                .iter()
                .flat_map(|w| ["A", "C", "G", "T"].iter().map(move |b| format!("{w}{b}")))
                .collect();
        }
        words.sort();
        words
    }

    #[test]
    fn worked_examples() {
        assert_eq!(
            kmer_tokenize("ATGGCT", 3).unwrap(),
            ["ATG", "TGG", "GGC", "GCT"]
        );
        assert_eq!(kmer_tokenize("ATGGCT", 5).unwrap(), ["ATGGC", "TGGCT"]);
        assert_eq!(kmer_tokenize("ACGTAC", 6).unwrap(), ["ACGTAC"]);
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            kmer_tokenize("ACG", 6),
            Err(Error::SequenceTooShort { len: 3, k: 6 })
        ));
    }

    #[test]
    fn vocabulary_matches_enumeration() {
        assert_eq!(kmer_vocabulary(1).unwrap(), ["A", "C", "G", "T"]);
        let two = kmer_vocabulary(2).unwrap();
        assert_eq!(two.len(), 16);
        assert_eq!(&two[..5], ["AA", "AC", "AG", "AT", "CA"]);
        for k in 1..=6 {
            assert_eq!(kmer_vocabulary(k).unwrap(), enumerate_oracle(k), "k = {k}");
        }
        assert_eq!(kmer_vocabulary(6).unwrap().len(), 4096);
        assert!(kmer_vocabulary(0).is_err());
        assert!(kmer_vocabulary(13).is_err());
    }

    #[test]
    fn codes_follow_vocabulary_order() {
        assert_eq!(encode_kmer("AA").unwrap(), 0);
        assert_eq!(encode_kmer("TT").unwrap(), 15);
        assert_eq!(encode_kmer("ACG").unwrap(), 6);
        assert!(encode_kmer("ANG").is_err());
        assert!(decode_kmer(16, 2).is_err());
        for k in 1..=6 {
            for (i, w) in kmer_vocabulary(k).unwrap().iter().enumerate() {
                assert_eq!(encode_kmer(w).unwrap(), i as u32);
                assert_eq!(&decode_kmer(i as u32, k).unwrap(), w);
            }
        }
    }

    fn dna(max: usize) -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![Just('A'), Just('C'), Just('G'), Just('T')],
            1..max,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn count_law_and_reconstruction(s in dna(400), k in 1usize..=12) {
            prop_assume!(s.len() >= k);
            let toks = kmer_tokenize(&s, k).unwrap();
            prop_assert_eq!(toks.len(), s.len() - k + 1);
            prop_assert_eq!(reconstruct(&toks), s.clone());
            let codes: Vec<u32> = kmer_codes(s.as_bytes(), k).collect();
            prop_assert_eq!(codes.len(), toks.len());
            for (t, c) in toks.iter().zip(codes) {
                prop_assert_eq!(encode_kmer(t).unwrap(), c);
            }
        }
    }
}
