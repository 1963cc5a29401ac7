//! Corpus ingestion: FASTA / plain-text parsing, alphabet filtering,
//! fixed-length segmentation, overlapping window extraction and seeded
//! train/test splitting.
//!
//! Every character outside `{A,C,G,T}` (case-insensitive) ends the current
//! run of bases, so a record like `ACGTNACGT` yields two sequences at
//! offsets 0 and 5. Offsets always refer to the position inside the source
//! record, counted in sequence characters (line breaks excluded).

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::ops::Deref;
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default segment length in nucleotides.
pub const DEFAULT_SEGMENT_LENGTH: usize = 305;
/// Default width of the overlapping windows used for the next-k-mer task.
pub const DEFAULT_WINDOW: usize = 510;
/// Number of leading bases kept from each window.
pub const DEFAULT_KEEP: usize = 56;

#[inline]
pub(crate) fn canonical_base(byte: u8) -> Option<u8> {
    match byte {
        b'A' | b'a' => Some(b'A'),
        b'C' | b'c' => Some(b'C'),
        b'G' | b'g' => Some(b'G'),
        b'T' | b't' => Some(b'T'),
        _ => None,
    }
}

/// A run of canonical (uppercase) A/C/G/T bases with its genomic origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct NucleotideSequence {
    source_id: String,
    offset: usize,
    bases: String,
}

#[derive(Deserialize)]
struct RawSequence {
    source_id: String,
    offset: usize,
    bases: String,
}

impl TryFrom<RawSequence> for NucleotideSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        NucleotideSequence::new(raw.bases, raw.source_id, raw.offset)
    }
}

impl NucleotideSequence {
    /// Validates `bases`; lowercase input is uppercased.
    pub fn new(
        bases: impl Into<String>,
        source_id: impl Into<String>,
        offset: usize,
    ) -> Result<Self> {
        let mut bases = bases.into();
        if let Some((position, c)) = bases
            .char_indices()
            .find(|&(_, c)| !c.is_ascii() || canonical_base(c as u8).is_none())
        {
            return Err(Error::InvalidBase { base: c, position });
        }
        bases.make_ascii_uppercase();
        Ok(Self {
            source_id: source_id.into(),
            offset,
            bases,
        })
    }

    pub(crate) fn from_canonical(bases: String, source_id: String, offset: usize) -> Self {
        debug_assert!(bases
            .bytes()
            .all(|b| matches!(b, b'A' | b'C' | b'G' | b'T')));
        Self {
            source_id,
            offset,
            bases,
        }
    }

    pub fn bases(&self) -> &str {
        &self.bases
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Sub-sequence `[start, start + len)` with the offset shifted accordingly.
    pub fn slice(&self, start: usize, len: usize) -> NucleotideSequence {
        Self {
            source_id: self.source_id.clone(),
            offset: self.offset + start,
            bases: self.bases[start..start + len].to_owned(),
        }
    }
}

impl AsRef<str> for NucleotideSequence {
    fn as_ref(&self) -> &str {
        &self.bases
    }
}

impl AsRef<str> for Segment {
    fn as_ref(&self) -> &str {
        self.0.bases()
    }
}

/// A fixed-length window of a [`NucleotideSequence`].
///
/// Serializes as the JSONL record `{source_id, offset, bases}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Segment(NucleotideSequence);

impl Segment {
    pub fn new(seq: NucleotideSequence) -> Self {
        Segment(seq)
    }

    /// Convenience constructor for literal bases, mostly useful in tests and examples.
    pub fn from_bases(bases: &str) -> Result<Self> {
        Ok(Segment(NucleotideSequence::new(bases, "seq", 0)?))
    }

    pub fn seq(&self) -> &NucleotideSequence {
        &self.0
    }

    pub fn into_inner(self) -> NucleotideSequence {
        self.0
    }
}

impl Deref for Segment {
    type Target = NucleotideSequence;

    fn deref(&self) -> &NucleotideSequence {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFormat {
    Fasta,
    Plain,
}

impl SequenceFormat {
    /// Guesses the format from the file name, ignoring a trailing `.gz`.
    pub fn from_path(path: &Path) -> SequenceFormat {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        let name = name.strip_suffix(".gz").unwrap_or(&name);
        let fasta = [".fa", ".fasta", ".fna", ".fas", ".ffn"];
        if fasta.iter().any(|ext| name.ends_with(ext)) {
            SequenceFormat::Fasta
        } else {
            SequenceFormat::Plain
        }
    }
}

impl std::str::FromStr for SequenceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fasta" | "fa" => Ok(SequenceFormat::Fasta),
            "plain" | "txt" | "text" => Ok(SequenceFormat::Plain),
            other => Err(Error::param("format", format!("unknown format {other:?}"))),
        }
    }
}

/// Collects maximal A/C/G/T runs for one record at a time.
struct RunSplitter {
    out: Vec<NucleotideSequence>,
    record: Option<String>,
    position: usize,
    run_start: usize,
    run: Vec<u8>,
}

impl RunSplitter {
    fn new() -> Self {
        Self {
            out: Vec::new(),
            record: None,
            position: 0,
            run_start: 0,
            run: Vec::new(),
        }
    }

    fn start_record(&mut self, id: String) {
        self.flush();
        self.record = Some(id);
        self.position = 0;
        self.run_start = 0;
    }

    fn flush(&mut self) {
        if !self.run.is_empty() {
            let bases = String::from_utf8(std::mem::take(&mut self.run)).expect("ACGT is ASCII");
            let id = self.record.clone().unwrap_or_default();
            self.out.push(NucleotideSequence::from_canonical(
                bases,
                id,
                self.run_start,
            ));
        }
    }

    /// Feeds sequence characters; whitespace is skipped and does not advance the position.
    fn feed(&mut self, line: &[u8]) -> std::result::Result<(), String> {
        for &byte in line {
            if byte.is_ascii_whitespace() {
                continue;
            }
            if !byte.is_ascii() {
                return Err(format!("non-ASCII byte 0x{byte:02x} in sequence data"));
            }
            match canonical_base(byte) {
                Some(b) => {
                    if self.run.is_empty() {
                        self.run_start = self.position;
                    }
                    self.run.push(b);
                }
                None => self.flush(),
            }
            self.position += 1;
        }
        Ok(())
    }

    fn finish(mut self) -> Vec<NucleotideSequence> {
        self.flush();
        self.out
    }
}

/// Parses sequences from a reader. `name` is used only for error messages.
pub fn parse_sequences<R: BufRead>(
    mut reader: R,
    format: SequenceFormat,
    name: &Path,
) -> Result<Vec<NucleotideSequence>> {
    let malformed = |line: usize, reason: String| Error::MalformedFile {
        path: name.to_path_buf(),
        line,
        reason,
    };
    let mut splitter = RunSplitter::new();
    let mut buf = Vec::with_capacity(256);
    let mut line_no = 0usize;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(name, e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        match format {
            SequenceFormat::Fasta => {
                if let Some(header) = buf.strip_prefix(b">") {
                    let header = String::from_utf8_lossy(header);
                    let id = header.split_whitespace().next().unwrap_or("");
                    if id.is_empty() {
                        return Err(malformed(line_no, "empty FASTA header".into()));
                    }
                    splitter.start_record(id.to_owned());
                } else if buf.first() == Some(&b';') {
                    // legacy comment line
                } else if splitter.record.is_none() {
                    if buf.iter().any(|b| !b.is_ascii_whitespace()) {
                        return Err(malformed(
                            line_no,
                            "sequence data before first '>' header".into(),
                        ));
                    }
                } else {
                    splitter.feed(&buf).map_err(|r| malformed(line_no, r))?;
                }
            }
            SequenceFormat::Plain => {
                splitter.start_record(format!("line_{line_no}"));
                splitter.feed(&buf).map_err(|r| malformed(line_no, r))?;
            }
        }
    }
    let seqs = splitter.finish();
    if seqs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(seqs)
}

/// Loads a FASTA or plain-text file; `.gz` files are decompressed transparently.
pub fn load_sequences(
    path: impl AsRef<Path>,
    format: SequenceFormat,
) -> Result<Vec<NucleotideSequence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let gz = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    let inner: Box<dyn Read> = if gz {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_sequences(BufReader::with_capacity(1 << 16, inner), format, path)
}

/// Cuts each sequence into non-overlapping windows of exactly `length` bases.
/// Trailing remainders shorter than `length` are dropped.
pub fn segment(seqs: &[NucleotideSequence], length: usize) -> Result<Vec<Segment>> {
    if length == 0 {
        return Err(Error::param("length", "segment length must be >= 1"));
    }
    let total: usize = seqs.iter().map(|s| s.len() / length).sum();
    let mut out = Vec::with_capacity(total);
    for seq in seqs {
        for i in 0..seq.len() / length {
            out.push(Segment(seq.slice(i * length, length)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowParams {
    pub window: usize,
    pub keep: usize,
    pub stride: usize,
    /// Number of windows to sample; `None` keeps every candidate window.
    pub count: Option<usize>,
    pub seed: u64,
}

impl WindowParams {
    pub fn new(stride: usize, count: Option<usize>, seed: u64) -> Self {
        Self {
            window: DEFAULT_WINDOW,
            keep: DEFAULT_KEEP,
            stride,
            count,
            seed,
        }
    }
}

/// Result of [`extract_windows`]. `available < requested` means the corpus
/// had too few candidate windows.
#[derive(Debug, Clone)]
pub struct WindowSample {
    pub windows: Vec<NucleotideSequence>,
    pub requested: usize,
    pub available: usize,
}

impl WindowSample {
    pub fn is_short(&self) -> bool {
        self.windows.len() < self.requested
    }
}

/// Number of `window`-length windows at the given stride in a sequence of length `len`.
pub fn window_count(len: usize, window: usize, stride: usize) -> usize {
    if len < window {
        0
    } else {
        (len - window) / stride + 1
    }
}

/// Slides a window over every sequence, keeps the first `keep` bases of
/// each position and samples `count` of them uniformly without replacement.
/// Sampled windows are returned in corpus order.
pub fn extract_windows(seqs: &[NucleotideSequence], params: &WindowParams) -> Result<WindowSample> {
    let WindowParams {
        window,
        keep,
        stride,
        count,
        seed,
    } = *params;
    if keep > window || keep == 0 {
        return Err(Error::param(
            "keep",
            format!("need 1 <= keep <= window, got keep={keep} window={window}"),
        ));
    }
    if stride == 0 {
        return Err(Error::param("stride", "stride must be >= 1"));
    }
    if count == Some(0) {
        return Err(Error::param("count", "count must be >= 1"));
    }

    // prefix[i] = number of candidate windows in seqs[..i]
    let mut prefix = Vec::with_capacity(seqs.len() + 1);
    prefix.push(0usize);
    for s in seqs {
        prefix.push(prefix.last().unwrap() + window_count(s.len(), window, stride));
    }
    let available = *prefix.last().unwrap();
    let requested = count.unwrap_or(available);

    let picks: Vec<usize> = if requested >= available {
        if requested > available {
            log::warn!("requested {requested} windows but only {available} exist");
        }
        (0..available).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = index::sample(&mut rng, available, requested).into_vec();
        v.sort_unstable();
        v
    };

    let windows = picks
        .into_iter()
        .map(|flat| {
            let seq_idx = prefix.partition_point(|&p| p <= flat) - 1;
            let start = (flat - prefix[seq_idx]) * stride;
            seqs[seq_idx].slice(start, keep)
        })
        .collect();
    Ok(WindowSample {
        windows,
        requested,
        available,
    })
}

/// Train/test partition of a segment corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSplit {
    pub train: Vec<Segment>,
    pub test: Vec<Segment>,
    pub seed: u64,
}

/// Seeded shuffle followed by a prefix/suffix cut at `round(train_fraction * n)`.
pub fn split_items<T>(
    mut items: Vec<T>,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param(
            "train_fraction",
            format!("must lie strictly between 0 and 1, got {train_fraction}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    items.shuffle(&mut rng);
    let cut = (train_fraction * items.len() as f64).round() as usize;
    let test = items.split_off(cut.min(items.len()));
    Ok((items, test))
}

pub fn split(segments: Vec<Segment>, train_fraction: f64, seed: u64) -> Result<CorpusSplit> {
    let (train, test) = split_items(segments, train_fraction, seed)?;
    Ok(CorpusSplit { train, test, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn parse(text: &str, format: SequenceFormat) -> Result<Vec<NucleotideSequence>> {
        parse_sequences(text.as_bytes(), format, Path::new("mem"))
    }

    #[test]
    fn fasta_n_splits_runs_and_keeps_offsets() {
        let seqs = parse(">chr1\nACGTN\nACGT\n", SequenceFormat::Fasta).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!((seqs[0].bases(), seqs[0].offset()), ("ACGT", 0));
        assert_eq!((seqs[1].bases(), seqs[1].offset()), ("ACGT", 5));
        assert!(seqs.iter().all(|s| s.source_id() == "chr1"));
    }

    #[test]
    fn runs_continue_across_line_breaks() {
        let seqs = parse(">r desc\nAC\nGT\r\nnnA\n>s\nT", SequenceFormat::Fasta).unwrap();
        let got: Vec<_> = seqs
            .iter()
            .map(|s| (s.source_id(), s.bases(), s.offset()))
            .collect();
        assert_eq!(got, vec![("r", "ACGT", 0), ("r", "A", 6), ("s", "T", 0)]);
    }

    #[test]
    fn plain_is_uppercased() {
        let seqs = parse("acgt", SequenceFormat::Plain).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0].bases(), "ACGT");
        assert_eq!(seqs[0].offset(), 0);
    }

    #[test]
    fn no_bases_is_empty_corpus() {
        assert!(matches!(
            parse(">chr1\nNNNN\n", SequenceFormat::Fasta),
            Err(Error::EmptyCorpus)
        ));
        assert!(matches!(
            parse("", SequenceFormat::Plain),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn data_before_header_is_malformed() {
        let err = parse("ACGT\n>chr1\nACGT\n", SequenceFormat::Fasta).unwrap_err();
        assert_eq!(err.kind(), "MalformedFile");
        let err = parse(">\nACGT\n", SequenceFormat::Fasta).unwrap_err();
        assert_eq!(err.kind(), "MalformedFile");
    }

    #[test]
    fn format_guess() {
        assert_eq!(
            SequenceFormat::from_path(Path::new("x.fa.gz")),
            SequenceFormat::Fasta
        );
        assert_eq!(
            SequenceFormat::from_path(Path::new("x.FASTA")),
            SequenceFormat::Fasta
        );
        assert_eq!(
            SequenceFormat::from_path(Path::new("x.txt")),
            SequenceFormat::Plain
        );
    }

    #[test]
    fn new_rejects_ambiguity_codes() {
        assert!(matches!(
            NucleotideSequence::new("ACNT", "x", 0),
            Err(Error::InvalidBase {
                base: 'N',
                position: 2
            })
        ));
    }

    fn seq_of_len(n: usize) -> NucleotideSequence {
        let bases: String = "ACGT".chars().cycle().take(n).collect();
        NucleotideSequence::new(bases, "s", 0).unwrap()
    }

    #[test]
    fn segment_counts() {
        assert_eq!(segment(&[seq_of_len(305)], 305).unwrap().len(), 1);
        let segs = segment(&[seq_of_len(700)], 305).unwrap();
        assert_eq!(
            segs.iter().map(|s| s.offset()).collect::<Vec<_>>(),
            vec![0, 305]
        );
        assert!(segment(&[seq_of_len(304)], 305).unwrap().is_empty());
        assert!(segment(&[seq_of_len(10)], 0).is_err());
    }

    #[test]
    fn segments_plus_tail_reconstruct() {
        let seq = seq_of_len(1000);
        let segs = segment(std::slice::from_ref(&seq), 305).unwrap();
        let mut rebuilt: String = segs.iter().map(|s| s.bases()).collect();
        rebuilt.push_str(&seq.bases()[segs.len() * 305..]);
        assert_eq!(rebuilt, seq.bases());
    }

    #[test]
    fn single_window_keeps_prefix() {
        let seq = seq_of_len(510);
        let p = WindowParams::new(1, Some(1), 7);
        let sample = extract_windows(std::slice::from_ref(&seq), &p).unwrap();
        assert_eq!(sample.windows.len(), 1);
        assert_eq!(sample.windows[0].bases(), &seq.bases()[..56]);
    }

    #[test]
    fn window_count_formula() {
        let seq = seq_of_len(511);
        let p = WindowParams::new(1, None, 0);
        let sample = extract_windows(std::slice::from_ref(&seq), &p).unwrap();
        assert_eq!(sample.available, 2);
        assert_eq!(sample.windows[1].offset(), 1);
        assert_eq!(window_count(1000, 510, 7), (1000 - 510) / 7 + 1);
    }

    #[test]
    fn short_sample_is_flagged() {
        let p = WindowParams::new(1, Some(10), 0);
        let sample = extract_windows(&[seq_of_len(512)], &p).unwrap();
        assert_eq!(sample.windows.len(), 3);
        assert!(sample.is_short());
    }

    #[test]
    fn sampled_windows_are_distinct_and_seeded() {
        let seqs = vec![seq_of_len(2000), seq_of_len(900)];
        let p = WindowParams::new(3, Some(100), 11);
        let a = extract_windows(&seqs, &p).unwrap();
        let b = extract_windows(&seqs, &p).unwrap();
        assert_eq!(a.windows, b.windows);
        let keys: HashSet<_> = a
            .windows
            .iter()
            .map(|w| (w.source_id().to_owned(), w.offset()))
            .collect();
        assert_eq!(keys.len(), 100);
        assert!(a
            .windows
            .iter()
            .all(|w| w.len() == 56 && w.offset() % 3 == 0));
    }

    #[test]
    fn split_ratio_and_determinism() {
        let segs = segment(&[seq_of_len(3050)], 305).unwrap();
        let a = split(segs.clone(), 0.8, 42).unwrap();
        assert_eq!((a.train.len(), a.test.len()), (8, 2));
        let b = split(segs, 0.8, 42).unwrap();
        assert_eq!(a, b);
        let train: HashSet<_> = a.train.iter().map(|s| s.offset()).collect();
        assert!(a.test.iter().all(|s| !train.contains(&s.offset())));
    }

    #[test]
    fn split_rejects_degenerate_fraction() {
        assert!(split_items(vec![1, 2, 3], 1.0, 0).is_err());
        assert!(split_items(vec![1, 2, 3], 0.0, 0).is_err());
    }

    #[test]
    fn full_scale_split_counts() {
        let (train, test) = split_items((0..500_000u32).collect(), 0.8, 1).unwrap();
        assert_eq!((train.len(), test.len()), (400_000, 100_000));
    }

    #[test]
    fn segment_jsonl_shape() {
        let seg = Segment::from_bases("acgt").unwrap();
        let v: serde_json::Value = serde_json::to_value(&seg).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"source_id": "seq", "offset": 0, "bases": "ACGT"})
        );
        let back: Segment = serde_json::from_value(v).unwrap();
        assert_eq!(back, seg);
        assert!(
            serde_json::from_str::<Segment>(r#"{"source_id":"s","offset":0,"bases":"ANA"}"#)
                .is_err()
        );
    }
}
