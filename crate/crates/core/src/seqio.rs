//! FASTA ingestion and elementary DNA string operations: reverse complement
//! and canonical form.

use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeqIoError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {0}: expected a FASTA header starting with '>'")]
    MissingHeader(usize),
    #[error("record '{0}' has an empty sequence")]
    EmptyRecord(String),
    #[error("non-ACGT symbol '{0}'")]
    InvalidBase(char),
}

/// Orientation of a sequence relative to its stored form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strand {
    Forward,
    Reverse,
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strand::Forward => write!(f, "+"),
            Strand::Reverse => write!(f, "-"),
        }
    }
}

/// A read with a dense id assigned in file order.
///
/// Sequences are uppercased on construction. Symbols outside {A,C,G,T}
/// (e.g. N) are kept verbatim; k-mer extraction skips windows containing
/// them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Read {
    pub id: usize,
    pub name: String,
    pub seq: Vec<u8>,
}

impl Read {
    pub fn new(id: usize, name: impl Into<String>, seq: impl Into<Vec<u8>>) -> Read {
        let mut seq = seq.into();
        seq.make_ascii_uppercase();
        Read {
            id,
            name: name.into(),
            seq,
        }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }
}

/// Parses a FASTA file into reads with ids in encounter order.
pub fn parse_fasta(path: impl AsRef<Path>) -> Result<Vec<Read>, SeqIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SeqIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fasta_str(&text)
}

/// Parses FASTA text. Sequence lines of a record are concatenated and
/// uppercased; blank lines are ignored; an empty input yields no reads.
pub fn parse_fasta_str(text: &str) -> Result<Vec<Read>, SeqIoError> {
    let mut reads: Vec<Read> = Vec::new();
    let mut current: Option<(String, Vec<u8>)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('>') {
            if let Some((name, seq)) = current.take() {
                push_record(&mut reads, name, seq)?;
            }
            let name = rest.split_whitespace().next().unwrap_or("").to_string();
            current = Some((name, Vec::new()));
        } else {
            match current.as_mut() {
                Some((_, seq)) => seq.extend(line.bytes().map(|b| b.to_ascii_uppercase())),
                None => return Err(SeqIoError::MissingHeader(idx + 1)),
            }
        }
    }
    if let Some((name, seq)) = current.take() {
        push_record(&mut reads, name, seq)?;
    }
    Ok(reads)
}

fn push_record(reads: &mut Vec<Read>, name: String, seq: Vec<u8>) -> Result<(), SeqIoError> {
    if seq.is_empty() {
        return Err(SeqIoError::EmptyRecord(name));
    }
    let id = reads.len();
    reads.push(Read { id, name, seq });
    Ok(())
}

fn complement(base: u8) -> Result<u8, SeqIoError> {
    match base {
        b'A' => Ok(b'T'),
        b'C' => Ok(b'G'),
        b'G' => Ok(b'C'),
        b'T' => Ok(b'A'),
        other => Err(SeqIoError::InvalidBase(other as char)),
    }
}

/// Returns the reversed sequence with A<->T and C<->G swapped.
pub fn reverse_complement(seq: &[u8]) -> Result<Vec<u8>, SeqIoError> {
    seq.iter().rev().map(|&b| complement(b)).collect()
}

/// Returns the lexicographically smaller of `seq` and its reverse
/// complement, plus the strand that was kept. Ties resolve to the forward
/// strand.
pub fn canonical(seq: &[u8]) -> Result<(Vec<u8>, Strand), SeqIoError> {
    let rc = reverse_complement(seq)?;
    if rc.as_slice() < seq {
        Ok((rc, Strand::Reverse))
    } else {
        Ok((seq.to_vec(), Strand::Forward))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_single_record() {
        let reads = parse_fasta_str(">r0\nATTCG\n").unwrap();
        assert_eq!(reads.len(), 1);
        assert_eq!(reads[0].id, 0);
        assert_eq!(reads[0].name, "r0");
        assert_eq!(reads[0].seq, b"ATTCG");
        assert_eq!(reads[0].len(), 5);
    }

    #[test]
    fn parse_multiline_records() {
        let reads = parse_fasta_str(">a\nTAC\nGA\n>b\nACGACC\n").unwrap();
        assert_eq!(reads.len(), 2);
        assert_eq!(reads[0].seq, b"TACGA");
        assert_eq!(reads[1].seq, b"ACGACC");
        assert_eq!(reads[1].id, 1);
    }

    #[test]
    fn parse_empty_input() {
        assert!(parse_fasta_str("").unwrap().is_empty());
        assert!(parse_fasta_str("\n\n").unwrap().is_empty());
    }

    #[test]
    fn parse_uppercases_sequences() {
        let reads = parse_fasta_str(">x\nacgtN\n").unwrap();
        assert_eq!(reads[0].seq, b"ACGTN");
    }

    #[test]
    fn parse_rejects_sequence_before_header() {
        assert!(matches!(
            parse_fasta_str("ACGT\n>x\nACGT\n"),
            Err(SeqIoError::MissingHeader(1))
        ));
    }

    #[test]
    fn parse_rejects_empty_record() {
        assert!(matches!(
            parse_fasta_str(">a\n>b\nACGT\n"),
            Err(SeqIoError::EmptyRecord(name)) if name == "a"
        ));
        assert!(matches!(
            parse_fasta_str(">only\n"),
            Err(SeqIoError::EmptyRecord(_))
        ));
    }

    #[test]
    fn parse_missing_file() {
        assert!(matches!(
            parse_fasta("/nonexistent/path.fa"),
            Err(SeqIoError::Io { .. })
        ));
    }

    #[test]
    fn revcomp_examples() {
        assert_eq!(reverse_complement(b"ATTCG").unwrap(), b"CGAAT");
        assert_eq!(reverse_complement(b"").unwrap(), b"");
        assert!(matches!(
            reverse_complement(b"ACGN"),
            Err(SeqIoError::InvalidBase('N'))
        ));
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(
            canonical(b"ATTCG").unwrap(),
            (b"ATTCG".to_vec(), Strand::Forward)
        );
        // rc("CGT") = "ACG" < "CGT"
        assert_eq!(
            canonical(b"CGT").unwrap(),
            (b"ACG".to_vec(), Strand::Reverse)
        );
        // palindromic complement: rc("ACGT") == "ACGT", tie kept forward
        assert_eq!(
            canonical(b"ACGT").unwrap(),
            (b"ACGT".to_vec(), Strand::Forward)
        );
    }

    fn dna() -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(prop_oneof![3 => Just(b'A'), 1 => Just(b'C'), 1 => Just(b'G'), 3 => Just(b'T')], 0..64)
    }

    proptest! {
        #[test]
        fn revcomp_is_involutive(seq in dna()) {
            let twice = reverse_complement(&reverse_complement(&seq).unwrap()).unwrap();
            prop_assert_eq!(twice, seq);
        }

        #[test]
        fn canonical_is_idempotent(seq in dna()) {
            let (once, _) = canonical(&seq).unwrap();
            let (twice, strand) = canonical(&once).unwrap();
            prop_assert_eq!(&twice, &once);
            prop_assert_eq!(strand, Strand::Forward);
        }

        #[test]
        fn canonical_matches_revcomp_canonical(seq in dna()) {
            let (a, _) = canonical(&seq).unwrap();
            let (b, _) = canonical(&reverse_complement(&seq).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
