//! Two-pass Bloom-filtered k-mer counting and reliable-k-mer selection.
//!
//! The first pass inserts every canonical k-mer into a Bloom filter and
//! opens a table slot for k-mers the filter has already seen; the second
//! pass counts exactly into those slots. Keys seen at least twice always
//! end up in the table with their true multiset count (the filter has no
//! false negatives); a false positive can admit a singleton, which then
//! carries count 1 and falls to the lower bound during selection.

use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::seqio::Read;

/// Largest supported k: a k-mer packs into a u64 at 2 bits per base.
pub const MAX_K: usize = 31;
pub const MIN_K: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KmerError {
    #[error("k must be between {MIN_K} and {MAX_K}, got {0}")]
    InvalidK(usize),
    #[error("bloom filter size must be positive")]
    EmptyBloom,
}

fn base_code(base: u8) -> Option<u64> {
    match base {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

const BASES: [u8; 4] = [b'A', b'C', b'G', b'T'];

/// Packs an ACGT window into 2 bits per base; `None` if any other symbol
/// occurs. Numeric order of packed codes equals lexicographic order of the
/// strings.
pub fn pack(window: &[u8]) -> Option<u64> {
    debug_assert!(window.len() <= MAX_K);
    let mut code = 0u64;
    for &base in window {
        code = (code << 2) | base_code(base)?;
    }
    Some(code)
}

/// Reverse complement of a packed k-mer.
pub fn rc_code(code: u64, k: usize) -> u64 {
    let mut rc = 0u64;
    let mut rest = code;
    for _ in 0..k {
        rc = (rc << 2) | ((rest & 3) ^ 3);
        rest >>= 2;
    }
    rc
}

/// The smaller of a packed k-mer and its reverse complement, plus whether
/// the reverse form won.
pub fn canonical_code(code: u64, k: usize) -> (u64, bool) {
    let rc = rc_code(code, k);
    if rc < code {
        (rc, true)
    } else {
        (code, false)
    }
}

/// Decodes a packed k-mer back to its string form.
pub fn decode(code: u64, k: usize) -> String {
    let mut out = vec![0u8; k];
    let mut rest = code;
    for slot in out.iter_mut().rev() {
        *slot = BASES[(rest & 3) as usize];
        rest >>= 2;
    }
    String::from_utf8(out).unwrap()
}

/// Iterates (position, canonical code, rc flag) over the k-windows of a
/// sequence, skipping windows with non-ACGT symbols.
pub fn canonical_windows(
    seq: &[u8],
    k: usize,
) -> impl Iterator<Item = (usize, u64, bool)> + '_ {
    let end = seq.len().checked_sub(k).map(|n| n + 1).unwrap_or(0);
    (0..end).filter_map(move |pos| {
        pack(&seq[pos..pos + k]).map(|code| {
            let (canon, rc) = canonical_code(code, k);
            (pos, canon, rc)
        })
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Plain bit-array Bloom filter with double hashing. Never reports an
/// inserted key as absent.
#[derive(Debug, Clone)]
pub struct BloomFilter {
    bits: Vec<u64>,
    nbits: usize,
    hashes: u32,
    inserted: usize,
}

impl BloomFilter {
    pub fn new(nbits: usize, hashes: u32) -> BloomFilter {
        assert!(nbits > 0 && hashes > 0);
        BloomFilter {
            bits: vec![0u64; nbits.div_ceil(64)],
            nbits,
            hashes,
            inserted: 0,
        }
    }

    fn position(&self, key: u64, round: u32) -> usize {
        let h1 = splitmix64(key);
        let h2 = splitmix64(key ^ 0xd1b54a32d192ed03) | 1;
        (h1.wrapping_add(h2.wrapping_mul(round as u64)) % self.nbits as u64) as usize
    }

    pub fn insert(&mut self, key: u64) {
        for round in 0..self.hashes {
            let pos = self.position(key, round);
            self.bits[pos / 64] |= 1 << (pos % 64);
        }
        self.inserted += 1;
    }

    pub fn contains(&self, key: u64) -> bool {
        (0..self.hashes).all(|round| {
            let pos = self.position(key, round);
            self.bits[pos / 64] & (1 << (pos % 64)) != 0
        })
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmerEntry {
    pub count: u32,
    pub col: Option<u32>,
}

/// Table from canonical packed k-mer to count and (after selection) a dense
/// column index.
#[derive(Debug, Clone)]
pub struct KmerTable {
    k: usize,
    entries: HashMap<u64, KmerEntry>,
    columns: usize,
}

impl KmerTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, code: u64) -> Option<&KmerEntry> {
        self.entries.get(&code)
    }

    /// Number of assigned columns (the m dimension of the data matrix).
    pub fn num_columns(&self) -> usize {
        self.columns
    }

    /// Entries sorted by canonical k-mer code (lexicographic over strings).
    pub fn iter_sorted(&self) -> Vec<(u64, KmerEntry)> {
        let mut rows: Vec<(u64, KmerEntry)> =
            self.entries.iter().map(|(&code, &e)| (code, e)).collect();
        rows.sort_unstable_by_key(|&(code, _)| code);
        rows
    }

    pub fn write_tsv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "# kmer\tcount\tcol")?;
        for (code, entry) in self.iter_sorted() {
            let col = entry
                .col
                .map(|c| c.to_string())
                .unwrap_or_else(|| "-".to_string());
            writeln!(out, "{}\t{}\t{}", decode(code, self.k), entry.count, col)?;
        }
        Ok(())
    }
}

/// Suggested Bloom size: 8 bits per k-mer window in the input.
pub fn default_bloom_bits(reads: &[Read], k: usize) -> usize {
    let windows: usize = reads
        .iter()
        .map(|r| r.len().saturating_sub(k).saturating_add(1))
        .sum();
    (windows.saturating_mul(8)).max(1024)
}

/// Two-pass counting: pass one feeds the Bloom filter and opens table slots
/// for repeated k-mers, pass two takes exact counts for the opened slots.
pub fn count_kmers(reads: &[Read], k: usize, bloom_bits: usize) -> Result<KmerTable, KmerError> {
    if !(MIN_K..=MAX_K).contains(&k) {
        return Err(KmerError::InvalidK(k));
    }
    if bloom_bits == 0 {
        return Err(KmerError::EmptyBloom);
    }
    let mut bloom = BloomFilter::new(bloom_bits, 2);
    let mut entries: HashMap<u64, KmerEntry> = HashMap::new();
    for read in reads {
        for (_, code, _) in canonical_windows(&read.seq, k) {
            if bloom.contains(code) {
                entries.entry(code).or_insert(KmerEntry {
                    count: 0,
                    col: None,
                });
            } else {
                bloom.insert(code);
            }
        }
    }
    for read in reads {
        for (_, code, _) in canonical_windows(&read.seq, k) {
            if let Some(entry) = entries.get_mut(&code) {
                entry.count += 1;
            }
        }
    }
    Ok(KmerTable {
        k,
        entries,
        columns: 0,
    })
}

/// Keeps entries with `lower <= count <= upper` and assigns dense column
/// indices 0..m-1 in ascending canonical k-mer order.
pub fn select_reliable(table: &KmerTable, lower: u32, upper: u32) -> KmerTable {
    debug_assert!(2 <= lower && lower <= upper);
    let mut kept: Vec<(u64, u32)> = table
        .entries
        .iter()
        .filter(|(_, e)| (lower..=upper).contains(&e.count))
        .map(|(&code, e)| (code, e.count))
        .collect();
    kept.sort_unstable_by_key(|&(code, _)| code);
    let columns = kept.len();
    let entries = kept
        .into_iter()
        .enumerate()
        .map(|(idx, (code, count))| {
            (
                code,
                KmerEntry {
                    count,
                    col: Some(idx as u32),
                },
            )
        })
        .collect();
    KmerTable {
        k: table.k,
        entries,
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn reads_from(seqs: &[&str]) -> Vec<Read> {
        seqs.iter()
            .enumerate()
            .map(|(i, s)| Read::new(i, format!("r{i}"), s.as_bytes().to_vec()))
            .collect()
    }

    /// Exact canonical counts computed independently on strings.
    fn exact_counts(reads: &[Read], k: usize) -> HashMap<String, u32> {
        let mut counts = HashMap::new();
        for read in reads {
            if read.len() < k {
                continue;
            }
            for start in 0..=read.len() - k {
                let window = &read.seq[start..start + k];
                if !window.iter().all(|b| b"ACGT".contains(b)) {
                    continue;
                }
                let (canon, _) = seqio::canonical(window).unwrap();
                *counts
                    .entry(String::from_utf8(canon).unwrap())
                    .or_insert(0) += 1;
            }
        }
        counts
    }

    #[test]
    fn pack_decode_roundtrip() {
        let code = pack(b"ATTCG").unwrap();
        assert_eq!(decode(code, 5), "ATTCG");
        assert!(pack(b"ATTNG").is_none());
    }

    #[test]
    fn rc_code_matches_string_revcomp() {
        let code = pack(b"ATTCG").unwrap();
        assert_eq!(decode(rc_code(code, 5), 5), "CGAAT");
    }

    #[test]
    fn canonical_code_agrees_with_string_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let k = rng.gen_range(3..=11);
            let seq: Vec<u8> = (0..k).map(|_| BASES[rng.gen_range(0..4)]).collect();
            let (canon_str, strand) = seqio::canonical(&seq).unwrap();
            let (canon, rc) = canonical_code(pack(&seq).unwrap(), k);
            assert_eq!(decode(canon, k).as_bytes(), canon_str.as_slice());
            assert_eq!(rc, strand == seqio::Strand::Reverse);
        }
    }

    #[test]
    fn windows_skip_ambiguous_bases() {
        let hits: Vec<usize> = canonical_windows(b"ACGNACGT", 3).map(|(p, _, _)| p).collect();
        assert_eq!(hits, vec![4, 5]);
        assert_eq!(canonical_windows(b"AC", 3).count(), 0);
    }

    #[test]
    fn bloom_never_forgets() {
        let mut bloom = BloomFilter::new(256, 2);
        let keys: Vec<u64> = (0..50).map(|i| i * 2654435761).collect();
        for &k in &keys {
            bloom.insert(k);
        }
        assert!(keys.iter().all(|&k| bloom.contains(k)));
        assert_eq!(bloom.inserted(), 50);
    }

    #[test]
    fn count_canonical_pairs() {
        // ACG and CGT canonicalize to the same key
        let table = count_kmers(&reads_from(&["ACGT"]), 3, 1 << 12).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.get(pack(b"ACG").unwrap()).unwrap().count, 2);

        let table = count_kmers(&reads_from(&["AAAA"]), 3, 1 << 12).unwrap();
        assert_eq!(table.get(pack(b"AAA").unwrap()).unwrap().count, 2);
    }

    #[test]
    fn count_rejects_bad_parameters() {
        assert_eq!(
            count_kmers(&[], 2, 1024).unwrap_err(),
            KmerError::InvalidK(2)
        );
        assert_eq!(
            count_kmers(&[], 32, 1024).unwrap_err(),
            KmerError::InvalidK(32)
        );
        assert_eq!(count_kmers(&[], 17, 0).unwrap_err(), KmerError::EmptyBloom);
    }

    #[test]
    fn counts_match_exact_oracle_for_repeated_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..20 {
            let k = 5;
            let n = rng.gen_range(2..10);
            let mut seqs = Vec::new();
            for _ in 0..n {
                let len = rng.gen_range(k..60);
                let s: String = (0..len).map(|_| BASES[rng.gen_range(0..4)] as char).collect();
                seqs.push(s);
            }
            // duplicate one read so repeated keys exist
            let dup = seqs[0].clone();
            seqs.push(dup);
            let owned: Vec<&str> = seqs.iter().map(|s| s.as_str()).collect();
            let reads = reads_from(&owned);
            let table = count_kmers(&reads, k, 1 << 14).unwrap();
            let oracle = exact_counts(&reads, k);
            for (kmer, &count) in &oracle {
                if count >= 2 {
                    let entry = table.get(pack(kmer.as_bytes()).unwrap());
                    assert_eq!(
                        entry.map(|e| e.count),
                        Some(count),
                        "trial {trial}: key {kmer}"
                    );
                }
            }
            // anything in the table must carry its exact count
            for (code, entry) in table.iter_sorted() {
                assert_eq!(oracle[&decode(code, k)], entry.count);
            }
        }
    }

    #[test]
    fn selection_filters_and_assigns_columns() {
        let reads = reads_from(&["ACGACGACG", "TTATTA"]);
        let table = count_kmers(&reads, 3, 1 << 12).unwrap();
        let selected = select_reliable(&table, 2, 4);
        assert!(selected
            .iter_sorted()
            .iter()
            .all(|(_, e)| (2..=4).contains(&e.count)));
        // columns are a bijection onto 0..m-1 in ascending key order
        let cols: Vec<u32> = selected
            .iter_sorted()
            .iter()
            .map(|(_, e)| e.col.unwrap())
            .collect();
        assert_eq!(cols, (0..selected.num_columns() as u32).collect::<Vec<_>>());

        let empty = select_reliable(&count_kmers(&[], 3, 1024).unwrap(), 2, 4);
        assert!(empty.is_empty());
        assert_eq!(empty.num_columns(), 0);
    }

    #[test]
    fn counting_is_deterministic() {
        let reads = reads_from(&["ACGTACGTAAGG", "GGTTACGTACGT"]);
        let a = count_kmers(&reads, 5, 4096).unwrap();
        let b = count_kmers(&reads, 5, 4096).unwrap();
        assert_eq!(a.iter_sorted(), b.iter_sorted());
    }

    #[test]
    fn no_retained_singletons_after_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let len = rng.gen_range(20..80);
            let s: String = (0..len).map(|_| BASES[rng.gen_range(0..4)] as char).collect();
            let reads = reads_from(&[s.as_str()]);
            // tiny bloom forces false positives
            let table = count_kmers(&reads, 4, 64).unwrap();
            let selected = select_reliable(&table, 2, u32::MAX);
            let oracle = exact_counts(&reads, 4);
            for (code, entry) in selected.iter_sorted() {
                assert!(entry.count >= 2);
                assert_eq!(oracle[&decode(code, 4)], entry.count);
            }
        }
    }
}
