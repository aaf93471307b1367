//! The reads-by-kmers data matrix A and the candidate overlap matrix
//! C = A*At under a position-tracking semiring.

use std::collections::BTreeMap;

use crate::kmers::{canonical_windows, KmerTable};
use crate::seqio::Read;
use crate::spmat::{spgemm, Semiring, SparseMatrix};

/// One occurrence of a reliable k-mer in a read: window offset plus whether
/// the window matched the reverse complement of the canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmerOccurrence {
    pub pos: u32,
    pub rc: bool,
}

/// Seed pair recorded for one shared k-mer of a read pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed {
    pub pos_a: u32,
    pub pos_b: u32,
    pub rc_a: bool,
    pub rc_b: bool,
}

/// Number of seed positions kept per read pair.
pub const MAX_SEEDS: usize = 2;

/// Shared-k-mer count plus the first seeds in ascending shared-column
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapValue {
    pub count: u32,
    pub seeds: Vec<Seed>,
}

/// Multiply pairs A[i][kappa] with At[kappa][j] into a single-seed overlap
/// value; add concatenates counts and keeps the first [`MAX_SEEDS`] seeds.
pub struct OverlapSemiring;

impl Semiring for OverlapSemiring {
    type Left = KmerOccurrence;
    type Right = KmerOccurrence;
    type Output = OverlapValue;

    fn multiply(&self, a: &KmerOccurrence, b: &KmerOccurrence) -> Option<OverlapValue> {
        Some(OverlapValue {
            count: 1,
            seeds: vec![Seed {
                pos_a: a.pos,
                pos_b: b.pos,
                rc_a: a.rc,
                rc_b: b.rc,
            }],
        })
    }

    fn add(&self, acc: &mut OverlapValue, x: OverlapValue) {
        acc.count += x.count;
        for seed in x.seeds {
            if acc.seeds.len() < MAX_SEEDS {
                acc.seeds.push(seed);
            }
        }
    }
}

/// Builds the data matrix: entry (i, col(kappa)) exists iff canonical
/// k-mer kappa occurs in read i; repeated in-read occurrences keep the
/// first window only.
pub fn build_matrix_a(reads: &[Read], table: &KmerTable) -> SparseMatrix<KmerOccurrence> {
    let k = table.k();
    let mut entries = Vec::new();
    for read in reads {
        let mut firsts: BTreeMap<u32, KmerOccurrence> = BTreeMap::new();
        for (pos, code, rc) in canonical_windows(&read.seq, k) {
            if let Some(col) = table.get(code).and_then(|e| e.col) {
                firsts.entry(col).or_insert(KmerOccurrence {
                    pos: pos as u32,
                    rc,
                });
            }
        }
        entries.extend(
            firsts
                .into_iter()
                .map(|(col, occ)| (read.id, col as usize, occ)),
        );
    }
    SparseMatrix::from_entries(reads.len(), table.num_columns(), entries)
        .expect("read ids and column indices are dense by construction")
}

/// C = A*At under the overlap semiring, with the diagonal removed. Seeds
/// accumulate in ascending shared-column order, so the result does not
/// depend on any execution schedule.
pub fn compute_candidate_overlaps(
    a: &SparseMatrix<KmerOccurrence>,
) -> SparseMatrix<OverlapValue> {
    let at = a.transpose();
    let c = spgemm(a, &at, &OverlapSemiring).expect("A and At conform by construction");
    strip_diagonal(c)
}

/// Drops self-overlap entries (i, i).
pub fn strip_diagonal(c: SparseMatrix<OverlapValue>) -> SparseMatrix<OverlapValue> {
    let nrows = c.nrows();
    let ncols = c.ncols();
    let entries = c
        .into_entries()
        .into_iter()
        .filter(|(i, j, _)| i != j)
        .collect();
    SparseMatrix::from_entries(nrows, ncols, entries).expect("filtering preserves order")
}
