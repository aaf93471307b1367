//! Sorted coordinate-list sparse matrices with pluggable semirings.
//!
//! Entries are kept sorted by (row, col) with no duplicates and no stored
//! additive identities. All operations are pure and deterministic;
//! accumulation in [`spgemm`] always runs in ascending order of the inner
//! dimension, so even order-sensitive adds produce reproducible output.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpMatError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("duplicate coordinate ({0}, {1})")]
    DuplicateCoordinate(usize, usize),
    #[error("vector length {got}, expected {expected}")]
    VectorLength { got: usize, expected: usize },
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix<V> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, V)>,
}

impl<V> SparseMatrix<V> {
    pub fn new(nrows: usize, ncols: usize) -> SparseMatrix<V> {
        SparseMatrix {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    /// Builds a matrix from unordered entries, sorting by coordinate and
    /// rejecting duplicates and out-of-bounds positions.
    pub fn from_entries(
        nrows: usize,
        ncols: usize,
        mut entries: Vec<(usize, usize, V)>,
    ) -> Result<SparseMatrix<V>, SpMatError> {
        for &(row, col, _) in &entries {
            if row >= nrows || col >= ncols {
                return Err(SpMatError::OutOfBounds {
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(SpMatError::DuplicateCoordinate(pair[0].0, pair[0].1));
            }
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            entries,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, V)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, usize, V)> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&V> {
        self.entries
            .binary_search_by(|probe| (probe.0, probe.1).cmp(&(row, col)))
            .ok()
            .map(|idx| &self.entries[idx].2)
    }

    /// Slice of the stored entries of one row.
    pub fn row(&self, row: usize) -> &[(usize, usize, V)] {
        let start = self.entries.partition_point(|e| e.0 < row);
        let end = self.entries.partition_point(|e| e.0 <= row);
        &self.entries[start..end]
    }

    fn row_ptrs(&self) -> Vec<usize> {
        let mut ptrs = vec![0usize; self.nrows + 1];
        for &(row, _, _) in &self.entries {
            ptrs[row + 1] += 1;
        }
        for i in 0..self.nrows {
            ptrs[i + 1] += ptrs[i];
        }
        ptrs
    }

    /// Checks the structural invariants: strictly ascending (row, col)
    /// order and in-bounds coordinates.
    pub fn validate(&self) -> Result<(), SpMatError> {
        for &(row, col, _) in &self.entries {
            if row >= self.nrows || col >= self.ncols {
                return Err(SpMatError::OutOfBounds {
                    row,
                    col,
                    nrows: self.nrows,
                    ncols: self.ncols,
                });
            }
        }
        for pair in self.entries.windows(2) {
            if (pair[0].0, pair[0].1) >= (pair[1].0, pair[1].1) {
                return Err(SpMatError::InvalidStructure(format!(
                    "entries ({}, {}) and ({}, {}) out of order",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        Ok(())
    }
}

impl<V: Clone> SparseMatrix<V> {
    /// (i, j, v) -> (j, i, v) with dimensions swapped.
    pub fn transpose(&self) -> SparseMatrix<V> {
        let mut entries: Vec<(usize, usize, V)> = self
            .entries
            .iter()
            .map(|(row, col, value)| (*col, *row, value.clone()))
            .collect();
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            entries,
        }
    }

    /// Folds `combine` over the stored values of each row; empty rows give
    /// `default`.
    pub fn reduce_rows<T: Clone>(&self, default: T, combine: impl Fn(T, &V) -> T) -> Vec<T> {
        let mut out = vec![default; self.nrows];
        for (row, _, value) in &self.entries {
            out[*row] = combine(out[*row].clone(), value);
        }
        out
    }

    /// Rewrites each stored entry of row `i` as `f(value, vec[i])`; rows
    /// whose vector cell equals `default` contribute no entries.
    pub fn dim_apply_rows<T: PartialEq, W>(
        &self,
        vec: &[T],
        default: &T,
        f: impl Fn(&V, &T) -> W,
    ) -> Result<SparseMatrix<W>, SpMatError> {
        if vec.len() != self.nrows {
            return Err(SpMatError::VectorLength {
                got: vec.len(),
                expected: self.nrows,
            });
        }
        let entries = self
            .entries
            .iter()
            .filter(|(row, _, _)| vec[*row] != *default)
            .map(|(row, col, value)| (*row, *col, f(value, &vec[*row])))
            .collect();
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries,
        })
    }

    /// Applies `f` at coordinates stored in both matrices; `None` drops the
    /// coordinate from the output.
    pub fn ewise_intersect<U, W>(
        &self,
        other: &SparseMatrix<U>,
        f: impl Fn(&V, &U) -> Option<W>,
    ) -> Result<SparseMatrix<W>, SpMatError> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(SpMatError::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut entries = Vec::new();
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.entries.len() && j < other.entries.len() {
            let a = &self.entries[i];
            let b = &other.entries[j];
            match (a.0, a.1).cmp(&(b.0, b.1)) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if let Some(value) = f(&a.2, &b.2) {
                        entries.push((a.0, a.1, value));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries,
        })
    }

    /// Restricts the matrix to coordinates not set true in `mask`
    /// (set difference on nonzero patterns).
    pub fn prune_excluding(
        &self,
        mask: &SparseMatrix<bool>,
    ) -> Result<SparseMatrix<V>, SpMatError> {
        if self.nrows != mask.nrows || self.ncols != mask.ncols {
            return Err(SpMatError::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, mask.nrows, mask.ncols
            )));
        }
        let entries = self
            .entries
            .iter()
            .filter(|(row, col, _)| mask.get(*row, *col) != Some(&true))
            .cloned()
            .collect();
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries,
        })
    }
}

/// Applies `f` to every cell whose value differs from `default`.
pub fn apply_vector<T: Clone + PartialEq>(
    vec: &[T],
    default: &T,
    f: impl Fn(&T) -> T,
) -> Vec<T> {
    vec.iter()
        .map(|v| if v == default { v.clone() } else { f(v) })
        .collect()
}

/// A semiring over possibly distinct input value types.
///
/// `multiply` may return `None` to annihilate a product (the pair
/// contributes nothing to the accumulation); `add` folds a product into an
/// accumulator; outputs for which `is_identity` holds are not stored.
pub trait Semiring {
    type Left;
    type Right;
    type Output;

    fn multiply(&self, a: &Self::Left, b: &Self::Right) -> Option<Self::Output>;
    fn add(&self, acc: &mut Self::Output, x: Self::Output);
    fn is_identity(&self, _value: &Self::Output) -> bool {
        false
    }
}

/// C[i][j] = sum over k of multiply(A[i][k], B[k][j]), with annihilated
/// products skipped and identity-valued results unstored. Products for a
/// fixed output coordinate accumulate in ascending k.
pub fn spgemm<S: Semiring>(
    a: &SparseMatrix<S::Left>,
    b: &SparseMatrix<S::Right>,
    sr: &S,
) -> Result<SparseMatrix<S::Output>, SpMatError> {
    if a.ncols != b.nrows {
        return Err(SpMatError::DimMismatch(format!(
            "{}x{} * {}x{}",
            a.nrows, a.ncols, b.nrows, b.ncols
        )));
    }
    let a_ptrs = a.row_ptrs();
    let b_ptrs = b.row_ptrs();
    let mut entries = Vec::new();
    for i in 0..a.nrows {
        let mut acc: BTreeMap<usize, S::Output> = BTreeMap::new();
        for (_, k, av) in &a.entries[a_ptrs[i]..a_ptrs[i + 1]] {
            for (_, j, bv) in &b.entries[b_ptrs[*k]..b_ptrs[*k + 1]] {
                if let Some(product) = sr.multiply(av, bv) {
                    match acc.entry(*j) {
                        Entry::Occupied(mut slot) => sr.add(slot.get_mut(), product),
                        Entry::Vacant(slot) => {
                            slot.insert(product);
                        }
                    }
                }
            }
        }
        entries.extend(
            acc.into_iter()
                .filter(|(_, v)| !sr.is_identity(v))
                .map(|(j, v)| (i, j, v)),
        );
    }
    Ok(SparseMatrix {
        nrows: a.nrows,
        ncols: b.ncols,
        entries,
    })
}

/// Ordinary (+, *) arithmetic over i64.
pub struct PlusTimes;

impl Semiring for PlusTimes {
    type Left = i64;
    type Right = i64;
    type Output = i64;

    fn multiply(&self, a: &i64, b: &i64) -> Option<i64> {
        Some(a * b)
    }

    fn add(&self, acc: &mut i64, x: i64) {
        *acc += x;
    }

    fn is_identity(&self, value: &i64) -> bool {
        *value == 0
    }
}

/// Additive identity of [`MinPlus`].
pub const MIN_PLUS_INF: u64 = u64::MAX;

/// (min, +) over u64 lengths with a saturating infinity.
pub struct MinPlus;

impl Semiring for MinPlus {
    type Left = u64;
    type Right = u64;
    type Output = u64;

    fn multiply(&self, a: &u64, b: &u64) -> Option<u64> {
        Some(a.saturating_add(*b))
    }

    fn add(&self, acc: &mut u64, x: u64) {
        *acc = (*acc).min(x);
    }

    fn is_identity(&self, value: &u64) -> bool {
        *value == MIN_PLUS_INF
    }
}
