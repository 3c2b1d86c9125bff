//! Exact linear algebra over the rationals.
//!
//! Differentials are stored in image-as-row form: row `i` of a
//! [`SparseMatrix`] is the image of source basis vector `i`, expressed in the
//! target basis. Ranks are computed by fraction-exact Gaussian elimination.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::ring::Rational;

pub type SparseVec = BTreeMap<usize, Rational>;

fn axpy(target: &mut SparseVec, scale: &Rational, v: &SparseVec) {
    for (k, x) in v {
        let entry = target.entry(*k).or_insert_with(Rational::zero);
        *entry += scale * x;
        if entry.is_zero() {
            target.remove(k);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { ncols, rows: vec![SparseVec::new(); nrows] }
    }

    pub fn from_rows(ncols: usize, rows: Vec<SparseVec>) -> Self {
        debug_assert!(rows.iter().all(|r| r.keys().all(|&k| k < ncols)));
        SparseMatrix { ncols, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &SparseVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.rows[i].get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![SparseVec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, x) in r {
                rows[*j].insert(i, x.clone());
            }
        }
        SparseMatrix { ncols: self.rows.len(), rows }
    }

    /// Apply `self` then `next` (image-as-row convention).
    pub fn then(&self, next: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, next.nrows(), "composition shape mismatch");
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = SparseVec::new();
                for (k, x) in r {
                    axpy(&mut out, x, &next.rows[*k]);
                }
                out
            })
            .collect();
        SparseMatrix { ncols: next.ncols, rows }
    }

    /// Rank by elimination in row order.
    pub fn rank(&self) -> usize {
        rank_of_rows(self.rows.iter().cloned())
    }

    /// Rank by elimination on the transpose; an independent elimination order.
    pub fn rank_by_columns(&self) -> usize {
        self.transpose().rank()
    }
}

fn rank_of_rows<I: Iterator<Item = SparseVec>>(rows: I) -> usize {
    let mut pivots: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for mut v in rows {
        while let Some((&lead, lead_val)) = v.iter().next() {
            match pivots.get(&lead) {
                Some(p) => {
                    let s = -lead_val.clone();
                    axpy(&mut v, &s, p);
                }
                None => {
                    let inv = Rational::one() / lead_val.clone();
                    for x in v.values_mut() {
                        *x *= &inv;
                    }
                    pivots.insert(lead, v);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Rank of a dense matrix.
pub fn rank_dense(m: &[Vec<Rational>]) -> usize {
    rank_of_rows(m.iter().map(|r| {
        r.iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| (j, x.clone()))
            .collect()
    }))
}

/// Determinant by Gaussian elimination with exact pivoting.
pub fn det_dense(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Inverse by Gauss-Jordan; `None` when singular.
pub fn inverse_dense(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        let inv = Rational::one() / a[col][col].clone();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `sum_j x_j * columns[j] = target` where every vector is sparse over
/// a shared index space. Returns a solution if one exists, together with a
/// flag telling whether it is unique.
pub fn solve_in_span(columns: &[SparseVec], target: &SparseVec) -> Option<(Vec<Rational>, bool)> {
    let mut keys: Vec<usize> = columns.iter().flat_map(|c| c.keys().copied()).collect();
    keys.extend(target.keys().copied());
    keys.sort_unstable();
    keys.dedup();
    let index: BTreeMap<usize, usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let ncols = columns.len();
    // augmented system: rows = coordinates, columns = unknowns + rhs
    let mut a: Vec<Vec<Rational>> = vec![vec![Rational::zero(); ncols + 1]; keys.len()];
    for (j, c) in columns.iter().enumerate() {
        for (k, x) in c {
            a[index[k]][j] = x.clone();
        }
    }
    for (k, x) in target {
        a[index[k]][ncols] = x.clone();
    }
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(p, row);
        let inv = Rational::one() / a[row][col].clone();
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..a.len() {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..=ncols {
                let sub = &f * &a[row][c];
                a[r][c] -= sub;
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    if a[row..].iter().any(|r| !r[ncols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (r, &c) in pivot_cols.iter().enumerate() {
        x[c] = a[r][ncols].clone();
    }
    Some((x, pivot_cols.len() == ncols))
}
