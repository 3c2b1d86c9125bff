//! Dense matrices over [`LaurentPoly`]: minors, compound matrices, inverses.

use std::collections::BTreeMap;
use std::fmt;

use num::One;

use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::linalg;
use crate::ring::{LaurentPoly, Monomial, Rational, VarSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    spec: VarSpec,
    rows: usize,
    cols: usize,
    entries: Vec<LaurentPoly>,
}

impl PolyMatrix {
    pub fn zero(spec: VarSpec, rows: usize, cols: usize) -> Self {
        PolyMatrix { spec, rows, cols, entries: vec![LaurentPoly::zero(spec); rows * cols] }
    }

    pub fn identity(spec: VarSpec, n: usize) -> Self {
        let mut m = Self::zero(spec, n, n);
        for i in 0..n {
            m.set(i, i, LaurentPoly::one(spec));
        }
        m
    }

    pub fn from_fn(spec: VarSpec, rows: usize, cols: usize, f: impl Fn(usize, usize) -> LaurentPoly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        PolyMatrix { spec, rows, cols, entries }
    }

    /// Constant matrix from rational rows.
    pub fn from_rationals(spec: VarSpec, rows: &[Vec<Rational>]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self::from_fn(spec, nr, nc, |i, j| LaurentPoly::constant(spec, rows[i][j].clone())))
    }

    pub fn spec(&self) -> VarSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: LaurentPoly) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(LaurentPoly::is_constant)
    }

    pub fn constant_values(&self) -> Option<Vec<Vec<Rational>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).as_constant()).collect())
            .collect()
    }

    /// Entrywise value at the origin.
    pub fn at_origin(&self) -> Result<Vec<Vec<Rational>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).evaluate_at_origin()).collect())
            .collect()
    }

    pub fn is_skew(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.get(i, i).is_zero()
                    && (i + 1..self.cols).all(|j| (self.get(i, j) + self.get(j, i)).is_zero())
            })
    }

    pub fn transpose(&self) -> PolyMatrix {
        Self::from_fn(self.spec, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        self.spec.ensure_same(&other.spec)?;
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.spec, self.rows, other.cols, |i, j| {
            let mut acc = LaurentPoly::zero(self.spec);
            for k in 0..self.cols {
                acc = &acc + &(self.get(i, k) * other.get(k, j));
            }
            acc
        }))
    }

    /// Determinant of the submatrix on `rows` x `cols` (equal lengths), by
    /// dynamic programming over used-column subsets.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> LaurentPoly {
        let k = rows.len();
        assert_eq!(k, cols.len(), "minor needs a square selection");
        if k == 0 {
            return LaurentPoly::one(self.spec);
        }
        // dp[mask] = signed sum over injections of the first popcount(mask)
        // rows onto the column positions in mask
        let mut dp: Vec<Option<LaurentPoly>> = vec![None; 1 << k];
        dp[0] = Some(LaurentPoly::one(self.spec));
        for mask in 0u32..(1 << k) {
            let Some(acc) = dp[mask as usize].take() else { continue };
            if acc.is_zero() {
                continue;
            }
            let r = mask.count_ones() as usize;
            if r == k {
                dp[mask as usize] = Some(acc);
                continue;
            }
            for c in 0..k {
                if mask & (1 << c) != 0 {
                    continue;
                }
                let entry = self.get(rows[r], cols[c]);
                if entry.is_zero() {
                    continue;
                }
                let inversions = (mask >> (c + 1)).count_ones();
                let mut term = &acc * entry;
                if inversions % 2 == 1 {
                    term = -term;
                }
                let slot = &mut dp[(mask | (1 << c)) as usize];
                *slot = Some(match slot.take() {
                    Some(prev) => &prev + &term,
                    None => term,
                });
            }
        }
        dp[(1usize << k) - 1].take().unwrap_or_else(|| LaurentPoly::zero(self.spec))
    }

    pub fn det(&self) -> Result<LaurentPoly> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        if let Some(c) = self.constant_values() {
            return Ok(LaurentPoly::constant(self.spec, linalg::det_dense(&c)));
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.minor(&idx, &idx))
    }

    /// Nonzero entries of the `k`-th compound matrix, keyed by
    /// `(row set, column set)`.
    pub fn compound(&self, k: usize) -> BTreeMap<(IndexSet, IndexSet), LaurentPoly> {
        let mut out = BTreeMap::new();
        for r in IndexSet::subsets(self.rows, k) {
            let rv = r.to_vec();
            for c in IndexSet::subsets(self.cols, k) {
                let m = self.minor(&rv, &c.to_vec());
                if !m.is_zero() {
                    out.insert((r, c), m);
                }
            }
        }
        out
    }

    /// Inverse over the localized ring. Exists exactly when the determinant is
    /// a unit there, i.e. a single term `c * x^e` with `e` supported on the
    /// divisor variables.
    pub fn inverse(&self) -> Result<PolyMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        if let Some(c) = self.constant_values() {
            let inv = linalg::inverse_dense(&c)
                .ok_or_else(|| Error::NotInvertible("constant matrix is singular".into()))?;
            return Self::from_rationals(self.spec, &inv);
        }
        let det = self.det()?;
        if det.is_zero() {
            return Err(Error::NotInvertible("determinant vanishes".into()));
        }
        let Some((mono, coeff)) = det.as_single_term() else {
            return Err(Error::NotInvertible(format!(
                "determinant {det} is not a monomial unit; its inverse is not a Laurent polynomial"
            )));
        };
        if let Some(i) = (0..self.spec.total_vars())
            .find(|&i| !self.spec.is_divisor(i) && mono.exponent(i) != 0)
        {
            return Err(Error::NotInvertible(format!(
                "determinant {det} vanishes along non-divisor coordinate x{}",
                i + 1
            )));
        }
        let inv_mono = Monomial::one(self.spec.total_vars()).div(mono);
        let inv_coeff = Rational::one() / coeff.clone();
        let all: Vec<usize> = (0..n).collect();
        let mut out = Self::zero(self.spec, n, n);
        for i in 0..n {
            for j in 0..n {
                // adj[j][i] = (-1)^(i+j) * minor(without row i, col j)
                let rows: Vec<usize> = all.iter().copied().filter(|&r| r != i).collect();
                let cols: Vec<usize> = all.iter().copied().filter(|&c| c != j).collect();
                let mut cof = self.minor(&rows, &cols).scale(&inv_coeff).mul_monomial(&inv_mono)?;
                if (i + j) % 2 == 1 {
                    cof = -cof;
                }
                out.set(j, i, cof);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::int;

    fn spec() -> VarSpec {
        VarSpec::new(4, 2).unwrap()
    }

    fn p(s: &str) -> LaurentPoly {
        LaurentPoly::parse(spec(), s).unwrap()
    }

    #[test]
    fn minors_agree_with_dense_det() {
        let rows = vec![
            vec![int(2), int(1), int(0)],
            vec![int(1), int(3), int(1)],
            vec![int(0), int(1), int(4)],
        ];
        let m = PolyMatrix::from_rationals(spec(), &rows).unwrap();
        let idx = [0, 1, 2];
        assert_eq!(m.minor(&idx, &idx).as_constant().unwrap(), linalg::det_dense(&rows));
        assert_eq!(m.minor(&[0, 2], &[1, 2]).as_constant().unwrap(), int(4));
    }

    #[test]
    fn polynomial_inverse() {
        // [[x1, 1], [0, x2^-1 ... ]] is not allowed; use divisor variables only
        let s = spec();
        let m = PolyMatrix::from_fn(s, 2, 2, |i, j| match (i, j) {
            (0, 0) => p("x1"),
            (0, 1) => p("x3"),
            (1, 1) => p("x2"),
            _ => LaurentPoly::zero(s),
        });
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), PolyMatrix::identity(s, 2));
        let bad = PolyMatrix::from_fn(s, 2, 2, |i, j| if i == j { p("1 + x1") } else { LaurentPoly::zero(s) });
        assert!(matches!(bad.inverse(), Err(Error::NotInvertible(_))));
        let bad = PolyMatrix::from_fn(s, 2, 2, |i, j| if i == j { p("x3") } else { LaurentPoly::zero(s) });
        assert!(matches!(bad.inverse(), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn compound_of_inverse_is_inverse_of_compound() {
        let rows = vec![
            vec![int(0), int(1), int(2), int(3)],
            vec![int(-1), int(0), int(4), int(5)],
            vec![int(-2), int(-4), int(0), int(6)],
            vec![int(-3), int(-5), int(-6), int(0)],
        ];
        let a = PolyMatrix::from_rationals(spec(), &rows).unwrap();
        let b = a.inverse().unwrap();
        let ca = a.compound(2);
        let cb = b.compound(2);
        let sets = IndexSet::subsets(4, 2);
        for r in &sets {
            for c in &sets {
                let mut acc = LaurentPoly::zero(spec());
                for k in &sets {
                    if let (Some(x), Some(y)) = (ca.get(&(*r, *k)), cb.get(&(*k, *c))) {
                        acc = &acc + &(x * y);
                    }
                }
                let expected = if r == c { LaurentPoly::one(spec()) } else { LaurentPoly::zero(spec()) };
                assert_eq!(acc, expected);
            }
        }
    }
}
