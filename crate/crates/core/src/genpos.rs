//! t-general and t-relative general position, with certificates.
//!
//! `M, N` (both `k` rows) are in t-relative general position when every set
//! of `t` columns of `[M | N]` has a `t×t` minor that is a unit of the local
//! ring, i.e. has nonzero constant term. The constant term of a minor is the
//! same minor of the matrix evaluated at the origin, so the search runs over
//! rationals; [`GenPosCertificate::verify`] re-checks every claim with the
//! polynomial minors.

use itertools::Itertools;
use num::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::linalg::det_dense;
use crate::matrix::PolyMatrix;
use crate::poisson::{log_matrix, PoissonStructure};
use crate::ring::Rational;

/// A column set of `[M | N]` together with rows giving a unit minor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitWitness {
    pub columns: IndexSet,
    pub rows: IndexSet,
    pub minor_at_origin: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenPosCertificate {
    pub verdict: bool,
    pub t: usize,
    /// Column sets with no unit minor, in lexicographic order.
    pub failures: Vec<IndexSet>,
    /// One witness per column set that passes, in lexicographic order.
    pub witnesses: Vec<UnitWitness>,
}

fn block(m: &PolyMatrix, n: &PolyMatrix) -> Result<PolyMatrix> {
    m.spec().ensure_same(&n.spec())?;
    if m.rows() != n.rows() {
        return Err(Error::Shape(format!("row counts differ: {} vs {}", m.rows(), n.rows())));
    }
    let mc = m.cols();
    Ok(PolyMatrix::from_fn(m.spec(), m.rows(), mc + n.cols(), |i, j| {
        if j < mc {
            m.get(i, j).clone()
        } else {
            n.get(i, j - mc).clone()
        }
    }))
}

fn sub_det(values: &[Vec<Rational>], rows: &[usize], cols: &[usize]) -> Rational {
    let sub: Vec<Vec<Rational>> = rows.iter().map(|&r| cols.iter().map(|&c| values[r][c].clone()).collect()).collect();
    det_dense(&sub)
}

/// First row set (lexicographic) whose minor on `cols` is a unit, together
/// with the minor's value at the origin.
fn unit_rows(values: &[Vec<Rational>], cols: &[usize]) -> Option<(Vec<usize>, Rational)> {
    (0..values.len()).combinations(cols.len()).find_map(|rows| {
        let d = sub_det(values, &rows, cols);
        (!d.is_zero()).then_some((rows, d))
    })
}

pub fn is_relative_t_general(m: &PolyMatrix, n: &PolyMatrix, t: usize) -> Result<GenPosCertificate> {
    let full = block(m, n)?;
    let k = full.rows();
    if t == 0 || t > k {
        return Err(Error::TOutOfRange { t, max: k });
    }
    let values = full.at_origin()?;
    let mut failures = Vec::new();
    let mut witnesses = Vec::new();
    for cols in (0..full.cols()).combinations(t) {
        match unit_rows(&values, &cols) {
            Some((rows, d)) => witnesses.push(UnitWitness {
                columns: IndexSet::from_indices(cols),
                rows: IndexSet::from_indices(rows),
                minor_at_origin: d,
            }),
            None => failures.push(IndexSet::from_indices(cols)),
        }
    }
    Ok(GenPosCertificate { verdict: failures.is_empty(), t, failures, witnesses })
}

pub fn is_standard_t_general(m: &PolyMatrix, t: usize) -> Result<GenPosCertificate> {
    is_relative_t_general(m, &PolyMatrix::identity(m.spec(), m.rows()), t)
}

/// Standard t-general position of the log matrix `A`.
pub fn poisson_t_general(p: &PoissonStructure, t: usize) -> Result<GenPosCertificate> {
    is_standard_t_general(log_matrix(p)?.matrix(), t)
}

/// Whether the given columns of `[M | N]` admit a unit minor.
pub fn columns_have_unit_minor(m: &PolyMatrix, n: &PolyMatrix, columns: IndexSet) -> Result<bool> {
    let full = block(m, n)?;
    Ok(unit_rows(&full.at_origin()?, &columns.to_vec()).is_some())
}

impl GenPosCertificate {
    pub fn first_failure(&self) -> Option<IndexSet> {
        self.failures.first().copied()
    }

    /// Recomputes every witness and failure with polynomial minors.
    pub fn verify(&self, m: &PolyMatrix, n: &PolyMatrix) -> Result<bool> {
        let full = block(m, n)?;
        let k = full.rows();
        let unit = |rows: &[usize], cols: &[usize]| -> Result<bool> { full.minor(rows, cols).is_unit_local() };
        let total = (0..full.cols()).combinations(self.t).count();
        if self.failures.len() + self.witnesses.len() != total || self.verdict != self.failures.is_empty() {
            return Ok(false);
        }
        for w in &self.witnesses {
            let (rows, cols) = (w.rows.to_vec(), w.columns.to_vec());
            if rows.len() != self.t || cols.len() != self.t || !unit(&rows, &cols)? {
                return Ok(false);
            }
            if full.minor(&rows, &cols).constant_term() != w.minor_at_origin {
                return Ok(false);
            }
        }
        for f in &self.failures {
            let cols = f.to_vec();
            for rows in (0..k).combinations(self.t) {
                if unit(&rows, &cols)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Standard-position variant of [`verify`](Self::verify).
    pub fn verify_standard(&self, m: &PolyMatrix) -> Result<bool> {
        self.verify(m, &PolyMatrix::identity(m.spec(), m.rows()))
    }

    /// `{verdict, t, failures, witnesses}` with 1-based column and row
    /// indices; columns past the first block belong to `N`.
    pub fn to_json(&self) -> Value {
        let one_based = |s: &IndexSet| s.iter().map(|i| i + 1).collect::<Vec<_>>();
        json!({
            "verdict": self.verdict,
            "t": self.t,
            "failures": self.failures.iter().map(|f| json!({"columns": one_based(f)})).collect::<Vec<_>>(),
            "witnesses": self.witnesses.iter().map(|w| json!({
                "columns": one_based(&w.columns),
                "rows": one_based(&w.rows),
                "minor_at_origin": w.minor_at_origin.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}
