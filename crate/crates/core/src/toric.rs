//! Toric Poisson structures `Π_A = Σ_{i<j} a_ij x_i x_j ∂_i∧∂_j` on the
//! standard chart, their certification, and the dimension bookkeeping of
//! the open torus.

use num::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{Frame, MultiVector};
use crate::genpos::{poisson_t_general, GenPosCertificate};
use crate::index_set::IndexSet;
use crate::matrix::PolyMatrix;
use crate::poisson::{degeneracy_divisor, jacobi_holds, log_matrix, pfaffian, PoissonStructure, SkewMatrix};
use crate::ring::{LaurentPoly, Rational, VarSpec};

/// Constant skew `A` of size `2n`; every coordinate is a divisor variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricStructure {
    n: usize,
    a: SkewMatrix,
}

impl ToricStructure {
    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &SkewMatrix {
        &self.a
    }

    pub fn spec(&self) -> VarSpec {
        self.a.spec()
    }

    pub fn values(&self) -> Vec<Vec<Rational>> {
        self.a.constant_values().expect("checked constant at construction")
    }
}

/// `Π_A` for a constant skew matrix of even size, over `2n` divisor variables.
pub fn make_toric(a: &SkewMatrix) -> Result<(ToricStructure, PoissonStructure)> {
    let values = a.constant_values()?;
    make_toric_from_rationals(&values)
}

pub fn make_toric_from_rationals(values: &[Vec<Rational>]) -> Result<(ToricStructure, PoissonStructure)> {
    let d = values.len();
    if d == 0 || d % 2 == 1 || values.iter().any(|r| r.len() != d) {
        return Err(Error::Shape(format!("toric structures need an even square matrix, got {d} rows")));
    }
    let spec = VarSpec::new(d, d)?;
    let a = SkewMatrix::new(PolyMatrix::from_rationals(spec, values)?)?;
    let mut bv = MultiVector::zero(spec, Frame::Coordinate, 2)?;
    for i in 0..d {
        for j in i + 1..d {
            let mut e = vec![0; d];
            e[i] = 1;
            e[j] = 1;
            bv.add_term(IndexSet::from_indices([i, j]), LaurentPoly::monomial(spec, e, values[i][j].clone())?);
        }
    }
    Ok((ToricStructure { n: d / 2, a }, PoissonStructure::new(bv)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralPositionEntry {
    pub t: usize,
    pub verdict: bool,
    /// The certificate was recomputed independently and matched.
    pub certificate_verified: bool,
    /// 1-based columns of `[A | I]` of the first failing set.
    pub first_failure: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToricReport {
    pub half_dim: usize,
    pub pfaffian: String,
    pub nonsingular: bool,
    pub jacobi: bool,
    /// `(1-based variable, multiplicity)`; empty when `Π^n = 0`.
    pub divisor: Vec<(usize, u32)>,
    pub divisor_unit_part: Option<String>,
    pub simple_normal_crossing: bool,
    /// Nonsingular with simple normal crossing degeneracy divisor.
    pub log_symplectic: bool,
    /// Why `log_symplectic` is false, if it is.
    pub log_symplectic_error: Option<String>,
    pub general_position: Vec<GeneralPositionEntry>,
}

impl ToricReport {
    pub fn t_general(&self, t: usize) -> Option<bool> {
        self.general_position.iter().find(|e| e.t == t).map(|e| e.verdict)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Report with the certificates behind each general-position verdict.
pub fn certify_with_certificates(t: &ToricStructure, p: &PoissonStructure) -> Result<(ToricReport, Vec<GenPosCertificate>)> {
    let pf = pfaffian(&t.a)?;
    let nonsingular = !pf.is_zero();
    let jacobi = jacobi_holds(p);
    let (divisor, unit, snc, error) = match degeneracy_divisor(p) {
        Ok(d) => (
            d.components.iter().map(|(i, e)| (i + 1, *e)).collect(),
            Some(d.unit_part.to_string()),
            d.simple_normal_crossing,
            None,
        ),
        Err(e) => (Vec::new(), None, false, Some(e.to_string())),
    };
    let log_symplectic = nonsingular && snc;
    let log_symplectic_error = match (&error, log_symplectic) {
        (_, true) => None,
        (Some(e), false) => Some(e.clone()),
        (None, false) => Some("degeneracy divisor is not simple normal crossing".into()),
    };
    let a = log_matrix(p)?;
    let mut ts = vec![1, 2, 3, 2 * t.n];
    ts.retain(|x| *x <= 2 * t.n);
    ts.dedup();
    let mut entries = Vec::new();
    let mut certs = Vec::new();
    for k in ts {
        let cert = poisson_t_general(p, k)?;
        entries.push(GeneralPositionEntry {
            t: k,
            verdict: cert.verdict,
            certificate_verified: cert.verify_standard(a.matrix())?,
            first_failure: cert.first_failure().map(|f| f.iter().map(|i| i + 1).collect()),
        });
        certs.push(cert);
    }
    let report = ToricReport {
        half_dim: t.n,
        pfaffian: pf.to_string(),
        nonsingular,
        jacobi,
        divisor,
        divisor_unit_part: unit,
        simple_normal_crossing: snc,
        log_symplectic,
        log_symplectic_error,
        general_position: entries,
    };
    Ok((report, certs))
}

pub fn certify(t: &ToricStructure, p: &PoissonStructure) -> Result<ToricReport> {
    certify_with_certificates(t, p).map(|(r, _)| r)
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `dim H^i((ℂ*)^d) = C(d, i)`.
pub fn betti_torus(d: usize, i: usize) -> Result<u64> {
    if i > d {
        return Err(Error::Unsupported(format!("degree {i} outside 0..={d}")));
    }
    Ok(binomial(d as u64, i as u64))
}

/// `h^i(Ω^j(log D))` for a smooth projective toric variety of dimension `d`
/// with its toric boundary: `C(d, j)` for `i = 0` and `0` otherwise. This is
/// the known global answer, tabulated rather than computed from local data.
pub fn log_hodge_numbers(d: usize, i: usize, j: usize) -> Result<u64> {
    if i > d || j > d {
        return Err(Error::Unsupported(format!("(i, j) = ({i}, {j}) outside 0..={d}")));
    }
    Ok(if i == 0 { binomial(d as u64, j as u64) } else { 0 })
}

/// `C(2n, 2)`, the number of bivectors `v_i∧v_j`, for `n ≥ 2`.
pub fn deformation_tangent_dim(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::Unsupported(format!("half-dimension {n} < 2 is outside the deformation statement")));
    }
    let d = 2 * n;
    let pairs = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).count() as u64;
    debug_assert_eq!(pairs, binomial(d as u64, 2));
    Ok(pairs)
}

/// `betti_torus(d, ·)` and `log_hodge_numbers(d, 0, ·)` side by side.
pub fn dimension_table(d: usize) -> Value {
    let betti: Vec<u64> = (0..=d).map(|i| betti_torus(d, i).expect("in range")).collect();
    let hodge: Vec<u64> = (0..=d).map(|j| log_hodge_numbers(d, 0, j).expect("in range")).collect();
    let tangent = if d.is_multiple_of(2) { deformation_tangent_dim(d / 2).ok() } else { None };
    json!({ "dimension": d, "betti_torus": betti, "log_hodge_h0": hodge, "deformation_tangent_dim": tangent })
}
