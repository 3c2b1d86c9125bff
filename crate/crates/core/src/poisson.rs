//! Poisson bivectors, the Schouten bracket, Pfaffians, the degeneracy divisor
//! and the log-basis matrices `A` (of `π♯`) and `B = A⁻¹`.
//!
//! Multivectors are treated as polynomials in odd symbols `ξ_i = ∂_i`. For
//! `P` of degree `p` and `Q` of degree `q` the bracket is
//!
//! ```text
//! [P,Q] = (−1)^{p−1} Σ_i ( (P ∂⃖ξ_i)(∂_{x_i} Q) − (−1)^{(p−1)(q−1)} (Q ∂⃖ξ_i)(∂_{x_i} P) )
//! ```
//!
//! where `∂⃖ξ_i` is the right derivative. On vector fields this is the Lie
//! bracket, `[X, f] = X(f)`, `[f, Π] = π♯(df)`, and `π♭[V, Π] = d(π♭V)` holds
//! with `π♭` extended multiplicatively.

use std::collections::HashMap;
use std::sync::Arc;

use num::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{contract, DiffForm, Frame, IndexSet, MultiVector, PhiBasis};
use crate::matrix::PolyMatrix;
use crate::ring::{LaurentPoly, Monomial, Rational, VarSpec};

/// Square skew-symmetric matrix over [`LaurentPoly`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewMatrix(PolyMatrix);

impl SkewMatrix {
    pub fn new(m: PolyMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("{}x{} matrix is not square", m.rows(), m.cols())));
        }
        if !m.is_skew() {
            return Err(Error::NotSkew(format!("{}x{} matrix", m.rows(), m.cols())));
        }
        Ok(SkewMatrix(m))
    }

    pub fn from_rationals(spec: VarSpec, rows: &[Vec<Rational>]) -> Result<Self> {
        Self::new(PolyMatrix::from_rationals(spec, rows)?)
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn spec(&self) -> VarSpec {
        self.0.spec()
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.0
    }

    pub fn constant_values(&self) -> Result<Vec<Vec<Rational>>> {
        self.0.constant_values().ok_or_else(|| Error::NotConstant("skew matrix".into()))
    }
}

/// Pfaffian of a constant skew matrix, by expansion along the first row over
/// perfect matchings.
pub fn pfaffian(a: &SkewMatrix) -> Result<Rational> {
    if a.size() % 2 == 1 {
        return Err(Error::Shape(format!("Pfaffian of odd size {}", a.size())));
    }
    Ok(pfaffian_dense(&a.constant_values()?))
}

/// Pfaffian of a dense skew matrix given by rows; zero for odd sizes.
pub fn pfaffian_dense(a: &[Vec<Rational>]) -> Rational {
    fn go(a: &[Vec<Rational>], mask: u32, memo: &mut HashMap<u32, Rational>) -> Rational {
        if mask == 0 {
            return Rational::one();
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let first = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << first);
        let mut acc = Rational::zero();
        let mut pos = 0;
        for j in 0..a.len() {
            if rest & (1 << j) == 0 {
                continue;
            }
            pos += 1;
            if a[first][j].is_zero() {
                continue;
            }
            let sub = go(a, rest & !(1 << j), memo);
            let term = &a[first][j] * sub;
            if pos % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        memo.insert(mask, acc.clone());
        acc
    }
    if a.len() % 2 == 1 {
        return Rational::zero();
    }
    go(a, (1u32 << a.len()).wrapping_sub(1), &mut HashMap::new())
}

/// A bivector in the coordinate frame with polynomial coefficients. The
/// Jacobi identity is not assumed; see [`jacobi_holds`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoissonStructure {
    bivector: MultiVector,
}

impl PoissonStructure {
    pub fn new(bivector: MultiVector) -> Result<Self> {
        let bivector = bivector.change_frame(&Frame::Coordinate)?;
        if bivector.degree() != 2 {
            return Err(Error::DegreeMismatch { expected: 2, found: bivector.degree() });
        }
        for (_, c) in bivector.terms() {
            for (m, _) in c.terms() {
                if let Some(i) = m.has_negative() {
                    return Err(Error::NotInLocalRing(i + 1));
                }
            }
        }
        Ok(PoissonStructure { bivector })
    }

    /// `Σ_{i<j} m_ij ∂_i∧∂_j`.
    pub fn from_coefficients(m: &SkewMatrix) -> Result<Self> {
        let spec = m.spec();
        let n = spec.total_vars();
        if m.size() != n {
            return Err(Error::Shape(format!("expected a {n}x{n} coefficient matrix")));
        }
        let terms = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (IndexSet::from_indices([i, j]), m.get(i, j).clone()));
        Self::new(MultiVector::from_terms(spec, Frame::Coordinate, 2, terms)?)
    }

    pub fn spec(&self) -> VarSpec {
        self.bivector.spec()
    }

    pub fn bivector(&self) -> &MultiVector {
        &self.bivector
    }

    /// Signed coefficient `π_ij` of `Π = Σ_{i<j} π_ij ∂_i∧∂_j`.
    pub fn coefficient(&self, i: usize, j: usize) -> LaurentPoly {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.bivector.coefficient(&IndexSet::from_indices([i, j])),
            std::cmp::Ordering::Greater => -self.bivector.coefficient(&IndexSet::from_indices([i, j])),
            std::cmp::Ordering::Equal => LaurentPoly::zero(self.spec()),
        }
    }

    /// The coordinate coefficient matrix `(π_ij)`.
    pub fn coefficient_matrix(&self) -> SkewMatrix {
        let n = self.spec().total_vars();
        SkewMatrix(PolyMatrix::from_fn(self.spec(), n, n, |i, j| self.coefficient(i, j)))
    }

    /// Reads `{dimension, divisor_vars, terms: [{i, j, coeff}]}` with 1-based
    /// `i != j`; `coeff` is a polynomial string or a number.
    pub fn from_json(v: &Value) -> Result<Self> {
        let get_usize = |name: &str| {
            v.get(name)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("field '{name}' must be a non-negative integer")))
        };
        let spec = VarSpec::new(get_usize("dimension")?, get_usize("divisor_vars")?)?;
        let n = spec.total_vars();
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("field 'terms' must be a list".into()))?;
        let mut out = MultiVector::zero(spec, Frame::Coordinate, 2)?;
        for t in terms {
            let idx = |name: &str| -> Result<usize> {
                match t.get(name).and_then(Value::as_u64) {
                    Some(k) if k >= 1 && (k as usize) <= n => Ok(k as usize - 1),
                    Some(k) => Err(Error::IndexOutOfRange { index: k as usize, total: n }),
                    None => Err(Error::Parse(format!("term field '{name}' must be a positive integer"))),
                }
            };
            let (i, j) = (idx("i")?, idx("j")?);
            if i == j {
                return Err(Error::Parse(format!("term with i = j = {}", i + 1)));
            }
            let coeff = match t.get("coeff") {
                Some(Value::String(s)) => LaurentPoly::parse(spec, s)?,
                Some(Value::Number(x)) => LaurentPoly::parse(spec, &x.to_string())?,
                _ => return Err(Error::Parse("term field 'coeff' must be a string or number".into())),
            };
            let coeff = if i < j { coeff } else { -coeff };
            out.add_term(IndexSet::from_indices([i, j]), coeff);
        }
        Self::new(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dimension": self.spec().total_vars(),
            "divisor_vars": self.spec().divisor_vars(),
            "terms": self.bivector.terms().map(|(s, c)| {
                let v = s.to_vec();
                json!({"i": v[0] + 1, "j": v[1] + 1, "coeff": c.to_string()})
            }).collect::<Vec<_>>(),
        })
    }
}

/// `P ∂⃖ξ_i`: drop `ξ_i` from the right, sign `(−1)^{#K above i}`.
fn right_derivative(p: &MultiVector, i: usize) -> Result<MultiVector> {
    let mut out = MultiVector::zero(p.spec(), Frame::Coordinate, p.degree() - 1)?;
    for (s, c) in p.terms() {
        if s.contains(i) {
            let c = if s.count_above(i) % 2 == 1 { -c } else { c.clone() };
            out.add_term(s.remove(i), c);
        }
    }
    Ok(out)
}

fn partial(p: &MultiVector, i: usize) -> Result<MultiVector> {
    let mut out = MultiVector::zero(p.spec(), Frame::Coordinate, p.degree())?;
    for (s, c) in p.terms() {
        out.add_term(*s, c.partial_derivative(i)?);
    }
    Ok(out)
}

/// Schouten–Nijenhuis bracket, in the coordinate frame.
pub fn schouten(p: &MultiVector, q: &MultiVector) -> Result<MultiVector> {
    p.spec().ensure_same(&q.spec())?;
    let p = p.change_frame(&Frame::Coordinate)?;
    let q = q.change_frame(&Frame::Coordinate)?;
    let (dp, dq) = (p.degree() as i64, q.degree() as i64);
    let spec = p.spec();
    if dp + dq == 0 {
        return MultiVector::zero(spec, Frame::Coordinate, 0);
    }
    let mut acc = MultiVector::zero(spec, Frame::Coordinate, (dp + dq - 1) as usize)?;
    let swap_negative = ((dp - 1) * (dq - 1)).rem_euclid(2) == 0;
    for i in 0..spec.total_vars() {
        if dp >= 1 {
            let a = right_derivative(&p, i)?;
            if !a.is_zero() {
                acc = acc.checked_add(&a.wedge(&partial(&q, i)?)?)?;
            }
        }
        if dq >= 1 {
            let a = right_derivative(&q, i)?;
            if !a.is_zero() {
                let term = a.wedge(&partial(&p, i)?)?;
                acc = if swap_negative { &acc - &term } else { &acc + &term };
            }
        }
    }
    Ok(if (dp - 1).rem_euclid(2) == 1 { -&acc } else { acc })
}

/// `[Π, Π]`.
pub fn self_bracket(p: &PoissonStructure) -> MultiVector {
    schouten(&p.bivector, &p.bivector).expect("bracket of a structure with itself")
}

pub fn jacobi_holds(p: &PoissonStructure) -> bool {
    self_bracket(p).is_zero()
}

/// `Π^n = f ∂_1∧…∧∂_{2n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopPower {
    pub coefficient: LaurentPoly,
    pub element: MultiVector,
}

pub fn top_power(p: &PoissonStructure) -> TopPower {
    let spec = p.spec();
    let mut acc = p.bivector.clone();
    for _ in 1..spec.half_dim() {
        acc = acc.wedge(&p.bivector).expect("same frame and layout");
    }
    TopPower { coefficient: acc.coefficient(&IndexSet::full(spec.total_vars())), element: acc }
}

/// Monomial part of the top-power coefficient `f = x^e · u` with `u(0) ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegeneracyDivisor {
    /// `(0-based variable, multiplicity)` for each `x_i` dividing `f`.
    pub components: Vec<(usize, u32)>,
    /// The cofactor `u`, a unit in the local ring.
    #[serde(serialize_with = "serialize_display")]
    pub unit_part: LaurentPoly,
    /// All multiplicities are at most one.
    pub simple_normal_crossing: bool,
}

fn serialize_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn degeneracy_divisor(p: &PoissonStructure) -> Result<DegeneracyDivisor> {
    let f = top_power(p).coefficient;
    let Some(content) = f.monomial_content() else {
        return Err(Error::Degenerate("the top power of the bivector vanishes identically".into()));
    };
    let unit = f
        .div_monomial_polynomial(&content)
        .expect("dividing by the monomial content stays polynomial");
    if unit.constant_term().is_zero() {
        return Err(Error::NotNormalCrossing(format!(
            "top coefficient {f} is not a monomial times a local unit"
        )));
    }
    let components: Vec<(usize, u32)> = content
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0)
        .map(|(i, e)| (i, *e as u32))
        .collect();
    let simple_normal_crossing = components.iter().all(|(_, e)| *e <= 1);
    Ok(DegeneracyDivisor { components, unit_part: unit, simple_normal_crossing })
}

/// `x_i^{[i divisor]}`.
fn log_weight(spec: &VarSpec, i: usize) -> Monomial {
    if spec.is_divisor(i) {
        Monomial::var(spec.total_vars(), i)
    } else {
        Monomial::one(spec.total_vars())
    }
}

/// The matrix `A` of `π♯` in the bases `η`, `v`:
/// `a_ij = π_ij / (x_i^{[i div]} x_j^{[j div]})`.
pub fn log_matrix(p: &PoissonStructure) -> Result<SkewMatrix> {
    let spec = p.spec();
    let n = spec.total_vars();
    let mut m = PolyMatrix::zero(spec, n, n);
    for i in 0..n {
        for j in i + 1..n {
            let c = p.coefficient(i, j);
            let w = log_weight(&spec, i).mul(&log_weight(&spec, j));
            let a = c.div_monomial_polynomial(&w).ok_or_else(|| Error::NotLogarithmic {
                i: i + 1,
                j: j + 1,
                detail: format!("{c} is not divisible by the divisor variables among x{} and x{}", i + 1, j + 1),
            })?;
            m.set(j, i, -&a);
            m.set(i, j, a);
        }
    }
    SkewMatrix::new(m)
}

/// `B = A⁻¹` over the localized ring.
pub fn inverse_log_matrix(p: &PoissonStructure) -> Result<PolyMatrix> {
    log_matrix(p)?.matrix().inverse()
}

/// `π♯(w) = ι_w Π`, in the coordinate frame.
pub fn pi_sharp(p: &PoissonStructure, w: &DiffForm) -> Result<MultiVector> {
    contract(w, &p.bivector)
}

/// Inverse of [`pi_sharp`] on vector fields: `π♭(v_i) = Σ_j b_ij η_j`;
/// the result is in the log frame.
pub fn pi_flat(p: &PoissonStructure, v: &MultiVector) -> Result<DiffForm> {
    if v.degree() != 1 {
        return Err(Error::DegreeMismatch { expected: 1, found: v.degree() });
    }
    let b = inverse_log_matrix(p)?;
    let spec = p.spec();
    let v = v.change_frame(&Frame::Log)?;
    let mut out = DiffForm::zero(spec, Frame::Log, 1)?;
    for (s, c) in v.terms() {
        let i = s.iter().next().expect("degree one");
        for j in 0..spec.total_vars() {
            out.add_term(IndexSet::singleton(j), c * b.get(i, j));
        }
    }
    Ok(out)
}

/// The phi frame `φ_i = π♭(∂_i)` of the structure.
pub fn phi_basis(p: &PoissonStructure) -> Result<Arc<PhiBasis>> {
    Ok(Arc::new(PhiBasis::new(log_matrix(p)?.matrix().clone())?))
}

/// `π♭` extended multiplicatively to multivectors: `π♭(g ∂_K) = g φ_K`.
/// The result is in the phi frame of `basis`.
pub fn pi_flat_multivector(basis: &Arc<PhiBasis>, v: &MultiVector) -> Result<DiffForm> {
    let v = v.change_frame(&Frame::Coordinate)?;
    DiffForm::from_terms(v.spec(), Frame::Phi(basis.clone()), v.degree(), v.terms().map(|(s, c)| (*s, c.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::exterior_derivative;
    use crate::linalg::det_dense;
    use crate::ring::{int, rat};
    use proptest::prelude::*;

    fn spec() -> VarSpec {
        VarSpec::new(4, 2).unwrap()
    }

    fn p(s: &str) -> LaurentPoly {
        LaurentPoly::parse(spec(), s).unwrap()
    }

    fn mv(degree: usize, terms: &[(&[usize], &str)]) -> MultiVector {
        MultiVector::from_terms(
            spec(),
            Frame::Coordinate,
            degree,
            terms.iter().map(|(s, c)| (IndexSet::from_sorted(s).unwrap(), p(c))),
        )
        .unwrap()
    }

    fn example_a() -> Vec<Vec<Rational>> {
        let e = |x: i64| int(x);
        vec![
            vec![e(0), e(1), e(2), e(3)],
            vec![e(-1), e(0), e(4), e(5)],
            vec![e(-2), e(-4), e(0), e(6)],
            vec![e(-3), e(-5), e(-6), e(0)],
        ]
    }

    fn toric(a: &[Vec<Rational>]) -> PoissonStructure {
        let n = a.len();
        let s = VarSpec::new(n, n).unwrap();
        let mut bv = MultiVector::zero(s, Frame::Coordinate, 2).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                let mut e = vec![0; n];
                e[i] = 1;
                e[j] = 1;
                bv.add_term(IndexSet::from_indices([i, j]), LaurentPoly::monomial(s, e, a[i][j].clone()).unwrap());
            }
        }
        PoissonStructure::new(bv).unwrap()
    }

    // --- decomposable-formula oracle for the bracket, built from Lie brackets

    fn apply(x: &MultiVector, g: &LaurentPoly) -> LaurentPoly {
        let mut acc = LaurentPoly::zero(g.spec());
        for (s, c) in x.terms() {
            let i = s.iter().next().unwrap();
            acc = &acc + &(c * &g.partial_derivative(i).unwrap());
        }
        acc
    }

    fn lie(x: &MultiVector, y: &MultiVector) -> MultiVector {
        let s = x.spec();
        let mut out = MultiVector::zero(s, Frame::Coordinate, 1).unwrap();
        for i in 0..s.total_vars() {
            let e = IndexSet::singleton(i);
            out.add_term(e, &apply(x, &y.coefficient(&e)) - &apply(y, &x.coefficient(&e)));
        }
        out
    }

    fn factors(set: &IndexSet, c: &LaurentPoly) -> Vec<MultiVector> {
        let s = c.spec();
        set.iter()
            .enumerate()
            .map(|(k, i)| {
                let coeff = if k == 0 { c.clone() } else { LaurentPoly::one(s) };
                MultiVector::from_terms(s, Frame::Coordinate, 1, [(IndexSet::singleton(i), coeff)]).unwrap()
            })
            .collect()
    }

    fn wedge_all(s: VarSpec, xs: &[MultiVector]) -> MultiVector {
        xs.iter().fold(MultiVector::one(s), |acc, x| acc.wedge(x).unwrap())
    }

    fn without(xs: &[MultiVector], k: usize) -> Vec<MultiVector> {
        xs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x.clone()).collect()
    }

    fn oracle_term(s: VarSpec, xs: &[MultiVector], f: &LaurentPoly, ys: &[MultiVector], g: &LaurentPoly) -> MultiVector {
        // xs / ys are the factors of P and Q; f / g the degree-0 elements
        let (p, q) = (xs.len() as i64, ys.len() as i64);
        let out_deg = (p + q - 1).max(0) as usize;
        let mut acc = MultiVector::zero(s, Frame::Coordinate, out_deg).unwrap();
        if p == 0 && q == 0 {
            return acc;
        }
        // classic right-hand formula for [P,Q]_R
        if p >= 1 && q >= 1 {
            for i in 0..xs.len() {
                for j in 0..ys.len() {
                    let mut t = lie(&xs[i], &ys[j]).wedge(&wedge_all(s, &without(xs, i))).unwrap();
                    t = t.wedge(&wedge_all(s, &without(ys, j))).unwrap();
                    acc = if (i + j) % 2 == 0 { &acc + &t } else { &acc - &t };
                }
            }
        } else if q == 0 {
            for k in 0..xs.len() {
                let t = wedge_all(s, &without(xs, k)).scale_poly(&apply(&xs[k], g));
                acc = if (p - 1 - k as i64) % 2 == 0 { &acc + &t } else { &acc - &t };
            }
        } else {
            // [f,Q]_R = (−1)^q [Q,f]_R
            for k in 0..ys.len() {
                let t = wedge_all(s, &without(ys, k)).scale_poly(&apply(&ys[k], f));
                let sign = (q - 1 - k as i64) + q;
                acc = if sign % 2 == 0 { &acc + &t } else { &acc - &t };
            }
        }
        if (p - 1).rem_euclid(2) == 1 {
            -&acc
        } else {
            acc
        }
    }

    fn oracle(a: &MultiVector, b: &MultiVector) -> MultiVector {
        let s = a.spec();
        let out_deg = (a.degree() + b.degree()).max(1) - 1;
        let mut acc = MultiVector::zero(s, Frame::Coordinate, out_deg).unwrap();
        for (sa, ca) in a.terms() {
            for (sb, cb) in b.terms() {
                let (xs, f) = if sa.is_empty() { (vec![], ca.clone()) } else { (factors(sa, ca), LaurentPoly::one(s)) };
                let (ys, g) = if sb.is_empty() { (vec![], cb.clone()) } else { (factors(sb, cb), LaurentPoly::one(s)) };
                acc = &acc + &oracle_term(s, &xs, &f, &ys, &g);
            }
        }
        acc
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(schouten(&mv(1, &[(&[0], "1")]), &mv(0, &[(&[], "x1")])).unwrap(), mv(0, &[(&[], "1")]));
        let comm = schouten(&mv(1, &[(&[0], "x1")]), &mv(1, &[(&[1], "x2")])).unwrap();
        assert!(comm.is_zero());
        let b = schouten(&mv(2, &[(&[0, 1], "1")]), &mv(1, &[(&[2], "x1")])).unwrap();
        assert_eq!(b, mv(2, &[(&[1, 2], "1")]));
        assert_eq!(b, oracle(&mv(2, &[(&[0, 1], "1")]), &mv(1, &[(&[2], "x1")])));
    }

    #[test]
    fn bracket_with_functions() {
        let f = mv(0, &[(&[], "x1*x3 + x2^2")]);
        let pi = mv(2, &[(&[0, 1], "x1*x2"), (&[2, 3], "1 + x3")]);
        let s = PoissonStructure::new(pi.clone()).unwrap();
        let df = DiffForm::from_terms(
            spec(),
            Frame::Coordinate,
            1,
            (0..4).map(|i| (IndexSet::singleton(i), f.coefficient(&IndexSet::EMPTY).partial_derivative(i).unwrap())),
        )
        .unwrap();
        // [f, Π] = π♯(df)
        assert_eq!(schouten(&f, &pi).unwrap(), pi_sharp(&s, &df).unwrap());
        assert_eq!(schouten(&f, &pi).unwrap(), oracle(&f, &pi));
        assert_eq!(schouten(&pi, &f).unwrap(), oracle(&pi, &f));
    }

    #[test]
    fn non_poisson_bivector() {
        // x3 ∂1∧∂2 + ∂3∧∂4: [Π,Π] = 2 ∂1∧∂2∧∂4
        let s = PoissonStructure::new(mv(2, &[(&[0, 1], "x3"), (&[2, 3], "1")])).unwrap();
        let br = self_bracket(&s);
        assert_eq!(br, oracle(s.bivector(), s.bivector()));
        assert_eq!(br, mv(3, &[(&[0, 1, 3], "2")]));
        assert!(!jacobi_holds(&s));
        let zero = PoissonStructure::new(MultiVector::zero(spec(), Frame::Coordinate, 2).unwrap()).unwrap();
        assert!(jacobi_holds(&zero));
    }

    #[test]
    fn pfaffian_examples() {
        let s = VarSpec::new(2, 0).unwrap();
        let two = SkewMatrix::from_rationals(s, &[vec![int(0), int(1)], vec![int(-1), int(0)]]).unwrap();
        assert_eq!(pfaffian(&two).unwrap(), int(1));
        let a = example_a();
        assert_eq!(pfaffian_dense(&a), int(8));
        assert_eq!(pfaffian_dense(&a) * pfaffian_dense(&a), det_dense(&a));
        assert!(pfaffian_dense(&vec![vec![int(0); 4]; 4]).is_zero());
        let s3 = VarSpec::new(4, 0).unwrap();
        let odd = PolyMatrix::zero(s3, 3, 3);
        assert!(matches!(pfaffian(&SkewMatrix::new(odd).unwrap()), Err(Error::Shape(_))));
        let ns = PolyMatrix::from_rationals(s, &[vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        assert!(matches!(SkewMatrix::new(ns), Err(Error::NotSkew(_))));
    }

    #[test]
    fn top_power_examples() {
        let sym = PoissonStructure::new(mv(2, &[(&[0, 1], "1"), (&[2, 3], "1")])).unwrap();
        assert_eq!(top_power(&sym).coefficient, p("2"));
        let t = toric(&example_a());
        let s = t.spec();
        assert_eq!(top_power(&t).coefficient, LaurentPoly::parse(s, "16*x1*x2*x3*x4").unwrap());
        let d = degeneracy_divisor(&t).unwrap();
        assert_eq!(d.components, vec![(0, 1), (1, 1), (2, 1), (3, 1)]);
        assert_eq!(d.unit_part, LaurentPoly::constant(s, int(16)));
        assert!(d.simple_normal_crossing);
        let ds = degeneracy_divisor(&sym).unwrap();
        assert!(ds.components.is_empty());
        let zero = PoissonStructure::new(MultiVector::zero(spec(), Frame::Coordinate, 2).unwrap()).unwrap();
        assert!(top_power(&zero).coefficient.is_zero());
        assert!(matches!(degeneracy_divisor(&zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn divisor_shapes() {
        // (x1 + x2) ∂1∧∂2 + ∂3∧∂4 is not monomial times unit
        let bad = PoissonStructure::new(mv(2, &[(&[0, 1], "x1 + x2"), (&[2, 3], "1")])).unwrap();
        assert!(matches!(degeneracy_divisor(&bad), Err(Error::NotNormalCrossing(_))));
        let sq = PoissonStructure::new(mv(2, &[(&[0, 1], "x1^2 + x1^2*x3"), (&[2, 3], "1")])).unwrap();
        let d = degeneracy_divisor(&sq).unwrap();
        assert_eq!(d.components, vec![(0, 2)]);
        assert!(!d.simple_normal_crossing);
        assert_eq!(d.unit_part, p("2 + 2*x3"));
    }

    #[test]
    fn log_matrix_examples() {
        let t = toric(&example_a());
        assert_eq!(log_matrix(&t).unwrap().constant_values().unwrap(), example_a());
        let s0 = VarSpec::new(4, 0).unwrap();
        let sym = PoissonStructure::new(
            MultiVector::from_terms(
                s0,
                Frame::Coordinate,
                2,
                [(IndexSet::from_indices([0, 1]), LaurentPoly::one(s0)), (IndexSet::from_indices([2, 3]), LaurentPoly::one(s0))],
            )
            .unwrap(),
        )
        .unwrap();
        let a = log_matrix(&sym).unwrap().constant_values().unwrap();
        assert_eq!(a[0][1], int(1));
        assert_eq!(a[1][0], int(-1));
        let s1 = VarSpec::new(2, 1).unwrap();
        let bad = PoissonStructure::new(
            MultiVector::generator(s1, Frame::Coordinate, IndexSet::from_indices([0, 1])).unwrap(),
        )
        .unwrap();
        assert!(matches!(log_matrix(&bad), Err(Error::NotLogarithmic { i: 1, j: 2, .. })));
    }

    #[test]
    fn sharp_and_flat() {
        let t = toric(&example_a());
        let s = t.spec();
        let a = example_a();
        let b = crate::linalg::inverse_dense(&a).unwrap();
        for i in 0..4 {
            let eta = DiffForm::generator(s, Frame::Log, IndexSet::singleton(i)).unwrap();
            let sharp = pi_sharp(&t, &eta).unwrap().change_frame(&Frame::Log).unwrap();
            for j in 0..4 {
                assert_eq!(sharp.coefficient(&IndexSet::singleton(j)).as_constant().unwrap(), a[i][j]);
            }
            assert_eq!(pi_flat(&t, &sharp).unwrap(), eta);
            let v = MultiVector::generator(s, Frame::Log, IndexSet::singleton(i)).unwrap();
            let flat = pi_flat(&t, &v).unwrap();
            for j in 0..4 {
                assert_eq!(flat.coefficient(&IndexSet::singleton(j)).as_constant().unwrap(), b[i][j]);
            }
            assert_eq!(pi_sharp(&t, &flat).unwrap().change_frame(&Frame::Log).unwrap(), v);
        }
        let zero = DiffForm::zero(s, Frame::Coordinate, 1).unwrap();
        assert!(pi_sharp(&t, &zero).unwrap().is_zero());
        // standard symplectic: π♯(dx_1) = ∂_2
        let sym = PoissonStructure::new(mv(2, &[(&[0, 1], "1"), (&[2, 3], "1")])).unwrap();
        let dx1 = DiffForm::generator(spec(), Frame::Coordinate, IndexSet::singleton(0)).unwrap();
        assert_eq!(pi_sharp(&sym, &dx1).unwrap(), mv(1, &[(&[1], "1")]));
    }

    #[test]
    fn phi_one_forms() {
        let t = toric(&example_a());
        let basis = phi_basis(&t).unwrap();
        let s = t.spec();
        for i in 0..4 {
            let d_i = MultiVector::generator(s, Frame::Coordinate, IndexSet::singleton(i)).unwrap();
            let phi = basis.phi_one(i).unwrap();
            assert_eq!(pi_flat(&t, &d_i).unwrap().change_frame(&Frame::Coordinate).unwrap(), phi);
            let x_i = LaurentPoly::var(s, i).unwrap();
            assert!(exterior_derivative(&phi.scale_poly(&x_i)).unwrap().is_zero());
            let eta = DiffForm::generator(s, Frame::Log, IndexSet::singleton(i)).unwrap();
            let rhs = phi.wedge(&eta.change_frame(&Frame::Coordinate).unwrap()).unwrap();
            assert_eq!(exterior_derivative(&phi).unwrap(), rhs);
        }
    }

    #[test]
    fn flat_conjugates_bracket_to_d() {
        let t = toric(&example_a());
        let s = t.spec();
        let basis = phi_basis(&t).unwrap();
        let samples = [
            (0, vec![(IndexSet::EMPTY, "x1*x3 + 2*x4^2")]),
            (1, vec![(IndexSet::singleton(0), "x2"), (IndexSet::singleton(3), "x1*x4 - 1")]),
            (2, vec![(IndexSet::from_indices([0, 2]), "x3^2"), (IndexSet::from_indices([1, 3]), "3")]),
            (3, vec![(IndexSet::from_indices([0, 1, 3]), "x2*x3")]),
        ];
        for (deg, terms) in samples {
            let v = MultiVector::from_terms(
                s,
                Frame::Coordinate,
                deg,
                terms.into_iter().map(|(k, c)| (k, LaurentPoly::parse(s, c).unwrap())),
            )
            .unwrap();
            let lhs = pi_flat_multivector(&basis, &schouten(&v, t.bivector()).unwrap()).unwrap();
            let rhs = exterior_derivative(&pi_flat_multivector(&basis, &v).unwrap()).unwrap();
            assert_eq!(lhs.change_frame(&Frame::Coordinate).unwrap(), rhs, "degree {deg}");
        }
    }

    #[test]
    fn json_round_trip() {
        let t = toric(&example_a());
        assert_eq!(PoissonStructure::from_json(&t.to_json()).unwrap(), t);
        let v = json!({"dimension": 2, "divisor_vars": 2, "terms": [{"i": 2, "j": 1, "coeff": "x1*x2"}]});
        let s = PoissonStructure::from_json(&v).unwrap();
        assert_eq!(s.coefficient(0, 1), -LaurentPoly::parse(s.spec(), "x1*x2").unwrap());
        let bad = json!({"dimension": 2, "divisor_vars": 0, "terms": [{"i": 1, "j": 3, "coeff": 1}]});
        assert!(PoissonStructure::from_json(&bad).is_err());
    }

    fn arb_coeff() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((prop::collection::vec(0i32..3, 4), -3i64..4), 0..3).prop_map(|ts| {
            LaurentPoly::from_terms(spec(), ts.into_iter().map(|(e, c)| (Monomial::from_exponents(e), int(c)))).unwrap()
        })
    }

    fn arb_mv(degree: usize) -> impl Strategy<Value = MultiVector> {
        let sets = IndexSet::subsets(4, degree);
        prop::collection::vec(arb_coeff(), sets.len()).prop_map(move |cs| {
            // keep the elements small: at most two nonzero terms
            let terms = sets.iter().copied().zip(cs).filter(|(_, c)| !c.is_zero()).take(2);
            MultiVector::from_terms(spec(), Frame::Coordinate, degree, terms).unwrap()
        })
    }

    fn arb_skew4() -> impl Strategy<Value = Vec<Vec<Rational>>> {
        prop::collection::vec((-9i64..10, 1i64..5), 6).prop_map(|v| {
            let mut a = vec![vec![int(0); 4]; 4];
            let mut k = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    a[i][j] = rat(v[k].0, v[k].1);
                    a[j][i] = -a[i][j].clone();
                    k += 1;
                }
            }
            a
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bracket_matches_oracle(d1 in 0usize..3, d2 in 0usize..3, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut pick = |deg: usize| {
                let sets = IndexSet::subsets(4, deg);
                let terms: Vec<(IndexSet, LaurentPoly)> = (0..2).map(|_| {
                    let e: Vec<i32> = (0..4).map(|_| rng.gen_range(0..3)).collect();
                    let c = int(rng.gen_range(-3..4));
                    (sets[rng.gen_range(0..sets.len())], LaurentPoly::monomial(spec(), e, c).unwrap())
                }).collect();
                MultiVector::from_terms(spec(), Frame::Coordinate, deg, terms).unwrap()
            };
            let a = pick(d1);
            let b = pick(d2);
            prop_assert_eq!(schouten(&a, &b).unwrap(), oracle(&a, &b));
        }

        #[test]
        fn graded_antisymmetry(a in arb_mv(1), b in arb_mv(2), c in arb_mv(2)) {
            // [P,Q] = (−1)^{pq} [Q,P]
            prop_assert_eq!(schouten(&a, &b).unwrap(), schouten(&b, &a).unwrap());
            prop_assert_eq!(schouten(&b, &c).unwrap(), schouten(&c, &b).unwrap());
            prop_assert_eq!(schouten(&a, &a).unwrap(), MultiVector::zero(spec(), Frame::Coordinate, 1).unwrap());
        }

        #[test]
        fn graded_jacobi(a in arb_mv(1), b in arb_mv(2), c in arb_mv(1)) {
            // [P,[Q,R]] = (−1)^{p−1}[[P,Q],R] + (−1)^{(p−1)(q−1)}[Q,[P,R]], p = 1, q = 2
            let lhs = schouten(&a, &schouten(&b, &c).unwrap()).unwrap();
            let rhs = &schouten(&schouten(&a, &b).unwrap(), &c).unwrap()
                + &schouten(&b, &schouten(&a, &c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            // p = 2, q = 2, r = 1
            let lhs = schouten(&b, &schouten(&b, &a).unwrap()).unwrap();
            let rhs = &(-&schouten(&schouten(&b, &b).unwrap(), &a).unwrap())
                - &schouten(&b, &schouten(&b, &a).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn toric_invariants(a in arb_skew4()) {
            let t = toric(&a);
            prop_assert!(jacobi_holds(&t));
            let pf = pfaffian_dense(&a);
            prop_assert_eq!(&pf * &pf, det_dense(&a));
            let expected = LaurentPoly::monomial(t.spec(), vec![1; 4], int(2) * pf.clone()).unwrap();
            prop_assert_eq!(top_power(&t).coefficient, expected);
            if !pf.is_zero() {
                let s = t.spec();
                for i in 0..4 {
                    let eta = DiffForm::generator(s, Frame::Log, IndexSet::singleton(i)).unwrap();
                    prop_assert_eq!(pi_flat(&t, &pi_sharp(&t, &eta).unwrap()).unwrap(), eta);
                }
            }
        }

        #[test]
        fn pfaffian_squares_to_det(entries in prop::collection::vec(-4i64..5, 28), size in prop::sample::select(vec![2usize, 4, 6, 8])) {
            let mut a = vec![vec![int(0); size]; size];
            let mut k = 0;
            for i in 0..size {
                for j in i + 1..size {
                    a[i][j] = int(entries[k]);
                    a[j][i] = int(-entries[k]);
                    k += 1;
                }
            }
            let pf = pfaffian_dense(&a);
            prop_assert_eq!(&pf * &pf, det_dense(&a));
        }
    }
}
