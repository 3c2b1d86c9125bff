//! Exterior algebra of differential forms and multivector fields over
//! [`LaurentPoly`], in three frames.
//!
//! * coordinate: `dx_i` / `∂_i`
//! * log: `η_i = dx_i/x_i`, `v_i = x_i ∂_i` for divisor coordinates, the
//!   coordinate generators otherwise
//! * phi (forms only): `φ_i = π♭(∂_i)`, built from the inverse `B` of the
//!   log matrix `A` of a Poisson structure
//!
//! Every element can be expanded in the coordinate frame; the other frames are
//! re-expressions with basis-change matrices over the localized ring.
//!
//! Interior products follow
//! `ι_ξ(V_1∧…∧V_k) = Σ_j (−1)^{j−1} ξ(V_j) V_1∧…V̂_j…∧V_k`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
pub use crate::index_set::IndexSet;
use crate::matrix::PolyMatrix;
use crate::ring::{LaurentPoly, Monomial, Rational, VarSpec};

/// The phi frame `φ_i = π♭(∂_i)` attached to an invertible log matrix.
pub struct PhiBasis {
    spec: VarSpec,
    a: PolyMatrix,
    b: PolyMatrix,
    a_compounds: Vec<OnceLock<BTreeMap<(IndexSet, IndexSet), LaurentPoly>>>,
    phi_cache: Mutex<HashMap<IndexSet, DiffForm>>,
}

impl PhiBasis {
    /// `a` is the matrix of `π♯` in the log bases; its inverse must be a
    /// matrix over the localized ring.
    pub fn new(a: PolyMatrix) -> Result<Self> {
        let spec = a.spec();
        let n = spec.total_vars();
        if a.rows() != n || a.cols() != n {
            return Err(Error::Shape(format!("log matrix must be {n}x{n}")));
        }
        if !a.is_skew() {
            return Err(Error::NotSkew("log matrix".into()));
        }
        let b = a.inverse()?;
        Ok(PhiBasis {
            spec,
            a,
            b,
            a_compounds: (0..=n).map(|_| OnceLock::new()).collect(),
            phi_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> VarSpec {
        self.spec
    }

    /// The log matrix `A`.
    pub fn log_matrix(&self) -> &PolyMatrix {
        &self.a
    }

    /// `B = A⁻¹`.
    pub fn inverse_matrix(&self) -> &PolyMatrix {
        &self.b
    }

    fn a_compound(&self, k: usize) -> &BTreeMap<(IndexSet, IndexSet), LaurentPoly> {
        self.a_compounds[k].get_or_init(|| self.a.compound(k))
    }

    /// `φ_i` expanded in the coordinate frame:
    /// `x_i^{-[i div]} Σ_j b_ij x_j^{-[j div]} dx_j`.
    pub fn phi_one(&self, i: usize) -> Result<DiffForm> {
        self.spec.check_index(i)?;
        let n = self.spec.total_vars();
        let mut terms = Vec::new();
        for j in 0..n {
            let b = self.b.get(i, j);
            if b.is_zero() {
                continue;
            }
            let mut e = vec![0i32; n];
            if self.spec.is_divisor(i) {
                e[i] -= 1;
            }
            if self.spec.is_divisor(j) {
                e[j] -= 1;
            }
            terms.push((IndexSet::singleton(j), b.mul_monomial(&Monomial::from_exponents(e))?));
        }
        DiffForm::from_terms(self.spec, Frame::Coordinate, 1, terms)
    }

    /// `φ_K = φ_{k_1} ∧ … ∧ φ_{k_r}` in the coordinate frame.
    pub fn phi(&self, set: IndexSet) -> Result<DiffForm> {
        if let Some(hit) = self.phi_cache.lock().expect("phi cache poisoned").get(&set) {
            return Ok(hit.clone());
        }
        let mut acc = DiffForm::one(self.spec);
        for i in set.iter() {
            acc = acc.wedge(&self.phi_one(i)?)?;
        }
        self.phi_cache.lock().expect("phi cache poisoned").insert(set, acc.clone());
        Ok(acc)
    }
}

impl PartialEq for PhiBasis {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.a == other.a
    }
}

impl Eq for PhiBasis {}

impl fmt::Debug for PhiBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiBasis").field("spec", &self.spec).field("a", &self.a).finish()
    }
}

#[derive(Debug, Clone)]
pub enum Frame {
    Coordinate,
    Log,
    Phi(Arc<PhiBasis>),
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Frame::Coordinate, Frame::Coordinate) | (Frame::Log, Frame::Log) => true,
            (Frame::Phi(a), Frame::Phi(b)) => Arc::ptr_eq(a, b) || **a == **b,
            _ => false,
        }
    }
}

impl Eq for Frame {}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Coordinate => "coordinate",
            Frame::Log => "log",
            Frame::Phi(_) => "phi",
        }
    }

    /// Weight of the degree-one form generator `i` in this frame.
    pub fn form_generator_weight(&self, spec: &VarSpec, i: usize) -> i64 {
        match (self, spec.is_divisor(i)) {
            (Frame::Coordinate, _) => 1,
            (Frame::Log, true) => 0,
            (Frame::Log, false) => 1,
            (Frame::Phi(_), true) => -1,
            (Frame::Phi(_), false) => 1,
        }
    }
}

/// Marker for the two kinds of graded elements.
pub trait Kind: Copy + Clone + fmt::Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    const NAME: &'static str;
    /// Exponent of `x_i` relating the log generator to the coordinate one.
    const LOG_SHIFT: i32;
    fn symbol(frame: &Frame) -> &'static str;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Form;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Vector;

impl Kind for Form {
    const NAME: &'static str = "form";
    const LOG_SHIFT: i32 = -1;
    fn symbol(frame: &Frame) -> &'static str {
        match frame {
            Frame::Coordinate => "dx",
            Frame::Log => "eta",
            Frame::Phi(_) => "phi",
        }
    }
}

impl Kind for Vector {
    const NAME: &'static str = "multivector";
    const LOG_SHIFT: i32 = 1;
    fn symbol(frame: &Frame) -> &'static str {
        match frame {
            Frame::Coordinate => "d",
            _ => "v",
        }
    }
}

/// Homogeneous element of the exterior algebra: a map from index sets of
/// length `degree` to nonzero coefficients. Degrees above the number of
/// variables are allowed and always carry the zero element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExteriorElement<K: Kind> {
    spec: VarSpec,
    frame: Frame,
    degree: usize,
    terms: BTreeMap<IndexSet, LaurentPoly>,
    kind: PhantomData<K>,
}

pub type DiffForm = ExteriorElement<Form>;
pub type MultiVector = ExteriorElement<Vector>;

impl<K: Kind> ExteriorElement<K> {
    fn check_frame(frame: &Frame, spec: &VarSpec) -> Result<()> {
        if let Frame::Phi(basis) = frame {
            if K::LOG_SHIFT > 0 {
                return Err(Error::FrameMismatch("the phi frame is only defined for forms".into()));
            }
            basis.spec().ensure_same(spec)?;
        }
        Ok(())
    }

    pub fn zero(spec: VarSpec, frame: Frame, degree: usize) -> Result<Self> {
        Self::check_frame(&frame, &spec)?;
        Ok(ExteriorElement { spec, frame, degree, terms: BTreeMap::new(), kind: PhantomData })
    }

    /// The constant function 1 (degree 0, coordinate frame).
    pub fn one(spec: VarSpec) -> Self {
        Self::function(LaurentPoly::one(spec))
    }

    /// A degree-0 element.
    pub fn function(f: LaurentPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(IndexSet::EMPTY, f.clone());
        }
        ExteriorElement { spec: f.spec(), frame: Frame::Coordinate, degree: 0, terms, kind: PhantomData }
    }

    /// The frame generator indexed by `set`, with coefficient 1.
    pub fn generator(spec: VarSpec, frame: Frame, set: IndexSet) -> Result<Self> {
        Self::from_terms(spec, frame, set.len(), [(set, LaurentPoly::one(spec))])
    }

    pub fn from_terms<I>(spec: VarSpec, frame: Frame, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (IndexSet, LaurentPoly)>,
    {
        let mut out = Self::zero(spec, frame, degree)?;
        for (set, c) in terms {
            if set.len() != degree {
                return Err(Error::DegreeMismatch { expected: degree, found: set.len() });
            }
            if let Some(top) = set.max_index() {
                spec.check_index(top)?;
            }
            spec.ensure_same(&c.spec())?;
            out.add_term(set, c);
        }
        Ok(out)
    }

    pub(crate) fn add_term(&mut self, set: IndexSet, c: LaurentPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(set) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn spec(&self) -> VarSpec {
        self.spec
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &LaurentPoly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, set: &IndexSet) -> LaurentPoly {
        self.terms.get(set).cloned().unwrap_or_else(|| LaurentPoly::zero(self.spec))
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.spec.ensure_same(&other.spec)?;
        if self.frame != other.frame {
            return Err(Error::FrameMismatch(format!(
                "{} frame vs {} frame",
                self.frame.name(),
                other.frame.name()
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, c.clone());
        }
        Ok(out)
    }

    /// Multiply every coefficient by `f`.
    pub fn scale_poly(&self, f: &LaurentPoly) -> Self {
        let mut out = ExteriorElement { terms: BTreeMap::new(), frame: self.frame.clone(), ..*self };
        for (s, c) in &self.terms {
            out.add_term(*s, c * f);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.scale_poly(&LaurentPoly::constant(self.spec, c.clone()))
    }

    /// Graded-commutative product with shuffle signs.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let frame = if self.degree == 0 && self.frame == Frame::Coordinate {
            other.frame.clone()
        } else if other.degree == 0 && other.frame == Frame::Coordinate {
            self.frame.clone()
        } else {
            self.ensure_compatible(other)?;
            self.frame.clone()
        };
        self.spec.ensure_same(&other.spec)?;
        let mut out = Self::zero(self.spec, frame, self.degree + other.degree)?;
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                if let Some(sign) = s.merge_sign(t) {
                    let prod = a * b;
                    out.add_term(s.union(t), if sign < 0 { -prod } else { prod });
                }
            }
        }
        Ok(out)
    }

    /// Re-expresses the element in `target`.
    pub fn change_frame(&self, target: &Frame) -> Result<Self> {
        Self::check_frame(target, &self.spec)?;
        if &self.frame == target {
            return Ok(self.clone());
        }
        let coordinate = self.to_coordinate()?;
        match target {
            Frame::Coordinate => Ok(coordinate),
            Frame::Log => coordinate.coordinate_to_log(),
            Frame::Phi(basis) => coordinate.coordinate_to_phi(basis),
        }
    }

    /// `x^{shift * 1_{S ∩ divisor}}`.
    fn log_scaling(&self, set: &IndexSet, shift: i32) -> Monomial {
        let mut e = vec![0i32; self.spec.total_vars()];
        for i in set.iter() {
            if self.spec.is_divisor(i) {
                e[i] = shift;
            }
        }
        Monomial::from_exponents(e)
    }

    fn to_coordinate(&self) -> Result<Self> {
        match &self.frame {
            Frame::Coordinate => Ok(self.clone()),
            Frame::Log => {
                let mut out = Self::zero(self.spec, Frame::Coordinate, self.degree)?;
                for (s, c) in &self.terms {
                    out.add_term(*s, c.mul_monomial(&self.log_scaling(s, K::LOG_SHIFT))?);
                }
                Ok(out)
            }
            Frame::Phi(basis) => {
                let mut out = Self::zero(self.spec, Frame::Coordinate, self.degree)?;
                for (s, c) in &self.terms {
                    let phi = basis.phi(*s)?;
                    for (t, d) in phi.terms() {
                        out.add_term(*t, c * d);
                    }
                }
                Ok(out)
            }
        }
    }

    fn coordinate_to_log(&self) -> Result<Self> {
        let mut out = Self::zero(self.spec, Frame::Log, self.degree)?;
        for (s, c) in &self.terms {
            out.add_term(*s, c.mul_monomial(&self.log_scaling(s, -K::LOG_SHIFT))?);
        }
        Ok(out)
    }

    fn coordinate_to_phi(&self, basis: &Arc<PhiBasis>) -> Result<Self> {
        // log coefficients c_J, then h_K = Σ_J c_J C(A)_{JK} are the
        // coefficients on π♭(v_K) = x_{K∩div} φ_K
        let log = self.coordinate_to_log()?;
        let compound = basis.a_compound(self.degree);
        let mut out = Self::zero(self.spec, Frame::Phi(basis.clone()), self.degree)?;
        for ((j, k), entry) in compound {
            let c = log.coefficient(j);
            if c.is_zero() {
                continue;
            }
            let h = &c * entry;
            out.add_term(*k, h.mul_monomial(&self.log_scaling(k, 1))?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": K::NAME,
            "frame": self.frame.name(),
            "dimension": self.spec.total_vars(),
            "divisor_vars": self.spec.divisor_vars(),
            "degree": self.degree,
            "terms": self.terms.iter().map(|(s, c)| json!({
                "indices": s.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "coeff": c.to_string(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Inverse of [`to_json`](Self::to_json); phi-frame input needs `phi`.
    pub fn from_json(v: &Value, phi: Option<Arc<PhiBasis>>) -> Result<Self> {
        let field = |name: &str| v.get(name).ok_or_else(|| Error::Parse(format!("missing field '{name}'")));
        let as_usize = |x: &Value, name: &str| {
            x.as_u64().map(|u| u as usize).ok_or_else(|| Error::Parse(format!("'{name}' must be a non-negative integer")))
        };
        if field("kind")?.as_str() != Some(K::NAME) {
            return Err(Error::Parse(format!("expected kind '{}'", K::NAME)));
        }
        let spec = VarSpec::new(as_usize(field("dimension")?, "dimension")?, as_usize(field("divisor_vars")?, "divisor_vars")?)?;
        let frame = match field("frame")?.as_str() {
            Some("coordinate") => Frame::Coordinate,
            Some("log") => Frame::Log,
            Some("phi") => Frame::Phi(phi.ok_or(Error::FrameMismatch("phi frame requires its basis".into()))?),
            other => return Err(Error::Parse(format!("unknown frame {other:?}"))),
        };
        let degree = as_usize(field("degree")?, "degree")?;
        let mut terms = Vec::new();
        for t in field("terms")?.as_array().ok_or_else(|| Error::Parse("'terms' must be a list".into()))? {
            let idx = t
                .get("indices")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term without 'indices'".into()))?
                .iter()
                .map(|x| match x.as_u64() {
                    Some(i) if i >= 1 => Ok(i as usize - 1),
                    _ => Err(Error::Parse("indices are 1-based positive integers".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            let coeff = t
                .get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("term without 'coeff'".into()))?;
            terms.push((IndexSet::from_sorted(&idx)?, LaurentPoly::parse(spec, coeff)?));
        }
        Self::from_terms(spec, frame, degree, terms)
    }
}

impl<K: Kind> fmt::Display for ExteriorElement<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let sym = K::symbol(&self.frame);
        for (k, (s, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if s.is_empty() {
                write!(f, "({c})")?;
            } else {
                let gens: Vec<String> = s.iter().map(|i| format!("{sym}{}", i + 1)).collect();
                write!(f, "({c})*{}", gens.join("^"))?;
            }
        }
        Ok(())
    }
}

impl<K: Kind> Add for &ExteriorElement<K> {
    type Output = ExteriorElement<K>;
    fn add(self, rhs: Self) -> ExteriorElement<K> {
        self.checked_add(rhs).expect("adding incompatible exterior elements")
    }
}

impl<K: Kind> Neg for &ExteriorElement<K> {
    type Output = ExteriorElement<K>;
    fn neg(self) -> ExteriorElement<K> {
        self.scale(&-Rational::one())
    }
}

impl<K: Kind> Sub for &ExteriorElement<K> {
    type Output = ExteriorElement<K>;
    fn sub(self, rhs: Self) -> ExteriorElement<K> {
        self + &(-rhs)
    }
}

pub fn wedge<K: Kind>(a: &ExteriorElement<K>, b: &ExteriorElement<K>) -> Result<ExteriorElement<K>> {
    a.wedge(b)
}

pub fn change_frame<K: Kind>(x: &ExteriorElement<K>, target: &Frame) -> Result<ExteriorElement<K>> {
    x.change_frame(target)
}

/// Exterior derivative, returned in the coordinate frame.
pub fn exterior_derivative(w: &DiffForm) -> Result<DiffForm> {
    let w = w.change_frame(&Frame::Coordinate)?;
    let spec = w.spec;
    let n = spec.total_vars();
    let mut out = DiffForm::zero(spec, Frame::Coordinate, w.degree + 1)?;
    for (s, c) in &w.terms {
        for j in 0..n {
            if s.contains(j) {
                continue;
            }
            let dc = c.partial_derivative(j)?;
            if dc.is_zero() {
                continue;
            }
            let signed = if s.count_below(j) % 2 == 1 { -dc } else { dc };
            out.add_term(s.insert(j), signed);
        }
    }
    Ok(out)
}

/// Interior product `ι_w V` of a 1-form with a multivector.
pub fn contract(w: &DiffForm, v: &MultiVector) -> Result<MultiVector> {
    if w.degree != 1 {
        return Err(Error::DegreeMismatch { expected: 1, found: w.degree });
    }
    if v.degree == 0 {
        return Err(Error::ContractDegreeZero);
    }
    w.spec.ensure_same(&v.spec)?;
    let w = w.change_frame(&Frame::Coordinate)?;
    let v = v.change_frame(&Frame::Coordinate)?;
    let pairing: BTreeMap<usize, &LaurentPoly> =
        w.terms.iter().map(|(s, c)| (s.iter().next().expect("degree-one term"), c)).collect();
    let mut out = MultiVector::zero(v.spec, Frame::Coordinate, v.degree - 1)?;
    for (s, c) in &v.terms {
        for k in s.iter() {
            let Some(wk) = pairing.get(&k) else { continue };
            let prod = *wk * c;
            let signed = if s.count_below(k) % 2 == 1 { -prod } else { prod };
            out.add_term(s.remove(k), signed);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, rat};
    use proptest::prelude::*;

    fn spec() -> VarSpec {
        VarSpec::new(4, 2).unwrap()
    }

    fn p(s: &str) -> LaurentPoly {
        LaurentPoly::parse(spec(), s).unwrap()
    }

    fn dx(i: usize) -> DiffForm {
        DiffForm::generator(spec(), Frame::Coordinate, IndexSet::singleton(i)).unwrap()
    }

    fn d_(i: usize) -> MultiVector {
        MultiVector::generator(spec(), Frame::Coordinate, IndexSet::singleton(i)).unwrap()
    }

    fn form(frame: Frame, degree: usize, terms: &[(&[usize], &str)]) -> DiffForm {
        DiffForm::from_terms(
            spec(),
            frame,
            degree,
            terms.iter().map(|(s, c)| (IndexSet::from_sorted(s).unwrap(), p(c))),
        )
        .unwrap()
    }

    fn toric_basis(b12: i64) -> Arc<PhiBasis> {
        // 4 divisor variables, A with a_12 = 1/b, a_34 = 1
        let s = VarSpec::new(4, 4).unwrap();
        let rows = vec![
            vec![int(0), rat(-1, b12), int(0), int(0)],
            vec![rat(1, b12), int(0), int(0), int(0)],
            vec![int(0), int(0), int(0), int(1)],
            vec![int(0), int(0), int(-1), int(0)],
        ];
        Arc::new(PhiBasis::new(PolyMatrix::from_rationals(s, &rows).unwrap()).unwrap())
    }

    #[test]
    fn wedge_examples() {
        let w = dx(0).wedge(&dx(1)).unwrap();
        assert_eq!(w.coefficient(&IndexSet::from_indices([0, 1])), LaurentPoly::one(spec()));
        assert_eq!(dx(1).wedge(&dx(0)).unwrap(), -&w);
        let s = &dx(0) + &dx(1);
        assert!(s.wedge(&s).unwrap().is_zero());
    }

    #[test]
    fn wedge_rejects_frame_mismatch() {
        let eta = DiffForm::generator(spec(), Frame::Log, IndexSet::singleton(0)).unwrap();
        assert!(matches!(dx(1).wedge(&eta), Err(Error::FrameMismatch(_))));
    }

    #[test]
    fn log_frame_conversions() {
        let eta1 = DiffForm::generator(spec(), Frame::Log, IndexSet::singleton(0)).unwrap();
        assert_eq!(eta1.change_frame(&Frame::Coordinate).unwrap(), form(Frame::Coordinate, 1, &[(&[0], "x1^-1")]));
        let v1 = MultiVector::generator(spec(), Frame::Log, IndexSet::singleton(0)).unwrap();
        let expected =
            MultiVector::from_terms(spec(), Frame::Coordinate, 1, [(IndexSet::singleton(0), p("x1"))]).unwrap();
        assert_eq!(v1.change_frame(&Frame::Coordinate).unwrap(), expected);
        // non-divisor generators are untouched
        let eta3 = DiffForm::generator(spec(), Frame::Log, IndexSet::singleton(2)).unwrap();
        assert_eq!(eta3.change_frame(&Frame::Coordinate).unwrap(), dx(2));
    }

    #[test]
    fn multivectors_have_no_phi_frame() {
        let basis = toric_basis(1);
        let s = VarSpec::new(4, 4).unwrap();
        assert!(MultiVector::zero(s, Frame::Phi(basis), 1).is_err());
    }

    #[test]
    fn phi_one_for_a_two_block() {
        // B = A^{-1} has b_12 = b, so φ_1 = b x_1^{-1} x_2^{-1} dx_2
        let basis = toric_basis(5);
        let s = basis.spec();
        assert_eq!(basis.inverse_matrix().get(0, 1).as_constant().unwrap(), int(5));
        let phi1 = basis.phi_one(0).unwrap();
        let expected = DiffForm::from_terms(
            s,
            Frame::Coordinate,
            1,
            [(IndexSet::singleton(1), LaurentPoly::parse(s, "5*x1^-1*x2^-1").unwrap())],
        )
        .unwrap();
        assert_eq!(phi1, expected);
        let gen = DiffForm::generator(s, Frame::Phi(basis.clone()), IndexSet::singleton(0)).unwrap();
        assert_eq!(gen.change_frame(&Frame::Coordinate).unwrap(), expected);
        assert_eq!(expected.change_frame(&Frame::Phi(basis)).unwrap(), gen);
    }

    #[test]
    fn derivative_examples() {
        let w = form(Frame::Coordinate, 1, &[(&[1], "x1")]);
        assert_eq!(exterior_derivative(&w).unwrap(), form(Frame::Coordinate, 2, &[(&[0, 1], "1")]));
        let closed = form(Frame::Coordinate, 1, &[(&[0], "x1^-1")]);
        assert!(exterior_derivative(&closed).unwrap().is_zero());
        let top = form(Frame::Coordinate, 4, &[(&[0, 1, 2, 3], "x1*x3")]);
        assert!(exterior_derivative(&top).unwrap().is_zero());
    }

    #[test]
    fn contraction_examples() {
        let v = d_(0).wedge(&d_(1)).unwrap();
        assert_eq!(contract(&dx(0), &v).unwrap(), d_(1));
        assert!(contract(&dx(2), &v).unwrap().is_zero());
        assert_eq!(contract(&dx(1), &v).unwrap(), -&d_(0));
        let f = MultiVector::function(p("x1"));
        assert!(matches!(contract(&dx(0), &f), Err(Error::ContractDegreeZero)));
    }

    #[test]
    fn json_round_trip() {
        let w = form(Frame::Log, 2, &[(&[0, 2], "3/2*x1^-1 + x4"), (&[1, 3], "-1")]);
        let back = DiffForm::from_json(&w.to_json(), None).unwrap();
        assert_eq!(back, w);
        assert!(MultiVector::from_json(&w.to_json(), None).is_err());
    }

    fn arb_coeff() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((prop::collection::vec(-1i32..3, 4), -3i64..4), 0..3).prop_map(|ts| {
            let s = spec();
            LaurentPoly::from_terms(
                s,
                ts.into_iter().map(|(mut e, c)| {
                    e[2] = e[2].abs();
                    e[3] = e[3].abs();
                    (Monomial::from_exponents(e), int(c))
                }),
            )
            .unwrap()
        })
    }

    fn arb_form(degree: usize) -> impl Strategy<Value = DiffForm> {
        let sets = IndexSet::subsets(4, degree);
        prop::collection::vec(arb_coeff(), sets.len()).prop_map(move |cs| {
            DiffForm::from_terms(spec(), Frame::Coordinate, degree, sets.iter().copied().zip(cs)).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn wedge_graded_commutative(a in arb_form(1), b in arb_form(2)) {
            let ab = a.wedge(&b).unwrap();
            let ba = b.wedge(&a).unwrap();
            // (-1)^{1*2} = 1
            prop_assert_eq!(ab, ba);
            let aa = a.wedge(&a).unwrap();
            prop_assert!(aa.is_zero());
        }

        #[test]
        fn wedge_associative(a in arb_form(1), b in arb_form(1), c in arb_form(1)) {
            let l = a.wedge(&b).unwrap().wedge(&c).unwrap();
            let r = a.wedge(&b.wedge(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn d_squared_vanishes(a in arb_form(1), b in arb_form(2)) {
            prop_assert!(exterior_derivative(&exterior_derivative(&a).unwrap()).unwrap().is_zero());
            prop_assert!(exterior_derivative(&exterior_derivative(&b).unwrap()).unwrap().is_zero());
        }

        #[test]
        fn leibniz(a in arb_form(1), b in arb_form(1)) {
            let lhs = exterior_derivative(&a.wedge(&b).unwrap()).unwrap();
            let rhs = &exterior_derivative(&a).unwrap().wedge(&b).unwrap()
                - &a.wedge(&exterior_derivative(&b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn log_round_trip(a in arb_form(2)) {
            let back = a.change_frame(&Frame::Log).unwrap().change_frame(&Frame::Coordinate).unwrap();
            prop_assert_eq!(&back, &a);
            let log = a.change_frame(&Frame::Log).unwrap();
            prop_assert_eq!(log.change_frame(&Frame::Coordinate).unwrap().change_frame(&Frame::Log).unwrap(), log);
        }
    }
}
