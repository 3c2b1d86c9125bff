//! Weight-sliced complexes: the log complex, the log-plus complex, the
//! multivector complexes with differential `[·, Π]`, the graded pieces `Q_I`
//! of the filtration of the log-plus complex, and exact rank computations on
//! every slice.
//!
//! Basis elements are `x^e · g_K` for a frame generator `g_K` and `e ≥ 0`.
//! Their weight is `deg(e) + Σ_{k∈K} w(k)` where the generator weights are
//!
//! | frame            | divisor `k` | other `k` |
//! |------------------|-------------|-----------|
//! | `η_k`, `v_k`     | 0           | 1         |
//! | `φ_k`, `∂_k`     | −1          | 1         |
//!
//! Every differential preserves weight, so each slice is finite-dimensional.
//! Differentials are computed on honest representatives (coordinate-frame
//! forms with Laurent coefficients, or Schouten brackets) and then read back
//! in the target basis; nothing is transcribed from closed formulas.
//!
//! Filtration of the log-plus complex: since `x_k φ_k = π♭(v_k)` is a log
//! form, the element `x^e φ_K` lies in `F_i` for `i` its *level*
//! `|(K ∩ D) ∖ supp(e)|`, and its *type* is the set `(K ∩ D) ∖ supp(e)`.
//! `Q_I` has basis the elements of type `I`; its differential keeps the type-`I`
//! components of `d` and drops those of lower level.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::RangeInclusive;
use std::sync::Arc;

use num::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{exterior_derivative, DiffForm, Frame, MultiVector, PhiBasis};
use crate::index_set::IndexSet;
use crate::linalg::{solve_in_span, SparseMatrix, SparseVec};
use crate::poisson::{log_matrix, schouten, PoissonStructure};
use crate::ring::{monomials_of_degree, LaurentPoly, Monomial, Rational, VarSpec};

/// `x^monomial · g_index` in whatever frame the owning complex uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisElement {
    pub index: IndexSet,
    pub monomial: Monomial,
}

impl BasisElement {
    pub fn new(monomial: Monomial, index: IndexSet) -> Self {
        BasisElement { index, monomial }
    }
}

impl std::fmt::Display for BasisElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let e: Vec<String> = self.monomial.exponents().iter().map(|x| x.to_string()).collect();
        write!(f, "x^({})·{}", e.join(","), self.index)
    }
}

type Image = Vec<(BasisElement, Rational)>;

/// Finite sequence of free modules sliced by weight, with exact rational
/// differentials (image-as-row matrices) on every slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSlicedComplex {
    id: String,
    weight_cap: i64,
    min_degree: usize,
    max_degree: usize,
    bases: BTreeMap<(usize, i64), Vec<BasisElement>>,
    differentials: BTreeMap<(usize, i64), SparseMatrix>,
}

impl WeightSlicedComplex {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn weight_cap(&self) -> i64 {
        self.weight_cap
    }

    /// Lowest degree with a (possibly empty) module.
    pub fn min_degree(&self) -> usize {
        self.min_degree
    }

    /// Highest degree whose outgoing differential is known.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn weights(&self) -> BTreeSet<i64> {
        self.bases.keys().map(|(_, w)| *w).collect()
    }

    pub fn basis(&self, degree: usize, weight: i64) -> &[BasisElement] {
        self.bases.get(&(degree, weight)).map_or(&[], Vec::as_slice)
    }

    pub fn dim(&self, degree: usize, weight: i64) -> usize {
        self.basis(degree, weight).len()
    }

    /// Total dimension in one degree, summed over weights.
    pub fn total_dim(&self, degree: usize) -> usize {
        self.bases.iter().filter(|((d, _), _)| *d == degree).map(|(_, v)| v.len()).sum()
    }

    /// Differential from `(degree, weight)` to `(degree + 1, weight)`.
    pub fn differential(&self, degree: usize, weight: i64) -> SparseMatrix {
        self.differentials
            .get(&(degree, weight))
            .cloned()
            .unwrap_or_else(|| SparseMatrix::zero(self.dim(degree, weight), self.dim(degree + 1, weight)))
    }

    fn rank(&self, degree: usize, weight: i64) -> usize {
        self.differentials.get(&(degree, weight)).map_or(0, SparseMatrix::rank)
    }

    /// `d ∘ d = 0` on every slice where both differentials are known.
    pub fn d_squared_vanishes(&self) -> bool {
        self.differentials.iter().all(|((k, w), d)| match self.differentials.get(&(k + 1, *w)) {
            Some(next) => d.then(next).is_zero(),
            None => true,
        })
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.max_degree {
            return Err(Error::Unsupported(format!(
                "cohomology in degree {degree} needs the differential out of it; built up to {}",
                self.max_degree
            )));
        }
        Ok(())
    }

    /// `dim ker d_k − rank d_{k−1}` per weight with a nonempty slice.
    pub fn cohomology_dims(&self, degree: usize) -> Result<BTreeMap<i64, usize>> {
        self.check_degree(degree)?;
        let mut out = BTreeMap::new();
        for ((k, w), basis) in &self.bases {
            if *k != degree || basis.is_empty() {
                continue;
            }
            let incoming = if degree == 0 { 0 } else { self.rank(degree - 1, *w) };
            out.insert(*w, basis.len() - self.rank(degree, *w) - incoming);
        }
        Ok(out)
    }

    /// Same numbers as [`cohomology_dims`](Self::cohomology_dims), with ranks
    /// taken by column elimination instead of row elimination.
    pub fn cohomology_dims_by_columns(&self, degree: usize) -> Result<BTreeMap<i64, usize>> {
        self.check_degree(degree)?;
        let rank = |k: usize, w: i64| self.differentials.get(&(k, w)).map_or(0, SparseMatrix::rank_by_columns);
        let mut out = BTreeMap::new();
        for ((k, w), basis) in &self.bases {
            if *k != degree || basis.is_empty() {
                continue;
            }
            let incoming = if degree == 0 { 0 } else { rank(degree - 1, *w) };
            out.insert(*w, basis.len() - rank(degree, *w) - incoming);
        }
        Ok(out)
    }
}

pub fn cohomology_dims(c: &WeightSlicedComplex, degree: usize) -> Result<BTreeMap<i64, usize>> {
    c.cohomology_dims(degree)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohomologyRow {
    pub degree: usize,
    pub weight: i64,
    pub dim_cohomology: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactnessReport {
    pub complex_id: String,
    pub weight_cap: i64,
    pub table: Vec<CohomologyRow>,
    /// `"exact"` iff every entry of the table is zero.
    pub verdict: String,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.verdict == "exact"
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Cohomology table over `degrees` (clipped to the degrees present).
pub fn verify_exactness(c: &WeightSlicedComplex, degrees: RangeInclusive<usize>) -> Result<ExactnessReport> {
    let lo = (*degrees.start()).max(c.min_degree);
    let hi = (*degrees.end()).min(c.max_degree);
    let mut table = Vec::new();
    for k in lo..=hi {
        for (w, dim) in c.cohomology_dims(k)? {
            table.push(CohomologyRow { degree: k, weight: w, dim_cohomology: dim });
        }
    }
    let exact = table.iter().all(|r| r.dim_cohomology == 0);
    Ok(ExactnessReport {
        complex_id: c.id.clone(),
        weight_cap: c.weight_cap,
        table,
        verdict: if exact { "exact".into() } else { "not exact".into() },
    })
}

// ---------------------------------------------------------------------------
// realizations

/// How a basis element is realized and how its differential is computed.
enum Realization {
    /// `x^e η_K`, exterior derivative.
    LogForms,
    /// `x^e φ_K`, exterior derivative.
    PhiForms(Arc<PhiBasis>),
    /// `x^e π♭(v_K) = x^{e + 1_{K∩D}} φ_K`, exterior derivative.
    FlatLogForms(Arc<PhiBasis>),
    /// `x^e ∂_K`, bracket with the bivector.
    Multivectors(MultiVector),
    /// `x^e v_K`, bracket with the bivector.
    LogMultivectors(MultiVector),
}

fn divisor_part(spec: &VarSpec, k: &IndexSet) -> IndexSet {
    k.intersection(&IndexSet::full(spec.divisor_vars()))
}

fn indicator(spec: &VarSpec, set: &IndexSet) -> Monomial {
    Monomial::from_exponents((0..spec.total_vars()).map(|i| i32::from(set.contains(i))).collect())
}

/// Expand coefficients into `(x^e, g_K)` pairs; exponents must be `≥ 0`.
fn expand<K: crate::exterior::Kind>(x: &crate::exterior::ExteriorElement<K>) -> Result<Image> {
    let mut out = Vec::new();
    for (k, c) in x.terms() {
        for (m, v) in c.terms() {
            if let Some(i) = m.has_negative() {
                return Err(Error::Projection(format!(
                    "coefficient {c} of {k} has a pole along x{}",
                    i + 1
                )));
            }
            out.push((BasisElement::new(m.clone(), *k), v.clone()));
        }
    }
    Ok(out)
}

impl Realization {
    /// Weight of the generator `k`.
    fn generator_weight(&self, spec: &VarSpec, k: usize) -> i64 {
        let log_like = matches!(self, Realization::LogForms | Realization::FlatLogForms(_) | Realization::LogMultivectors(_));
        match (log_like, spec.is_divisor(k)) {
            (true, true) => 0,
            (false, true) => -1,
            (_, false) => 1,
        }
    }

    fn weight(&self, spec: &VarSpec, el: &BasisElement) -> i64 {
        el.monomial.degree() + el.index.iter().map(|k| self.generator_weight(spec, k)).sum::<i64>()
    }

    fn image(&self, spec: VarSpec, el: &BasisElement) -> Result<Image> {
        let coeff = LaurentPoly::monomial(spec, el.monomial.exponents().to_vec(), Rational::one())?;
        let term = [(el.index, coeff)];
        match self {
            Realization::LogForms => {
                let w = DiffForm::from_terms(spec, Frame::Log, el.index.len(), term)?;
                expand(&exterior_derivative(&w)?.change_frame(&Frame::Log)?)
            }
            Realization::PhiForms(basis) => {
                let frame = Frame::Phi(basis.clone());
                let w = DiffForm::from_terms(spec, frame.clone(), el.index.len(), term)?;
                expand(&exterior_derivative(&w)?.change_frame(&frame)?)
            }
            Realization::FlatLogForms(basis) => {
                let frame = Frame::Phi(basis.clone());
                let lifted = term.map(|(k, c)| {
                    let m = indicator(&spec, &divisor_part(&spec, &k));
                    (k, c.mul_monomial(&m).expect("positive exponents"))
                });
                let w = DiffForm::from_terms(spec, frame.clone(), el.index.len(), lifted)?;
                let dw = exterior_derivative(&w)?.change_frame(&frame)?;
                let mut out = Vec::new();
                for (b, v) in expand(&dw)? {
                    let m = b.monomial.div(&indicator(&spec, &divisor_part(&spec, &b.index)));
                    if m.has_negative().is_some() {
                        return Err(Error::Projection(format!("{b} is not a log form")));
                    }
                    out.push((BasisElement::new(m, b.index), v));
                }
                Ok(out)
            }
            Realization::Multivectors(pi) => {
                let v = MultiVector::from_terms(spec, Frame::Coordinate, el.index.len(), term)?;
                expand(&schouten(&v, pi)?)
            }
            Realization::LogMultivectors(pi) => {
                let v = MultiVector::from_terms(spec, Frame::Log, el.index.len(), term)?;
                expand(&schouten(&v, pi)?.change_frame(&Frame::Log)?)
            }
        }
    }
}

/// Filter on basis elements and projection applied to images.
struct Selection<'a> {
    keep: &'a dyn Fn(&BasisElement) -> bool,
    /// `Ok(None)` drops a term of the image.
    project: &'a dyn Fn(&BasisElement) -> Result<Option<()>>,
}

const KEEP_ALL: Selection<'static> = Selection { keep: &|_| true, project: &|_| Ok(Some(())) };

#[allow(clippy::too_many_arguments)]
fn assemble(
    id: String,
    spec: VarSpec,
    realization: &Realization,
    weight_cap: i64,
    min_degree: usize,
    max_degree: usize,
    selection: &Selection<'_>,
) -> Result<WeightSlicedComplex> {
    let n = spec.total_vars();
    let max_degree = max_degree.min(n);
    let top = (max_degree + 1).min(n);
    let mut bases: BTreeMap<(usize, i64), Vec<BasisElement>> = BTreeMap::new();
    for k in min_degree..=top {
        for set in IndexSet::subsets(n, k) {
            let base: i64 = set.iter().map(|i| realization.generator_weight(&spec, i)).sum();
            for d in 0..=(weight_cap - base).max(-1) {
                for m in monomials_of_degree(n, d) {
                    let el = BasisElement::new(m, set);
                    if (selection.keep)(&el) {
                        bases.entry((k, base + d)).or_default().push(el);
                    }
                }
            }
        }
    }
    for v in bases.values_mut() {
        v.sort();
    }
    let index: HashMap<(usize, i64), HashMap<&BasisElement, usize>> = bases
        .iter()
        .map(|(key, v)| (*key, v.iter().enumerate().map(|(i, e)| (e, i)).collect()))
        .collect();
    let mut differentials = BTreeMap::new();
    for ((k, w), basis) in &bases {
        if *k > max_degree || *k + 1 > n {
            continue;
        }
        let target = index.get(&(k + 1, *w));
        let ncols = bases.get(&(k + 1, *w)).map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(basis.len());
        for el in basis {
            let mut row = SparseVec::new();
            for (img, c) in realization.image(spec, el)? {
                if (selection.project)(&img)?.is_none() {
                    continue;
                }
                let iw = realization.weight(&spec, &img);
                if iw != *w {
                    return Err(Error::GradingViolation(format!("d({el}) has a term {img} of weight {iw} != {w}")));
                }
                let Some(&j) = target.and_then(|t| t.get(&img)) else {
                    return Err(Error::GradingViolation(format!("d({el}) leaves the basis at {img}")));
                };
                let entry = row.entry(j).or_insert_with(Rational::zero);
                *entry += c;
                if entry.is_zero() {
                    row.remove(&j);
                }
            }
            rows.push(row);
        }
        differentials.insert((*k, *w), SparseMatrix::from_rows(ncols, rows));
    }
    Ok(WeightSlicedComplex { id, weight_cap, min_degree, max_degree, bases, differentials })
}

/// `(Ω•(log D), d)` on the basis `x^e η_K`, weights `≤ weight_cap`,
/// differentials out of degrees `≤ max_degree`.
pub fn build_log_complex(spec: VarSpec, weight_cap: i64, max_degree: usize) -> Result<WeightSlicedComplex> {
    assemble(format!("log[{spec}]"), spec, &Realization::LogForms, weight_cap, 0, max_degree, &KEEP_ALL)
}

/// The log matrix, checked to be constant and block-diagonal with respect to
/// divisor and non-divisor coordinates (the grading needs both).
fn graded_phi_basis(p: &PoissonStructure) -> Result<Arc<PhiBasis>> {
    let a = log_matrix(p)?;
    let spec = p.spec();
    let values = a
        .constant_values()
        .map_err(|_| Error::Unsupported("log-plus complexes need a constant log matrix".into()))?;
    let n = spec.total_vars();
    for i in 0..n {
        for j in 0..n {
            if spec.is_divisor(i) != spec.is_divisor(j) && !values[i][j].is_zero() {
                return Err(Error::Unsupported(format!(
                    "log matrix couples divisor x{} with non-divisor x{}; no weight grading",
                    i.min(j) + 1,
                    i.max(j) + 1
                )));
            }
        }
    }
    Ok(Arc::new(PhiBasis::new(a.matrix().clone())?))
}

/// `(Ω•(log⁺D), d)` on the basis `x^e φ_K`.
pub fn build_logplus_complex(p: &PoissonStructure, weight_cap: i64, max_degree: usize) -> Result<WeightSlicedComplex> {
    let basis = graded_phi_basis(p)?;
    assemble("logplus".into(), p.spec(), &Realization::PhiForms(basis), weight_cap, 0, max_degree, &KEEP_ALL)
}

/// `(∧•T, [·, Π])` on the basis `x^e ∂_K`; indexed like the log-plus complex.
pub fn build_multivector_complex(p: &PoissonStructure, weight_cap: i64, max_degree: usize) -> Result<WeightSlicedComplex> {
    graded_phi_basis(p)?;
    let r = Realization::Multivectors(p.bivector().clone());
    assemble("multivector".into(), p.spec(), &r, weight_cap, 0, max_degree, &KEEP_ALL)
}

/// `(∧•T(−log D), [·, Π])` on the basis `x^e v_K`.
pub fn build_log_multivector_complex(p: &PoissonStructure, weight_cap: i64, max_degree: usize) -> Result<WeightSlicedComplex> {
    graded_phi_basis(p)?;
    let r = Realization::LogMultivectors(p.bivector().clone());
    assemble("log-multivector".into(), p.spec(), &r, weight_cap, 0, max_degree, &KEEP_ALL)
}

/// `(Ω•(log D), d)` on the basis `x^e π♭(v_K)`; indexed like
/// [`build_log_multivector_complex`].
pub fn build_flat_log_complex(p: &PoissonStructure, weight_cap: i64, max_degree: usize) -> Result<WeightSlicedComplex> {
    let basis = graded_phi_basis(p)?;
    let r = Realization::FlatLogForms(basis);
    assemble("log-flat".into(), p.spec(), &r, weight_cap, 0, max_degree, &KEEP_ALL)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugationReport {
    pub bases_match: bool,
    pub slices_compared: usize,
    /// `(degree, weight)` slices whose matrices differ.
    pub mismatches: Vec<(usize, i64)>,
    pub verdict: bool,
}

/// Compares two complexes indexed by the same basis enumeration.
pub fn compare_complexes(a: &WeightSlicedComplex, b: &WeightSlicedComplex) -> ConjugationReport {
    let bases_match = a.bases == b.bases;
    let mut mismatches = Vec::new();
    let mut slices = 0;
    let keys: BTreeSet<(usize, i64)> = a.differentials.keys().chain(b.differentials.keys()).copied().collect();
    for (k, w) in keys {
        slices += 1;
        if a.differential(k, w) != b.differential(k, w) {
            mismatches.push((k, w));
        }
    }
    let verdict = bases_match && mismatches.is_empty();
    ConjugationReport { bases_match, slices_compared: slices, mismatches, verdict }
}

/// `π♭` intertwines `[·, Π]` with `d`, on the full and the log complexes.
pub fn check_conjugation(p: &PoissonStructure, weight_cap: i64, max_degree: usize) -> Result<(ConjugationReport, ConjugationReport)> {
    let full = compare_complexes(
        &build_multivector_complex(p, weight_cap, max_degree)?,
        &build_logplus_complex(p, weight_cap, max_degree)?,
    );
    let log = compare_complexes(
        &build_log_multivector_complex(p, weight_cap, max_degree)?,
        &build_flat_log_complex(p, weight_cap, max_degree)?,
    );
    Ok((full, log))
}

// ---------------------------------------------------------------------------
// filtration and graded pieces

/// `(K ∩ D) ∖ supp(e)` for `x^e φ_K`.
pub fn phi_type(spec: &VarSpec, el: &BasisElement) -> IndexSet {
    let support = IndexSet::from_indices(el.monomial.support());
    divisor_part(spec, &el.index).difference(&support)
}

/// Filtration level `|phi_type|`.
pub fn phi_level(spec: &VarSpec, el: &BasisElement) -> usize {
    phi_type(spec, el).len()
}

/// Rank report for the pieces `φ_I ∧ η_J ∧ Ω^{k−|J|}_{D_I}(log)` of
/// `Q_I^{|I|+k}` in one weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionRow {
    pub degree: usize,
    pub weight: i64,
    /// `(J as 1-based list, rank of its image in Q_I)`.
    pub components: Vec<(Vec<usize>, usize)>,
    pub sum_of_ranks: usize,
    pub rank_of_union: usize,
    pub dim: usize,
    /// Sum of the component images is direct.
    pub direct: bool,
    /// The components span the slice.
    pub spans: bool,
}

#[derive(Debug, Clone)]
pub struct GradedPieceQI {
    pub index: IndexSet,
    pub complex: WeightSlicedComplex,
    pub decomposition: Vec<DecompositionRow>,
}

fn check_qi_index(spec: &VarSpec, set: IndexSet) -> Result<()> {
    if set.is_empty() || !set.is_subset(&IndexSet::full(spec.divisor_vars())) {
        return Err(Error::Unsupported(format!(
            "{set} must be a nonempty set of divisor indices (1..={})",
            spec.divisor_vars()
        )));
    }
    Ok(())
}

/// Projection onto `Q_I`: keep type `I`, drop lower levels.
fn qi_projection(spec: VarSpec, set: IndexSet) -> impl Fn(&BasisElement) -> Result<Option<()>> {
    move |el: &BasisElement| {
        let t = phi_type(&spec, el);
        if t == set {
            Ok(Some(()))
        } else if t.len() < set.len() {
            Ok(None)
        } else {
            Err(Error::Projection(format!("term {el} of type {t} appears in the differential of Q_{set}")))
        }
    }
}

/// The graded piece `Q_I` of the filtered log-plus complex.
pub fn build_qi(p: &PoissonStructure, set: IndexSet, weight_cap: i64, max_degree: usize) -> Result<GradedPieceQI> {
    let spec = p.spec();
    check_qi_index(&spec, set)?;
    let basis = graded_phi_basis(p)?;
    let keep = move |el: &BasisElement| phi_type(&spec, el) == set && set.is_subset(&el.index);
    let project = qi_projection(spec, set);
    let selection = Selection { keep: &keep, project: &project };
    let complex = assemble(
        format!("Q_{set}"),
        spec,
        &Realization::PhiForms(basis.clone()),
        weight_cap,
        set.len(),
        max_degree,
        &selection,
    )?;
    let decomposition = decompose_qi(&basis, set, &complex)?;
    Ok(GradedPieceQI { index: set, complex, decomposition })
}

/// Phi-frame expansion of `x^e η_L` (coordinate `e`), cached by `L`.
struct EtaCache {
    frame: Frame,
    spec: VarSpec,
    cache: HashMap<IndexSet, DiffForm>,
}

impl EtaCache {
    fn new(basis: &Arc<PhiBasis>) -> Self {
        EtaCache { frame: Frame::Phi(basis.clone()), spec: basis.spec(), cache: HashMap::new() }
    }

    fn eta(&mut self, set: IndexSet) -> Result<DiffForm> {
        if let Some(x) = self.cache.get(&set) {
            return Ok(x.clone());
        }
        let x = DiffForm::generator(self.spec, Frame::Log, set)?.change_frame(&self.frame)?;
        self.cache.insert(set, x.clone());
        Ok(x)
    }

    /// `x^e φ_J ∧ η_L` in the phi frame.
    fn product(&mut self, e: &Monomial, phi: IndexSet, eta: IndexSet) -> Result<DiffForm> {
        let coeff = LaurentPoly::monomial(self.spec, e.exponents().to_vec(), Rational::one())?;
        let phi = DiffForm::from_terms(self.spec, self.frame.clone(), phi.len(), [(phi, coeff)])?;
        phi.wedge(&self.eta(eta)?)
    }
}

fn to_row(image: &Image, keys: &mut HashMap<BasisElement, usize>) -> SparseVec {
    let mut row = SparseVec::new();
    for (el, c) in image {
        let next = keys.len();
        let j = *keys.entry(el.clone()).or_insert(next);
        let entry = row.entry(j).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            row.remove(&j);
        }
    }
    row
}

fn rank_of(rows: &[SparseVec], ncols: usize) -> usize {
    SparseMatrix::from_rows(ncols, rows.to_vec()).rank()
}

fn decompose_qi(basis: &Arc<PhiBasis>, set: IndexSet, q: &WeightSlicedComplex) -> Result<Vec<DecompositionRow>> {
    let spec = basis.spec();
    let n = spec.total_vars();
    let mut etas = EtaCache::new(basis);
    let project = qi_projection(spec, set);
    let complement: Vec<usize> = (0..n).filter(|i| !set.contains(*i)).collect();
    let sigma_i = -(set.len() as i64);
    let mut out = Vec::new();
    for k in 0..=(q.max_degree.saturating_sub(set.len())) {
        let degree = set.len() + k;
        for w in q.weights() {
            let dim = q.dim(degree, w);
            let mut keys: HashMap<BasisElement, usize> =
                q.basis(degree, w).iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
            let mut components = Vec::new();
            let mut all_rows = Vec::new();
            let mut sum = 0;
            for js in (0..=k.min(set.len())).flat_map(|j| IndexSet::subsets(n, j).into_iter().filter(|s| s.is_subset(&set))) {
                let mut rows = Vec::new();
                for l in complement.iter().copied().combinations_vec(k - js.len()) {
                    let l = IndexSet::from_indices(l);
                    let tau: i64 = l.iter().map(|i| i64::from(!spec.is_divisor(i))).sum();
                    let d = w - sigma_i - tau;
                    if d < 0 {
                        continue;
                    }
                    for e in monomials_of_degree(n, d) {
                        if e.support().any(|i| set.contains(i)) {
                            continue;
                        }
                        let form = etas.product(&e, set, js.union(&l))?;
                        let mut image = Vec::new();
                        for (el, c) in expand(&form)? {
                            if project(&el)?.is_some() {
                                image.push((el, c));
                            }
                        }
                        rows.push(to_row(&image, &mut keys));
                    }
                }
                let r = rank_of(&rows, keys.len());
                sum += r;
                components.push((js.iter().map(|i| i + 1).collect::<Vec<_>>(), r));
                all_rows.extend(rows);
            }
            if dim == 0 && all_rows.is_empty() {
                continue;
            }
            let union = rank_of(&all_rows, keys.len());
            out.push(DecompositionRow {
                degree,
                weight: w,
                components,
                sum_of_ranks: sum,
                rank_of_union: union,
                dim,
                direct: sum == union,
                spans: union == dim && keys.len() == dim,
            });
        }
    }
    Ok(out)
}

trait CombinationsVec {
    fn combinations_vec(self, k: usize) -> Vec<Vec<usize>>;
}

impl<I: Iterator<Item = usize>> CombinationsVec for I {
    fn combinations_vec(self, k: usize) -> Vec<Vec<usize>> {
        use itertools::Itertools;
        self.combinations(k).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiltrationRow {
    pub level: usize,
    pub degree: usize,
    pub weight: i64,
    /// Rank of the generators `x^e φ_J ∧ η_L`, `|J| ≤ level`.
    pub dim_f: usize,
    /// Number of basis elements of level `≤ level`.
    pub dim_levels: usize,
    /// `Σ_{|I| = level} dim Q_I` in this slice.
    pub sum_qi: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiltrationReport {
    pub rows: Vec<FiltrationRow>,
    /// `dim F_i = #{level ≤ i}` everywhere, so `F_i/F_{i−1} = ⊕_{|I|=i} Q_I`.
    pub graded_pieces_match: bool,
    /// `x_r φ_I ∈ F_{|I|−1}` for every tested `I` and `r ∈ I`.
    pub annihilators_hold: bool,
}

/// Computes `dim F_i` per slice from generators and compares with the level
/// counts of the phi basis and with `Σ dim Q_I`.
pub fn filtration_report(p: &PoissonStructure, weight_cap: i64, max_degree: usize) -> Result<FiltrationReport> {
    let spec = p.spec();
    let basis = graded_phi_basis(p)?;
    let plus = build_logplus_complex(p, weight_cap, max_degree)?;
    let n = spec.total_vars();
    let m = spec.divisor_vars();
    let r = Realization::PhiForms(basis.clone());
    let mut etas = EtaCache::new(&basis);
    let mut rows = Vec::new();
    let mut annihilators_hold = true;
    let top = (max_degree + 1).min(n);
    for degree in 0..=top {
        for w in plus.weights() {
            let slice = plus.basis(degree, w);
            if slice.is_empty() {
                continue;
            }
            let mut keys: HashMap<BasisElement, usize> = slice.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
            // generators grouped by |J|
            let mut by_level: Vec<Vec<SparseVec>> = vec![Vec::new(); m.min(degree) + 1];
            for j in 0..=m.min(degree) {
                for js in IndexSet::subsets(m, j) {
                    for l in IndexSet::subsets(n, degree - j) {
                        let base: i64 = js.iter().map(|i| r.generator_weight(&spec, i)).sum::<i64>()
                            + l.iter().map(|i| i64::from(!spec.is_divisor(i))).sum::<i64>();
                        let d = w - base;
                        if d < 0 {
                            continue;
                        }
                        for e in monomials_of_degree(n, d) {
                            let form = etas.product(&e, js, l)?;
                            by_level[j].push(to_row(&expand(&form)?, &mut keys));
                        }
                    }
                }
            }
            let mut acc: Vec<SparseVec> = Vec::new();
            for level in 0..=m.min(degree) {
                acc.extend(by_level[level].iter().cloned());
                let dim_f = rank_of(&acc, keys.len());
                let dim_levels = slice.iter().filter(|e| phi_level(&spec, e) <= level).count();
                let sum_qi = slice.iter().filter(|e| phi_level(&spec, e) == level).count();
                rows.push(FiltrationRow { level, degree, weight: w, dim_f, dim_levels, sum_qi });
                // x_r φ_I for |I| = level + 1 lies in F_level
                if level < m.min(degree) && degree == level + 1 {
                    for set in IndexSet::subsets(m, level + 1) {
                        for rr in set.iter() {
                            let el = BasisElement::new(Monomial::var(n, rr), set);
                            if r.weight(&spec, &el) != w {
                                continue;
                            }
                            let mut with = acc.clone();
                            with.push(to_row(&vec![(el, Rational::one())], &mut keys));
                            if rank_of(&with, keys.len()) != dim_f {
                                annihilators_hold = false;
                            }
                        }
                    }
                }
            }
        }
    }
    // Σ_{|I|=i} dim Q_I, computed from the Q_I complexes themselves
    let mut q_dims: BTreeMap<(usize, usize, i64), usize> = BTreeMap::new();
    for level in 1..=m {
        for set in IndexSet::subsets(m, level) {
            if set.len() > top {
                continue;
            }
            let q = build_qi(p, set, weight_cap, max_degree)?;
            for ((k, w), b) in &q.complex.bases {
                *q_dims.entry((level, *k, *w)).or_default() += b.len();
            }
        }
    }
    for row in &mut rows {
        if row.level > 0 {
            row.sum_qi = q_dims.get(&(row.level, row.degree, row.weight)).copied().unwrap_or(0);
        }
    }
    let graded_pieces_match = rows.iter().all(|r| r.dim_f == r.dim_levels)
        && rows.iter().all(|r| {
            let below = if r.level == 0 {
                0
            } else {
                rows.iter()
                    .find(|s| s.level + 1 == r.level && s.degree == r.degree && s.weight == r.weight)
                    .map_or(0, |s| s.dim_f)
            };
            r.dim_f - below == r.sum_qi
        });
    Ok(FiltrationReport { rows, graded_pieces_match, annihilators_hold })
}

/// Coefficients `s_j` in `dφ_I = Σ_j s_j η_{i_j} ∧ φ_I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DphiSigns {
    /// 1-based indices of `I`.
    pub index: Vec<usize>,
    /// `None` when `dφ_I` is not of that shape.
    pub coefficients: Option<Vec<String>>,
}

/// Solves for the coefficients of `dφ_I` on `η_{i_j} ∧ φ_I`, all computed in
/// the coordinate frame.
pub fn dphi_signs(p: &PoissonStructure, set: IndexSet) -> Result<DphiSigns> {
    let spec = p.spec();
    let basis = Arc::new(PhiBasis::new(log_matrix(p)?.matrix().clone())?);
    let phi = basis.phi(set)?;
    let dphi = exterior_derivative(&phi)?;
    let mut keys = HashMap::new();
    let flat = |x: &DiffForm, keys: &mut HashMap<(IndexSet, Monomial), usize>| -> SparseVec {
        let mut row = SparseVec::new();
        for (k, c) in x.terms() {
            for (m, v) in c.terms() {
                let next = keys.len();
                let j = *keys.entry((*k, m.clone())).or_insert(next);
                row.insert(j, v.clone());
            }
        }
        row
    };
    let mut columns = Vec::new();
    for i in set.iter() {
        let eta = DiffForm::generator(spec, Frame::Log, IndexSet::singleton(i))?.change_frame(&Frame::Coordinate)?;
        columns.push(flat(&eta.wedge(&phi)?, &mut keys));
    }
    let target = flat(&dphi, &mut keys);
    let coefficients = solve_in_span(&columns, &target).map(|(x, _)| x.iter().map(ToString::to_string).collect());
    Ok(DphiSigns { index: set.iter().map(|i| i + 1).collect(), coefficients })
}

impl GradedPieceQI {
    pub fn to_json(&self) -> Value {
        json!({
            "index": self.index.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "complex_id": self.complex.id(),
            "decomposition": self.decomposition,
        })
    }
}
