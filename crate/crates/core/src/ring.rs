//! Exact scalars and sparse Laurent polynomials.
//!
//! A [`LaurentPoly`] lives in `Q[x_1^{±1}, .., x_m^{±1}, x_{m+1}, .., x_{2n}]`:
//! the first `m` variables are local equations of the divisor components and
//! may carry negative exponents; the remaining ones may not. Terms are kept in
//! a `BTreeMap` keyed by exponent vector, so equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar, always reduced with positive denominator.
pub type Rational = num::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Layout of the local coordinates: `total_vars = 2n`, the first
/// `divisor_vars` of which cut out the divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSpec {
    total_vars: usize,
    divisor_vars: usize,
}

impl VarSpec {
    pub fn new(total_vars: usize, divisor_vars: usize) -> Result<Self> {
        if total_vars < 2 || !total_vars.is_multiple_of(2) {
            return Err(Error::InvalidVarSpec(format!(
                "total variable count {total_vars} must be even and at least 2"
            )));
        }
        if total_vars > 32 {
            return Err(Error::InvalidVarSpec(format!(
                "total variable count {total_vars} exceeds the supported maximum 32"
            )));
        }
        if divisor_vars > total_vars {
            return Err(Error::InvalidVarSpec(format!(
                "{divisor_vars} divisor variables but only {total_vars} variables"
            )));
        }
        Ok(VarSpec { total_vars, divisor_vars })
    }

    pub fn total_vars(&self) -> usize {
        self.total_vars
    }

    pub fn divisor_vars(&self) -> usize {
        self.divisor_vars
    }

    /// Half-dimension `n`.
    pub fn half_dim(&self) -> usize {
        self.total_vars / 2
    }

    pub fn is_divisor(&self, i: usize) -> bool {
        i < self.divisor_vars
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.total_vars {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, total: self.total_vars })
        }
    }

    pub fn ensure_same(&self, other: &VarSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::VarSpecMismatch { left: self.to_string(), right: other.to_string() })
        }
    }
}

impl fmt::Display for VarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vars ({} divisor)", self.total_vars, self.divisor_vars)
    }
}

/// Exponent vector of a Laurent monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<i32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn from_exponents(exps: Vec<i32>) -> Self {
        Monomial(exps)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[i32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> i32 {
        self.0[i]
    }

    /// Total degree (sum of exponents, negative ones included).
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn has_negative(&self) -> Option<usize> {
        self.0.iter().position(|&e| e < 0)
    }

    /// Indices with a strictly positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i)
    }

    fn check(&self, spec: &VarSpec) -> Result<()> {
        if self.0.len() != spec.total_vars() {
            return Err(Error::InvalidVarSpec(format!(
                "exponent vector of length {} for {}",
                self.0.len(),
                spec
            )));
        }
        for (i, &e) in self.0.iter().enumerate() {
            if e < 0 && !spec.is_divisor(i) {
                return Err(Error::PoleOutsideDivisor(i + 1));
            }
        }
        Ok(())
    }
}

/// Grading used throughout the complexes: total polynomial degree of the
/// coefficient plus the weight carried by the frame element (`dx_i` counts 1,
/// `dx_i/x_i` counts 0).
pub fn weight(monomial: &Monomial, frame_weight: i64) -> i64 {
    monomial.degree() + frame_weight
}

/// All exponent vectors `e >= 0` in `nvars` variables with `|e| = degree`.
pub fn monomials_of_degree(nvars: usize, degree: i64) -> Vec<Monomial> {
    fn rec(pos: usize, left: i32, cur: &mut Vec<i32>, out: &mut Vec<Monomial>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(Monomial(cur.clone()));
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if degree < 0 || nvars == 0 {
        if degree == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    let mut cur = vec![0; nvars];
    rec(0, degree as i32, &mut cur, &mut out);
    out
}

/// Sparse Laurent polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    spec: VarSpec,
    terms: BTreeMap<Monomial, Rational>,
}

impl LaurentPoly {
    pub fn zero(spec: VarSpec) -> Self {
        LaurentPoly { spec, terms: BTreeMap::new() }
    }

    pub fn one(spec: VarSpec) -> Self {
        Self::constant(spec, Rational::one())
    }

    pub fn constant(spec: VarSpec, c: Rational) -> Self {
        let mut p = Self::zero(spec);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(spec.total_vars()), c);
        }
        p
    }

    /// The coordinate `x_i` (0-based index).
    pub fn var(spec: VarSpec, i: usize) -> Result<Self> {
        spec.check_index(i)?;
        Ok(Self::term(spec, Monomial::var(spec.total_vars(), i), Rational::one()))
    }

    /// `c * x^e`; fails on a pole in a non-divisor variable.
    pub fn monomial(spec: VarSpec, exps: Vec<i32>, c: Rational) -> Result<Self> {
        let m = Monomial(exps);
        m.check(&spec)?;
        Ok(Self::term(spec, m, c))
    }

    fn term(spec: VarSpec, m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(spec);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I>(spec: VarSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(spec);
        for (m, c) in terms {
            m.check(&spec)?;
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn spec(&self) -> VarSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Constant coefficient, i.e. the coefficient of `x^0`.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.spec.total_vars()))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    /// Whether every exponent is non-negative.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| m.has_negative().is_none())
    }

    fn check_polynomial(&self) -> Result<()> {
        for m in self.terms.keys() {
            if let Some(i) = m.has_negative() {
                return Err(Error::NotInLocalRing(i + 1));
            }
        }
        Ok(())
    }

    /// Unit test in the local ring at the origin: nonzero constant term.
    pub fn is_unit_local(&self) -> Result<bool> {
        self.check_polynomial()?;
        Ok(!self.constant_term().is_zero())
    }

    /// Value at the origin; only defined without poles.
    pub fn evaluate_at_origin(&self) -> Result<Rational> {
        self.check_polynomial()?;
        Ok(self.constant_term())
    }

    pub fn checked_add(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.spec.ensure_same(&other.spec)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.spec.ensure_same(&other.spec)?;
        let mut out = LaurentPoly::zero(self.spec);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> LaurentPoly {
        if c.is_zero() {
            return LaurentPoly::zero(self.spec);
        }
        LaurentPoly {
            spec: self.spec,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Multiply by `x^e`; fails if a pole appears in a non-divisor variable.
    pub fn mul_monomial(&self, e: &Monomial) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::zero(self.spec);
        for (m, c) in &self.terms {
            let nm = m.mul(e);
            nm.check(&self.spec)?;
            out.terms.insert(nm, c.clone());
        }
        Ok(out)
    }

    /// Exact division by `x^e` inside the polynomial ring: every resulting
    /// exponent must be non-negative. Returns `None` when not divisible.
    pub fn div_monomial_polynomial(&self, e: &Monomial) -> Option<LaurentPoly> {
        let mut out = LaurentPoly::zero(self.spec);
        for (m, c) in &self.terms {
            let nm = m.div(e);
            if nm.has_negative().is_some() {
                return None;
            }
            out.terms.insert(nm, c.clone());
        }
        Some(out)
    }

    /// `∂/∂x_i`, power rule applied to negative exponents as well.
    pub fn partial_derivative(&self, i: usize) -> Result<LaurentPoly> {
        self.spec.check_index(i)?;
        let mut out = LaurentPoly::zero(self.spec);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[i] -= 1;
            out.add_term(nm, c * int(e as i64));
        }
        Ok(out)
    }

    /// Largest monomial dividing every term (componentwise minimum).
    pub fn monomial_content(&self) -> Option<Monomial> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, m| {
            Monomial(acc.0.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect())
        }))
    }

    /// If `self = c * x^e` return `(e, c)`.
    pub fn as_single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Sets every variable in `vars` to zero (drops terms with a positive
    /// exponent there). Only meaningful on polynomials.
    pub fn restrict_to_zero(&self, vars: &[usize]) -> LaurentPoly {
        LaurentPoly {
            spec: self.spec,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| vars.iter().all(|&v| m.0[v] == 0))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Parse with an explicit variable layout; see the [`fmt::Display`] format.
    pub fn parse(spec: VarSpec, s: &str) -> Result<LaurentPoly> {
        parse::parse_poly(spec, s)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_add(rhs).expect("LaurentPoly add: variable layouts differ")
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_mul(rhs).expect("LaurentPoly mul: variable layouts differ")
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            spec: self.spec,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: LaurentPoly) -> LaurentPoly {
        &self + &rhs
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// Exact product; errors when the variable layouts differ.
pub fn poly_mul(p: &LaurentPoly, q: &LaurentPoly) -> Result<LaurentPoly> {
    p.checked_mul(q)
}

pub fn partial_derivative(p: &LaurentPoly, i: usize) -> Result<LaurentPoly> {
    p.partial_derivative(i)
}

pub fn is_unit_local(p: &LaurentPoly) -> Result<bool> {
    p.is_unit_local()
}

fn fmt_monomial(m: &Monomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "x{}", i + 1)?;
        } else {
            write!(f, "x{}^{}", i + 1, e)?;
        }
    }
    Ok(())
}

/// Sum-of-monomials form such as `3/2*x1^-1*x3^2 - x2 + 5`; variables are
/// 1-based.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // total degree descending, ties in key order
        let mut terms: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| std::cmp::Reverse(m.degree()));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                fmt_monomial(m, f)?;
            }
        }
        Ok(())
    }
}

/// Parses `n` or `n/d`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    parse::parse_rational(s.trim())
}

mod parse {
    use super::*;

    pub(super) fn parse_rational(s: &str) -> Result<Rational> {
        let bad = || Error::Parse(format!("invalid rational '{s}'"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        Ok(Rational::new(n, d))
    }

    struct Cursor<'a> {
        s: &'a [u8],
        pos: usize,
    }

    impl Cursor<'_> {
        fn skip_ws(&mut self) {
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }

        fn peek(&mut self) -> Option<u8> {
            self.skip_ws();
            self.s.get(self.pos).copied()
        }

        fn digits(&mut self) -> Option<String> {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                None
            } else {
                std::str::from_utf8(&self.s[start..self.pos]).ok().map(str::to_owned)
            }
        }

        fn err(&self, what: &str) -> Error {
            Error::Parse(format!(
                "{what} at byte {} in '{}'",
                self.pos,
                String::from_utf8_lossy(self.s)
            ))
        }
    }

    pub(super) fn parse_poly(spec: VarSpec, s: &str) -> Result<LaurentPoly> {
        let mut cur = Cursor { s: s.as_bytes(), pos: 0 };
        let mut out = LaurentPoly::zero(spec);
        let nvars = spec.total_vars();
        if cur.peek().is_none() {
            return Err(cur.err("empty polynomial"));
        }
        let mut first = true;
        loop {
            let mut negative = false;
            match cur.peek() {
                Some(b'+') => {
                    cur.pos += 1;
                }
                Some(b'-') => {
                    negative = true;
                    cur.pos += 1;
                }
                Some(_) if first => {}
                None => break,
                Some(_) => return Err(cur.err("expected '+' or '-'")),
            }
            first = false;
            let mut coeff = Rational::one();
            let mut exps = vec![0i32; nvars];
            loop {
                match cur.peek() {
                    Some(b'x') => {
                        cur.pos += 1;
                        let digits = cur.digits().ok_or_else(|| cur.err("expected variable index"))?;
                        let idx: usize = digits
                            .parse()
                            .map_err(|_| cur.err("bad variable index"))?;
                        if idx == 0 || idx > nvars {
                            return Err(Error::IndexOutOfRange { index: idx, total: nvars });
                        }
                        let mut e: i32 = 1;
                        if cur.peek() == Some(b'^') {
                            cur.pos += 1;
                            let neg = if cur.peek() == Some(b'-') {
                                cur.pos += 1;
                                true
                            } else {
                                false
                            };
                            let digits = cur.digits().ok_or_else(|| cur.err("expected exponent"))?;
                            let v: i32 = digits
                                .parse()
                                .map_err(|_| cur.err("bad exponent"))?;
                            e = if neg { -v } else { v };
                        }
                        exps[idx - 1] += e;
                    }
                    Some(c) if c.is_ascii_digit() => {
                        let n = cur.digits().expect("peeked a digit");
                        let r = if cur.peek() == Some(b'/') {
                            cur.pos += 1;
                            let Some(d) = cur.digits() else { return Err(cur.err("expected denominator")) };
                            parse_rational(&format!("{n}/{d}"))?
                        } else {
                            parse_rational(&n)?
                        };
                        coeff *= r;
                    }
                    _ => return Err(cur.err("expected a factor")),
                }
                if cur.peek() == Some(b'*') {
                    cur.pos += 1;
                } else {
                    break;
                }
            }
            if negative {
                coeff = -coeff;
            }
            let m = Monomial(exps);
            m.check(&spec)?;
            out.add_term(m, coeff);
        }
        Ok(out)
    }
}
