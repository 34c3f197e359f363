//! Sparse multivariate polynomials over the rationals and over prime fields.
//!
//! Terms live in a `BTreeMap` keyed by dense exponent vectors, so iteration
//! order (and therefore formatting and hashing) is lexicographic and
//! reproducible. Zero coefficients are never stored; the zero polynomial is
//! the empty map.
//!
//! Prime-field polynomials support truncation modulo the Frobenius bracket
//! power `m^[q] = (x_1^q, ..., x_n^q)`. That ideal is monomial, so dropping
//! any term with an exponent `>= q` after every product is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{self, bigint_mod, inv_mod, mul_mod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at byte {pos} (ring has {nvars} variables)")]
    UnknownVariable {
        name: String,
        pos: usize,
        nvars: usize,
    },
    #[error("coefficient {value} is not representable over {domain}")]
    Unrepresentable { value: String, domain: String },
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: String, right: String },
    #[error("denominator of {value} is divisible by {p}")]
    DenominatorDivisibleByP { value: String, p: u64 },
    #[error("{q} is not a positive power of the characteristic {p}")]
    InvalidBracket { q: u64, p: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// An exact coefficient domain. Elements are plain values; the domain value
/// carries whatever context (the modulus) arithmetic needs.
pub trait CoefficientDomain: Clone + PartialEq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn from_rational(&self, q: &BigRational) -> Result<Self::Elem, PolyError>;
    /// True when `a` prints with a leading minus sign.
    fn is_negative(&self, a: &Self::Elem) -> bool;
    fn fmt_abs(&self, a: &Self::Elem) -> String;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rationals;

impl CoefficientDomain for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn from_rational(&self, q: &BigRational) -> Result<BigRational, PolyError> {
        Ok(q.clone())
    }
    fn is_negative(&self, a: &BigRational) -> bool {
        a.is_negative()
    }
    fn fmt_abs(&self, a: &BigRational) -> String {
        a.abs().to_string()
    }
    fn name(&self) -> String {
        "QQ".to_string()
    }
}

/// The prime field `F_p`, elements stored as residues in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, PolyError> {
        if !arith::is_prime(p) {
            return Err(PolyError::NotPrime(p));
        }
        // keeps every product of two residues inside u128 and sums inside u64
        if p >= 1 << 62 {
            return Err(PolyError::Unrepresentable {
                value: p.to_string(),
                domain: "prime field modulus".into(),
            });
        }
        Ok(PrimeField { p })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
}

impl CoefficientDomain for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn from_rational(&self, q: &BigRational) -> Result<u64, PolyError> {
        let den = bigint_mod(q.denom(), self.p);
        let inv = inv_mod(den, self.p).ok_or_else(|| PolyError::DenominatorDivisibleByP {
            value: q.to_string(),
            p: self.p,
        })?;
        Ok(mul_mod(bigint_mod(q.numer(), self.p), inv, self.p))
    }
    fn is_negative(&self, _a: &u64) -> bool {
        false
    }
    fn fmt_abs(&self, a: &u64) -> String {
        a.to_string()
    }
    fn name(&self) -> String {
        format!("GF({})", self.p)
    }
}

/// Dense exponent vector; ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(entries: Vec<u32>) -> Self {
        ExponentVector(entries)
    }

    pub fn zero(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        ExponentVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    /// Componentwise sum, or `None` if some entry reaches `cap`.
    fn add_capped(&self, other: &Self, cap: Option<u64>) -> Option<Self> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            let s = *a as u64 + *b as u64;
            if cap.is_some_and(|q| s >= q) || s > u32::MAX as u64 {
                return None;
            }
            out.push(s as u32);
        }
        Some(ExponentVector(out))
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = vec![0; self.0.len()];
        for (i, &e) in self.0.iter().enumerate() {
            out[perm[i]] = e;
        }
        ExponentVector(out)
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        ExponentVector(v)
    }
}

/// The bracket power `m^[q]` for `q = p^e`, `e >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BracketBound {
    q: u64,
    p: u64,
    e: u32,
}

impl BracketBound {
    pub fn new(p: u64, e: u32) -> Result<Self, PolyError> {
        if !arith::is_prime(p) {
            return Err(PolyError::NotPrime(p));
        }
        let q = (e >= 1)
            .then(|| arith::checked_prime_power(p, e))
            .flatten()
            .ok_or(PolyError::InvalidBracket { q: 0, p })?;
        Ok(BracketBound { q, p, e })
    }

    /// Accepts `q` only when it is `p^e` with `e >= 1`.
    pub fn from_q(q: u64, p: u64) -> Result<Self, PolyError> {
        let mut e = 0u32;
        let mut v = q;
        while v > 1 && v.is_multiple_of(p) {
            v /= p;
            e += 1;
        }
        if v != 1 || e == 0 {
            return Err(PolyError::InvalidBracket { q, p });
        }
        BracketBound::new(p, e)
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn characteristic(&self) -> u64 {
        self.p
    }
    pub fn exponent(&self) -> u32 {
        self.e
    }

    pub fn contains_monomial(&self, m: &ExponentVector) -> bool {
        m.0.iter().any(|&a| a as u64 >= self.q)
    }
}

#[derive(Clone, PartialEq)]
pub struct SparsePolynomial<K: CoefficientDomain> {
    domain: K,
    nvars: usize,
    terms: BTreeMap<ExponentVector, K::Elem>,
}

pub type QPoly = SparsePolynomial<Rationals>;
pub type FpPoly = SparsePolynomial<PrimeField>;

impl<K: CoefficientDomain> SparsePolynomial<K> {
    pub fn zero(domain: K, nvars: usize) -> Self {
        SparsePolynomial {
            domain,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(domain: K, nvars: usize) -> Self {
        let c = domain.one();
        Self::monomial(domain, ExponentVector::zero(nvars), c)
    }

    pub fn monomial(domain: K, exps: ExponentVector, coeff: K::Elem) -> Self {
        let nvars = exps.len();
        let mut p = Self::zero(domain, nvars);
        if !p.domain.is_zero(&coeff) {
            p.terms.insert(exps, coeff);
        }
        p
    }

    /// Builds a canonical polynomial from `(exponents, coefficient)` pairs,
    /// merging repeats and dropping zeros.
    pub fn from_terms<I>(domain: K, nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, K::Elem)>,
    {
        let mut p = Self::zero(domain, nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length must match ring");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: ExponentVector, c: K::Elem) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                if !self.domain.is_zero(&c) {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = self.domain.add(o.get(), &c);
                if self.domain.is_zero(&s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn domain(&self) -> &K {
        &self.domain
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &K::Elem)> {
        self.terms.iter()
    }

    pub fn exponents(&self) -> impl Iterator<Item = &ExponentVector> {
        self.terms.keys()
    }

    pub fn coeff(&self, e: &ExponentVector) -> Option<&K::Elem> {
        self.terms.get(e)
    }

    pub fn constant_term(&self) -> Option<&K::Elem> {
        self.terms.get(&ExponentVector::zero(self.nvars))
    }

    /// True if the polynomial lies in the maximal ideal at the origin.
    pub fn vanishes_at_origin(&self) -> bool {
        self.constant_term().is_none()
    }

    fn check_ring(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars || self.domain != other.domain {
            return Err(PolyError::RingMismatch {
                left: format!("{}[{} vars]", self.domain.name(), self.nvars),
                right: format!("{}[{} vars]", other.domain.name(), other.nvars),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), self.domain.neg(c)))
            .collect();
        SparsePolynomial {
            domain: self.domain.clone(),
            nvars: self.nvars,
            terms,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        Ok(self.mul_capped(other, None))
    }

    /// Product with every monomial having an exponent `>= cap` dropped.
    fn mul_capped(&self, other: &Self, cap: Option<u64>) -> Self {
        let mut out = Self::zero(self.domain.clone(), self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                if let Some(e) = ea.add_capped(eb, cap) {
                    let c = self.domain.mul(ca, cb);
                    out.add_term(e, c);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &K::Elem) -> Self {
        Self::from_terms(
            self.domain.clone(),
            self.nvars,
            self.terms
                .iter()
                .map(|(e, a)| (e.clone(), self.domain.mul(a, c))),
        )
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut acc = Self::one(self.domain.clone(), self.nvars);
        for _ in 0..k {
            acc = acc.mul_capped(self, None);
        }
        acc
    }

    /// Renames variables: variable `i` becomes variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nvars);
        Self::from_terms(
            self.domain.clone(),
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.permuted(perm), c.clone())),
        )
    }
}

impl FpPoly {
    pub fn characteristic(&self) -> u64 {
        self.domain.characteristic()
    }

    fn check_bracket(&self, bound: &BracketBound) -> Result<(), PolyError> {
        if bound.characteristic() != self.characteristic() {
            return Err(PolyError::RingMismatch {
                left: self.domain.name(),
                right: format!("bracket power q={} of characteristic {}", bound.q, bound.p),
            });
        }
        Ok(())
    }

    /// Drops every term lying in `m^[q]`.
    pub fn truncate(&self, bound: &BracketBound) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| !bound.contains_monomial(e))
            .map(|(e, c)| (e.clone(), *c))
            .collect();
        SparsePolynomial {
            domain: self.domain,
            nvars: self.nvars,
            terms,
        }
    }

    /// Product reduced modulo `m^[q]`.
    pub fn mul_truncated(&self, other: &Self, bound: &BracketBound) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        self.check_bracket(bound)?;
        Ok(self.mul_capped(other, Some(bound.q)))
    }

    /// `f^k` modulo `m^[q]`, by square-and-multiply with truncation after
    /// every product.
    pub fn pow_truncated(&self, k: u64, bound: &BracketBound) -> Result<Self, PolyError> {
        self.check_bracket(bound)?;
        let cap = Some(bound.q);
        let mut result = Self::one(self.domain, self.nvars).truncate(bound);
        let mut base = self.truncate(bound);
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_capped(&base, cap);
            }
            k >>= 1;
            if k > 0 {
                if base.is_zero() {
                    return Ok(Self::zero(self.domain, self.nvars));
                }
                base = base.mul_capped(&base, cap);
            }
        }
        Ok(result)
    }

    /// True iff some term survives modulo `m^[q]`, i.e. `f ∉ m^[q]`.
    pub fn is_nonzero_mod_bracket(&self, bound: &BracketBound) -> bool {
        self.terms.keys().any(|e| !bound.contains_monomial(e))
    }
}

impl QPoly {
    /// Coefficientwise reduction `a/b ↦ a·b⁻¹ mod p`.
    pub fn reduce_mod_p(&self, p: u64) -> Result<FpPoly, PolyError> {
        let field = PrimeField::new(p)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            terms.push((e.clone(), field.from_rational(c)?));
        }
        Ok(FpPoly::from_terms(field, self.nvars, terms))
    }

    /// Every coefficient denominator, for prime screening.
    pub fn denominators(&self) -> impl Iterator<Item = &BigInt> {
        self.terms.values().map(|c| c.denom())
    }
}

impl<K: CoefficientDomain> fmt::Display for SparsePolynomial<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest term first
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = self.domain.is_negative(c);
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = self.domain.fmt_abs(c);
            let mut factors: Vec<String> = Vec::new();
            if abs != "1" || e.is_zero() {
                factors.push(abs);
            }
            for (v, &a) in e.entries().iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(format!("x{}", v + 1)),
                    _ => factors.push(format!("x{}^{}", v + 1, a)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl<K: CoefficientDomain> fmt::Debug for SparsePolynomial<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}[x1..x{}]", self, self.domain.name(), self.nvars)
    }
}

/// Parses the text grammar: variables `x1..xn`, coefficients `a` or `a/b`,
/// operators `+ - * ^`, no implicit multiplication, whitespace ignored.
pub fn parse_poly<K: CoefficientDomain>(
    text: &str,
    nvars: usize,
    domain: K,
) -> Result<SparsePolynomial<K>, PolyError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        nvars,
    };
    let terms = parser.expression()?;
    let mut out = SparsePolynomial::zero(domain.clone(), nvars);
    for (e, q) in terms {
        let c = domain.from_rational(&q).map_err(|err| match err {
            PolyError::DenominatorDivisibleByP { value, .. } => PolyError::Unrepresentable {
                value,
                domain: domain.name(),
            },
            other => other,
        })?;
        out.add_term(e, c);
    }
    Ok(out)
}

pub fn parse_qpoly(text: &str, nvars: usize) -> Result<QPoly, PolyError> {
    parse_poly(text, nvars, Rationals)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn expression(&mut self) -> Result<Vec<(ExponentVector, BigRational)>, PolyError> {
        let mut out = Vec::new();
        let mut sign = BigRational::one();
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                sign = -sign;
            }
            Some(b'+') => self.pos += 1,
            None => return self.err("empty polynomial"),
            _ => {}
        }
        loop {
            let (e, c) = self.term()?;
            out.push((e, c * &sign));
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    sign = BigRational::one();
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -BigRational::one();
                }
                Some(ch) => return self.err(format!("unexpected `{}`", ch as char)),
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(ExponentVector, BigRational), PolyError> {
        let mut exps = vec![0u32; self.nvars];
        let mut coeff = BigRational::one();
        loop {
            match self.peek() {
                Some(b'x') => {
                    let (var, start) = self.variable()?;
                    let power = self.power()?;
                    let slot = &mut exps[var];
                    *slot = slot.checked_add(power).ok_or(PolyError::Syntax {
                        pos: start,
                        msg: "exponent overflow".into(),
                    })?;
                }
                Some(c) if c.is_ascii_digit() => {
                    let value = self.number()?;
                    let power = self.power()?;
                    coeff *= num_traits::pow::pow(value, power as usize);
                }
                Some(ch) => return self.err(format!("expected a factor, found `{}`", ch as char)),
                None => return self.err("expected a factor"),
            }
            match self.peek() {
                Some(b'*') => self.pos += 1,
                Some(b'x') => return self.err("implicit multiplication is not allowed"),
                Some(c) if c.is_ascii_digit() => {
                    return self.err("implicit multiplication is not allowed")
                }
                _ => break,
            }
        }
        Ok((ExponentVector(exps), coeff))
    }

    fn digits(&mut self) -> Result<BigInt, PolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse::<BigInt>().expect("digits parse"))
    }

    fn number(&mut self) -> Result<BigRational, PolyError> {
        self.skip_ws();
        let num = self.digits()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let den = self.digits()?;
            if den.is_zero() {
                return self.err("zero denominator");
            }
            return Ok(BigRational::new(num, den));
        }
        Ok(BigRational::from_integer(num))
    }

    fn variable(&mut self) -> Result<(usize, usize), PolyError> {
        self.skip_ws();
        let start = self.pos;
        self.pos += 1; // 'x'
        let idx_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        let idx: usize = std::str::from_utf8(&self.src[idx_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0);
        if idx == 0 || idx > self.nvars {
            return Err(PolyError::UnknownVariable {
                name,
                pos: start,
                nvars: self.nvars,
            });
        }
        Ok((idx - 1, start))
    }

    fn power(&mut self) -> Result<u32, PolyError> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        let d = self.digits()?;
        u32::try_from(d).map_err(|_| PolyError::Syntax {
            pos: start,
            msg: "exponent too large".into(),
        })
    }
}
