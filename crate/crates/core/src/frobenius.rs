//! Fedder-type F-purity tests at the origin.
//!
//! A pair is presented as a complete intersection `X = V(f_1, ..., f_c)` in
//! affine `n`-space together with auxiliary generators `f_{c+1}, ..., f_s` of
//! an ideal `a` and a coefficient `t`. With `q = p^e`, sharp F-purity of
//! `(X; t V(a))` at the origin is witnessed when
//!
//! ```text
//! (f_1 ... f_c)^(q-1) * g^((q-1)/r) * f_{c+1}^{k_{c+1}} ... f_s^{k_s}  ∉  (x_1^q, ..., x_n^q)
//! ```
//!
//! for some split `k` with `Σ k_j = ⌈t(q-1)⌉`. The optional witness `(g, r)`
//! carries the twist for non-l.c.i. `X`; without it `g = 1`. Regularity of the
//! sequence `f_1, ..., f_c` is the caller's responsibility.
//!
//! All work happens over `F_p` with products truncated modulo the bracket
//! power after every multiplication.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::ceil_rational;
use crate::poly::{BracketBound, FpPoly, PolyError, PrimeField, QPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrobeniusError {
    #[error("prime {p} excluded: {reason}")]
    PrimeExcluded { p: u64, reason: String },
    #[error("prime {p} violates p ≡ 1 mod {r} required by the defect witness")]
    CongruenceViolated { p: u64, r: u64 },
    #[error("{what} = {value} exceeds the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },
    #[error("exponent split {got:?} does not sum to ⌈t(q-1)⌉ = {expected}")]
    SplitMismatch { expected: u64, got: Vec<u64> },
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `(g, r)`: a local equation `g` of `r` times the residual divisor, `r` the
/// Gorenstein index.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectWitness {
    pub g: QPoly,
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteIntersectionPair {
    n: usize,
    ci_gens: Vec<QPoly>,
    aux_gens: Vec<QPoly>,
    t: BigRational,
    defect_witness: Option<DefectWitness>,
}

impl CompleteIntersectionPair {
    pub fn new(
        n: usize,
        ci_gens: Vec<QPoly>,
        aux_gens: Vec<QPoly>,
        t: BigRational,
        defect_witness: Option<DefectWitness>,
    ) -> Result<Self, FrobeniusError> {
        if ci_gens.len() > n {
            return Err(FrobeniusError::InvalidPair(format!(
                "{} complete-intersection generators in {} variables",
                ci_gens.len(),
                n
            )));
        }
        if t < BigRational::zero() {
            return Err(FrobeniusError::InvalidPair(format!("negative coefficient t = {t}")));
        }
        for (i, f) in ci_gens.iter().chain(&aux_gens).enumerate() {
            if f.nvars() != n {
                return Err(FrobeniusError::InvalidPair(format!(
                    "generator {} lives in {} variables, expected {}",
                    i + 1,
                    f.nvars(),
                    n
                )));
            }
            if !f.vanishes_at_origin() {
                return Err(FrobeniusError::InvalidPair(format!(
                    "generator {} = {} does not vanish at the origin",
                    i + 1,
                    f
                )));
            }
        }
        if let Some(w) = &defect_witness {
            if w.r == 0 {
                return Err(FrobeniusError::InvalidPair("Gorenstein index r must be >= 1".into()));
            }
            if w.g.nvars() != n {
                return Err(FrobeniusError::InvalidPair("witness lives in the wrong ring".into()));
            }
        }
        Ok(CompleteIntersectionPair {
            n,
            ci_gens,
            aux_gens,
            t,
            defect_witness,
        })
    }

    /// The ideal `a` alone in affine space, coefficient `t`.
    pub fn ambient(n: usize, aux_gens: Vec<QPoly>, t: BigRational) -> Result<Self, FrobeniusError> {
        Self::new(n, Vec::new(), aux_gens, t, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn ci_gens(&self) -> &[QPoly] {
        &self.ci_gens
    }
    pub fn aux_gens(&self) -> &[QPoly] {
        &self.aux_gens
    }
    pub fn t(&self) -> &BigRational {
        &self.t
    }
    pub fn defect_witness(&self) -> Option<&DefectWitness> {
        self.defect_witness.as_ref()
    }
    pub fn c(&self) -> usize {
        self.ci_gens.len()
    }
    pub fn s(&self) -> usize {
        self.ci_gens.len() + self.aux_gens.len()
    }

    pub fn with_t(&self, t: BigRational) -> Self {
        CompleteIntersectionPair {
            t,
            ..self.clone()
        }
    }

    /// Reduces every generator mod `p` and precomputes the fixed factor
    /// `(f_1 ... f_c)^(q-1) g^((q-1)/r)` modulo `m^[q]`.
    pub fn reduce(&self, p: u64, e: u32) -> Result<ReducedPair, FrobeniusError> {
        let bound = BracketBound::new(p, e)?;
        let field = PrimeField::new(p)?;
        let q = bound.q();
        let reduce = |f: &QPoly| {
            f.reduce_mod_p(p).map_err(|err| match err {
                PolyError::DenominatorDivisibleByP { value, p } => FrobeniusError::PrimeExcluded {
                    p,
                    reason: format!("coefficient {value} has a denominator divisible by {p}"),
                },
                other => other.into(),
            })
        };
        let mut base = FpPoly::one(field, self.n).truncate(&bound);
        for f in &self.ci_gens {
            let fp = reduce(f)?;
            base = base.mul_truncated(&fp.pow_truncated(q - 1, &bound)?, &bound)?;
        }
        if let Some(w) = &self.defect_witness {
            if !(p - 1).is_multiple_of(w.r) {
                return Err(FrobeniusError::CongruenceViolated { p, r: w.r });
            }
            let g = reduce(&w.g)?;
            base = base.mul_truncated(&g.pow_truncated((q - 1) / w.r, &bound)?, &bound)?;
        }
        let aux = self.aux_gens.iter().map(reduce).collect::<Result<Vec<_>, _>>()?;
        Ok(ReducedPair { bound, base, aux })
    }

    /// `⌈t(q-1)⌉`.
    pub fn exponent_total(&self, q: u64) -> u64 {
        let k = ceil_rational(&(&self.t * BigRational::from_integer(BigInt::from(q - 1))));
        k.to_u64().expect("exponent total fits in u64")
    }
}

/// Search limits. Exceeding one is an error, never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchCaps {
    /// Largest number of generators whose powers are enumerated.
    pub max_gens: usize,
    /// Largest total exponent `Σ k_j` considered.
    pub max_total: u64,
    /// Largest term count of any intermediate product.
    pub max_terms: usize,
}

pub const MAX_TERMS_ENV: &str = "FSING_MAX_TERMS";

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps {
            max_gens: 6,
            max_total: 64,
            max_terms: 2_000_000,
        }
    }
}

impl SearchCaps {
    /// Defaults, with `max_terms` taken from `FSING_MAX_TERMS` when set.
    pub fn from_env() -> Self {
        let mut caps = SearchCaps::default();
        if let Some(v) = std::env::var(MAX_TERMS_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            caps.max_terms = v;
        }
        caps
    }
}

/// A pair reduced modulo `p` at a fixed bracket power.
#[derive(Debug, Clone)]
pub struct ReducedPair {
    bound: BracketBound,
    base: FpPoly,
    aux: Vec<FpPoly>,
}

impl ReducedPair {
    /// The plain ideal `(gens)` in affine space, no fixed factor.
    pub fn from_ideal(gens: Vec<FpPoly>, bound: BracketBound) -> Result<Self, FrobeniusError> {
        let first = gens
            .first()
            .ok_or_else(|| FrobeniusError::InvalidPair("empty generator list".into()))?;
        let base = FpPoly::one(*first.domain(), first.nvars()).truncate(&bound);
        Ok(ReducedPair {
            bound,
            base,
            aux: gens,
        })
    }

    pub fn bound(&self) -> &BracketBound {
        &self.bound
    }

    pub fn aux(&self) -> &[FpPoly] {
        &self.aux
    }

    /// Whether `base * Π f_j^{k_j}` escapes `m^[q]`.
    pub fn survives(&self, split: &[u64], caps: &SearchCaps) -> Result<bool, FrobeniusError> {
        if split.len() != self.aux.len() {
            return Err(FrobeniusError::InvalidPair(format!(
                "split has {} entries for {} auxiliary generators",
                split.len(),
                self.aux.len()
            )));
        }
        let mut acc = self.base.clone();
        for (f, &k) in self.aux.iter().zip(split) {
            if acc.is_zero() {
                break;
            }
            let power = f.pow_truncated(k, &self.bound)?;
            acc = acc.mul_truncated(&power, &self.bound)?;
            check_terms(&acc, caps)?;
        }
        Ok(acc.is_nonzero_mod_bracket(&self.bound))
    }

    /// First split (in lexicographic order) with `Σ k_j = total` whose
    /// product survives, or `None` when every split lands in `m^[q]`.
    pub fn find_split(&self, total: u64, caps: &SearchCaps) -> Result<Option<Vec<u64>>, FrobeniusError> {
        check_caps(self.aux.len(), total, caps)?;
        if !self.base.is_nonzero_mod_bracket(&self.bound) {
            return Ok(None);
        }
        if self.aux.is_empty() {
            return Ok((total == 0).then(Vec::new));
        }
        let table = PowerTable::build(&self.aux, total, &self.bound, caps)?;
        table.search(&self.base, total, &self.bound, caps)
    }

    /// Largest `K` such that `base · a^K ⊄ m^[q]`; `None` when even `K = 0`
    /// fails (the fixed factor already lies in `m^[q]`).
    pub fn nu(&self, caps: &SearchCaps) -> Result<Option<u64>, FrobeniusError> {
        if !self.base.is_nonzero_mod_bracket(&self.bound) {
            return Ok(None);
        }
        let nonzero: Vec<FpPoly> = self.aux.iter().filter(|f| !f.is_zero()).cloned().collect();
        if nonzero.is_empty() {
            return Ok(Some(0));
        }
        // every product of l(q-1)+1 generators has some factor to the q-th power
        let ceiling = nonzero.len() as u64 * (self.bound.q() - 1);
        check_caps(nonzero.len(), 0, caps)?;
        let mut table = PowerTable::build(&nonzero, 0, &self.bound, caps)?;
        let mut k = 0u64;
        loop {
            if k == ceiling {
                return Ok(Some(k));
            }
            let next = k + 1;
            check_caps(nonzero.len(), next, caps)?;
            table.extend_to(next, &self.bound, caps)?;
            if table.search(&self.base, next, &self.bound, caps)?.is_none() {
                return Ok(Some(k));
            }
            k = next;
        }
    }
}

fn check_caps(gens: usize, total: u64, caps: &SearchCaps) -> Result<(), FrobeniusError> {
    if gens > caps.max_gens {
        return Err(FrobeniusError::CapExceeded {
            what: "generator count",
            value: gens as u64,
            cap: caps.max_gens as u64,
        });
    }
    if total > caps.max_total {
        return Err(FrobeniusError::CapExceeded {
            what: "total exponent",
            value: total,
            cap: caps.max_total,
        });
    }
    Ok(())
}

fn check_terms(f: &FpPoly, caps: &SearchCaps) -> Result<(), FrobeniusError> {
    if f.num_terms() > caps.max_terms {
        return Err(FrobeniusError::CapExceeded {
            what: "intermediate term count",
            value: f.num_terms() as u64,
            cap: caps.max_terms as u64,
        });
    }
    Ok(())
}

/// Truncated powers `f_j^a` for `a = 0, 1, ...`, stopping per generator at
/// the first power that vanishes modulo `m^[q]`.
struct PowerTable {
    gens: Vec<FpPoly>,
    powers: Vec<Vec<FpPoly>>,
    exhausted: Vec<bool>,
}

impl PowerTable {
    fn build(
        gens: &[FpPoly],
        upto: u64,
        bound: &BracketBound,
        caps: &SearchCaps,
    ) -> Result<Self, FrobeniusError> {
        let mut table = PowerTable {
            gens: gens.iter().map(|f| f.truncate(bound)).collect(),
            powers: gens
                .iter()
                .map(|f| vec![FpPoly::one(*f.domain(), f.nvars()).truncate(bound)])
                .collect(),
            exhausted: vec![false; gens.len()],
        };
        table.extend_to(upto, bound, caps)?;
        Ok(table)
    }

    fn extend_to(&mut self, upto: u64, bound: &BracketBound, caps: &SearchCaps) -> Result<(), FrobeniusError> {
        for (j, f) in self.gens.iter().enumerate() {
            while !self.exhausted[j] && (self.powers[j].len() as u64) <= upto {
                let last = self.powers[j].last().expect("power zero present");
                let next = last.mul_truncated(f, bound)?;
                check_terms(&next, caps)?;
                if next.is_zero() {
                    self.exhausted[j] = true;
                } else {
                    self.powers[j].push(next);
                }
            }
        }
        Ok(())
    }

    /// Largest exponent with a nonzero truncated power.
    fn cap(&self, j: usize) -> u64 {
        self.powers[j].len() as u64 - 1
    }

    fn search(
        &self,
        base: &FpPoly,
        total: u64,
        bound: &BracketBound,
        caps: &SearchCaps,
    ) -> Result<Option<Vec<u64>>, FrobeniusError> {
        let l = self.powers.len();
        let tail_caps: Vec<u64> = (0..=l).map(|j| (j..l).map(|i| self.cap(i)).sum()).collect();
        if tail_caps[0] < total {
            return Ok(None);
        }
        let lo = total.saturating_sub(tail_caps[1]);
        let hi = self.cap(0).min(total);
        let first: Vec<u64> = (lo..=hi).collect();
        let found = first
            .par_iter()
            .map(|&a| -> Result<Option<Vec<u64>>, FrobeniusError> {
                let partial = base.mul_truncated(&self.powers[0][a as usize], bound)?;
                check_terms(&partial, caps)?;
                let mut split = vec![a];
                if self.dfs(&partial, 1, total - a, &tail_caps, &mut split, bound, caps)? {
                    Ok(Some(split))
                } else {
                    Ok(None)
                }
            })
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            });
        match found {
            None => Ok(None),
            Some(r) => r,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        partial: &FpPoly,
        j: usize,
        remaining: u64,
        tail_caps: &[u64],
        split: &mut Vec<u64>,
        bound: &BracketBound,
        caps: &SearchCaps,
    ) -> Result<bool, FrobeniusError> {
        if partial.is_zero() {
            return Ok(false);
        }
        if j == self.powers.len() {
            return Ok(remaining == 0 && partial.is_nonzero_mod_bracket(bound));
        }
        let lo = remaining.saturating_sub(tail_caps[j + 1]);
        let hi = self.cap(j).min(remaining);
        for a in lo..=hi {
            let next = partial.mul_truncated(&self.powers[j][a as usize], bound)?;
            check_terms(&next, caps)?;
            split.push(a);
            if self.dfs(&next, j + 1, remaining - a, tail_caps, split, bound, caps)? {
                return Ok(true);
            }
            split.pop();
        }
        Ok(false)
    }
}

/// Fedder test for an explicit split with `Σ k_j = ⌈t(q-1)⌉`.
pub fn fedder_pair_test(
    pair: &CompleteIntersectionPair,
    p: u64,
    e: u32,
    split: &[u64],
    caps: &SearchCaps,
) -> Result<bool, FrobeniusError> {
    let reduced = pair.reduce(p, e)?;
    let expected = pair.exponent_total(reduced.bound.q());
    if split.iter().sum::<u64>() != expected {
        return Err(FrobeniusError::SplitMismatch {
            expected,
            got: split.to_vec(),
        });
    }
    check_caps(split.len(), expected, caps)?;
    reduced.survives(split, caps)
}

/// Some split certifying the Fedder condition at `t`, if one exists.
pub fn exponent_split_search(
    pair: &CompleteIntersectionPair,
    p: u64,
    e: u32,
    caps: &SearchCaps,
) -> Result<Option<Vec<u64>>, FrobeniusError> {
    let reduced = pair.reduce(p, e)?;
    let total = pair.exponent_total(reduced.bound.q());
    reduced.find_split(total, caps)
}

/// `ν(q)`: the largest `k` with `(gens)^k ⊄ m^[q]`.
pub fn nu_value(gens: &[FpPoly], bound: &BracketBound, caps: &SearchCaps) -> Result<u64, FrobeniusError> {
    for f in gens {
        if f.characteristic() != bound.characteristic() {
            return Err(PolyError::RingMismatch {
                left: format!("GF({})", f.characteristic()),
                right: format!("bracket of characteristic {}", bound.characteristic()),
            }
            .into());
        }
        if !f.vanishes_at_origin() {
            return Err(FrobeniusError::InvalidPair(format!("{f} does not vanish at the origin")));
        }
    }
    let pair = ReducedPair::from_ideal(gens.to_vec(), *bound)?;
    Ok(pair.nu(caps)?.expect("unit base survives"))
}

/// One step of an F-pure threshold estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FptEstimate {
    pub p: u64,
    pub e: u32,
    pub nu: u64,
    /// `ν / p^e`
    pub lower: BigRational,
    /// `(ν + l) / p^e` with `l` the number of generators nonzero mod `p`.
    pub upper: BigRational,
}

impl FptEstimate {
    pub fn from_nu(p: u64, e: u32, q: u64, nu: u64, generators: usize) -> Self {
        let q = BigInt::from(q);
        FptEstimate {
            p,
            e,
            nu,
            lower: BigRational::new(BigInt::from(nu), q.clone()),
            upper: BigRational::new(BigInt::from(nu + generators as u64), q),
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lower <= x && x <= &self.upper
    }
}

/// Intervals containing the F-pure threshold of `(gens)` at the origin, one
/// per `e = 1..=e_max`.
pub fn fpt_estimate(
    gens: &[QPoly],
    p: u64,
    e_max: u32,
    caps: &SearchCaps,
) -> Result<Vec<FptEstimate>, FrobeniusError> {
    let n = gens
        .first()
        .map(|f| f.nvars())
        .ok_or_else(|| FrobeniusError::InvalidPair("empty generator list".into()))?;
    let pair = CompleteIntersectionPair::ambient(n, gens.to_vec(), BigRational::zero())?;
    pair_fpt_estimate(&pair, p, e_max, caps)
}

/// As [`fpt_estimate`], for the auxiliary ideal restricted to the pair's `X`.
pub fn pair_fpt_estimate(
    pair: &CompleteIntersectionPair,
    p: u64,
    e_max: u32,
    caps: &SearchCaps,
) -> Result<Vec<FptEstimate>, FrobeniusError> {
    let mut out = Vec::with_capacity(e_max as usize);
    for e in 1..=e_max {
        let reduced = pair.reduce(p, e)?;
        let l = reduced.aux.iter().filter(|f| !f.is_zero()).count();
        if l == 0 {
            return Err(FrobeniusError::PrimeExcluded {
                p,
                reason: "the auxiliary ideal vanishes modulo p".into(),
            });
        }
        let nu = reduced.nu(caps)?.ok_or_else(|| FrobeniusError::PrimeExcluded {
            p,
            reason: "the fixed factor already lies in the bracket power".into(),
        })?;
        out.push(FptEstimate::from_nu(p, e, reduced.bound.q(), nu, l));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_qpoly;

    fn qp(s: &str, n: usize) -> QPoly {
        parse_qpoly(s, n).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn minors() -> Vec<QPoly> {
        ["x1*x5 - x2*x4", "x2*x6 - x3*x5", "x1*x6 - x3*x4"]
            .iter()
            .map(|s| qp(s, 6))
            .collect()
    }

    fn caps() -> SearchCaps {
        SearchCaps::default()
    }

    #[test]
    fn monomial_survives() {
        let pair = CompleteIntersectionPair::ambient(2, vec![qp("x1*x2", 2)], rat(1, 1)).unwrap();
        assert!(fedder_pair_test(&pair, 5, 1, &[4], &caps()).unwrap());
    }

    #[test]
    fn split_sum_enforced() {
        let pair = CompleteIntersectionPair::ambient(1, vec![qp("x1", 1)], rat(1, 1)).unwrap();
        let err = fedder_pair_test(&pair, 5, 1, &[5], &caps()).unwrap_err();
        assert!(matches!(err, FrobeniusError::SplitMismatch { expected: 4, .. }));
        // x^q itself lies in the bracket power
        let reduced = pair.reduce(5, 1).unwrap();
        assert!(!reduced.survives(&[5], &caps()).unwrap());
    }

    #[test]
    fn minors_certify_two_at_five() {
        let pair = CompleteIntersectionPair::ambient(6, minors(), rat(2, 1)).unwrap();
        let split = exponent_split_search(&pair, 5, 1, &caps()).unwrap().expect("split exists");
        assert_eq!(split.iter().sum::<u64>(), 8);
        assert!(fedder_pair_test(&pair, 5, 1, &split, &caps()).unwrap());
    }

    #[test]
    fn split_search_examples() {
        let pair = CompleteIntersectionPair::ambient(2, vec![qp("x1", 2), qp("x2", 2)], rat(2, 1)).unwrap();
        assert_eq!(exponent_split_search(&pair, 3, 1, &caps()).unwrap(), Some(vec![2, 2]));
        let single = CompleteIntersectionPair::ambient(1, vec![qp("x1", 1)], rat(2, 1)).unwrap();
        for p in [2, 3, 5, 7] {
            assert_eq!(exponent_split_search(&single, p, 1, &caps()).unwrap(), None);
        }
    }

    #[test]
    fn nu_examples() {
        let b = |p, e| BracketBound::new(p, e).unwrap();
        for (p, e) in [(2, 1), (3, 2), (5, 1), (7, 2)] {
            let x = qp("x1", 1).reduce_mod_p(p).unwrap();
            assert_eq!(nu_value(&[x], &b(p, e), &caps()).unwrap(), p.pow(e) - 1);
        }
        for p in [2u64, 3, 5, 7] {
            let gens = vec![qp("x1", 2).reduce_mod_p(p).unwrap(), qp("x2", 2).reduce_mod_p(p).unwrap()];
            assert_eq!(nu_value(&gens, &b(p, 1), &caps()).unwrap(), 2 * (p - 1));
        }
        let cusp = qp("x1^2 + x2^3", 2).reduce_mod_p(7).unwrap();
        assert_eq!(nu_value(&[cusp], &b(7, 1), &caps()).unwrap(), 5);
    }

    #[test]
    fn nu_of_minors() {
        // brute-force expansion oracle: ν(p) = 2(p-1) for p = 3, 5, 7
        for p in [3u64, 5, 7] {
            let gens: Vec<FpPoly> = minors().iter().map(|f| f.reduce_mod_p(p).unwrap()).collect();
            let nu = nu_value(&gens, &BracketBound::new(p, 1).unwrap(), &caps()).unwrap();
            assert_eq!(nu, 2 * (p - 1));
        }
    }

    #[test]
    fn fpt_estimate_examples() {
        for p in [2u64, 3, 5] {
            let est = fpt_estimate(&[qp("x1", 1)], p, 2, &caps()).unwrap();
            let p = p as i64;
            assert_eq!(est[0].lower, rat(p - 1, p));
            assert_eq!(est[0].upper, rat(1, 1));
            assert_eq!(est[1].lower, rat(p * p - 1, p * p));
            assert_eq!(est[1].upper, rat(1, 1));
        }
        let cusp = fpt_estimate(&[qp("x1^2 + x2^3", 2)], 7, 1, &caps()).unwrap();
        assert_eq!((cusp[0].lower.clone(), cusp[0].upper.clone()), (rat(5, 7), rat(6, 7)));
        assert!(cusp[0].contains(&rat(5, 6)));

        let m = fpt_estimate(&minors(), 5, 1, &caps()).unwrap();
        assert_eq!(m[0].nu, 8);
        assert!(m[0].contains(&rat(2, 1)));
    }

    #[test]
    fn monomial_closed_form() {
        for a in 1..=6u32 {
            for (p, e) in [(2u64, 1u32), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1)] {
                let q = p.pow(e);
                let f = qp(&format!("x1^{a}"), 1).reduce_mod_p(p).unwrap();
                let nu = nu_value(&[f], &BracketBound::new(p, e).unwrap(), &caps()).unwrap();
                assert_eq!(nu, q.div_ceil(a as u64) - 1, "a={a} q={q}");
            }
        }
    }

    #[test]
    fn prime_exclusion_and_congruence() {
        let pair = CompleteIntersectionPair::ambient(1, vec![qp("1/3*x1", 1)], rat(1, 1)).unwrap();
        assert!(matches!(
            exponent_split_search(&pair, 3, 1, &caps()),
            Err(FrobeniusError::PrimeExcluded { p: 3, .. })
        ));
        let w = DefectWitness { g: qp("x1", 2), r: 2 };
        let twisted = CompleteIntersectionPair::new(2, vec![qp("x1*x2", 2)], vec![qp("x2", 2)], rat(0, 1), Some(w)).unwrap();
        assert!(matches!(
            exponent_split_search(&twisted, 2, 1, &caps()),
            Err(FrobeniusError::CongruenceViolated { p: 2, r: 2 })
        ));
        assert!(exponent_split_search(&twisted, 3, 1, &caps()).is_ok());
    }

    #[test]
    fn complete_intersection_factor() {
        // X = V(x1*x2) (normal crossing) with a = (x3): log canonical, t = 1 passes
        let pair = CompleteIntersectionPair::new(3, vec![qp("x1*x2", 3)], vec![qp("x3", 3)], rat(1, 1), None).unwrap();
        for p in [2u64, 3, 5] {
            assert!(exponent_split_search(&pair, p, 1, &caps()).unwrap().is_some());
        }
        // X = V(x1^2): not reduced, (x1^2)^{p-1} lies in m^[p]
        let bad = CompleteIntersectionPair::new(2, vec![qp("x1^2", 2)], vec![qp("x2", 2)], rat(0, 1), None).unwrap();
        assert_eq!(exponent_split_search(&bad, 5, 1, &caps()).unwrap(), None);
    }

    #[test]
    fn invalid_pairs_rejected() {
        assert!(CompleteIntersectionPair::ambient(1, vec![qp("x1 + 1", 1)], rat(1, 1)).is_err());
        assert!(CompleteIntersectionPair::ambient(1, vec![qp("x1", 1)], rat(-1, 1)).is_err());
        assert!(CompleteIntersectionPair::new(1, vec![qp("x1", 1), qp("x1^2", 1)], vec![], rat(0, 1), None).is_err());
        let w = DefectWitness { g: qp("x1", 1), r: 0 };
        assert!(CompleteIntersectionPair::new(1, vec![], vec![qp("x1", 1)], rat(1, 1), Some(w)).is_err());
    }

    #[test]
    fn caps_are_reported() {
        let tight = SearchCaps { max_total: 3, ..SearchCaps::default() };
        let x = qp("x1", 1).reduce_mod_p(5).unwrap();
        let err = nu_value(&[x], &BracketBound::new(5, 1).unwrap(), &tight).unwrap_err();
        assert!(matches!(err, FrobeniusError::CapExceeded { what: "total exponent", .. }));
        let many: Vec<QPoly> = (1..=7).map(|i| qp(&format!("x{i}"), 7)).collect();
        let pair = CompleteIntersectionPair::ambient(7, many, rat(1, 1)).unwrap();
        assert!(matches!(
            exponent_split_search(&pair, 2, 1, &caps()),
            Err(FrobeniusError::CapExceeded { what: "generator count", .. })
        ));
    }
}
