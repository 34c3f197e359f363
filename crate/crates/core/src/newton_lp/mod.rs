//! Linear programs over term exponents.
//!
//! [`ExponentProgram`] stacks the exponent vectors of every term of
//! `f_1, ..., f_s` as columns, followed by one indicator row per polynomial:
//!
//! ```text
//!         [ a_11 ... a_1m1 | a_21 ... | ... | a_s1 ... a_sms ]   (n rows)
//!   Ã  =  [ 1 ... 1        | 0 ...    | ... | 0 ...          ]
//!         [                |  ...     | ... |                ]   (s rows)
//!         [ 0 ... 0        | 0 ...    | ... | 1 ... 1        ]
//! ```
//!
//! The threshold program maximizes the total weight on the auxiliary blocks
//! `c+1..s` subject to `Ã σ ≤ 1`, the first `c` blocks summing to exactly
//! one, and `σ ≥ 0`.
//!
//! For a monomial ideal with Newton polyhedron `P = conv{a_j} + R^n_{≥0}`,
//! `max{t : 1 ∈ t·P}` is the program `maximize Σ λ_j` subject to
//! `Σ λ_j a_j ≤ 1`, `λ ≥ 0`. Because `P` is full-dimensional and closed
//! upward, `1` is interior to `t·P` exactly when that maximum exceeds `t`.

mod simplex;
mod text;
mod uniqueness;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::FactorialTable;
use crate::poly::{ExponentVector, QPoly};

pub use simplex::{Constraint, LinearProgram, LpOutcome, LpStatus, MinimizeProgram, Relation};
pub use text::{format_program, parse_program};
pub use uniqueness::{uniqueness_check, uniqueness_report, UniquenessMethod, UniquenessReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NewtonError {
    #[error("polynomial {0} is zero")]
    ZeroPolynomial(usize),
    #[error("polynomial {index} has a constant term")]
    ConstantTerm { index: usize },
    #[error("complete-intersection count {c} exceeds polynomial count {s}")]
    TooManyCompleteIntersections { c: usize, s: usize },
    #[error("the complete-intersection blocks cannot sum to one under Ã σ ≤ 1")]
    Infeasible,
    #[error("the program is unbounded")]
    Unbounded,
    #[error("empty list of exponent vectors")]
    EmptyIdeal,
    #[error("exponent vector {0} is zero or has the wrong length")]
    BadExponent(usize),
    #[error("σ_{{{block},{term}}}·(p-1) = {value} is not a nonnegative integer")]
    NonIntegralExponent {
        block: usize,
        term: usize,
        value: String,
    },
    #[error("block {block} sums to {sum} > p - 1 = {limit}")]
    BlockSumExceedsPMinusOne { block: usize, sum: u64, limit: u64 },
    #[error("σ has {got} entries, the program has {expected} columns")]
    SigmaShape { expected: usize, got: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("program text line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Term-exponent program for polynomials `f_1..f_s`, the first `c` of which
/// cut out a complete intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentProgram {
    n: usize,
    c: usize,
    blocks: Vec<Vec<ExponentVector>>,
}

impl ExponentProgram {
    pub fn new(n: usize, c: usize, blocks: Vec<Vec<ExponentVector>>) -> Result<Self, NewtonError> {
        if c > blocks.len() {
            return Err(NewtonError::TooManyCompleteIntersections { c, s: blocks.len() });
        }
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(NewtonError::ZeroPolynomial(i + 1));
            }
            for a in block {
                if a.len() != n {
                    return Err(NewtonError::BadExponent(i + 1));
                }
                if a.is_zero() {
                    return Err(NewtonError::ConstantTerm { index: i + 1 });
                }
            }
        }
        Ok(ExponentProgram { n, c, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn c(&self) -> usize {
        self.c
    }
    pub fn s(&self) -> usize {
        self.blocks.len()
    }
    pub fn blocks(&self) -> &[Vec<ExponentVector>] {
        &self.blocks
    }
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }
    pub fn num_columns(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// `(block, exponent)` for each column in order.
    pub fn columns(&self) -> impl Iterator<Item = (usize, &ExponentVector)> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |a| (i, a)))
    }

    /// The `(n + s) × Σ m_i` matrix Ã.
    pub fn a_tilde(&self) -> Vec<Vec<BigRational>> {
        let cols: Vec<(usize, &ExponentVector)> = self.columns().collect();
        let mut rows = Vec::with_capacity(self.n + self.s());
        for k in 0..self.n {
            rows.push(
                cols.iter()
                    .map(|(_, a)| BigRational::from_integer(BigInt::from(a.entries()[k])))
                    .collect(),
            );
        }
        for i in 0..self.s() {
            rows.push(
                cols.iter()
                    .map(|(b, _)| if *b == i { BigRational::one() } else { BigRational::zero() })
                    .collect(),
            );
        }
        rows
    }

    /// `Ã σ`.
    pub fn apply(&self, sigma: &[BigRational]) -> Vec<BigRational> {
        self.a_tilde()
            .iter()
            .map(|row| row.iter().zip(sigma).map(|(a, s)| a * s).sum())
            .collect()
    }

    /// The threshold program as a [`LinearProgram`] over σ.
    pub fn linear_program(&self) -> LinearProgram {
        let m = self.num_columns();
        let objective = self
            .columns()
            .map(|(b, _)| if b >= self.c { BigRational::one() } else { BigRational::zero() })
            .collect();
        let mut lp = LinearProgram::maximize(objective);
        for (r, row) in self.a_tilde().into_iter().enumerate() {
            let relation = if r >= self.n && r - self.n < self.c {
                Relation::Eq
            } else {
                Relation::Le
            };
            debug_assert_eq!(row.len(), m);
            lp.add(row, relation, BigRational::one());
        }
        lp
    }

    /// Permutes the ambient coordinates: coordinate `k` becomes `perm[k]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Self {
        ExponentProgram {
            n: self.n,
            c: self.c,
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|a| a.permuted(perm)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: BigRational,
    pub sigma: Vec<BigRational>,
    pub dual: Vec<BigRational>,
}

/// Builds the program from the terms of `polys`, first `c` forming the
/// complete intersection. Coefficients are ignored.
pub fn build_program(polys: &[QPoly], c: usize) -> Result<ExponentProgram, NewtonError> {
    let n = polys.first().map(|f| f.nvars()).unwrap_or(0);
    let mut blocks = Vec::with_capacity(polys.len());
    for (i, f) in polys.iter().enumerate() {
        if f.is_zero() {
            return Err(NewtonError::ZeroPolynomial(i + 1));
        }
        if !f.vanishes_at_origin() {
            return Err(NewtonError::ConstantTerm { index: i + 1 });
        }
        blocks.push(f.exponents().cloned().collect());
    }
    ExponentProgram::new(n, c, blocks)
}

pub fn solve_lct_lp(prog: &ExponentProgram) -> Result<LpSolution, NewtonError> {
    let lp = prog.linear_program();
    let out = lp.solve();
    match out.status {
        LpStatus::Infeasible => Err(NewtonError::Infeasible),
        LpStatus::Unbounded => Err(NewtonError::Unbounded),
        LpStatus::Optimal => {
            debug_assert!(lp.verify_certificate(&out));
            Ok(LpSolution {
                status: out.status,
                value: out.value,
                sigma: out.x,
                dual: out.dual,
            })
        }
    }
}

fn howald_program(exps: &[ExponentVector], n: usize) -> Result<LinearProgram, NewtonError> {
    if exps.is_empty() {
        return Err(NewtonError::EmptyIdeal);
    }
    for (j, a) in exps.iter().enumerate() {
        if a.len() != n || a.is_zero() {
            return Err(NewtonError::BadExponent(j + 1));
        }
    }
    let mut lp = LinearProgram::maximize(vec![BigRational::one(); exps.len()]);
    for k in 0..n {
        let row = exps
            .iter()
            .map(|a| BigRational::from_integer(BigInt::from(a.entries()[k])))
            .collect();
        lp.add(row, Relation::Le, BigRational::one());
    }
    Ok(lp)
}

/// `max{t : 1 ∈ t·P(a)}` for the monomial ideal generated by `x^{a_j}`.
pub fn howald_lct(exps: &[ExponentVector], n: usize) -> Result<BigRational, NewtonError> {
    let lp = howald_program(exps, n)?;
    let out = lp.solve();
    match out.status {
        LpStatus::Optimal => Ok(out.value),
        LpStatus::Unbounded => Err(NewtonError::Unbounded),
        LpStatus::Infeasible => Err(NewtonError::Infeasible),
    }
}

/// Whether `1` lies in the interior of `t·P(a)`; `t > 0`.
pub fn interior_test(exps: &[ExponentVector], n: usize, t: &BigRational) -> Result<bool, NewtonError> {
    Ok(howald_lct(exps, n)? > *t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaWitness {
    pub nonzero: bool,
    /// `Π_i (Σ_j σ_ij(p-1))! / Π_j (σ_ij(p-1))!  mod p`
    pub residue: u64,
    /// Per-block exponents `σ_ij (p-1)`.
    pub exponents: Vec<Vec<u64>>,
}

/// The coefficient of `Π u_ij^{σ_ij(p-1)}` in θ_{σ,p}: a product of
/// multinomials, reduced mod `p`.
pub fn theta_nonvanishing(
    prog: &ExponentProgram,
    sigma: &[BigRational],
    p: u64,
) -> Result<ThetaWitness, NewtonError> {
    if !crate::arith::is_prime(p) {
        return Err(NewtonError::NotPrime(p));
    }
    if sigma.len() != prog.num_columns() {
        return Err(NewtonError::SigmaShape {
            expected: prog.num_columns(),
            got: sigma.len(),
        });
    }
    let scale = BigRational::from_integer(BigInt::from(p - 1));
    let table = FactorialTable::new(p);
    let mut residue = 1 % p;
    let mut exponents = Vec::with_capacity(prog.s());
    let mut offset = 0;
    for (i, block) in prog.blocks().iter().enumerate() {
        let mut parts = Vec::with_capacity(block.len());
        for (j, s) in sigma[offset..offset + block.len()].iter().enumerate() {
            let v = s * &scale;
            let k = (v.is_integer() && v >= BigRational::zero())
                .then(|| v.to_integer().to_u64())
                .flatten()
                .ok_or_else(|| NewtonError::NonIntegralExponent {
                    block: i + 1,
                    term: j + 1,
                    value: v.to_string(),
                })?;
            parts.push(k);
        }
        let sum: u64 = parts.iter().sum();
        if sum > p - 1 {
            return Err(NewtonError::BlockSumExceedsPMinusOne {
                block: i + 1,
                sum,
                limit: p - 1,
            });
        }
        residue = crate::arith::mul_mod(residue, table.multinomial(&parts), p);
        exponents.push(parts);
        offset += block.len();
    }
    Ok(ThetaWitness {
        nonzero: residue != 0,
        residue,
        exponents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_qpoly;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    pub(crate) fn minors_program() -> ExponentProgram {
        let polys: Vec<QPoly> = ["x1*x5 - x2*x4", "x2*x6 - x3*x5", "x1*x6 - x3*x4"]
            .iter()
            .map(|s| parse_qpoly(s, 6).unwrap())
            .collect();
        build_program(&polys, 0).unwrap()
    }

    #[test]
    fn build_examples() {
        let prog = minors_program();
        assert_eq!(prog.block_sizes(), vec![2, 2, 2]);
        let first: Vec<&ExponentVector> = prog.blocks()[0].iter().collect();
        assert!(first.contains(&&ev(&[1, 0, 0, 0, 1, 0])));
        assert!(first.contains(&&ev(&[0, 1, 0, 1, 0, 0])));

        let single = build_program(&[parse_qpoly("x1^2", 1).unwrap()], 0).unwrap();
        assert_eq!(single.a_tilde(), vec![vec![q(2, 1)], vec![q(1, 1)]]);

        let two = build_program(&[parse_qpoly("x1", 2).unwrap(), parse_qpoly("x2", 2).unwrap()], 1).unwrap();
        assert_eq!(
            two.a_tilde(),
            vec![
                vec![q(1, 1), q(0, 1)],
                vec![q(0, 1), q(1, 1)],
                vec![q(1, 1), q(0, 1)],
                vec![q(0, 1), q(1, 1)],
            ]
        );
    }

    #[test]
    fn build_errors() {
        let z = QPoly::zero(crate::poly::Rationals, 1);
        assert_eq!(build_program(&[z], 0), Err(NewtonError::ZeroPolynomial(1)));
        let f = parse_qpoly("x1 + 1", 1).unwrap();
        assert_eq!(build_program(&[f], 0), Err(NewtonError::ConstantTerm { index: 1 }));
        let g = parse_qpoly("x1", 1).unwrap();
        assert!(matches!(build_program(&[g], 2), Err(NewtonError::TooManyCompleteIntersections { .. })));
    }

    #[test]
    fn solve_examples() {
        let sol = solve_lct_lp(&minors_program()).unwrap();
        assert_eq!(sol.value, q(3, 1));
        assert!(minors_program().linear_program().verify_certificate(&LpOutcome {
            status: sol.status,
            value: sol.value.clone(),
            x: sol.sigma.clone(),
            dual: sol.dual.clone(),
        }));

        let single = build_program(&[parse_qpoly("x1^2", 1).unwrap()], 0).unwrap();
        let sol = solve_lct_lp(&single).unwrap();
        assert_eq!(sol.value, q(1, 2));
        assert_eq!(sol.sigma, vec![q(1, 2)]);

        let two = build_program(&[parse_qpoly("x1", 2).unwrap(), parse_qpoly("x2", 2).unwrap()], 1).unwrap();
        let sol = solve_lct_lp(&two).unwrap();
        assert_eq!(sol.value, q(1, 1));
        assert_eq!(sol.sigma, vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn infeasible_complete_intersection() {
        // x1^2 as a complete-intersection block needs σ = 1 but 2σ ≤ 1
        let prog = build_program(&[parse_qpoly("x1^2", 2).unwrap(), parse_qpoly("x2", 2).unwrap()], 1).unwrap();
        assert_eq!(solve_lct_lp(&prog), Err(NewtonError::Infeasible));
    }

    #[test]
    fn howald_examples() {
        for a in 1..=7u32 {
            assert_eq!(howald_lct(&[ev(&[a])], 1).unwrap(), q(1, a as i64));
        }
        assert_eq!(howald_lct(&[ev(&[1, 0]), ev(&[0, 1])], 2).unwrap(), q(2, 1));
        assert_eq!(howald_lct(&[ev(&[2, 0, 0]), ev(&[0, 3, 0]), ev(&[0, 0, 6])], 3).unwrap(), q(1, 1));
        // x^2 y^2 with x^4 and y^4: the middle point lies on the segment, lct 1/2
        assert_eq!(howald_lct(&[ev(&[4, 0]), ev(&[2, 2]), ev(&[0, 4])], 2).unwrap(), q(1, 2));
        assert!(howald_lct(&[], 1).is_err());
        assert!(howald_lct(&[ev(&[0, 0])], 2).is_err());
    }

    #[test]
    fn interior_examples() {
        let xy = [ev(&[1, 0]), ev(&[0, 1])];
        assert!(interior_test(&xy, 2, &q(1, 1)).unwrap());
        assert!(!interior_test(&xy, 2, &q(2, 1)).unwrap());
        assert!(interior_test(&[ev(&[2])], 1, &q(1, 3)).unwrap());
    }

    #[test]
    fn theta_examples() {
        let one = build_program(&[parse_qpoly("x1", 1).unwrap()], 0).unwrap();
        for p in [2u64, 3, 5, 97] {
            let w = theta_nonvanishing(&one, &[q(1, 1)], p).unwrap();
            assert!(w.nonzero);
            assert_eq!(w.residue, 1);
        }
        let two = build_program(&[parse_qpoly("x1 + x2", 2).unwrap()], 0).unwrap();
        let w = theta_nonvanishing(&two, &[q(1, 2), q(1, 2)], 5).unwrap();
        assert_eq!((w.nonzero, w.residue), (true, 1));
        let w = theta_nonvanishing(&two, &[q(1, 1), q(0, 1)], 7).unwrap();
        assert_eq!(w.residue, 1);
        assert!(matches!(
            theta_nonvanishing(&two, &[q(1, 3), q(0, 1)], 5),
            Err(NewtonError::NonIntegralExponent { .. })
        ));
        assert!(matches!(
            theta_nonvanishing(&two, &[q(1, 1), q(1, 1)], 5),
            Err(NewtonError::BlockSumExceedsPMinusOne { sum: 8, .. })
        ));
    }
}
