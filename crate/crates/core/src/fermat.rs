//! Frobenius action on the degree `-d` piece of the top local cohomology of
//! the Fermat hypersurface `f = x_0^d + ... + x_n^d` over `F_p`.
//!
//! The piece has basis `ξ_b = [1 / x^b]` over vectors `b` with every
//! `b_i ≥ 1` and `Σ b_i = d`. The twisted Frobenius `f^{p-1} F` sends
//! `ξ_b` to `f^{p-1} / x^{p b}`; a term `x^a` of `f^{p-1}` contributes to
//! `ξ_{p b - a}` when every coordinate of `p b - a` is positive and dies
//! otherwise. Terms of `f^{p-1}` are `x^{d c}` with multinomial
//! coefficients `(p-1)! / Π c_i!`.
//!
//! The degree-zero piece of the cohomology vanishes, so in degree `-d`
//! the annihilator of `f` is the whole graded piece and no separate kernel
//! condition is needed.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{self, FactorialTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FermatError {
    #[error("empty basis: degree {d} ≤ dimension {n}")]
    EmptyBasis { n: usize, d: u32 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("need n ≥ 1 and d ≥ 1, got n = {n}, d = {d}")]
    BadShape { n: usize, d: u32 },
}

/// Vectors `b ∈ Z^{n+1}` with `b_i ≥ 1`, `Σ b_i = d`, lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeMonomialBasis {
    n: usize,
    d: u32,
    basis: Vec<Vec<u32>>,
}

impl NegativeMonomialBasis {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn vectors(&self) -> &[Vec<u32>] {
        &self.basis
    }
    pub fn len(&self) -> usize {
        self.basis.len()
    }
    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
    pub fn index_of(&self, b: &[u32]) -> Option<usize> {
        self.basis.binary_search_by(|v| v.as_slice().cmp(b)).ok()
    }
}

pub fn build_basis(n: usize, d: u32) -> Result<NegativeMonomialBasis, FermatError> {
    if n == 0 || d == 0 {
        return Err(FermatError::BadShape { n, d });
    }
    let mut basis = Vec::new();
    let mut current = Vec::with_capacity(n + 1);
    compositions(n + 1, d, 1, &mut current, &mut basis);
    Ok(NegativeMonomialBasis { n, d, basis })
}

/// All vectors of `parts` entries `≥ min` summing to `total`, lexicographic.
fn compositions(parts: usize, total: u32, min: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 0 {
        if total == 0 {
            out.push(current.clone());
        }
        return;
    }
    let rest_min = min * (parts as u32 - 1);
    if total < rest_min + min {
        return;
    }
    for v in min..=total - rest_min {
        current.push(v);
        compositions(parts - 1, total - v, min, current, out);
        current.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusMatrix {
    p: u64,
    basis: NegativeMonomialBasis,
    /// Row-major, `entries[row][col]`, residues in `[0, p)`.
    entries: Vec<Vec<u64>>,
}

impl FrobeniusMatrix {
    pub fn prime(&self) -> u64 {
        self.p
    }
    pub fn basis(&self) -> &NegativeMonomialBasis {
        &self.basis
    }
    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn rank(&self) -> usize {
        rank_mod_p(self.entries.clone(), self.p)
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.dim()
    }
}

impl fmt::Display for FrobeniusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.p.saturating_sub(1).to_string().len();
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn build_frobenius_matrix(n: usize, d: u32, p: u64) -> Result<FrobeniusMatrix, FermatError> {
    if !arith::is_prime(p) {
        return Err(FermatError::NotPrime(p));
    }
    let basis = build_basis(n, d)?;
    if basis.is_empty() {
        return Err(FermatError::EmptyBasis { n, d });
    }
    let table = FactorialTable::new(p);
    let columns: Vec<Vec<u64>> = basis
        .vectors()
        .par_iter()
        .map(|b| frobenius_column(&basis, b, p, &table))
        .collect();
    let dim = basis.len();
    let entries = (0..dim)
        .map(|r| columns.iter().map(|col| col[r]).collect())
        .collect();
    Ok(FrobeniusMatrix { p, basis, entries })
}

fn frobenius_column(basis: &NegativeMonomialBasis, b: &[u32], p: u64, table: &FactorialTable) -> Vec<u64> {
    let d = basis.d() as u64;
    // c_i ≤ (p b_i - 1) / d keeps p b_i - d c_i ≥ 1
    let caps: Vec<u64> = b.iter().map(|&bi| (p * bi as u64 - 1) / d).collect();
    let mut col = vec![0u64; basis.len()];
    let mut c = Vec::with_capacity(b.len());
    let mut visit = |c: &[u64]| {
        let coeff = table.multinomial(c);
        if coeff == 0 {
            return;
        }
        let target: Vec<u32> = b
            .iter()
            .zip(c)
            .map(|(&bi, &ci)| (p * bi as u64 - d * ci) as u32)
            .collect();
        let row = basis.index_of(&target).expect("target has degree d and positive entries");
        col[row] = (col[row] + coeff) % p;
    };
    bounded_compositions(&caps, p - 1, &mut c, &mut visit);
    col
}

/// Calls `visit` on every `c` with `0 ≤ c_i ≤ caps[i]` and `Σ c_i = total`.
fn bounded_compositions(caps: &[u64], total: u64, current: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64])) {
    let i = current.len();
    if i == caps.len() {
        if total == 0 {
            visit(current);
        }
        return;
    }
    let rest: u64 = caps[i + 1..].iter().sum();
    let lo = total.saturating_sub(rest);
    let hi = caps[i].min(total);
    for v in lo..=hi.max(lo) {
        if v > hi {
            break;
        }
        current.push(v);
        bounded_compositions(caps, total - v, current, visit);
        current.pop();
    }
}

/// Whether `f^{p-1} F` is bijective on the degree `-d` piece; vacuously
/// true when the piece is zero.
pub fn frobenius_injective(n: usize, d: u32, p: u64) -> Result<bool, FermatError> {
    match build_frobenius_matrix(n, d, p) {
        Ok(m) => Ok(m.is_invertible()),
        Err(FermatError::EmptyBasis { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FermatSweepRow {
    pub p: u64,
    pub injective: bool,
    pub rank: usize,
    pub dim: usize,
    /// `p ≡ 1 mod d`, the residue class where injectivity is expected.
    pub expected_class: bool,
}

pub fn fermat_sweep(n: usize, d: u32, primes: &[u64]) -> Result<Vec<FermatSweepRow>, FermatError> {
    primes
        .iter()
        .map(|&p| {
            let expected_class = p % d as u64 == 1 % d as u64;
            match build_frobenius_matrix(n, d, p) {
                Ok(m) => Ok(FermatSweepRow {
                    p,
                    injective: m.is_invertible(),
                    rank: m.rank(),
                    dim: m.dim(),
                    expected_class,
                }),
                Err(FermatError::EmptyBasis { .. }) => Ok(FermatSweepRow {
                    p,
                    injective: true,
                    rank: 0,
                    dim: 0,
                    expected_class,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn rank_mod_p(mut mat: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| mat[i][c] != 0) else {
            continue;
        };
        mat.swap(r, piv);
        let inv = arith::inv_mod(mat[r][c], p).expect("nonzero pivot");
        for v in mat[r].iter_mut() {
            *v = arith::mul_mod(*v, inv, p);
        }
        let pivot_row = mat[r].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = (*v + p - arith::mul_mod(f, *pv, p)) % p;
            }
        }
        r += 1;
    }
    r
}
