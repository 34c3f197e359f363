//! Checks whether some optimal σ of the threshold program is the only
//! optimal solution with its image `Ã σ`.
//!
//! For an optimal σ the fiber `{σ' ≥ 0 : Ã σ' = Ã σ}` already lies in the
//! optimal face (the block rows of `Ã` carry the objective and the
//! complete-intersection sums), so σ qualifies iff that fiber is the single
//! point σ. With `S = supp σ` this holds iff
//!
//! * `max Σ_{j∉S} σ'_j` over the fiber is zero, and
//! * the columns of `Ã` indexed by `S` are linearly independent.
//!
//! Shrinking the support only makes both conditions easier, and every point
//! of the optimal face has a support containing that of some vertex. So it
//! suffices to test the vertices of the optimal face. They are enumerated
//! exhaustively through basic solutions when the basis count is small, and
//! otherwise sampled (the returned solution plus the coordinate-extreme
//! vertices of the face).

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::simplex::{LinearProgram, LpStatus, Relation};
use super::{ExponentProgram, LpSolution};

/// Largest number of candidate bases examined exhaustively.
pub const EXHAUSTIVE_BASIS_LIMIT: u64 = 250_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum UniquenessMethod {
    /// Every vertex of the optimal face was tested.
    Exhaustive,
    /// Only the returned solution and coordinate-extreme vertices were tested.
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub unique: bool,
    pub method: UniquenessMethod,
    /// An optimal σ whose image determines it, when one was found.
    pub witness: Option<Vec<BigRational>>,
    pub vertices_examined: usize,
}

pub fn uniqueness_check(prog: &ExponentProgram, sol: &LpSolution) -> bool {
    uniqueness_report(prog, sol).unique
}

pub fn uniqueness_report(prog: &ExponentProgram, sol: &LpSolution) -> UniquenessReport {
    assert_eq!(sol.status, LpStatus::Optimal, "uniqueness needs an optimal solution");
    let a = prog.a_tilde();
    let (vertices, method) = match face_vertices(prog, sol) {
        Some(v) => (v, UniquenessMethod::Exhaustive),
        None => (sampled_vertices(prog, sol), UniquenessMethod::Sampled),
    };
    let mut examined = 0;
    for v in &vertices {
        examined += 1;
        if fiber_is_singleton(&a, v) {
            return UniquenessReport {
                unique: true,
                method,
                witness: Some(v.clone()),
                vertices_examined: examined,
            };
        }
    }
    UniquenessReport {
        unique: false,
        method,
        witness: None,
        vertices_examined: examined,
    }
}

fn fiber_is_singleton(a: &[Vec<BigRational>], sigma: &[BigRational]) -> bool {
    let m = sigma.len();
    let outside: Vec<bool> = sigma.iter().map(|s| s.is_zero()).collect();
    if outside.iter().any(|&o| o) {
        let objective = outside
            .iter()
            .map(|&o| if o { BigRational::one() } else { BigRational::zero() })
            .collect();
        let mut lp = LinearProgram::maximize(objective);
        for row in a {
            let target = row.iter().zip(sigma).map(|(x, s)| x * s).sum();
            lp.add(row.clone(), Relation::Eq, target);
        }
        let out = lp.solve();
        if out.status != LpStatus::Optimal || out.value.is_positive() {
            return false;
        }
    }
    let support: Vec<usize> = (0..m).filter(|&j| !outside[j]).collect();
    let sub: Vec<Vec<BigRational>> = a
        .iter()
        .map(|row| support.iter().map(|&j| row[j].clone()).collect())
        .collect();
    rank(sub) == support.len()
}

/// Standard-form system for the optimal face. A variable whose reduced cost
/// under the optimal dual is positive vanishes on the whole face, so only the
/// remaining columns are kept; on them every feasible point is optimal.
/// Returns the rows, right-hand sides, and for each kept column its index in
/// σ (`None` for slacks).
fn face_system(prog: &ExponentProgram, sol: &LpSolution) -> (Vec<Vec<BigRational>>, Vec<BigRational>, Vec<Option<usize>>) {
    let lp = prog.linear_program();
    let m = prog.num_columns();
    let cons = lp.constraints();
    let mut kept: Vec<Option<usize>> = (0..m)
        .filter(|&j| {
            let reduced: BigRational = cons.iter().zip(&sol.dual).map(|(c, y)| &c.coeffs[j] * y).sum::<BigRational>()
                - &lp.objective()[j];
            reduced.is_zero()
        })
        .map(Some)
        .collect();
    let mut slack_of_row = vec![None; cons.len()];
    for (i, (c, y)) in cons.iter().zip(&sol.dual).enumerate() {
        if c.relation == Relation::Le && y.is_zero() {
            slack_of_row[i] = Some(kept.len());
            kept.push(None);
        }
    }
    let mut rows = Vec::with_capacity(cons.len());
    let mut rhs = Vec::with_capacity(cons.len());
    for (i, con) in cons.iter().enumerate() {
        let mut row: Vec<BigRational> = kept
            .iter()
            .map(|k| k.map_or_else(BigRational::zero, |j| con.coeffs[j].clone()))
            .collect();
        if let Some(k) = slack_of_row[i] {
            row[k] = BigRational::one();
        }
        rows.push(row);
        rhs.push(con.rhs.clone());
    }
    (rows, rhs, kept)
}

fn face_vertices(prog: &ExponentProgram, sol: &LpSolution) -> Option<Vec<Vec<BigRational>>> {
    let m = prog.num_columns();
    let (rows, rhs, kept) = face_system(prog, sol);
    let width = kept.len();
    let (rows, rhs) = independent_rows(rows, rhs);
    let r = rows.len();
    if binomial(width as u64, r as u64) > EXHAUSTIVE_BASIS_LIMIT {
        return None;
    }
    let mut found = BTreeSet::new();
    let mut subset: Vec<usize> = (0..r).collect();
    loop {
        let mat: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|row| subset.iter().map(|&j| row[j].clone()).collect())
            .collect();
        if let Some(xb) = solve_square(mat, rhs.clone()) {
            if xb.iter().all(|v| !v.is_negative()) {
                let mut x = vec![BigRational::zero(); m];
                for (&k, v) in subset.iter().zip(xb) {
                    if let Some(j) = kept[k] {
                        x[j] = v;
                    }
                }
                found.insert(x);
            }
        }
        if r == 0 || !next_combination(&mut subset, width) {
            break;
        }
    }
    Some(found.into_iter().collect())
}

fn sampled_vertices(prog: &ExponentProgram, sol: &LpSolution) -> Vec<Vec<BigRational>> {
    let m = prog.num_columns();
    let base = prog.linear_program();
    let mut out = vec![sol.sigma.clone()];
    let mut seen: BTreeSet<Vec<BigRational>> = out.iter().cloned().collect();
    for j in 0..m {
        for sign in [-1i64, 1] {
            let mut objective = vec![BigRational::zero(); m];
            objective[j] = BigRational::from_integer(sign.into());
            let mut lp = LinearProgram::maximize(objective);
            for con in base.constraints() {
                lp.add(con.coeffs.clone(), con.relation, con.rhs.clone());
            }
            lp.add(base.objective().to_vec(), Relation::Eq, sol.value.clone());
            let res = lp.solve();
            if res.status == LpStatus::Optimal && seen.insert(res.x.clone()) {
                out.push(res.x);
            }
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u64::MAX,
        };
    }
    acc
}

fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in (0..k).rev() {
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Drops rows dependent on earlier ones (the system is consistent).
fn independent_rows(rows: Vec<Vec<BigRational>>, rhs: Vec<BigRational>) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let mut kept: Vec<Vec<BigRational>> = Vec::new();
    let mut kept_rhs = Vec::new();
    for (row, b) in rows.into_iter().zip(rhs) {
        let mut trial = kept.clone();
        trial.push(row.clone());
        if rank(trial) > kept.len() {
            kept.push(row);
            kept_rhs.push(b);
        }
    }
    (kept, kept_rhs)
}

pub(crate) fn rank(mut mat: Vec<Vec<BigRational>>) -> usize {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, piv);
        let inv = BigRational::one() / &mat[r][c];
        let pivot_row: Vec<BigRational> = mat[r].iter().map(|v| v * &inv).collect();
        for row in mat.iter_mut().skip(r + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

fn solve_square(mut mat: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = mat.len();
    for c in 0..n {
        let piv = (c..n).find(|&i| !mat[i][c].is_zero())?;
        mat.swap(c, piv);
        rhs.swap(c, piv);
        let inv = BigRational::one() / &mat[c][c];
        for v in mat[c].iter_mut() {
            *v *= &inv;
        }
        rhs[c] *= &inv;
        let pivot_row = mat[c].clone();
        let pivot_rhs = rhs[c].clone();
        for i in 0..n {
            if i == c || mat[i][c].is_zero() {
                continue;
            }
            let f = mat[i][c].clone();
            for (v, p) in mat[i].iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
            rhs[i] -= &f * &pivot_rhs;
        }
    }
    Some(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton_lp::{build_program, solve_lct_lp};
    use crate::poly::parse_qpoly;

    fn program(polys: &[&str], n: usize, c: usize) -> ExponentProgram {
        let polys: Vec<_> = polys.iter().map(|s| parse_qpoly(s, n).unwrap()).collect();
        build_program(&polys, c).unwrap()
    }

    #[test]
    fn minors_fail_uniqueness() {
        let prog = program(&["x1*x5 - x2*x4", "x2*x6 - x3*x5", "x1*x6 - x3*x4"], 6, 0);
        let sol = solve_lct_lp(&prog).unwrap();
        let report = uniqueness_report(&prog, &sol);
        assert!(!report.unique);
        assert_eq!(report.method, UniquenessMethod::Exhaustive);
        // the optimal face is the segment σ = (a, 1-a, a, 1-a, 1-a, a) in
        // column order; both endpoints are vertices
        assert_eq!(report.vertices_examined, 2);
    }

    #[test]
    fn simple_programs_are_unique() {
        let single = program(&["x1^2"], 1, 0);
        assert!(uniqueness_check(&single, &solve_lct_lp(&single).unwrap()));
        let xy = program(&["x1", "x2"], 2, 0);
        let sol = solve_lct_lp(&xy).unwrap();
        let report = uniqueness_report(&xy, &sol);
        assert!(report.unique);
        assert_eq!(report.witness, Some(sol.sigma.clone()));
        let cusp = program(&["x1^2 + x2^3"], 2, 0);
        assert!(uniqueness_check(&cusp, &solve_lct_lp(&cusp).unwrap()));
    }

    #[test]
    fn collinear_terms_are_not_unique() {
        // x1^2 + x1*x2 + x2^2: the middle exponent is the average of the
        // outer ones, so (1/2, 0, 1/2) and (0, 1, 0) share an image
        let prog = program(&["x1^2 + x1*x2 + x2^2"], 2, 0);
        let sol = solve_lct_lp(&prog).unwrap();
        assert_eq!(sol.value, BigRational::one());
        assert!(!uniqueness_check(&prog, &sol));
    }

    #[test]
    fn rank_and_solve() {
        let r = |v: i64| BigRational::from_integer(v.into());
        assert_eq!(rank(vec![vec![r(1), r(2)], vec![r(2), r(4)]]), 1);
        assert_eq!(rank(vec![vec![r(1), r(2)], vec![r(0), r(4)]]), 2);
        assert_eq!(
            solve_square(vec![vec![r(2), r(1)], vec![r(1), r(3)]], vec![r(3), r(5)]),
            Some(vec![BigRational::new(4.into(), 5.into()), BigRational::new(7.into(), 5.into())])
        );
        assert_eq!(binomial(15, 10), 3003);
    }
}
