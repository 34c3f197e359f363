//! Dense two-phase primal simplex over exact rationals with Bland's rule.
//!
//! Problems have the form `maximize c·x subject to rows (≤ | = | ≥) b,
//! x ≥ 0`. Optimal outcomes carry a dual vector `y` with `A^T y ≥ c`,
//! sign conditions matching each row's relation, and `b·y = c·x` exactly.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<BigRational>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub value: BigRational,
    pub x: Vec<BigRational>,
    pub dual: Vec<BigRational>,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<BigRational>) -> Self {
        LinearProgram {
            num_vars: objective.len(),
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn minimize(objective: Vec<BigRational>) -> MinimizeProgram {
        MinimizeProgram(Self::maximize(objective.into_iter().map(|c| -c).collect()))
    }

    pub fn add(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[BigRational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::new(self).run(self)
    }

    /// Exact check of primal feasibility, dual feasibility and equal values.
    pub fn verify_certificate(&self, out: &LpOutcome) -> bool {
        if out.status != LpStatus::Optimal
            || out.x.len() != self.num_vars
            || out.dual.len() != self.constraints.len()
        {
            return false;
        }
        if out.x.iter().any(|v| v.is_negative()) {
            return false;
        }
        for con in &self.constraints {
            let lhs = dot(&con.coeffs, &out.x);
            let ok = match con.relation {
                Relation::Le => lhs <= con.rhs,
                Relation::Eq => lhs == con.rhs,
                Relation::Ge => lhs >= con.rhs,
            };
            if !ok {
                return false;
            }
        }
        for (con, y) in self.constraints.iter().zip(&out.dual) {
            let ok = match con.relation {
                Relation::Le => !y.is_negative(),
                Relation::Ge => !y.is_positive(),
                Relation::Eq => true,
            };
            if !ok {
                return false;
            }
        }
        for j in 0..self.num_vars {
            let col: BigRational = self
                .constraints
                .iter()
                .zip(&out.dual)
                .map(|(con, y)| &con.coeffs[j] * y)
                .sum();
            if col < self.objective[j] {
                return false;
            }
        }
        let primal = dot(&self.objective, &out.x);
        let dual: BigRational = self
            .constraints
            .iter()
            .zip(&out.dual)
            .map(|(con, y)| &con.rhs * y)
            .sum();
        primal == out.value && dual == out.value
    }
}

/// A minimization problem, solved as the maximization of the negated
/// objective; reported values are un-negated.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeProgram(LinearProgram);

impl MinimizeProgram {
    pub fn add(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        self.0.add(coeffs, relation, rhs)
    }

    pub fn solve(&self) -> LpOutcome {
        let mut out = self.0.solve();
        out.value = -out.value;
        for y in &mut out.dual {
            *y = -y.clone();
        }
        out
    }
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Original,
    Slack,
    Surplus,
    Artificial,
}

struct Tableau {
    /// `rows × (cols + 1)`, last entry is the right-hand side.
    rows: Vec<Vec<BigRational>>,
    kinds: Vec<ColumnKind>,
    basis: Vec<usize>,
    /// Column that started as the unit vector of each row.
    unit_col: Vec<usize>,
    /// `-1` where the row was negated to make its right-hand side nonnegative.
    row_sign: Vec<BigRational>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let mut kinds = vec![ColumnKind::Original; lp.num_vars];
        let mut row_sign = Vec::with_capacity(m);
        let mut normalized = Vec::with_capacity(m);
        for con in &lp.constraints {
            if con.rhs.is_negative() {
                let flipped = match con.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                normalized.push((con.coeffs.iter().map(|c| -c).collect::<Vec<_>>(), flipped, -&con.rhs));
                row_sign.push(-BigRational::one());
            } else {
                normalized.push((con.coeffs.clone(), con.relation, con.rhs.clone()));
                row_sign.push(BigRational::one());
            }
        }
        // column layout: originals, then per row its extra columns
        let mut extra: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); m];
        let mut unit_col = vec![0; m];
        for (i, (_, rel, _)) in normalized.iter().enumerate() {
            match rel {
                Relation::Le => {
                    unit_col[i] = kinds.len();
                    extra[i].push((kinds.len(), BigRational::one()));
                    kinds.push(ColumnKind::Slack);
                }
                Relation::Ge => {
                    extra[i].push((kinds.len(), -BigRational::one()));
                    kinds.push(ColumnKind::Surplus);
                    unit_col[i] = kinds.len();
                    extra[i].push((kinds.len(), BigRational::one()));
                    kinds.push(ColumnKind::Artificial);
                }
                Relation::Eq => {
                    unit_col[i] = kinds.len();
                    extra[i].push((kinds.len(), BigRational::one()));
                    kinds.push(ColumnKind::Artificial);
                }
            }
        }
        let width = kinds.len();
        let rows = normalized
            .into_iter()
            .zip(extra)
            .map(|((coeffs, _, rhs), ex)| {
                let mut row = coeffs;
                row.resize(width, BigRational::zero());
                for (j, v) in ex {
                    row[j] = v;
                }
                row.push(rhs);
                row
            })
            .collect();
        Tableau {
            rows,
            kinds,
            basis: unit_col.clone(),
            unit_col,
            row_sign,
        }
    }

    fn width(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let inv = BigRational::one() / &self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Reduced costs `c_j - c_B B^{-1} A_j` for the given column costs.
    fn reduced_costs(&self, cost: &[BigRational]) -> Vec<BigRational> {
        let mut d = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row.iter()) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Bland-rule simplex iterations maximizing `cost`. Returns false when
    /// the objective is unbounded.
    fn optimize(&mut self, cost: &[BigRational], allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let d = self.reduced_costs(cost);
            let entering = (0..self.width()).find(|&j| allowed(j) && d[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let rhs = self.width();
            let mut best: Option<(usize, BigRational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }

    fn objective_value(&self, cost: &[BigRational]) -> BigRational {
        let rhs = self.width();
        self.rows
            .iter()
            .zip(&self.basis)
            .map(|(row, &b)| &cost[b] * &row[rhs])
            .sum()
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let width = self.width();
        let has_artificial = self.kinds.contains(&ColumnKind::Artificial);
        if has_artificial {
            let phase1: Vec<BigRational> = self
                .kinds
                .iter()
                .map(|k| match k {
                    ColumnKind::Artificial => -BigRational::one(),
                    _ => BigRational::zero(),
                })
                .collect();
            let bounded = self.optimize(&phase1, &|_| true);
            debug_assert!(bounded, "phase one is bounded by zero");
            if self.objective_value(&phase1).is_negative() {
                return LpOutcome {
                    status: LpStatus::Infeasible,
                    value: BigRational::zero(),
                    x: Vec::new(),
                    dual: Vec::new(),
                };
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..self.rows.len() {
                if self.kinds[self.basis[r]] != ColumnKind::Artificial {
                    continue;
                }
                if let Some(col) = (0..width)
                    .find(|&j| self.kinds[j] != ColumnKind::Artificial && !self.rows[r][j].is_zero())
                {
                    self.pivot(r, col);
                }
            }
        }
        let mut cost = vec![BigRational::zero(); width];
        cost[..lp.num_vars].clone_from_slice(&lp.objective);
        let kinds = self.kinds.clone();
        let bounded = self.optimize(&cost, &|j| kinds[j] != ColumnKind::Artificial);
        if !bounded {
            return LpOutcome {
                status: LpStatus::Unbounded,
                value: BigRational::zero(),
                x: Vec::new(),
                dual: Vec::new(),
            };
        }
        let mut x = vec![BigRational::zero(); lp.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < lp.num_vars {
                x[b] = row[width].clone();
            }
        }
        // y_i = c_B · (B^{-1})_{·,i}, read off the columns that started as units
        let dual = self
            .unit_col
            .iter()
            .zip(&self.row_sign)
            .map(|(&col, sign)| {
                let y: BigRational = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| &cost[b] * &row[col])
                    .sum();
                y * sign
            })
            .collect();
        LpOutcome {
            status: LpStatus::Optimal,
            value: dot(&lp.objective, &x),
            x,
            dual,
        }
    }
}
