//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Solves `min c.x` subject to linear rows `a.x (<=|>=|=) b` and `x >= 0`.
//! Meant for the desk-scale covering programs in this crate: a few hundred
//! variables and rows at most.

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct LinearProgram {
    /// Minimized.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, rel, rhs });
        self
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }
}

struct Tableau {
    /// `rows` constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, &pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on the objective row over the columns in `allowed`.
    /// Returns `false` if the program is unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> Result<bool> {
        let obj = self.rows();
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && self.t[obj][j] < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows() {
                let a = self.t[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.t[r][self.cols] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            ratio < br - PIVOT_TOL
                                || (ratio <= br + PIVOT_TOL && self.basis[r] < bb)
                        }
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            match best {
                None => return Ok(false),
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::Numerical(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.vars();
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
    }
    // Normalize to nonnegative right-hand sides.
    let rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let rel = match c.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs)
            } else {
                (c.coeffs.clone(), c.rel, c.rhs)
            }
        })
        .collect();

    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + slacks + artificials;
    let m = rows.len();
    let mut t = vec![vec![0.0; cols + 1]; m + 1];
    let mut basis = vec![0; m];
    let (mut s, mut a) = (n, n + slacks);
    let mut is_art = vec![false; cols];
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coeffs);
        t[i][cols] = *rhs;
        match rel {
            Relation::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
            Relation::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, cols };

    // Phase 1: minimize the sum of artificials.
    if artificials > 0 {
        for j in 0..=cols {
            let mut v = if j < cols && is_art[j] { 1.0 } else { 0.0 };
            for i in 0..m {
                if is_art[tab.basis[i]] {
                    v -= tab.t[i][j];
                }
            }
            tab.t[m][j] = v;
        }
        let all = vec![true; cols];
        tab.optimize(&all)?;
        if -tab.t[m][cols] > 1e-7 {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows() {
            if is_art[tab.basis[r]] {
                if let Some(c) = (0..cols).find(|&j| !is_art[j] && tab.t[r][j].abs() > PIVOT_TOL) {
                    tab.pivot(r, c);
                } else {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
    }

    // Phase 2: the real objective, artificial columns frozen out.
    let rows_now = tab.rows();
    for j in 0..=cols {
        let cj = if j < n { lp.objective[j] } else { 0.0 };
        let mut v = cj;
        for i in 0..rows_now {
            let b = tab.basis[i];
            let cb = if b < n { lp.objective[b] } else { 0.0 };
            v -= cb * tab.t[i][j];
        }
        tab.t[rows_now][j] = if j < cols && is_art[j] { 0.0 } else { v };
    }
    let allowed: Vec<bool> = is_art.iter().map(|&x| !x).collect();
    if !tab.optimize(&allowed)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[i][cols].max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, objective })
}
