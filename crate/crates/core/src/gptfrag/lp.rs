//! Dense two-phase simplex for `min c·x  s.t.  A x = b, x ≥ 0`, with Bland's rule.

use serde::Serialize;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl LpProblem {
    /// Feasibility problem (zero objective) over `num_vars` nonnegative variables.
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, objective: vec![0.0; num_vars], rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<()> {
        if c.len() != self.num_vars {
            return Err(domain("objective length differs from the variable count"));
        }
        self.objective = c;
        Ok(())
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        if row.len() != self.num_vars {
            return Err(domain(format!("constraint row has {} entries, expected {}", row.len(), self.num_vars)));
        }
        if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
            return Err(domain("constraint entries must be finite"));
        }
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    /// Sparse variant of [`LpProblem::add_eq`].
    pub fn add_eq_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> Result<()> {
        let mut row = vec![0.0; self.num_vars];
        for &(j, v) in terms {
            if j >= self.num_vars {
                return Err(domain(format!("variable {j} out of range")));
            }
            row[j] += v;
        }
        self.add_eq(row, rhs)
    }

    /// Worst violation of `A x = b` and `x ≥ 0`, computed from the raw data.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        let neg = x.iter().fold(0.0f64, |m, &v| m.max(-v));
        eq.max(neg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point when `Feasible`, empty otherwise.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Raw-constraint violation of `x` (0 when infeasible).
    pub residual: f64,
    pub pivots: usize,
    pub diagnostic: Option<String>,
}

const MAX_PIVOTS: usize = 100_000;

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the RHS.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    tol: f64,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the objective row over columns `< allowed`, Bland's rule throughout.
    fn run(&mut self, allowed: usize) -> Result<Step> {
        let m = self.m();
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(Error::Numeric(format!("simplex exceeded {MAX_PIVOTS} pivots")));
            }
            let obj = &self.t[m];
            let Some(enter) = (0..allowed).find(|&j| obj[j] < -self.tol) else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][enter];
                if a > self.tol {
                    let ratio = self.t[i][self.width] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - self.tol || (ratio <= lr + self.tol && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(Step::Unbounded),
            }
        }
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let m = self.m();
        let mut row = vec![0.0; self.width + 1];
        row[..costs.len()].copy_from_slice(costs);
        for i in 0..m {
            let cb = row[self.basis[i]];
            if cb != 0.0 {
                for (v, tv) in row.iter_mut().zip(&self.t[i]) {
                    *v -= cb * tv;
                }
            }
        }
        self.t[m] = row;
    }
}

pub fn solve(problem: &LpProblem, tol: f64) -> Result<LpSolution> {
    let n = problem.num_vars;
    let m = problem.rows.len();
    let width = n + m;
    let mut t = Vec::with_capacity(m + 1);
    for (row, &b) in problem.rows.iter().zip(&problem.rhs) {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; width + 1];
        for (dst, &v) in r.iter_mut().zip(row) {
            *dst = sign * v;
        }
        r[width] = sign * b;
        t.push(r);
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[n + i] = 1.0;
    }
    t.push(vec![0.0; width + 1]);
    let mut tab = Tableau { t, basis: (n..n + m).collect(), width, tol, pivots: 0 };

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![0.0; width];
    phase1[n..].iter_mut().for_each(|c| *c = 1.0);
    tab.set_objective(&phase1);
    tab.run(width)?;
    let infeasibility = -tab.t[m][width];
    if infeasibility > tol * (1.0 + problem.rhs.iter().map(|b| b.abs()).sum::<f64>()) {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
            residual: 0.0,
            pivots: tab.pivots,
            diagnostic: Some(format!("phase-1 optimum {infeasibility:e} > 0")),
        });
    }

    // Drive remaining artificials out of the basis; rows where that is impossible are
    // linearly dependent on the others and are dropped.
    let mut r = 0;
    while r < tab.m() {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| tab.t[r][j].abs() > tol) {
                tab.pivot(r, c);
            } else {
                tab.t.remove(r);
                tab.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    tab.set_objective(&problem.objective);
    let step = tab.run(n)?;
    let mut x = vec![0.0; n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.t[i][tab.width];
        }
    }
    if let Step::Unbounded = step {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            residual: 0.0,
            pivots: tab.pivots,
            diagnostic: Some("objective decreases without bound".into()),
        });
    }
    let objective = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let residual = problem.violation(&x);
    Ok(LpSolution { status: LpStatus::Feasible, x, objective, residual, pivots: tab.pivots, diagnostic: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6  → x = 8/5, y = 6/5
        let mut p = LpProblem::new(4);
        p.add_eq(vec![1., 2., 1., 0.], 4.).unwrap();
        p.add_eq(vec![3., 1., 0., 1.], 6.).unwrap();
        p.set_objective(vec![-1., -1., 0., 0.]).unwrap();
        let s = solve(&p, 1e-9).unwrap();
        assert_eq!(s.status, LpStatus::Feasible);
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
        assert!((s.objective + 2.8).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = LpProblem::new(1);
        p.add_eq(vec![1.], -1.).unwrap();
        assert_eq!(solve(&p, 1e-9).unwrap().status, LpStatus::Infeasible);

        let mut p = LpProblem::new(2);
        p.add_eq(vec![1., -1.], 0.).unwrap();
        p.set_objective(vec![-1., 0.]).unwrap();
        assert_eq!(solve(&p, 1e-9).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut p = LpProblem::new(2);
        p.add_eq(vec![1., 1.], 1.).unwrap();
        p.add_eq(vec![2., 2.], 2.).unwrap();
        p.add_eq(vec![1., -1.], 0.).unwrap();
        let s = solve(&p, 1e-9).unwrap();
        assert_eq!(s.status, LpStatus::Feasible);
        assert!((s.x[0] - 0.5).abs() < 1e-12 && s.residual < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut p = LpProblem::new(7);
        p.add_eq(vec![0.25, -60., -0.04, 9., 1., 0., 0.], 0.).unwrap();
        p.add_eq(vec![0.5, -90., -0.02, 3., 0., 1., 0.], 0.).unwrap();
        p.add_eq(vec![0., 0., 1., 0., 0., 0., 1.], 1.).unwrap();
        p.set_objective(vec![-0.75, 150., -0.02, 6., 0., 0., 0.]).unwrap();
        let s = solve(&p, 1e-12).unwrap();
        assert_eq!(s.status, LpStatus::Feasible);
        assert!((s.objective + 0.05).abs() < 1e-10);
    }
}
