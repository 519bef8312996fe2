//! Dykstra alternating projections for dichotomic marginal problems.
//!
//! Both joint measurability and local-hidden-state decompositions ask for PSD
//! operators `X_a`, one per sign tuple `a ∈ {±1}^n`, with
//!
//! ```text
//! Σ_a X_a = T          Σ_a a_x X_a = O_x   (x = 1..n)
//! ```
//!
//! (`T = I` and `O_x = E₊|x − E₋|x` for measurements, `T = ρ_B` and
//! `O_x = σ₊|x − σ₋|x` for assemblages). The characters `1, a_1, …, a_n` are
//! orthogonal on `{±1}^n` with squared norm `2^n`, so the least-squares projection
//! onto the affine constraint set has the closed form
//!
//! ```text
//! X_a ← X_a + 2^{-n} [ (T − Σ_b X_b) + Σ_x a_x (O_x − Σ_b b_x X_b) ]
//! ```
//!
//! applied identically to every matrix entry.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{domain, Result};
use crate::matcore::{psd_project_raw, ComplexMatrix, HermitianOperator};

/// Index convention for sign tuples: bit `x` of `a` set means `a_x = −1`.
#[inline]
pub fn sign_of(a: usize, x: usize) -> f64 {
    if (a >> x) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign tuple `(a_0, …, a_{n−1})` of an index.
pub fn signs(a: usize, n: usize) -> Vec<i8> {
    (0..n).map(|x| sign_of(a, x) as i8).collect()
}

/// Index of a sign tuple (inverse of [`signs`]).
pub fn index_of(signs: &[i8]) -> usize {
    signs.iter().enumerate().map(|(x, &s)| usize::from(s < 0) << x).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undecided,
}

impl FeasibilityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Feasible => "feasible",
            Self::Infeasible => "infeasible",
            Self::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub stagnation_window: usize,
    pub stagnation_improvement: f64,
}

impl EngineSettings {
    pub fn from_tolerances(t: &Tolerances) -> Self {
        Self {
            tol: t.feasibility,
            max_iter: t.max_iter,
            stagnation_window: t.stagnation_window,
            stagnation_improvement: t.stagnation_improvement,
        }
    }
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::default())
    }
}

#[derive(Debug, Clone)]
pub struct MarginalProblem {
    n: usize,
    dim: usize,
    total: ComplexMatrix,
    biases: Vec<ComplexMatrix>,
}

pub const MAX_SETTINGS: usize = 9;

impl MarginalProblem {
    pub fn new(total: HermitianOperator, biases: Vec<HermitianOperator>) -> Result<Self> {
        let n = biases.len();
        if n == 0 || n > MAX_SETTINGS {
            return Err(domain(format!("need 1..={MAX_SETTINGS} settings, got {n}")));
        }
        let dim = total.dim();
        if biases.iter().any(|b| b.dim() != dim) {
            return Err(domain("inconsistent operator dimensions"));
        }
        Ok(Self {
            n,
            dim,
            total: total.into_matrix(),
            biases: biases.into_iter().map(HermitianOperator::into_matrix).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn count(&self) -> usize {
        1 << self.n
    }

    /// Orthogonal projection onto the affine constraint set.
    pub fn project_affine(&self, xs: &mut [ComplexMatrix]) {
        let count = self.count();
        let mut r0 = self.total.clone();
        let mut rx: Vec<ComplexMatrix> = self.biases.clone();
        for (a, xa) in xs.iter().enumerate() {
            r0 -= xa;
            for (x, r) in rx.iter_mut().enumerate() {
                r.axpy(-sign_of(a, x), xa);
            }
        }
        let w = 1.0 / count as f64;
        for (a, xa) in xs.iter_mut().enumerate() {
            xa.axpy(w, &r0);
            for (x, r) in rx.iter().enumerate() {
                xa.axpy(w * sign_of(a, x), r);
            }
        }
    }

    /// Largest Frobenius violation over the `n + 1` affine constraints.
    pub fn affine_residual(&self, xs: &[HermitianOperator]) -> f64 {
        let mut r0 = self.total.clone();
        let mut rx = self.biases.clone();
        for (a, xa) in xs.iter().enumerate() {
            r0 -= xa.matrix();
            for (x, r) in rx.iter_mut().enumerate() {
                r.axpy(-sign_of(a, x), xa.matrix());
            }
        }
        rx.iter().map(ComplexMatrix::frobenius_norm).fold(r0.frobenius_norm(), f64::max)
    }

    /// Whitened ordered product of the per-setting effects, projected onto the
    /// constraint set. With `T = I` this is `Herm(E^{a_1}_1 ⋯ E^{a_n}_n)` normalized.
    fn initial_point(&self) -> Result<Vec<ComplexMatrix>> {
        let total = HermitianOperator::hermitian_part(&self.total);
        let spectrum = total.eig()?;
        let cutoff = spectrum.values[0].abs().max(1.0) * 1e-12;
        let sqrt_t = spectrum.reconstruct_with(|v| if v > cutoff { v.sqrt() } else { 0.0 });
        let inv_sqrt_t = spectrum.reconstruct_with(|v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 });
        let effects: Vec<[ComplexMatrix; 2]> = self
            .biases
            .iter()
            .map(|o| {
                let plus = (&self.total + o).scale(0.5);
                let minus = (&self.total - o).scale(0.5);
                [&(&inv_sqrt_t * &plus) * &inv_sqrt_t, &(&inv_sqrt_t * &minus) * &inv_sqrt_t]
            })
            .collect();
        let mut xs = Vec::with_capacity(self.count());
        for a in 0..self.count() {
            let mut prod = ComplexMatrix::identity(self.dim);
            for (x, pair) in effects.iter().enumerate() {
                prod = &prod * &pair[usize::from(sign_of(a, x) < 0.0)];
            }
            let herm = HermitianOperator::hermitian_part(&prod);
            xs.push(&(&sqrt_t * herm.matrix()) * &sqrt_t);
        }
        self.project_affine(&mut xs);
        Ok(xs)
    }
}

#[derive(Debug, Clone)]
pub struct EngineRun {
    pub status: FeasibilityStatus,
    /// Frobenius distance between the last PSD iterate and the last affine iterate.
    pub residual: f64,
    pub iterations: usize,
    /// Last affine iterate: satisfies the linear constraints exactly and is PSD up
    /// to `residual`.
    pub point: Vec<HermitianOperator>,
}

/// Runs Dykstra's method between the PSD-cone product and the affine constraint set.
///
/// The affine set needs no correction term (its Dykstra increment is always normal to
/// the set and is annihilated by the next projection), so only the cone carries one.
pub fn solve(problem: &MarginalProblem, settings: &EngineSettings, tol: &Tolerances) -> Result<EngineRun> {
    let count = problem.count();
    let mut x = problem.initial_point()?;
    let mut p: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(problem.dim, problem.dim); count];
    let mut history: Vec<f64> = Vec::with_capacity(settings.max_iter.min(1 << 20));
    let mut residual = f64::INFINITY;
    let mut status = FeasibilityStatus::Undecided;
    let mut iterations = 0;

    while iterations < settings.max_iter {
        iterations += 1;
        let mut y = Vec::with_capacity(count);
        for (xa, pa) in x.iter().zip(p.iter_mut()) {
            let shifted = xa + pa;
            let ya = psd_project_raw(&shifted, tol)?;
            *pa = &shifted - &ya;
            y.push(ya);
        }
        let mut next = y.clone();
        problem.project_affine(&mut next);
        residual = next.iter().zip(&y).map(|(a, b)| a.distance(b).powi(2)).sum::<f64>().sqrt();
        x = next;

        if residual <= settings.tol {
            status = FeasibilityStatus::Feasible;
            break;
        }
        history.push(residual);
        let k = history.len();
        if k > settings.stagnation_window {
            let improvement = history[k - 1 - settings.stagnation_window] - residual;
            if improvement < settings.stagnation_improvement && residual > 10.0 * settings.tol {
                status = FeasibilityStatus::Infeasible;
                break;
            }
        }
    }

    Ok(EngineRun {
        status,
        residual,
        iterations,
        point: x.iter().map(HermitianOperator::hermitian_part).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::C64;

    #[test]
    fn sign_index_roundtrip() {
        for n in 1..=5 {
            for a in 0..(1usize << n) {
                assert_eq!(index_of(&signs(a, n)), a);
            }
        }
        assert_eq!(signs(0b10, 3), vec![1, -1, 1]);
    }

    /// Independent least-squares oracle: project each entry vector onto
    /// `{v : M v = b}` with `M` the full (redundant) marginal constraint matrix,
    /// solved through normal equations with a pseudo-inverse.
    #[test]
    fn closed_form_projection_matches_least_squares() {
        use nalgebra::{DMatrix, DVector};
        let n = 3;
        let count = 1 << n;
        let mut rng = crate::random::seeded(5);
        let total = HermitianOperator::identity(2);
        let biases: Vec<_> = (0..n)
            .map(|_| crate::random::hermitian(2, &mut rng).scale(0.2))
            .collect();
        let problem = MarginalProblem::new(total.clone(), biases.clone()).unwrap();
        let mut xs: Vec<ComplexMatrix> =
            (0..count).map(|_| crate::random::hermitian(2, &mut rng).into_matrix()).collect();
        let original = xs.clone();
        problem.project_affine(&mut xs);

        // rows: for each x and outcome o, Σ_{a: a_x = o} X_a = (T + o O_x)/2
        let rows = 2 * n;
        let m = DMatrix::from_fn(rows, count, |r, a| {
            let (x, o) = (r / 2, if r % 2 == 0 { 1.0 } else { -1.0 });
            if sign_of(a, x) == o {
                1.0
            } else {
                0.0
            }
        });
        let pinv = (&m * m.transpose()).pseudo_inverse(1e-12).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for part in 0..2 {
                    let pick = |z: C64| if part == 0 { z.re } else { z.im };
                    let v = DVector::from_fn(count, |a, _| pick(original[a][(i, j)]));
                    let b = DVector::from_fn(rows, |r, _| {
                        let (x, o) = (r / 2, if r % 2 == 0 { 1.0 } else { -1.0 });
                        let t = total.matrix()[(i, j)] + biases[x].matrix()[(i, j)] * o;
                        pick(t) / 2.0
                    });
                    let proj = &v - m.transpose() * (&pinv * (&m * &v - b));
                    for a in 0..count {
                        assert!((proj[a] - pick(xs[a][(i, j)])).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
