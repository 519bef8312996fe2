//! N-wise joint measurability of dichotomic POVMs: the Dykstra feasibility test,
//! bisection for the critical unsharpness, and the closed-form qubit criterion.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{domain, Error, Result};
use crate::feasibility::{self, sign_of, EngineSettings, FeasibilityStatus, MarginalProblem};
use crate::matcore::HermitianOperator;
use crate::observables::{check_unit, unsharp_povms, DichotomicObservable, Outcome, Povm, UnsharpnessParam};

/// Global measurement with `2^n` outcomes indexed by sign tuples.
///
/// Effect `a` belongs to the tuple whose bit `x` is set iff `a_x = −1`
/// (see [`crate::feasibility::signs`]).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPovm {
    n: usize,
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl JointPovm {
    /// Validates positivity and completeness within `tol`.
    pub fn new(n: usize, effects: Vec<HermitianOperator>, tol: f64) -> Result<Self> {
        if effects.len() != 1 << n {
            return Err(domain(format!("{n} measurements need {} joint effects, got {}", 1 << n, effects.len())));
        }
        let dim = effects[0].dim();
        if effects.iter().any(|e| e.dim() != dim) {
            return Err(domain("joint effects have different dimensions"));
        }
        let mut total = HermitianOperator::zeros(dim);
        for (a, e) in effects.iter().enumerate() {
            let min = e.min_eigenvalue()?;
            if min < -tol {
                return Err(Error::Invariant(format!("joint effect {a} has eigenvalue {min:e}")));
            }
            total = &total + e;
        }
        let defect = total.distance(&HermitianOperator::identity(dim));
        if defect > tol {
            return Err(Error::Invariant(format!("joint effects sum to identity only within {defect:e}")));
        }
        Ok(Self { n, dim, effects })
    }

    /// Product of commuting dichotomic POVMs, `E^{a_1}_1 ⋯ E^{a_n}_n`.
    pub fn product(povms: &[Povm], tol: f64) -> Result<Self> {
        let n = povms.len();
        let dim = povms.first().ok_or_else(|| domain("empty POVM list"))?.dim();
        let effects = (0..1usize << n)
            .map(|a| {
                let mut m = HermitianOperator::identity(dim).into_matrix();
                for (x, p) in povms.iter().enumerate() {
                    let e = p.effect(Outcome::from_sign(sign_of(a, x))).ok_or_else(|| domain("POVM is not ±1-labelled"))?;
                    m = &m * e.matrix();
                }
                HermitianOperator::with_tolerance(m, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, effects, tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn effect(&self, signs: &[i8]) -> &HermitianOperator {
        &self.effects[feasibility::index_of(signs)]
    }

    /// `Σ_{a : a_x = outcome} E_a` (settings are 0-based).
    pub fn marginalize(&self, x: usize, outcome: Outcome) -> Result<HermitianOperator> {
        if x >= self.n {
            return Err(domain(format!("measurement index {x} out of range for n = {}", self.n)));
        }
        let mut acc = HermitianOperator::zeros(self.dim);
        for (a, e) in self.effects.iter().enumerate() {
            if sign_of(a, x) == outcome.sign() {
                acc = &acc + e;
            }
        }
        Ok(acc)
    }

    /// Marginal observable `Σ_a a_x E_a`.
    pub fn marginal_bias(&self, x: usize) -> Result<HermitianOperator> {
        Ok(&self.marginalize(x, Outcome::Plus)? - &self.marginalize(x, Outcome::Minus)?)
    }
}

#[derive(Debug, Clone)]
pub struct JmVerdict {
    pub status: FeasibilityStatus,
    pub residual: f64,
    pub certificate: Option<JointPovm>,
    pub iterations: usize,
}

fn marginal_problem(povms: &[Povm]) -> Result<MarginalProblem> {
    let dim = povms.first().ok_or_else(|| domain("empty POVM list"))?.dim();
    if povms.iter().any(|p| p.dim() != dim) {
        return Err(domain("POVMs act on different dimensions"));
    }
    let biases = povms.iter().map(Povm::bias).collect::<Result<Vec<_>>>()?;
    MarginalProblem::new(HermitianOperator::identity(dim), biases)
}

/// Searches for a joint POVM whose marginals are `povms`, using the default tolerances
/// apart from `tol` and `max_iter`.
pub fn jm_feasible(povms: &[Povm], tol: f64, max_iter: usize) -> Result<JmVerdict> {
    let t = Tolerances { feasibility: tol, max_iter, ..Tolerances::default() };
    jm_feasible_with(povms, &t)
}

pub fn jm_feasible_with(povms: &[Povm], tol: &Tolerances) -> Result<JmVerdict> {
    let problem = marginal_problem(povms)?;
    let settings = EngineSettings::from_tolerances(tol);
    let run = feasibility::solve(&problem, &settings, tol)?;
    let certificate = match run.status {
        FeasibilityStatus::Feasible => Some(JointPovm::new(problem.n(), run.point, 10.0 * settings.tol)?),
        _ => None,
    };
    Ok(JmVerdict { status: run.status, residual: run.residual, certificate, iterations: run.iterations })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket.
    pub eta_star: f64,
    /// Largest η found compatible and smallest η found incompatible.
    pub bracket: (f64, f64),
    /// Set when an η inside the bracket stayed undecided after one tolerance retry;
    /// bisection stops there and the whole bracket is the undecided band.
    pub undecided_at: Option<f64>,
    pub evaluations: usize,
    pub iterations: usize,
}

impl ThresholdResult {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Bisection over η for a monotone feasibility oracle, feasible at 0.
///
/// The oracle returns a status and its iteration count; `Undecided` triggers
/// `retry` once, and a second `Undecided` ends the search with an undecided band.
pub(crate) fn bisect_eta(
    tol_eta: f64,
    mut oracle: impl FnMut(f64, bool) -> Result<(FeasibilityStatus, usize)>,
) -> Result<ThresholdResult> {
    if tol_eta.is_nan() || tol_eta <= 0.0 {
        return Err(domain("tol_eta must be positive"));
    }
    let mut evaluations = 0;
    let mut iterations = 0;
    let mut decide = |eta: f64| -> Result<FeasibilityStatus> {
        let mut status = FeasibilityStatus::Undecided;
        for retry in [false, true] {
            let (s, it) = oracle(eta, retry)?;
            evaluations += 1;
            iterations += it;
            status = s;
            if s != FeasibilityStatus::Undecided {
                break;
            }
        }
        Ok(status)
    };

    let (mut lo, mut hi) = (0.0, 1.0);
    let mut undecided_at = None;
    match decide(1.0)? {
        FeasibilityStatus::Feasible => lo = 1.0,
        FeasibilityStatus::Undecided => undecided_at = Some(1.0),
        FeasibilityStatus::Infeasible => {
            while hi - lo > tol_eta {
                let mid = 0.5 * (lo + hi);
                match decide(mid)? {
                    FeasibilityStatus::Feasible => lo = mid,
                    FeasibilityStatus::Infeasible => hi = mid,
                    FeasibilityStatus::Undecided => {
                        undecided_at = Some(mid);
                        break;
                    }
                }
            }
        }
    }
    Ok(ThresholdResult { eta_star: 0.5 * (lo + hi), bracket: (lo, hi), undecided_at, evaluations, iterations })
}

/// Critical unsharpness of the unbiased smearings of `observables`.
pub fn jm_threshold(observables: &[DichotomicObservable], tol_eta: f64) -> Result<ThresholdResult> {
    jm_threshold_with(observables, &Tolerances { eta: tol_eta, ..Tolerances::default() })
}

pub fn jm_threshold_with(observables: &[DichotomicObservable], tol: &Tolerances) -> Result<ThresholdResult> {
    if tol.eta < 1e-4 {
        return Err(domain(format!("tol_eta must be at least 1e-4, got {}", tol.eta)));
    }
    let dim = observables.first().ok_or_else(|| domain("empty observable set"))?.dim();
    if observables.iter().any(|a| a.dim() != dim) {
        return Err(domain("observables act on different dimensions"));
    }
    bisect_eta(tol.eta, |eta, retry| {
        let povms = unsharp_povms(observables, UnsharpnessParam::new(eta)?);
        let t = if retry { Tolerances { feasibility: 10.0 * tol.feasibility, ..*tol } } else { *tol };
        let v = jm_feasible_with(&povms, &t)?;
        Ok((v.status, v.iterations))
    })
}

/// `(1/N) · max_{a ∈ {±1}^N} ‖Σ_x a_x k_x‖` for unit Bloch vectors `k_x`.
///
/// Every compatible unbiased smearing has η at or below this value. It equals the
/// critical η for mutually orthogonal axes (`1/√N`) and for identical axes, but
/// overestimates it otherwise: axes at 60° give `cos 30° ≈ 0.866` while the pair
/// becomes incompatible above `1/(cos 30° + sin 30°) ≈ 0.732`.
pub fn qubit_unbiased_threshold(axes: &[[f64; 3]]) -> Result<f64> {
    let n = axes.len();
    if n == 0 || n > 20 {
        return Err(domain(format!("need between 1 and 20 axes, got {n}")));
    }
    for &k in axes {
        check_unit(k)?;
    }
    let mut best = 0.0f64;
    for a in 0..1usize << n {
        let mut v = [0.0; 3];
        for (x, k) in axes.iter().enumerate() {
            let s = sign_of(a, x);
            for i in 0..3 {
                v[i] += s * k[i];
            }
        }
        best = best.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
    }
    Ok(best / n as f64)
}

/// `(H_d − 1)/(d − 1)` with `H_d` the d-th harmonic number.
pub fn harmonic_bound(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(domain(format!("harmonic bound needs d >= 2, got {d}")));
    }
    let h: f64 = (1..=d).map(|k| 1.0 / k as f64).sum();
    Ok((h - 1.0) / (d - 1) as f64)
}
