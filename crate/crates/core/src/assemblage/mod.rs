//! Steered assemblages, local-hidden-state (LHS) decompositions and the steering
//! threshold.
//!
//! An LHS model for dichotomic settings is a family of PSD operators `σ_λ`,
//! `λ ∈ {±1}^n`, with `σ_{a|x} = Σ_{λ: λ_x = a} σ_λ`. Deterministic responses lose no
//! generality because any stochastic response is a mixture of them. The search runs
//! on the same engine as the joint-measurability test, with `ρ_B` in place of `I`.

pub mod io;

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{domain, Error, Result};
use crate::feasibility::{self, sign_of, EngineSettings, FeasibilityStatus, MarginalProblem};
use crate::jointmeas::{bisect_eta, ThresholdResult};
use crate::matcore::{check_psd, conditional_operator, partial_trace, HermitianOperator, Subsystem};
use crate::observables::{unsharp_povms, DichotomicObservable, Outcome, Povm, UnsharpnessParam};
use crate::states::check_density;

pub const MAX_LHS_SETTINGS: usize = 6;
pub const PSD_TOL: f64 = 1e-10;
pub const NO_SIGNALLING_TOL: f64 = 1e-9;

/// `σ_{a|x}` for `x < n` and `a ∈ {+1, −1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    n: usize,
    dim_b: usize,
    members: Vec<[HermitianOperator; 2]>,
}

impl Assemblage {
    /// Checks each member is PSD, that `Σ_a σ_{a|x}` does not depend on `x`, and that
    /// it has unit trace.
    pub fn new(members: Vec<[HermitianOperator; 2]>) -> Result<Self> {
        let n = members.len();
        if n == 0 {
            return Err(domain("an assemblage needs at least one setting"));
        }
        let dim_b = members[0][0].dim();
        for (x, pair) in members.iter().enumerate() {
            for (a, s) in pair.iter().enumerate() {
                if s.dim() != dim_b {
                    return Err(domain(format!("member ({x}, {a}) has dim {}, expected {dim_b}", s.dim())));
                }
                check_psd(s, PSD_TOL, &format!("member ({x}, {})", Outcome::BOTH[a].sign()))?;
            }
        }
        let asm = Self { n, dim_b, members };
        let defect = asm.no_signalling_residual();
        if defect > NO_SIGNALLING_TOL {
            return Err(domain(format!("marginals differ across settings by {defect:e}")));
        }
        let tr = asm.reduced_state().trace();
        if (tr - 1.0).abs() > NO_SIGNALLING_TOL {
            return Err(domain(format!("reduced state has trace {tr}")));
        }
        Ok(asm)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn member(&self, x: usize, a: Outcome) -> &HermitianOperator {
        &self.members[x][a.index()]
    }

    pub fn members(&self) -> &[[HermitianOperator; 2]] {
        &self.members
    }

    /// `Σ_a σ_{a|0}`.
    pub fn reduced_state(&self) -> HermitianOperator {
        &self.members[0][0] + &self.members[0][1]
    }

    /// Largest Frobenius distance between `Σ_a σ_{a|x}` and `Σ_a σ_{a|0}`.
    pub fn no_signalling_residual(&self) -> f64 {
        let first = self.reduced_state();
        self.members
            .iter()
            .map(|[p, m]| (p + m).distance(&first))
            .fold(0.0, f64::max)
    }
}

/// `σ_{a|x} = Tr_A[(E_{a|x} ⊗ I) ρ]`.
pub fn steer(rho: &HermitianOperator, povms: &[Povm]) -> Result<Assemblage> {
    let dim_a = povms.first().ok_or_else(|| domain("empty POVM list"))?.dim();
    if povms.iter().any(|p| p.dim() != dim_a || !p.is_dichotomic()) {
        return Err(domain("steering needs dichotomic POVMs on one common dimension"));
    }
    if !rho.dim().is_multiple_of(dim_a) {
        return Err(domain(format!("state of dim {} does not factor with dimA = {dim_a}", rho.dim())));
    }
    check_density(rho, 1e-9)?;
    let dim_b = rho.dim() / dim_a;
    let members = povms
        .iter()
        .map(|p| {
            let part = |o| {
                let e = p.effect(o).ok_or_else(|| domain("POVM lacks a dichotomic outcome"))?;
                conditional_operator(e, rho, dim_b)
            };
            Ok([part(Outcome::Plus)?, part(Outcome::Minus)?])
        })
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(members)
}

/// Product assemblage `σ_{a|x} = p(a|x) ρ_B`, useful as an explicitly unsteerable input.
pub fn uncorrelated(rho_b: &HermitianOperator, probs_plus: &[f64]) -> Result<Assemblage> {
    let members = probs_plus
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(domain(format!("probability {p} outside [0, 1]")));
            }
            Ok([rho_b.scale(p), rho_b.scale(1.0 - p)])
        })
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(members)
}

#[derive(Debug, Clone)]
pub struct LhsVerdict {
    pub status: FeasibilityStatus,
    pub residual: f64,
    pub iterations: usize,
    /// `σ_λ` indexed by sign tuple (bit `x` set iff `λ_x = −1`).
    pub model: Option<Vec<HermitianOperator>>,
}

/// Worst Frobenius mismatch between `Σ_{λ_x = a} σ_λ` and `σ_{a|x}`, and the smallest
/// eigenvalue over the model.
pub fn model_defect(asm: &Assemblage, model: &[HermitianOperator]) -> Result<(f64, f64)> {
    if model.len() != 1 << asm.n {
        return Err(domain(format!("a model for {} settings has {} members", asm.n, 1usize << asm.n)));
    }
    let mut worst = 0.0f64;
    for x in 0..asm.n {
        for o in Outcome::BOTH {
            let mut acc = HermitianOperator::zeros(asm.dim_b);
            for (lam, s) in model.iter().enumerate() {
                if sign_of(lam, x) == o.sign() {
                    acc = &acc + s;
                }
            }
            worst = worst.max(acc.distance(asm.member(x, o)));
        }
    }
    let mut min_eig = f64::INFINITY;
    for s in model {
        min_eig = min_eig.min(s.min_eigenvalue()?);
    }
    Ok((worst, min_eig))
}

pub fn lhs_feasible(asm: &Assemblage, tol: f64, max_iter: usize) -> Result<LhsVerdict> {
    let t = Tolerances { feasibility: tol, max_iter, ..Tolerances::default() };
    lhs_feasible_with(asm, &t)
}

pub fn lhs_feasible_with(asm: &Assemblage, tol: &Tolerances) -> Result<LhsVerdict> {
    if asm.n > MAX_LHS_SETTINGS {
        return Err(domain(format!("at most {MAX_LHS_SETTINGS} settings, got {}", asm.n)));
    }
    let biases = asm.members.iter().map(|[p, m]| p - m).collect();
    let problem = MarginalProblem::new(asm.reduced_state(), biases)?;
    let settings = EngineSettings::from_tolerances(tol);
    let run = feasibility::solve(&problem, &settings, tol)?;
    let model = match run.status {
        FeasibilityStatus::Feasible => {
            let (mismatch, min_eig) = model_defect(asm, &run.point)?;
            let bound = 10.0 * settings.tol;
            if mismatch > bound || min_eig < -bound {
                return Err(Error::Numeric(format!(
                    "LHS model fails its own check (mismatch {mismatch:e}, min eigenvalue {min_eig:e})"
                )));
            }
            Some(run.point)
        }
        _ => None,
    };
    Ok(LhsVerdict { status: run.status, residual: run.residual, iterations: run.iterations, model })
}

/// Critical unsharpness at which `steer(rho, unsharp(A_x, η))` stops admitting an
/// LHS model.
pub fn lhs_threshold(rho: &HermitianOperator, observables: &[DichotomicObservable], tol_eta: f64) -> Result<ThresholdResult> {
    lhs_threshold_with(rho, observables, &Tolerances { eta: tol_eta, ..Tolerances::default() })
}

pub fn lhs_threshold_with(
    rho: &HermitianOperator,
    observables: &[DichotomicObservable],
    tol: &Tolerances,
) -> Result<ThresholdResult> {
    if tol.eta < 1e-4 {
        return Err(domain(format!("tol_eta must be at least 1e-4, got {}", tol.eta)));
    }
    if observables.is_empty() {
        return Err(domain("empty observable set"));
    }
    bisect_eta(tol.eta, |eta, retry| {
        let asm = steer(rho, &unsharp_povms(observables, UnsharpnessParam::new(eta)?))?;
        let t = if retry { Tolerances { feasibility: 10.0 * tol.feasibility, ..*tol } } else { *tol };
        let v = lhs_feasible_with(&asm, &t)?;
        Ok((v.status, v.iterations))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Embeddability {
    Embeddable,
    NotEmbeddable,
    Undecided,
}

/// Simplex-embeddability of the steered preparation fragment.
///
/// This is not a geometric embedding search. For steered fragments, embeddability is
/// equivalent to compatibility of the steering measurements, which in turn is
/// equivalent to existence of an LHS model; the verdict is the LHS status mapped
/// through that equivalence.
pub fn simplex_embeddable_verdict(asm: &Assemblage, tol: &Tolerances) -> Result<(Embeddability, f64)> {
    let v = lhs_feasible_with(asm, tol)?;
    let e = match v.status {
        FeasibilityStatus::Feasible => Embeddability::Embeddable,
        FeasibilityStatus::Infeasible => Embeddability::NotEmbeddable,
        FeasibilityStatus::Undecided => Embeddability::Undecided,
    };
    Ok((e, v.residual))
}

/// `Tr_A ρ`.
pub fn reduced_b(rho: &HermitianOperator, dim_a: usize) -> Result<HermitianOperator> {
    if dim_a == 0 || !rho.dim().is_multiple_of(dim_a) {
        return Err(domain(format!("state of dim {} does not factor with dimA = {dim_a}", rho.dim())));
    }
    partial_trace(rho, dim_a, rho.dim() / dim_a, Subsystem::B)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{pauli, paulis, Axis};
    use crate::states::{maximally_entangled, maximally_mixed, product};

    fn phi() -> HermitianOperator {
        maximally_entangled(2)
    }

    fn pauli_asm(eta: f64) -> Assemblage {
        steer(&phi(), &unsharp_povms(&paulis(), UnsharpnessParam::new(eta).unwrap())).unwrap()
    }

    #[test]
    fn sharp_sigma_z_steers_to_basis_states() {
        let asm = steer(&phi(), &unsharp_povms(&[pauli(Axis::Z)], UnsharpnessParam::sharp())).unwrap();
        let half = |d: [f64; 2]| HermitianOperator::from_real_diag(&[d[0] / 2.0, d[1] / 2.0]);
        assert!(asm.member(0, Outcome::Plus).distance(&half([1., 0.])) < 1e-15);
        assert!(asm.member(0, Outcome::Minus).distance(&half([0., 1.])) < 1e-15);
    }

    #[test]
    fn steering_is_no_signalling() {
        let asm = pauli_asm(1.0);
        assert!(asm.no_signalling_residual() <= 1e-12);
        assert!(asm.reduced_state().distance(&maximally_mixed(2)) < 1e-15);
    }

    #[test]
    fn product_states_give_uncorrelated_assemblages() {
        let rho_a = HermitianOperator::from_real_diag(&[0.7, 0.3]);
        let rho_b = HermitianOperator::from_real_diag(&[0.2, 0.8]);
        let asm = steer(&product(&rho_a, &rho_b), &unsharp_povms(&paulis(), UnsharpnessParam::sharp())).unwrap();
        let pz = 0.7;
        assert!(asm.member(2, Outcome::Plus).distance(&rho_b.scale(pz)) < 1e-14);
        assert!(asm.member(0, Outcome::Plus).distance(&rho_b.scale(0.5)) < 1e-14);
        let v = lhs_feasible(&asm, 1e-7, 200_000).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        let r = lhs_threshold(&product(&rho_a, &rho_b), &paulis(), 1e-3).unwrap();
        assert_eq!(r.eta_star, 1.0);
    }

    #[test]
    fn explicit_uncorrelated_is_embeddable() {
        let asm = uncorrelated(&maximally_mixed(2), &[0.3, 0.9, 0.5]).unwrap();
        let (e, _) = simplex_embeddable_verdict(&asm, &Tolerances::default()).unwrap();
        assert_eq!(e, Embeddability::Embeddable);
    }

    #[test]
    fn pauli_verdicts() {
        let v = lhs_feasible(&pauli_asm(0.5), 1e-7, 200_000).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        let (mismatch, min_eig) = model_defect(&pauli_asm(0.5), v.model.as_ref().unwrap()).unwrap();
        assert!(mismatch <= 1e-6 && min_eig >= -1e-6);
        assert_eq!(lhs_feasible(&pauli_asm(0.7), 1e-7, 200_000).unwrap().status, FeasibilityStatus::Infeasible);
        let t = Tolerances::default();
        assert_eq!(simplex_embeddable_verdict(&pauli_asm(1.0), &t).unwrap().0, Embeddability::NotEmbeddable);
    }

    #[test]
    fn thresholds_match_compatibility() {
        let xz = [pauli(Axis::X), pauli(Axis::Z)];
        let r = lhs_threshold(&phi(), &xz, 1e-3).unwrap();
        assert!((r.eta_star - 0.5f64.sqrt()).abs() < 1e-3, "{r:?}");
        let r = lhs_threshold(&phi(), &paulis(), 1e-3).unwrap();
        assert!((r.eta_star - (1.0f64 / 3.0).sqrt()).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn invalid_assemblages_are_rejected() {
        let m = maximally_mixed(2);
        assert!(Assemblage::new(vec![[m.scale(0.5), m.scale(0.5)], [m.scale(0.5), m.scale(0.6)]]).is_err());
        assert!(Assemblage::new(vec![[m.scale(1.2), m.scale(-0.2)]]).is_err());
        assert!(Assemblage::new(vec![[m.scale(0.6), m.scale(0.6)]]).is_err());
        assert!(steer(&maximally_mixed(3), &unsharp_povms(&paulis(), UnsharpnessParam::sharp())).is_err());
    }
}
