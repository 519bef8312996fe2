//! Dichotomic observables, Clifford generator sets and unbiased unsharp POVMs.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{domain, Result};
use crate::matcore::{tensor, ComplexMatrix, HermitianOperator, C64};

/// Outcome label of a two-outcome measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

/// Hermitian operator with `A² = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    op: HermitianOperator,
}

impl DichotomicObservable {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tol = Tolerances::default().povm;
        let sq = op.matrix() * op.matrix();
        let residual = sq.distance(&ComplexMatrix::identity(op.dim()));
        if residual > tol {
            return Err(domain(format!("observable does not square to identity (residual {residual:e})")));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn negate(&self) -> Self {
        Self { op: self.op.scale(-1.0) }
    }

    /// `A ⊗ B` of two dichotomic observables is again dichotomic.
    pub fn kron(&self, other: &Self) -> Self {
        let m = tensor(self.op.matrix(), other.op.matrix());
        Self { op: HermitianOperator::hermitian_part(&m) }
    }
}

/// Unsharpness parameter in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct UnsharpnessParam(f64);

impl UnsharpnessParam {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(domain(format!("unsharpness parameter {eta} outside [0, 1]")));
        }
        Ok(Self(eta))
    }

    pub fn sharp() -> Self {
        Self(1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Finite POVM with outcomes labelled `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    outcomes: Vec<(Outcome, HermitianOperator)>,
}

impl Povm {
    /// Validates PSD effects and completeness within the POVM tolerance.
    pub fn new(outcomes: Vec<(Outcome, HermitianOperator)>) -> Result<Self> {
        Self::with_tolerance(outcomes, Tolerances::default().povm)
    }

    pub fn with_tolerance(outcomes: Vec<(Outcome, HermitianOperator)>, tol: f64) -> Result<Self> {
        let Some((_, first)) = outcomes.first() else {
            return Err(domain("POVM needs at least one outcome"));
        };
        let dim = first.dim();
        let mut total = HermitianOperator::zeros(dim);
        for (i, (label, e)) in outcomes.iter().enumerate() {
            if e.dim() != dim {
                return Err(domain("POVM effects have different dimensions"));
            }
            if outcomes[..i].iter().any(|(l, _)| l == label) {
                return Err(domain(format!("duplicate outcome label {label:?}")));
            }
            let min = e.min_eigenvalue()?;
            if min < -tol {
                return Err(domain(format!("effect {label:?} is not PSD (min eigenvalue {min:e})")));
            }
            total = &total + e;
        }
        let defect = total.distance(&HermitianOperator::identity(dim));
        if defect > tol {
            return Err(domain(format!("effects do not sum to identity (defect {defect:e})")));
        }
        Ok(Self { outcomes })
    }

    /// Two-outcome POVM `{E₊, E₋}`.
    pub fn dichotomic(plus: HermitianOperator, minus: HermitianOperator) -> Result<Self> {
        Self::new(vec![(Outcome::Plus, plus), (Outcome::Minus, minus)])
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].1.dim()
    }

    pub fn outcomes(&self) -> &[(Outcome, HermitianOperator)] {
        &self.outcomes
    }

    pub fn is_dichotomic(&self) -> bool {
        self.outcomes.len() == 2
    }

    pub fn effect(&self, outcome: Outcome) -> Option<&HermitianOperator> {
        self.outcomes.iter().find(|(l, _)| *l == outcome).map(|(_, e)| e)
    }

    /// `E₊ − E₋` for a dichotomic POVM.
    pub fn bias(&self) -> Result<HermitianOperator> {
        match (self.effect(Outcome::Plus), self.effect(Outcome::Minus)) {
            (Some(p), Some(m)) if self.is_dichotomic() => Ok(p - m),
            _ => Err(domain("bias is only defined for ±1-labelled dichotomic POVMs")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli_matrix(axis: Axis) -> ComplexMatrix {
    let data = match axis {
        Axis::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        Axis::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        Axis::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
    };
    ComplexMatrix::new(2, 2, data).expect("2x2 literal")
}

pub fn pauli(axis: Axis) -> DichotomicObservable {
    DichotomicObservable { op: HermitianOperator::hermitian_part(&pauli_matrix(axis)) }
}

/// `[σx, σy, σz]`.
pub fn paulis() -> Vec<DichotomicObservable> {
    vec![pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z)]
}

/// `k·σ` for a unit Bloch vector `k`.
pub fn bloch_observable(k: [f64; 3]) -> Result<DichotomicObservable> {
    check_unit(k)?;
    let m = &(&pauli_matrix(Axis::X).scale(k[0]) + &pauli_matrix(Axis::Y).scale(k[1]))
        + &pauli_matrix(Axis::Z).scale(k[2]);
    Ok(DichotomicObservable { op: HermitianOperator::hermitian_part(&m) })
}

pub(crate) fn check_unit(k: [f64; 3]) -> Result<()> {
    let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
        return Err(domain(format!("axis {k:?} is not a unit vector (norm {norm})")));
    }
    Ok(())
}

pub const MAX_CLIFFORD_GENERATORS: usize = 9;

/// `n` mutually anticommuting dichotomic observables on `m = ⌊n/2⌋` qubits.
///
/// Jordan–Wigner ladder on `m` qubits gives `Γ_{2j} = Z^{⊗j} ⊗ X ⊗ I…` and
/// `Γ_{2j+1} = Z^{⊗j} ⊗ Y ⊗ I…`; for odd `n` the last generator is `Z^{⊗m}`, which
/// anticommutes with all ladder operators. For `n = 3` this is `{σx, σy, σz}`.
///
/// `n = 1` would give dimension 1, so it returns `{σz}` on a qubit instead.
pub fn clifford_generators(n: usize) -> Result<Vec<DichotomicObservable>> {
    if !(1..=MAX_CLIFFORD_GENERATORS).contains(&n) {
        return Err(domain(format!("clifford_generators needs 1 <= n <= {MAX_CLIFFORD_GENERATORS}, got {n}")));
    }
    if n == 1 {
        return Ok(vec![pauli(Axis::Z)]);
    }
    let qubits = n / 2;
    let chain = |prefix_z: usize, middle: Option<Axis>| -> DichotomicObservable {
        let mut m = ComplexMatrix::identity(1);
        for q in 0..qubits {
            let factor = if q < prefix_z {
                pauli_matrix(Axis::Z)
            } else if q == prefix_z {
                middle.map(pauli_matrix).unwrap_or_else(|| ComplexMatrix::identity(2))
            } else {
                ComplexMatrix::identity(2)
            };
            m = tensor(&m, &factor);
        }
        DichotomicObservable { op: HermitianOperator::hermitian_part(&m) }
    };
    let mut gens = Vec::with_capacity(n);
    for j in 0..qubits {
        gens.push(chain(j, Some(Axis::X)));
        gens.push(chain(j, Some(Axis::Y)));
    }
    if n % 2 == 1 {
        gens.push(chain(qubits, None));
    }
    Ok(gens)
}

/// Unbiased smearing `{(I + ηA)/2, (I − ηA)/2}`.
pub fn unsharp_povm(a: &DichotomicObservable, eta: UnsharpnessParam) -> Povm {
    let dim = a.dim();
    let half_id = ComplexMatrix::identity(dim).scale(0.5);
    let scaled = a.op.matrix().scale(0.5 * eta.value());
    let plus = HermitianOperator::hermitian_part(&(&half_id + &scaled));
    let minus = HermitianOperator::hermitian_part(&(&half_id - &scaled));
    Povm { outcomes: vec![(Outcome::Plus, plus), (Outcome::Minus, minus)] }
}

pub fn unsharp_povms(set: &[DichotomicObservable], eta: UnsharpnessParam) -> Vec<Povm> {
    set.iter().map(|a| unsharp_povm(a, eta)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticommutationReport {
    pub holds: bool,
    /// Worst Frobenius norm over `{A_x, A_x'}` (x ≠ x') and `A_x² − I`.
    pub max_residual: f64,
}

pub fn anticommutation_check(set: &[DichotomicObservable]) -> Result<AnticommutationReport> {
    anticommutation_check_with(set, 1e-9)
}

pub fn anticommutation_check_with(
    set: &[DichotomicObservable],
    tol: f64,
) -> Result<AnticommutationReport> {
    let Some(first) = set.first() else {
        return Ok(AnticommutationReport { holds: true, max_residual: 0.0 });
    };
    let dim = first.dim();
    if set.iter().any(|a| a.dim() != dim) {
        return Err(domain("observables have different dimensions"));
    }
    let id = ComplexMatrix::identity(dim);
    let mut worst = 0.0f64;
    for (i, a) in set.iter().enumerate() {
        let am = a.op.matrix();
        worst = worst.max((&(am * am) - &id).frobenius_norm());
        for b in &set[i + 1..] {
            let bm = b.op.matrix();
            worst = worst.max((&(am * bm) + &(bm * am)).frobenius_norm());
        }
    }
    Ok(AnticommutationReport { holds: worst <= tol, max_residual: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{her_eig, op_norm};

    #[test]
    fn pauli_basics() {
        assert_eq!(pauli(Axis::Z).op().matrix(), &ComplexMatrix::from_real_diag(&[1., -1.]));
        let x = pauli(Axis::X);
        assert_eq!(x.op().matrix() * x.op().matrix(), ComplexMatrix::identity(2));
        let r = anticommutation_check(&paulis()).unwrap();
        assert!(r.holds && r.max_residual <= 1e-15);
    }

    #[test]
    fn bloch_axes() {
        assert_eq!(bloch_observable([0., 0., 1.]).unwrap(), pauli(Axis::Z));
        assert_eq!(bloch_observable([1., 0., 0.]).unwrap(), pauli(Axis::X));
        let s = 1.0 / 3f64.sqrt();
        let diag = bloch_observable([s, s, s]).unwrap();
        let e = her_eig(diag.op()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        assert!(bloch_observable([1., 1., 0.]).is_err());
    }

    #[test]
    fn clifford_sets() {
        let three = clifford_generators(3).unwrap();
        assert_eq!(three, paulis());

        let five = clifford_generators(5).unwrap();
        assert!(five.iter().all(|g| g.dim() == 4));
        let r = anticommutation_check(&five).unwrap();
        assert!(r.holds, "residual {}", r.max_residual);

        assert_eq!(clifford_generators(1).unwrap(), vec![pauli(Axis::Z)]);
        assert!(clifford_generators(0).is_err());
        assert!(clifford_generators(10).is_err());
    }

    #[test]
    fn clifford_dimension_is_two_to_floor_half() {
        for n in 2..=9 {
            let gens = clifford_generators(n).unwrap();
            assert_eq!(gens.len(), n);
            assert_eq!(gens[0].dim(), 1 << (n / 2));
            assert!(anticommutation_check_with(&gens, 1e-10).unwrap().holds);
        }
    }

    #[test]
    fn commuting_pair_fails_anticommutation() {
        let z = pauli(Axis::Z);
        let id = DichotomicObservable::new(HermitianOperator::identity(2)).unwrap();
        let r = anticommutation_check(&[z.kron(&id), id.kron(&z)]).unwrap();
        assert!(!r.holds);
        // {Z⊗I, I⊗Z} = 2 Z⊗Z, Frobenius norm 4
        assert!((r.max_residual - 4.0).abs() < 1e-14);
        assert!(anticommutation_check(&[z.clone(), z.kron(&id)]).is_err());
    }

    #[test]
    fn unsharp_examples() {
        let sharp = unsharp_povm(&pauli(Axis::Z), UnsharpnessParam::sharp());
        assert_eq!(sharp.effect(Outcome::Plus).unwrap(), &HermitianOperator::from_real_diag(&[1., 0.]));
        assert_eq!(sharp.effect(Outcome::Minus).unwrap(), &HermitianOperator::from_real_diag(&[0., 1.]));

        let trivial = unsharp_povm(&pauli(Axis::X), UnsharpnessParam::new(0.0).unwrap());
        for (_, e) in trivial.outcomes() {
            assert_eq!(e, &HermitianOperator::identity(2).scale(0.5));
        }

        let eta = 1.0 / 3f64.sqrt();
        let p = unsharp_povm(&pauli(Axis::X), UnsharpnessParam::new(eta).unwrap());
        let e = her_eig(p.effect(Outcome::Plus).unwrap()).unwrap();
        assert!((e.values[0] - (1.0 + eta) / 2.0).abs() < 1e-14);
        assert!((e.values[1] - (1.0 - eta) / 2.0).abs() < 1e-14);
        assert!(Povm::new(p.outcomes().to_vec()).is_ok());
    }

    #[test]
    fn povm_validation() {
        let half = HermitianOperator::identity(2).scale(0.5);
        assert!(Povm::dichotomic(half.clone(), half.clone()).is_ok());
        assert!(Povm::dichotomic(half.clone(), half.scale(0.5)).is_err());
        let neg = HermitianOperator::from_real_diag(&[1.5, 0.5]);
        let comp = HermitianOperator::from_real_diag(&[-0.5, 0.5]);
        assert!(Povm::dichotomic(neg, comp).is_err());
        assert!(UnsharpnessParam::new(1.2).is_err());
    }

    #[test]
    fn bloch_norm_is_one() {
        let k = [0.48, -0.6, 0.64];
        assert!((op_norm(bloch_observable(k).unwrap().op()).unwrap() - 1.0).abs() < 1e-12);
    }
}
