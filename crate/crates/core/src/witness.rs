//! The `2^{N−1}`-term bipartite incompatibility witness, Bob's optimal observables,
//! the sum-of-squares certificate of its quantum bound, and the sign-pattern
//! probabilities a joint POVM induces.
//!
//! For sign row `y` with pattern `s_y ∈ {±1}^N` (first entry `+1`) the witness is
//!
//! ```text
//! Σ_y | η Σ_x s_{y,x} ⟨A_x ⊗ B_y⟩ − Δ_y |   ≤   2^{N−1}   (compatible Alice)
//! ```

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{domain, Error, Result};
use crate::jointmeas::JointPovm;
use crate::matcore::{
    conditional_operator, hs_inner, op_norm, tensor, tensor_herm, trace_norm, ComplexMatrix,
    HermitianOperator,
};
use crate::observables::DichotomicObservable;
use crate::states::check_density;

pub const MIN_SETTINGS: usize = 2;
pub const MAX_SETTINGS: usize = 9;

/// The `2^{n−1}` bit strings `l_y ∈ {0,1}^n` with `l_y^1 = 0`.
///
/// Row `y` reads bits 2..n as the binary digits of `y` (bit 2 most significant),
/// so for `n = 3` the rows are `000, 001, 010, 011`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignTable {
    n: usize,
    rows: Vec<Vec<u8>>,
}

impl SignTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// `(−1)^{l_y^x}` with 0-based `x`.
    pub fn sign(&self, y: usize, x: usize) -> f64 {
        if self.rows[y][x] == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn pattern(&self, y: usize) -> Vec<i8> {
        self.rows[y].iter().map(|&b| if b == 0 { 1 } else { -1 }).collect()
    }
}

pub fn sign_strings(n: usize) -> Result<SignTable> {
    if !(MIN_SETTINGS..=MAX_SETTINGS).contains(&n) {
        return Err(domain(format!("sign table needs {MIN_SETTINGS} <= n <= {MAX_SETTINGS}, got {n}")));
    }
    let rows = (0..1usize << (n - 1))
        .map(|y| {
            let mut row = vec![0u8; n];
            for (x, bit) in row.iter_mut().enumerate().skip(1) {
                *bit = ((y >> (n - 1 - x)) & 1) as u8;
            }
            row
        })
        .collect();
    Ok(SignTable { n, rows })
}

fn bob_dim(rho: &HermitianOperator, dim_a: usize) -> Result<usize> {
    if dim_a == 0 || !rho.dim().is_multiple_of(dim_a) {
        return Err(domain(format!("state of dim {} does not factor with Alice dim {dim_a}", rho.dim())));
    }
    Ok(rho.dim() / dim_a)
}

/// `Tr[ρ (A ⊗ B)]`.
pub fn correlation(rho: &HermitianOperator, a: &DichotomicObservable, b: &DichotomicObservable) -> Result<f64> {
    if rho.dim() != a.dim() * b.dim() {
        return Err(domain(format!("state of dim {} does not match {}·{}", rho.dim(), a.dim(), b.dim())));
    }
    hs_inner(rho, &tensor_herm(a.op(), b.op()))
}

/// `S_y = Σ_x s_{y,x} A_x` for every row of the table.
fn signed_sums(table: &SignTable, alice: &[DichotomicObservable]) -> Vec<HermitianOperator> {
    let dim = alice[0].dim();
    (0..table.len())
        .map(|y| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            for (x, a) in alice.iter().enumerate() {
                m.axpy(table.sign(y, x), a.op().matrix());
            }
            HermitianOperator::hermitian_part(&m)
        })
        .collect()
}

fn check_alice(alice: &[DichotomicObservable]) -> Result<SignTable> {
    let table = sign_strings(alice.len())?;
    let dim = alice[0].dim();
    if alice.iter().any(|a| a.dim() != dim) {
        return Err(domain("Alice's observables act on different dimensions"));
    }
    Ok(table)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(domain(format!("unsharpness {eta} outside [0, 1]")));
    }
    Ok(())
}

/// Offset `Δ` subtracted inside each absolute value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Delta {
    Shared(f64),
    PerRow(Vec<f64>),
}

impl Default for Delta {
    fn default() -> Self {
        Delta::Shared(0.0)
    }
}

impl Delta {
    fn expand(&self, rows: usize) -> Result<Vec<f64>> {
        match self {
            Delta::Shared(d) => Ok(vec![*d; rows]),
            Delta::PerRow(v) if v.len() == rows => Ok(v.clone()),
            Delta::PerRow(v) => Err(domain(format!("per-row Δ needs {rows} entries, got {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub n: usize,
    pub eta: f64,
    pub value: f64,
    /// `2^{n−1}`, satisfied by every compatible set.
    pub bound_local: f64,
    /// `η 2^{n−1} √n`, the largest quantum value.
    pub bound_quantum: f64,
    /// `|η Σ_x s_{y,x} ⟨A_x ⊗ B_y⟩ − Δ_y|` per row.
    pub per_y_terms: Vec<f64>,
    pub delta_used: Vec<f64>,
    /// Sum-of-squares gap of the `Δ = 0` functional.
    pub sos_gap: f64,
    pub violation: bool,
}

/// Evaluates the witness for Alice's observables smeared by `eta` and the given Bob
/// observables (one per sign row).
pub fn witness_value(
    rho: &HermitianOperator,
    alice: &[DichotomicObservable],
    eta: f64,
    bob: &[DichotomicObservable],
    delta: &Delta,
) -> Result<WitnessReport> {
    witness_value_with(rho, alice, eta, bob, delta, &Tolerances::default())
}

pub fn witness_value_with(
    rho: &HermitianOperator,
    alice: &[DichotomicObservable],
    eta: f64,
    bob: &[DichotomicObservable],
    delta: &Delta,
    tol: &Tolerances,
) -> Result<WitnessReport> {
    let table = check_alice(alice)?;
    check_eta(eta)?;
    if bob.len() != table.len() {
        return Err(domain(format!("need {} Bob observables, got {}", table.len(), bob.len())));
    }
    let deltas = delta.expand(table.len())?;
    let correlations = row_correlations(rho, alice, &table, bob)?;
    let per_y_terms: Vec<f64> =
        correlations.iter().zip(&deltas).map(|(c, d)| (eta * c - d).abs()).collect();
    let value: f64 = per_y_terms.iter().sum();
    let n = alice.len();
    let bound_local = (1u64 << (n - 1)) as f64;
    let sos = sos_certificate_with(rho, alice, eta, bob, tol)?;
    Ok(WitnessReport {
        n,
        eta,
        value,
        bound_local,
        bound_quantum: quantum_optimum(n, eta),
        per_y_terms,
        delta_used: deltas,
        sos_gap: sos.difference_form,
        violation: value > bound_local + tol.violation,
    })
}

/// `⟨S_y ⊗ B_y⟩` for every row (sharp observables, no η).
fn row_correlations(
    rho: &HermitianOperator,
    alice: &[DichotomicObservable],
    table: &SignTable,
    bob: &[DichotomicObservable],
) -> Result<Vec<f64>> {
    let dim_b = bob_dim(rho, alice[0].dim())?;
    check_density(rho, 1e-9)?;
    if bob.iter().any(|b| b.dim() != dim_b) {
        return Err(domain(format!("Bob's observables must act on dimension {dim_b}")));
    }
    signed_sums(table, alice)
        .iter()
        .zip(bob)
        .map(|(s, b)| hs_inner(&conditional_operator(s, rho, dim_b)?, b.op()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct BobOptimum {
    pub bob: Vec<DichotomicObservable>,
    /// `η Σ_y ‖χ_y‖₁`.
    pub value: f64,
    /// `χ_y = Tr_A[(S_y ⊗ I) ρ]`.
    pub conditional: Vec<HermitianOperator>,
}

/// Maximizes the `Δ = 0` witness over Bob: `B_y = sign(χ_y)` (zero eigenvalues map
/// to `+1`), since `max_B Tr[B χ] = ‖χ‖₁` over dichotomic `B`.
pub fn optimize_bob(rho: &HermitianOperator, alice: &[DichotomicObservable], eta: f64) -> Result<BobOptimum> {
    let table = check_alice(alice)?;
    check_eta(eta)?;
    check_density(rho, 1e-9)?;
    let dim_b = bob_dim(rho, alice[0].dim())?;
    let mut bob = Vec::with_capacity(table.len());
    let mut conditional = Vec::with_capacity(table.len());
    let mut total = 0.0;
    for s in signed_sums(&table, alice) {
        let chi = conditional_operator(&s, rho, dim_b)?;
        let spectrum = chi.eig()?;
        let scale = spectrum.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let sign = spectrum.reconstruct_with(|v| if v >= -1e-12 * scale { 1.0 } else { -1.0 });
        bob.push(DichotomicObservable::new(HermitianOperator::hermitian_part(&sign))?);
        total += spectrum.values.iter().map(|v| v.abs()).sum::<f64>();
        conditional.push(chi);
    }
    Ok(BobOptimum { bob, value: eta * total, conditional })
}

/// `‖Σ_x s_{y,x} A_x‖` for every sign row.
pub fn omega_factors(alice: &[DichotomicObservable]) -> Result<Vec<f64>> {
    let table = check_alice(alice)?;
    signed_sums(&table, alice).iter().map(op_norm).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SosCertificate {
    /// `Σ_y ω_y − Σ_y |η ⟨S_y ⊗ B_y⟩|`.
    pub difference_form: f64,
    /// `Tr[γ ρ]` with `γ` built explicitly.
    pub operator_form: f64,
    pub gamma_min_eigenvalue: f64,
    /// `ω_y = η ‖S_y‖`.
    pub omegas: Vec<f64>,
    /// Rows with `ω_y = 0`, left out of `γ`.
    pub skipped_rows: Vec<usize>,
}

/// Builds the sum-of-squares operator
///
/// ```text
/// γ = Σ_y (ω_y/2) L_y† L_y + Σ_y (ω_y² I − S̃_y²)/(2 ω_y) ⊗ I,
/// L_y = S̃_y/ω_y ⊗ I − t_y I ⊗ B_y,
/// ```
///
/// with `S̃_y = η S_y`, `ω_y = ‖S̃_y‖` and `t_y = ±1` the sign of `⟨S̃_y ⊗ B_y⟩`.
/// Both sums are PSD and `Tr[γρ] = Σ ω_y − Σ |⟨S̃_y ⊗ B_y⟩|` for every state. The
/// second sum vanishes when Alice's observables anticommute.
pub fn sos_certificate(
    rho: &HermitianOperator,
    alice: &[DichotomicObservable],
    eta: f64,
    bob: &[DichotomicObservable],
) -> Result<SosCertificate> {
    sos_certificate_with(rho, alice, eta, bob, &Tolerances::default())
}

pub fn sos_certificate_with(
    rho: &HermitianOperator,
    alice: &[DichotomicObservable],
    eta: f64,
    bob: &[DichotomicObservable],
    tol: &Tolerances,
) -> Result<SosCertificate> {
    let table = check_alice(alice)?;
    check_eta(eta)?;
    if bob.len() != table.len() {
        return Err(domain(format!("need {} Bob observables, got {}", table.len(), bob.len())));
    }
    let correlations = row_correlations(rho, alice, &table, bob)?;
    let dim_a = alice[0].dim();
    let dim_b = rho.dim() / dim_a;
    let id_a = ComplexMatrix::identity(dim_a);
    let id_b = ComplexMatrix::identity(dim_b);

    let mut gamma = ComplexMatrix::zeros(dim_a * dim_b, dim_a * dim_b);
    let mut omegas = Vec::with_capacity(table.len());
    let mut skipped_rows = Vec::new();
    let mut difference_form = 0.0;
    for (y, (s, b)) in signed_sums(&table, alice).iter().zip(bob).enumerate() {
        let s = s.scale(eta);
        let omega = op_norm(&s)?;
        omegas.push(omega);
        let corr = eta * correlations[y];
        difference_form += omega - corr.abs();
        if omega <= 1e-12 {
            skipped_rows.push(y);
            continue;
        }
        let t = if corr >= 0.0 { 1.0 } else { -1.0 };
        let mut l = tensor(s.matrix(), &id_b).scale(1.0 / omega);
        l.axpy(-t, &tensor(&id_a, b.op().matrix()));
        gamma.axpy(0.5 * omega, &(&l.adjoint() * &l));
        let s2 = s.matrix() * s.matrix();
        let remainder = &id_a.scale(omega * omega) - &s2;
        gamma.axpy(0.5 / omega, &tensor(&remainder, &id_b));
    }
    let gamma = HermitianOperator::hermitian_part(&gamma);
    let operator_form = hs_inner(&gamma, rho)?;
    let gamma_min_eigenvalue = gamma.min_eigenvalue()?;
    let discrepancy = (operator_form - difference_form).abs();
    if discrepancy > tol.sos_crosscheck {
        return Err(Error::Numeric(format!(
            "SOS gap routes disagree: operator form {operator_form}, difference form {difference_form}"
        )));
    }
    Ok(SosCertificate { difference_form, operator_form, gamma_min_eigenvalue, omegas, skipped_rows })
}

/// `Σ_y ω_y − (Δ = 0 witness value)`; cross-checked against `Tr[γ ρ]`.
pub fn sos_gap(
    rho: &HermitianOperator,
    alice: &[DichotomicObservable],
    eta: f64,
    bob: &[DichotomicObservable],
) -> Result<f64> {
    Ok(sos_certificate(rho, alice, eta, bob)?.difference_form)
}

/// `√(2^{n−1} Σ_y ω_y²)`, an upper bound on `Σ_y ω_y` for `2^{n−1}` entries.
pub fn concavity_bound(omegas: &[f64]) -> Result<f64> {
    if let Some(w) = omegas.iter().find(|w| w.is_nan() || **w < 0.0) {
        return Err(domain(format!("omega factors must be nonnegative, got {w}")));
    }
    Ok((omegas.len() as f64 * omegas.iter().map(|w| w * w).sum::<f64>()).sqrt())
}

/// `η 2^{n−1} √n`.
pub fn quantum_optimum(n: usize, eta: f64) -> f64 {
    eta * (1u64 << (n.max(1) - 1)) as f64 * (n as f64).sqrt()
}

/// Smallest η at which the optimized witness exceeds `2^{n−1}`, by bisection to `tol`;
/// `None` if it never does for η ≤ 1.
pub fn violation_onset(rho: &HermitianOperator, alice: &[DichotomicObservable], tol: f64) -> Result<Option<f64>> {
    let bound = (1u64 << (alice.len().max(1) - 1)) as f64;
    let exceeds = |eta: f64| -> Result<bool> { Ok(optimize_bob(rho, alice, eta)?.value > bound) };
    if !exceeds(1.0)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if exceeds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn check_joint_setup(joint: &JointPovm, rho: &HermitianOperator) -> Result<(SignTable, usize)> {
    let table = sign_strings(joint.n())?;
    let dim_b = bob_dim(rho, joint.dim())?;
    check_density(rho, 1e-9)?;
    Ok((table, dim_b))
}

/// Probability of each sign class `{a = s_y, a = −s_y}` under the joint POVM, with
/// Bob's outcome of `bob` summed out. The classes partition `{±1}^n`, so the entries
/// sum to one.
pub fn sign_pattern_probabilities(
    joint: &JointPovm,
    rho: &HermitianOperator,
    bob: &DichotomicObservable,
) -> Result<Vec<f64>> {
    let (table, dim_b) = check_joint_setup(joint, rho)?;
    if bob.dim() != dim_b {
        return Err(domain(format!("Bob's observable must act on dimension {dim_b}")));
    }
    let half_id = HermitianOperator::identity(dim_b).scale(0.5);
    let bob_effects = [&half_id + &bob.op().scale(0.5), &half_id - &bob.op().scale(0.5)];
    (0..table.len())
        .map(|y| {
            let pattern = table.pattern(y);
            let flipped: Vec<i8> = pattern.iter().map(|s| -s).collect();
            let mut p = 0.0;
            for signs in [&pattern, &flipped] {
                for eb in &bob_effects {
                    p += hs_inner(rho, &tensor_herm(joint.effect(signs), eb))?;
                }
            }
            Ok(p)
        })
        .collect()
}

/// Per-row offsets `Δ_y` determined by a joint POVM:
///
/// ```text
/// Δ_y = Σ_x s_{y,x} ⟨O_x ⊗ B_y⟩ − 2^{n−1} [ p(a = b s_y) − p(a = −b s_y) ]
/// ```
///
/// with `O_x` the joint POVM's marginal observables. With these offsets each row
/// term equals `2^{n−1} |p(a = b s_y) − p(a = −b s_y)|`, which is at most `2^{n−1}`
/// times the row's sign-class probability, so the witness cannot exceed `2^{n−1}`.
pub fn delta_from_joint(
    joint: &JointPovm,
    rho: &HermitianOperator,
    bob: &[DichotomicObservable],
) -> Result<Vec<f64>> {
    let (table, dim_b) = check_joint_setup(joint, rho)?;
    if bob.len() != table.len() || bob.iter().any(|b| b.dim() != dim_b) {
        return Err(domain(format!("need {} Bob observables on dimension {dim_b}", table.len())));
    }
    let scale = table.len() as f64;
    let marginals = (0..joint.n()).map(|x| joint.marginal_bias(x)).collect::<Result<Vec<_>>>()?;
    (0..table.len())
        .map(|y| {
            let b = bob[y].op();
            let mut corr = 0.0;
            for (x, o) in marginals.iter().enumerate() {
                corr += table.sign(y, x) * hs_inner(rho, &tensor_herm(o, b))?;
            }
            let pattern = table.pattern(y);
            let flipped: Vec<i8> = pattern.iter().map(|s| -s).collect();
            // p(a = b s) − p(a = −b s) = Σ_c c ⟨E_{c s} ⊗ B⟩
            let agree = hs_inner(rho, &tensor_herm(joint.effect(&pattern), b))?
                - hs_inner(rho, &tensor_herm(joint.effect(&flipped), b))?;
            Ok(corr - scale * agree)
        })
        .collect()
}

/// `‖χ‖₁` for each conditional operator; exposed for optimality checks.
pub fn conditional_trace_norms(opt: &BobOptimum) -> Result<Vec<f64>> {
    opt.conditional.iter().map(trace_norm).collect()
}
