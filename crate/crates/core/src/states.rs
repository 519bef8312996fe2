//! Standard bipartite states.

use crate::error::{domain, Result};
use crate::matcore::{tensor_herm, HermitianOperator, C64};

/// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = d^{-1/2} Σ_i |i⟩|i⟩` on `C^d ⊗ C^d`.
pub fn maximally_entangled(d: usize) -> HermitianOperator {
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        psi[i * d + i] = amp;
    }
    HermitianOperator::projector(&psi)
}

pub fn maximally_mixed(dim: usize) -> HermitianOperator {
    HermitianOperator::identity(dim).scale(1.0 / dim as f64)
}

pub fn product(rho_a: &HermitianOperator, rho_b: &HermitianOperator) -> HermitianOperator {
    tensor_herm(rho_a, rho_b)
}

/// Checks `rho` is a density operator (PSD, unit trace) within `tol`.
pub fn check_density(rho: &HermitianOperator, tol: f64) -> Result<()> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > tol {
        return Err(domain(format!("state has trace {tr}, expected 1")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -tol {
        return Err(domain(format!("state is not PSD (min eigenvalue {min:e})")));
    }
    Ok(())
}
