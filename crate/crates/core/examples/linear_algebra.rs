//! Eigendecomposition, PSD projection and partial traces on a small bipartite state.

use nwise::matcore::{her_eig, partial_trace, psd_project, trace_norm, HermitianOperator, Subsystem};
use nwise::random;
use nwise::states::maximally_entangled;

fn main() -> nwise::Result<()> {
    let mut rng = random::seeded(1);
    let h = random::hermitian(4, &mut rng);
    let e = her_eig(&h)?;
    println!("spectrum        {:?}", e.values);
    println!("reconstruction  {:.2e}", e.reconstruct().distance(h.matrix()));

    let p = psd_project(&h)?;
    println!("min eig after projection {:.2e}", p.min_eigenvalue()?);
    println!("trace norm      {:.6}", trace_norm(&h)?);

    let phi = maximally_entangled(2);
    let rho_b = partial_trace(&phi, 2, 2, Subsystem::B)?;
    let half = HermitianOperator::identity(2).scale(0.5);
    println!("Tr_A |Φ+⟩⟨Φ+| = I/2 ? {}", rho_b.distance(&half) < 1e-15);
    Ok(())
}
