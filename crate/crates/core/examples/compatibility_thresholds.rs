//! Critical unsharpness of Pauli pairs and triples by bisection over the
//! joint-measurability test, next to the closed form for qubit Bloch axes.

use std::time::Instant;

use nwise::jointmeas::{jm_threshold, qubit_unbiased_threshold};
use nwise::observables::{pauli, paulis, Axis};

fn main() -> nwise::Result<()> {
    let sets = [
        ("{σx, σz}", vec![pauli(Axis::X), pauli(Axis::Z)], vec![[1., 0., 0.], [0., 0., 1.]]),
        ("{σx, σy, σz}", paulis(), vec![[1., 0., 0.], [0., 1., 0.], [0., 0., 1.]]),
    ];
    for (label, obs, axes) in sets {
        let t0 = Instant::now();
        let r = jm_threshold(&obs, 1e-3)?;
        println!(
            "{label:14} η* ≈ {:.5}  bracket [{:.5}, {:.5}]  closed form {:.5}  ({} evaluations, {:?})",
            r.eta_star,
            r.bracket.0,
            r.bracket.1,
            qubit_unbiased_threshold(&axes)?,
            r.evaluations,
            t0.elapsed()
        );
    }
    Ok(())
}
