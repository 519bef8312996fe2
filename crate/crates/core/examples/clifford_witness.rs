//! Witness values for Clifford observables on a maximally entangled state, with
//! optimal Bob observables and the η at which the local bound is first exceeded.

use nwise::observables::clifford_generators;
use nwise::states::maximally_entangled;
use nwise::witness::{optimize_bob, quantum_optimum, violation_onset, witness_value, Delta};

fn main() -> nwise::Result<()> {
    for n in 2..=5 {
        let alice = clifford_generators(n)?;
        let rho = maximally_entangled(alice[0].dim());
        let opt = optimize_bob(&rho, &alice, 1.0)?;
        let report = witness_value(&rho, &alice, 1.0, &opt.bob, &Delta::default())?;
        let onset = violation_onset(&rho, &alice, 1e-10)?.unwrap();
        println!(
            "n = {n}  dim {}  value {:.6}  optimum {:.6}  local bound {}  onset η {:.8} (1/√n = {:.8})",
            alice[0].dim(),
            report.value,
            quantum_optimum(n, 1.0),
            report.bound_local,
            onset,
            1.0 / (n as f64).sqrt()
        );
    }
    Ok(())
}
