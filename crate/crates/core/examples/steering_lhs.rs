//! Steering with unsharp Paulis: LHS verdicts, the steering threshold and the
//! corresponding simplex-embeddability verdict.

use nwise::assemblage::{lhs_feasible, lhs_threshold, simplex_embeddable_verdict, steer};
use nwise::observables::{paulis, unsharp_povms, UnsharpnessParam};
use nwise::states::maximally_entangled;
use nwise::Tolerances;

fn main() -> nwise::Result<()> {
    let rho = maximally_entangled(2);
    for eta in [0.5, 0.57, 0.59, 0.7, 1.0] {
        let asm = steer(&rho, &unsharp_povms(&paulis(), UnsharpnessParam::new(eta)?))?;
        let v = lhs_feasible(&asm, 1e-7, 200_000)?;
        let (embed, _) = simplex_embeddable_verdict(&asm, &Tolerances::default())?;
        println!("η = {eta:4}: LHS {:?} (residual {:.1e})  fragment {embed:?}", v.status, v.residual);
    }
    let r = lhs_threshold(&rho, &paulis(), 1e-3)?;
    println!("steering threshold ≈ {:.5}  bracket [{:.5}, {:.5}]", r.eta_star, r.bracket.0, r.bracket.1);
    Ok(())
}
