//! A feasible joint POVM for unsharp Paulis, its marginals, and the sign-pattern
//! probabilities it induces on a bipartite state.

use nwise::jointmeas::jm_feasible;
use nwise::observables::{paulis, unsharp_povms, Outcome, UnsharpnessParam};
use nwise::states::maximally_entangled;
use nwise::witness::{optimize_bob, sign_pattern_probabilities};
use nwise::FeasibilityStatus;

fn main() -> nwise::Result<()> {
    let eta = 0.5;
    let povms = unsharp_povms(&paulis(), UnsharpnessParam::new(eta)?);
    let v = jm_feasible(&povms, 1e-7, 200_000)?;
    println!("η = {eta}: {:?} after {} iterations, residual {:.2e}", v.status, v.iterations, v.residual);
    assert_eq!(v.status, FeasibilityStatus::Feasible);
    let joint = v.certificate.expect("feasible verdicts carry a certificate");

    for (x, p) in povms.iter().enumerate() {
        let m = joint.marginalize(x, Outcome::Plus)?;
        println!("marginal {x}: |G − E₊| = {:.2e}", m.distance(p.effect(Outcome::Plus).unwrap()));
    }

    let rho = maximally_entangled(2);
    let bob = optimize_bob(&rho, &paulis(), eta)?.bob;
    let probs = sign_pattern_probabilities(&joint, &rho, &bob[0])?;
    println!("sign-class probabilities {probs:.4?}  sum {:.12}", probs.iter().sum::<f64>());

    let sharp = jm_feasible(&unsharp_povms(&paulis(), UnsharpnessParam::sharp()), 1e-7, 200_000)?;
    println!("η = 1: {:?}", sharp.status);
    Ok(())
}
