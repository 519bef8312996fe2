//! Sum-of-squares gap for random observables and states, and its vanishing at the
//! optimal configuration.

use nwise::observables::clifford_generators;
use nwise::random;
use nwise::states::maximally_entangled;
use nwise::witness::{optimize_bob, sos_certificate};

fn main() -> nwise::Result<()> {
    let mut rng = random::seeded(5);
    let mut min_gap = f64::INFINITY;
    for _ in 0..50 {
        let alice: Vec<_> = (0..3).map(|_| random::dichotomic(2, &mut rng)).collect();
        let bob: Vec<_> = (0..4).map(|_| random::dichotomic(2, &mut rng)).collect();
        let rho = random::density(4, &mut rng);
        let c = sos_certificate(&rho, &alice, random::uniform(&mut rng), &bob)?;
        min_gap = min_gap.min(c.difference_form);
    }
    println!("smallest gap over 50 random instances: {min_gap:.3e}");

    let alice = clifford_generators(3)?;
    let rho = maximally_entangled(2);
    let bob = optimize_bob(&rho, &alice, 1.0)?.bob;
    let c = sos_certificate(&rho, &alice, 1.0, &bob)?;
    println!(
        "optimum: gap {:.2e} (operator form {:.2e}), ω = {:.4?}, min eig γ {:.2e}",
        c.difference_form, c.operator_form, c.omegas, c.gamma_min_eigenvalue
    );
    Ok(())
}
