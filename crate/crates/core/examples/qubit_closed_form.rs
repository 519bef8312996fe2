//! The closed-form qubit value against bisection: exact for orthogonal axes, an upper
//! bound on the critical η for random ones.

use nwise::jointmeas::{jm_threshold, qubit_unbiased_threshold};
use nwise::observables::bloch_observable;
use nwise::random;

fn report(label: &str, axes: &[[f64; 3]]) -> nwise::Result<()> {
    let obs = axes.iter().map(|k| bloch_observable(*k)).collect::<nwise::Result<Vec<_>>>()?;
    let closed = qubit_unbiased_threshold(axes)?;
    let r = jm_threshold(&obs, 1e-3)?;
    let band = r.undecided_at.map_or(String::new(), |e| format!("  undecided at {e:.4}"));
    println!(
        "{label:10} closed {closed:.5}  bracket [{:.5}, {:.5}]  bound holds: {}{band}",
        r.bracket.0,
        r.bracket.1,
        r.bracket.0 <= closed + 1e-12
    );
    Ok(())
}

fn main() -> nwise::Result<()> {
    report("x, z", &[[1., 0., 0.], [0., 0., 1.]])?;
    report("x, y, z", &[[1., 0., 0.], [0., 1., 0.], [0., 0., 1.]])?;
    let c = 60f64.to_radians();
    report("60°", &[[0., 0., 1.], [c.sin(), 0., c.cos()]])?;
    let mut rng = random::seeded(11);
    for n in [2, 3] {
        let axes: Vec<[f64; 3]> = (0..n).map(|_| random::unit_vector3(&mut rng)).collect();
        report(&format!("random {n}"), &axes)?;
    }
    Ok(())
}
