//! Loading tolerance overrides from TOML and using them in a feasibility run.

use nwise::jointmeas::jm_feasible_with;
use nwise::observables::{paulis, unsharp_povms, UnsharpnessParam};
use nwise::Tolerances;

fn main() -> nwise::Result<()> {
    let tol = Tolerances::from_toml_str("feasibility = 1e-9\nmax_iter = 50000\n")?;
    println!("{tol:#?}");
    let povms = unsharp_povms(&paulis(), UnsharpnessParam::new(0.55)?);
    let v = jm_feasible_with(&povms, &tol)?;
    println!("{:?} with residual {:.2e} after {} iterations", v.status, v.residual, v.iterations);
    Ok(())
}
