//! The gbit's two fiducial measurements stay incompatible down to η = 1/2, below the
//! quantum pair value 1/√2.

use nwise::gptfrag::{gbit, gbit_fiducials, gpt_jm_feasible, gpt_jm_threshold, min_tensor};

fn main() -> nwise::Result<()> {
    let g = gbit();
    let fid = gbit_fiducials();
    println!("sharp fiducials jointly measurable: {}", gpt_jm_feasible(&g, &fid)?.is_feasible());
    for eta in [0.45, 0.5, 0.55] {
        let smeared = fid.iter().map(|m| m.smeared(eta, g.unit())).collect::<nwise::Result<Vec<_>>>()?;
        let out = gpt_jm_feasible(&g, &smeared)?;
        println!("η = {eta}: {:?}  ({} pivots)", out.solution.status, out.solution.pivots);
    }
    let r = gpt_jm_threshold(&g, &fid, 1e-4)?;
    println!("η* ≈ {:.5}, quantum pair 1/√2 ≈ {:.5}", r.eta_star, 0.5f64.sqrt());
    let gg = min_tensor(&g, &g)?;
    println!("minimal tensor product: {} states, {} effects in R^{}", gg.states().len(), gg.effects().len(), gg.vec_dim());
    Ok(())
}
