//! Every pair and triple of indicator measurements on a simplex is jointly measurable.

use nwise::app::simplicial_all_feasible;
use nwise::gptfrag::{gpt_jm_feasible, simplicial_gpt};

fn main() -> nwise::Result<()> {
    for d in 2..=4 {
        println!("d = {d}: all pairs and triples feasible = {}", simplicial_all_feasible(d)?);
    }
    let f = simplicial_gpt(3)?;
    let ms = [f.binary_measurement(1)?, f.binary_measurement(2)?, f.binary_measurement(4)?];
    let out = gpt_jm_feasible(&f, &ms)?;
    for (a, g) in out.joint_effects.unwrap().iter().enumerate() {
        println!("joint effect {a:03b}: {g:?}");
    }
    Ok(())
}
