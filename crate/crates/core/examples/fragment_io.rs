//! Text round trips for a GPT fragment and a steered assemblage.

use nwise::assemblage::{self, steer};
use nwise::gptfrag::io::{self, FragmentFile};
use nwise::gptfrag::{gbit, gbit_fiducials};
use nwise::observables::{pauli, unsharp_povms, Axis, UnsharpnessParam};
use nwise::states::maximally_entangled;

fn main() -> nwise::Result<()> {
    let file = FragmentFile { fragment: gbit(), measurements: gbit_fiducials().to_vec() };
    let text = io::write(&file)?;
    print!("{text}");
    assert_eq!(io::parse(&text)?, file);

    let obs = [pauli(Axis::X), pauli(Axis::Z)];
    let asm = steer(&maximally_entangled(2), &unsharp_povms(&obs, UnsharpnessParam::new(0.8)?))?;
    let text = assemblage::io::write(&asm);
    print!("\n{text}");
    assert_eq!(assemblage::io::parse(&text)?, asm);
    Ok(())
}
