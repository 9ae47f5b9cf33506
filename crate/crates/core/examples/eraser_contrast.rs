//! Local fringe visibility when D and A pulses overlap in time versus when
//! they are kept apart.

use std::f64::consts::FRAC_PI_8;

use polcor::acceptance::eraser_visibility;
use polcor::simulator::OverlapMode;

fn main() -> polcor::Result<()> {
    println!("theta     coherent  separated  |cos 2theta|");
    for k in 0..=4 {
        let theta = FRAC_PI_8 * k as f64 / 2.0;
        let coh = eraser_visibility(theta, OverlapMode::Coherent, 2_000)?;
        let sep = eraser_visibility(theta, OverlapMode::Separated, 2_000)?;
        println!("{theta:.4}    {coh:.4}    {sep:.2e}   {:.4}", (2.0 * theta).cos().abs());
    }
    Ok(())
}
