//! Prints the product-basis expansion and its reduction for every detector
//! pair, then compares against the closed form.

use std::f64::consts::{FRAC_PI_8, PI};

use polcor::algebra::{closed_form_r, derive, DetectorPair};
use polcor::polarization::PhaseSet;

fn main() -> polcor::Result<()> {
    let phases = PhaseSet::new(PI / 3.0, 0.0, 0.0);
    let (theta, xi) = (FRAC_PI_8, -0.2);
    for pair in DetectorPair::ALL {
        let d = derive(pair, theta, xi, &phases, 1.0)?;
        print!("{d}");
        let closed = closed_form_r(pair, theta, xi, phases.eta_ab(), 1.0)?;
        println!("closed form {closed:.12}\n");
    }
    Ok(())
}
