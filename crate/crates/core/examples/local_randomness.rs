//! Sweeps Alice's MZI phase and shows that neither party's local port
//! intensities respond to it.

use std::f64::consts::TAU;

use polcor::measurement::local_stats;
use polcor::polarization::Party;
use polcor::simulator::{simulate, OpticalConfig};

fn main() -> polcor::Result<()> {
    let base = OpticalConfig {
        theta: 0.4,
        xi: 1.1,
        n_bins: 20_000,
        ..Default::default()
    };
    println!("psi_a     alice p1  alice p2  bob p1    bob p2");
    for k in 0..8 {
        let cfg = OpticalConfig {
            psi_a: TAU * k as f64 / 8.0,
            ..base.clone()
        };
        let s = simulate(&cfg)?;
        let a = local_stats(s.party(Party::Alpha), Party::Alpha)?;
        let b = local_stats(s.party(Party::Beta), Party::Beta)?;
        println!(
            "{:<8.4}  {:.6}  {:.6}  {:.6}  {:.6}",
            cfg.psi_a, a.port1_mean, a.port2_mean, b.port1_mean, b.port2_mean
        );
    }
    Ok(())
}
