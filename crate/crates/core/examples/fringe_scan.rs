//! Joint-intensity fringe of pair AB as Bob's analyzer turns, for the even and
//! odd phase settings.

use std::f64::consts::PI;

use polcor::algebra::DetectorPair;
use polcor::harness::run_in_process;
use polcor::simulator::OpticalConfig;

fn main() -> polcor::Result<()> {
    for eta in [0.0, PI / 2.0] {
        println!("eta_ab = {}", 2.0 * eta);
        for k in 0..=8 {
            let cfg = OpticalConfig {
                xi: PI * k as f64 / 8.0,
                eta,
                n_bins: 10_000,
                ..Default::default()
            };
            let r = &run_in_process(&cfg, &[DetectorPair::AB])?.results[0];
            let bar = "#".repeat((r.estimate * 40.0).round() as usize);
            println!("  xi={:.4}  R={:.6}  {bar}", cfg.xi, r.estimate);
        }
    }
    Ok(())
}
