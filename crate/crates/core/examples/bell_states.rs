//! Labels the fringe form each detector pair shows at the even and odd phase
//! settings.

use std::f64::consts::PI;

use polcor::algebra::DetectorPair;
use polcor::measurement::classify_bell_state;

fn main() -> polcor::Result<()> {
    for eta_ab in [0.0, PI] {
        for pair in DetectorPair::ALL {
            let label = classify_bell_state(eta_ab, pair.family(), 1e-9)?;
            println!("eta_ab={eta_ab:.4}  {pair}  {}", label.symbol());
        }
    }
    Ok(())
}
