//! Builds each party's D and A fields, sends them through the analyzer and
//! prints the port amplitudes.

use std::f64::consts::FRAC_PI_8;

use polcor::polarization::{analyzer_ports, make_party_field, Party, PhaseSet, SourceTag};

fn main() -> polcor::Result<()> {
    let phases = PhaseSet::new(0.3, 0.1, -0.2);
    for party in [Party::Alpha, Party::Beta] {
        for tag in [SourceTag::D, SourceTag::A] {
            let f = make_party_field(party, tag, &phases, 1.0)?;
            let (p1, p2) = analyzer_ports(FRAC_PI_8, &f);
            println!(
                "{:5} {tag}: in ({:.3}, {:.3})  port1 I={:.4}  port2 I={:.4}  sum={:.4}",
                party.name(),
                f.coef_h,
                f.coef_v,
                p1.intensity(),
                p2.intensity(),
                p1.intensity() + p2.intensity()
            );
        }
    }
    Ok(())
}
