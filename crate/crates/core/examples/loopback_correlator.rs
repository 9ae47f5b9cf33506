//! Two party threads stream their samples to a correlator over loopback TCP;
//! the CSV matches the in-process pipeline byte for byte.

use std::net::TcpListener;
use std::thread;

use polcor::algebra::DetectorPair;
use polcor::harness::{run_in_process, run_party_to, serve_correlator, Endpoint};
use polcor::polarization::Party;
use polcor::simulator::OpticalConfig;

fn main() -> polcor::Result<()> {
    let cfg = OpticalConfig {
        theta: 0.3,
        xi: -0.4,
        n_bins: 20_000,
        seed: 5,
        ..Default::default()
    };
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?.to_string();
    let parties: Vec<_> = [Party::Alpha, Party::Beta]
        .into_iter()
        .map(|role| {
            let (cfg, sink) = (cfg.clone(), Endpoint::Tcp(addr.clone()));
            thread::spawn(move || run_party_to(role, &cfg, &sink))
        })
        .collect();
    let out = serve_correlator(&listener, &DetectorPair::ALL, &cfg)?;
    for p in parties {
        p.join().expect("party thread")?;
    }
    print!("{}", String::from_utf8_lossy(&out.csv));
    let direct = run_in_process(&cfg, &DetectorPair::ALL)?;
    println!("matches in-process run: {}", direct.csv == out.csv);
    Ok(())
}
