//! Two-party execution over byte streams.
//!
//! Alice and Bob each regenerate the shared pulse schedule from the seed,
//! propagate through their own optics and forward the digitized samples. The
//! correlator merges the two streams by bin index and runs the same pairing
//! and estimation code as the in-process pipeline, so both paths emit
//! identical CSV bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::mpsc::{sync_channel, Receiver};
use std::thread;
use std::time::Duration;

use crate::algebra::DetectorPair;
use crate::error::{Error, Result};
use crate::measurement::{correlate, PairCorrelation};
use crate::polarization::Party;
use crate::report::correlation_csv;
use crate::simulator::{gen_schedule, propagate_party, simulate, DetectorSample, OpticalConfig, SampleStream};
use crate::wire::{read_header, read_record, write_header, write_record, StreamHeader};

/// Records buffered per party between the socket reader and the merge.
pub const REORDER_CAPACITY: usize = 4096;
pub const CONNECT_ATTEMPTS: u32 = 50;
pub const CONNECT_BACKOFF: Duration = Duration::from_millis(40);

/// Where a party writes its stream, or where a correlator reads one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    File(PathBuf),
    Tcp(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartySummary {
    pub party: Party,
    pub bins_emitted: u64,
}

/// Streams one party's header and samples into `sink`, in bin order.
pub fn run_party<W: Write>(role: Party, cfg: &OpticalConfig, sink: W) -> Result<PartySummary> {
    cfg.validate()?;
    let mut w = BufWriter::new(sink);
    write_header(&mut w, &StreamHeader::new(role, cfg.shared_digest()))?;
    let mut emitted = 0;
    for bin in gen_schedule(cfg.n_bins, cfg.duty, cfg.seed)? {
        write_record(&mut w, &propagate_party(bin, role, cfg)?)?;
        emitted += 1;
    }
    w.flush()?;
    Ok(PartySummary {
        party: role,
        bins_emitted: emitted,
    })
}

/// Connects to `addr`, retrying refused or reset connections a bounded number
/// of times.
pub fn connect_with_retry(addr: &str, attempts: u32, backoff: Duration) -> Result<TcpStream> {
    let mut last = None;
    for k in 0..attempts.max(1) {
        match TcpStream::connect(addr) {
            Ok(s) => {
                s.set_nodelay(true)?;
                return Ok(s);
            }
            Err(e) => {
                last = Some(e);
                thread::sleep(backoff * (k + 1).min(10));
            }
        }
    }
    Err(Error::Connect {
        attempts,
        source: last.expect("at least one attempt"),
    })
}

/// Runs a party against a file or TCP endpoint.
pub fn run_party_to(role: Party, cfg: &OpticalConfig, sink: &Endpoint) -> Result<PartySummary> {
    match sink {
        Endpoint::File(path) => {
            let f = File::create(path)?;
            let summary = run_party(role, cfg, &f)?;
            f.sync_all()?;
            Ok(summary)
        }
        Endpoint::Tcp(addr) => {
            let stream = connect_with_retry(addr, CONNECT_ATTEMPTS, CONNECT_BACKOFF)?;
            let summary = run_party(role, cfg, &stream)?;
            stream.shutdown(std::net::Shutdown::Write)?;
            Ok(summary)
        }
    }
}

/// Correlator output: the estimates and the CSV bytes.
#[derive(Debug, Clone)]
pub struct CorrelatorOutput {
    pub results: Vec<PairCorrelation>,
    pub csv: Vec<u8>,
}

/// In-process reference: simulate, correlate and render in one go.
pub fn run_in_process(cfg: &OpticalConfig, pairs: &[DetectorPair]) -> Result<CorrelatorOutput> {
    let stream = simulate(cfg)?;
    finish(&stream, pairs, cfg)
}

fn finish(stream: &SampleStream, pairs: &[DetectorPair], cfg: &OpticalConfig) -> Result<CorrelatorOutput> {
    let results = correlate(stream, pairs, cfg)?;
    let csv = correlation_csv(cfg, &results)?;
    Ok(CorrelatorOutput { results, csv })
}

struct Incoming {
    header: StreamHeader,
    records: Receiver<Result<DetectorSample>>,
}

/// Reads the header synchronously, then hands the records to a reader thread
/// feeding a bounded channel. The thread blocks when the merge lags.
fn spawn_reader(mut source: Box<dyn Read + Send>) -> Result<Incoming> {
    let header = read_header(&mut source)?;
    let party = header.party;
    let (tx, rx) = sync_channel(REORDER_CAPACITY);
    thread::spawn(move || {
        let mut r = BufReader::new(source);
        loop {
            match read_record(&mut r, party) {
                Ok(Some(s)) => {
                    if tx.send(Ok(s)).is_err() {
                        return;
                    }
                }
                Ok(None) => return,
                Err(e) => {
                    let _ = tx.send(Err(e));
                    return;
                }
            }
        }
    });
    Ok(Incoming { header, records: rx })
}

fn next_in_order(
    rx: &Receiver<Result<DetectorSample>>,
    party: Party,
    expected: u64,
    n_bins: u64,
) -> Result<DetectorSample> {
    let name = party.name();
    match rx.recv() {
        Ok(Ok(s)) if s.bin == expected => Ok(s),
        Ok(Ok(s)) if s.bin > expected => Err(Error::StreamGap {
            party: name,
            missing: expected..s.bin,
        }),
        Ok(Ok(s)) => Err(Error::Framing(format!(
            "{name} bin index {} not strictly increasing (expected {expected})",
            s.bin
        ))),
        Ok(Err(e)) => Err(e),
        Err(_) => Err(Error::StreamGap {
            party: name,
            missing: expected..n_bins,
        }),
    }
}

/// Merge-joins two party streams by bin index and correlates them.
///
/// Both headers must carry the digest of `cfg`'s shared fields and name
/// different parties. Streams must be dense: a missing bin is a
/// [`Error::StreamGap`] naming the absent range.
pub fn run_correlator(
    sources: [Box<dyn Read + Send>; 2],
    pairs: &[DetectorPair],
    cfg: &OpticalConfig,
) -> Result<CorrelatorOutput> {
    cfg.validate()?;
    let [s0, s1] = sources;
    let (i0, i1) = (spawn_reader(s0)?, spawn_reader(s1)?);
    if i0.header.party == i1.header.party {
        return Err(Error::ConfigMismatch(format!(
            "both streams claim party {}",
            i0.header.party
        )));
    }
    if i0.header.config_digest != i1.header.config_digest {
        return Err(Error::ConfigMismatch(
            "alice and bob streams carry different config digests".into(),
        ));
    }
    if i0.header.config_digest != cfg.shared_digest() {
        return Err(Error::ConfigMismatch(
            "stream config digest differs from the correlator's config".into(),
        ));
    }
    let (alice_in, bob_in) = if i0.header.party == Party::Alpha {
        (i0, i1)
    } else {
        (i1, i0)
    };

    let n = cfg.n_bins;
    let mut alice = Vec::with_capacity(n as usize);
    let mut bob = Vec::with_capacity(n as usize);
    for k in 0..n {
        let a = next_in_order(&alice_in.records, Party::Alpha, k, n)?;
        let b = next_in_order(&bob_in.records, Party::Beta, k, n)?;
        if a.tag != b.tag {
            return Err(Error::ConfigMismatch(format!(
                "bin {k}: alice saw {} but bob saw {}",
                a.tag, b.tag
            )));
        }
        alice.push(a);
        bob.push(b);
    }
    for (rx, name) in [(&alice_in.records, "alice"), (&bob_in.records, "bob")] {
        match rx.recv() {
            Err(_) => {}
            Ok(Err(e)) => return Err(e),
            Ok(Ok(s)) => {
                return Err(Error::Framing(format!(
                    "{name} stream continues past n_bins with bin {}",
                    s.bin
                )))
            }
        }
    }
    let stream = SampleStream {
        mode: cfg.overlap_mode,
        alice,
        bob,
    };
    finish(&stream, pairs, cfg)
}

/// Accepts exactly two party connections on `listener` and correlates them.
pub fn serve_correlator(
    listener: &TcpListener,
    pairs: &[DetectorPair],
    cfg: &OpticalConfig,
) -> Result<CorrelatorOutput> {
    let (c0, _) = listener.accept()?;
    let (c1, _) = listener.accept()?;
    run_correlator([Box::new(c0), Box::new(c1)], pairs, cfg)
}

/// Opens correlator sources: two files, or one TCP listen address shared by
/// both parties.
pub fn run_correlator_from(
    sources: &[Endpoint],
    pairs: &[DetectorPair],
    cfg: &OpticalConfig,
) -> Result<CorrelatorOutput> {
    match sources {
        [Endpoint::Tcp(addr)] => {
            let addr = addr
                .to_socket_addrs()?
                .next()
                .ok_or_else(|| Error::invalid("listen", addr, "HOST:PORT"))?;
            serve_correlator(&TcpListener::bind(addr)?, pairs, cfg)
        }
        [Endpoint::File(a), Endpoint::File(b)] => run_correlator(
            [Box::new(File::open(a)?), Box::new(File::open(b)?)],
            pairs,
            cfg,
        ),
        _ => Err(Error::invalid(
            "sources",
            format!("{sources:?}"),
            "two stream files or one --listen HOST:PORT",
        )),
    }
}
