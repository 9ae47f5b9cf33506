//! CSV output. Every file starts with `#` comment lines holding the fully
//! resolved configuration, enough to regenerate it bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::measurement::PairCorrelation;
use crate::simulator::OpticalConfig;

pub const CORRELATION_COLUMNS: [&str; 12] = [
    "pair",
    "theta",
    "xi",
    "psi_a",
    "psi_b",
    "eta",
    "eta_ab",
    "n_pairs",
    "discarded_fraction",
    "estimate",
    "closed_form",
    "std_err",
];

/// `# key=value` lines for every config field. Floats use Rust's shortest
/// round-trip formatting.
pub fn config_comment(cfg: &OpticalConfig) -> String {
    format!(
        "# theta={}\n# xi={}\n# psi_a={}\n# psi_b={}\n# eta={}\n# i0={}\n# n_bins={}\n# duty={}\n# seed={}\n# overlap_mode={}\n",
        cfg.theta,
        cfg.xi,
        cfg.psi_a,
        cfg.psi_b,
        cfg.eta,
        cfg.i0,
        cfg.n_bins,
        cfg.duty,
        cfg.seed,
        cfg.overlap_mode
    )
}

pub(crate) fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf)
}

/// One row of the correlation table.
pub fn correlation_row(cfg: &OpticalConfig, r: &PairCorrelation) -> Vec<String> {
    vec![
        r.pair.to_string(),
        cfg.theta.to_string(),
        cfg.xi.to_string(),
        cfg.psi_a.to_string(),
        cfg.psi_b.to_string(),
        cfg.eta.to_string(),
        cfg.phases().eta_ab().to_string(),
        r.n_pairs.to_string(),
        r.discarded_fraction.to_string(),
        r.estimate.to_string(),
        r.closed_form.to_string(),
        r.std_err.to_string(),
    ]
}

/// Correlation table for one configuration. The in-process pipeline and the
/// stream correlator both write through here.
pub fn correlation_csv(cfg: &OpticalConfig, results: &[PairCorrelation]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    buf.extend_from_slice(b"# polcor correlation v1\n");
    buf.extend_from_slice(config_comment(cfg).as_bytes());
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(CORRELATION_COLUMNS)?;
        for r in results {
            w.write_record(correlation_row(cfg, r))?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
