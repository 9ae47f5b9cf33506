//! Command-line front end. The `polcor` binary only parses arguments and calls
//! [`main_with`].

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::acceptance;
use crate::algebra::{derive, intensity_expectation, DetectorPair};
use crate::config::{parse_angle, parse_config, ConfigOverrides, SEED_ENV};
use crate::error::{Error, Result};
use crate::harness::{run_correlator_from, run_in_process, run_party_to, Endpoint};
use crate::measurement::{chsh, local_stats, ChshAngles, ChshMode};
use crate::polarization::Party;
use crate::report::{config_comment, correlation_row, csv_writer, write_atomic, CORRELATION_COLUMNS};
use crate::simulator::{simulate, OpticalConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    LocalScan,
    FringeScan,
    Chsh,
    Algebra,
    RunParty,
    RunCorrelator,
    Verify,
}

/// Config fields that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Theta,
    Xi,
    PsiA,
    PsiB,
    Eta,
    I0,
    Duty,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Theta => "theta",
            SweepParam::Xi => "xi",
            SweepParam::PsiA => "psi_a",
            SweepParam::PsiB => "psi_b",
            SweepParam::Eta => "eta",
            SweepParam::I0 => "i0",
            SweepParam::Duty => "duty",
        }
    }

    pub fn apply(self, cfg: &mut OpticalConfig, v: f64) {
        match self {
            SweepParam::Theta => cfg.theta = v,
            SweepParam::Xi => cfg.xi = v,
            SweepParam::PsiA => cfg.psi_a = v,
            SweepParam::PsiB => cfg.psi_b = v,
            SweepParam::Eta => cfg.eta = v,
            SweepParam::I0 => cfg.i0 = v,
            SweepParam::Duty => cfg.duty = v,
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "theta" => SweepParam::Theta,
            "xi" => SweepParam::Xi,
            "psi_a" => SweepParam::PsiA,
            "psi_b" => SweepParam::PsiB,
            "eta" => SweepParam::Eta,
            "i0" => SweepParam::I0,
            "duty" => SweepParam::Duty,
            _ => {
                return Err(Error::invalid(
                    "sweep",
                    s,
                    "theta|xi|psi_a|psi_b|eta|i0|duty",
                ))
            }
        })
    }
}

/// `NAME:START:STOP:STEPS`, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        (0..self.steps)
            .map(|k| self.start + span * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<_> = s.split(':').collect();
        let [name, start, stop, steps] = parts[..] else {
            return Err(Error::invalid("sweep", s, "NAME:START:STOP:STEPS"));
        };
        let steps: usize = steps
            .trim()
            .parse()
            .map_err(|_| Error::invalid("sweep steps", steps, "integer >= 2"))?;
        if steps < 2 {
            return Err(Error::invalid("sweep steps", steps, "integer >= 2"));
        }
        Ok(Sweep {
            param: name.trim().parse()?,
            start: parse_angle("sweep start", start)?,
            stop: parse_angle("sweep stop", stop)?,
            steps,
        })
    }
}

impl std::fmt::Display for Sweep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}:{}", self.param.name(), self.start, self.stop, self.steps)
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub config: OpticalConfig,
    pub sweep: Option<Sweep>,
    pub out: Option<PathBuf>,
    pub pairs: Vec<DetectorPair>,
    pub role: Option<Party>,
    pub listen: Option<String>,
    pub connect: Option<String>,
    pub inputs: Vec<PathBuf>,
    pub chsh_angles: ChshAngles,
}

fn sweep_csv_header(kind: &str, cfg: &OpticalConfig, sweep: &Sweep) -> Vec<u8> {
    let mut buf = format!("# polcor {kind} v1\n").into_bytes();
    buf.extend_from_slice(config_comment(cfg).as_bytes());
    buf.extend_from_slice(format!("# sweep={sweep}\n").as_bytes());
    buf
}

/// R for each requested pair at every sweep point.
pub fn fringe_scan(cfg: &OpticalConfig, sweep: &Sweep, pairs: &[DetectorPair]) -> Result<Vec<u8>> {
    let mut buf = sweep_csv_header("fringe-scan", cfg, sweep);
    {
        let mut w = csv_writer(&mut buf);
        let mut cols = vec!["sweep_value"];
        cols.extend(CORRELATION_COLUMNS);
        w.write_record(&cols)?;
        for v in sweep.values() {
            let mut point = cfg.clone();
            sweep.param.apply(&mut point, v);
            for r in run_in_process(&point, pairs)?.results {
                let mut row = vec![v.to_string()];
                row.extend(correlation_row(&point, &r));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
    }
    Ok(buf)
}

pub const LOCAL_SCAN_COLUMNS: [&str; 10] = [
    "sweep_value",
    "party",
    "n_bins",
    "port1_mean",
    "port1_std_err",
    "port2_mean",
    "port2_std_err",
    "full_mean",
    "full_std_err",
    "expected_local",
];

/// Per-party mean port intensities at every sweep point.
pub fn local_scan(cfg: &OpticalConfig, sweep: &Sweep) -> Result<Vec<u8>> {
    let mut buf = sweep_csv_header("local-scan", cfg, sweep);
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(LOCAL_SCAN_COLUMNS)?;
        for v in sweep.values() {
            let mut point = cfg.clone();
            sweep.param.apply(&mut point, v);
            let s = simulate(&point)?;
            for party in [Party::Alpha, Party::Beta] {
                let st = local_stats(s.party(party), party)?;
                let expected =
                    intensity_expectation(party, point.analyzer_angle(party), &point.phases(), point.i0)?;
                w.write_record([
                    v.to_string(),
                    party.to_string(),
                    st.n_bins.to_string(),
                    st.port1_mean.to_string(),
                    st.port1_std_err.to_string(),
                    st.port2_mean.to_string(),
                    st.port2_std_err.to_string(),
                    st.full_mean.to_string(),
                    st.full_std_err.to_string(),
                    expected.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(buf)
}

/// CHSH table plus a one-line summary.
pub fn chsh_report(cfg: &OpticalConfig, angles: ChshAngles) -> Result<(Vec<u8>, String)> {
    let r = chsh(cfg, angles, ChshMode::MonteCarlo)?;
    let mut buf = b"# polcor chsh v1\n".to_vec();
    buf.extend_from_slice(config_comment(cfg).as_bytes());
    buf.extend_from_slice(
        format!(
            "# angles=({}, {}, {}, {})\n",
            angles.a, angles.a_prime, angles.b, angles.b_prime
        )
        .as_bytes(),
    );
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(["setting", "theta", "xi", "e_estimate", "e_closed"])?;
        let names = ["a,b", "a,b'", "a',b", "a',b'"];
        for (k, (t, x)) in angles.settings().into_iter().enumerate() {
            w.write_record([
                names[k].to_string(),
                t.to_string(),
                x.to_string(),
                r.correlations[k].to_string(),
                r.closed_correlations[k].to_string(),
            ])?;
        }
        w.write_record([
            "S".to_string(),
            String::new(),
            String::new(),
            r.s_value.to_string(),
            r.s_closed.to_string(),
        ])?;
        w.flush()?;
    }
    let summary = format!(
        "S = {:.6} (closed form {:.6}); classical bound 2, violation: {}",
        r.s_value,
        r.s_closed,
        if r.s_value.abs() > 2.0 { "yes" } else { "no" }
    );
    Ok((buf, summary))
}

pub fn algebra_text(cfg: &OpticalConfig, pairs: &[DetectorPair]) -> Result<String> {
    let mut out = String::new();
    for &p in pairs {
        out.push_str(&derive(p, cfg.theta, cfg.xi, &cfg.phases(), cfg.i0)?.to_string());
    }
    Ok(out)
}

fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => {
            stdout.write_all(bytes)?;
            Ok(())
        }
    }
}

/// Executes a spec. Returns the process exit code for non-error outcomes
/// (`verify` reports failed criteria as 1).
pub fn run(spec: &RunSpec, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = &spec.config;
    let out = spec.out.as_deref();
    match spec.command {
        Command::Simulate => {
            emit(out, &run_in_process(cfg, &spec.pairs)?.csv, stdout)?;
        }
        Command::FringeScan => {
            let sweep = spec.sweep.unwrap_or(Sweep {
                param: SweepParam::Xi,
                start: 0.0,
                stop: PI,
                steps: 33,
            });
            emit(out, &fringe_scan(cfg, &sweep, &spec.pairs)?, stdout)?;
        }
        Command::LocalScan => {
            let sweep = spec.sweep.unwrap_or(Sweep {
                param: SweepParam::PsiA,
                start: 0.0,
                stop: TAU,
                steps: 16,
            });
            emit(out, &local_scan(cfg, &sweep)?, stdout)?;
        }
        Command::Chsh => {
            let (csv, summary) = chsh_report(cfg, spec.chsh_angles)?;
            match out {
                Some(p) => write_atomic(p, &csv)?,
                None => stdout.write_all(&csv)?,
            }
            writeln!(stdout, "{summary}")?;
        }
        Command::Algebra => {
            emit(out, algebra_text(cfg, &spec.pairs)?.as_bytes(), stdout)?;
        }
        Command::RunParty => {
            let role = spec
                .role
                .ok_or_else(|| Error::invalid("role", "(missing)", "alice|bob"))?;
            let sink = match (&spec.connect, out) {
                (Some(addr), _) => Endpoint::Tcp(addr.clone()),
                (None, Some(p)) => Endpoint::File(p.to_path_buf()),
                (None, None) => {
                    return Err(Error::invalid("sink", "(missing)", "--connect HOST:PORT or --out PATH"))
                }
            };
            let s = run_party_to(role, cfg, &sink)?;
            writeln!(stdout, "{} emitted {} bins", s.party, s.bins_emitted)?;
        }
        Command::RunCorrelator => {
            let sources: Vec<Endpoint> = match &spec.listen {
                Some(addr) => vec![Endpoint::Tcp(addr.clone())],
                None => spec.inputs.iter().cloned().map(Endpoint::File).collect(),
            };
            let res = run_correlator_from(&sources, &spec.pairs, cfg)?;
            emit(out, &res.csv, stdout)?;
        }
        Command::Verify => {
            let mut failed = 0;
            for outcome in acceptance::run_all() {
                writeln!(stdout, "{outcome}")?;
                failed += usize::from(!outcome.passed);
            }
            writeln!(
                stdout,
                "{} of {} criteria passed",
                acceptance::CRITERIA.len() - failed,
                acceptance::CRITERIA.len()
            )?;
            return Ok(i32::from(failed > 0));
        }
    }
    Ok(0)
}

#[derive(Debug, Parser)]
#[command(name = "polcor", version, about = "Polarization-basis coherence correlation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Simulate and correlate; writes the correlation CSV.
    Simulate,
    /// Local mean intensities across a sweep (default psi_a:0:2pi:16).
    LocalScan,
    /// Joint correlations across a sweep (default xi:0:pi:33).
    FringeScan,
    /// CHSH S from closed forms and Monte Carlo.
    Chsh,
    /// Print the product-basis expansion and reduction.
    Algebra,
    /// Stream one party's samples to a correlator or file.
    RunParty,
    /// Merge two party streams and correlate them.
    RunCorrelator,
    /// Run the reproduction checks; nonzero exit on failure.
    Verify,
}

#[derive(Debug, Args, Default)]
pub struct Opts {
    /// key=value config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub bins: Option<u64>,
    /// Angles accept numbers or multiples of pi, e.g. `pi/8`.
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    pub xi: Option<String>,
    #[arg(long = "psi-a", global = true, value_name = "RAD", allow_hyphen_values = true)]
    pub psi_a: Option<String>,
    #[arg(long = "psi-b", global = true, value_name = "RAD", allow_hyphen_values = true)]
    pub psi_b: Option<String>,
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    pub eta: Option<String>,
    #[arg(long, global = true, value_name = "F")]
    pub duty: Option<String>,
    #[arg(long, global = true)]
    pub i0: Option<String>,
    /// separated | coherent
    #[arg(long = "overlap-mode", global = true)]
    pub overlap_mode: Option<String>,
    /// Detector pair (repeatable); default all four, AB for `algebra`.
    #[arg(long, global = true, value_name = "AB|CD|AD|BC")]
    pub pair: Vec<String>,
    #[arg(long, global = true, value_name = "NAME:START:STOP:STEPS", allow_hyphen_values = true)]
    pub sweep: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "HOST:PORT")]
    pub listen: Option<String>,
    #[arg(long, global = true, value_name = "HOST:PORT")]
    pub connect: Option<String>,
    #[arg(long, global = true, value_name = "alice|bob")]
    pub role: Option<String>,
    /// Party stream file for run-correlator (give two).
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Vec<PathBuf>,
    /// CHSH settings a,a',b,b'.
    #[arg(long = "chsh-angles", global = true, value_name = "A,A',B,B'", allow_hyphen_values = true)]
    pub chsh_angles: Option<String>,
}

fn parse_chsh_angles(s: &str) -> Result<ChshAngles> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| parse_angle("chsh-angles", x))
        .collect::<Result<_>>()?;
    let [a, a_prime, b, b_prime] = v[..] else {
        return Err(Error::invalid("chsh-angles", s, "four comma-separated angles"));
    };
    Ok(ChshAngles { a, a_prime, b, b_prime })
}

impl Cli {
    /// Resolves flags, config file and environment into a [`RunSpec`].
    pub fn into_spec(self, env_seed: Option<&str>) -> Result<RunSpec> {
        let o = self.opts;
        let mut ov = ConfigOverrides::default();
        let floats = [
            ("theta", &o.theta),
            ("xi", &o.xi),
            ("psi_a", &o.psi_a),
            ("psi_b", &o.psi_b),
            ("eta", &o.eta),
            ("duty", &o.duty),
            ("i0", &o.i0),
            ("overlap_mode", &o.overlap_mode),
        ];
        for (k, v) in floats {
            if let Some(v) = v {
                ov.set(k, v);
            }
        }
        if let Some(s) = o.seed {
            ov.set("seed", s);
        }
        if let Some(n) = o.bins {
            ov.set("n_bins", n);
        }
        let command = match self.command {
            CliCommand::Simulate => Command::Simulate,
            CliCommand::LocalScan => Command::LocalScan,
            CliCommand::FringeScan => Command::FringeScan,
            CliCommand::Chsh => Command::Chsh,
            CliCommand::Algebra => Command::Algebra,
            CliCommand::RunParty => Command::RunParty,
            CliCommand::RunCorrelator => Command::RunCorrelator,
            CliCommand::Verify => Command::Verify,
        };
        let mut pairs = o
            .pair
            .iter()
            .map(|p| p.parse())
            .collect::<Result<Vec<DetectorPair>>>()?;
        if pairs.is_empty() {
            pairs = if command == Command::Algebra {
                vec![DetectorPair::AB]
            } else {
                DetectorPair::ALL.to_vec()
            };
        }
        Ok(RunSpec {
            command,
            config: parse_config(o.config.as_deref(), &ov, env_seed)?,
            sweep: o.sweep.as_deref().map(str::parse).transpose()?,
            out: o.out,
            pairs,
            role: o.role.as_deref().map(str::parse).transpose()?,
            listen: o.listen,
            connect: o.connect,
            inputs: o.input,
            chsh_angles: o
                .chsh_angles
                .as_deref()
                .map(parse_chsh_angles)
                .transpose()?
                .unwrap_or(ChshAngles::CANONICAL),
        })
    }
}

/// Entry point for the binary: parse, run, map errors to exit codes.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let result = cli
        .into_spec(env_seed.as_deref())
        .and_then(|spec| run(&spec, &mut std::io::stdout().lock()));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("polcor: {e}");
            e.exit_code()
        }
    }
}
