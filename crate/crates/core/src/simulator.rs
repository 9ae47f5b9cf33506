//! Seeded time-bin Monte Carlo of the optical train.
//!
//! Each time bin carries one EOM pulse class drawn i.i.d. from a ChaCha8
//! stream. Both parties see the same schedule (one source split by the 50/50
//! beam splitter); each party applies its own MZI phase and analyzer and
//! records the projected coefficients of both analyzer ports.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::polarization::{
    analyzer_ports, make_party_field, mode_intensity, Party, PhaseSet, SourceTag, TaggedModeField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OverlapMode {
    /// D and A pulses occupy disjoint time bins (the EOM-switched source).
    #[default]
    Separated,
    /// D and A fields overlap within every bin and interfere.
    Coherent,
}

impl OverlapMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OverlapMode::Separated => "separated",
            OverlapMode::Coherent => "coherent",
        }
    }
}

impl fmt::Display for OverlapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OverlapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "separated" => Ok(OverlapMode::Separated),
            "coherent" => Ok(OverlapMode::Coherent),
            _ => Err(Error::invalid("overlap_mode", s, "separated|coherent")),
        }
    }
}

/// Every experiment parameter. Angles and phases in radians, intensities in
/// units of I_0.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalConfig {
    /// Alice's analyzer projection angle.
    pub theta: f64,
    /// Bob's analyzer projection angle.
    pub xi: f64,
    pub psi_a: f64,
    pub psi_b: f64,
    /// Fixed phase imprinted by the EOM on A pulses.
    pub eta: f64,
    pub i0: f64,
    pub n_bins: u64,
    /// Probability that a bin carries an A pulse.
    pub duty: f64,
    pub seed: u64,
    pub overlap_mode: OverlapMode,
}

impl Default for OpticalConfig {
    fn default() -> Self {
        Self {
            theta: 0.0,
            xi: 0.0,
            psi_a: 0.0,
            psi_b: 0.0,
            eta: 0.0,
            i0: 1.0,
            n_bins: 100_000,
            duty: 0.5,
            seed: 1,
            overlap_mode: OverlapMode::Separated,
        }
    }
}

impl OpticalConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("theta", self.theta),
            ("xi", self.xi),
            ("psi_a", self.psi_a),
            ("psi_b", self.psi_b),
            ("eta", self.eta),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(key, v, "finite radians"));
            }
        }
        if !self.i0.is_finite() || self.i0 <= 0.0 {
            return Err(Error::invalid("i0", self.i0, "finite, > 0"));
        }
        if self.n_bins < 1 {
            return Err(Error::invalid("n_bins", self.n_bins, ">= 1"));
        }
        check_duty(self.duty)?;
        Ok(())
    }

    pub fn phases(&self) -> PhaseSet {
        PhaseSet::new(self.eta, self.psi_a, self.psi_b)
    }

    /// Analyzer angle of one party.
    pub fn analyzer_angle(&self, party: Party) -> f64 {
        match party {
            Party::Alpha => self.theta,
            Party::Beta => self.xi,
        }
    }

    /// SHA-256 over the fields both parties share (everything except the
    /// analyzer angles and MZI path phases), in a fixed text form with floats
    /// written as raw bit patterns.
    pub fn shared_digest(&self) -> [u8; 32] {
        let canonical = format!(
            "polcor-config-v1\neta={:016x}\ni0={:016x}\nn_bins={}\nduty={:016x}\nseed={}\noverlap_mode={}\n",
            self.eta.to_bits(),
            self.i0.to_bits(),
            self.n_bins,
            self.duty.to_bits(),
            self.seed,
            self.overlap_mode,
        );
        Sha256::digest(canonical.as_bytes()).into()
    }
}

fn check_duty(duty: f64) -> Result<()> {
    if duty > 0.0 && duty < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("duty", duty, "0 < duty < 1"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseBin {
    pub index: u64,
    pub tag: SourceTag,
}

/// Uniform draw in [0, 1) from the top 53 bits of one 64-bit output.
pub(crate) fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// EOM switching schedule: bin `k` is A with probability `duty`, otherwise D,
/// independently per bin. Uses ChaCha8 seeded through `seed_from_u64`, one
/// 64-bit draw per bin, so a seed yields the same schedule on every platform.
pub fn gen_schedule(n_bins: u64, duty: f64, seed: u64) -> Result<Vec<PulseBin>> {
    if n_bins < 1 {
        return Err(Error::invalid("n_bins", n_bins, ">= 1"));
    }
    check_duty(duty)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_bins)
        .map(|index| PulseBin {
            index,
            tag: if unit_f64(&mut rng) < duty {
                SourceTag::A
            } else {
                SourceTag::D
            },
        })
        .collect())
}

/// One bin's digitized output for one party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSample {
    pub bin: u64,
    pub party: Party,
    pub tag: SourceTag,
    pub port1_coef_h: Complex64,
    pub port1_coef_v: Complex64,
    pub port2_coef_h: Complex64,
    pub port2_coef_v: Complex64,
    pub intensity_port1: f64,
    pub intensity_port2: f64,
}

impl DetectorSample {
    /// Builds a sample, deriving both port intensities from the coefficients.
    pub fn from_ports(
        bin: u64,
        party: Party,
        tag: SourceTag,
        port1: (Complex64, Complex64),
        port2: (Complex64, Complex64),
    ) -> Self {
        Self {
            bin,
            party,
            tag,
            port1_coef_h: port1.0,
            port1_coef_v: port1.1,
            port2_coef_h: port2.0,
            port2_coef_v: port2.1,
            intensity_port1: mode_intensity(port1.0, port1.1),
            intensity_port2: mode_intensity(port2.0, port2.1),
        }
    }

    pub fn port_field(&self, port: crate::algebra::Port) -> TaggedModeField {
        let (coef_h, coef_v) = match port {
            crate::algebra::Port::One => (self.port1_coef_h, self.port1_coef_v),
            crate::algebra::Port::Two => (self.port2_coef_h, self.port2_coef_v),
        };
        TaggedModeField {
            party: self.party,
            tag: self.tag,
            coef_h,
            coef_v,
        }
    }

    pub fn full_intensity(&self) -> f64 {
        self.intensity_port1 + self.intensity_port2
    }
}

/// Propagates one bin through a single party's MZI and analyzer. A party only
/// needs its own angle and path phase from `cfg`.
pub fn propagate_party(bin: PulseBin, party: Party, cfg: &OpticalConfig) -> Result<DetectorSample> {
    let phases = cfg.phases();
    let field = match cfg.overlap_mode {
        OverlapMode::Separated => make_party_field(party, bin.tag, &phases, cfg.i0)?,
        OverlapMode::Coherent => {
            let d = make_party_field(party, SourceTag::D, &phases, cfg.i0)?;
            let a = make_party_field(party, SourceTag::A, &phases, cfg.i0)?;
            TaggedModeField {
                party,
                tag: bin.tag,
                coef_h: d.coef_h + a.coef_h,
                coef_v: d.coef_v + a.coef_v,
            }
        }
    };
    let (p1, p2) = analyzer_ports(cfg.analyzer_angle(party), &field);
    Ok(DetectorSample::from_ports(
        bin.index,
        party,
        bin.tag,
        (p1.coef_h, p1.coef_v),
        (p2.coef_h, p2.coef_v),
    ))
}

/// Alice's and Bob's samples for one bin.
pub fn propagate_bin(bin: PulseBin, cfg: &OpticalConfig) -> Result<(DetectorSample, DetectorSample)> {
    Ok((
        propagate_party(bin, Party::Alpha, cfg)?,
        propagate_party(bin, Party::Beta, cfg)?,
    ))
}

/// Port-1 intensity when the D and A fields overlap coherently within one
/// bin: i0·(1 − cos2θ·cos η_party).
pub fn coherent_bin_intensity(theta: f64, eta_party: f64, i0: f64) -> f64 {
    i0 * (1.0 - (2.0 * theta).cos() * eta_party.cos())
}

/// Both parties' sample streams from one run, in bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub mode: OverlapMode,
    pub alice: Vec<DetectorSample>,
    pub bob: Vec<DetectorSample>,
}

impl SampleStream {
    pub fn party(&self, party: Party) -> &[DetectorSample] {
        match party {
            Party::Alpha => &self.alice,
            Party::Beta => &self.bob,
        }
    }

    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    /// The shared pulse schedule, read back from Alice's tags.
    pub fn schedule(&self) -> Vec<PulseBin> {
        self.alice
            .iter()
            .map(|s| PulseBin {
                index: s.bin,
                tag: s.tag,
            })
            .collect()
    }
}

/// One party's full stream.
pub fn simulate_party(cfg: &OpticalConfig, party: Party) -> Result<Vec<DetectorSample>> {
    cfg.validate()?;
    gen_schedule(cfg.n_bins, cfg.duty, cfg.seed)?
        .into_iter()
        .map(|bin| propagate_party(bin, party, cfg))
        .collect()
}

/// Schedule generation and propagation for both parties.
pub fn simulate(cfg: &OpticalConfig) -> Result<SampleStream> {
    cfg.validate()?;
    let schedule = gen_schedule(cfg.n_bins, cfg.duty, cfg.seed)?;
    let mut alice = Vec::with_capacity(schedule.len());
    let mut bob = Vec::with_capacity(schedule.len());
    for bin in schedule {
        let (a, b) = propagate_bin(bin, cfg)?;
        alice.push(a);
        bob.push(b);
    }
    Ok(SampleStream {
        mode: cfg.overlap_mode,
        alice,
        bob,
    })
}
