//! Statistics over detector sample streams: local intensity means, D/A
//! selective pairing, joint correlation estimates, Bell-state labels and the
//! CHSH combination.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, TAU};

use crate::algebra::{closed_form_r, expand_projected, reduce, DetectorPair, PairFamily, PartyFields};
use crate::error::{Error, Result};
use crate::polarization::{Party, SourceTag};
use crate::simulator::{simulate, DetectorSample, OpticalConfig, OverlapMode, PulseBin, SampleStream};

/// Classification tolerance for exact, closed-form phases.
pub const CLOSED_FORM_TOL: f64 = 1e-6;
/// Classification tolerance for estimated phases.
pub const ESTIMATED_TOL: f64 = 0.05;

/// Running mean and standard error, accumulated in input order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn std_err(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalStats {
    pub party: Party,
    pub n_bins: u64,
    pub port1_mean: f64,
    pub port1_std_err: f64,
    pub port2_mean: f64,
    pub port2_std_err: f64,
    /// Mean of port 1 + port 2; equals i0 bin by bin in separated mode.
    pub full_mean: f64,
    pub full_std_err: f64,
}

/// Per-port mean intensities of one party's stream.
pub fn local_stats(samples: &[DetectorSample], party: Party) -> Result<LocalStats> {
    let (mut p1, mut p2, mut full) = (Moments::default(), Moments::default(), Moments::default());
    for s in samples.iter().filter(|s| s.party == party) {
        p1.push(s.intensity_port1);
        p2.push(s.intensity_port2);
        full.push(s.full_intensity());
    }
    if p1.n == 0 {
        return Err(Error::EmptyStream);
    }
    Ok(LocalStats {
        party,
        n_bins: p1.n,
        port1_mean: p1.mean,
        port1_std_err: p1.std_err(),
        port2_mean: p2.mean,
        port2_std_err: p2.std_err(),
        full_mean: full.mean,
        full_std_err: full.std_err(),
    })
}

/// Selectively paired D and A bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<(u64, u64)>,
    pub n_bins: u64,
    pub discarded: u64,
}

impl Pairing {
    pub fn discarded_fraction(&self) -> f64 {
        self.discarded as f64 / self.n_bins as f64
    }
}

/// Greedy forward pairing: every D bin, in order, takes the nearest later A
/// bin not yet paired. Unpaired bins of either class are discarded.
pub fn pair_bins(schedule: &[PulseBin]) -> Result<Pairing> {
    if !schedule.iter().any(|b| b.tag == SourceTag::D) {
        return Err(Error::UnbalancedSchedule("D"));
    }
    if !schedule.iter().any(|b| b.tag == SourceTag::A) {
        return Err(Error::UnbalancedSchedule("A"));
    }
    // Processing A bins in order against a FIFO of waiting D bins is the same
    // matching: the oldest waiting D is the one whose nearest free A this is.
    let mut waiting = std::collections::VecDeque::new();
    let mut pairs = Vec::new();
    for b in schedule {
        match b.tag {
            SourceTag::D => waiting.push_back(b.index),
            SourceTag::A => {
                if let Some(d) = waiting.pop_front() {
                    pairs.push((d, b.index));
                }
            }
        }
    }
    let n_bins = schedule.len() as u64;
    Ok(Pairing {
        discarded: n_bins - 2 * pairs.len() as u64,
        pairs,
        n_bins,
    })
}

/// Estimated and closed-form joint correlation for one detector pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelation {
    pub pair: DetectorPair,
    pub estimate: f64,
    pub closed_form: f64,
    pub std_err: f64,
    pub n_pairs: u64,
    pub discarded_fraction: f64,
}

impl PairCorrelation {
    /// |estimate − closed form| within `k` standard errors. The floor absorbs
    /// f64 accumulation error when the per-pair values have no spread.
    pub fn consistent(&self, k: f64, i0: f64) -> bool {
        (self.estimate - self.closed_form).abs() <= k * self.std_err + ROUNDOFF_FLOOR * i0 * i0
    }
}

/// Absolute floor, in units of I_0², for comparisons against a zero-spread
/// estimator.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

fn sample_at(samples: &[DetectorSample], bin: u64, party: Party) -> Result<&DetectorSample> {
    let s = samples
        .get(bin as usize)
        .ok_or_else(|| Error::Framing(format!("{party} stream has no bin {bin}")))?;
    if s.bin != bin {
        return Err(Error::Framing(format!(
            "{party} stream is not dense: slot {bin} holds bin {}",
            s.bin
        )));
    }
    Ok(s)
}

/// Selective-measurement estimate of R for `pair`.
///
/// For each (D bin, A bin) pair the selected ports' fields form the DD and AA
/// factors of the joint amplitude; DD and AA add coherently through their
/// recorded phases, the result is reduced and squared. The estimate is the
/// mean over pairs.
pub fn estimate_r(
    pairing: &Pairing,
    stream: &SampleStream,
    pair: DetectorPair,
    cfg: &OpticalConfig,
) -> Result<PairCorrelation> {
    if stream.mode == OverlapMode::Coherent {
        return Err(Error::SelectiveMeasurementUndefined);
    }
    if pairing.pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let (port_a, port_b) = pair.ports();
    let mut acc = Moments::default();
    for &(d, a) in &pairing.pairs {
        let alpha = PartyFields::new(
            sample_at(&stream.alice, d, Party::Alpha)?.port_field(port_a),
            sample_at(&stream.alice, a, Party::Alpha)?.port_field(port_a),
        )?;
        let beta = PartyFields::new(
            sample_at(&stream.bob, d, Party::Beta)?.port_field(port_b),
            sample_at(&stream.bob, a, Party::Beta)?.port_field(port_b),
        )?;
        acc.push(reduce(&expand_projected(&alpha, &beta)?)?.value());
    }
    Ok(PairCorrelation {
        pair,
        estimate: acc.mean,
        closed_form: closed_form_r(pair, cfg.theta, cfg.xi, cfg.phases().eta_ab(), cfg.i0)?,
        std_err: acc.std_err(),
        n_pairs: acc.n,
        discarded_fraction: pairing.discarded_fraction(),
    })
}

/// Pairs the stream's schedule and estimates every requested pair.
pub fn correlate(
    stream: &SampleStream,
    pairs: &[DetectorPair],
    cfg: &OpticalConfig,
) -> Result<Vec<PairCorrelation>> {
    if stream.mode == OverlapMode::Coherent {
        return Err(Error::SelectiveMeasurementUndefined);
    }
    let pairing = pair_bins(&stream.schedule())?;
    pairs
        .iter()
        .map(|&p| estimate_r(&pairing, stream, p, cfg))
        .collect()
}

/// Four-rate normalized correlation (R_AB + R_CD − R_AD − R_BC) / Σ.
pub fn correlation_e(r_ab: f64, r_cd: f64, r_ad: f64, r_bc: f64) -> Result<f64> {
    let total = r_ab + r_cd + r_ad + r_bc;
    if total.is_nan() || total.abs() <= f64::EPSILON {
        return Err(Error::ZeroDenominator);
    }
    Ok((r_ab + r_cd - r_ad - r_bc) / total)
}

/// E from a full set of estimates. Picks each pair out of `results` by label.
pub fn correlation_e_from(results: &[PairCorrelation], estimated: bool) -> Result<f64> {
    let get = |p: DetectorPair| {
        results
            .iter()
            .find(|r| r.pair == p)
            .map(|r| if estimated { r.estimate } else { r.closed_form })
            .ok_or_else(|| Error::MalformedTerms(format!("missing pair {p} for correlation")))
    };
    correlation_e(
        get(DetectorPair::AB)?,
        get(DetectorPair::CD)?,
        get(DetectorPair::AD)?,
        get(DetectorPair::BC)?,
    )
}

/// Analyzer settings (a, a′, b, b′).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    /// (0, π/4, π/8, 3π/8): maximal violation for E = cos2(θ−ξ).
    pub const CANONICAL: ChshAngles = ChshAngles {
        a: 0.0,
        a_prime: FRAC_PI_4,
        b: FRAC_PI_8,
        b_prime: 3.0 * FRAC_PI_8,
    };

    /// The four (Alice, Bob) settings in S order: (a,b), (a,b′), (a′,b), (a′,b′).
    pub fn settings(&self) -> [(f64, f64); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChshMode {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshResult {
    pub angles: ChshAngles,
    pub mode: ChshMode,
    /// E at the four settings, in `ChshAngles::settings` order.
    pub correlations: [f64; 4],
    /// Closed-form E at the same settings.
    pub closed_correlations: [f64; 4],
    pub s_value: f64,
    pub s_closed: f64,
}

fn s_of(e: &[f64; 4]) -> f64 {
    e[0] - e[1] + e[2] + e[3]
}

/// S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′) with η_αβ fixed by `base`.
///
/// In Monte Carlo mode each setting is a full simulation of `base` with the
/// analyzer angles replaced.
pub fn chsh(base: &OpticalConfig, angles: ChshAngles, mode: ChshMode) -> Result<ChshResult> {
    base.validate()?;
    let mut correlations = [0.0; 4];
    let mut closed = [0.0; 4];
    for (k, (theta, xi)) in angles.settings().into_iter().enumerate() {
        let cfg = OpticalConfig {
            theta,
            xi,
            ..base.clone()
        };
        let eta_ab = cfg.phases().eta_ab();
        let cf = |p| closed_form_r(p, theta, xi, eta_ab, cfg.i0);
        closed[k] = correlation_e(
            cf(DetectorPair::AB)?,
            cf(DetectorPair::CD)?,
            cf(DetectorPair::AD)?,
            cf(DetectorPair::BC)?,
        )?;
        correlations[k] = match mode {
            ChshMode::ClosedForm => closed[k],
            ChshMode::MonteCarlo => {
                let stream = simulate(&cfg)?;
                correlation_e_from(&correlate(&stream, &DetectorPair::ALL, &cfg)?, true)?
            }
        };
    }
    Ok(ChshResult {
        angles,
        mode,
        s_value: s_of(&correlations),
        s_closed: s_of(&closed),
        correlations,
        closed_correlations: closed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PhiPlus,
    PsiPlus,
    PsiMinus,
    PhiMinus,
}

impl BellLabel {
    pub fn symbol(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
            BellLabel::PhiMinus => "phi-",
        }
    }
}

/// Labels the fringe form selected by η_αβ (mod 2π, near 0 or π) and the
/// detector-pair family.
pub fn classify_bell_state(eta_ab: f64, family: PairFamily, tol: f64) -> Result<BellLabel> {
    if !eta_ab.is_finite() {
        return Err(Error::NonFinite("eta_ab"));
    }
    let r = eta_ab.rem_euclid(TAU);
    let even = r.min(TAU - r) <= tol;
    let odd = (r - PI).abs() <= tol;
    Ok(match (family, even, odd) {
        (PairFamily::SamePort, true, _) => BellLabel::PhiPlus,
        (PairFamily::SamePort, _, true) => BellLabel::PsiPlus,
        (PairFamily::CrossPort, true, _) => BellLabel::PsiMinus,
        (PairFamily::CrossPort, _, true) => BellLabel::PhiMinus,
        _ => return Err(Error::Unclassified { eta_ab, tol }),
    })
}
