//! Reproduction checks shared by `polcor verify` and the `acceptance` test
//! target. Each check returns a [`CriterionOutcome`]; thresholds are the
//! constants below.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, SQRT_2, TAU};
use std::fmt;
use std::net::TcpListener;
use std::thread;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{closed_form_r, derive, intensity_expectation, DetectorPair};
use crate::error::Result;
use crate::harness::{run_in_process, run_party_to, serve_correlator, Endpoint};
use crate::measurement::{chsh, classify_bell_state, correlate, local_stats, BellLabel, ChshAngles, ChshMode, LocalStats, ROUNDOFF_FLOOR, CLOSED_FORM_TOL};
use crate::polarization::{analyzer_ports, make_party_field, Party, PhaseSet, SourceTag};
use crate::simulator::{simulate, simulate_party, OpticalConfig, OverlapMode};
use crate::wire::{encode_stream, StreamHeader};

/// Analytic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Estimate vs. closed form, in standard errors.
pub const ESTIMATE_SIGMAS: f64 = 4.0;
/// Local-mean flatness across a phase sweep, in standard errors.
pub const LOCAL_SIGMAS: f64 = 3.0;
pub const MC_BINS: u64 = 100_000;
pub const DISTRIBUTED_BINS: u64 = 10_000;
pub const CHSH_MC_RANGE: (f64, f64) = (2.78, 2.88);
pub const VISIBILITY_TOL: f64 = 0.02;
pub const SEPARATED_VISIBILITY_MAX: f64 = 0.01;
pub const ERASER_SWEEP_POINTS: usize = 32;
pub const BUDGET_ENDPOINT: Duration = Duration::from_secs(10);
pub const BUDGET_CHSH: Duration = Duration::from_secs(30);
pub const BUDGET_DISTRIBUTED: Duration = Duration::from_secs(20);

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] C{:<2} {:<40} {} ({:.2?})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed
        )
    }
}

/// Collects failures for one criterion.
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 8 {
            self.failures.push(msg());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self, id: u8, name: &'static str, start: Instant, budget: Option<Duration>) -> CriterionOutcome {
        let elapsed = start.elapsed();
        let mut failures = self.failures;
        if let Some(b) = budget {
            if elapsed > b {
                failures.push(format!("runtime {elapsed:.2?} exceeds {b:?}"));
            }
        }
        let passed = failures.is_empty();
        let detail = if passed {
            self.notes.join("; ")
        } else {
            let n = failures.len();
            let shown: Vec<_> = failures.into_iter().filter(|s| !s.is_empty()).take(4).collect();
            format!("{n} failure(s): {}", shown.join(" | "))
        };
        CriterionOutcome {
            id,
            name,
            passed,
            detail,
            elapsed,
        }
    }

    fn from_error(id: u8, name: &'static str, start: Instant, e: crate::error::Error) -> CriterionOutcome {
        CriterionOutcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
            elapsed: start.elapsed(),
        }
    }
}

fn run(id: u8, name: &'static str, budget: Option<Duration>, body: impl FnOnce(&mut Check) -> Result<()>) -> CriterionOutcome {
    let start = Instant::now();
    let mut check = Check::new();
    match body(&mut check) {
        Ok(()) => check.finish(id, name, start, budget),
        Err(e) => Check::from_error(id, name, start, e),
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * crate::simulator::unit_f64(rng)
}

fn base(seed: u64) -> OpticalConfig {
    OpticalConfig {
        n_bins: MC_BINS,
        duty: 0.5,
        seed,
        ..Default::default()
    }
}

/// Same-port fringe at even η_αβ: R_AB = I_0²cos²(θ−ξ).
pub fn even_phase_fringe() -> CriterionOutcome {
    run(1, "even-phase AB fringe cos^2(theta-xi)", Some(BUDGET_ENDPOINT), |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
        let mut worst = 0.0f64;
        for k in 0..100 {
            let theta = uniform(&mut rng, -PI, PI);
            let xi = uniform(&mut rng, -PI, PI);
            let expect = (theta - xi).cos().powi(2);
            let cf = closed_form_r(DetectorPair::AB, theta, xi, 0.0, 1.0)?;
            c.expect((cf - expect).abs() <= EXACT_TOL, || {
                format!("closed form {cf} vs {expect} at ({theta}, {xi})")
            });
            let cfg = OpticalConfig {
                theta,
                xi,
                ..base(1000 + k)
            };
            let r = correlate(&simulate(&cfg)?, &[DetectorPair::AB], &cfg)?[0];
            worst = worst.max((r.estimate - r.closed_form).abs());
            c.expect(r.consistent(ESTIMATE_SIGMAS, 1.0), || {
                format!("MC {} vs {} (se {}) at ({theta}, {xi})", r.estimate, r.closed_form, r.std_err)
            });
        }
        c.note(format!("100 configs, max |MC - closed| = {worst:.2e}"));
        Ok(())
    })
}

/// Odd-π and cross-port fringe forms.
pub fn odd_phase_and_cross_port_fringes() -> CriterionOutcome {
    run(2, "odd-pi and cross-port fringe forms", None, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
        for k in 0..100 {
            let theta = uniform(&mut rng, -PI, PI);
            let xi = uniform(&mut rng, -PI, PI);
            let (sm, sp) = ((theta - xi).sin().powi(2), (theta + xi).sin().powi(2));
            let cp = (theta + xi).cos().powi(2);
            let cases = [
                (DetectorPair::AB, PI, sp),
                (DetectorPair::CD, PI, sp),
                (DetectorPair::AD, 0.0, sm),
                (DetectorPair::BC, 0.0, sm),
                (DetectorPair::AD, PI, cp),
                (DetectorPair::BC, PI, cp),
            ];
            for (pair, eta_ab, expect) in cases {
                let cf = closed_form_r(pair, theta, xi, eta_ab, 1.0)?;
                c.expect((cf - expect).abs() <= EXACT_TOL, || {
                    format!("{pair} at eta_ab={eta_ab}: {cf} vs {expect}")
                });
            }
            if k < 20 {
                for eta in [0.0, FRAC_PI_2] {
                    let cfg = OpticalConfig {
                        theta,
                        xi,
                        eta,
                        ..base(2000 + k)
                    };
                    for r in correlate(&simulate(&cfg)?, &DetectorPair::ALL, &cfg)? {
                        c.expect(r.consistent(ESTIMATE_SIGMAS, 1.0), || {
                            format!("MC {} {} vs {}", r.pair, r.estimate, r.closed_form)
                        });
                    }
                }
            }
        }
        c.note("100 closed-form configs x 6 forms, 20 MC configs x 2 phases x 4 pairs");
        Ok(())
    })
}

fn expected_port1_mean(party: Party, angle: f64, phases: &PhaseSet, i0: f64, duty: f64) -> Result<f64> {
    let port1 = |tag| -> Result<f64> {
        let f = make_party_field(party, tag, phases, i0)?;
        Ok(analyzer_ports(angle, &f).0.intensity())
    };
    Ok(duty * port1(SourceTag::A)? + (1.0 - duty) * port1(SourceTag::D)?)
}

/// Local randomness: per-bin full intensity is I_0 and port means do not move
/// under any local or EOM phase.
pub fn local_randomness() -> CriterionOutcome {
    run(3, "local randomness under phase sweeps", None, |c| {
        let theta = 0.61;
        let xi = -1.07;
        let fixed = OpticalConfig {
            theta,
            xi,
            psi_a: 0.4,
            psi_b: 1.9,
            eta: 0.25,
            ..base(3000)
        };
        for key in ["psi_a", "psi_b", "eta"] {
            let mut reference: Option<(LocalStats, LocalStats)> = None;
            let mut expected_ref: Option<[f64; 2]> = None;
            for k in 0..16 {
                let v = TAU * k as f64 / 16.0;
                let mut cfg = fixed.clone();
                match key {
                    "psi_a" => cfg.psi_a = v,
                    "psi_b" => cfg.psi_b = v,
                    _ => cfg.eta = v,
                }
                let phases = cfg.phases();
                let expected = [
                    expected_port1_mean(Party::Alpha, theta, &phases, cfg.i0, cfg.duty)?,
                    expected_port1_mean(Party::Beta, xi, &phases, cfg.i0, cfg.duty)?,
                ];
                for party in [Party::Alpha, Party::Beta] {
                    let angle = cfg.analyzer_angle(party);
                    let ie = intensity_expectation(party, angle, &phases, cfg.i0)?;
                    c.expect((ie - cfg.i0).abs() <= EXACT_TOL, || format!("{key}={v}: I = {ie}"));
                }
                let er = *expected_ref.get_or_insert(expected);
                c.expect(
                    (expected[0] - er[0]).abs() <= EXACT_TOL && (expected[1] - er[1]).abs() <= EXACT_TOL,
                    || format!("{key}={v}: expected port means moved"),
                );

                let s = simulate(&cfg)?;
                for x in s.alice.iter().chain(&s.bob) {
                    if (x.full_intensity() - cfg.i0).abs() > EXACT_TOL {
                        c.expect(false, || format!("bin {} full intensity {}", x.bin, x.full_intensity()));
                        break;
                    }
                }
                let stats = (local_stats(&s.alice, Party::Alpha)?, local_stats(&s.bob, Party::Beta)?);
                let (ra, rb) = *reference.get_or_insert(stats);
                for (now, r0) in [(stats.0, ra), (stats.1, rb)] {
                    for (m, m0, se, se0) in [
                        (now.port1_mean, r0.port1_mean, now.port1_std_err, r0.port1_std_err),
                        (now.port2_mean, r0.port2_mean, now.port2_std_err, r0.port2_std_err),
                    ] {
                        let tol = LOCAL_SIGMAS * (se * se + se0 * se0).sqrt() + ROUNDOFF_FLOOR;
                        c.expect((m - m0).abs() <= tol, || {
                            format!("{key}={v}: {} port mean {m} vs {m0}", now.party)
                        });
                    }
                }
            }
        }
        c.note("psi_a, psi_b, eta: 16 points each, both parties, n_bins=1e5");
        Ok(())
    })
}

/// R_AB + R_AD = R_CD + R_BC = I_0².
pub fn completeness() -> CriterionOutcome {
    run(4, "completeness R_AB+R_AD = R_CD+R_BC = I0^2", None, |c| {
        let n = 20;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let theta = PI * i as f64 / n as f64;
                    let xi = PI * j as f64 / n as f64;
                    let eta_ab = TAU * k as f64 / n as f64;
                    let r = |p| closed_form_r(p, theta, xi, eta_ab, 1.0);
                    let s1 = r(DetectorPair::AB)? + r(DetectorPair::AD)?;
                    let s2 = r(DetectorPair::CD)? + r(DetectorPair::BC)?;
                    c.expect((s1 - 1.0).abs() <= EXACT_TOL && (s2 - 1.0).abs() <= EXACT_TOL, || {
                        format!("grid ({theta}, {xi}, {eta_ab}): {s1}, {s2}")
                    });
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
        for k in 0..10 {
            let i0 = uniform(&mut rng, 0.5, 2.0);
            let cfg = OpticalConfig {
                theta: uniform(&mut rng, -PI, PI),
                xi: uniform(&mut rng, -PI, PI),
                psi_a: uniform(&mut rng, -PI, PI),
                psi_b: uniform(&mut rng, -PI, PI),
                eta: uniform(&mut rng, -PI, PI),
                i0,
                ..base(4000 + k)
            };
            let res = correlate(&simulate(&cfg)?, &DetectorPair::ALL, &cfg)?;
            for (x, y) in [(0, 2), (1, 3)] {
                let (a, b) = (res[x], res[y]);
                let se = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
                let sum = a.estimate + b.estimate;
                c.expect((sum - i0 * i0).abs() <= ESTIMATE_SIGMAS * se + ROUNDOFF_FLOOR * i0 * i0, || {
                    format!("MC {}+{} = {sum} vs {}", a.pair, b.pair, i0 * i0)
                });
            }
        }
        c.note("20x20x20 closed-form grid, 10 MC configs");
        Ok(())
    })
}

/// Reduced class coefficients against direct evaluation.
pub fn symbolic_fidelity() -> CriterionOutcome {
    run(5, "expansion + reduction class coefficients", None, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
        for _ in 0..1000 {
            let theta = uniform(&mut rng, -PI, PI);
            let xi = uniform(&mut rng, -PI, PI);
            let phases = PhaseSet::new(
                uniform(&mut rng, -PI, PI),
                uniform(&mut rng, -PI, PI),
                uniform(&mut rng, -PI, PI),
            );
            let i0 = uniform(&mut rng, 0.2, 3.0);
            let d = derive(DetectorPair::AB, theta, xi, &phases, i0)?;
            // Direct evaluation: (i0/2)·cos(θ−ξ)(1 + e^{iη_αβ}) and
            // (i0/2)·sin(θ+ξ)(1 − e^{iη_αβ}).
            let ph = Complex64::new(phases.eta_ab().cos(), phases.eta_ab().sin());
            let one = Complex64::new(1.0, 0.0);
            let same = (one + ph) * (0.5 * i0 * (theta - xi).cos());
            let cross = (one - ph) * (0.5 * i0 * (theta + xi).sin());
            let err = (d.reduced.same_pol_coef - same).norm().max((d.reduced.cross_pol_coef - cross).norm());
            c.expect(err <= EXACT_TOL * i0, || {
                format!("({theta}, {xi}, eta_ab={}): error {err:e}", phases.eta_ab())
            });
            c.expect((d.reduced.value() - d.closed_form).abs() <= EXACT_TOL * i0 * i0, || {
                format!("R {} vs closed {}", d.reduced.value(), d.closed_form)
            });
        }
        c.note("1000 random points");
        Ok(())
    })
}

/// CHSH at the canonical angles.
pub fn chsh_violation() -> CriterionOutcome {
    run(6, "CHSH S at (0, pi/4, pi/8, 3pi/8)", Some(BUDGET_CHSH), |c| {
        let angles = ChshAngles::CANONICAL;
        let closed = chsh(&base(6000), angles, ChshMode::ClosedForm)?;
        c.expect((closed.s_value - 2.0 * SQRT_2).abs() <= EXACT_TOL, || {
            format!("closed-form S = {}", closed.s_value)
        });
        let mc = chsh(&base(6000), angles, ChshMode::MonteCarlo)?;
        let (lo, hi) = CHSH_MC_RANGE;
        c.expect(mc.s_value >= lo && mc.s_value <= hi, || format!("MC S = {}", mc.s_value));
        c.note(format!("S closed {:.12}, MC {:.6}", closed.s_value, mc.s_value));
        Ok(())
    })
}

/// Least-squares fit of I(φ) = a + b·cosφ + c·sinφ on a uniform full-period
/// grid; returns √(b² + c²)/a.
pub fn fitted_visibility(phases: &[f64], values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let a = values.iter().sum::<f64>() / n;
    let b = 2.0 / n * phases.iter().zip(values).map(|(p, v)| v * p.cos()).sum::<f64>();
    let c = 2.0 / n * phases.iter().zip(values).map(|(p, v)| v * p.sin()).sum::<f64>();
    (b * b + c * c).sqrt() / a
}

/// Port-1 visibility of Alice's mean intensity as η_party sweeps a period.
pub fn eraser_visibility(theta: f64, mode: OverlapMode, n_bins: u64) -> Result<f64> {
    let phases: Vec<f64> = (0..ERASER_SWEEP_POINTS)
        .map(|k| TAU * k as f64 / ERASER_SWEEP_POINTS as f64)
        .collect();
    let mut means = Vec::with_capacity(phases.len());
    for &eta in &phases {
        let cfg = OpticalConfig {
            theta,
            eta,
            n_bins,
            overlap_mode: mode,
            seed: 7000,
            ..Default::default()
        };
        means.push(local_stats(&simulate_party(&cfg, Party::Alpha)?, Party::Alpha)?.port1_mean);
    }
    Ok(fitted_visibility(&phases, &means))
}

/// Coherent overlap restores a |cos2θ| fringe; temporal separation erases it.
pub fn eraser_contrast() -> CriterionOutcome {
    run(7, "eraser contrast coherent vs separated", None, |c| {
        let mut notes = Vec::new();
        for theta in [0.0, FRAC_PI_8, FRAC_PI_4] {
            let expect = (2.0 * theta).cos().abs();
            let v = eraser_visibility(theta, OverlapMode::Coherent, MC_BINS)?;
            c.expect((v - expect).abs() <= VISIBILITY_TOL, || {
                format!("coherent theta={theta}: V={v} vs {expect}")
            });
            let s = eraser_visibility(theta, OverlapMode::Separated, MC_BINS)?;
            c.expect(s < SEPARATED_VISIBILITY_MAX, || format!("separated theta={theta}: V={s}"));
            notes.push(format!("theta={theta:.4}: V_coh={v:.4} V_sep={s:.1e}"));
        }
        c.note(notes.join(", "));
        Ok(())
    })
}

fn fringe_form(label: BellLabel, theta: f64, xi: f64) -> f64 {
    match label {
        BellLabel::PhiPlus => (theta - xi).cos().powi(2),
        BellLabel::PsiPlus => (theta + xi).sin().powi(2),
        BellLabel::PsiMinus => (theta - xi).sin().powi(2),
        BellLabel::PhiMinus => (theta + xi).cos().powi(2),
    }
}

/// The eight (η_αβ, pair) cases carry the expected labels, and each label's
/// fringe form matches the closed form.
pub fn bell_classification() -> CriterionOutcome {
    run(8, "Bell-state labels for 8 cases", None, |c| {
        let table = [
            (0.0, DetectorPair::AB, BellLabel::PhiPlus),
            (0.0, DetectorPair::CD, BellLabel::PhiPlus),
            (PI, DetectorPair::AB, BellLabel::PsiPlus),
            (PI, DetectorPair::CD, BellLabel::PsiPlus),
            (0.0, DetectorPair::AD, BellLabel::PsiMinus),
            (0.0, DetectorPair::BC, BellLabel::PsiMinus),
            (PI, DetectorPair::AD, BellLabel::PhiMinus),
            (PI, DetectorPair::BC, BellLabel::PhiMinus),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
        for (eta_ab, pair, want) in table {
            let got = classify_bell_state(eta_ab, pair.family(), CLOSED_FORM_TOL)?;
            c.expect(got == want, || format!("{pair} at {eta_ab}: {got:?} != {want:?}"));
            for _ in 0..50 {
                let theta = uniform(&mut rng, -PI, PI);
                let xi = uniform(&mut rng, -PI, PI);
                let cf = closed_form_r(pair, theta, xi, eta_ab, 1.0)?;
                let form = fringe_form(got, theta, xi);
                c.expect((cf - form).abs() <= EXACT_TOL, || {
                    format!("{pair}/{}: {cf} vs {form}", got.symbol())
                });
            }
        }
        c.note("8/8 labels, fringe forms verified at 50 angles each");
        Ok(())
    })
}

/// Loopback Alice/Bob/correlator produce the in-process CSV bytes.
pub fn distributed_equivalence() -> CriterionOutcome {
    run(9, "loopback run matches in-process CSV", Some(BUDGET_DISTRIBUTED), |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
        for k in 0..5 {
            let cfg = OpticalConfig {
                theta: uniform(&mut rng, -PI, PI),
                xi: uniform(&mut rng, -PI, PI),
                psi_a: uniform(&mut rng, -PI, PI),
                psi_b: uniform(&mut rng, -PI, PI),
                eta: uniform(&mut rng, -PI, PI),
                n_bins: DISTRIBUTED_BINS,
                seed: 9000 + k,
                ..Default::default()
            };
            let listener = TcpListener::bind("127.0.0.1:0")?;
            let addr = listener.local_addr()?.to_string();
            let parties: Vec<_> = [Party::Alpha, Party::Beta]
                .into_iter()
                .map(|role| {
                    let (cfg, addr) = (cfg.clone(), addr.clone());
                    thread::spawn(move || run_party_to(role, &cfg, &Endpoint::Tcp(addr)))
                })
                .collect();
            let networked = serve_correlator(&listener, &DetectorPair::ALL, &cfg)?;
            for p in parties {
                match p.join() {
                    Ok(r) => {
                        let s = r?;
                        c.expect(s.bins_emitted == DISTRIBUTED_BINS, || {
                            format!("{} emitted {}", s.party, s.bins_emitted)
                        });
                    }
                    Err(_) => c.expect(false, || "party thread panicked".into()),
                }
            }
            let local = run_in_process(&cfg, &DetectorPair::ALL)?;
            c.expect(networked.csv == local.csv, || format!("config {k}: CSV bytes differ"));
        }
        c.note("5 configs x 1e4 bins over 127.0.0.1");
        Ok(())
    })
}

/// Identical configs give identical sample streams and CSVs.
pub fn determinism() -> CriterionOutcome {
    run(10, "byte-identical reruns", None, |c| {
        let cfg = OpticalConfig {
            theta: 0.3,
            xi: 1.1,
            psi_a: -0.2,
            eta: 0.9,
            ..base(10_000)
        };
        let streams = || -> Result<Vec<u8>> {
            let s = simulate(&cfg)?;
            let digest = cfg.shared_digest();
            let mut out = encode_stream(&StreamHeader::new(Party::Alpha, digest), &s.alice);
            out.extend(encode_stream(&StreamHeader::new(Party::Beta, digest), &s.bob));
            Ok(out)
        };
        c.expect(streams()? == streams()?, || "sample streams differ".into());
        let csv1 = run_in_process(&cfg, &DetectorPair::ALL)?.csv;
        let csv2 = run_in_process(&cfg, &DetectorPair::ALL)?.csv;
        c.expect(csv1 == csv2, || "CSVs differ".into());
        c.note(format!("{} CSV bytes, 2 x {} records", csv1.len(), cfg.n_bins));
        Ok(())
    })
}

pub type CriterionFn = fn() -> CriterionOutcome;

pub const CRITERIA: [CriterionFn; 10] = [
    even_phase_fringe,
    odd_phase_and_cross_port_fringes,
    local_randomness,
    completeness,
    symbolic_fidelity,
    chsh_violation,
    eraser_contrast,
    bell_classification,
    distributed_equivalence,
    determinism,
];

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|f| f()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visibility_fit_recovers_known_fringe() {
        let phases: Vec<f64> = (0..32).map(|k| TAU * k as f64 / 32.0).collect();
        let values: Vec<f64> = phases.iter().map(|p| 2.0 - 0.6 * (p + 0.3).cos()).collect();
        assert!((fitted_visibility(&phases, &values) - 0.3).abs() < 1e-12);
        let flat = vec![1.0; 32];
        assert!(fitted_visibility(&phases, &flat) < 1e-15);
    }
}
