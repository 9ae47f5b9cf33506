//! Library results against values computed outside it: a hand-rolled complex
//! tensor model with no shared code, and frozen values worked out by hand.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use polcor::algebra::{closed_form_r, expand_joint, reduce, DetectorPair, PartyFields};
use polcor::polarization::{Party, PhaseSet};
use polcor::harness::run_in_process;
use polcor::simulator::OpticalConfig;

type C = (f64, f64);

fn mul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn add(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}

fn cis(x: f64) -> C {
    (x.cos(), x.sin())
}

/// (h, v) amplitudes of a party's pulse after its MZI: D pulses are (s, s);
/// A pulses are (−s, s) times the party's accumulated phase.
fn field(anti: bool, eta_party: f64, i0: f64) -> [C; 2] {
    let s = (i0 / 2.0).sqrt();
    if anti {
        let p = cis(eta_party);
        [mul((-s, 0.0), p), mul((s, 0.0), p)]
    } else {
        [(s, 0.0), (s, 0.0)]
    }
}

/// Analyzer output amplitudes on each mode label. Port 2 is port 1 turned by
/// a quarter wave.
fn port(f: [C; 2], angle: f64, second: bool) -> [C; 2] {
    let a = if second { angle + FRAC_PI_2 } else { angle };
    [mul(f[0], (a.cos(), 0.0)), mul(f[1], (a.sin(), 0.0))]
}

/// Joint intensity summed over the same-pol and cross-pol classes, with D·D
/// and A·A amplitudes added coherently and D·A cross terms absent.
fn oracle_r(pair: DetectorPair, theta: f64, xi: f64, ph: PhaseSet, i0: f64) -> f64 {
    let (sa, sb) = match pair {
        DetectorPair::AB => (false, false),
        DetectorPair::CD => (true, true),
        DetectorPair::AD => (false, true),
        DetectorPair::BC => (true, false),
    };
    let mut same = (0.0, 0.0);
    let mut cross = (0.0, 0.0);
    for anti in [false, true] {
        let fa = port(field(anti, ph.eta + ph.psi_a, i0), theta, sa);
        let fb = port(field(anti, ph.eta + ph.psi_b, i0), xi, sb);
        for (i, &x) in fa.iter().enumerate() {
            for (j, &y) in fb.iter().enumerate() {
                let t = mul(x, y);
                if i == j {
                    same = add(same, t);
                } else {
                    cross = add(cross, t);
                }
            }
        }
    }
    same.0 * same.0 + same.1 * same.1 + cross.0 * cross.0 + cross.1 * cross.1
}

fn grid() -> Vec<(f64, f64, PhaseSet, f64)> {
    let mut out = Vec::new();
    for k in 0..7 {
        for m in 0..5 {
            let theta = -1.3 + 0.47 * k as f64;
            let xi = 0.2 - 0.61 * m as f64;
            let ph = PhaseSet::new(0.3 * k as f64, -0.7 * m as f64, 1.1 + 0.05 * (k * m) as f64);
            out.push((theta, xi, ph, 0.5 + 0.25 * m as f64));
        }
    }
    out
}

#[test]
fn tensor_oracle_matches_closed_form_and_reduction() {
    for (theta, xi, ph, i0) in grid() {
        let alpha = PartyFields::from_phases(Party::Alpha, &ph, i0).unwrap();
        let beta = PartyFields::from_phases(Party::Beta, &ph, i0).unwrap();
        for pair in DetectorPair::ALL {
            let want = oracle_r(pair, theta, xi, ph, i0);
            let closed = closed_form_r(pair, theta, xi, ph.eta_ab(), i0).unwrap();
            assert!((want - closed).abs() < 1e-12, "{pair} closed {closed} oracle {want}");
            let (ta, tb) = pair.effective_angles(theta, xi);
            let reduced = reduce(&expand_joint(&alpha, &beta, ta, tb).unwrap()).unwrap().value();
            assert!((want - reduced).abs() < 1e-12, "{pair} reduced {reduced} oracle {want}");
        }
    }
}

#[test]
fn frozen_hand_values() {
    // (pair, theta, xi, eta_ab, expected R at i0 = 1)
    let cases = [
        (DetectorPair::AB, FRAC_PI_8, 0.0, 0.0, 0.853_553_390_593_273_7),
        (DetectorPair::AB, 0.0, FRAC_PI_4, 0.0, 0.5),
        (DetectorPair::AB, FRAC_PI_4, FRAC_PI_4, PI, 1.0),
        (DetectorPair::AB, 0.0, 0.0, PI, 0.0),
        (DetectorPair::CD, 0.0, 0.0, 0.0, 1.0),
        (DetectorPair::AD, 0.0, 0.0, 0.0, 0.0),
        (DetectorPair::AD, 0.0, 0.0, PI, 1.0),
        (DetectorPair::BC, FRAC_PI_8, 0.0, PI, 0.853_553_390_593_273_7),
        (DetectorPair::AB, 0.0, 0.0, FRAC_PI_2, 0.5),
    ];
    for (pair, t, x, e, want) in cases {
        let got = closed_form_r(pair, t, x, e, 1.0).unwrap();
        assert!((got - want).abs() < 1e-15, "{pair} {t} {x} {e}: {got} vs {want}");
    }
    assert!((closed_form_r(DetectorPair::AB, 0.0, 0.0, 0.0, 2.0).unwrap() - 4.0).abs() < 1e-15);
}

#[test]
fn monte_carlo_matches_oracle() {
    for (k, (theta, xi, ph, i0)) in grid().into_iter().step_by(5).enumerate() {
        let cfg = OpticalConfig {
            theta,
            xi,
            psi_a: ph.psi_a,
            psi_b: ph.psi_b,
            eta: ph.eta,
            i0,
            n_bins: 4000,
            seed: k as u64,
            ..Default::default()
        };
        for r in run_in_process(&cfg, &DetectorPair::ALL).unwrap().results {
            let want = oracle_r(r.pair, theta, xi, ph, i0);
            assert!((r.estimate - want).abs() < 1e-9 * i0 * i0 + 4.0 * r.std_err);
        }
    }
}
