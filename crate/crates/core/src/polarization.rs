//! Jones-vector arithmetic for the optical train and the per-party tagged
//! fields that leave each Mach-Zehnder interferometer.
//!
//! A [`TaggedModeField`] keeps its H and V coefficients on separate,
//! distinguishable mode labels. Its intensity is always the sum of the squared
//! magnitudes per label; the two labels are never added coherently.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// Two-component polarization state on the H/V axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub c_h: Complex64,
    pub c_v: Complex64,
}

impl JonesVector {
    pub fn new(c_h: Complex64, c_v: Complex64) -> Self {
        Self { c_h, c_v }
    }

    pub fn horizontal() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn vertical() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Diagonal polarization, (1, 1)/√2.
    pub fn diagonal() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(s, s)
    }

    /// Anti-diagonal polarization, (−1, 1)/√2.
    pub fn antidiagonal() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(-s, s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_h.norm_sqr() + self.c_v.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        finite(self.c_h) && finite(self.c_v)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.c_h * k, self.c_v * k)
    }
}

/// Half-wave plate with its fast axis at `phi` from H.
///
/// Maps (h, v) to (h·cos2φ + v·sin2φ, h·sin2φ − v·cos2φ).
pub fn apply_hwp(phi: f64, v: JonesVector) -> Result<JonesVector> {
    if !phi.is_finite() || !v.is_finite() {
        return Err(Error::NonFinite("half-wave plate input"));
    }
    let (s, c) = (2.0 * phi).sin_cos();
    Ok(JonesVector::new(
        v.c_h * c + v.c_v * s,
        v.c_h * s - v.c_v * c,
    ))
}

/// Polarizing beam splitter: projects onto its H (transmitted) and V
/// (reflected) output ports.
pub fn apply_pbs(v: JonesVector) -> Result<(Complex64, Complex64)> {
    if !v.is_finite() {
        return Err(Error::NonFinite("polarizing beam splitter input"));
    }
    Ok((v.c_h, v.c_v))
}

/// Electro-optic modulator at V_π: leaves D pulses alone and flips them to the
/// A class, imprinting the fixed EOM phase `eta`.
pub fn apply_eom(tag: SourceTag, eta: f64, v: JonesVector) -> Result<JonesVector> {
    if !eta.is_finite() || !v.is_finite() {
        return Err(Error::NonFinite("electro-optic modulator input"));
    }
    Ok(match tag {
        SourceTag::D => v,
        SourceTag::A => JonesVector::new(-v.c_h, v.c_v).scale(Complex64::cis(eta)),
    })
}

/// Non-polarizing 50/50 beam splitter: equal amplitude to both parties.
pub fn apply_bs(v: JonesVector) -> (JonesVector, JonesVector) {
    let k = Complex64::new(FRAC_1_SQRT_2, 0.0);
    (v.scale(k), v.scale(k))
}

/// Pulse class produced by the EOM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceTag {
    D,
    A,
}

impl SourceTag {
    pub fn as_byte(self) -> u8 {
        match self {
            SourceTag::D => 0,
            SourceTag::A => 1,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(SourceTag::D),
            1 => Ok(SourceTag::A),
            other => Err(Error::UnknownSourceTag(other)),
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceTag::D => "D",
            SourceTag::A => "A",
        })
    }
}

/// Alice (α) or Bob (β).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    Alpha,
    Beta,
}

impl Party {
    pub fn as_byte(self) -> u8 {
        match self {
            Party::Alpha => 0,
            Party::Beta => 1,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Party::Alpha),
            1 => Ok(Party::Beta),
            other => Err(Error::Framing(format!("unknown party byte {other}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Party::Alpha => "alice",
            Party::Beta => "bob",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alice" | "alpha" => Ok(Party::Alpha),
            "bob" | "beta" => Ok(Party::Beta),
            _ => Err(Error::invalid("role", s, "alice|bob")),
        }
    }
}

/// The EOM phase and the two local MZI path phases. Derived phases are always
/// recomputed from these three.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseSet {
    pub eta: f64,
    pub psi_a: f64,
    pub psi_b: f64,
}

impl PhaseSet {
    pub fn new(eta: f64, psi_a: f64, psi_b: f64) -> Self {
        Self { eta, psi_a, psi_b }
    }

    pub fn eta_alpha(&self) -> f64 {
        self.eta + self.psi_a
    }

    pub fn eta_beta(&self) -> f64 {
        self.eta + self.psi_b
    }

    pub fn eta_ab(&self) -> f64 {
        self.eta_alpha() + self.eta_beta()
    }

    pub fn eta_party(&self, party: Party) -> f64 {
        match party {
            Party::Alpha => self.eta_alpha(),
            Party::Beta => self.eta_beta(),
        }
    }
}

/// One party's field for one pulse class, as coefficients on the
/// distinguishable H and V mode labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedModeField {
    pub party: Party,
    pub tag: SourceTag,
    pub coef_h: Complex64,
    pub coef_v: Complex64,
}

impl TaggedModeField {
    pub fn intensity(&self) -> f64 {
        mode_intensity(self.coef_h, self.coef_v)
    }
}

/// Incoherent sum over the two mode labels.
pub fn mode_intensity(coef_h: Complex64, coef_v: Complex64) -> f64 {
    coef_h.norm_sqr() + coef_v.norm_sqr()
}

/// Field leaving a party's MZI for a pulse of class `tag`.
///
/// With s = √(i0/2): D pulses give (s, s); A pulses give (−s, s)·e^{iη_party}.
pub fn make_party_field(
    party: Party,
    tag: SourceTag,
    phases: &PhaseSet,
    i0: f64,
) -> Result<TaggedModeField> {
    if !i0.is_finite() || i0 <= 0.0 {
        return Err(Error::NonPositiveIntensity(i0));
    }
    let eta_party = phases.eta_party(party);
    if !eta_party.is_finite() {
        return Err(Error::NonFinite("phase set"));
    }
    let s = Complex64::new((i0 / 2.0).sqrt(), 0.0);
    let (coef_h, coef_v) = match tag {
        SourceTag::D => (s, s),
        SourceTag::A => {
            let ph = Complex64::cis(eta_party);
            (-s * ph, s * ph)
        }
    };
    Ok(TaggedModeField {
        party,
        tag,
        coef_h,
        coef_v,
    })
}

/// HWP + PBS analyzer set to projection angle `angle`.
///
/// Port 1 scales the labels by (cosθ, sinθ); port 2 is port 1 at θ + π/2,
/// i.e. (−sinθ, cosθ). Labels stay distinct, so the port intensities sum to
/// the input intensity.
pub fn analyzer_ports(angle: f64, f: &TaggedModeField) -> (TaggedModeField, TaggedModeField) {
    let (s, c) = angle.sin_cos();
    let port1 = TaggedModeField {
        coef_h: f.coef_h * c,
        coef_v: f.coef_v * s,
        ..*f
    };
    let port2 = TaggedModeField {
        coef_h: -f.coef_h * s,
        coef_v: f.coef_v * c,
        ..*f
    };
    (port1, port2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn hwp_at_22_5_degrees_gives_equal_magnitudes() {
        let out = apply_hwp(FRAC_PI_8, JonesVector::vertical()).unwrap();
        assert!(close(out.c_h, c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(out.c_v, c(-FRAC_1_SQRT_2, 0.0)));
        assert!((out.c_h.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((out.c_v.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn hwp_axis_cases() {
        let h = JonesVector::horizontal();
        let out = apply_hwp(0.0, h).unwrap();
        assert!(close(out.c_h, c(1.0, 0.0)) && close(out.c_v, c(0.0, 0.0)));
        let out = apply_hwp(FRAC_PI_4, h).unwrap();
        assert!(close(out.c_h, c(0.0, 0.0)) && close(out.c_v, c(1.0, 0.0)));
    }

    #[test]
    fn hwp_rejects_non_finite() {
        assert!(apply_hwp(f64::NAN, JonesVector::horizontal()).is_err());
        let bad = JonesVector::new(c(f64::INFINITY, 0.0), c(0.0, 0.0));
        assert!(apply_hwp(0.1, bad).is_err());
    }

    #[test]
    fn pbs_projects_onto_axes() {
        let (h, v) = apply_pbs(JonesVector::horizontal()).unwrap();
        assert_eq!((h, v), (c(1.0, 0.0), c(0.0, 0.0)));
        let (h, v) = apply_pbs(JonesVector::diagonal()).unwrap();
        assert!(close(h, c(FRAC_1_SQRT_2, 0.0)) && close(v, c(FRAC_1_SQRT_2, 0.0)));
        let (h, v) = apply_pbs(JonesVector::new(c(0.6, 0.0), c(0.0, 0.8))).unwrap();
        assert_eq!((h, v), (c(0.6, 0.0), c(0.0, 0.8)));
        assert!((h.norm_sqr() - 0.36).abs() < 1e-15);
        assert!((v.norm_sqr() - 0.64).abs() < 1e-15);
    }

    #[test]
    fn eom_maps_d_to_a_with_phase() {
        let d = JonesVector::diagonal();
        assert_eq!(apply_eom(SourceTag::D, 1.0, d).unwrap(), d);
        let a = apply_eom(SourceTag::A, 0.0, d).unwrap();
        let expect = JonesVector::antidiagonal();
        assert!(close(a.c_h, expect.c_h) && close(a.c_v, expect.c_v));
        let a = apply_eom(SourceTag::A, PI, d).unwrap();
        assert!(close(a.c_h, -expect.c_h) && close(a.c_v, -expect.c_v));
    }

    #[test]
    fn bs_splits_evenly() {
        let (x, y) = apply_bs(JonesVector::diagonal());
        assert!((x.norm_sqr() - 0.5).abs() < 1e-15);
        assert_eq!(x, y);
    }

    #[test]
    fn party_field_examples() {
        let p = PhaseSet::new(0.3, 1.1, -0.4);
        let d = make_party_field(Party::Alpha, SourceTag::D, &p, 1.0).unwrap();
        assert!(close(d.coef_h, c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(d.coef_v, c(FRAC_1_SQRT_2, 0.0)));
        assert!((d.intensity() - 1.0).abs() < 1e-12);

        let zero = PhaseSet::default();
        let a = make_party_field(Party::Alpha, SourceTag::A, &zero, 1.0).unwrap();
        assert!(close(a.coef_h, c(-FRAC_1_SQRT_2, 0.0)));
        assert!(close(a.coef_v, c(FRAC_1_SQRT_2, 0.0)));

        let pi_b = PhaseSet::new(0.0, 0.0, PI);
        let a = make_party_field(Party::Beta, SourceTag::A, &pi_b, 1.0).unwrap();
        assert!(close(a.coef_h, c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(a.coef_v, c(-FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn party_field_rejects_bad_intensity() {
        let p = PhaseSet::default();
        assert!(matches!(
            make_party_field(Party::Alpha, SourceTag::D, &p, 0.0),
            Err(Error::NonPositiveIntensity(_))
        ));
        assert!(make_party_field(Party::Alpha, SourceTag::D, &p, -1.0).is_err());
        assert!(make_party_field(Party::Alpha, SourceTag::D, &p, f64::NAN).is_err());
    }

    #[test]
    fn analyzer_examples() {
        let p = PhaseSet::default();
        let d = make_party_field(Party::Alpha, SourceTag::D, &p, 1.0).unwrap();
        let s = FRAC_1_SQRT_2;
        let (p1, p2) = analyzer_ports(0.0, &d);
        assert!(close(p1.coef_h, c(s, 0.0)) && close(p1.coef_v, c(0.0, 0.0)));
        assert!(close(p2.coef_h, c(0.0, 0.0)) && close(p2.coef_v, c(s, 0.0)));

        let eta = 0.77;
        let p = PhaseSet::new(eta, 0.0, 0.0);
        let a = make_party_field(Party::Alpha, SourceTag::A, &p, 1.0).unwrap();
        let (p1, _) = analyzer_ports(FRAC_PI_4, &a);
        let ph = Complex64::cis(eta);
        assert!(close(p1.coef_h, c(-0.5, 0.0) * ph));
        assert!(close(p1.coef_v, c(0.5, 0.0) * ph));
    }

    #[test]
    fn port_two_is_port_one_rotated_by_quarter_turn() {
        let p = PhaseSet::new(0.2, 0.9, 0.0);
        let a = make_party_field(Party::Alpha, SourceTag::A, &p, 1.7).unwrap();
        let (_, p2) = analyzer_ports(0.4, &a);
        let (q1, _) = analyzer_ports(0.4 + FRAC_PI_2, &a);
        assert!(close(p2.coef_h, q1.coef_h) && close(p2.coef_v, q1.coef_v));
    }

    fn arb_jones() -> impl Strategy<Value = JonesVector> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_map(|(a, b, x, y)| JonesVector::new(c(a, b), c(x, y)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn hwp_is_unitary(v in arb_jones(), phi in -10.0..10.0f64) {
            let out = apply_hwp(phi, v).unwrap();
            let n = v.norm_sqr();
            prop_assert!((out.norm_sqr() - n).abs() <= 1e-12 * n.max(1e-300));
        }

        #[test]
        fn analyzer_ports_are_complete(
            v in arb_jones(), angle in -10.0..10.0f64, a_tag in any::<bool>()
        ) {
            let f = TaggedModeField {
                party: Party::Beta,
                tag: if a_tag { SourceTag::A } else { SourceTag::D },
                coef_h: v.c_h,
                coef_v: v.c_v,
            };
            let (p1, p2) = analyzer_ports(angle, &f);
            let total = f.intensity();
            prop_assert!((p1.intensity() + p2.intensity() - total).abs() <= 1e-12 * total.max(1e-300));
        }

        #[test]
        fn a_field_is_phase_covariant(
            eta in -10.0..10.0f64, delta in -10.0..10.0f64, i0 in 0.01..10.0f64, beta in any::<bool>()
        ) {
            let party = if beta { Party::Beta } else { Party::Alpha };
            let base = make_party_field(party, SourceTag::A, &PhaseSet::new(eta, 0.3, -0.2), i0).unwrap();
            let shifted = make_party_field(party, SourceTag::A, &PhaseSet::new(eta + delta, 0.3, -0.2), i0).unwrap();
            let k = Complex64::cis(delta);
            prop_assert!((shifted.coef_h - base.coef_h * k).norm() < 1e-12 * i0.sqrt().max(1.0));
            prop_assert!((shifted.coef_v - base.coef_v * k).norm() < 1e-12 * i0.sqrt().max(1.0));
        }
    }
}
