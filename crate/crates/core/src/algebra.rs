//! Second-order product-basis expansion and reduction of the two-party joint
//! amplitude, plus closed-form evaluators for the local intensities and the
//! four detector-pair correlations.
//!
//! The joint amplitude of one selected detector pair is the product of
//! Alice's and Bob's projected fields. Expanding it gives HH, HV, VH and VV
//! products for each source pair (DD, AA, DA, AD). Reduction then applies the
//! three rules the derivation relies on:
//!
//! * DA and AD products vanish: D and A pulses never overlap in time.
//! * HH and VV merge into the same-polarization class, HV and VH into the
//!   cross-polarization class.
//! * The DD and AA contributions of each class add coherently; the AA term
//!   carries the fixed two-party phase e^{iη_αβ} through its fields.
//!
//! The correlation is then |SamePol|² + |CrossPol|².

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polarization::{
    analyzer_ports, finite, make_party_field, Party, PhaseSet, SourceTag, TaggedModeField,
};

/// Mode label pair (Alice label, Bob label), or an already merged class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModePair {
    HH,
    HV,
    VH,
    VV,
    SamePol,
    CrossPol,
}

impl ModePair {
    pub const RAW: [ModePair; 4] = [ModePair::HH, ModePair::HV, ModePair::VH, ModePair::VV];

    pub fn class(self) -> BasisClass {
        match self {
            ModePair::HH | ModePair::VV | ModePair::SamePol => BasisClass::SamePol,
            ModePair::HV | ModePair::VH | ModePair::CrossPol => BasisClass::CrossPol,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ModePair::HH => "H^a H^b",
            ModePair::HV => "H^a V^b",
            ModePair::VH => "V^a H^b",
            ModePair::VV => "V^a V^b",
            ModePair::SamePol => "SamePol",
            ModePair::CrossPol => "CrossPol",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisClass {
    /// Ĥ^αĤ^β ≡ V̂^αV̂^β
    SamePol,
    /// Ĥ^αV̂^β ≡ V̂^αĤ^β
    CrossPol,
}

/// Pulse classes feeding Alice's and Bob's factor of a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourcePair {
    DD,
    AA,
    DA,
    AD,
    /// DD and AA already summed.
    Combined,
}

/// Which rewriting step produced a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Direct tensor product of the two projected fields.
    Product,
    /// D and A pulses do not overlap in time; the product is zero.
    NoTemporalOverlap,
    /// HH + VV, DD + AA·e^{iη_αβ}.
    SamePolMerge,
    /// HV + VH, identified through the 50/50 beam splitter.
    CrossPolMerge,
}

impl Rule {
    fn describe(self) -> &'static str {
        match self {
            Rule::Product => "tensor product",
            Rule::NoTemporalOverlap => "zeroed: no temporal overlap of D and A pulses",
            Rule::SamePolMerge => "merged: HH + VV, DD + AA (same-polarization class)",
            Rule::CrossPolMerge => "merged: HV + VH, DD + AA (50/50 BS identification)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductTerm {
    pub modes: ModePair,
    pub sources: SourcePair,
    pub coef: Complex64,
    pub rule: Rule,
}

/// A party's D-class and A-class fields, as seen at one analyzer port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartyFields {
    pub d: TaggedModeField,
    pub a: TaggedModeField,
}

impl PartyFields {
    pub fn new(d: TaggedModeField, a: TaggedModeField) -> Result<Self> {
        if d.tag != SourceTag::D || a.tag != SourceTag::A {
            return Err(Error::MalformedTerms(
                "party fields need one D-class and one A-class field".into(),
            ));
        }
        if d.party != a.party {
            return Err(Error::MalformedTerms(
                "D and A fields belong to different parties".into(),
            ));
        }
        Ok(Self { d, a })
    }

    /// Fields leaving `party`'s MZI, before the analyzer.
    pub fn from_phases(party: Party, phases: &PhaseSet, i0: f64) -> Result<Self> {
        Self::new(
            make_party_field(party, SourceTag::D, phases, i0)?,
            make_party_field(party, SourceTag::A, phases, i0)?,
        )
    }

    pub fn party(&self) -> Party {
        self.d.party
    }

    fn project(&self, angle: f64) -> Self {
        Self {
            d: analyzer_ports(angle, &self.d).0,
            a: analyzer_ports(angle, &self.a).0,
        }
    }
}

fn raw_products(
    alpha: &TaggedModeField,
    beta: &TaggedModeField,
    sources: SourcePair,
    out: &mut Vec<ProductTerm>,
) {
    let zeroed = matches!(sources, SourcePair::DA | SourcePair::AD);
    for modes in ModePair::RAW {
        let (x, y) = match modes {
            ModePair::HH => (alpha.coef_h, beta.coef_h),
            ModePair::HV => (alpha.coef_h, beta.coef_v),
            ModePair::VH => (alpha.coef_v, beta.coef_h),
            _ => (alpha.coef_v, beta.coef_v),
        };
        out.push(if zeroed {
            ProductTerm {
                modes,
                sources,
                coef: Complex64::new(0.0, 0.0),
                rule: Rule::NoTemporalOverlap,
            }
        } else {
            ProductTerm {
                modes,
                sources,
                coef: x * y,
                rule: Rule::Product,
            }
        });
    }
}

/// Expands the joint amplitude of two already-projected party fields into the
/// 16 raw products (4 mode pairs × DD, AA, DA, AD). DA and AD products are
/// emitted as explicit zeros.
pub fn expand_projected(alpha: &PartyFields, beta: &PartyFields) -> Result<Vec<ProductTerm>> {
    if alpha.party() != Party::Alpha || beta.party() != Party::Beta {
        return Err(Error::MalformedTerms(
            "expansion needs Alice's fields first and Bob's second".into(),
        ));
    }
    let mut terms = Vec::with_capacity(16);
    raw_products(&alpha.d, &beta.d, SourcePair::DD, &mut terms);
    raw_products(&alpha.a, &beta.a, SourcePair::AA, &mut terms);
    raw_products(&alpha.d, &beta.a, SourcePair::DA, &mut terms);
    raw_products(&alpha.a, &beta.d, SourcePair::AD, &mut terms);
    Ok(terms)
}

/// Projects both parties' MZI output fields at analyzer angles `port_a` and
/// `port_b` and expands the joint amplitude.
pub fn expand_joint(
    alpha: &PartyFields,
    beta: &PartyFields,
    port_a: f64,
    port_b: f64,
) -> Result<Vec<ProductTerm>> {
    expand_projected(&alpha.project(port_a), &beta.project(port_b))
}

/// Reduced joint amplitude: one coefficient per basis class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedJoint {
    pub same_pol_coef: Complex64,
    pub cross_pol_coef: Complex64,
    /// Multiplier converting |coef|² into intensity² units. The field
    /// normalization already carries I_0, so this is 1.
    pub scale: f64,
}

impl ReducedJoint {
    /// Joint intensity R = scale·(|SamePol|² + |CrossPol|²). The classes are
    /// orthogonal, so their magnitudes add in quadrature.
    pub fn value(&self) -> f64 {
        self.scale * (self.same_pol_coef.norm_sqr() + self.cross_pol_coef.norm_sqr())
    }

    /// The reduced form as a term list; `reduce` maps it back to `self`.
    pub fn terms(&self) -> Vec<ProductTerm> {
        vec![
            ProductTerm {
                modes: ModePair::SamePol,
                sources: SourcePair::Combined,
                coef: self.same_pol_coef,
                rule: Rule::SamePolMerge,
            },
            ProductTerm {
                modes: ModePair::CrossPol,
                sources: SourcePair::Combined,
                coef: self.cross_pol_coef,
                rule: Rule::CrossPolMerge,
            },
        ]
    }
}

/// Applies the temporal-overlap, class-merge and coherent DD + AA rules.
pub fn reduce(terms: &[ProductTerm]) -> Result<ReducedJoint> {
    if terms.is_empty() {
        return Err(Error::MalformedTerms("empty term list".into()));
    }
    let mut same = Complex64::new(0.0, 0.0);
    let mut cross = Complex64::new(0.0, 0.0);
    for t in terms {
        if !finite(t.coef) {
            return Err(Error::MalformedTerms(format!(
                "non-finite coefficient on {:?}/{:?}",
                t.sources, t.modes
            )));
        }
        match t.sources {
            SourcePair::DA | SourcePair::AD => {
                if t.coef != Complex64::new(0.0, 0.0) {
                    return Err(Error::MalformedTerms(format!(
                        "{:?} product survives with coefficient {}",
                        t.sources, t.coef
                    )));
                }
                continue;
            }
            SourcePair::Combined
                if !matches!(t.modes, ModePair::SamePol | ModePair::CrossPol) =>
            {
                return Err(Error::MalformedTerms(
                    "combined source pair on an unmerged mode pair".into(),
                ));
            }
            _ => {}
        }
        match t.modes.class() {
            BasisClass::SamePol => same += t.coef,
            BasisClass::CrossPol => cross += t.coef,
        }
    }
    Ok(ReducedJoint {
        same_pol_coef: same,
        cross_pol_coef: cross,
        scale: 1.0,
    })
}

/// Detector pair. Alice's port 1 is detector A and port 2 is C; Bob's port 1
/// is B and port 2 is D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorPair {
    AB,
    CD,
    AD,
    BC,
}

/// Analyzer output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairFamily {
    /// AB and CD.
    SamePort,
    /// AD and BC.
    CrossPort,
}

impl DetectorPair {
    pub const ALL: [DetectorPair; 4] = [
        DetectorPair::AB,
        DetectorPair::CD,
        DetectorPair::AD,
        DetectorPair::BC,
    ];

    /// (Alice port, Bob port).
    pub fn ports(self) -> (Port, Port) {
        match self {
            DetectorPair::AB => (Port::One, Port::One),
            DetectorPair::CD => (Port::Two, Port::Two),
            DetectorPair::AD => (Port::One, Port::Two),
            DetectorPair::BC => (Port::Two, Port::One),
        }
    }

    pub fn family(self) -> PairFamily {
        match self {
            DetectorPair::AB | DetectorPair::CD => PairFamily::SamePort,
            DetectorPair::AD | DetectorPair::BC => PairFamily::CrossPort,
        }
    }

    /// Port 2 behaves as port 1 of an analyzer turned by π/2.
    pub fn effective_angles(self, theta: f64, xi: f64) -> (f64, f64) {
        let shift = |p: Port, a: f64| match p {
            Port::One => a,
            Port::Two => a + FRAC_PI_2,
        };
        let (pa, pb) = self.ports();
        (shift(pa, theta), shift(pb, xi))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorPair::AB => "AB",
            DetectorPair::CD => "CD",
            DetectorPair::AD => "AD",
            DetectorPair::BC => "BC",
        }
    }
}

impl fmt::Display for DetectorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AB" => Ok(DetectorPair::AB),
            "CD" => Ok(DetectorPair::CD),
            "AD" => Ok(DetectorPair::AD),
            "BC" => Ok(DetectorPair::BC),
            _ => Err(Error::invalid("pair", s, "AB|CD|AD|BC")),
        }
    }
}

/// I_0²·[cos²(θ′−ξ′)·cos²(η_αβ/2) + sin²(θ′+ξ′)·sin²(η_αβ/2)] with the
/// pair's effective analyzer angles (θ′, ξ′).
pub fn closed_form_r(pair: DetectorPair, theta: f64, xi: f64, eta_ab: f64, i0: f64) -> Result<f64> {
    if !i0.is_finite() || i0 <= 0.0 {
        return Err(Error::NonPositiveIntensity(i0));
    }
    if !(theta.is_finite() && xi.is_finite() && eta_ab.is_finite()) {
        return Err(Error::NonFinite("closed-form arguments"));
    }
    let (t, x) = pair.effective_angles(theta, xi);
    let (sh, ch) = (eta_ab / 2.0).sin_cos();
    let same = (t - x).cos().powi(2) * ch * ch;
    let cross = (t + x).sin().powi(2) * sh * sh;
    Ok(i0 * i0 * (same + cross))
}

/// Mean local intensity at a party's port-1 detector: D-class and A-class
/// self products, with the D×A cross products zeroed by the temporal rule.
pub fn intensity_expectation(party: Party, theta: f64, phases: &PhaseSet, i0: f64) -> Result<f64> {
    let fields = PartyFields::from_phases(party, phases, i0)?.project(theta);
    // Cross products D·A* vanish (no temporal overlap); only the
    // per-label self products of each class survive.
    Ok(fields.d.intensity() + fields.a.intensity())
}

/// Full expansion and reduction for one detector pair, for display.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub pair: DetectorPair,
    pub theta: f64,
    pub xi: f64,
    pub phases: PhaseSet,
    pub i0: f64,
    pub terms: Vec<ProductTerm>,
    pub reduced: ReducedJoint,
    pub closed_form: f64,
}

pub fn derive(
    pair: DetectorPair,
    theta: f64,
    xi: f64,
    phases: &PhaseSet,
    i0: f64,
) -> Result<Derivation> {
    let alpha = PartyFields::from_phases(Party::Alpha, phases, i0)?;
    let beta = PartyFields::from_phases(Party::Beta, phases, i0)?;
    let (ta, tb) = pair.effective_angles(theta, xi);
    let terms = expand_joint(&alpha, &beta, ta, tb)?;
    let reduced = reduce(&terms)?;
    Ok(Derivation {
        pair,
        theta,
        xi,
        phases: *phases,
        i0,
        terms,
        reduced,
        closed_form: closed_form_r(pair, theta, xi, phases.eta_ab(), i0)?,
    })
}

fn fmt_c(c: Complex64) -> String {
    format!("{:+.6}{:+.6}i", c.re, c.im)
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# pair {}  theta={}  xi={}  eta={}  psi_a={}  psi_b={}  eta_ab={}  i0={}",
            self.pair,
            self.theta,
            self.xi,
            self.phases.eta,
            self.phases.psi_a,
            self.phases.psi_b,
            self.phases.eta_ab(),
            self.i0
        )?;
        writeln!(f, "# expansion")?;
        for t in &self.terms {
            writeln!(
                f,
                "{:<9}{:<10}{:>26}   {}",
                format!("{:?}", t.sources),
                t.modes.label(),
                fmt_c(t.coef),
                t.rule.describe()
            )?;
        }
        writeln!(f, "# reduction")?;
        for t in self.reduced.terms() {
            writeln!(
                f,
                "{:<9}{:<10}{:>26}   {}",
                "DD+AA",
                t.modes.label(),
                fmt_c(t.coef),
                t.rule.describe()
            )?;
        }
        writeln!(
            f,
            "R_{} = |SamePol|^2 + |CrossPol|^2 = {:.12}   closed form {:.12}",
            self.pair,
            self.reduced.value(),
            self.closed_form
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, TAU};

    fn fields(phases: &PhaseSet, i0: f64) -> (PartyFields, PartyFields) {
        (
            PartyFields::from_phases(Party::Alpha, phases, i0).unwrap(),
            PartyFields::from_phases(Party::Beta, phases, i0).unwrap(),
        )
    }

    fn coef(terms: &[ProductTerm], sources: SourcePair, modes: ModePair) -> Complex64 {
        terms
            .iter()
            .find(|t| t.sources == sources && t.modes == modes)
            .unwrap()
            .coef
    }

    // Hand expansion, in units of i0/2 (the product of the two mode scales).
    #[test]
    fn expansion_at_zero_angles() {
        let (a, b) = fields(&PhaseSet::default(), 2.0);
        let terms = expand_joint(&a, &b, 0.0, 0.0).unwrap();
        assert_eq!(terms.len(), 16);
        let one = Complex64::new(1.0, 0.0);
        assert!((coef(&terms, SourcePair::DD, ModePair::HH) - one).norm() < 1e-12);
        for m in [ModePair::HV, ModePair::VH, ModePair::VV] {
            assert!(coef(&terms, SourcePair::DD, m).norm() < 1e-12);
            assert!(coef(&terms, SourcePair::AA, m).norm() < 1e-12);
        }
        assert!((coef(&terms, SourcePair::AA, ModePair::HH) - one).norm() < 1e-12);
    }

    #[test]
    fn expansion_at_quarter_turn() {
        let (a, b) = fields(&PhaseSet::default(), 2.0);
        let terms = expand_joint(&a, &b, FRAC_PI_4, 0.0).unwrap();
        let c = FRAC_PI_4.cos();
        assert!((coef(&terms, SourcePair::DD, ModePair::HH).re - c).abs() < 1e-12);
        assert!(coef(&terms, SourcePair::DD, ModePair::HV).norm() < 1e-12);
        assert!((coef(&terms, SourcePair::DD, ModePair::VH).re - FRAC_PI_4.sin()).abs() < 1e-12);
        assert!(coef(&terms, SourcePair::DD, ModePair::VV).norm() < 1e-12);
    }

    #[test]
    fn cross_source_products_are_explicit_zeros() {
        let (a, b) = fields(&PhaseSet::new(0.3, 1.2, -2.0), 1.0);
        let terms = expand_joint(&a, &b, 0.7, -0.4).unwrap();
        let zeros: Vec<_> = terms
            .iter()
            .filter(|t| matches!(t.sources, SourcePair::DA | SourcePair::AD))
            .collect();
        assert_eq!(zeros.len(), 8);
        assert!(zeros
            .iter()
            .all(|t| t.coef == Complex64::new(0.0, 0.0) && t.rule == Rule::NoTemporalOverlap));
    }

    #[test]
    fn phase_endpoints_kill_one_class() {
        for (theta, xi) in [(0.1, 0.9), (1.3, -0.2), (FRAC_PI_8, 0.0)] {
            let zero = PhaseSet::default();
            let (a, b) = fields(&zero, 1.0);
            let r = reduce(&expand_joint(&a, &b, theta, xi).unwrap()).unwrap();
            assert!(r.cross_pol_coef.norm() < 1e-15);

            let odd = PhaseSet::new(PI / 2.0, 0.0, 0.0);
            let (a, b) = fields(&odd, 1.0);
            let r = reduce(&expand_joint(&a, &b, theta, xi).unwrap()).unwrap();
            assert!(r.same_pol_coef.norm() < 1e-15);
        }
    }

    #[test]
    fn reduce_rejects_malformed_lists() {
        assert!(reduce(&[]).is_err());
        let bad = ProductTerm {
            modes: ModePair::HH,
            sources: SourcePair::DA,
            coef: Complex64::new(0.1, 0.0),
            rule: Rule::Product,
        };
        assert!(matches!(reduce(&[bad]), Err(Error::MalformedTerms(_))));
        let nan = ProductTerm {
            coef: Complex64::new(f64::NAN, 0.0),
            sources: SourcePair::DD,
            ..bad
        };
        assert!(reduce(&[nan]).is_err());
        let mixed = ProductTerm {
            sources: SourcePair::Combined,
            coef: Complex64::new(0.0, 0.0),
            ..bad
        };
        assert!(reduce(&[mixed]).is_err());
    }

    #[test]
    fn party_fields_validate_roles() {
        let p = PhaseSet::default();
        let d = make_party_field(Party::Alpha, SourceTag::D, &p, 1.0).unwrap();
        let a = make_party_field(Party::Beta, SourceTag::A, &p, 1.0).unwrap();
        assert!(PartyFields::new(d, a).is_err());
        assert!(PartyFields::new(d, d).is_err());
        let (alpha, beta) = fields(&p, 1.0);
        assert!(expand_projected(&beta, &alpha).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let i0 = 1.5;
        let r = closed_form_r(DetectorPair::AB, 0.4, 0.4, 0.0, i0).unwrap();
        assert!((r - i0 * i0).abs() < 1e-12);
        let r = closed_form_r(DetectorPair::AD, 0.4, 0.4, 0.0, i0).unwrap();
        assert!(r.abs() < 1e-12);
        let r = closed_form_r(DetectorPair::AB, FRAC_PI_8, 0.0, 0.0, 1.0).unwrap();
        assert!((r - 0.853_553_390_593_273_8).abs() < 1e-12);
        let r = closed_form_r(DetectorPair::AD, FRAC_PI_8, FRAC_PI_8, PI, 1.0).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert!(closed_form_r(DetectorPair::AB, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!("XY".parse::<DetectorPair>().is_err());
    }

    #[test]
    fn local_intensity_is_i0() {
        let p = PhaseSet::new(0.4, 1.3, 0.0);
        let v = intensity_expectation(Party::Alpha, 0.7, &p, 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = intensity_expectation(Party::Beta, 0.0, &PhaseSet::default(), 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        for k in 0..32 {
            let p = PhaseSet::new(0.2, TAU * k as f64 / 32.0, 0.5);
            let v = intensity_expectation(Party::Alpha, 1.1, &p, 1.0).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derivation_renders_every_term() {
        let d = derive(DetectorPair::AB, 0.3, 0.1, &PhaseSet::default(), 1.0).unwrap();
        let text = d.to_string();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 16 + 2 + 1);
        assert!(text.contains("no temporal overlap"));
        assert!(text.contains("50/50 BS"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn closed_form_completeness(theta in -4.0..4.0f64, xi in -4.0..4.0f64, eta in -10.0..10.0f64) {
            let ab = closed_form_r(DetectorPair::AB, theta, xi, eta, 1.0).unwrap();
            let ad = closed_form_r(DetectorPair::AD, theta, xi, eta, 1.0).unwrap();
            let cd = closed_form_r(DetectorPair::CD, theta, xi, eta, 1.0).unwrap();
            let bc = closed_form_r(DetectorPair::BC, theta, xi, eta, 1.0).unwrap();
            prop_assert!((ab + ad - 1.0).abs() < 1e-12);
            prop_assert!((cd + bc - 1.0).abs() < 1e-12);
            prop_assert!((ab - cd).abs() < 1e-12);
            prop_assert!((ad - bc).abs() < 1e-12);
        }

        #[test]
        fn reduce_is_idempotent(theta in -4.0..4.0f64, xi in -4.0..4.0f64, eta in -10.0..10.0f64) {
            let (a, b) = fields(&PhaseSet::new(eta, 0.1, -0.3), 1.0);
            let r = reduce(&expand_joint(&a, &b, theta, xi).unwrap()).unwrap();
            prop_assert_eq!(reduce(&r.terms()).unwrap(), r);
        }

        #[test]
        fn reduce_is_linear(theta in -4.0..4.0f64, xi in -4.0..4.0f64, k in -3.0..3.0f64) {
            let (a, b) = fields(&PhaseSet::new(0.4, 0.0, 0.0), 1.0);
            let t1 = expand_joint(&a, &b, theta, xi).unwrap();
            let t2 = expand_joint(&a, &b, xi, theta).unwrap();
            let r1 = reduce(&t1).unwrap();
            let r2 = reduce(&t2).unwrap();
            let combined: Vec<_> = t1.iter().map(|t| ProductTerm { coef: t.coef * k, ..*t })
                .chain(t2.iter().copied())
                .collect();
            let r = reduce(&combined).unwrap();
            prop_assert!((r.same_pol_coef - (r1.same_pol_coef * k + r2.same_pol_coef)).norm() < 1e-12);
            prop_assert!((r.cross_pol_coef - (r1.cross_pol_coef * k + r2.cross_pol_coef)).norm() < 1e-12);
        }

        #[test]
        fn expansion_matches_closed_form(
            theta in -4.0..4.0f64, xi in -4.0..4.0f64,
            eta in -5.0..5.0f64, psi_a in -5.0..5.0f64, psi_b in -5.0..5.0f64,
            i0 in 0.1..3.0f64, p in 0usize..4
        ) {
            let pair = DetectorPair::ALL[p];
            let phases = PhaseSet::new(eta, psi_a, psi_b);
            let d = derive(pair, theta, xi, &phases, i0).unwrap();
            prop_assert!((d.reduced.value() - d.closed_form).abs() < 1e-12 * i0 * i0);
        }
    }
}
