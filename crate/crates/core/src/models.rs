//! Builders for the three network topologies.
//!
//! All frequencies and rates are in units of the cavity linewidth. Cavity 1
//! of every pair is driven on the blue sideband (two-mode squeezing with its
//! mirror), cavity 2 on the red sideband (beam splitter). Feedback is the
//! cascaded coupling of cavity 1's output into cavity 2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{add_cascade, DissipatorSet, Ladder, LinearForm, LiouvillianSpec, ModeKind, ModeRegistry, QuadraticHamiltonian};
use crate::slh::{self, SLHTriple};

/// Largest supported chain (4 modes per port).
pub const MAX_CHAIN_PORTS: usize = 16;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
    }
}

fn check_rate(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {x}")))
    }
}

/// Two optomechanical cavities coupled through their optical modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model1Params {
    pub g1: f64,
    pub g2: f64,
    pub kappa: f64,
    #[serde(rename = "Gamma1")]
    pub cavity_decay1: f64,
    #[serde(rename = "Gamma2")]
    pub cavity_decay2: f64,
    #[serde(rename = "gamma")]
    pub mech_damping: f64,
    pub nbar: f64,
    pub feedback: bool,
}

impl Model1Params {
    /// `γ = 10⁻², g1 = 0.01, g2 = 0.05, κ = 0.1, n̄ = 0`, feedback on.
    pub fn fig2() -> Self {
        Self {
            g1: 0.01,
            g2: 0.05,
            kappa: 0.1,
            cavity_decay1: 1.0,
            cavity_decay2: 1.0,
            mech_damping: 1e-2,
            nbar: 0.0,
            feedback: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("g1", self.g1)?;
        check_finite("g2", self.g2)?;
        check_finite("kappa", self.kappa)?;
        check_rate("Gamma1", self.cavity_decay1)?;
        check_rate("Gamma2", self.cavity_decay2)?;
        check_rate("gamma", self.mech_damping)?;
        check_rate("nbar", self.nbar)?;
        if self.feedback && (self.cavity_decay1 == 0.0 || self.cavity_decay2 == 0.0) {
            return Err(Error::InvalidParameter("feedback requires positive cavity linewidths".into()));
        }
        Ok(())
    }
}

/// Two optical modes coupled through a shared mechanical mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model2Params {
    pub g1: f64,
    pub g2: f64,
    #[serde(rename = "Gamma1")]
    pub cavity_decay1: f64,
    #[serde(rename = "Gamma2")]
    pub cavity_decay2: f64,
    #[serde(rename = "gamma")]
    pub mech_damping: f64,
    pub nbar: f64,
    pub feedback: bool,
}

impl Model2Params {
    /// `g2 = 0.05, γ = 10⁻², n̄ = 0`, feedback on; `g1` is the swept axis.
    pub fn fig6(g1: f64) -> Self {
        Self {
            g1,
            g2: 0.05,
            cavity_decay1: 1.0,
            cavity_decay2: 1.0,
            mech_damping: 1e-2,
            nbar: 0.0,
            feedback: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("g1", self.g1)?;
        check_finite("g2", self.g2)?;
        check_rate("Gamma1", self.cavity_decay1)?;
        check_rate("Gamma2", self.cavity_decay2)?;
        check_rate("gamma", self.mech_damping)?;
        check_rate("nbar", self.nbar)?;
        if self.feedback && (self.cavity_decay1 == 0.0 || self.cavity_decay2 == 0.0) {
            return Err(Error::InvalidParameter("feedback requires positive cavity linewidths".into()));
        }
        Ok(())
    }
}

/// Open chain of identical Model 1 ports joined by beam splitters
/// `χ(a†_{i,2} a_{i+1,1} + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub n_ports: usize,
    pub port: Model1Params,
    pub chi: f64,
}

impl ChainParams {
    /// Ten ports at the [`Model1Params::fig2`] point with `χ = κ`.
    pub fn fig8(kappa: f64, feedback: bool) -> Self {
        let port = Model1Params { kappa, feedback, ..Model1Params::fig2() };
        Self { n_ports: 10, port, chi: kappa }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ports == 0 || self.n_ports > MAX_CHAIN_PORTS {
            return Err(Error::InvalidParameter(format!(
                "n_ports must be in 1..={MAX_CHAIN_PORTS}, got {}",
                self.n_ports
            )));
        }
        check_finite("chi", self.chi)?;
        self.port.validate()
    }
}

/// Label of mode `kind ∈ {a, b}`, cavity `k ∈ {1, 2}` in chain port `i`
/// (1-based): `b_3_2` is the red-sideband mirror of port 3.
pub fn chain_label(kind: char, port: usize, k: usize) -> String {
    format!("{kind}_{port}_{k}")
}

/// Mechanical modes of a chain in linear order
/// `(b_1_1, b_1_2, b_2_1, b_2_2, ...)`; even positions (1-based) are the
/// red-sideband mirrors `b_j_2`.
pub fn chain_mechanical_modes(n_ports: usize) -> Vec<String> {
    (1..=n_ports)
        .flat_map(|i| [chain_label('b', i, 1), chain_label('b', i, 2)])
        .collect()
}

fn model1_with_labels(p: &Model1Params, labels: [&str; 4]) -> Result<LiouvillianSpec> {
    p.validate()?;
    let registry = ModeRegistry::from_modes([
        (labels[0], ModeKind::Optical),
        (labels[1], ModeKind::Mechanical),
        (labels[2], ModeKind::Optical),
        (labels[3], ModeKind::Mechanical),
    ])?;
    let (a1, b1, a2, b2) = (0, 1, 2, 3);

    let mut h = QuadraticHamiltonian::zero(4);
    h.add_product(real(p.g1), Ladder::Annihilate(a1), Ladder::Annihilate(b1));
    h.add_product(real(p.g2), Ladder::Create(a2), Ladder::Annihilate(b2));
    h.add_product(real(p.kappa), Ladder::Annihilate(a1), Ladder::Create(a2));

    let mut diss = DissipatorSet::new(4);
    diss.add_decay(a1, p.cavity_decay1, 0.0)?;
    diss.add_decay(b1, p.mech_damping, p.nbar)?;
    diss.add_decay(a2, p.cavity_decay2, 0.0)?;
    diss.add_decay(b2, p.mech_damping, p.nbar)?;

    let spec = LiouvillianSpec::new(registry, h, diss)?;
    if p.feedback {
        add_cascade(&spec, labels[0], labels[2], p.cavity_decay1, p.cavity_decay2)
    } else {
        Ok(spec)
    }
}

/// Modes `(a1, b1, a2, b2)`;
/// `H = g1(a1 b1 + h.c.) + g2(a2† b2 + h.c.) + κ(a1 a2† + h.c.)`,
/// zero-temperature cavity decay, thermal mechanical damping, optional
/// cascade `a1 → a2`.
pub fn build_model1(p: &Model1Params) -> Result<LiouvillianSpec> {
    model1_with_labels(p, ["a1", "b1", "a2", "b2"])
}

/// Model 1 assembled as the series product of the two cavities' SLH
/// elements (feedback on) or with independent ports (feedback off).
pub fn build_model1_slh(p: &Model1Params) -> Result<LiouvillianSpec> {
    p.validate()?;
    let registry = ModeRegistry::from_modes([
        ("a1", ModeKind::Optical),
        ("b1", ModeKind::Mechanical),
        ("a2", ModeKind::Optical),
        ("b2", ModeKind::Mechanical),
    ])?;
    let mut h1 = QuadraticHamiltonian::zero(4);
    h1.add_product(real(p.g1), Ladder::Annihilate(0), Ladder::Annihilate(1));
    h1.add_product(real(p.kappa), Ladder::Annihilate(0), Ladder::Create(2));
    let mut h2 = QuadraticHamiltonian::zero(4);
    h2.add_product(real(p.g2), Ladder::Create(2), Ladder::Annihilate(3));
    let l1 = LinearForm::decay(4, 0, p.cavity_decay1);
    let l2 = LinearForm::decay(4, 2, p.cavity_decay2);

    let mut baths = DissipatorSet::new(4);
    baths.add_decay(1, p.mech_damping, p.nbar)?;
    baths.add_decay(3, p.mech_damping, p.nbar)?;

    let network = if p.feedback {
        let g1 = SLHTriple::single_port(l1, h1)?;
        let g2 = SLHTriple::single_port(l2, h2)?;
        slh::series_product(&g2, &g1)?
    } else {
        // Two separate output ports: parallel, not cascaded.
        let s = crate::CMatrix::identity(2, 2);
        SLHTriple::new(s, vec![l1, l2], h1.try_add(&h2)?)?
    };
    slh::to_liouvillian(&network, registry, &baths)
}

/// Modes `(a1, b, a2)`; `H = g1(a1† b† + a1 b) + g2(a2† b + b† a2)`,
/// zero-temperature cavity decay, thermal mechanical damping, optional
/// cascade `a1 → a2`.
pub fn build_model2(p: &Model2Params) -> Result<LiouvillianSpec> {
    p.validate()?;
    let registry = ModeRegistry::from_modes([
        ("a1", ModeKind::Optical),
        ("b", ModeKind::Mechanical),
        ("a2", ModeKind::Optical),
    ])?;
    let (a1, b, a2) = (0, 1, 2);
    let mut h = QuadraticHamiltonian::zero(3);
    h.add_product(real(p.g1), Ladder::Annihilate(a1), Ladder::Annihilate(b));
    h.add_product(real(p.g2), Ladder::Create(a2), Ladder::Annihilate(b));

    let mut diss = DissipatorSet::new(3);
    diss.add_decay(a1, p.cavity_decay1, 0.0)?;
    diss.add_decay(b, p.mech_damping, p.nbar)?;
    diss.add_decay(a2, p.cavity_decay2, 0.0)?;

    let spec = LiouvillianSpec::new(registry, h, diss)?;
    if p.feedback {
        add_cascade(&spec, "a1", "a2", p.cavity_decay1, p.cavity_decay2)
    } else {
        Ok(spec)
    }
}

/// `4·n_ports` modes, ports consecutive with `(a_i_1, b_i_1, a_i_2, b_i_2)`
/// each. Feedback acts inside each port only.
pub fn build_chain(p: &ChainParams) -> Result<LiouvillianSpec> {
    p.validate()?;
    let mut spec: Option<LiouvillianSpec> = None;
    for i in 1..=p.n_ports {
        let labels = [
            chain_label('a', i, 1),
            chain_label('b', i, 1),
            chain_label('a', i, 2),
            chain_label('b', i, 2),
        ];
        let port = model1_with_labels(&p.port, [&labels[0], &labels[1], &labels[2], &labels[3]])?;
        spec = Some(match spec {
            None => port,
            Some(s) => s.direct_sum(&port)?,
        });
    }
    let spec = spec.expect("at least one port");
    if p.chi == 0.0 || p.n_ports == 1 {
        return Ok(spec);
    }
    let mut links = QuadraticHamiltonian::zero(spec.n_modes());
    for i in 1..p.n_ports {
        let left = spec.registry().index(&chain_label('a', i, 2))?;
        let right = spec.registry().index(&chain_label('a', i + 1, 1))?;
        links.add_product(real(p.chi), Ladder::Create(left), Ladder::Annihilate(right));
    }
    spec.with_hamiltonian_terms(&links)
}
