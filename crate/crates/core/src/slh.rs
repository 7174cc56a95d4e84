//! SLH network elements and the series product.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{DissipatorSet, Ladder, LinearForm, LiouvillianSpec, ModeRegistry, QuadraticHamiltonian};
use crate::numerics::max_abs;
use crate::CMatrix;

const UNITARY_TOL: f64 = 1e-12;

/// Open network element `(S, L, H)`: scattering matrix over ports, one
/// linear coupling operator per port, and a bilinear Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SLHTriple {
    scattering: CMatrix,
    coupling: Vec<LinearForm>,
    hamiltonian: QuadraticHamiltonian,
}

impl SLHTriple {
    pub fn new(scattering: CMatrix, coupling: Vec<LinearForm>, hamiltonian: QuadraticHamiltonian) -> Result<Self> {
        let ports = coupling.len();
        if scattering.shape() != (ports, ports) {
            return Err(Error::InvalidComposition(format!(
                "scattering matrix is {}x{} for {ports} ports",
                scattering.nrows(),
                scattering.ncols()
            )));
        }
        let unitarity = &scattering * scattering.adjoint() - CMatrix::identity(ports, ports);
        if max_abs(&unitarity) > UNITARY_TOL {
            return Err(Error::InvalidComposition("scattering matrix is not unitary".into()));
        }
        let n = hamiltonian.n_modes();
        if coupling.iter().any(|l| l.n_modes() != n) {
            return Err(Error::InvalidComposition("coupling operators and Hamiltonian disagree on mode count".into()));
        }
        Ok(Self { scattering, coupling, hamiltonian })
    }

    /// Single-port element with `S = 1`.
    pub fn single_port(coupling: LinearForm, hamiltonian: QuadraticHamiltonian) -> Result<Self> {
        Self::new(CMatrix::identity(1, 1), vec![coupling], hamiltonian)
    }

    /// `(I, 0, 0)`, the identity of the series product.
    pub fn identity(ports: usize, n_modes: usize) -> Self {
        Self {
            scattering: CMatrix::identity(ports, ports),
            coupling: vec![LinearForm::zero(n_modes); ports],
            hamiltonian: QuadraticHamiltonian::zero(n_modes),
        }
    }

    pub fn scattering(&self) -> &CMatrix {
        &self.scattering
    }

    pub fn coupling(&self) -> &[LinearForm] {
        &self.coupling
    }

    pub fn hamiltonian(&self) -> &QuadraticHamiltonian {
        &self.hamiltonian
    }

    pub fn ports(&self) -> usize {
        self.coupling.len()
    }

    pub fn n_modes(&self) -> usize {
        self.hamiltonian.n_modes()
    }
}

/// `G2 ◁ G1`: feed the outputs of `g1` into `g2`.
///
/// `(S2 S1, L2 + S2 L1, H1 + H2 + (1/2i)(L2† S2 L1 - L1† S2† L2))`.
pub fn series_product(g2: &SLHTriple, g1: &SLHTriple) -> Result<SLHTriple> {
    if g2.ports() != g1.ports() {
        return Err(Error::InvalidComposition(format!(
            "port mismatch: {} vs {}",
            g2.ports(),
            g1.ports()
        )));
    }
    if g2.n_modes() != g1.n_modes() {
        return Err(Error::InvalidComposition("elements act on different mode sets".into()));
    }
    let ports = g1.ports();
    let n = g1.n_modes();
    let s2 = &g2.scattering;

    let mut coupling = Vec::with_capacity(ports);
    for i in 0..ports {
        let mut li = g2.coupling[i].clone();
        for j in 0..ports {
            li = li.try_add(&g1.coupling[j].scale(s2[(i, j)]))?;
        }
        coupling.push(li);
    }

    let mut hamiltonian = g1.hamiltonian.try_add(&g2.hamiltonian)?;
    // (1/2i) X + h.c. with X = L2† S2 L1 reproduces (1/2i)(X - X†).
    let half_over_i = Complex64::new(0.0, -0.5);
    let mut shift = QuadraticHamiltonian::zero(n);
    for i in 0..ports {
        let l2_dag = g2.coupling[i].adjoint();
        for j in 0..ports {
            let sij = s2[(i, j)];
            if sij != Complex64::new(0.0, 0.0) {
                shift.add_form_product(half_over_i * sij, &l2_dag, &g1.coupling[j]);
            }
        }
    }
    hamiltonian = hamiltonian.try_add(&shift)?;

    SLHTriple::new(s2 * &g1.scattering, coupling, hamiltonian)
}

/// Generator `-i[H, ·] + Σ_ports D[L_i] + extra_baths`.
///
/// Each port operator `L = Σ_α f_α x_α` is expanded over unit single-ladder
/// channels with dissipation entries `Γ_αβ = f_α f_β*`, so a collective
/// channel `D[√Γ1 a1 + √Γ2 a2]` becomes the block
/// `[[Γ1, √(Γ1Γ2)], [√(Γ1Γ2), Γ2]]`.
pub fn to_liouvillian(g: &SLHTriple, registry: ModeRegistry, extra_baths: &DissipatorSet) -> Result<LiouvillianSpec> {
    let n = g.n_modes();
    if registry.len() != n {
        return Err(Error::InvalidParameter(format!(
            "registry has {} modes, SLH element acts on {n}",
            registry.len()
        )));
    }

    // Unit channels for every ladder operator used by any port, in order of
    // first appearance.
    let mut ops: Vec<Ladder> = Vec::new();
    for l in &g.coupling {
        for (idx, c) in l.coeffs().iter().enumerate() {
            let op = if idx % 2 == 0 { Ladder::Annihilate(idx / 2) } else { Ladder::Create(idx / 2) };
            if *c != Complex64::new(0.0, 0.0) && !ops.contains(&op) {
                ops.push(op);
            }
        }
    }
    let k = ops.len();
    let mut gamma = CMatrix::zeros(k, k);
    for l in &g.coupling {
        for (a, &oa) in ops.iter().enumerate() {
            for (b, &ob) in ops.iter().enumerate() {
                gamma[(a, b)] += l.coeff(oa) * l.coeff(ob).conj();
            }
        }
    }

    let mut diss = DissipatorSet::new(n);
    for (a, &op) in ops.iter().enumerate() {
        diss.add_channel(LinearForm::single(n, op, Complex64::new(1.0, 0.0)), gamma[(a, a)].re, 0.0)?;
    }
    for a in 0..k {
        for b in (a + 1)..k {
            if gamma[(a, b)] != Complex64::new(0.0, 0.0) {
                diss.set_cross_rate(a, b, gamma[(a, b)])?;
            }
        }
    }
    for (idx, form) in extra_baths.channels().iter().enumerate() {
        diss.add_channel(form.clone(), extra_baths.rates()[(idx, idx)].re, extra_baths.nbar()[idx])?;
    }
    let offset = k;
    for a in 0..extra_baths.len() {
        for b in (a + 1)..extra_baths.len() {
            let z = extra_baths.rates()[(a, b)];
            if z != Complex64::new(0.0, 0.0) {
                diss.set_cross_rate(offset + a, offset + b, z)?;
            }
        }
    }
    LiouvillianSpec::new(registry, g.hamiltonian.clone(), diss)
}
