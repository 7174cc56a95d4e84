//! Quadratic open-system generators and their moment equations.
//!
//! A [`LiouvillianSpec`] holds a bilinear Hamiltonian `H = ½ v†Gv` over the
//! doubled ladder basis `v = (a1, a1†, a2, a2†, ...)`, a set of linear jump
//! operators `L_k` with a Hermitian dissipation matrix `Γ_kl`,
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_kl Γ_kl (L_k ρ L_l† - ½{L_l† L_k, ρ}),
//! ```
//!
//! and optional thermal occupations on single-mode channels. Moment
//! equations are obtained from the adjoint generator: writing each jump
//! operator as `L_k = c_k · r` over quadratures and `P = Σ_kl Γ_kl c_k c_l†`,
//!
//! ```text
//! S = Ω (H_q - Im P),     D = Ω Re(P) Ωᵀ,
//! ```
//!
//! where `H_q` is the quadrature Hessian of the Hamiltonian.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{self, max_abs};
use crate::{CMatrix, RMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Admissibility tolerance for `V + iΩ/2 ⪰ 0` and `det(2V) ≥ 1`.
pub const PHYSICALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Optical,
    Mechanical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mode {
    pub label: String,
    pub kind: ModeKind,
}

/// Ordered, uniquely labelled bosonic modes. The order fixes the quadrature
/// layout `(q, p)` per mode everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModeRegistry {
    modes: Vec<Mode>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_modes<S: Into<String>>(modes: impl IntoIterator<Item = (S, ModeKind)>) -> Result<Self> {
        let mut reg = Self::new();
        for (label, kind) in modes {
            reg.add(label, kind)?;
        }
        Ok(reg)
    }

    pub fn add(&mut self, label: impl Into<String>, kind: ModeKind) -> Result<usize> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidParameter("mode label must not be empty".into()));
        }
        if self.modes.iter().any(|m| m.label == label) {
            return Err(Error::InvalidParameter(format!("duplicate mode label {label:?}")));
        }
        self.modes.push(Mode { label, kind });
        Ok(self.modes.len() - 1)
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mode {label:?}")))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.modes.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn kind(&self, index: usize) -> ModeKind {
        self.modes[index].kind
    }

    /// `(q_x, p_x)` labels in quadrature order.
    pub fn quadrature_labels(&self) -> Vec<String> {
        self.modes
            .iter()
            .flat_map(|m| [format!("q_{}", m.label), format!("p_{}", m.label)])
            .collect()
    }

    fn concat(&self, other: &ModeRegistry) -> Result<ModeRegistry> {
        let mut out = self.clone();
        for m in &other.modes {
            out.add(m.label.clone(), m.kind)?;
        }
        Ok(out)
    }
}

/// A single ladder operator on a registered mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Annihilate(usize),
    Create(usize),
}

impl Ladder {
    pub fn mode(self) -> usize {
        match self {
            Ladder::Annihilate(j) | Ladder::Create(j) => j,
        }
    }

    /// Position in the doubled basis `(a1, a1†, a2, a2†, ...)`.
    pub fn doubled_index(self) -> usize {
        match self {
            Ladder::Annihilate(j) => 2 * j,
            Ladder::Create(j) => 2 * j + 1,
        }
    }

    fn from_doubled_index(idx: usize) -> Self {
        if idx.is_multiple_of(2) {
            Ladder::Annihilate(idx / 2)
        } else {
            Ladder::Create(idx / 2)
        }
    }

    pub fn dagger(self) -> Self {
        match self {
            Ladder::Annihilate(j) => Ladder::Create(j),
            Ladder::Create(j) => Ladder::Annihilate(j),
        }
    }
}

/// Unitary change of basis `v = T r` from quadratures to the doubled ladder
/// basis: `a = (q + ip)/√2`, `a† = (q - ip)/√2`.
pub fn ladder_transform(n_modes: usize) -> CMatrix {
    let mut t = CMatrix::zeros(2 * n_modes, 2 * n_modes);
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for j in 0..n_modes {
        t[(2 * j, 2 * j)] = s;
        t[(2 * j, 2 * j + 1)] = I * s;
        t[(2 * j + 1, 2 * j)] = s;
        t[(2 * j + 1, 2 * j + 1)] = -I * s;
    }
    t
}

/// `Ω = ⊕_j [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> RMatrix {
    let mut w = RMatrix::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        w[(2 * j, 2 * j + 1)] = 1.0;
        w[(2 * j + 1, 2 * j)] = -1.0;
    }
    w
}

/// Linear combination of ladder operators, `L = Σ_α f_α v_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    coeffs: Vec<Complex64>,
}

impl LinearForm {
    pub fn zero(n_modes: usize) -> Self {
        Self { coeffs: vec![ZERO; 2 * n_modes] }
    }

    pub fn single(n_modes: usize, op: Ladder, coeff: Complex64) -> Self {
        let mut f = Self::zero(n_modes);
        f.coeffs[op.doubled_index()] = coeff;
        f
    }

    /// `√rate · a_mode`.
    pub fn decay(n_modes: usize, mode: usize, rate: f64) -> Self {
        Self::single(n_modes, Ladder::Annihilate(mode), Complex64::new(rate.sqrt(), 0.0))
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, op: Ladder) -> Complex64 {
        self.coeffs[op.doubled_index()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn try_add(&self, other: &LinearForm) -> Result<Self> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::InvalidComposition(format!(
                "linear forms over {} and {} modes",
                self.n_modes(),
                other.n_modes()
            )));
        }
        Ok(Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
    }

    /// `L† = Σ_α f_α* v_α†`, re-expressed over the doubled basis.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n_modes());
        for (idx, c) in self.coeffs.iter().enumerate() {
            let bar = Ladder::from_doubled_index(idx).dagger().doubled_index();
            out.coeffs[bar] = c.conj();
        }
        out
    }

    /// Coefficients `c` with `L = c · r` over quadratures `(q1, p1, ...)`.
    pub fn quadrature_coeffs(&self) -> DVector<Complex64> {
        let t = ladder_transform(self.n_modes());
        t.transpose() * DVector::from_column_slice(&self.coeffs)
    }

    /// The single ladder operator and its coefficient, when exactly one
    /// coefficient is non-zero.
    pub fn single_ladder(&self) -> Option<(Ladder, Complex64)> {
        let mut found = None;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                if found.is_some() {
                    return None;
                }
                found = Some((Ladder::from_doubled_index(idx), *c));
            }
        }
        found
    }

    fn embed(&self, offset: usize, total_modes: usize) -> Self {
        let mut out = Self::zero(total_modes);
        out.coeffs[2 * offset..2 * offset + self.coeffs.len()].copy_from_slice(&self.coeffs);
        out
    }
}

/// Bilinear Hamiltonian `H = ½ v†Gv` with Hermitian `G` over the doubled
/// ladder basis. Constant offsets are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    g: CMatrix,
}

impl QuadraticHamiltonian {
    pub fn zero(n_modes: usize) -> Self {
        Self { g: CMatrix::zeros(2 * n_modes, 2 * n_modes) }
    }

    pub fn n_modes(&self) -> usize {
        self.g.nrows() / 2
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    /// Add `c·x·y + h.c.`.
    pub fn add_product(&mut self, coeff: Complex64, x: Ladder, y: Ladder) {
        let (a, b) = (x.doubled_index(), y.doubled_index());
        let (abar, bbar) = (x.dagger().doubled_index(), y.dagger().doubled_index());
        // x = v_abar†, y = v_bbar† in the doubled basis; both orderings of the
        // product appear so that G stays Hermitian with the bosonic symmetry.
        self.g[(abar, b)] += coeff;
        self.g[(bbar, a)] += coeff;
        self.g[(b, abar)] += coeff.conj();
        self.g[(a, bbar)] += coeff.conj();
    }

    /// Add `c·X·Y + h.c.` for linear forms `X`, `Y`.
    pub fn add_form_product(&mut self, coeff: Complex64, x: &LinearForm, y: &LinearForm) {
        for (i, xi) in x.coeffs.iter().enumerate() {
            if *xi == ZERO {
                continue;
            }
            for (j, yj) in y.coeffs.iter().enumerate() {
                if *yj == ZERO {
                    continue;
                }
                self.add_product(coeff * xi * yj, Ladder::from_doubled_index(i), Ladder::from_doubled_index(j));
            }
        }
    }

    pub fn try_add(&self, other: &QuadraticHamiltonian) -> Result<Self> {
        if self.g.shape() != other.g.shape() {
            return Err(Error::InvalidComposition("Hamiltonians over different mode counts".into()));
        }
        Ok(Self { g: &self.g + &other.g })
    }

    /// Real symmetric `H_q` with `H = ½ rᵀ H_q r`.
    pub fn quadrature_hessian(&self) -> RMatrix {
        let t = ladder_transform(self.n_modes());
        let hq = t.adjoint() * &self.g * &t;
        let h = hq.map(|z| z.re);
        (&h + h.transpose()) * 0.5
    }

    fn validate(&self) -> Result<()> {
        let tol = 1e-12 * (1.0 + max_abs(&self.g));
        if max_abs(&(&self.g - self.g.adjoint())) > tol {
            return Err(Error::InvalidParameter("Hamiltonian matrix is not Hermitian".into()));
        }
        let t = ladder_transform(self.n_modes());
        let hq = t.adjoint() * &self.g * &t;
        if hq.iter().any(|z| z.im.abs() > tol) {
            return Err(Error::InvalidParameter(
                "Hamiltonian matrix lacks the bosonic a/a† symmetry".into(),
            ));
        }
        Ok(())
    }

    fn embed(&self, offset: usize, total_modes: usize) -> Self {
        let mut out = Self::zero(total_modes);
        let n = self.g.nrows();
        out.g.view_mut((2 * offset, 2 * offset), (n, n)).copy_from(&self.g);
        out
    }
}

/// Jump operators, dissipation matrix and thermal occupations.
///
/// A channel with `nbar > 0` must be a single ladder operator with no
/// cross-rates; it expands to `Γ_kk (n̄+1) D[L_k] + Γ_kk n̄ D[L_k†]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipatorSet {
    n_modes: usize,
    channels: Vec<LinearForm>,
    rates: CMatrix,
    nbar: Vec<f64>,
}

impl DissipatorSet {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes, channels: Vec::new(), rates: CMatrix::zeros(0, 0), nbar: Vec::new() }
    }

    pub fn channels(&self) -> &[LinearForm] {
        &self.channels
    }

    pub fn rates(&self) -> &CMatrix {
        &self.rates
    }

    pub fn nbar(&self) -> &[f64] {
        &self.nbar
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Append a channel `L` with diagonal rate `rate` and thermal occupation
    /// `nbar`. Returns its index.
    pub fn add_channel(&mut self, form: LinearForm, rate: f64, nbar: f64) -> Result<usize> {
        if form.n_modes() != self.n_modes {
            return Err(Error::InvalidParameter(format!(
                "jump operator over {} modes in a {}-mode network",
                form.n_modes(),
                self.n_modes
            )));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate must be finite and >= 0, got {rate}")));
        }
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("nbar must be finite and >= 0, got {nbar}")));
        }
        if nbar > 0.0 && form.single_ladder().is_none() {
            return Err(Error::InvalidParameter(
                "thermal baths attach only to single-mode jump operators".into(),
            ));
        }
        let k = self.channels.len();
        let mut rates = CMatrix::zeros(k + 1, k + 1);
        rates.view_mut((0, 0), (k, k)).copy_from(&self.rates);
        rates[(k, k)] = Complex64::new(rate, 0.0);
        self.rates = rates;
        self.channels.push(form);
        self.nbar.push(nbar);
        Ok(k)
    }

    /// Damping of `mode` at `rate` into a bath with occupation `nbar`.
    pub fn add_decay(&mut self, mode: usize, rate: f64, nbar: f64) -> Result<usize> {
        if mode >= self.n_modes {
            return Err(Error::InvalidParameter(format!("mode index {mode} out of range")));
        }
        let form = LinearForm::single(self.n_modes, Ladder::Annihilate(mode), Complex64::new(1.0, 0.0));
        self.add_channel(form, rate, nbar)
    }

    /// Set `Γ_kl = value` and `Γ_lk = value*`.
    pub fn set_cross_rate(&mut self, k: usize, l: usize, value: Complex64) -> Result<()> {
        if k >= self.len() || l >= self.len() || k == l {
            return Err(Error::InvalidParameter(format!("bad cross-rate indices ({k}, {l})")));
        }
        if self.nbar[k] > 0.0 || self.nbar[l] > 0.0 {
            return Err(Error::InvalidParameter("thermal channels cannot carry cross-rates".into()));
        }
        self.rates[(k, l)] = value;
        self.rates[(l, k)] = value.conj();
        Ok(())
    }

    /// Index of the channel that is exactly `a_mode` (unit coefficient).
    pub fn find_decay(&self, mode: usize) -> Option<usize> {
        self.channels.iter().position(|f| {
            matches!(f.single_ladder(), Some((Ladder::Annihilate(j), c)) if j == mode && c == Complex64::new(1.0, 0.0))
        })
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.len();
        if k == 0 {
            return Ok(());
        }
        let scale = 1.0 + max_abs(&self.rates);
        if max_abs(&(&self.rates - self.rates.adjoint())) > 1e-14 * scale {
            return Err(Error::InvalidParameter("dissipation matrix is not Hermitian".into()));
        }
        let herm = (&self.rates + self.rates.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "dissipation matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        for (idx, &n) in self.nbar.iter().enumerate() {
            if n > 0.0 {
                let crossed = (0..k).any(|j| j != idx && self.rates[(idx, j)] != ZERO);
                if crossed {
                    return Err(Error::InvalidParameter("thermal channels cannot carry cross-rates".into()));
                }
            }
        }
        Ok(())
    }

    /// `P = Σ_kl Γ_kl c_k c_l†` over quadratures, thermal channels expanded.
    pub fn diffusion_kernel(&self) -> CMatrix {
        let dim = 2 * self.n_modes;
        let mut p = CMatrix::zeros(dim, dim);
        let cs: Vec<DVector<Complex64>> = self.channels.iter().map(LinearForm::quadrature_coeffs).collect();
        for (k, ck) in cs.iter().enumerate() {
            for (l, cl) in cs.iter().enumerate() {
                let mut rate = self.rates[(k, l)];
                if rate == ZERO {
                    continue;
                }
                if k == l && self.nbar[k] > 0.0 {
                    rate *= self.nbar[k] + 1.0;
                }
                p += ck * cl.adjoint() * rate;
            }
            if self.nbar[k] > 0.0 {
                let cbar = ck.conjugate();
                p += &cbar * cbar.adjoint() * (self.rates[(k, k)] * self.nbar[k]);
            }
        }
        p
    }

    fn direct_sum(&self, other: &DissipatorSet) -> Self {
        let total = self.n_modes + other.n_modes;
        let mut channels: Vec<LinearForm> = self.channels.iter().map(|f| f.embed(0, total)).collect();
        channels.extend(other.channels.iter().map(|f| f.embed(self.n_modes, total)));
        let (k1, k2) = (self.len(), other.len());
        let mut rates = CMatrix::zeros(k1 + k2, k1 + k2);
        rates.view_mut((0, 0), (k1, k1)).copy_from(&self.rates);
        rates.view_mut((k1, k1), (k2, k2)).copy_from(&other.rates);
        let mut nbar = self.nbar.clone();
        nbar.extend_from_slice(&other.nbar);
        Self { n_modes: total, channels, rates, nbar }
    }
}

/// Complete Gaussian generator: modes, Hamiltonian, dissipators.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvillianSpec {
    registry: ModeRegistry,
    hamiltonian: QuadraticHamiltonian,
    dissipators: DissipatorSet,
}

impl LiouvillianSpec {
    pub fn new(registry: ModeRegistry, hamiltonian: QuadraticHamiltonian, dissipators: DissipatorSet) -> Result<Self> {
        let n = registry.len();
        if hamiltonian.n_modes() != n || dissipators.n_modes != n {
            return Err(Error::InvalidParameter(format!(
                "registry has {n} modes, Hamiltonian {} and dissipators {}",
                hamiltonian.n_modes(),
                dissipators.n_modes
            )));
        }
        Ok(Self { registry, hamiltonian, dissipators })
    }

    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn hamiltonian(&self) -> &QuadraticHamiltonian {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &DissipatorSet {
        &self.dissipators
    }

    pub fn n_modes(&self) -> usize {
        self.registry.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.hamiltonian.validate()?;
        self.dissipators.validate()
    }

    /// Uncoupled union of two networks, `self` modes first.
    pub fn direct_sum(&self, other: &LiouvillianSpec) -> Result<Self> {
        let registry = self.registry.concat(&other.registry)?;
        let total = registry.len();
        let hamiltonian = self
            .hamiltonian
            .embed(0, total)
            .try_add(&other.hamiltonian.embed(self.n_modes(), total))?;
        let dissipators = self.dissipators.direct_sum(&other.dissipators);
        Self::new(registry, hamiltonian, dissipators)
    }

    /// Same network with extra Hamiltonian terms.
    pub fn with_hamiltonian_terms(&self, extra: &QuadraticHamiltonian) -> Result<Self> {
        Self::new(self.registry.clone(), self.hamiltonian.try_add(extra)?, self.dissipators.clone())
    }
}

/// Cascade the output of optical mode `source` into `target`.
///
/// Adds the Hamiltonian shift `(√(r1 r2)/2i)(a_t† a_s - a_s† a_t)` and the
/// cross-rate `√(r1 r2)` between the two decay channels, which together form
/// the collective channel `D[√r1 a_s + √r2 a_t]`. Missing decay channels are
/// created at the given rates; existing ones must carry exactly those rates.
pub fn add_cascade(spec: &LiouvillianSpec, source: &str, target: &str, rate1: f64, rate2: f64) -> Result<LiouvillianSpec> {
    if !(rate1 > 0.0 && rate2 > 0.0 && rate1.is_finite() && rate2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cascade rates must be positive, got ({rate1}, {rate2})"
        )));
    }
    let s = spec.registry.index(source)?;
    let t = spec.registry.index(target)?;
    if s == t {
        return Err(Error::InvalidParameter("cascade source and target must differ".into()));
    }
    let n = spec.n_modes();
    let mut dissipators = spec.dissipators.clone();
    let mut channel_for = |mode: usize, rate: f64| -> Result<usize> {
        match dissipators.find_decay(mode) {
            Some(k) => {
                let existing = dissipators.rates[(k, k)].re;
                if (existing - rate).abs() > 1e-12 * (1.0 + rate) {
                    return Err(Error::InvalidParameter(format!(
                        "decay channel of {:?} has rate {existing}, cascade expects {rate}",
                        spec.registry.modes()[mode].label
                    )));
                }
                if dissipators.nbar[k] > 0.0 {
                    return Err(Error::InvalidParameter("cascaded channels must be zero temperature".into()));
                }
                Ok(k)
            }
            None => dissipators.add_decay(mode, rate, 0.0),
        }
    };
    let ks = channel_for(s, rate1)?;
    let kt = channel_for(t, rate2)?;
    let cross = (rate1 * rate2).sqrt();
    dissipators.set_cross_rate(ks, kt, Complex64::new(cross, 0.0))?;

    let mut shift = QuadraticHamiltonian::zero(n);
    // (√/2i) a_t† a_s + h.c. == (√/2i)(a_t† a_s - a_s† a_t)
    shift.add_product(Complex64::new(0.0, -cross / 2.0), Ladder::Create(t), Ladder::Annihilate(s));
    LiouvillianSpec::new(spec.registry.clone(), spec.hamiltonian.try_add(&shift)?, dissipators)
}

/// Drift and diffusion over quadratures `(q1, p1, ...)` in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub drift: RMatrix,
    pub diffusion: RMatrix,
    pub registry: ModeRegistry,
}

impl DriftDiffusion {
    /// Mean drift over the doubled ladder basis: `d<v>/dt = K <v>`.
    pub fn complex_drift(&self) -> CMatrix {
        let t = ladder_transform(self.registry.len());
        let s = self.drift.map(|x| Complex64::new(x, 0.0));
        &t * s * t.adjoint()
    }

    pub fn spectral_abscissa(&self) -> Result<f64> {
        numerics::spectral_abscissa(&self.drift)
    }
}

/// Compile the generator into `d<r>/dt = S<r>` and `dV/dt = SV + VSᵀ + D`.
pub fn build_drift_diffusion(spec: &LiouvillianSpec) -> Result<DriftDiffusion> {
    spec.validate()?;
    let n = spec.n_modes();
    let omega = symplectic_form(n);
    let hq = spec.hamiltonian.quadrature_hessian();
    let p = spec.dissipators.diffusion_kernel();
    let p_re = p.map(|z| z.re);
    let p_im = p.map(|z| z.im);
    let drift = &omega * (hq - p_im);
    let d = &omega * p_re * omega.transpose();
    let diffusion = (&d + d.transpose()) * 0.5;
    Ok(DriftDiffusion { drift, diffusion, registry: spec.registry.clone() })
}

/// Quadrature covariance `V` and mean `<r>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    pub covariance: RMatrix,
    pub mean: DVector<f64>,
    pub registry: ModeRegistry,
}

/// Heisenberg-admissibility diagnostics of a covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    /// Smallest eigenvalue of `V + iΩ/2`.
    pub min_eigenvalue: f64,
    /// `det(2V)`; at least 1 for physical states, 1 for pure ones.
    pub purity_det: f64,
}

impl Physicality {
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= -PHYSICALITY_TOL && self.purity_det >= 1.0 - PHYSICALITY_TOL
    }
}

impl fmt::Display for Physicality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "min eig(V + iΩ/2) = {:.3e}, det(2V) = {:.6}", self.min_eigenvalue, self.purity_det)
    }
}

impl CovarianceState {
    pub fn new(covariance: RMatrix, mean: DVector<f64>, registry: ModeRegistry) -> Result<Self> {
        let dim = 2 * registry.len();
        if covariance.shape() != (dim, dim) || mean.len() != dim {
            return Err(Error::InvalidParameter(format!("covariance must be {dim}x{dim} with a {dim}-vector mean")));
        }
        if max_abs(&(&covariance - covariance.transpose())) > 1e-12 * (1.0 + max_abs(&covariance)) {
            return Err(Error::InvalidParameter("covariance is not symmetric".into()));
        }
        Ok(Self { covariance, mean, registry })
    }

    pub fn vacuum(registry: ModeRegistry) -> Self {
        let dim = 2 * registry.len();
        Self { covariance: RMatrix::identity(dim, dim) * 0.5, mean: DVector::zeros(dim), registry }
    }

    pub fn physicality(&self) -> Physicality {
        let n = self.registry.len();
        let omega = symplectic_form(n);
        let m = CMatrix::from_fn(2 * n, 2 * n, |i, j| Complex64::new(self.covariance[(i, j)], 0.5 * omega[(i, j)]));
        let min_eigenvalue = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        let purity_det = (&self.covariance * 2.0).determinant();
        Physicality { min_eigenvalue, purity_det }
    }

    /// Second moments `<ξ_α ξ_β>` over the doubled ladder basis
    /// `(a1, a1†, ...)`.
    pub fn complex_moments(&self) -> CMatrix {
        complex_moments(self)
    }
}

/// Steady state of a stable network. The mean vanishes because the
/// linearized generators carry no coherent drive.
pub fn steady_state(spec: &LiouvillianSpec) -> Result<CovarianceState> {
    let dd = build_drift_diffusion(spec)?;
    let v = numerics::solve_lyapunov(&dd.drift, &dd.diffusion)?;
    let state = CovarianceState::new(v, DVector::zeros(2 * spec.n_modes()), spec.registry.clone())?;
    let phys = state.physicality();
    if !phys.is_physical() {
        return Err(Error::NumericalFailure(format!("steady state is not physical: {phys}")));
    }
    Ok(state)
}

/// `<ξ_α ξ_β> = T (V + iΩ/2 + m mᵀ) Tᵀ` over the doubled ladder basis.
pub fn complex_moments(state: &CovarianceState) -> CMatrix {
    let n = state.registry.len();
    let omega = symplectic_form(n);
    let mm = &state.mean * state.mean.transpose();
    let raw = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        Complex64::new(state.covariance[(i, j)] + mm[(i, j)], 0.5 * omega[(i, j)])
    });
    let t = ladder_transform(n);
    &t * raw * t.transpose()
}
