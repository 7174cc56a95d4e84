//! Closed-form correlators in the bad-cavity limit, where every cavity
//! linewidth dominates the couplings and the optical modes can be eliminated.
//!
//! These are approximations: they serve as oracles for the full Lyapunov
//! solution, not as a replacement for it. All baths are at zero temperature.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_sylvester, spectral_abscissa};

/// Ratio `Γ / max(g1, g2, κ)` below which results carry a validity warning.
pub const REGIME_RATIO: f64 = 10.0;

const SINGULAR_TOL: f64 = 1e-12;

/// Symmetric parameters: both cavities decay at `cavity_decay`, both
/// oscillators at `mech_damping`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticParams {
    pub g1: f64,
    pub g2: f64,
    pub kappa: f64,
    #[serde(rename = "Gamma")]
    pub cavity_decay: f64,
    #[serde(rename = "gamma")]
    pub mech_damping: f64,
}

impl AdiabaticParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g1", self.g1),
            ("g2", self.g2),
            ("kappa", self.kappa),
            ("gamma", self.mech_damping),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !self.cavity_decay.is_finite() || self.cavity_decay <= 0.0 {
            return Err(Error::InvalidParameter(format!("Gamma must be positive, got {}", self.cavity_decay)));
        }
        Ok(())
    }

    /// `Some(message)` when the cavity linewidth is not well separated from the couplings.
    pub fn regime_warning(&self) -> Option<String> {
        let coupling = self.g1.max(self.g2).max(self.kappa);
        (self.cavity_decay < REGIME_RATIO * coupling).then(|| {
            format!(
                "adiabatic regime questionable: Gamma = {} < {REGIME_RATIO} x max(g1, g2, kappa) = {}",
                self.cavity_decay,
                REGIME_RATIO * coupling
            )
        })
    }

    fn checked(&self) -> Result<()> {
        self.validate()?;
        if let Some(w) = self.regime_warning() {
            log::warn!("{w}");
        }
        Ok(())
    }
}

/// Shared tail `γ (Γ(g1²+g2²)·2β2/β1 + a) · β2/(β1² − 4β2²)`.
fn tail(p: &AdiabaticParams, a: Complex64, beta1: Complex64, beta2: Complex64) -> Result<Complex64> {
    let denom = beta1 * beta1 - 4.0 * beta2 * beta2;
    let scale = (beta1 * beta1).norm().max((4.0 * beta2 * beta2).norm());
    if beta1.norm() == 0.0 || denom.norm() <= SINGULAR_TOL * scale {
        return Err(Error::SingularLimit(format!(
            "β1² − 4β2² vanishes (β1 = {beta1}, β2 = {beta2})"
        )));
    }
    let gsq = p.g1 * p.g1 + p.g2 * p.g2;
    Ok(p.mech_damping * (p.cavity_decay * gsq * 2.0 * beta2 / beta1 + a) * beta2 / denom)
}

fn alpha_sq(p: &AdiabaticParams) -> f64 {
    let (g, k) = (p.cavity_decay, p.kappa);
    let (a, b) = (p.g1 * p.g1, p.g2 * p.g2);
    g * g * a * a + 2.0 * (g * g + 8.0 * k * k) * a * b + g * g * b * b
}

/// Mechanical correlator `<b1 b2>` for two cavities coupled only by the
/// beam-splitter link `κ`.
pub fn b1b2_no_feedback(p: &AdiabaticParams) -> Result<Complex64> {
    p.checked()?;
    if p.g1 * p.g2 * p.kappa == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g = p.cavity_decay;
    let a2 = alpha_sq(p);
    let alpha = a2.sqrt();
    let den = g * g + 4.0 * p.kappa * p.kappa;
    let beta1 = Complex64::new(p.mech_damping + 2.0 * g * (p.g2 * p.g2 - p.g1 * p.g1) / den, 0.0);
    let beta2 = Complex64::new(alpha / den, 0.0);
    let pre = Complex64::new(0.0, 4.0 * p.kappa * p.g1 * p.g2 / a2);
    Ok(pre * tail(p, Complex64::new(alpha, 0.0), beta1, beta2)?)
}

/// Mechanical correlator `<b1 b2>` when the first cavity output also drives
/// the second cavity (cascaded feedback).
pub fn b1b2_with_feedback(p: &AdiabaticParams) -> Result<Complex64> {
    p.checked()?;
    if p.g1 * p.g2 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (g, k) = (p.cavity_decay, p.kappa);
    let at2 = Complex64::new(alpha_sq(p), -16.0 * k * g * (p.g1 * p.g2).powi(2));
    let at = at2.sqrt();
    let den = Complex64::new(g * g + 4.0 * k * k, -4.0 * k * g);
    let beta1 = p.mech_damping + 2.0 * g * (p.g2 * p.g2 - p.g1 * p.g1) / den;
    let beta2 = at / den;
    let pre = 4.0 * Complex64::new(g, k) * p.g1 * p.g2 / at2;
    Ok(pre * tail(p, at, beta1, beta2)?)
}

/// Drift of `(a2, a2†, b, b†)` after eliminating the source cavity of the
/// mechanics-mediated network with feedback on.
pub fn model2_reduced_drift(p: &AdiabaticParams) -> DMatrix<Complex64> {
    let i = Complex64::i();
    let c = |x: f64| Complex64::new(x, 0.0);
    let (g, g1, g2) = (p.cavity_decay, p.g1, p.g2);
    let m = -(p.mech_damping / 2.0 - 2.0 * g1 * g1 / g);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c(-g / 2.0), c(0.0), -i * g2, 2.0 * i * g1,
            c(0.0), c(-g / 2.0), -2.0 * i * g1, i * g2,
            -i * g2, c(0.0), c(m), c(0.0),
            c(0.0), i * g2, c(0.0), c(m),
        ],
    )
}

/// Noise weights pairing `e^{Ct}` rows of `a2` and `b`; the correlator is
/// entry `(a2, b)` of `∫ e^{Ct} W e^{Cᵀt} dt`.
pub fn model2_noise_weights(p: &AdiabaticParams) -> DMatrix<Complex64> {
    let i = Complex64::i();
    let mut w = DMatrix::zeros(4, 4);
    w[(0, 1)] = Complex64::new(p.cavity_decay, 0.0);
    w[(0, 2)] = 2.0 * i * p.g1;
    w[(2, 3)] = Complex64::new(p.mech_damping, 0.0);
    w[(3, 1)] = -2.0 * i * p.g1;
    w[(3, 2)] = Complex64::new(4.0 * p.g1 * p.g1 / p.cavity_decay, 0.0);
    w
}

/// `<a2 b>` for the mechanics-mediated network with feedback on.
pub fn model2_a2b_with_feedback(p: &AdiabaticParams) -> Result<Complex64> {
    p.checked()?;
    let c = model2_reduced_drift(p);
    let abscissa = spectral_abscissa(&c)?;
    if abscissa >= 0.0 {
        return Err(Error::UnstableDynamics { abscissa });
    }
    let w = model2_noise_weights(p);
    let x = solve_sylvester(&c, &c.transpose(), &(-w))?;
    Ok(x[(0, 2)])
}

/// Without feedback the noises driving `a2` and `b` are independent, so the
/// correlator vanishes identically.
pub fn model2_a2b_no_feedback() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::expm;
    use approx::assert_abs_diff_eq;

    fn fig4(kappa: f64) -> AdiabaticParams {
        AdiabaticParams { g1: 0.01, g2: 0.05, kappa, cavity_decay: 1.0, mech_damping: 0.01 }
    }

    #[test]
    fn no_feedback_vanishes_without_link() {
        assert_eq!(b1b2_no_feedback(&fig4(0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let p = AdiabaticParams { g1: 0.0, ..fig4(0.1) };
        assert_eq!(b1b2_no_feedback(&p).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn feedback_survives_without_link() {
        let v = b1b2_with_feedback(&fig4(0.0)).unwrap();
        assert!(v.norm() > 0.0);
        assert!(v.norm() > b1b2_no_feedback(&fig4(1e-4)).unwrap().norm());
        let p = AdiabaticParams { g2: 0.0, ..fig4(0.1) };
        assert_eq!(b1b2_with_feedback(&p).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closed_forms_are_finite_over_kappa() {
        for i in 1..=100 {
            let k = i as f64 / 100.0;
            assert!(b1b2_no_feedback(&fig4(k)).unwrap().is_finite());
            assert!(b1b2_with_feedback(&fig4(k)).unwrap().is_finite());
        }
    }

    #[test]
    fn curves_converge_at_large_kappa() {
        let gap = |k: f64| {
            (b1b2_with_feedback(&fig4(k)).unwrap().norm() - b1b2_no_feedback(&fig4(k)).unwrap().norm()).abs()
        };
        assert!(gap(0.02) > gap(1.0));
    }

    #[test]
    fn singular_denominator_detected() {
        // β1 = 2β2 when g1 = 0 would be trivial; instead pick γ so that β1² = 4β2².
        let mut p = fig4(0.0);
        let den = p.cavity_decay.powi(2);
        let alpha = alpha_sq(&p).sqrt();
        p.mech_damping = 2.0 * alpha / den - 2.0 * p.cavity_decay * (p.g2.powi(2) - p.g1.powi(2)) / den;
        p.kappa = 0.0;
        assert!(matches!(b1b2_with_feedback(&p), Err(Error::SingularLimit(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let p = AdiabaticParams { cavity_decay: 0.0, ..fig4(0.1) };
        assert!(matches!(b1b2_no_feedback(&p), Err(Error::InvalidParameter(_))));
        let p = AdiabaticParams { g1: -1.0, ..fig4(0.1) };
        assert!(matches!(model2_a2b_with_feedback(&p), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn regime_warning_threshold() {
        assert!(fig4(0.05).regime_warning().is_none());
        assert!(fig4(0.5).regime_warning().is_some());
    }

    #[test]
    fn model2_zero_coupling_gives_zero() {
        let p = AdiabaticParams { g1: 0.0, g2: 0.03, kappa: 0.0, cavity_decay: 1.0, mech_damping: 0.01 };
        assert_abs_diff_eq!(model2_a2b_with_feedback(&p).unwrap().norm(), 0.0, epsilon = 1e-14);
        assert_eq!(model2_a2b_no_feedback(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn model2_matches_quadrature() {
        let p = AdiabaticParams { g1: 0.03, g2: 0.04, kappa: 0.0, cavity_decay: 1.0, mech_damping: 0.01 };
        let c = model2_reduced_drift(&p);
        let w = model2_noise_weights(&p);
        // Composite Simpson; the slowest rate sets the horizon.
        let rate = -spectral_abscissa(&c).unwrap();
        let t_end = 40.0 / rate;
        let n = 200_000;
        let h = t_end / n as f64;
        let step = expm(&c, h).unwrap();
        let mut y = DMatrix::<Complex64>::identity(4, 4);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let f = (&y * &w * y.transpose())[(0, 2)];
            acc += f * if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            y = &y * &step;
        }
        acc *= h / 3.0;
        let exact = model2_a2b_with_feedback(&p).unwrap();
        assert!(exact.norm() > 1e-4);
        assert!((acc - exact).norm() < 1e-6 * exact.norm().max(1e-3), "quad {acc} vs sylvester {exact}");
    }

    #[test]
    fn model2_unstable_reported() {
        let p = AdiabaticParams { g1: 0.2, g2: 0.01, kappa: 0.0, cavity_decay: 1.0, mech_damping: 0.01 };
        assert!(matches!(model2_a2b_with_feedback(&p), Err(Error::UnstableDynamics { .. })));
    }
}
