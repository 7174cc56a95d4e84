//! Configurations regenerating the published figure datasets. Grids are chosen
//! to cover the plotted ranges.

use std::collections::BTreeMap;

use crate::config::{FeedbackMode, ModelKind, Observable, Part, RunConfig, SweepAxis};
use crate::CliError;

pub const PRESETS: [&str; 6] = ["fig2a", "fig2b", "fig3", "fig4", "fig6", "fig8"];

/// `κ` family for the chain dataset; no numeric values are published for it.
pub const FIG8_KAPPAS: [f64; 3] = [0.05, 0.1, 0.5];

/// `k / denom` for `k` in `range`, each the double nearest the exact ratio.
fn ratios(range: std::ops::RangeInclusive<u32>, denom: f64) -> Vec<f64> {
    range.map(|k| k as f64 / denom).collect()
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `γ = 10⁻²`, `g1 = 0.01`, `g2 = 0.05`, `Γ1 = Γ2 = 1`, `n̄ = 0`.
fn model1_base(kappa: f64) -> BTreeMap<String, f64> {
    params(&[
        ("g1", 0.01),
        ("g2", 0.05),
        ("kappa", kappa),
        ("Gamma1", 1.0),
        ("Gamma2", 1.0),
        ("gamma", 0.01),
        ("nbar", 0.0),
    ])
}

fn axis(param: &str, values: Vec<f64>) -> SweepAxis {
    SweepAxis { param: param.into(), values, tie: None }
}

fn logneg(x: &str, y: &str) -> Observable {
    Observable::LogNegativity { modes: [x.into(), y.into()] }
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let cfg = match name {
        "fig2a" => RunConfig {
            model: ModelKind::Model1,
            params: model1_base(0.1),
            sweep: vec![axis("kappa", ratios(1..=100, 100.0))],
            outputs: vec![logneg("b1", "b2")],
            feedback: FeedbackMode::Both,
        },
        "fig2b" => RunConfig {
            model: ModelKind::Model1,
            params: model1_base(0.1),
            sweep: vec![axis("nbar", ratios(0..=80, 400.0))],
            outputs: vec![logneg("b1", "b2")],
            feedback: FeedbackMode::Both,
        },
        "fig3" => RunConfig {
            model: ModelKind::Model1,
            params: model1_base(0.1),
            sweep: vec![axis("g1", ratios(1..=20, 500.0)), axis("g2", ratios(1..=20, 200.0))],
            outputs: vec![logneg("b1", "b2")],
            feedback: FeedbackMode::Both,
        },
        "fig4" => RunConfig {
            model: ModelKind::Model1,
            params: model1_base(0.1),
            sweep: vec![axis("kappa", ratios(1..=100, 100.0))],
            outputs: vec![
                Observable::Correlator { modes: ["b1".into(), "b2".into()], part: Part::Abs },
                Observable::AdiabaticCorrelator { part: Part::Abs },
            ],
            feedback: FeedbackMode::Both,
        },
        "fig6" => RunConfig {
            model: ModelKind::Model2,
            params: params(&[
                ("g1", 0.01),
                ("g2", 0.05),
                ("Gamma1", 1.0),
                ("Gamma2", 1.0),
                ("gamma", 0.01),
                ("nbar", 0.0),
            ]),
            sweep: vec![axis("g1", ratios(1..=50, 1000.0))],
            outputs: vec![logneg("a1", "b"), logneg("a2", "b")],
            feedback: FeedbackMode::Both,
        },
        "fig8" => {
            let mut p = model1_base(0.1);
            p.insert("n_ports".into(), 10.0);
            p.insert("chi".into(), 0.1);
            RunConfig {
                model: ModelKind::Chain,
                params: p,
                sweep: vec![
                    axis("kappa", FIG8_KAPPAS.to_vec()),
                    SweepAxis { param: "chi".into(), values: vec![], tie: Some("kappa".into()) },
                ],
                outputs: (1..=10).map(|j| logneg("b_1_1", &format!("b_{j}_2"))).collect(),
                feedback: FeedbackMode::Both,
            }
        }
        other => {
            return Err(CliError::Config {
                path: "preset".into(),
                message: format!("unknown preset {other:?}; known: {}", PRESETS.join(", ")),
            })
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
