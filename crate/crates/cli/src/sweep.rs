//! Sweep execution. Grid points are independent; results are reassembled in
//! grid order whatever the completion order.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use optonet::analytic::{b1b2_no_feedback, b1b2_with_feedback, model2_a2b_no_feedback, model2_a2b_with_feedback, AdiabaticParams};
use optonet::entanglement::{mode_correlator, mode_log_negativity};
use optonet::gaussian::{steady_state, CovarianceState};
use optonet::{Complex64, Error};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ModelKind, ModelPoint, Observable, RunConfig};
use crate::CliError;

pub const WORKERS_ENV: &str = "OM_NET_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub params: Vec<f64>,
    pub observable: String,
    pub feedback: bool,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub quadratures: &'static str,
    pub vacuum_variance: f64,
    pub negativity_log: &'static str,
    pub time_unit: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            quadratures: "q = (a + a†)/√2, p = -i(a - a†)/√2, ordered (q1, p1, q2, p2, ...)",
            vacuum_variance: 0.5,
            negativity_log: "natural",
            time_unit: "1/Gamma1 (all rates in units of the first cavity linewidth)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub model: ModelKind,
    pub conventions: Conventions,
    pub mode_ordering: Vec<String>,
    pub columns: Vec<String>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

/// Worker count from `OM_NET_WORKERS`, else the number of logical cores.
pub fn worker_count() -> usize {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => return n,
            _ => log::warn!("ignoring {WORKERS_ENV}={v:?}: expected a positive integer"),
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::UnstableDynamics { .. } => "unstable",
        Error::SingularLimit(_) => "singular_limit",
        Error::NumericalFailure(_) => "numerical_failure",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::InvalidComposition(_) => "invalid_composition",
    }
}

fn adiabatic(point: &ModelPoint, outside_regime: &AtomicUsize) -> optonet::Result<Complex64> {
    let symmetric = |g1: f64, g2: f64, k: f64, d1: f64, d2: f64, nbar: f64, gamma: f64| {
        if d1 != d2 {
            return Err(Error::InvalidParameter("closed forms need Gamma1 = Gamma2".into()));
        }
        if nbar != 0.0 {
            return Err(Error::InvalidParameter("closed forms assume zero temperature".into()));
        }
        let ap = AdiabaticParams { g1, g2, kappa: k, cavity_decay: d1, mech_damping: gamma };
        if ap.regime_warning().is_some() {
            outside_regime.fetch_add(1, Ordering::Relaxed);
        }
        Ok(ap)
    };
    match point {
        ModelPoint::Model1(p) => {
            let ap = symmetric(p.g1, p.g2, p.kappa, p.cavity_decay1, p.cavity_decay2, p.nbar, p.mech_damping)?;
            if p.feedback {
                b1b2_with_feedback(&ap)
            } else {
                b1b2_no_feedback(&ap)
            }
        }
        ModelPoint::Model2(p) => {
            let ap = symmetric(p.g1, p.g2, 0.0, p.cavity_decay1, p.cavity_decay2, p.nbar, p.mech_damping)?;
            if p.feedback {
                model2_a2b_with_feedback(&ap)
            } else {
                ap.validate()?;
                Ok(model2_a2b_no_feedback())
            }
        }
        ModelPoint::Chain(_) => Err(Error::InvalidParameter("no closed form for the chain".into())),
    }
}

fn evaluate(
    cfg: &RunConfig,
    values: &BTreeMap<String, f64>,
    feedback: bool,
    outside_regime: &AtomicUsize,
) -> Vec<Result<f64, String>> {
    let point = match cfg.point(values, feedback) {
        Ok(p) => p,
        Err((_, msg)) => {
            log::warn!("{msg}");
            return vec![Err("invalid_parameter".into()); cfg.outputs.len()];
        }
    };
    let mut state: Option<optonet::Result<CovarianceState>> = None;
    cfg.outputs
        .iter()
        .map(|obs| {
            let value = match obs {
                Observable::AdiabaticCorrelator { .. } => adiabatic(&point, outside_regime).map(|z| obs.part_of(z)),
                Observable::LogNegativity { modes } | Observable::Correlator { modes, .. } => {
                    let st = state.get_or_insert_with(|| point.build().and_then(|spec| steady_state(&spec)));
                    match st {
                        Err(e) => Err(e.clone()),
                        Ok(st) => match obs {
                            Observable::LogNegativity { .. } => mode_log_negativity(st, &modes[0], &modes[1]),
                            _ => mode_correlator(st, &modes[0], &modes[1]).map(|z| obs.part_of(z)),
                        },
                    }
                }
            };
            value.map_err(|e| {
                log::debug!("{values:?} feedback={feedback}: {e}");
                error_tag(&e).to_string()
            })
        })
        .collect()
}

/// Evaluate every grid point × feedback variant × observable on `workers` threads.
pub fn run(cfg: &RunConfig, workers: usize) -> Result<SweepResult, CliError> {
    cfg.validate()?;
    let grid = cfg.grid();
    let variants = cfg.feedback.variants();
    let tasks: Vec<(usize, bool)> =
        (0..grid.len()).flat_map(|i| variants.iter().map(move |&fb| (i, fb))).collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let outside_regime = AtomicUsize::new(0);
    let results: Vec<Vec<Result<f64, String>>> = pool.install(|| {
        tasks.par_iter().map(|&(i, fb)| evaluate(cfg, &grid[i], fb, &outside_regime)).collect()
    });
    let outside = outside_regime.into_inner();
    if outside > 0 {
        log::warn!(
            "{outside} closed-form evaluations have Gamma < {} x max(g1, g2, kappa); the adiabatic columns are indicative there",
            optonet::analytic::REGIME_RATIO
        );
    }

    let columns = cfg.columns();
    let labels: Vec<String> = cfg.outputs.iter().map(|o| o.label(cfg.model)).collect();
    let mut rows = Vec::with_capacity(tasks.len() * labels.len());
    for (&(i, feedback), values) in tasks.iter().zip(results) {
        let params: Vec<f64> = columns.iter().map(|c| grid[i][c]).collect();
        for (label, v) in labels.iter().zip(values) {
            let (value, error) = match v {
                Ok(x) => (Some(x), None),
                Err(tag) => (None, Some(tag)),
            };
            rows.push(Row { params: params.clone(), observable: label.clone(), feedback, value, error });
        }
    }

    let base = cfg.point(&cfg.params, false).map_err(|(path, message)| CliError::Config { path, message })?;
    let spec = base.build()?;
    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        model: cfg.model,
        conventions: Conventions::default(),
        mode_ordering: spec.registry().labels().iter().map(|s| s.to_string()).collect(),
        columns: columns.clone(),
        config: cfg.clone(),
    };
    Ok(SweepResult { columns, rows, metadata })
}
