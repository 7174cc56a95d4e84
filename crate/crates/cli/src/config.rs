//! Run configuration: one JSON document per sweep.

use std::collections::{BTreeMap, HashSet};

use optonet::models::{ChainParams, Model1Params, Model2Params, MAX_CHAIN_PORTS};
use optonet::gaussian::LiouvillianSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Model1,
    Model2,
    Chain,
}

impl ModelKind {
    /// Parameter names accepted in `params` and `sweep[].param`.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Model1 => &["g1", "g2", "kappa", "Gamma1", "Gamma2", "gamma", "nbar"],
            ModelKind::Model2 => &["g1", "g2", "Gamma1", "Gamma2", "gamma", "nbar"],
            ModelKind::Chain => &["n_ports", "chi", "g1", "g2", "kappa", "Gamma1", "Gamma2", "gamma", "nbar"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackMode {
    Both,
    On,
    Off,
}

impl FeedbackMode {
    /// Variants in output order: off before on.
    pub fn variants(self) -> &'static [bool] {
        match self {
            FeedbackMode::Both => &[false, true],
            FeedbackMode::On => &[true],
            FeedbackMode::Off => &[false],
        }
    }
}

/// One sweep axis: either an explicit grid or a tie to another axis
/// (`{"param": "chi", "tie": "kappa"}` keeps `χ = κ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    #[default]
    Abs,
    Re,
    Im,
}

impl Part {
    fn apply(self, z: optonet::Complex64) -> f64 {
        match self {
            Part::Abs => z.norm(),
            Part::Re => z.re,
            Part::Im => z.im,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Part::Abs => "abs",
            Part::Re => "re",
            Part::Im => "im",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// Logarithmic negativity between two modes.
    LogNegativity { modes: [String; 2] },
    /// `<x y>` from the full steady state.
    Correlator {
        modes: [String; 2],
        #[serde(default)]
        part: Part,
    },
    /// Bad-cavity closed form of the model's signature correlator:
    /// `<b1 b2>` for model1, `<a2 b>` for model2.
    AdiabaticCorrelator {
        #[serde(default)]
        part: Part,
    },
}

impl Observable {
    /// Column label, e.g. `logneg(b1,b2)` or `abs<b1 b2>`.
    pub fn label(&self, model: ModelKind) -> String {
        match self {
            Observable::LogNegativity { modes } => format!("logneg({},{})", modes[0], modes[1]),
            Observable::Correlator { modes, part } => format!("{}<{} {}>", part.name(), modes[0], modes[1]),
            Observable::AdiabaticCorrelator { part } => {
                let pair = if model == ModelKind::Model2 { "a2 b" } else { "b1 b2" };
                format!("{}<{pair}>_adiabatic", part.name())
            }
        }
    }

    pub(crate) fn part_of(&self, z: optonet::Complex64) -> f64 {
        match self {
            Observable::Correlator { part, .. } | Observable::AdiabaticCorrelator { part } => part.apply(z),
            Observable::LogNegativity { .. } => z.re,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    pub outputs: Vec<Observable>,
    pub feedback: FeedbackMode,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), message: message.into() }
}

/// A concrete parameter point of one of the three models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelPoint {
    Model1(Model1Params),
    Model2(Model2Params),
    Chain(ChainParams),
}

impl ModelPoint {
    pub fn build(&self) -> optonet::Result<LiouvillianSpec> {
        match self {
            ModelPoint::Model1(p) => optonet::models::build_model1(p),
            ModelPoint::Model2(p) => optonet::models::build_model2(p),
            ModelPoint::Chain(p) => optonet::models::build_chain(p),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    /// Schema and consistency checks; errors carry the offending field path.
    pub fn validate(&self) -> Result<(), CliError> {
        let names = self.model.parameter_names();
        for (k, v) in &self.params {
            if !names.contains(&k.as_str()) {
                return Err(config_err(format!("params.{k}"), format!("unknown parameter for {:?}", self.model)));
            }
            if !v.is_finite() {
                return Err(config_err(format!("params.{k}"), "value must be finite"));
            }
        }
        for name in names {
            if !self.params.contains_key(*name) {
                return Err(config_err(format!("params.{name}"), "missing parameter"));
            }
        }

        let mut seen = HashSet::new();
        for (i, axis) in self.sweep.iter().enumerate() {
            let at = |field: &str| format!("sweep[{i}].{field}");
            if !names.contains(&axis.param.as_str()) {
                return Err(config_err(at("param"), format!("unknown parameter {:?}", axis.param)));
            }
            if !seen.insert(axis.param.as_str()) {
                return Err(config_err(at("param"), format!("{:?} swept twice", axis.param)));
            }
            match (&axis.tie, axis.values.is_empty()) {
                (Some(_), false) => return Err(config_err(at("tie"), "an axis takes either values or tie, not both")),
                (None, true) => return Err(config_err(at("values"), "grid must not be empty")),
                (Some(target), true) => {
                    let ok = self.sweep.iter().any(|a| &a.param == target && a.tie.is_none());
                    if !ok {
                        return Err(config_err(at("tie"), format!("{target:?} is not a swept axis with values")));
                    }
                }
                (None, false) => {
                    if let Some(j) = axis.values.iter().position(|v| !v.is_finite()) {
                        return Err(config_err(format!("sweep[{i}].values[{j}]"), "value must be finite"));
                    }
                }
            }
        }

        if self.outputs.is_empty() {
            return Err(config_err("outputs", "at least one observable is required"));
        }
        let base = self.point(&self.params, false).map_err(|(path, msg)| config_err(path, msg))?;
        let spec = base.build().map_err(|e| config_err("params", e.to_string()))?;
        let registry = spec.registry();
        for (i, obs) in self.outputs.iter().enumerate() {
            match obs {
                Observable::LogNegativity { modes } | Observable::Correlator { modes, .. } => {
                    for (j, m) in modes.iter().enumerate() {
                        if registry.index(m).is_err() {
                            return Err(config_err(
                                format!("outputs[{i}].modes[{j}]"),
                                format!("unknown mode {m:?}; available: {}", registry.labels().join(", ")),
                            ));
                        }
                    }
                    if matches!(obs, Observable::LogNegativity { .. }) && modes[0] == modes[1] {
                        return Err(config_err(format!("outputs[{i}].modes"), "modes must differ"));
                    }
                }
                Observable::AdiabaticCorrelator { .. } => {
                    if self.model == ModelKind::Chain {
                        return Err(config_err(format!("outputs[{i}].kind"), "no closed form for the chain"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Swept parameter names in config order (tied axes included).
    pub fn columns(&self) -> Vec<String> {
        self.sweep.iter().map(|a| a.param.clone()).collect()
    }

    /// Parameter maps for every grid point: cartesian product of the value
    /// axes in config order, first axis slowest; tied axes follow their target.
    pub fn grid(&self) -> Vec<BTreeMap<String, f64>> {
        let axes: Vec<&SweepAxis> = self.sweep.iter().filter(|a| a.tie.is_none()).collect();
        let mut points = vec![self.params.clone()];
        for axis in axes {
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for p in &points {
                for &v in &axis.values {
                    let mut q = p.clone();
                    q.insert(axis.param.clone(), v);
                    next.push(q);
                }
            }
            points = next;
        }
        for p in &mut points {
            for axis in &self.sweep {
                if let Some(target) = &axis.tie {
                    let v = p[target];
                    p.insert(axis.param.clone(), v);
                }
            }
        }
        points
    }

    /// Typed model parameters at `values`. Errors are `(field path, message)`.
    pub fn point(&self, values: &BTreeMap<String, f64>, feedback: bool) -> Result<ModelPoint, (String, String)> {
        let get = |k: &str| values[k];
        Ok(match self.model {
            ModelKind::Model1 => ModelPoint::Model1(model1_from(values, feedback)),
            ModelKind::Model2 => ModelPoint::Model2(Model2Params {
                g1: get("g1"),
                g2: get("g2"),
                cavity_decay1: get("Gamma1"),
                cavity_decay2: get("Gamma2"),
                mech_damping: get("gamma"),
                nbar: get("nbar"),
                feedback,
            }),
            ModelKind::Chain => {
                let n = get("n_ports");
                if n.fract() != 0.0 || n < 1.0 || n > MAX_CHAIN_PORTS as f64 {
                    return Err((
                        "params.n_ports".into(),
                        format!("must be an integer in 1..={MAX_CHAIN_PORTS}, got {n}"),
                    ));
                }
                ModelPoint::Chain(ChainParams { n_ports: n as usize, port: model1_from(values, feedback), chi: get("chi") })
            }
        })
    }
}

fn model1_from(values: &BTreeMap<String, f64>, feedback: bool) -> Model1Params {
    Model1Params {
        g1: values["g1"],
        g2: values["g2"],
        kappa: values["kappa"],
        cavity_decay1: values["Gamma1"],
        cavity_decay2: values["Gamma2"],
        mech_damping: values["gamma"],
        nbar: values["nbar"],
        feedback,
    }
}
