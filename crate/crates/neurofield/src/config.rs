//! Scenario files.
//!
//! A scenario is a TOML document with the sections `model`, `input`,
//! `observer` (optional) and `sim`. Unknown keys are rejected. Command-line
//! overrides `key.path=value` are applied to the parsed document before it
//! is checked, so they behave exactly like edits to the file.

use std::path::Path;

use neurofield_core::inverse::InverseConfig;
use neurofield_core::model::{
    appendix_transform, invariant_radius, reduce_sigmoid, CircularInput, ConstantInput, InputBounds, InputJet,
    InputSignal, ModelParams, OutputMap, SelectivityDistribution, SigmoidSpec, SigmoidTransform, TransformKind,
};
use neurofield_core::observer::ObserverConfig;
use neurofield_core::sim::Scenario;
use neurofield_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// The reference scenario of the reproduced figure.
pub const REFERENCE_SCENARIO: &str = include_str!("../../../scenarios/figure.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelSection,
    pub input: InputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer: Option<ObserverSection>,
    pub sim: SimSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub j0: f64,
    pub j1: f64,
    pub tau: f64,
    #[serde(default = "default_theta_nodes")]
    pub theta_nodes: usize,
    pub sigmoid: SigmoidSection,
    pub dist: DistSection,
    /// Treat the file as the activity-based model and reduce it to voltages.
    #[serde(default)]
    pub activity: bool,
}

fn default_theta_nodes() -> usize {
    neurofield_core::model::DEFAULT_THETA_NODES
}

/// Rate `s1 σ(x + h0) + s2` with `σ(x) = tanh(μ x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmoidSection {
    pub mu: f64,
    #[serde(default)]
    pub h0: f64,
    #[serde(default = "one")]
    pub s1: f64,
    #[serde(default)]
    pub s2: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSection {
    Dirac { r0: f64 },
    Nodes { r: Vec<f64>, w: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSection {
    Circular {
        epsilon: f64,
        beta: f64,
        omega: f64,
        #[serde(default)]
        i0_amp: f64,
        #[serde(default)]
        i0_omega: f64,
    },
    Constant {
        value: Vec3,
    },
}

/// `R`, either a number or `"auto"` for `R* + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusSpec {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub delta: f64,
    pub eta: f64,
    #[serde(default = "auto_radius")]
    pub r: RadiusSpec,
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

fn auto_radius() -> RadiusSpec {
    RadiusSpec::Keyword(AutoKeyword::Auto)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_end: f64,
    pub dt: f64,
    pub v0: Vec3,
    #[serde(default)]
    pub vhat0: Vec3,
}

/// The built-in input signals behind one type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnyInput {
    Circular(CircularInput),
    Constant(ConstantInput),
}

impl InputSignal for AnyInput {
    fn jet(&self, t: f64) -> InputJet {
        match self {
            AnyInput::Circular(s) => s.jet(t),
            AnyInput::Constant(s) => s.jet(t),
        }
    }

    fn bounds(&self) -> InputBounds {
        match self {
            AnyInput::Circular(s) => s.bounds(),
            AnyInput::Constant(s) => s.bounds(),
        }
    }
}

impl InputSection {
    pub fn build(&self) -> AnyInput {
        match *self {
            InputSection::Circular { epsilon, beta, omega, i0_amp, i0_omega } => {
                AnyInput::Circular(CircularInput::new(epsilon, beta, omega).with_modulation(i0_amp, i0_omega))
            }
            InputSection::Constant { value } => AnyInput::Constant(ConstantInput(value)),
        }
    }
}

/// A scenario reduced to the odd-sigmoid voltage model the library works with.
pub struct Built {
    pub scenario: Scenario,
    /// The raw input, before any reduction.
    pub raw_input: AnyInput,
    /// How the original mean potential is read off the reduced state.
    pub outputs: Vec<OutputMap>,
    pub r_star: f64,
}

impl Built {
    pub fn input(&self) -> &dyn InputSignal {
        &*self.scenario.input
    }
}

impl ScenarioFile {
    pub fn from_str_with(text: &str, origin: &str, overrides: &[String]) -> CliResult<Self> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| CliError::Config(format!("{origin}: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        ScenarioFile::deserialize(toml::Value::Table(table))
            .map_err(|e| CliError::Config(format!("{origin}: {}", e.to_string().trim_end())))
    }

    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_str_with(&text, &path.display().to_string(), overrides)
    }

    pub fn reference(overrides: &[String]) -> CliResult<Self> {
        Self::from_str_with(REFERENCE_SCENARIO, "reference scenario", overrides)
    }

    /// Model parameters as written, sigmoid reshaping included.
    pub fn model_params(&self) -> CliResult<ModelParams> {
        let m = &self.model;
        let s = &m.sigmoid;
        let sigmoid = SigmoidSpec::tanh(s.mu)?.with_transform(SigmoidTransform { s1: s.s1, s2: s.s2, h0: s.h0 });
        let dist = match &m.dist {
            DistSection::Dirac { r0 } => SelectivityDistribution::dirac(*r0)?,
            DistSection::Nodes { r, w } => SelectivityDistribution::nodes(r.clone(), w.clone())?,
        };
        Ok(ModelParams::new(m.j0, m.j1, m.tau, sigmoid, dist, m.theta_nodes)?)
    }

    /// Reduce the model and assemble the simulation scenario.
    pub fn build(&self) -> CliResult<Built> {
        let params = self.model_params()?;
        let raw = self.input.build();
        let mut outputs = Vec::new();
        let (params, input): (ModelParams, Box<dyn InputSignal + Send + Sync>) = if self.model.activity {
            let act = appendix_transform(TransformKind::ActivityToVoltage, &params, raw)?;
            outputs.push(act.output);
            let red = reduce_sigmoid(&act.params, act.input)?;
            outputs.push(red.output);
            (red.params, Box::new(red.input))
        } else {
            let red = reduce_sigmoid(&params, raw)?;
            outputs.push(red.output);
            (red.params, Box::new(red.input))
        };
        let r_star = invariant_radius(&params, &input.bounds());
        let observer = match &self.observer {
            None => None,
            Some(o) => {
                let r = match o.r {
                    RadiusSpec::Value(r) => r,
                    RadiusSpec::Keyword(AutoKeyword::Auto) => r_star + 1.0,
                };
                let mut inverse = InverseConfig::new(o.delta, o.eta, r)?;
                if let Some(tol) = o.rho_tol {
                    inverse.rho_tol = tol;
                }
                if let Some(n) = o.max_iter {
                    inverse.max_iter = n;
                }
                inverse.validate()?;
                if !(o.l >= 1.0 && o.l.is_finite()) {
                    return Err(CliError::Config("observer.l: must be at least 1".into()));
                }
                Some(ObserverConfig { inverse, l: o.l })
            }
        };
        let scenario = Scenario {
            params,
            input,
            v0_init: self.sim.v0,
            vhat0_init: self.sim.vhat0,
            observer,
            t_end: self.sim.t_end,
            dt: self.sim.dt,
        };
        scenario.validate()?;
        Ok(Built { scenario, raw_input: raw, outputs, r_star })
    }
}

/// Apply `a.b.c=value`; the value is read as a TOML value, or as a bare
/// string when it does not parse.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> CliResult<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("x = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("x").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` is malformed")));
    }
    let (last, path) = parts.split_last().expect("non-empty key");
    let mut node = table;
    for p in path {
        let entry = node.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key `{key}`: `{p}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}
