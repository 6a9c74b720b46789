//! Run configuration: one JSON document per run.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "command": "sweep",
//!   "preset": "baseline",
//!   "params": { "r": 0.5 },
//!   "options": { "param": "L", "range": [-1, 1], "n": 2001 }
//! }
//! ```
//!
//! `params` overrides the named preset. Unset options take their defaults,
//! and the summary of every run embeds the fully expanded config.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codim2::CurveKind;
use crate::error::{Error, Result};
use crate::integrate::SimOptions;
use crate::model::{ParamName, Parameters, State};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Simulate,
    Equilibria,
    Sweep,
    Curve,
    Scan,
    Threshold,
    Percapita,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Simulate => "simulate",
            CommandName::Equilibria => "equilibria",
            CommandName::Sweep => "sweep",
            CommandName::Curve => "curve",
            CommandName::Scan => "scan",
            CommandName::Threshold => "threshold",
            CommandName::Percapita => "percapita",
        }
    }
}

impl FromStr for CommandName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// The coexistence parameter set.
    #[default]
    Baseline,
    /// The finite-time extinction parameter set, with `L = 0.1`.
    Extinction,
}

impl Preset {
    pub fn parameters(self) -> Parameters {
        match self {
            Preset::Baseline => Parameters::baseline(),
            Preset::Extinction => Parameters::extinction_baseline(0.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            json: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema: u32,
    pub command: CommandName,
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub options: Value,
    #[serde(default)]
    pub formats: Formats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateOptions {
    pub ic: [f64; 3],
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub eps_ext: f64,
    pub conv_window: f64,
    pub conv_tol: f64,
    pub max_step: f64,
    /// Convergence tolerance for the outcome classification.
    pub outcome_tol: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        let d = SimOptions::default();
        SimulateOptions {
            ic: [2.0, 1.0, 3.0],
            t_end: d.t_end,
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            eps_ext: d.eps_ext,
            conv_window: d.conv_window,
            conv_tol: d.conv_tol,
            max_step: d.max_step,
            outcome_tol: 1e-3,
        }
    }
}

impl SimulateOptions {
    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            t_end: self.t_end,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            eps_ext: self.eps_ext,
            conv_window: self.conv_window,
            conv_tol: self.conv_tol,
            max_step: self.max_step,
        }
    }

    pub fn initial_state(&self) -> State {
        State::from_array(self.ic)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriaOptions {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub param: ParamName,
    pub range: [f64; 2],
    pub n: usize,
    pub transversality: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            param: ParamName::L,
            range: [-1.0, 1.0],
            n: 2001,
            transversality: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveOptions {
    pub kind: CurveKind,
    pub p1: ParamName,
    pub p2: ParamName,
    pub start: [f64; 2],
    pub steps: usize,
    /// Seed for the independent zero-Hopf solve on the predator-free
    /// equilibrium, if wanted.
    pub zh_seed: Option<[f64; 2]>,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            kind: CurveKind::Hopf,
            p1: ParamName::L,
            p2: ParamName::A0,
            start: [0.2184, 3.0],
            steps: 600,
            zh_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanOptions {
    pub l_range: [f64; 2],
    pub r_range: [f64; 2],
    pub nl: usize,
    pub nr: usize,
    pub ic: [f64; 3],
    pub t_end: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            l_range: [-1.0, 1.0],
            r_range: [0.05, 0.95],
            nl: 61,
            nr: 61,
            ic: [2.0, 1.0, 3.0],
            t_end: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdOptions {
    pub tol: f64,
    /// Samples of `h(r)` written to the CSV.
    pub n: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { tol: 1e-12, n: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PercapitaOptions {
    pub i_values: Vec<f64>,
    /// Defaults to `(0, K]` sampled from `K / n`.
    pub s_range: Option<[f64; 2]>,
    pub n: usize,
}

impl Default for PercapitaOptions {
    fn default() -> Self {
        PercapitaOptions {
            i_values: vec![0.0, 0.5, 2.0],
            s_range: None,
            n: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "options", rename_all = "snake_case")]
pub enum Command {
    Simulate(SimulateOptions),
    Equilibria(EquilibriaOptions),
    Sweep(SweepOptions),
    Curve(CurveOptions),
    Scan(ScanOptions),
    Threshold(ThresholdOptions),
    Percapita(PercapitaOptions),
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Command::Simulate(_) => CommandName::Simulate,
            Command::Equilibria(_) => CommandName::Equilibria,
            Command::Sweep(_) => CommandName::Sweep,
            Command::Curve(_) => CommandName::Curve,
            Command::Scan(_) => CommandName::Scan,
            Command::Threshold(_) => CommandName::Threshold,
            Command::Percapita(_) => CommandName::Percapita,
        }
    }
}

/// A parsed and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Parameters,
    pub command: Command,
    pub formats: Formats,
}

fn options<T: DeserializeOwned + Default>(v: &Value) -> Result<T> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("options: {e}")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        if raw.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                raw.schema
            )));
        }
        let mut params = raw.preset.parameters();
        for (name, &value) in &raw.params {
            params = params.with_unchecked(name.parse::<ParamName>()?, value);
        }
        params.validate()?;

        let o = &raw.options;
        let command = match raw.command {
            CommandName::Simulate => Command::Simulate(options(o)?),
            CommandName::Equilibria => Command::Equilibria(options(o)?),
            CommandName::Sweep => Command::Sweep(options(o)?),
            CommandName::Curve => Command::Curve(options(o)?),
            CommandName::Scan => Command::Scan(options(o)?),
            CommandName::Threshold => Command::Threshold(options(o)?),
            CommandName::Percapita => Command::Percapita(options(o)?),
        };
        let cfg = RunConfig {
            params,
            command,
            formats: raw.formats,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not need any numerical work.
    fn validate(&self) -> Result<()> {
        let p = &self.params;
        let nonneg_ic = |ic: &[f64; 3]| {
            if ic.iter().all(|v| v.is_finite() && *v >= 0.0) {
                Ok(())
            } else {
                Err(Error::InvalidInitialCondition(format!(
                    "{ic:?} must be finite and nonnegative"
                )))
            }
        };
        match &self.command {
            Command::Simulate(o) => {
                nonneg_ic(&o.ic)?;
                o.sim_options().validate()?;
                if !(o.outcome_tol > 0.0) {
                    return Err(Error::InvalidOptions("outcome_tol must be positive".into()));
                }
            }
            Command::Equilibria(_) => {}
            Command::Sweep(o) => {
                if !(o.range[0] < o.range[1]) {
                    return Err(Error::EmptyRange {
                        lo: o.range[0],
                        hi: o.range[1],
                    });
                }
                if o.n < 3 {
                    return Err(Error::InvalidOptions(format!(
                        "sweep needs n >= 3, got {}",
                        o.n
                    )));
                }
                p.with(o.param, o.range[0])?;
                p.with(o.param, o.range[1])?;
            }
            Command::Curve(o) => {
                if o.p1 == o.p2 {
                    return Err(Error::InvalidOptions(format!(
                        "p1 and p2 are both {}",
                        o.p1
                    )));
                }
                if o.steps == 0 {
                    return Err(Error::InvalidOptions("steps must be positive".into()));
                }
            }
            Command::Scan(o) => {
                nonneg_ic(&o.ic)?;
                SimOptions::with_t_end(o.t_end).validate()?;
                if o.nl == 0 || o.nr == 0 {
                    return Err(Error::InvalidOptions(
                        "grid needs at least one cell per axis".into(),
                    ));
                }
                for (lo, hi) in [(o.l_range[0], o.l_range[1]), (o.r_range[0], o.r_range[1])] {
                    if !(lo < hi) {
                        return Err(Error::EmptyRange { lo, hi });
                    }
                }
                for v in o.l_range {
                    p.with(ParamName::L, v)?;
                }
                for v in o.r_range {
                    p.with(ParamName::R, v)?;
                }
            }
            Command::Threshold(o) => {
                if !(o.tol > 0.0) || o.n < 2 {
                    return Err(Error::InvalidOptions(
                        "threshold needs tol > 0 and n >= 2".into(),
                    ));
                }
            }
            Command::Percapita(o) => {
                let [lo, hi] = o.s_range.unwrap_or([p.k / o.n.max(1) as f64, p.k]);
                if !(lo > 0.0 && lo < hi && hi <= p.k) {
                    return Err(Error::InvalidOptions(format!(
                        "S range [{lo}, {hi}] must lie in (0, K = {}]",
                        p.k
                    )));
                }
                if o.n < 2 {
                    return Err(Error::InvalidOptions("percapita needs n >= 2".into()));
                }
                if o.i_values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidOptions(
                        "I values must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Fully expanded config that parses back to `self`.
    pub fn to_raw(&self) -> RawConfig {
        let tagged = serde_json::to_value(&self.command).expect("command serializes");
        let params = ParamName::ALL
            .iter()
            .map(|&n| (n.as_str().to_string(), self.params.get(n)))
            .collect();
        RawConfig {
            schema: SCHEMA_VERSION,
            command: self.command.name(),
            preset: Preset::Baseline,
            params,
            options: tagged.get("options").cloned().unwrap_or(Value::Null),
            formats: self.formats,
        }
    }
}
