//! Scenario files: one scenario per TOML document.
//!
//! ```toml
//! b = 1.5
//! n = 300
//! tau = 1e-3
//! t_end = 5.0
//! ic.kind = "stationary"
//! ic.n_inf = 0.1924
//! outputs.snapshot_times = [1.0, 5.0]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::delay::delay_steps;
use crate::error::{Error, Result};
use crate::grid::{Grid, ModelParams};
use crate::solver::{NegativeDensityPolicy, Scheme, DEFAULT_BLOWUP_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `sigma0` is the standard deviation.
    Gaussian {
        v0: f64,
        sigma0: f64,
    },
    Stationary {
        n_inf: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantConfig {
    pub d: f64,
    pub gamma: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub rate_every: usize,
    pub snapshot_times: Vec<f64>,
    pub entropy: bool,
    pub energy: bool,
    /// Reference rate for the entropy; defaults to the smallest stationary rate.
    pub entropy_n_inf: Option<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            rate_every: 1,
            snapshot_times: Vec::new(),
            entropy: false,
            energy: false,
            entropy_n_inf: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub v_min: f64,
    pub v_reset: f64,
    pub v_fire: f64,
    pub n: usize,
    pub tau: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub ic: InitialCondition,
    pub variant: Option<VariantConfig>,
    pub outputs: OutputConfig,
    pub negative_density: NegativeDensityPolicy,
    pub blowup_threshold: f64,
}

impl ScenarioConfig {
    /// Base-model defaults on `[-4, 2]` with `V_R = 1`.
    pub fn new(n: usize, tau: f64, t_end: f64, ic: InitialCondition) -> Self {
        ScenarioConfig {
            params: ModelParams::default(),
            v_min: -4.0,
            v_reset: 1.0,
            v_fire: 2.0,
            n,
            tau,
            t_end,
            scheme: Scheme::SemiImplicit,
            ic,
            variant: None,
            outputs: OutputConfig::default(),
            negative_density: NegativeDensityPolicy::Warn,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.v_min, self.v_reset, self.v_fire, self.n)
    }

    /// Number of time steps, `t_end/τ` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.tau).round().max(1.0) as usize
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))?;
        raw.into_config()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    /// All problems at once, each prefixed with the offending key.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut push = |key: &str, msg: String| errs.push(format!("{key}: {msg}"));
        for (key, v) in [
            ("a0", self.params.a0),
            ("a1", self.params.a1),
            ("b", self.params.b),
            ("v_ext", self.params.v_ext),
        ] {
            if !v.is_finite() {
                push(key, format!("must be finite, got {v}"));
            }
        }
        if !(self.params.a0 > 0.0) {
            push("a0", format!("must be positive, got {}", self.params.a0));
        }
        if self.n < 3 {
            push("n", format!("need at least 3 cells, got {}", self.n));
        } else if let Err(e) = self.grid() {
            push("n", e.to_string());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            push("tau", format!("must be positive, got {}", self.tau));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            push("t_end", format!("must be positive, got {}", self.t_end));
        }
        match self.ic {
            InitialCondition::Gaussian { v0, sigma0 } => {
                if !v0.is_finite() {
                    push("ic.v0", format!("must be finite, got {v0}"));
                }
                if !(sigma0 > 0.0 && sigma0.is_finite()) {
                    push("ic.sigma0", format!("must be positive, got {sigma0}"));
                }
            }
            InitialCondition::Stationary { n_inf } => {
                if !(n_inf > 0.0 && n_inf.is_finite()) {
                    push("ic.n_inf", format!("must be positive, got {n_inf}"));
                }
            }
        }
        if let Some(v) = self.variant {
            if !(v.gamma > 0.0 && v.gamma.is_finite()) {
                push(
                    "variant.gamma",
                    format!("must be positive, got {}", v.gamma),
                );
            }
            if !(v.r0 >= 0.0 && v.r0 < 1.0) {
                push("variant.r0", format!("must lie in [0, 1), got {}", v.r0));
            }
            if self.tau > 0.0 {
                if let Err(e) = delay_steps(v.d, self.tau) {
                    push("variant.d", e.to_string());
                }
            }
        }
        if self.outputs.rate_every == 0 {
            push("outputs.rate_every", "must be at least 1".into());
        }
        for &ts in &self.outputs.snapshot_times {
            if !(ts >= 0.0 && ts <= self.t_end) {
                push(
                    "outputs.snapshot_times",
                    format!("{ts} is outside [0, t_end = {}]", self.t_end),
                );
            }
        }
        if let Some(r) = self.outputs.entropy_n_inf {
            if !(r > 0.0) {
                push(
                    "outputs.entropy_n_inf",
                    format!("must be positive, got {r}"),
                );
            }
        }
        if !(self.blowup_threshold > 0.0) {
            push(
                "blowup_threshold",
                format!("must be positive, got {}", self.blowup_threshold),
            );
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    a0: Option<f64>,
    a1: Option<f64>,
    b: Option<f64>,
    v_ext: Option<f64>,
    v_min: Option<f64>,
    v_reset: Option<f64>,
    v_fire: Option<f64>,
    n: Option<i64>,
    tau: Option<f64>,
    t_end: Option<f64>,
    scheme: Option<String>,
    ic: Option<RawIc>,
    variant: Option<RawVariant>,
    outputs: Option<RawOutputs>,
    negative_density: Option<String>,
    blowup_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIc {
    kind: Option<String>,
    v0: Option<f64>,
    sigma0: Option<f64>,
    n_inf: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariant {
    d: Option<f64>,
    gamma: Option<f64>,
    r0: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    rate_every: Option<i64>,
    snapshot_times: Option<Vec<f64>>,
    entropy: Option<bool>,
    energy: Option<bool>,
    entropy_n_inf: Option<f64>,
}

impl RawConfig {
    fn into_config(self) -> Result<ScenarioConfig> {
        let mut errs = Vec::new();
        let mut require = |key: &str, v: Option<f64>| {
            if v.is_none() {
                errs.push(format!("{key}: required"));
            }
            v.unwrap_or(f64::NAN)
        };
        let tau = require("tau", self.tau);
        let t_end = require("t_end", self.t_end);
        let n = match self.n {
            None => {
                errs.push("n: required".into());
                0
            }
            Some(n) if n < 3 => {
                errs.push(format!("n: need at least 3 cells, got {n}"));
                0
            }
            Some(n) => n as usize,
        };
        let scheme = match self.scheme.as_deref() {
            None | Some("semi_implicit") => Scheme::SemiImplicit,
            Some("explicit") => Scheme::Explicit,
            Some(other) => {
                errs.push(format!(
                    "scheme: expected \"explicit\" or \"semi_implicit\", got {other:?}"
                ));
                Scheme::SemiImplicit
            }
        };
        let ic = match self.ic {
            None => {
                errs.push("ic.kind: required".into());
                InitialCondition::Gaussian {
                    v0: 0.0,
                    sigma0: 1.0,
                }
            }
            Some(raw) => match raw.kind.as_deref() {
                Some("gaussian") => {
                    if raw.n_inf.is_some() {
                        errs.push("ic.n_inf: only used with ic.kind = \"stationary\"".into());
                    }
                    let v0 = raw.v0.unwrap_or_else(|| {
                        errs.push("ic.v0: required for a gaussian initial condition".into());
                        f64::NAN
                    });
                    let sigma0 = raw.sigma0.unwrap_or_else(|| {
                        errs.push("ic.sigma0: required for a gaussian initial condition".into());
                        f64::NAN
                    });
                    InitialCondition::Gaussian { v0, sigma0 }
                }
                Some("stationary") => {
                    if raw.v0.is_some() || raw.sigma0.is_some() {
                        errs.push("ic.v0/ic.sigma0: only used with ic.kind = \"gaussian\"".into());
                    }
                    let n_inf = raw.n_inf.unwrap_or_else(|| {
                        errs.push("ic.n_inf: required for a stationary initial condition".into());
                        f64::NAN
                    });
                    InitialCondition::Stationary { n_inf }
                }
                Some(other) => {
                    errs.push(format!(
                        "ic.kind: expected \"gaussian\" or \"stationary\", got {other:?}"
                    ));
                    InitialCondition::Gaussian {
                        v0: 0.0,
                        sigma0: 1.0,
                    }
                }
                None => {
                    errs.push("ic.kind: required".into());
                    InitialCondition::Gaussian {
                        v0: 0.0,
                        sigma0: 1.0,
                    }
                }
            },
        };
        let variant = self.variant.map(|v| VariantConfig {
            d: v.d.unwrap_or(0.0),
            gamma: v.gamma.unwrap_or_else(|| {
                errs.push("variant.gamma: required".into());
                f64::NAN
            }),
            r0: v.r0.unwrap_or(0.0),
        });
        let mut outputs = OutputConfig::default();
        if let Some(o) = self.outputs {
            match o.rate_every {
                Some(k) if k < 1 => {
                    errs.push(format!("outputs.rate_every: must be at least 1, got {k}"))
                }
                Some(k) => outputs.rate_every = k as usize,
                None => {}
            }
            outputs.snapshot_times = o.snapshot_times.unwrap_or_default();
            outputs.entropy = o.entropy.unwrap_or(false);
            outputs.energy = o.energy.unwrap_or(false);
            outputs.entropy_n_inf = o.entropy_n_inf;
        }
        let negative_density = match self.negative_density.as_deref() {
            None | Some("warn") => NegativeDensityPolicy::Warn,
            Some("abort") => NegativeDensityPolicy::Abort,
            Some(other) => {
                errs.push(format!(
                    "negative_density: expected \"warn\" or \"abort\", got {other:?}"
                ));
                NegativeDensityPolicy::Warn
            }
        };
        let cfg = ScenarioConfig {
            params: ModelParams {
                a0: self.a0.unwrap_or(1.0),
                a1: self.a1.unwrap_or(0.0),
                b: self.b.unwrap_or(0.0),
                v_ext: self.v_ext.unwrap_or(0.0),
            },
            v_min: self.v_min.unwrap_or(-4.0),
            v_reset: self.v_reset.unwrap_or(1.0),
            v_fire: self.v_fire.unwrap_or(2.0),
            n,
            tau,
            t_end,
            scheme,
            ic,
            variant,
            outputs,
            negative_density,
            blowup_threshold: self.blowup_threshold.unwrap_or(DEFAULT_BLOWUP_THRESHOLD),
        };
        if !errs.is_empty() {
            // report parse-level and value-level problems together
            if let Err(Error::Config(more)) = cfg.validate() {
                for m in more {
                    let key = m.split(':').next().unwrap_or("");
                    if !errs.iter().any(|e| e.starts_with(key)) {
                        errs.push(m);
                    }
                }
            }
            return Err(Error::Config(errs));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
