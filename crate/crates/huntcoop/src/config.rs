//! Plain-text `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Keys are the model parameter and integrator setting names; command-line
//! flags override file values.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::model::ModelParams;

/// Parsed key/value assignments, insertion-order independent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|e| Error::Parse(format!("key `{key}`: bad number `{s}`: {e}"))),
        }
    }

    /// Model parameters: file values where present, the built-in defaults
    /// otherwise, then per-field overrides on top.
    pub fn model_params(&self, overrides: &ParamOverrides) -> Result<ModelParams> {
        let defaults = ModelParams::default();
        ModelParams::new(
            overrides.a.or(self.get_f64("a")?).unwrap_or(defaults.a()),
            overrides.b.or(self.get_f64("b")?).unwrap_or(defaults.b()),
            overrides.c.or(self.get_f64("c")?).unwrap_or(defaults.c()),
            overrides.d.or(self.get_f64("d")?).unwrap_or(defaults.d()),
            overrides.alpha.or(self.get_f64("alpha")?).unwrap_or(defaults.alpha()),
        )
    }

    /// Integrator settings with the same precedence.
    pub fn integrator(&self, overrides: &IntegratorOverrides) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::default();
        if let Some(m) = overrides.method.as_deref().or_else(|| self.get("method")) {
            cfg.method = m.parse()?;
        }
        if let Some(x) = overrides.dt.or(self.get_f64("dt")?) {
            cfg.dt = x;
        }
        if let Some(x) = overrides.rel_tol.or(self.get_f64("rel_tol")?) {
            cfg.rel_tol = x;
        }
        if let Some(x) = overrides.abs_tol.or(self.get_f64("abs_tol")?) {
            cfg.abs_tol = x;
        }
        if let Some(x) = overrides.t_end.or(self.get_f64("t_end")?) {
            cfg.t_end = x;
        }
        if let Some(x) = self.get_f64("max_steps")? {
            cfg.max_steps = x as usize;
        }
        if let Some(x) = overrides.extinction_threshold.or(self.get_f64("extinction_threshold")?)
        {
            cfg.extinction_threshold = x;
        }
        if let Some(x) = overrides.convergence_tol.or(self.get_f64("convergence_tol")?) {
            cfg.convergence_tol = x;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Command-line overrides for model parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParamOverrides {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub alpha: Option<f64>,
}

/// Command-line overrides for integrator settings.
#[derive(Debug, Clone, Default)]
pub struct IntegratorOverrides {
    pub method: Option<String>,
    pub dt: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub t_end: Option<f64>,
    pub extinction_threshold: Option<f64>,
    pub convergence_tol: Option<f64>,
}
