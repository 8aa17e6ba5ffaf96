//! Run configuration: one flat key-value format with dotted keys, no
//! includes. Every field has a default; unknown keys warn instead of failing
//! so configs stay forward-compatible; invalid values fail naming the key.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct GridSection {
    /// x point count, a power of two.
    pub n_x: usize,
    /// Half-width of the x domain.
    pub l_x: f64,
    /// Transverse mode count.
    pub m_y: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhysicsSection {
    pub beta: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSection {
    pub tau: f64,
    pub tol_energy: f64,
    pub tol_residual: f64,
    pub max_iters: usize,
    /// One of `gaussian`, `noisy-gaussian`, or `file:<snapshot path>`.
    pub seed_profile: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeSection {
    pub dt: f64,
    pub t_final: f64,
    /// Snapshots every this many steps (40 steps × the default dt = every
    /// 0.01 time units).
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSection {
    /// Strictly decreasing, positive.
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSection {
    pub dir: String,
    /// Persist field snapshots alongside the CSV tables.
    pub write_fields: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub flow: FlowSection,
    pub time: TimeSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            grid: GridSection { n_x: 256, l_x: 12.0, m_y: 64 },
            physics: PhysicsSection { beta: 1.0, epsilon: 0.25 },
            flow: FlowSection {
                tau: 1e-3,
                tol_energy: 1e-12,
                tol_residual: 1e-6,
                max_iters: 100_000,
                seed_profile: "gaussian".into(),
            },
            time: TimeSection { dt: 2.5e-4, t_final: 1.0, snapshot_stride: 40 },
            sweep: SweepSection { epsilons: vec![0.4, 0.2, 0.1, 0.05] },
            output: OutputSection { dir: "out".into(), write_fields: false },
        }
    }
}

fn bad(key: &str, why: &str) -> CliError {
    CliError::Validation(format!("invalid value for \"{key}\": {why}"))
}

impl SimulationConfig {
    /// Parse a config file; missing file is an error, empty file yields the
    /// defaults. Returns the config plus warnings for unknown keys.
    pub fn from_file(path: &Path) -> Result<(Self, Vec<String>)> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str(&text)
    }

    /// Parse the flat dotted-key text format.
    pub fn from_str(text: &str) -> Result<(Self, Vec<String>)> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat);

        let mut cfg = SimulationConfig::default();
        let mut warnings = Vec::new();
        for (key, value) in flat {
            if !cfg.apply(&key, &value)? {
                warnings.push(format!("unknown config key \"{key}\" ignored"));
            }
        }
        cfg.validate()?;
        Ok((cfg, warnings))
    }

    /// Set one dotted key from a TOML value. Returns false for unknown keys.
    fn apply(&mut self, key: &str, value: &toml::Value) -> Result<bool> {
        match key {
            "grid.n_x" => self.grid.n_x = as_usize(key, value)?,
            "grid.l_x" => self.grid.l_x = as_f64(key, value)?,
            "grid.m_y" => self.grid.m_y = as_usize(key, value)?,
            "physics.beta" => self.physics.beta = as_f64(key, value)?,
            "physics.epsilon" => self.physics.epsilon = as_f64(key, value)?,
            "flow.tau" => self.flow.tau = as_f64(key, value)?,
            "flow.tol_energy" => self.flow.tol_energy = as_f64(key, value)?,
            "flow.tol_residual" => self.flow.tol_residual = as_f64(key, value)?,
            "flow.max_iters" => self.flow.max_iters = as_usize(key, value)?,
            "flow.seed_profile" => self.flow.seed_profile = as_string(key, value)?,
            "time.dt" => self.time.dt = as_f64(key, value)?,
            "time.t_final" => self.time.t_final = as_f64(key, value)?,
            "time.snapshot_stride" => self.time.snapshot_stride = as_usize(key, value)?,
            "sweep.epsilons" => self.sweep.epsilons = as_f64_list(key, value)?,
            "output.dir" => self.output.dir = as_string(key, value)?,
            "output.write_fields" => self.output.write_fields = as_bool(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.n_x < 16 || !self.grid.n_x.is_power_of_two() {
            return Err(bad("grid.n_x", "must be a power of two, at least 16"));
        }
        if !(self.grid.l_x > 0.0) {
            return Err(bad("grid.l_x", "must be positive"));
        }
        if self.grid.m_y < 4 {
            return Err(bad("grid.m_y", "must be at least 4"));
        }
        if !(self.physics.epsilon > 0.0) {
            return Err(bad("physics.epsilon", "must be positive"));
        }
        if !(self.flow.tau > 0.0) {
            return Err(bad("flow.tau", "must be positive"));
        }
        if !(self.flow.tol_energy > 0.0) {
            return Err(bad("flow.tol_energy", "must be positive"));
        }
        if !(self.flow.tol_residual > 0.0) {
            return Err(bad("flow.tol_residual", "must be positive"));
        }
        if self.flow.max_iters == 0 {
            return Err(bad("flow.max_iters", "must be at least 1"));
        }
        let seed = &self.flow.seed_profile;
        if seed != "gaussian" && seed != "noisy-gaussian" && !seed.starts_with("file:") {
            return Err(bad(
                "flow.seed_profile",
                "must be gaussian, noisy-gaussian, or file:<path>",
            ));
        }
        if !(self.time.dt > 0.0) {
            return Err(bad("time.dt", "must be positive"));
        }
        if self.time.t_final < 0.0 {
            return Err(bad("time.t_final", "must be nonnegative"));
        }
        if self.time.snapshot_stride == 0 {
            return Err(bad("time.snapshot_stride", "must be at least 1"));
        }
        if self.sweep.epsilons.is_empty() {
            return Err(bad("sweep.epsilons", "must not be empty"));
        }
        if self.sweep.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(bad("sweep.epsilons", "entries must be positive"));
        }
        if self.sweep.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("sweep.epsilons", "must be strictly decreasing"));
        }
        Ok(())
    }

    pub fn flow_config(&self) -> cssr_core::FlowConfig {
        cssr_core::FlowConfig {
            tau: self.flow.tau,
            tol_energy: self.flow.tol_energy,
            tol_residual: self.flow.tol_residual,
            max_iters: self.flow.max_iters,
            seed_profile: cssr_core::SeedProfile::Gaussian, // resolved by the runner
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(inner) => flatten(&key, inner, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, "expected a number")),
    }
}

fn as_usize(key: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(bad(key, "expected a nonnegative integer")),
    }
}

fn as_bool(key: &str, v: &toml::Value) -> Result<bool> {
    match v {
        toml::Value::Boolean(b) => Ok(*b),
        _ => Err(bad(key, "expected true or false")),
    }
}

fn as_string(key: &str, v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        _ => Err(bad(key, "expected a string")),
    }
}

fn as_f64_list(key: &str, v: &toml::Value) -> Result<Vec<f64>> {
    match v {
        toml::Value::Array(items) => items.iter().map(|item| as_f64(key, item)).collect(),
        _ => Err(bad(key, "expected a list of numbers")),
    }
}
