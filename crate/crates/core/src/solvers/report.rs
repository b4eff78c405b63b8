//! Solver output and its JSON form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    compute_masses, el_residual, energy_i_mu, lagrange_lambda, multiplier_balance_relative, pohozaev_relative,
};
use crate::grid::RadialField;
use crate::params::ModelParams;

/// Relative dead band for node counting.
pub const NODE_DEAD_BAND: f64 = 1e-10;

/// Label attached to node-indexed excited states.
pub const SHOOTING_SURROGATE: &str = "node-count shooting surrogate (not a genus-indexed minimax level)";

/// A solution with its diagnostics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub profile: RadialField,
    pub energy: f64,
    pub pohozaev_residual: f64,
    pub lambda: f64,
    pub mass: f64,
    pub mu_schedule_used: Vec<f64>,
    pub iterations_total: usize,
    pub converged: bool,
    pub node_count: usize,
    pub el_residual: f64,
    pub multiplier_balance: f64,
    /// Final `K_mu` of each continuation stage.
    pub stage_energies: Vec<f64>,
    pub descent_residual: f64,
    pub label: Option<&'static str>,
}

impl SolveReport {
    /// Diagnostics of `profile` under `params`; bookkeeping fields start empty.
    pub fn evaluate(profile: RadialField, params: &ModelParams, dead_band: f64) -> Result<Self> {
        let m = compute_masses(&profile, params);
        let lambda = lagrange_lambda(&m, params)?;
        Ok(Self {
            energy: energy_i_mu(&m, params),
            pohozaev_residual: pohozaev_relative(&m, params),
            lambda,
            mass: m.mass,
            mu_schedule_used: Vec::new(),
            iterations_total: 0,
            converged: false,
            node_count: profile.sign_changes(dead_band),
            el_residual: el_residual(&profile, lambda, params),
            multiplier_balance: multiplier_balance_relative(&m, params)?,
            stage_energies: Vec::new(),
            descent_residual: f64::NAN,
            label: None,
            profile,
        })
    }

    pub fn to_json(&self, profile_path: &str) -> ReportJson {
        ReportJson {
            profile_path: profile_path.to_string(),
            energy: self.energy,
            pohozaev_residual: self.pohozaev_residual,
            lambda: self.lambda,
            mass: self.mass,
            mu_schedule_used: self.mu_schedule_used.clone(),
            iterations_total: self.iterations_total,
            converged: self.converged,
            node_count: self.node_count,
            label: self.label.map(str::to_string),
        }
    }
}

/// Serialized report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub profile_path: String,
    pub energy: f64,
    pub pohozaev_residual: f64,
    pub lambda: f64,
    pub mass: f64,
    pub mu_schedule_used: Vec<f64>,
    pub iterations_total: usize,
    pub converged: bool,
    pub node_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ReportJson {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
