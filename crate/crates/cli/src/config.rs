//! Run configuration: built-in defaults, optional JSON config file, and
//! command-line overrides, in increasing order of precedence.

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fully resolved configuration. Serialized by `--print-defaults`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub omega: f64,
    pub kappa_q: f64,
    pub kappa_p: f64,
    pub t0: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub shots: u64,
    pub n_traj: u64,
    pub seed: u64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    pub rel_offsets: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let omega_ep = (epsense_core::REF_KAPPA_P - epsense_core::REF_KAPPA_Q) / 4.0;
        Self {
            omega: omega_ep,
            kappa_q: epsense_core::REF_KAPPA_Q,
            kappa_p: epsense_core::REF_KAPPA_P,
            t0: 0.0,
            t_max: 2.0,
            n_points: 81,
            shots: epsense_core::estimation::DEFAULT_SHOTS,
            n_traj: 10_000,
            seed: 42,
            omega_min: 0.0,
            omega_max: 2.0 * omega_ep,
            n_omega: 201,
            rel_offsets: epsense_core::estimation::DEFAULT_REL_OFFSETS.to_vec(),
        }
    }
}

/// Partial configuration as read from a JSON file. Unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub omega: Option<f64>,
    pub kappa_q: Option<f64>,
    pub kappa_p: Option<f64>,
    pub t0: Option<f64>,
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
    pub shots: Option<u64>,
    pub n_traj: Option<u64>,
    pub seed: Option<u64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub n_omega: Option<usize>,
    pub rel_offsets: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            let file: FileConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
            cfg.apply(&file);
        }
        Ok(cfg)
    }

    fn apply(&mut self, f: &FileConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &f.$field { self.$field = v.clone(); })*
            };
        }
        take!(omega, kappa_q, kappa_p, t0, t_max, n_points, shots, n_traj, seed,
              omega_min, omega_max, n_omega, rel_offsets);
    }
}
