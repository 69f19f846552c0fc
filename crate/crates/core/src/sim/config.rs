//! Scenario configuration, mirrored one-to-one by the JSON config files.

use super::SimError;
use crate::seqmat::{construct_peg, read_matrix, SpreadingMatrix};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// How the receiver obtains the slot load state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadModeConfig {
    /// Energy detector with threshold `tau_e_multiplier * K * noise_var`.
    EnergyDetect,
    /// Perfect load state from the ground-truth activity.
    Oracle,
}

/// Receiver variant under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineMode {
    /// Two-stage iterative detection with the configured load mode.
    Full,
    /// Cover decoder plus one MPA pass, no BP feedback, no pruning.
    NoOuterIteration,
    /// Two-stage iterative detection with oracle load states.
    OracleLoad,
}

/// Where the spreading matrix comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixSource {
    /// Load from a matrix file.
    File { path: String },
    /// Progressive-edge-growth construction at the scenario dimensions.
    Construct { seed: u64 },
}

fn default_tau_e_multiplier() -> f64 {
    1.55
}
fn default_t_mpa() -> usize {
    5
}
fn default_t_bp() -> usize {
    5
}
fn default_t_outer() -> usize {
    3
}
fn default_load_mode() -> LoadModeConfig {
    LoadModeConfig::EnergyDetect
}
fn default_baseline_mode() -> BaselineMode {
    BaselineMode::Full
}

/// Full description of one Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Coexisting users `N`.
    pub users: usize,
    /// Time-slots `L`.
    pub slots: usize,
    /// Column weight `w_c` of the spreading matrix.
    pub col_weight: usize,
    /// Packet length `K` in symbols.
    pub packet_len: usize,
    /// PSK order `M`.
    pub psk_order: usize,
    /// Sparsity grid.
    pub lambdas: Vec<f64>,
    /// SNR grid in dB, with `SNR = 10 log10(1 / noise_var)` at unit symbol
    /// energy.
    pub snrs_db: Vec<f64>,
    /// Trials per (lambda, SNR) point.
    pub trials: usize,
    /// Master seed; per-trial seeds are derived by counter splitting.
    pub seed: u64,
    #[serde(default = "default_load_mode")]
    pub load_mode: LoadModeConfig,
    #[serde(default = "default_baseline_mode")]
    pub baseline_mode: BaselineMode,
    pub matrix: MatrixSource,
    /// Energy threshold rule: `tau_E = multiplier * K * noise_var`.
    #[serde(default = "default_tau_e_multiplier")]
    pub tau_e_multiplier: f64,
    #[serde(default = "default_t_mpa")]
    pub t_mpa: usize,
    #[serde(default = "default_t_bp")]
    pub t_bp: usize,
    #[serde(default = "default_t_outer")]
    pub t_outer: usize,
}

impl ScenarioConfig {
    /// Parses a JSON config file.
    pub fn from_json_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks shared by all entry points.
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("users", self.users),
            ("slots", self.slots),
            ("packet_len", self.packet_len),
            ("trials", self.trials),
            ("t_mpa", self.t_mpa),
            ("t_bp", self.t_bp),
            ("t_outer", self.t_outer),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(SimError::Config(format!("{name} must be positive")));
            }
        }
        if self.psk_order < 2 {
            return Err(SimError::Config("psk_order must be at least 2".into()));
        }
        if self.lambdas.is_empty() || self.snrs_db.is_empty() {
            return Err(SimError::Config(
                "lambda and SNR grids must be non-empty".into(),
            ));
        }
        for &lambda in &self.lambdas {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(SimError::Config(format!("lambda {lambda} not in [0, 1]")));
            }
            if (lambda * self.users as f64).round() < 1.0 {
                return Err(SimError::Config(format!(
                    "lambda {lambda} rounds to zero active users"
                )));
            }
        }
        if self.tau_e_multiplier <= 0.0 {
            return Err(SimError::Config("tau_e_multiplier must be positive".into()));
        }
        Ok(())
    }

    /// Builds or loads the spreading matrix and checks it fits the scenario.
    pub fn resolve_matrix(&self) -> Result<SpreadingMatrix, SimError> {
        let matrix = match &self.matrix {
            MatrixSource::File { path } => read_matrix(Path::new(path))?,
            MatrixSource::Construct { seed } => {
                construct_peg(self.slots, self.users, self.col_weight, *seed)?
            }
        };
        if matrix.rows() != self.slots || matrix.cols() != self.users {
            return Err(SimError::Config(format!(
                "matrix is {}x{}, scenario expects {}x{}",
                matrix.rows(),
                matrix.cols(),
                self.slots,
                self.users
            )));
        }
        Ok(matrix)
    }

    /// Noise variance of an SNR point at unit symbol energy.
    pub fn noise_var(&self, snr_db: f64) -> f64 {
        10f64.powf(-snr_db / 10.0)
    }

    /// Exact active-user count at a sparsity point.
    pub fn active_count(&self, lambda: f64) -> usize {
        (lambda * self.users as f64).round() as usize
    }
}
