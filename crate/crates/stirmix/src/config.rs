//! Experiment configuration: a JSON file whose every key can also be set
//! from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stirmix_core::solver::{SolverConfig, VelocityMode, DEFAULT_SNAPSHOT_TIMES};
use stirmix_core::velocity::DEFAULT_DEGENERACY_FLOOR;
use stirmix_core::GridSpec;

use crate::error::{CliError, Result};

/// Environment variable capping the number of sweep workers.
pub const WORKERS_ENV: &str = "STIRMIX_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Grid points per axis.
    pub n: usize,
    /// Data parameter for `simulate`.
    pub a: f64,
    /// Data parameters for `sweep`.
    pub a_list: Vec<f64>,
    pub t_final: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub snapshot_times: Vec<f64>,
    pub p_list: Vec<f64>,
    pub dealias: bool,
    pub stop_on_spectral_fill: bool,
    pub fill_threshold: f64,
    pub degeneracy_floor: f64,
    /// Target `‖∇u‖_{L²}` of the designed velocity.
    pub enstrophy: f64,
    /// Decay fit window; defaults to `[1, min(5, fill time)]`.
    pub fit_window: Option<[f64; 2]>,
    pub lambda: f64,
    pub kappa: f64,
    /// Per-unit-time slack of the log-gradient check.
    pub log_grad_slack: f64,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Forces one worker.
    pub serial: bool,
    pub output: PathBuf,
    pub write_snapshot_images: bool,
    pub write_snapshot_fields: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 256,
            a: 11.0 / 12.0,
            a_list: (6..=11).map(|k| k as f64 / 12.0).collect(),
            t_final: 5.2,
            cfl: 0.5,
            dt_max: 0.05,
            snapshot_times: DEFAULT_SNAPSHOT_TIMES.to_vec(),
            p_list: vec![1.0, 2.0],
            dealias: true,
            stop_on_spectral_fill: true,
            fill_threshold: 0.01,
            degeneracy_floor: DEFAULT_DEGENERACY_FLOOR,
            enstrophy: 1.0,
            fit_window: None,
            lambda: 0.5,
            kappa: 0.25,
            log_grad_slack: 0.05,
            seed: 0,
            workers: None,
            serial: false,
            output: PathBuf::from("stirmix-out"),
            write_snapshot_images: true,
            write_snapshot_fields: true,
        }
    }
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg.to_string()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        GridSpec::square(self.n).map_err(|e| CliError::Config(e.to_string()))?;
        check(self.a > 0.0 && self.a <= 1.0, "a must lie in (0, 1]")?;
        check(
            self.a_list.iter().all(|&a| a > 0.0 && a <= 1.0),
            "every entry of a_list must lie in (0, 1]",
        )?;
        check(self.p_list.contains(&1.0), "p_list must contain 1 for the log-gradient check")?;
        check(self.p_list.contains(&2.0), "p_list must contain 2 for the enstrophy budget")?;
        check(self.degeneracy_floor > 0.0, "degeneracy_floor must be positive")?;
        check(self.enstrophy > 0.0, "enstrophy must be positive")?;
        check(self.lambda > 0.0 && self.lambda <= 1.0, "lambda must lie in (0, 1]")?;
        check(self.kappa > 0.0 && self.kappa < 0.5, "kappa must lie in (0, 1/2)")?;
        check(self.log_grad_slack >= 0.0, "log_grad_slack must be non-negative")?;
        check(self.workers != Some(0), "workers must be at least 1")?;
        if let Some([t0, t1]) = self.fit_window {
            check(t1 > t0, "fit_window must satisfy t1 > t0")?;
        }
        self.solver_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::square(self.n).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            t_final: self.t_final,
            cfl: self.cfl,
            dt_max: self.dt_max,
            snapshot_times: self.snapshot_times.clone(),
            p_list: self.p_list.clone(),
            dealias: self.dealias,
            stop_on_spectral_fill: self.stop_on_spectral_fill,
            fill_threshold: self.fill_threshold,
            ..SolverConfig::default()
        }
    }

    pub fn velocity_mode(&self) -> VelocityMode {
        VelocityMode::SteepestDescent {
            degeneracy_floor: self.degeneracy_floor,
            enstrophy: self.enstrophy,
        }
    }

    /// Worker count after `serial`, `workers` and the environment cap.
    pub fn effective_workers(&self) -> usize {
        if self.serial {
            return 1;
        }
        let requested = self
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let cap = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
            .unwrap_or(usize::MAX);
        requested.min(cap).max(1)
    }

    /// SHA-256 of the configuration with the output location and worker
    /// settings cleared, so it identifies the experiment rather than the
    /// invocation.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = PathBuf::new();
        canonical.workers = None;
        canonical.serial = false;
        let text = serde_json::to_string(&canonical).expect("config serialises");
        hex(&Sha256::digest(text.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
