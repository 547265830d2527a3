use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use shapeflow::driver::{DriverSpec, HerglotzDriver};
use shapeflow::evolution::PsiWindow;
use shapeflow::Complex64;

use crate::error::CliError;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub m: usize,
    pub n_psi: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { m: 8, n_psi: 8 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOutputs {
    pub trajectory: String,
    pub report: String,
}

impl Default for EvolveOutputs {
    fn default() -> Self {
        Self {
            trajectory: "trajectory.csv".into(),
            report: "conservation.json".into(),
        }
    }
}

/// Config for `evolve`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub driver: DriverSpec,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub window: WindowConfig,
    /// Seeds the random initial `ψ̄` when `psibar` is absent.
    #[serde(default)]
    pub seed: u64,
    /// Initial `ψ̄_{-m}..=ψ̄_{n_psi}` as `[re, im]` pairs.
    #[serde(default)]
    pub psibar: Option<Vec<Complex64>>,
    /// Write every k-th step to the trajectory CSV (the last step is always written).
    #[serde(default = "default_every")]
    pub sample_every: usize,
    #[serde(default)]
    pub outputs: EvolveOutputs,
}

fn default_horizon() -> f64 {
    1.0
}

fn default_step() -> f64 {
    1e-3
}

fn default_order() -> usize {
    16
}

fn default_every() -> usize {
    1
}

impl RunConfig {
    pub fn window(&self) -> PsiWindow {
        PsiWindow {
            m: self.window.m,
            n_psi: self.window.n_psi,
        }
    }

    pub fn validate(&self) -> Result<HerglotzDriver, CliError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CliError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Config(format!("step must be positive, got {}", self.step)));
        }
        if self.order == 0 {
            return Err(CliError::Config("order must be positive".into()));
        }
        if self.sample_every == 0 {
            return Err(CliError::Config("sample_every must be positive".into()));
        }
        if let Some(p) = &self.psibar {
            let want = self.window().len();
            if p.len() != want {
                return Err(CliError::Config(format!(
                    "psibar has {} entries, window [-{}, {}] needs {want}",
                    p.len(),
                    self.window.m,
                    self.window.n_psi
                )));
            }
        }
        HerglotzDriver::new(self.driver.clone()).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum FSource {
    /// `c_1, c_2, ...` as `[re, im]` pairs.
    Coefficients(Vec<Complex64>),
    /// A row of a trajectory CSV written by `evolve`.
    Snapshot { path: PathBuf, t: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub t3: Vec<f64>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t1: vec![0.0],
            t2: vec![0.0],
            t3: vec![0.0],
        }
    }
}

impl TimeGrid {
    /// Cells in row-major order, `t1` slowest.
    pub fn cells(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        for &a in &self.t1 {
            for &b in &self.t2 {
                for &c in &self.t3 {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KpOutputs {
    pub kp: String,
    pub tau: String,
    pub graph: String,
}

impl Default for KpOutputs {
    fn default() -> Self {
        Self {
            kp: "kp.csv".into(),
            tau: "tau.csv".into(),
            graph: "graph.json".into(),
        }
    }
}

/// Config shared by `kp`, `tau` and `graph-dump`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpConfig {
    pub f_source: FSource,
    #[serde(default = "default_kp_order")]
    pub order: usize,
    /// Number of corrected rows in the graph (`tau`, `graph-dump`).
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub grid: TimeGrid,
    /// Also evaluate at truncation `2N` and report the differences.
    #[serde(default)]
    pub convergence: bool,
    #[serde(default)]
    pub outputs: KpOutputs,
}

fn default_kp_order() -> usize {
    32
}

fn default_n() -> usize {
    1
}

impl KpConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.order == 0 || self.n == 0 {
            return Err(CliError::Config("order and n must be positive".into()));
        }
        if self.grid.cells().is_empty() {
            return Err(CliError::Config("time grid is empty".into()));
        }
        Ok(())
    }

    /// `c_1..` from the configured source. Relative snapshot paths are
    /// resolved against `base`.
    pub fn coefficients(&self, base: &Path) -> Result<Vec<Complex64>, CliError> {
        match &self.f_source {
            FSource::Coefficients(c) => Ok(c.clone()),
            FSource::Snapshot { path, t } => crate::evolve::read_snapshot(&base.join(path), *t),
        }
    }
}
