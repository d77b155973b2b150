//! Experiment configuration: one JSON document, with command-line flags
//! overriding individual keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use momentlab::calabi::VolumeSpec;
use momentlab::grid::Grid;
use momentlab::suite::Level;
use momentlab::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Verify,
    Flow,
    Weinstein,
    MomentCheck,
    Plot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_dim: usize,
    pub resolution: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_dim: 1,
            resolution: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineMode {
    pub axis: usize,
    pub freq: i64,
    pub amplitude: f64,
}

/// θ as a named preset or a field file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThetaSpec {
    Flat,
    Cosine { modes: Vec<CosineMode> },
    File { path: PathBuf },
}

impl Default for ThetaSpec {
    fn default() -> Self {
        ThetaSpec::Cosine {
            modes: vec![CosineMode {
                axis: 1,
                freq: 1,
                amplitude: 0.3,
            }],
        }
    }
}

impl ThetaSpec {
    pub fn build(&self, grid: Grid) -> Result<VolumeSpec> {
        match self {
            ThetaSpec::Flat => Ok(VolumeSpec::flat(grid)),
            ThetaSpec::Cosine { modes } => {
                let triples: Vec<(usize, i64, f64)> = modes
                    .iter()
                    .map(|m| (m.axis, m.freq, m.amplitude))
                    .collect();
                VolumeSpec::cosine_modes(grid, &triples)
            }
            ThetaSpec::File { path } => {
                let form = momentlab::io::read_form(path)?;
                if form.components().len() != 1 {
                    return Err(Error::InvalidConfig(
                        "θ field file must hold a single scalar component".into(),
                    ));
                }
                if form.grid() != grid {
                    return Err(Error::InvalidConfig(format!(
                        "θ field grid {:?} does not match the configured grid {grid:?}",
                        form.grid()
                    )));
                }
                VolumeSpec::new(form.component(0).clone())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub max_t: f64,
    /// Explicit step size; defaults to the stability bound.
    pub dt: Option<f64>,
    /// Initial potential as cosine modes; empty means φ₀ = 0.
    pub initial_modes: Vec<CosineMode>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            max_t: 20.0,
            dt: None,
            initial_modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeinsteinConfig {
    pub axis: [f64; 3],
    pub turns: i64,
    pub substeps: usize,
    pub samples: usize,
}

impl Default for WeinsteinConfig {
    fn default() -> Self {
        WeinsteinConfig {
            axis: [0.0, 0.0, 1.0],
            turns: 1,
            substeps: 1000,
            samples: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentCheckConfig {
    pub probes_t2: usize,
    pub probes_t4: usize,
}

impl Default for MomentCheckConfig {
    fn default() -> Self {
        MomentCheckConfig {
            probes_t2: 20,
            probes_t4: 5,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must agree with the subcommand when present.
    pub kind: Option<Kind>,
    pub grid: GridConfig,
    pub theta: ThetaSpec,
    pub seed: u64,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub level: Option<Level>,
    pub flow: FlowConfig,
    pub weinstein: WeinsteinConfig,
    pub moment_check: MomentCheckConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let config: ExperimentConfig = serde_json::from_slice(&bytes)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        if config.tol.is_some_and(|t| t <= 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(config)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.half_dim, self.grid.resolution)
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(1e-8)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
