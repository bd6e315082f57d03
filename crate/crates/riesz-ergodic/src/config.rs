//! Experiment configuration: a TOML file with operator, weights, run, input
//! and output sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::matrix_core::{self, CMatrix};
use crate::superop::{StochasticMatrix, SuperOperator};
use crate::weights::WeightSequence;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operator: OperatorConfig,
    pub weights: WeightsConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub input_x: InputXConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Transpose,
    Identity,
    EntangledPsi,
    EntangledP,
    File,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub kind: OperatorKind,
    pub dim: Option<usize>,
    /// Inline row-stochastic matrix for the entangled kinds.
    pub stochastic: Option<Vec<Vec<f64>>>,
    pub stochastic_file: Option<PathBuf>,
    /// Superoperator file for kind = "file".
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsKind {
    Constant,
    Power,
    Harmonic,
    File,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub kind: WeightsKind,
    pub value: Option<f64>,
    pub alpha: Option<f64>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub checkpoints: Checkpoints,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Threshold for the finite-horizon limit verdicts of validate-weights.
    #[serde(default = "default_limit_tol")]
    pub limit_tol: f64,
}

fn default_n_max() -> usize {
    1024
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_samples() -> usize {
    200
}

fn default_limit_tol() -> f64 {
    1e-2
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            checkpoints: Checkpoints::default(),
            seed: 0,
            tolerance: default_tolerance(),
            samples: default_samples(),
            limit_tol: default_limit_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Checkpoints {
    /// "log": powers of two up to n_max, plus n_max.
    Named(String),
    List(Vec<usize>),
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Named("log".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputXKind {
    Random,
    File,
    MatrixUnit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputXConfig {
    pub kind: InputXKind,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub path: Option<PathBuf>,
}

impl Default for InputXConfig {
    fn default() -> Self {
        Self {
            kind: InputXKind::Random,
            i: None,
            j: None,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {}", path.display(), e)))?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.n_max < 1 {
            return Err(Error::Config("run.n_max must be at least 1".into()));
        }
        if !(self.run.tolerance > 0.0) {
            return Err(Error::Config("run.tolerance must be positive".into()));
        }
        if let Checkpoints::Named(name) = &self.run.checkpoints {
            if name != "log" {
                return Err(Error::Config(format!(
                    "run.checkpoints must be \"log\" or a list, got {:?}",
                    name
                )));
            }
        }
        match self.operator.kind {
            OperatorKind::Transpose | OperatorKind::Identity => {
                if self.operator.dim.is_none() {
                    return Err(Error::Config("operator.dim is required".into()));
                }
            }
            OperatorKind::EntangledPsi | OperatorKind::EntangledP => {
                if self.operator.stochastic.is_none() && self.operator.stochastic_file.is_none() {
                    return Err(Error::Config(
                        "entangled operators need operator.stochastic or operator.stochastic_file"
                            .into(),
                    ));
                }
            }
            OperatorKind::File => {
                if self.operator.path.is_none() {
                    return Err(Error::Config("operator.path is required for kind = \"file\"".into()));
                }
            }
        }
        match self.weights.kind {
            WeightsKind::Power => {
                if self.weights.alpha.is_none() {
                    return Err(Error::Config("weights.alpha is required for kind = \"power\"".into()));
                }
            }
            WeightsKind::File => {
                if self.weights.path.is_none() {
                    return Err(Error::Config("weights.path is required for kind = \"file\"".into()));
                }
            }
            _ => {}
        }
        if self.input_x.kind == InputXKind::MatrixUnit
            && (self.input_x.i.is_none() || self.input_x.j.is_none())
        {
            return Err(Error::Config("input_x.i and input_x.j are required for matrix_unit".into()));
        }
        if self.input_x.kind == InputXKind::File && self.input_x.path.is_none() {
            return Err(Error::Config("input_x.path is required for kind = \"file\"".into()));
        }
        Ok(())
    }

    /// Build the operator and, for the entangled kinds, its stochastic matrix.
    pub fn build_operator(&self) -> Result<(SuperOperator, Option<StochasticMatrix>)> {
        match self.operator.kind {
            OperatorKind::Transpose => Ok((
                SuperOperator::transpose_map(self.operator.dim.unwrap()),
                None,
            )),
            OperatorKind::Identity => Ok((
                SuperOperator::identity_map(self.operator.dim.unwrap()),
                None,
            )),
            OperatorKind::EntangledPsi | OperatorKind::EntangledP => {
                let pi = if let Some(rows) = &self.operator.stochastic {
                    StochasticMatrix::from_rows(rows)?
                } else {
                    StochasticMatrix::from_file(self.operator.stochastic_file.as_ref().unwrap())?
                };
                if let Some(d) = self.operator.dim {
                    if d != pi.dim() {
                        return Err(Error::Config(format!(
                            "operator.dim = {} but the stochastic matrix is {}x{}",
                            d,
                            pi.dim(),
                            pi.dim()
                        )));
                    }
                }
                let s = if self.operator.kind == OperatorKind::EntangledPsi {
                    SuperOperator::entangled_psi(&pi)
                } else {
                    SuperOperator::entangled_p(&pi)
                };
                Ok((s, Some(pi)))
            }
            OperatorKind::File => Ok((
                SuperOperator::from_file(self.operator.path.as_ref().unwrap())?,
                None,
            )),
        }
    }

    pub fn build_weights(&self) -> Result<WeightSequence> {
        match self.weights.kind {
            WeightsKind::Constant => WeightSequence::constant(self.weights.value.unwrap_or(1.0)),
            WeightsKind::Power => WeightSequence::power(self.weights.alpha.unwrap()),
            WeightsKind::Harmonic => Ok(WeightSequence::harmonic()),
            WeightsKind::File => WeightSequence::from_file(self.weights.path.as_ref().unwrap()),
        }
    }

    pub fn build_input(&self, dim: usize, seed: u64) -> Result<CMatrix> {
        match self.input_x.kind {
            InputXKind::Random => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                Ok(crate::superop::random_matrix(dim, &mut rng))
            }
            InputXKind::MatrixUnit => {
                let (i, j) = (self.input_x.i.unwrap(), self.input_x.j.unwrap());
                if i >= dim || j >= dim {
                    return Err(Error::Config(format!(
                        "matrix_unit ({}, {}) out of range for dimension {}",
                        i, j, dim
                    )));
                }
                Ok(matrix_core::matrix_unit(dim, i, j))
            }
            InputXKind::File => {
                let x = matrix_core::read_matrix(self.input_x.path.as_ref().unwrap())?;
                if x.nrows() != dim {
                    return Err(Error::Config(format!(
                        "input matrix is {}x{}, operator dimension is {}",
                        x.nrows(),
                        x.ncols(),
                        dim
                    )));
                }
                Ok(x)
            }
        }
    }

    /// Resolved checkpoint list, ascending, capped at n_max.
    pub fn checkpoints(&self) -> Result<Vec<usize>> {
        let n_max = self.run.n_max;
        match &self.run.checkpoints {
            Checkpoints::Named(_) => {
                let mut list = Vec::new();
                let mut n = 1usize;
                while n <= n_max {
                    list.push(n);
                    n *= 2;
                }
                if *list.last().unwrap() != n_max {
                    list.push(n_max);
                }
                Ok(list)
            }
            Checkpoints::List(list) => {
                if list.is_empty() {
                    return Err(Error::Config("checkpoint list is empty".into()));
                }
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("checkpoints must be strictly ascending".into()));
                }
                if list[0] < 1 || *list.last().unwrap() > n_max {
                    return Err(Error::Config("checkpoints must lie in 1..=n_max".into()));
                }
                Ok(list.clone())
            }
        }
    }
}
