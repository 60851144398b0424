//! Minimization of spectral objectives over quantum channels, parameterized
//! by Stinespring isometries on the complex Stiefel manifold.
//!
//! Nothing here certifies global optimality. Minimizers are upper bounds on
//! the true minimum and maximizers are lower bounds on the true maximum.

mod ensemble;
mod entropy;
mod stiefel;

use serde::{Deserialize, Serialize};

use crate::channels::StinespringIsometry;
use crate::error::{Error, Result};
use crate::qmath::io::MatrixJson;

pub use ensemble::{optimize_ensemble, optimize_ensemble_seeded, weyl_product_basis, EnsembleReport};
pub use entropy::{
    entropy_gradient, local_output_entropy, min_local_output_entropy, min_output_entropy_with, EntropyProblem,
};
pub use stiefel::{descend, riemannian_gradient, stiefel_minimize, Descent, Objective};

/// Optimizer settings. Every field has a default so partial JSON blocks work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo: f64,
    /// Environment dimension; `None` means `d_in * d_out`.
    pub d_env: Option<usize>,
    pub seed: u64,
    /// Start extra descents from structured probe channels.
    pub seed_probes: bool,
    /// Random starting ensembles tried by the ensemble optimizer.
    pub ensemble_restarts: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            restarts: 20,
            max_iters: 500,
            grad_tol: 1e-8,
            armijo: 1e-4,
            d_env: None,
            seed: 0,
            seed_probes: true,
            ensemble_restarts: 2,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        let bad = |x: f64| x.is_nan() || x <= 0.0;
        if bad(self.grad_tol) || bad(self.armijo) || self.armijo >= 1.0 {
            return Err(Error::InvalidArgument("grad_tol must be positive and armijo in (0, 1)".into()));
        }
        if self.d_env == Some(0) {
            return Err(Error::InvalidArgument("d_env must be at least 1".into()));
        }
        if self.restarts == 0 && !self.seed_probes {
            return Err(Error::InvalidArgument("need at least one restart or probe".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// Outcome of one descent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartRecord {
    /// `random:<k>` or `probe:<name>`.
    pub label: String,
    pub initial: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub underflow: bool,
}

/// Result of a channel minimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptReport {
    pub value: f64,
    pub isometry: StinespringIsometry,
    pub restarts: Vec<RestartRecord>,
    pub best_index: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Spread of final values over random restarts. Large spread hints at
    /// local minima.
    pub dispersion: f64,
}

impl Serialize for StinespringIsometry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            d_in: usize,
            d_out: usize,
            d_env: usize,
            matrix: MatrixJson,
        }
        Repr { d_in: self.d_in(), d_out: self.d_out(), d_env: self.d_env(), matrix: MatrixJson::from_matrix(self.matrix()) }
            .serialize(s)
    }
}

pub(crate) fn summarize(records: &[RestartRecord]) -> (usize, f64) {
    // lowest value, first index on ties
    let mut best = 0;
    for (k, r) in records.iter().enumerate() {
        if r.value < records[best].value {
            best = k;
        }
    }
    let random: Vec<f64> = records.iter().filter(|r| r.label.starts_with("random")).map(|r| r.value).collect();
    let dispersion = if random.is_empty() {
        0.0
    } else {
        random.iter().cloned().fold(f64::MIN, f64::max) - random.iter().cloned().fold(f64::MAX, f64::min)
    };
    (best, dispersion)
}
