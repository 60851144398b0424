//! JSON interchange for matrices and states.
//!
//! A complex matrix is a row-major array of rows, each entry a `[re, im]`
//! pair. A state file is `{"dims": [...], "matrix": ...}` with an optional
//! `"sender_factors"` list naming the factors held by the encoding party.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::linalg::{c, CMat};
use super::DensityMatrix;
use crate::error::{Error, Result};

/// Serialized complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    /// Rejects ragged rows and non-finite entries.
    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(Error::Parse("empty matrix".into()));
        }
        let cols = self.0[0].len();
        if cols == 0 || self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("matrix rows must be nonempty and equally long".into()));
        }
        if self.0.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parse("matrix contains non-finite entries".into()));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| c(self.0[i][j][0], self.0[i][j][1])))
    }

    /// Like [`to_matrix`](Self::to_matrix) but also requires a square shape.
    pub fn to_square(&self) -> Result<CMat> {
        let m = self.to_matrix()?;
        if m.nrows() != m.ncols() {
            return Err(Error::Parse(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sender_factors: Option<Vec<usize>>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix, sender_factors: Option<Vec<usize>>) -> Self {
        StateFile { dims: rho.dims().to_vec(), matrix: MatrixJson::from_matrix(rho.matrix()), sender_factors }
    }

    /// Shape problems are parse errors; physical invariants are checked by
    /// [`DensityMatrix::new`].
    pub fn to_state(&self) -> Result<DensityMatrix> {
        let m = self.matrix.to_square()?;
        let side: usize = self.dims.iter().product();
        if self.dims.is_empty() || self.dims.contains(&0) || side != m.nrows() {
            return Err(Error::Parse(format!("dims {:?} do not multiply to matrix side {}", self.dims, m.nrows())));
        }
        if let Some(f) = &self.sender_factors {
            if f.is_empty() || f.iter().any(|&k| k >= self.dims.len()) {
                return Err(Error::Parse(format!("sender_factors {f:?} invalid for {} factors", self.dims.len())));
            }
        }
        DensityMatrix::new(self.dims.clone(), m)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<(DensityMatrix, Option<Vec<usize>>)> {
    let file: StateFile = read_json(path)?;
    let rho = file.to_state()?;
    Ok((rho, file.sender_factors))
}
