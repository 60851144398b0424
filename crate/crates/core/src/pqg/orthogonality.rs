//! Programs with distinct unitaries must be orthogonal.

use serde::Serialize;

use super::{induced_map, ProgrammableGate};
use crate::error::{Error, Result};
use crate::qmath::linalg::{CMat, CVec, Eigh};
use crate::qmath::PureState;
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityVerdict {
    /// Proportional unitaries or orthogonal programs.
    pub consistent: bool,
    pub proportional: bool,
    /// `|<psi1|psi2>|`.
    pub overlap: f64,
    /// `|<v1|v2>|^2` of the normalized rank-one Choi vectors.
    pub collinearity: f64,
    /// Choi rank-one residuals `1 - lambda_max / Tr J` of the two maps.
    pub choi_residuals: [f64; 2],
    pub overlap_tol: f64,
    pub program_tol: f64,
}

/// Induced unitary of a program (up to phase) and its Choi rank-one
/// residual. Fails with `NotAProgram` above [`tol::PROGRAM`].
pub fn program_unitary(g: &ProgrammableGate, psi: &PureState) -> Result<(CMat, f64)> {
    let (v, residual) = choi_vector(g, psi)?;
    let d = g.d_data();
    let u = CMat::from_fn(d, d, |o, i| v[o * d + i]) * crate::qmath::c((d as f64).sqrt(), 0.0);
    Ok((u, residual))
}

fn choi_vector(g: &ProgrammableGate, psi: &PureState) -> Result<(CVec, f64)> {
    let t = induced_map(g, psi)?;
    let j = t.choi().matrix;
    let e = Eigh::new(&j)?;
    let total: f64 = e.values.iter().sum();
    let residual = ((total - e.values[0]) / total).max(0.0);
    if residual > tol::PROGRAM {
        return Err(Error::NotAProgram { residual, tol: tol::PROGRAM });
    }
    Ok((e.vectors.column(0).into_owned(), residual))
}

/// Checks the dichotomy for two programs of one gate: either their
/// unitaries agree up to a phase or `|<psi1|psi2>| <= overlap_tol`.
pub fn program_orthogonality_check(g: &ProgrammableGate, psi1: &PureState, psi2: &PureState, overlap_tol: f64) -> Result<OrthogonalityVerdict> {
    if overlap_tol.is_nan() || overlap_tol < 0.0 {
        return Err(Error::InvalidArgument("overlap tolerance must be nonnegative".into()));
    }
    if psi1.side() != g.d_prog() || psi2.side() != g.d_prog() {
        return Err(Error::dims(format!("programs must have {} amplitudes", g.d_prog())));
    }
    let (v1, r1) = choi_vector(g, psi1)?;
    let (v2, r2) = choi_vector(g, psi2)?;
    let collinearity = v1.dotc(&v2).norm_sqr();
    let proportional = 1.0 - collinearity <= tol::PROGRAM;
    let overlap = psi1.inner(psi2).norm();
    Ok(OrthogonalityVerdict {
        consistent: proportional || overlap <= overlap_tol,
        proportional,
        overlap,
        collinearity,
        choi_residuals: [r1, r2],
        overlap_tol,
        program_tol: tol::PROGRAM,
    })
}
