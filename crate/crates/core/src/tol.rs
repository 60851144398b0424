//! Numerical tolerances shared across the crate.
//!
//! Every threshold used by validation and comparison code lives here so
//! the contracts are stated once.

/// Entrywise Hermiticity tolerance for density matrices.
pub const HERMITIAN: f64 = 1e-10;

/// Smallest admissible eigenvalue of a density matrix.
pub const PSD: f64 = 1e-10;

/// Allowed deviation of a density matrix trace from one.
pub const TRACE: f64 = 1e-10;

/// Allowed deviation of a state vector's squared norm from one.
pub const NORM: f64 = 1e-12;

/// Eigenvalues below this count as zero: `0 log 0 = 0` and support detection.
pub const EIG_CUTOFF: f64 = 1e-12;

/// Weight of rho on the kernel of sigma above which `D(rho||sigma)` is infinite.
pub const SUPPORT_OVERLAP: f64 = 1e-10;

/// Kraus completeness `sum K^dag K = I`.
pub const KRAUS: f64 = 1e-10;

/// Isometry constraint `V^dag V = I` for Stinespring isometries.
pub const ISOMETRY: f64 = 1e-10;

/// Isometry constraint for optimizer outputs.
pub const OPT_ISOMETRY: f64 = 1e-8;

/// Max entrywise Choi difference for channel equality.
pub const CHOI_EQUAL: f64 = 1e-8;

/// Minimum eigenvalue of the partial transpose for a PPT verdict.
pub const PPT: f64 = 1e-10;

/// Choi rank-one residual below which an induced map counts as unitary.
pub const PROGRAM: f64 = 1e-6;

/// Unitarity check for gate matrices.
pub const UNITARY: f64 = 1e-10;

/// Probability sums in ensembles.
pub const PROBABILITY: f64 = 1e-12;

/// Optimizer agreement tolerance used by capacity-level comparisons.
pub const OPTIMIZER: f64 = 5e-3;
