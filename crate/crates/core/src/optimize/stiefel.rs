//! Riemannian descent on products of complex Stiefel manifolds.

use super::{summarize, OptConfig, RestartRecord};
use crate::channels::haar_isometry;
use crate::error::{Error, Result};
use crate::qmath::linalg::{hermitize, qr_positive, real_inner, CMat};
use crate::rng::stream;

/// Smooth objective on a tuple of isometries.
pub trait Objective {
    fn value(&self, x: &[CMat]) -> f64;
    /// Value and Euclidean gradient, `df = sum_i Re Tr(G_i^dag dX_i)`.
    fn value_grad(&self, x: &[CMat]) -> (f64, Vec<CMat>);
}

struct Single<F>(F);

impl<F: Fn(&CMat) -> (f64, CMat)> Objective for Single<F> {
    fn value(&self, x: &[CMat]) -> f64 {
        (self.0)(&x[0]).0
    }

    fn value_grad(&self, x: &[CMat]) -> (f64, Vec<CMat>) {
        let (v, g) = (self.0)(&x[0]);
        (v, vec![g])
    }
}

/// Tangent projection `G - X herm(X^dag G)`.
pub fn riemannian_gradient(x: &CMat, g: &CMat) -> CMat {
    g - x * hermitize(&(x.adjoint() * g))
}

#[derive(Debug, Clone)]
pub struct Descent {
    pub value: f64,
    pub initial: f64,
    pub point: Vec<CMat>,
    pub iterations: usize,
    pub converged: bool,
    pub underflow: bool,
    pub grad_norm: f64,
}

const STAGNATION_WINDOW: usize = 8;
const STAGNATION_REL: f64 = 1e-13;
const MIN_STEP: f64 = 1e-16;

/// Armijo-backtracking gradient descent with QR retraction. The objective
/// never increases. Converged means the Riemannian gradient norm fell below
/// `grad_tol` or the value stopped moving for several iterations.
pub fn descend<O: Objective + ?Sized>(obj: &O, start: Vec<CMat>, cfg: &OptConfig) -> Descent {
    let mut x = start;
    let (mut f, mut g) = obj.value_grad(&x);
    let initial = f;
    let mut step: Option<f64> = None;
    let mut stagnant = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut underflow = false;
    let mut grad_norm = f64::INFINITY;
    while iterations < cfg.max_iters {
        let xi: Vec<CMat> = x.iter().zip(&g).map(|(xk, gk)| riemannian_gradient(xk, gk)).collect();
        let norm2: f64 = xi.iter().map(|z| real_inner(z, z)).sum();
        grad_norm = norm2.sqrt();
        if !grad_norm.is_finite() {
            break;
        }
        if grad_norm <= cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut t = step.map_or(0.5 / grad_norm, |s| 2.0 * s);
        let accepted = loop {
            let trial: Vec<CMat> = x.iter().zip(&xi).map(|(xk, d)| qr_positive(&(xk - d * crate::qmath::c(t, 0.0)))).collect();
            let ft = obj.value(&trial);
            if ft.is_finite() && ft <= f - cfg.armijo * t * norm2 {
                break Some((trial, ft));
            }
            t *= 0.5;
            if t * grad_norm < MIN_STEP {
                break None;
            }
        };
        let Some((trial, ft)) = accepted else {
            underflow = true;
            converged = stagnant > 0 || grad_norm <= cfg.grad_tol.sqrt();
            break;
        };
        step = Some(t);
        let decrease = f - ft;
        x = trial;
        if decrease <= STAGNATION_REL * f.abs().max(1.0) {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        let (nf, ng) = obj.value_grad(&x);
        f = nf;
        g = ng;
        if stagnant >= STAGNATION_WINDOW {
            converged = true;
            break;
        }
    }
    Descent { value: f, initial, point: x, iterations, converged, underflow, grad_norm }
}

/// Outcome of [`stiefel_minimize`].
#[derive(Debug, Clone)]
pub struct StiefelReport {
    pub value: f64,
    pub point: CMat,
    pub restarts: Vec<RestartRecord>,
    pub best_index: usize,
    pub converged: bool,
    pub iterations: usize,
    pub dispersion: f64,
}

/// Multi-restart minimization of `objective` over `rows x cols` isometries.
/// Extra labelled starting points run before the random restarts. Restart
/// `k` draws from random stream `k` of `cfg.seed`.
pub fn stiefel_minimize<F>(objective: F, rows: usize, cols: usize, cfg: &OptConfig, starts: &[(String, CMat)]) -> Result<StiefelReport>
where
    F: Fn(&CMat) -> (f64, CMat),
{
    cfg.validate()?;
    if cols == 0 || rows < cols {
        return Err(Error::dims(format!("no {rows}x{cols} isometries")));
    }
    if let Some((label, _)) = starts.iter().find(|(_, m)| m.nrows() != rows || m.ncols() != cols) {
        return Err(Error::dims(format!("starting point {label} has the wrong shape")));
    }
    let obj = Single(objective);
    let mut records = Vec::new();
    let mut points = Vec::new();
    let mut iterations = 0;
    let mut run = |label: String, x0: CMat| {
        let d = descend(&obj, vec![x0], cfg);
        iterations += d.iterations;
        records.push(RestartRecord {
            label,
            initial: d.initial,
            value: d.value,
            iterations: d.iterations,
            converged: d.converged,
            underflow: d.underflow,
        });
        points.push(d.point.into_iter().next().expect("one factor"));
    };
    for (label, x0) in starts {
        run(label.clone(), qr_positive(x0));
    }
    for k in 0..cfg.restarts {
        let mut rng = stream(cfg.seed, k as u64);
        run(format!("random:{k}"), haar_isometry(rows, cols, &mut rng));
    }
    if records.is_empty() {
        return Err(Error::InvalidArgument("no starting points".into()));
    }
    let (best, dispersion) = summarize(&records);
    Ok(StiefelReport {
        value: records[best].value,
        point: points.swap_remove(best),
        converged: records[best].converged,
        best_index: best,
        restarts: records,
        iterations,
        dispersion,
    })
}
