use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::AveragingOperator;
use crate::par::{self, Exec};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig { restarts: 10, iterations: 500, tolerance: 1e-9, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapEstimate {
    /// Estimated norm of `T` on mean-zero functions.
    pub norm: f64,
    /// `1 - norm`.
    pub gap: f64,
    /// `min(|Tv - λv|, |Tv + λv|)` for the best restart.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
}

struct Run {
    norm: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn deflate(op: &AveragingOperator, v: &mut [f64]) {
    let m = op.mean(v);
    v.iter_mut().for_each(|x| *x -= m);
}

fn norm(op: &AveragingOperator, v: &[f64]) -> f64 {
    op.inner(v, v).sqrt()
}

fn start_vector(op: &AveragingOperator, cfg: &GapConfig, restart: usize) -> Option<Vec<f64>> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    deflate(op, &mut v);
    let nv = norm(op, &v);
    if nv == 0.0 || n < 2 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Some(v)
}

/// Largest-modulus Ritz pair of the Lanczos tridiagonal: `(|θ|, β_k |s_k|)`.
fn extreme_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
        0 => alpha[i],
        1 => beta[i.min(j)],
        _ => 0.0,
    });
    let eig = SymmetricEigen::new(t);
    let (i, theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty tridiagonal");
    let tail = beta.get(k - 1).copied().unwrap_or(0.0);
    (theta.abs(), (tail * eig.eigenvectors[(k - 1, i)]).abs())
}

/// Lanczos on the mean-zero subspace for a self-adjoint `T`. Only the
/// three-term recurrence is kept, so memory stays at a few vectors; loss of
/// orthogonality can duplicate Ritz values but not push them past the
/// spectrum, which is all a norm estimate needs.
fn lanczos(op: &AveragingOperator, cfg: &GapConfig, restart: usize, exec: Exec) -> Run {
    let Some(mut v) = start_vector(op, cfg, restart) else {
        return Run { norm: 0.0, residual: 0.0, iterations: 0, converged: true };
    };
    let mut prev = vec![0.0; v.len()];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let (mut theta, mut residual) = (0.0, f64::INFINITY);
    let limit = cfg.iterations.min(op.dim() - 1).max(1);
    while alpha.len() < limit {
        let mut w = op.apply_with(exec, &v);
        deflate(op, &mut w);
        let a = op.inner(&w, &v);
        let b_prev = beta.last().copied().unwrap_or(0.0);
        w.iter_mut().zip(&v).zip(&prev).for_each(|((x, vi), pi)| *x -= a * vi + b_prev * pi);
        let b = norm(op, &w);
        alpha.push(a);
        beta.push(b);
        if alpha.len() % 5 == 0 || b < 1e-14 || alpha.len() == limit {
            (theta, residual) = extreme_ritz(&alpha, &beta);
            if residual < cfg.tolerance || b < 1e-14 {
                return Run { norm: theta, residual, iterations: alpha.len(), converged: true };
            }
        }
        w.iter_mut().for_each(|x| *x /= b);
        prev = std::mem::replace(&mut v, w);
    }
    Run { norm: theta, residual, iterations: alpha.len(), converged: false }
}

fn run(op: &AveragingOperator, cfg: &GapConfig, restart: usize, exec: Exec) -> Run {
    if op.q.is_symmetric() {
        return lanczos(op, cfg, restart, exec);
    }
    let Some(mut v) = start_vector(op, cfg, restart) else {
        return Run { norm: 0.0, residual: 0.0, iterations: 0, converged: true };
    };
    let mut prev = f64::NAN;
    let mut lambda = 0.0;
    let mut it = 0;
    let mut converged = false;
    while it < cfg.iterations {
        it += 1;
        let mut w = op.apply_with(exec, &v);
        deflate(op, &mut w);
        lambda = norm(op, &w);
        if lambda == 0.0 {
            converged = true;
            break;
        }
        w.iter_mut().for_each(|x| *x /= lambda);
        v = w;
        if (lambda - prev).abs() < cfg.tolerance {
            converged = true;
            break;
        }
        prev = lambda;
    }
    let tv = op.apply_with(exec, &v);
    let r = |s: f64| {
        let d: Vec<f64> = tv.iter().zip(&v).map(|(a, b)| a - s * lambda * b).collect();
        norm(op, &d)
    };
    Run { norm: lambda, residual: r(1.0).min(r(-1.0)), iterations: it, converged }
}

/// Norm of `T` on mean-zero functions with random restarts: Lanczos when the
/// multiset is symmetric, power iteration otherwise. The reported norm is the
/// best restart, a lower bound for the true norm.
pub fn estimate_gap(op: &AveragingOperator, cfg: &GapConfig) -> GapEstimate {
    estimate_gap_with(op, cfg, Exec::Parallel)
}

pub fn estimate_gap_with(op: &AveragingOperator, cfg: &GapConfig, exec: Exec) -> GapEstimate {
    let ids: Vec<usize> = (0..cfg.restarts.max(1)).collect();
    let runs = par::map_slice(exec, &ids, |&r| run(op, cfg, r, exec));
    let best = runs
        .iter()
        .max_by(|a, b| a.norm.total_cmp(&b.norm))
        .expect("at least one restart");
    GapEstimate {
        norm: best.norm,
        gap: 1.0 - best.norm,
        residual: best.residual,
        iterations: best.iterations,
        converged: runs.iter().all(|r| r.converged),
        restarts: runs.len(),
    }
}
