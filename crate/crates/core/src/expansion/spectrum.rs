//! Exact finite-model spectra used as oracles for power iteration.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::AveragingOperator;
use crate::group::GeneratorSet;
use crate::{Error, Result};

/// Largest `|λ|` of `T` on mean-zero functions by a dense symmetric eigensolve.
/// Requires a symmetric multiset on a uniformly weighted model.
pub fn dense_mean_zero_norm(op: &AveragingOperator) -> f64 {
    mean_zero_spectrum(op).into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Eigenvalues of `T - P_const`, i.e. the spectrum on mean-zero functions
/// padded with one zero.
pub fn mean_zero_spectrum(op: &AveragingOperator) -> Vec<f64> {
    let n = op.dim();
    let mut m = op.dense();
    m.add_scalar_mut(-1.0 / n as f64);
    let m = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

/// Norm on mean-zero functions of the averaging operator of the translations
/// `(±1/q, 0), (0, ±1/q)` on the `q x q` torus, from its Fourier characters:
/// `max_{(j,k) != 0} |cos(2πj/q) + cos(2πk/q)| / 2`.
pub fn translation_closed_form(q: u64) -> f64 {
    let c = |j: u64| (std::f64::consts::TAU * j as f64 / q as f64).cos();
    let mut best: f64 = 0.0;
    for j in 0..q {
        for k in 0..q {
            if j != 0 || k != 0 {
                best = best.max(((c(j) + c(k)) / 2.0).abs());
            }
        }
    }
    best
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn primitive_root(q: u64) -> u64 {
    let n = q - 1;
    let mut factors = Vec::new();
    let mut m = n;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..q).find(|&g| factors.iter().all(|&p| pow_mod(g, n / p, q) != 1)).unwrap_or(1)
}

/// Norm of the averaging operator of integer matrices on the punctured torus
/// `(F_q^2 \ {0})`, `q` prime, restricted to mean-zero functions.
///
/// Functions split by how they transform under scalars: `f(λv) = ψ(λ) f(v)`
/// for a character `ψ` of `F_q^*`. Each piece is spanned by `q + 1` line
/// representatives and `T` acts on it by a Hermitian block with entries
/// `ψ(μ)/|Q|`, where `B r_L = μ r_{BL}`. The constant function is removed from
/// the trivial block.
pub fn punctured_block_norm(q: u64, gens: &GeneratorSet) -> Result<f64> {
    if !is_prime(q) || q > 1 << 12 {
        return Err(Error::InvalidArgument(format!("{q} is not a supported prime")));
    }
    let mats = gens
        .elements()
        .map(|g| {
            let (m, s) = g
                .torus_grid_data(q)
                .ok_or_else(|| Error::NotExact("generator is not an integer matrix".into()))?;
            if s != [0, 0] {
                return Err(Error::InvalidArgument("translations do not act on the punctured torus".into()));
            }
            Ok(m.map(|x| x.rem_euclid(q as i64) as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let g = primitive_root(q);
    let mut dlog = vec![0u64; q as usize];
    let mut x = 1;
    for e in 0..q - 1 {
        dlog[x as usize] = e;
        x = x * g % q;
    }
    let inv = |a: u64| pow_mod(a, q - 2, q);
    // line index and scalar of a nonzero vector
    let split = |v: [u64; 2]| -> (usize, u64) {
        if v[0] != 0 {
            ((v[1] * inv(v[0]) % q) as usize, v[0])
        } else {
            (q as usize, v[1])
        }
    };
    let reps: Vec<[u64; 2]> = (0..q).map(|t| [1, t]).chain(std::iter::once([0, 1])).collect();
    let n = q as usize + 1;
    let mut transitions = Vec::with_capacity(n * mats.len());
    for (l, r) in reps.iter().enumerate() {
        for m in &mats {
            let w = [(m[0] * r[0] + m[1] * r[1]) % q, (m[2] * r[0] + m[3] * r[1]) % q];
            let (l2, mu) = split(w);
            transitions.push((l, l2, dlog[mu as usize]));
        }
    }
    let k = mats.len() as f64;
    let mut best: f64 = 0.0;
    for chi in 0..q - 1 {
        let mut m = DMatrix::<Complex<f64>>::zeros(n, n);
        for &(l, l2, e) in &transitions {
            let theta = std::f64::consts::TAU * ((chi * e) % (q - 1)) as f64 / (q - 1) as f64;
            m[(l, l2)] += Complex::new(theta.cos(), theta.sin()) / k;
        }
        if chi == 0 {
            m.add_scalar_mut(Complex::new(-1.0 / n as f64, 0.0));
        }
        let h = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h).eigenvalues;
        best = best.max(eig.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{sl2z_generators, torus_translations};
    use crate::space::build_model;
    use std::sync::Arc;

    #[test]
    fn blocks_agree_with_full_dense_eigensolve() {
        for q in [5u64, 7, 11, 13] {
            let m = Arc::new(build_model("punctured-torus", q as usize, 0).unwrap());
            let op = AveragingOperator::new(&m, &sl2z_generators()).unwrap();
            let dense = dense_mean_zero_norm(&op);
            let blocks = punctured_block_norm(q, &sl2z_generators()).unwrap();
            assert!((dense - blocks).abs() < 1e-10, "q={q}: {dense} vs {blocks}");
        }
    }

    #[test]
    fn translation_dense_matches_closed_form() {
        for q in [4u64, 5, 6, 7] {
            let m = Arc::new(build_model("rational-torus", q as usize, 0).unwrap());
            let op = AveragingOperator::new(&m, &torus_translations(q).unwrap()).unwrap();
            assert!((dense_mean_zero_norm(&op) - translation_closed_form(q)).abs() < 1e-10);
        }
        assert_eq!(translation_closed_form(6), 1.0);
        assert!((translation_closed_form(7) - (std::f64::consts::PI / 7.0).cos()).abs() < 1e-15);
    }

    #[test]
    fn full_torus_has_no_gap() {
        let m = Arc::new(build_model("rational-torus", 7, 0).unwrap());
        let op = AveragingOperator::new(&m, &sl2z_generators()).unwrap();
        assert!((dense_mean_zero_norm(&op) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(101), 2);
        assert!(punctured_block_norm(9, &sl2z_generators()).is_err());
    }
}
