//! Independent reference computations. Nothing here calls the production
//! Cholesky, SVD or whitening code; inverses go through LU and inverse square
//! roots through Hermitian eigendecompositions.

#![allow(dead_code)]

use fortin_core::linalg::{c, CMat, CVec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// `M·Mᴴ + shift·I`, safely positive definite.
pub fn random_gram(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let m = random_matrix(rng, n, n);
    let g = &m * m.adjoint() + CMat::identity(n, n) * c(shift, 0.0);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

pub fn lu_inverse(a: &CMat) -> CMat {
    a.clone().lu().try_inverse().expect("oracle: singular matrix")
}

/// `G^{-1/2}` through the Hermitian eigendecomposition.
pub fn inv_sqrt(g: &CMat) -> CMat {
    let eig = g.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        assert!(*lambda > 0.0, "oracle: gram not positive definite");
        scaled.column_mut(j).scale_mut(lambda.sqrt().recip());
    }
    &scaled * eig.eigenvectors.adjoint()
}

/// Generalized singular values of `mat` (dimW × dimV) between the two grams,
/// nonincreasing, from the eigenvalues of the normal matrix `Nᴴ N`.
pub fn gsv_by_eigen(mat: &CMat, gram_v: &CMat, gram_w: &CMat) -> Vec<f64> {
    let n = inv_sqrt(gram_w) * mat * inv_sqrt(gram_v);
    let normal = n.adjoint() * &n;
    let normal = (&normal + normal.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = normal.symmetric_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.truncate(mat.nrows().min(mat.ncols()));
    ev
}

/// `(‖a‖, α)` from the eigen oracle.
pub fn norm_and_infsup(mat: &CMat, gram_v: &CMat, gram_w: &CMat) -> (f64, f64) {
    let sv = gsv_by_eigen(mat, gram_v, gram_w);
    let alpha = if mat.nrows() < mat.ncols() { 0.0 } else { *sv.last().unwrap() };
    (sv[0], alpha)
}

/// ‖a‖ by power iteration on `G_V⁻¹ Mᴴ G_W⁻¹ M` with LU inverses.
pub fn norm_by_power_iteration(mat: &CMat, gram_v: &CMat, gram_w: &CMat, iterations: usize) -> f64 {
    let gv_inv = lu_inverse(gram_v);
    let gw_inv = lu_inverse(gram_w);
    let op = &gv_inv * mat.adjoint() * &gw_inv * mat;
    let mut x = CVec::from_fn(mat.ncols(), |i, _| c(1.0 + i as f64 * 0.37, 0.11 * i as f64));
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let y = &op * &x;
        let gx = gram_v * &x;
        let num = (mat * &x).dotc(&(&gw_inv * (mat * &x))).re;
        let den = x.dotc(&gx).re;
        estimate = (num / den).sqrt();
        x = y.clone() / c(y.norm(), 0.0);
    }
    estimate
}

/// Fortin matrix from its two defining properties, solved directly:
/// `Π w = G⁻¹A c` (so Π w is G-orthogonal to ker Aᴴ) with `Aᴴ Π w = crossᴴ w`.
pub fn fortin_by_normal_equations(mat: &CMat, gram_w: &CMat, embed_v: &CMat, embed_w: &CMat) -> CMat {
    let a_h = embed_w.adjoint() * mat * embed_v;
    let cross = mat * embed_v;
    let g_wh = embed_w.adjoint() * gram_w * embed_w;
    let g_inv_a = lu_inverse(&g_wh) * &a_h;
    let schur = a_h.adjoint() * &g_inv_a;
    g_inv_a * lu_inverse(&schur) * cross.adjoint()
}

/// Operator norm of `m` from `(C^n, G_from)` to `(C^m, G_to)` via the eigen oracle.
pub fn operator_norm_by_eigen(m: &CMat, gram_from: &CMat, gram_to: &CMat) -> f64 {
    // ‖m x‖_to / ‖x‖_from = ‖G_to^{1/2} m G_from^{-1/2} u‖ / ‖u‖
    let to_sqrt = lu_inverse(&inv_sqrt(gram_to));
    let n = to_sqrt * m * inv_sqrt(gram_from);
    let normal = n.adjoint() * &n;
    let normal = (&normal + normal.adjoint()) * c(0.5, 0.0);
    normal.symmetric_eigenvalues().iter().fold(0.0f64, |a, l| a.max(*l)).sqrt()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn mat_rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
