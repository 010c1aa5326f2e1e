//! Small dense helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative cutoff below which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Embeds a real matrix given row by row.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

pub fn real_vector(data: &[f64]) -> CVec {
    CVec::from_iterator(data.len(), data.iter().map(|&x| c(x, 0.0)))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm2(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖a − b‖_F / ‖b‖_F, falling back to the absolute error when b vanishes.
pub fn rel_frobenius_error(a: &CMat, b: &CMat) -> f64 {
    let diff = frobenius(&(a - b));
    let scale = frobenius(b);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Largest entrywise deviation from Hermitian symmetry, relative to the largest entry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut max_entry = 0.0f64;
    let mut max_defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            max_entry = max_entry.max(m[(i, j)].norm());
            max_defect = max_defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if max_entry > 0.0 {
        max_defect / max_entry
    } else {
        0.0
    }
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).unscale(2.0)
}

/// All singular values, nonincreasing. Empty matrices have none.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank: singular values above `rank_tol · σ_max`.
pub fn numerical_rank(sv: &[f64], rank_tol: f64) -> usize {
    match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > rank_tol * smax).count(),
        _ => 0,
    }
}

/// Thin SVD `m = U Σ V*` with singular values sorted nonincreasing.
pub struct ThinSvd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v_t: CMat,
}

pub fn thin_svd(m: &CMat) -> ThinSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("U requested");
    let v_t = svd.v_t.expect("V* requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    // nalgebra sorts already; keep the contract explicit in case that changes.
    debug_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    ThinSvd { u, sigma, v_t }
}

/// Orthonormal columns spanning the Euclidean orthogonal complement of the
/// column span of `basis`, which must itself have orthonormal columns.
pub fn orthonormal_completion(basis: &CMat) -> CMat {
    let n = basis.nrows();
    let r = basis.ncols();
    if r >= n {
        return CMat::zeros(n, 0);
    }
    // Two passes of projected Gram-Schmidt over the coordinate vectors,
    // keeping the candidates with the largest surviving norm.
    let mut cols: Vec<CVec> = (0..r).map(|j| basis.column(j).into_owned()).collect();
    let mut out: Vec<CVec> = Vec::with_capacity(n - r);
    while out.len() < n - r {
        let mut best: Option<(f64, CVec)> = None;
        for k in 0..n {
            let mut v = CVec::zeros(n);
            v[k] = c(1.0, 0.0);
            for _ in 0..2 {
                for q in &cols {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
            }
            let nv = norm2(&v);
            if best.as_ref().is_none_or(|(b, _)| nv > *b) {
                best = Some((nv, v));
            }
        }
        let (nv, v) = best.expect("n > 0");
        let q = v.unscale(nv);
        cols.push(q.clone());
        out.push(q);
    }
    CMat::from_columns(&out)
}

/// Euclidean orthonormal basis of the column span, at the given relative rank cutoff.
pub fn orthonormal_range(m: &CMat, rank_tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = thin_svd(m);
    let r = numerical_rank(&svd.sigma, rank_tol);
    svd.u.columns(0, r).into_owned()
}

/// Lower Cholesky factor `L` with `a = L·L*`, reading the lower triangle.
/// Returns `None` unless every pivot is real and strictly positive.
pub fn cholesky_lower(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    if a.ncols() != n {
        return None;
    }
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = c(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s.unscale(djj);
        }
    }
    Some(l)
}

/// Solves the square system `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone().lu().solve(b).ok_or_else(|| Error::Validation("singular system in LU solve".into()))
}

pub fn check_shape(what: &str, m: &CMat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected: format!("{rows}x{cols}"),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

pub fn check_len(what: &str, v: &CVec, len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected: len.to_string(),
            found: v.len().to_string(),
        });
    }
    Ok(())
}

/// Complex vector as interleaved (re, im) reals.
pub fn to_real(v: &CVec) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn from_real(x: &[f64]) -> CVec {
    CVec::from_iterator(x.len() / 2, x.chunks_exact(2).map(|p| c(p[0], p[1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_is_orthonormal_and_orthogonal() {
        let b = orthonormal_range(
            &CMat::from_row_slice(4, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 1.0), c(3.0, 0.0), c(-1.0, 0.0)]),
            1e-12,
        );
        assert_eq!(b.ncols(), 2);
        let q = orthonormal_completion(&b);
        assert_eq!(q.ncols(), 2);
        let gram = q.adjoint() * &q;
        assert!(rel_frobenius_error(&gram, &CMat::identity(2, 2)) < 1e-13);
        assert!(frobenius(&(b.adjoint() * &q)) < 1e-13);
    }

    #[test]
    fn rank_counts_relative_to_largest() {
        assert_eq!(numerical_rank(&[1.0, 1e-3, 1e-11], 1e-10), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], 1e-10), 0);
        assert_eq!(numerical_rank(&[], 1e-10), 0);
    }

    #[test]
    fn real_embedding_round_trips() {
        let v = CVec::from_vec(vec![c(1.0, -2.0), c(0.25, 3.0)]);
        assert_eq!(from_real(&to_real(&v)), v);
    }
}
