//! Coefficient p-norm spaces and the operator lemmas behind the general
//! (non-Hilbert) converse.
//!
//! For `B: Y → Z` between weighted p-norm spaces:
//!
//! * `β = inf_{z'} ‖B*z'‖_{Y'} / ‖z'‖_{Z'}` measures surjectivity. The inner
//!   supremum over `y` never needs a search: Hölder's inequality is attained,
//!   so it equals the dual (q-type) norm of `B*z'`.
//! * A right inverse with `β‖R_B(z)‖ ≤ ‖z‖` is realized pointwise as the
//!   minimum-norm solution of `B·y = z`. In finite dimensions the image of
//!   `B*` is closed and every space is reflexive, so the extension and
//!   bidual steps of the abstract argument are implicit in that solve.
//!   For `p ≠ 2` the map `z ↦ y` is in general nonlinear; no matrix is built.
//! * For square invertible `B` the two inf-sup orientations agree.
//!
//! Brute-force estimates are upper bounds on the infima they approximate and
//! carry the [`Resolution`] used.

pub mod minnorm;
pub mod search;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fortin::{assemble_fortin, restrict, FortinOperator, SubspacePair, Tolerances};
use crate::linalg::{
    check_len, check_shape, frobenius, lu_solve, numerical_rank, orthonormal_completion, singular_values,
    thin_svd, CMat, CVec, C64,
};
use crate::spectra::{operator_norm, InnerProductSpace};

pub use minnorm::MinNormSolution;
pub use search::Resolution;

/// Largest dimension accepted by the brute-force searches.
pub const BRUTE_FORCE_MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    One,
    Two,
    Inf,
    /// Any other exponent in (1, ∞).
    Finite(f64),
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Exponent::One)
        } else if p == 2.0 {
            Ok(Exponent::Two)
        } else if p == f64::INFINITY {
            Ok(Exponent::Inf)
        } else if p > 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!("norm exponent must lie in [1, ∞], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Two => 2.0,
            Exponent::Inf => f64::INFINITY,
            Exponent::Finite(p) => p,
        }
    }

    /// `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::One => Exponent::Inf,
            Exponent::Inf => Exponent::One,
            Exponent::Two => Exponent::Two,
            Exponent::Finite(p) => Exponent::new(p / (p - 1.0)).expect("conjugate of p in (1, ∞)"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Inf),
            other => Exponent::new(
                other
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad norm exponent {other:?}")))?,
            ),
        }
    }
}

fn lp_norm(moduli: impl Iterator<Item = f64>, p: Exponent) -> f64 {
    match p {
        Exponent::One => moduli.sum(),
        Exponent::Two => moduli.map(|m| m * m).sum::<f64>().sqrt(),
        Exponent::Inf => moduli.fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let v: Vec<f64> = moduli.collect();
            let top = v.iter().copied().fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            top * v.iter().map(|m| (m / top).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

/// `C^dim` with `‖x‖ = (Σ wᵢ|xᵢ|^p)^{1/p}` (`max wᵢ|xᵢ|` for p = ∞).
///
/// Equivalently `‖x‖ = ‖D·x‖_p` with `dᵢ = wᵢ^{1/p}` (`dᵢ = wᵢ` for p = ∞);
/// the dual norm is then `‖D⁻¹·g‖_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PNormSpace {
    p: Exponent,
    weights: Vec<f64>,
}

impl PNormSpace {
    pub fn new(dim: usize, p: Exponent) -> Result<Self> {
        Self::weighted(p, vec![1.0; dim])
    }

    pub fn weighted(p: Exponent, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDims("p-norm space needs a positive dimension".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("p-norm weights must be positive and finite".into()));
        }
        Ok(Self { p, weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scales(&self) -> Vec<f64> {
        match self.p {
            Exponent::Inf => self.weights.clone(),
            p => self.weights.iter().map(|w| w.powf(1.0 / p.value())).collect(),
        }
    }

    pub fn norm(&self, x: &CVec) -> f64 {
        let d = self.scales();
        lp_norm(x.iter().zip(&d).map(|(x, d)| d * x.norm()), self.p)
    }

    pub fn dual_norm(&self, g: &CVec) -> f64 {
        let d = self.scales();
        lp_norm(g.iter().zip(&d).map(|(g, d)| g.norm() / d), self.p.conjugate())
    }

    fn norm_real(&self, d: &[f64], x: &[f64]) -> f64 {
        lp_norm(x.chunks_exact(2).zip(d).map(|(p, d)| d * p[0].hypot(p[1])), self.p)
    }

    fn dual_norm_real(&self, d: &[f64], g: &[f64]) -> f64 {
        lp_norm(g.chunks_exact(2).zip(d).map(|(p, d)| p[0].hypot(p[1]) / d), self.p.conjugate())
    }
}

/// `B: Y → Z` with matrix of shape `dim Z × dim Y`.
#[derive(Debug, Clone)]
pub struct BanachOperator {
    mat: CMat,
    space_y: PNormSpace,
    space_z: PNormSpace,
}

impl BanachOperator {
    pub fn new(mat: CMat, space_y: PNormSpace, space_z: PNormSpace) -> Result<Self> {
        check_shape("Banach operator", &mat, space_z.dim(), space_y.dim())?;
        Ok(Self { mat, space_y, space_z })
    }

    /// Both spaces with unit weights and the same exponent.
    pub fn uniform(mat: CMat, p: Exponent) -> Result<Self> {
        let y = PNormSpace::new(mat.ncols(), p)?;
        let z = PNormSpace::new(mat.nrows(), p)?;
        Self::new(mat, y, z)
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn space_y(&self) -> &PNormSpace {
        &self.space_y
    }

    pub fn space_z(&self) -> &PNormSpace {
        &self.space_z
    }

    /// `‖B*·z'‖_{Y'}`
    pub fn adjoint_dual_norm(&self, z_dual: &CVec) -> f64 {
        self.space_y.dual_norm(&(self.mat.adjoint() * z_dual))
    }

    fn guard_dims(&self) -> Result<()> {
        for dim in [self.space_y.dim(), self.space_z.dim()] {
            if dim > BRUTE_FORCE_MAX_DIM {
                return Err(Error::DimensionTooLarge {
                    dim,
                    limit: BRUTE_FORCE_MAX_DIM,
                });
            }
        }
        Ok(())
    }
}

fn mat_vec_real(m: &CMat, x: &[f64], out: &mut [f64]) {
    for i in 0..m.nrows() {
        let (mut re, mut im) = (0.0, 0.0);
        for j in 0..m.ncols() {
            let a = m[(i, j)];
            let (xr, xi) = (x[2 * j], x[2 * j + 1]);
            re += a.re * xr - a.im * xi;
            im += a.re * xi + a.im * xr;
        }
        out[2 * i] = re;
        out[2 * i + 1] = im;
    }
}

/// Numerical kernel of `mat*` (norm-independent), used as extra search starts.
fn adjoint_kernel_directions(mat: &CMat, rank_tol: f64) -> Vec<CVec> {
    let svd = thin_svd(mat);
    let rank = numerical_rank(&svd.sigma, rank_tol);
    let range = svd.u.columns(0, rank).into_owned();
    let null = orthonormal_completion(&range);
    null.column_iter().map(|c| c.into_owned()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub beta: f64,
    /// Largest ratio seen among unrefined starts; a lower bound on `‖B‖`.
    pub scale: f64,
    pub evaluations: usize,
    pub resolution: Resolution,
}

/// Brute-force `β = inf_{z'} ‖B*z'‖_{Y'} / ‖z'‖_{Z'}`; an upper bound on the true infimum.
pub fn beta_bruteforce(op: &BanachOperator, res: &Resolution) -> Result<BetaEstimate> {
    op.guard_dims()?;
    let adj = op.mat.adjoint();
    let dy = op.space_y.scales();
    let dz = op.space_z.scales();
    let seeds = adjoint_kernel_directions(&op.mat, crate::linalg::DEFAULT_RANK_TOL);
    let f = |x: &[f64]| {
        let mut g = vec![0.0; 2 * adj.nrows()];
        mat_vec_real(&adj, x, &mut g);
        op.space_y.dual_norm_real(&dy, &g) / op.space_z.dual_norm_real(&dz, x)
    };
    let out = search::minimize_ratio(op.space_z.dim(), f, &seeds, res);
    Ok(BetaEstimate {
        beta: out.value,
        scale: out.max_seen,
        evaluations: out.evaluations,
        resolution: *res,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurjectivityReport {
    pub surjective: bool,
    pub rank: usize,
    pub beta: BetaEstimate,
    pub threshold: f64,
}

/// Rank test and β test for surjectivity, cross-checked against each other.
pub fn surjectivity_test(op: &BanachOperator, res: &Resolution, rank_tol: f64) -> Result<SurjectivityReport> {
    op.guard_dims()?;
    let rank = numerical_rank(&singular_values(&op.mat), rank_tol);
    let by_rank = rank == op.space_z.dim();
    let beta = beta_bruteforce(op, res)?;
    let threshold = rank_tol * beta.scale;
    let by_beta = beta.beta > threshold;
    if by_rank != by_beta {
        return Err(Error::InconsistentCriteria {
            rank_says: by_rank,
            beta_says: by_beta,
            beta: beta.beta,
        });
    }
    Ok(SurjectivityReport {
        surjective: by_rank,
        rank,
        beta,
        threshold,
    })
}

/// The minimum-norm `y` with `B·y = z`: one value of a β-bounded right inverse.
pub fn min_norm_right_inverse(op: &BanachOperator, z: &CVec, rank_tol: f64) -> Result<MinNormSolution> {
    check_len("right-hand side", z, op.space_z.dim())?;
    minnorm::solve(&op.mat, z, &op.space_y, rank_tol)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityCheck {
    /// `inf_y ‖By‖_Z / ‖y‖_Y`
    pub l: f64,
    /// `inf_{z'} ‖B*z'‖_{Y'} / ‖z'‖_{Z'}`
    pub r: f64,
    /// Euclidean condition number of the matrix.
    pub condition: f64,
    pub resolution: Resolution,
}

/// Both orientations of the inf-sup constant of a bijective `B`.
pub fn infsup_duality_check(op: &BanachOperator, res: &Resolution, rank_tol: f64) -> Result<DualityCheck> {
    op.guard_dims()?;
    if op.mat.nrows() != op.mat.ncols() {
        return Err(Error::NotBijective {
            reason: format!("matrix is {}x{}", op.mat.nrows(), op.mat.ncols()),
        });
    }
    let sv = singular_values(&op.mat);
    if numerical_rank(&sv, rank_tol) < sv.len() {
        return Err(Error::NotBijective {
            reason: "matrix is singular at the rank tolerance".into(),
        });
    }
    let condition = sv[0] / sv[sv.len() - 1];
    let dy = op.space_y.scales();
    let dz = op.space_z.scales();
    let adj = op.mat.adjoint();
    let n = op.mat.nrows();

    let forward = |x: &[f64]| {
        let mut out = vec![0.0; 2 * n];
        mat_vec_real(&op.mat, x, &mut out);
        op.space_z.norm_real(&dz, &out) / op.space_y.norm_real(&dy, x)
    };
    let l = search::minimize_ratio(n, forward, &[], res).value;

    let backward = |x: &[f64]| {
        let mut out = vec![0.0; 2 * n];
        mat_vec_real(&adj, x, &mut out);
        op.space_y.dual_norm_real(&dy, &out) / op.space_z.dual_norm_real(&dz, x)
    };
    let res_r = Resolution {
        seed: res.seed.wrapping_add(1),
        ..*res
    };
    let r = search::minimize_ratio(n, backward, &[], &res_r).value;
    Ok(DualityCheck {
        l,
        r,
        condition,
        resolution: *res,
    })
}

/// Norm used to measure the projector of a decomposition.
#[derive(Debug, Clone, Copy)]
pub enum DecompositionNorm<'a> {
    Gram(&'a InnerProductSpace),
    PNorm(&'a PNormSpace),
}

impl DecompositionNorm<'_> {
    fn dim(&self) -> usize {
        match self {
            DecompositionNorm::Gram(s) => s.dim(),
            DecompositionNorm::PNorm(s) => s.dim(),
        }
    }
}

/// Directions attaining `‖M‖` in ℓ¹ and ℓ∞ type norms: unit coordinate vectors
/// for p = 1, phase-aligned rows for p = ∞.
fn norming_directions(m: &CMat, space: &PNormSpace) -> Vec<CVec> {
    let d = space.scales();
    let n = m.ncols();
    match space.exponent() {
        Exponent::One => (0..n)
            .map(|j| CVec::from_fn(n, |i, _| if i == j { C64::from(1.0 / d[j]) } else { C64::from(0.0) }))
            .collect(),
        Exponent::Inf => m
            .row_iter()
            .map(|row| {
                CVec::from_fn(n, |j, _| {
                    let z = row[j];
                    let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::from(1.0) };
                    phase / d[j]
                })
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Projector onto span(`complement`) along span(`kernel`).
pub fn decomposition_projector(kernel: &CMat, complement: &CMat, rank_tol: f64) -> Result<CMat> {
    let n = kernel.nrows();
    if complement.nrows() != n {
        return Err(Error::NotADecomposition {
            reason: format!("bases live in C^{} and C^{}", n, complement.nrows()),
        });
    }
    let k = kernel.ncols();
    let r = complement.ncols();
    if k + r != n {
        return Err(Error::NotADecomposition {
            reason: format!("{k} + {r} basis vectors cannot split C^{n}"),
        });
    }
    if r == 0 {
        return Err(Error::NotADecomposition {
            reason: "complement is empty".into(),
        });
    }
    let mut joint = CMat::zeros(n, n);
    joint.columns_mut(0, k).copy_from(kernel);
    joint.columns_mut(k, r).copy_from(complement);
    let sv = singular_values(&joint);
    if numerical_rank(&sv, rank_tol) < n {
        return Err(Error::NotADecomposition {
            reason: "concatenated basis is rank deficient".into(),
        });
    }
    let coords = lu_solve(&joint, &CMat::identity(n, n))?;
    Ok(complement * coords.rows(k, r))
}

/// `κ = 1 / ‖π_K‖` for the projector onto the complement along the kernel.
pub fn decomposition_kappa(
    norm: DecompositionNorm<'_>,
    kernel: &CMat,
    complement: &CMat,
    rank_tol: f64,
    res: &Resolution,
) -> Result<f64> {
    if kernel.nrows() != norm.dim() {
        return Err(Error::DimensionMismatch {
            what: "decomposition".into(),
            expected: norm.dim().to_string(),
            found: kernel.nrows().to_string(),
        });
    }
    let proj = decomposition_projector(kernel, complement, rank_tol)?;
    match norm {
        DecompositionNorm::Gram(space) => Ok(1.0 / operator_norm(&proj, space, space)?),
        DecompositionNorm::PNorm(space) => {
            if space.dim() > BRUTE_FORCE_MAX_DIM {
                return Err(Error::DimensionTooLarge {
                    dim: space.dim(),
                    limit: BRUTE_FORCE_MAX_DIM,
                });
            }
            let d = space.scales();
            let n = space.dim();
            let f = |x: &[f64]| {
                let mut out = vec![0.0; 2 * n];
                mat_vec_real(&proj, x, &mut out);
                let image = space.norm_real(&d, &out);
                if image > 0.0 {
                    space.norm_real(&d, x) / image
                } else {
                    f64::INFINITY
                }
            };
            let mut seeds: Vec<CVec> = complement.column_iter().map(|c| c.into_owned()).collect();
            seeds.extend(norming_directions(&proj, space));
            Ok(search::minimize_ratio(n, f, &seeds, res).value)
        }
    }
}

/// Fortin operator mapping into a caller-chosen complement of `ker(A_h*)`.
///
/// `kernel` must span `ker(A_h*)` in W_h coordinates; `complement` may be any
/// complement, not necessarily orthogonal. The guaranteed constant weakens to
/// `γ_Π = κ·α̂/‖a‖`, with `κ` measured in the W_h gram norm.
pub fn build_fortin_with_decomposition(
    pair: &SubspacePair,
    kernel: &CMat,
    complement: &CMat,
    tol: &Tolerances,
) -> Result<FortinOperator> {
    let restriction = restrict(pair)?;
    let adj = restriction.disc.mat_ah.adjoint();
    let rank = numerical_rank(&singular_values(&restriction.disc.mat_ah), tol.rank);
    let dim_wh = pair.dim_wh();
    if kernel.ncols() != dim_wh - rank.min(dim_wh) {
        return Err(Error::NotADecomposition {
            reason: format!(
                "kernel basis has {} columns but ker(A_h*) has dimension {}",
                kernel.ncols(),
                dim_wh - rank.min(dim_wh)
            ),
        });
    }
    if kernel.ncols() > 0 {
        let leak = frobenius(&(&adj * kernel)) / (frobenius(&adj) * frobenius(kernel));
        if leak > tol.rank.max(1e-12) {
            return Err(Error::NotADecomposition {
                reason: format!("kernel basis is not annihilated by A_h* (relative residual {leak:e})"),
            });
        }
    }
    let kappa = decomposition_kappa(
        DecompositionNorm::Gram(&restriction.space_wh),
        kernel,
        complement,
        tol.rank,
        &Resolution::default(),
    )?;
    assemble_fortin(&restriction, kernel.clone(), complement.clone(), kappa, tol.rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_matrix, real_vector};
    use approx::assert_relative_eq;

    #[test]
    fn exponent_conjugates() {
        assert_eq!(Exponent::One.conjugate(), Exponent::Inf);
        assert_eq!(Exponent::Inf.conjugate(), Exponent::One);
        assert_eq!(Exponent::Two.conjugate(), Exponent::Two);
        match Exponent::new(3.0).unwrap().conjugate() {
            Exponent::Finite(q) => assert_relative_eq!(q, 1.5),
            other => panic!("{other:?}"),
        }
        assert!(Exponent::new(0.5).is_err());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Inf);
    }

    #[test]
    fn weighted_norms_and_duals() {
        let x = CVec::from_vec(vec![c(3.0, 4.0), c(-1.0, 0.0)]);
        let s = PNormSpace::weighted(Exponent::One, vec![2.0, 1.0]).unwrap();
        assert_relative_eq!(s.norm(&x), 11.0);
        assert_relative_eq!(s.dual_norm(&x), 2.5);
        let s = PNormSpace::weighted(Exponent::Inf, vec![2.0, 1.0]).unwrap();
        assert_relative_eq!(s.norm(&x), 10.0);
        let s = PNormSpace::new(2, Exponent::Two).unwrap();
        assert_relative_eq!(s.norm(&x), 26f64.sqrt());
        let s = PNormSpace::new(2, Exponent::new(3.0).unwrap()).unwrap();
        assert_relative_eq!(s.norm(&x), 126f64.cbrt(), epsilon = 1e-14);
        assert!(PNormSpace::weighted(Exponent::Two, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn beta_examples() {
        let op = BanachOperator::uniform(CMat::identity(2, 2), Exponent::Two).unwrap();
        assert_relative_eq!(beta_bruteforce(&op, &Resolution::default()).unwrap().beta, 1.0, epsilon = 1e-9);
        let op = BanachOperator::uniform(CMat::from_diagonal(&real_vector(&[2.0, 1.0])), Exponent::Two).unwrap();
        assert_relative_eq!(beta_bruteforce(&op, &Resolution::default()).unwrap().beta, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn beta_row_vector_infinity_norm() {
        let y = PNormSpace::new(2, Exponent::Inf).unwrap();
        let z = PNormSpace::new(1, Exponent::Two).unwrap();
        let op = BanachOperator::new(real_matrix(1, 2, &[1.0, 1.0]), y, z).unwrap();
        let res = Resolution {
            grid: 100,
            ..Resolution::default()
        };
        assert_relative_eq!(beta_bruteforce(&op, &res).unwrap().beta, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn surjectivity_examples() {
        let res = Resolution::default();
        let op = BanachOperator::uniform(CMat::identity(3, 3), Exponent::Two).unwrap();
        assert!(surjectivity_test(&op, &res, 1e-10).unwrap().surjective);
        let op = BanachOperator::uniform(real_matrix(2, 3, &[1.0, 2.0, 3.0, 0.0, 0.0, 0.0]), Exponent::One).unwrap();
        let rep = surjectivity_test(&op, &res, 1e-10).unwrap();
        assert!(!rep.surjective);
        assert!(rep.beta.beta < 1e-12);
    }

    #[test]
    fn right_inverse_balanced_row() {
        let b = real_matrix(1, 2, &[1.0, 1.0]);
        let z = real_vector(&[1.0]);
        let op = BanachOperator::uniform(b.clone(), Exponent::Two).unwrap();
        let sol = min_norm_right_inverse(&op, &z, 1e-10).unwrap();
        assert_relative_eq!(sol.y[0].re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(sol.y[1].re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(sol.norm, 0.5f64.sqrt(), epsilon = 1e-14);

        let op = BanachOperator::uniform(b.clone(), Exponent::Inf).unwrap();
        let sol = min_norm_right_inverse(&op, &z, 1e-10).unwrap();
        assert!((sol.y[0] - c(0.5, 0.0)).norm() < 1e-9);
        assert!((sol.y[1] - c(0.5, 0.0)).norm() < 1e-9);
        assert_relative_eq!(sol.norm, 0.5, epsilon = 1e-10);

        let op = BanachOperator::uniform(b, Exponent::One).unwrap();
        let sol = min_norm_right_inverse(&op, &z, 1e-10).unwrap();
        assert_relative_eq!(sol.norm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn right_inverse_rejects_rank_deficiency() {
        let op = BanachOperator::uniform(real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]), Exponent::Inf).unwrap();
        let err = min_norm_right_inverse(&op, &real_vector(&[1.0, 0.0]), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NotSurjective { rank: 1, dim: 2 }));
    }

    #[test]
    fn duality_examples() {
        let res = Resolution::default();
        for m in [
            real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0]),
            real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        ] {
            let op = BanachOperator::uniform(m, Exponent::Two).unwrap();
            let check = infsup_duality_check(&op, &res, 1e-10).unwrap();
            assert_relative_eq!(check.l, 1.0, epsilon = 1e-9);
            assert_relative_eq!(check.r, 1.0, epsilon = 1e-9);
        }
        let op = BanachOperator::uniform(real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]), Exponent::Two).unwrap();
        assert!(matches!(infsup_duality_check(&op, &res, 1e-10), Err(Error::NotBijective { .. })));
    }

    #[test]
    fn kappa_closed_form_oblique() {
        let id = InnerProductSpace::identity(2);
        let kernel = real_matrix(2, 1, &[1.0, 0.0]);
        let complement = real_matrix(2, 1, &[1.0, 1.0]);
        let proj = decomposition_projector(&kernel, &complement, 1e-10).unwrap();
        assert!(crate::linalg::rel_frobenius_error(&proj, &real_matrix(2, 2, &[0.0, 1.0, 0.0, 1.0])) < 1e-15);
        let kappa = decomposition_kappa(DecompositionNorm::Gram(&id), &kernel, &complement, 1e-10, &Resolution::default()).unwrap();
        assert_relative_eq!(kappa, 0.5f64.sqrt(), epsilon = 1e-12);
        let p2 = PNormSpace::new(2, Exponent::Two).unwrap();
        let kappa = decomposition_kappa(DecompositionNorm::PNorm(&p2), &kernel, &complement, 1e-10, &Resolution::default()).unwrap();
        assert_relative_eq!(kappa, 0.5f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn kappa_rejects_non_decompositions() {
        let id = InnerProductSpace::identity(2);
        let v = real_matrix(2, 1, &[1.0, 1.0]);
        let err = decomposition_kappa(DecompositionNorm::Gram(&id), &v, &v, 1e-10, &Resolution::default()).unwrap_err();
        assert!(matches!(err, Error::NotADecomposition { .. }));
        let err = decomposition_kappa(DecompositionNorm::Gram(&id), &v, &CMat::zeros(2, 0), 1e-10, &Resolution::default()).unwrap_err();
        assert!(matches!(err, Error::NotADecomposition { .. }));
    }

    #[test]
    fn dimension_guard() {
        let op = BanachOperator::uniform(CMat::identity(9, 9), Exponent::Two).unwrap();
        assert!(matches!(beta_bruteforce(&op, &Resolution::default()), Err(Error::DimensionTooLarge { dim: 9, .. })));
    }
}
