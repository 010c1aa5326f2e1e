//! Construction and verification of Fortin operators.
//!
//! Given a form `a` on `V × W` and subspaces `V_h ⊂ V`, `W_h ⊂ W` (columns of
//! the embeddings `P_V`, `P_W`), the discrete operator `A_h: V_h → W_h'` has
//! matrix `P_W*·A·P_V`, and its adjoint `A_h*: W_h → V_h'` is the conjugate
//! transpose. When the discrete inf-sup constant `α̂` is positive, `A_h*` is
//! onto, and restricted to the gram-orthogonal complement `K_h` of its kernel
//! it is invertible. With
//!
//! * `Θ(w) = (A·P_V)*·w`, the functional `v_h ↦ conj(a(v_h, w))`,
//! * `R = Q·(A_h*·Q)⁻¹` for a gram-orthonormal basis `Q` of `K_h`,
//!
//! the map `Π_h = R∘Θ: W → W_h` satisfies `a(v_h, Π_h w − w) = 0`, is
//! idempotent, and obeys `‖Π_h‖ ≤ ‖a‖ / α̂`. Everything is a matrix, so the
//! operator is linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_len, check_shape, frobenius, hermitian_part, lu_solve, numerical_rank, orthonormal_completion,
    orthonormal_range, rel_frobenius_error, singular_values, thin_svd, CMat, CVec, DEFAULT_RANK_TOL,
};
use crate::spectra::{
    form_norm, infsup_constant, operator_norm, whiten, DualVector, FormMatrix, InnerProductSpace,
};

/// Thresholds used by construction and verification. Always recorded in certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance on certificate residuals and bound slacks.
    pub residual: f64,
    /// Relative singular-value cutoff for rank and zero decisions.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            rank: DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubspacePair {
    form: FormMatrix,
    embed_v: CMat,
    embed_w: CMat,
}

impl SubspacePair {
    pub fn new(form: FormMatrix, embed_v: CMat, embed_w: CMat, rank_tol: f64) -> Result<Self> {
        check_shape("V_h embedding", &embed_v, form.space_v().dim(), embed_v.ncols())?;
        check_shape("W_h embedding", &embed_w, form.space_w().dim(), embed_w.ncols())?;
        for (what, p, space) in [
            ("V_h embedding", &embed_v, form.space_v()),
            ("W_h embedding", &embed_w, form.space_w()),
        ] {
            if p.ncols() == 0 {
                return Err(Error::InvalidDims(format!("{what} has no columns")));
            }
            if p.ncols() > p.nrows() {
                return Err(Error::RankDeficientEmbedding {
                    what: what.into(),
                    ratio: 0.0,
                });
            }
            let white = whiten(space)?.apply_adjoint(p);
            let sv = singular_values(&white);
            let ratio = sv[sv.len() - 1] / sv[0];
            if !(ratio > rank_tol) {
                return Err(Error::RankDeficientEmbedding {
                    what: what.into(),
                    ratio,
                });
            }
        }
        Ok(Self { form, embed_v, embed_w })
    }

    pub fn form(&self) -> &FormMatrix {
        &self.form
    }

    pub fn embed_v(&self) -> &CMat {
        &self.embed_v
    }

    pub fn embed_w(&self) -> &CMat {
        &self.embed_w
    }

    pub fn dim_vh(&self) -> usize {
        self.embed_v.ncols()
    }

    pub fn dim_wh(&self) -> usize {
        self.embed_w.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    /// `P_W*·A·P_V`, so `a(v_h, w_h) = w_h*·mat_ah·v_h`.
    pub mat_ah: CMat,
    /// `A·P_V`, so `a(v_h, w) = w*·cross·v_h` for fine `w`.
    pub cross: CMat,
}

#[derive(Debug, Clone)]
pub struct Restriction {
    pub disc: DiscreteOperator,
    pub space_vh: InnerProductSpace,
    pub space_wh: InnerProductSpace,
    pub alpha_hat: f64,
    /// `‖a‖` of the fine form.
    pub norm_a: f64,
}

impl Restriction {
    pub fn restricted_form(&self) -> FormMatrix {
        FormMatrix::new(self.disc.mat_ah.clone(), self.space_vh.clone(), self.space_wh.clone())
            .expect("restricted shapes agree")
    }

    /// The `(V_h, W)` cross form whose inf-sup constant is `α̃`.
    pub fn cross_form(&self, space_w: &InnerProductSpace) -> FormMatrix {
        FormMatrix::new(self.disc.cross.clone(), self.space_vh.clone(), space_w.clone())
            .expect("cross shapes agree")
    }

    fn infsup_threshold(&self, rank_tol: f64) -> f64 {
        rank_tol * self.norm_a
    }
}

fn induced_space(what: &str, gram: &CMat, embed: &CMat) -> Result<InnerProductSpace> {
    InnerProductSpace::named(what, hermitian_part(&(embed.adjoint() * gram * embed)))
}

/// Discrete operator, induced sub-Grams and the discrete inf-sup constant `α̂`.
pub fn restrict(pair: &SubspacePair) -> Result<Restriction> {
    let form = pair.form();
    let cross = form.mat() * pair.embed_v();
    let mat_ah = pair.embed_w().adjoint() * &cross;
    let space_vh = induced_space("V_h gram", form.space_v().gram(), pair.embed_v())?;
    let space_wh = induced_space("W_h gram", form.space_w().gram(), pair.embed_w())?;
    let restricted = FormMatrix::new(mat_ah.clone(), space_vh.clone(), space_wh.clone())?;
    let alpha_hat = infsup_constant(&restricted)?;
    let norm_a = form_norm(form)?;
    Ok(Restriction {
        disc: DiscreteOperator { mat_ah, cross },
        space_vh,
        space_wh,
        alpha_hat,
        norm_a,
    })
}

/// `Θ(w)`, with `⟨Θ(w), v_h⟩ = conj(a(v_h, w))`.
pub fn theta(restriction: &Restriction, w: &CVec) -> Result<DualVector> {
    check_len("fine W vector", w, restriction.disc.cross.nrows())?;
    DualVector::new(restriction.disc.cross.adjoint() * w, restriction.space_vh.clone())
}

/// Splitting `W_h = ker(A_h*) ⊕ K_h` with gram-orthonormal bases of both parts.
#[derive(Debug, Clone)]
pub struct KernelSplit {
    pub kernel: CMat,
    pub complement: CMat,
    /// Singular values of `L⁻¹·A_h`, which decided the rank.
    pub singular_values: Vec<f64>,
}

/// Kernel of `A_h*` and its gram-orthogonal complement `K_h` in `W_h`.
///
/// In whitened coordinates `u = L*·w` the complement is the range of
/// `L⁻¹·A_h`; its left singular vectors (ordered by singular value) give
/// the complement, and their orthonormal completion gives the kernel.
pub fn kernel_complement(disc: &DiscreteOperator, space_wh: &InnerProductSpace, rank_tol: f64) -> Result<KernelSplit> {
    check_shape("discrete operator", &disc.mat_ah, space_wh.dim(), disc.mat_ah.ncols())?;
    let l = whiten(space_wh)?;
    let white = l.solve_lower(&disc.mat_ah);
    let svd = thin_svd(&white);
    let rank = numerical_rank(&svd.sigma, rank_tol);
    let range = svd.u.columns(0, rank).into_owned();
    let null = orthonormal_completion(&range);
    Ok(KernelSplit {
        kernel: l.solve_upper(&null),
        complement: l.solve_upper(&range),
        singular_values: svd.sigma,
    })
}

fn require_infsup(restriction: &Restriction, rank_tol: f64) -> Result<()> {
    let threshold = restriction.infsup_threshold(rank_tol);
    if !(restriction.alpha_hat > threshold) {
        return Err(Error::InfSupFailure {
            alpha_hat: restriction.alpha_hat,
            threshold,
        });
    }
    Ok(())
}

fn restricted_inverse_factor(restriction: &Restriction, complement: &CMat, rank_tol: f64) -> Result<(CMat, f64)> {
    let square = restriction.disc.mat_ah.adjoint() * complement;
    if square.nrows() != square.ncols() {
        return Err(Error::InfSupFailure {
            alpha_hat: restriction.alpha_hat,
            threshold: restriction.infsup_threshold(rank_tol),
        });
    }
    let sv = singular_values(&square);
    let condition = sv[0] / sv[sv.len() - 1];
    Ok((square, condition))
}

/// `R_{A_h*}(θ)`: the unique `y ∈ K_h` with `A_h*·y = t`.
pub fn right_inverse(restriction: &Restriction, complement: &CMat, theta: &DualVector, rank_tol: f64) -> Result<CVec> {
    require_infsup(restriction, rank_tol)?;
    check_len("functional on V_h", &theta.coeffs, restriction.space_vh.dim())?;
    let (square, _) = restricted_inverse_factor(restriction, complement, rank_tol)?;
    let rhs = CMat::from_column_slice(theta.coeffs.len(), 1, theta.coeffs.as_slice());
    let coeffs = lu_solve(&square, &rhs)?;
    Ok((complement * coeffs).column(0).into_owned())
}

#[derive(Debug, Clone)]
pub struct FortinOperator {
    /// `(dim W_h) × (dim W)`: fine W-coefficients to W_h-coefficients.
    pub mat_pi: CMat,
    pub alpha_hat: f64,
    pub norm_a: f64,
    /// Guaranteed stability constant `κ·α̂/‖a‖`.
    pub gamma_pi: f64,
    /// Stability of the kernel/complement splitting; 1 for the orthogonal one.
    pub kappa: f64,
    /// Basis of the subspace `Π_h` maps into.
    pub complement_basis: CMat,
    pub kernel_basis: CMat,
    /// Condition number of `A_h*·Q`.
    pub condition: f64,
}

/// `Π_h = Q·(A_h*·Q)⁻¹·Θ` with `Q` spanning a complement of `ker(A_h*)`.
pub(crate) fn assemble_fortin(
    restriction: &Restriction,
    kernel: CMat,
    complement: CMat,
    kappa: f64,
    rank_tol: f64,
) -> Result<FortinOperator> {
    require_infsup(restriction, rank_tol)?;
    let (square, condition) = restricted_inverse_factor(restriction, &complement, rank_tol)?;
    let coeffs = lu_solve(&square, &restriction.disc.cross.adjoint())?;
    Ok(FortinOperator {
        mat_pi: &complement * coeffs,
        alpha_hat: restriction.alpha_hat,
        norm_a: restriction.norm_a,
        gamma_pi: kappa * restriction.alpha_hat / restriction.norm_a,
        kappa,
        complement_basis: complement,
        kernel_basis: kernel,
        condition,
    })
}

pub fn build_fortin(pair: &SubspacePair, tol: &Tolerances) -> Result<FortinOperator> {
    let restriction = restrict(pair)?;
    require_infsup(&restriction, tol.rank)?;
    let split = kernel_complement(&restriction.disc, &restriction.space_wh, tol.rank)?;
    assemble_fortin(&restriction, split.kernel, split.complement, 1.0, tol.rank)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub orthogonality: bool,
    pub stability: bool,
    pub idempotence: bool,
    pub range: bool,
    pub direct_bound: bool,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.orthogonality && self.stability && self.idempotence && self.range && self.direct_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// `‖A_h*·Π − Θ‖_F / ‖Θ‖_F`
    pub orthogonality_residual: f64,
    /// `‖Π_h‖_{W→W}`
    pub measured_norm: f64,
    /// `‖a‖ / (κ·α̂)`
    pub stability_bound: f64,
    /// `‖Π·P_W·Π − Π‖_F / ‖Π‖_F`
    pub idempotence_residual: f64,
    /// Relative part of `Π` outside the span of the complement basis.
    pub range_residual: f64,
    /// `α̂`
    pub direct_bound_lhs: f64,
    /// `α̃ / ‖Π_h‖`
    pub direct_bound_rhs: f64,
    pub alpha_tilde: f64,
    pub kappa: f64,
    pub condition: f64,
    pub tolerances: Tolerances,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    /// The ratio `(1/‖Π_h‖) / γ_Π`; at least 1 whenever the stability check passes.
    pub fn gap_ratio(&self) -> f64 {
        self.stability_bound / self.measured_norm
    }
}

/// Checks every conclusion of the converse construction against `tol`.
/// Failures are recorded in the verdict, never returned as errors.
pub fn verify_fortin(op: &FortinOperator, pair: &SubspacePair, tol: &Tolerances) -> Result<Certificate> {
    let restriction = restrict(pair)?;
    check_shape(
        "Fortin operator",
        &op.mat_pi,
        pair.dim_wh(),
        pair.form().space_w().dim(),
    )?;
    let space_w = pair.form().space_w();
    let theta_mat = restriction.disc.cross.adjoint();

    let orthogonality_residual = rel_frobenius_error(&(restriction.disc.mat_ah.adjoint() * &op.mat_pi), &theta_mat);

    let lifted = pair.embed_w() * &op.mat_pi;
    let measured_norm = operator_norm(&lifted, space_w, space_w)?;
    let stability_bound = restriction.norm_a / (op.kappa * restriction.alpha_hat);

    let idempotence_residual = rel_frobenius_error(&(&op.mat_pi * &lifted), &op.mat_pi);

    let range_basis = orthonormal_range(&op.complement_basis, tol.rank);
    let outside = &op.mat_pi - &range_basis * (range_basis.adjoint() * &op.mat_pi);
    let pi_scale = frobenius(&op.mat_pi);
    let range_residual = if pi_scale > 0.0 {
        frobenius(&outside) / pi_scale
    } else {
        0.0
    };

    let alpha_tilde = infsup_constant(&restriction.cross_form(space_w))?;
    let direct_bound_rhs = if measured_norm > 0.0 {
        alpha_tilde / measured_norm
    } else {
        f64::INFINITY
    };

    let verdict = Verdict {
        orthogonality: orthogonality_residual <= tol.residual,
        stability: measured_norm <= stability_bound * (1.0 + tol.residual),
        idempotence: idempotence_residual <= tol.residual,
        range: range_residual <= tol.rank.max(tol.residual),
        direct_bound: restriction.alpha_hat >= direct_bound_rhs * (1.0 - tol.residual),
    };
    Ok(Certificate {
        orthogonality_residual,
        measured_norm,
        stability_bound,
        idempotence_residual,
        range_residual,
        direct_bound_lhs: restriction.alpha_hat,
        direct_bound_rhs,
        alpha_tilde,
        kappa: op.kappa,
        condition: op.condition,
        tolerances: *tol,
        verdict,
    })
}
