//! Inner-product spaces, whitening, and the singular-value machinery behind
//! every boundedness and inf-sup constant.
//!
//! A space is a coefficient space `C^n` with a Hermitian positive-definite
//! Gram matrix `G`, so that `‖v‖² = v*·G·v`. Writing `G = L·L*`, the change of
//! variables `u = L*·v` makes the norm Euclidean. A sesquilinear form
//! `a(v, w) = w*·A·v` then becomes the plain matrix `M = L_W⁻¹·A·L_V⁻*`, and
//!
//! * `‖a‖ = sup_v sup_w |a(v,w)| / (‖v‖‖w‖)` is the largest singular value of `M`,
//! * `inf_v sup_w |a(v,w)| / (‖v‖‖w‖)` is its `dim V`-th singular value
//!   (zero when `dim W < dim V`).
//!
//! The `alpha` computed here on a designated fine space is only a surrogate
//! for the continuous inf-sup constant; reports call it "fine-space inf-sup".

use crate::error::{Error, Result};
use crate::linalg::{check_len, cholesky_lower, check_shape, hermitian_defect, norm2, singular_values, CMat, CVec};

/// Entrywise Hermitian tolerance, relative to the largest Gram entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductSpace {
    gram: CMat,
}

impl InnerProductSpace {
    /// Validates that `gram` is square, Hermitian and positive definite.
    pub fn new(gram: CMat) -> Result<Self> {
        Self::named("gram", gram)
    }

    pub fn named(what: &str, gram: CMat) -> Result<Self> {
        if gram.nrows() != gram.ncols() || gram.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                what: what.to_string(),
                expected: "nonempty square matrix".into(),
                found: format!("{}x{}", gram.nrows(), gram.ncols()),
            });
        }
        let asymmetry = hermitian_defect(&gram);
        if asymmetry > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                what: what.to_string(),
                asymmetry,
            });
        }
        if cholesky_lower(&gram).is_none() {
            return Err(Error::NotPositiveDefinite { what: what.to_string() });
        }
        Ok(Self { gram })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            gram: CMat::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn inner(&self, u: &CVec, v: &CVec) -> num_complex::Complex64 {
        v.dotc(&(&self.gram * u))
    }

    pub fn norm(&self, v: &CVec) -> f64 {
        self.inner(v, v).re.max(0.0).sqrt()
    }
}

/// Lower-triangular factor `L` with `gram = L·L*`.
#[derive(Debug, Clone)]
pub struct WhitenFactor {
    lower: CMat,
}

impl WhitenFactor {
    pub fn lower(&self) -> &CMat {
        &self.lower
    }

    /// `L⁻¹·x`
    pub fn solve_lower(&self, x: &CMat) -> CMat {
        self.lower
            .solve_lower_triangular(x)
            .expect("whitening factor has a positive diagonal")
    }

    /// `L⁻*·x`
    pub fn solve_upper(&self, x: &CMat) -> CMat {
        self.lower
            .ad_solve_lower_triangular(x)
            .expect("whitening factor has a positive diagonal")
    }

    pub fn solve_lower_vec(&self, x: &CVec) -> CVec {
        self.lower
            .solve_lower_triangular(x)
            .expect("whitening factor has a positive diagonal")
    }

    /// `L*·x`, the whitened coordinates of a coefficient vector.
    pub fn apply_adjoint(&self, x: &CMat) -> CMat {
        self.lower.adjoint() * x
    }
}

pub fn whiten(space: &InnerProductSpace) -> Result<WhitenFactor> {
    let lower = cholesky_lower(&space.gram).ok_or_else(|| Error::NotPositiveDefinite { what: "gram".into() })?;
    Ok(WhitenFactor { lower })
}

/// Coefficient matrix of a sesquilinear form on `V × W`:
/// entry `(j, i)` is `a(φ_i, ψ_j)`, so `a(v, w) = w*·mat·v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormMatrix {
    mat: CMat,
    space_v: InnerProductSpace,
    space_w: InnerProductSpace,
}

impl FormMatrix {
    pub fn new(mat: CMat, space_v: InnerProductSpace, space_w: InnerProductSpace) -> Result<Self> {
        check_shape("form matrix", &mat, space_w.dim(), space_v.dim())?;
        Ok(Self { mat, space_v, space_w })
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn space_v(&self) -> &InnerProductSpace {
        &self.space_v
    }

    pub fn space_w(&self) -> &InnerProductSpace {
        &self.space_w
    }

    pub fn eval(&self, v: &CVec, w: &CVec) -> num_complex::Complex64 {
        w.dotc(&(&self.mat * v))
    }

    /// The form `(w, v) ↦ conj(a(v, w))` on `W × V`.
    pub fn adjoint(&self) -> FormMatrix {
        FormMatrix {
            mat: self.mat.adjoint(),
            space_v: self.space_w.clone(),
            space_w: self.space_v.clone(),
        }
    }

    /// `M = L_W⁻¹·mat·L_V⁻*`.
    pub fn whitened(&self) -> Result<CMat> {
        let lv = whiten(&self.space_v)?;
        let lw = whiten(&self.space_w)?;
        let left = lw.solve_lower(&self.mat);
        Ok(lv.solve_lower(&left.adjoint()).adjoint())
    }
}

/// An antilinear functional on `space`, `⟨θ, v⟩ = v*·t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    pub coeffs: CVec,
    pub space: InnerProductSpace,
}

impl DualVector {
    pub fn new(coeffs: CVec, space: InnerProductSpace) -> Result<Self> {
        check_len("dual vector", &coeffs, space.dim())?;
        Ok(Self { coeffs, space })
    }

    pub fn pair(&self, v: &CVec) -> num_complex::Complex64 {
        v.dotc(&self.coeffs)
    }
}

pub fn whitened_singular_values(form: &FormMatrix) -> Result<Vec<f64>> {
    Ok(singular_values(&form.whitened()?))
}

/// `‖a‖`, the boundedness constant of the form.
pub fn form_norm(form: &FormMatrix) -> Result<f64> {
    Ok(whitened_singular_values(form)?.first().copied().unwrap_or(0.0))
}

/// `inf_v sup_w |a(v,w)| / (‖v‖‖w‖)`.
pub fn infsup_constant(form: &FormMatrix) -> Result<f64> {
    let dim_v = form.space_v.dim();
    if form.space_w.dim() < dim_v {
        return Ok(0.0);
    }
    let sv = whitened_singular_values(form)?;
    Ok(sv[dim_v - 1])
}

/// `sup_x ‖M·x‖_to / ‖x‖_from`, the largest singular value of `L_to*·M·L_from⁻*`.
pub fn operator_norm(matrix: &CMat, from: &InnerProductSpace, to: &InnerProductSpace) -> Result<f64> {
    check_shape("operator", matrix, to.dim(), from.dim())?;
    let lf = whiten(from)?;
    let lt = whiten(to)?;
    let right = lf.solve_lower(&matrix.adjoint()).adjoint();
    Ok(singular_values(&lt.apply_adjoint(&right)).first().copied().unwrap_or(0.0))
}

/// `‖θ‖' = sup_v |⟨θ, v⟩| / ‖v‖ = ‖L⁻¹·t‖₂`.
pub fn dual_norm(theta: &DualVector) -> Result<f64> {
    let l = whiten(&theta.space)?;
    Ok(norm2(&l.solve_lower_vec(&theta.coeffs)))
}
