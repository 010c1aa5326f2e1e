//! Minimum-norm solutions of `B·y = z` in weighted coefficient p-norms.
//!
//! All paths parametrize the affine solution set as `y = y₀ + N·c`, where `y₀`
//! is the Euclidean least-norm solution and `N` an orthonormal basis of
//! `ker B`, so feasibility holds by construction and only `c` is optimized.
//!
//! * p = 2: closed form through the weighted pseudoinverse.
//! * p ∈ {1, ∞}: cutting-plane linear programming. The modulus of a complex
//!   coordinate is the supremum of `Re(e^{-iθ}·u)` over angles; each LP keeps
//!   finitely many such cuts, its value is a lower bound on the optimum, and
//!   the true norm of its minimizer an upper bound. Cuts are added at the
//!   phase of every violated coordinate until the two bounds meet.
//! * other p: damped Newton on `Σ dᵢᵖ|uᵢ|ᵖ` in the real coordinates of `c`.

use nalgebra::{DMatrix, DVector};

use super::simplex;
use super::{Exponent, PNormSpace};
use crate::error::{Error, Result};
use crate::linalg::{c, numerical_rank, orthonormal_completion, thin_svd, CMat, CVec, C64};

/// Relative gap between the LP lower bound and the attained norm.
pub const LP_GAP_TOL: f64 = 1e-10;
/// Relative Newton decrement at which the smooth path stops.
pub const NEWTON_TOL: f64 = 1e-8;
const MAX_CUT_ROUNDS: usize = 400;
const CUT_ANGLE_TOL: f64 = 1e-12;
const MAX_NEWTON_STEPS: usize = 200;

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub y: CVec,
    pub norm: f64,
    /// Certified lower bound on the minimum, when the method provides one.
    pub lower_bound: Option<f64>,
    pub iterations: usize,
}

pub(crate) struct AffineSet {
    pub y0: CVec,
    pub kernel: CMat,
}

pub(crate) fn affine_solutions(b: &CMat, z: &CVec, rank_tol: f64) -> Result<AffineSet> {
    let svd = thin_svd(&b.adjoint());
    let rank = numerical_rank(&svd.sigma, rank_tol);
    if rank < b.nrows() {
        return Err(Error::NotSurjective { rank, dim: b.nrows() });
    }
    // b* = U Σ V*, so b = V Σ U* and the least-norm solution is U Σ⁻¹ V* z.
    let u = svd.u.columns(0, rank).into_owned();
    let vt = svd.v_t.rows(0, rank).into_owned();
    let mut coeff = &vt * z;
    for (k, s) in svd.sigma.iter().take(rank).enumerate() {
        coeff[k] /= C64::from(*s);
    }
    Ok(AffineSet {
        y0: &u * coeff,
        kernel: orthonormal_completion(&u),
    })
}

pub(crate) fn solve(b: &CMat, z: &CVec, space: &PNormSpace, rank_tol: f64) -> Result<MinNormSolution> {
    match space.exponent() {
        Exponent::Two => weighted_least_norm(b, z, space, rank_tol),
        Exponent::One | Exponent::Inf => cutting_plane(b, z, space, rank_tol),
        Exponent::Finite(_) => newton(b, z, space, rank_tol),
    }
}

fn weighted_least_norm(b: &CMat, z: &CVec, space: &PNormSpace, rank_tol: f64) -> Result<MinNormSolution> {
    let d = space.scales();
    let scaled = CMat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] / d[j]);
    let set = affine_solutions(&scaled, z, rank_tol)?;
    let y = CVec::from_fn(b.ncols(), |j, _| set.y0[j] / d[j]);
    let norm = space.norm(&y);
    Ok(MinNormSolution {
        y,
        norm,
        lower_bound: Some(norm),
        iterations: 0,
    })
}

fn cutting_plane(b: &CMat, z: &CVec, space: &PNormSpace, rank_tol: f64) -> Result<MinNormSolution> {
    let set = affine_solutions(b, z, rank_tol)?;
    let n = b.ncols();
    let k = set.kernel.ncols();
    if k == 0 {
        let norm = space.norm(&set.y0);
        return Ok(MinNormSolution {
            y: set.y0,
            norm,
            lower_bound: Some(norm),
            iterations: 0,
        });
    }
    let d = space.scales();
    let is_inf = space.exponent() == Exponent::Inf;
    let y0_mod: Vec<f64> = set.y0.iter().zip(&d).map(|(u, d)| d * u.norm()).collect();

    // LP variables: c⁺ (2k), c⁻ (2k), s⁺, s⁻ (one pair for ∞, n pairs for p = 1).
    // Epigraph levels are t = t₀ + s⁺ − s⁻ with t₀ at the starting point, so the
    // origin is feasible.
    let levels = if is_inf { 1 } else { n };
    let t0: Vec<f64> = if is_inf {
        vec![y0_mod.iter().fold(0.0f64, |a, &b| a.max(b))]
    } else {
        y0_mod.clone()
    };
    let nc = 2 * k;
    let nvar = 2 * nc + 2 * levels;
    let mut cost = vec![0.0; nvar];
    for l in 0..levels {
        cost[2 * nc + 2 * l] = 1.0;
        cost[2 * nc + 2 * l + 1] = -1.0;
    }

    let mut cuts: Vec<(usize, f64)> = Vec::new();
    for i in 0..n {
        for q in 0..4 {
            cuts.push((i, q as f64 * std::f64::consts::FRAC_PI_2));
        }
    }

    let mut best: Option<(CVec, f64)> = None;
    let mut lower = 0.0f64;
    for round in 1..=MAX_CUT_ROUNDS {
        let mut rows = Vec::with_capacity(cuts.len());
        let mut rhs = Vec::with_capacity(cuts.len());
        for &(i, theta) in &cuts {
            let rot = C64::from_polar(1.0, -theta);
            let level = if is_inf { 0 } else { i };
            let mut row = vec![0.0; nvar];
            for j in 0..k {
                let g = rot * set.kernel[(i, j)];
                // Re(g·(a + ib)) = Re(g)·a − Im(g)·b
                row[2 * j] = d[i] * g.re;
                row[2 * j + 1] = -d[i] * g.im;
                row[nc + 2 * j] = -d[i] * g.re;
                row[nc + 2 * j + 1] = d[i] * g.im;
            }
            row[2 * nc + 2 * level] = -1.0;
            row[2 * nc + 2 * level + 1] = 1.0;
            rows.push(row);
            rhs.push((t0[level] - d[i] * (rot * set.y0[i]).re).max(0.0));
        }
        let sol = simplex::minimize(&cost, &rows, &rhs).map_err(|e| Error::SolverStall {
            reason: format!("cutting-plane LP: {e}"),
            residual: f64::NAN,
        })?;
        let cvec = CVec::from_fn(k, |j, _| c(sol.x[2 * j] - sol.x[nc + 2 * j], sol.x[2 * j + 1] - sol.x[nc + 2 * j + 1]));
        let y = &set.y0 + &set.kernel * cvec;
        let norm = space.norm(&y);
        let lp_value = t0.iter().sum::<f64>() + sol.objective;
        lower = lower.max(lp_value);
        if best.as_ref().is_none_or(|(_, b)| norm < *b) {
            best = Some((y.clone(), norm));
        }
        let upper = best.as_ref().map(|b| b.1).unwrap();
        if upper - lower <= LP_GAP_TOL * upper {
            let (y, norm) = best.unwrap();
            return Ok(MinNormSolution {
                y,
                norm,
                lower_bound: Some(lower),
                iterations: round,
            });
        }
        // Cut every coordinate of both the LP point and the incumbent at its phase.
        let mut added = false;
        let incumbent = best.as_ref().map(|b| b.0.clone()).unwrap();
        for point in [&y, &incumbent] {
            for i in 0..n {
                if point[i].norm() == 0.0 {
                    continue;
                }
                let phase = point[i].arg();
                let fresh = cuts.iter().all(|&(j, t)| j != i || angle_gap(t, phase) > CUT_ANGLE_TOL);
                if fresh {
                    cuts.push((i, phase));
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    let (_, upper) = best.unwrap();
    Err(Error::SolverStall {
        reason: "cutting-plane gap did not close".into(),
        residual: (upper - lower) / upper,
    })
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

fn newton(b: &CMat, z: &CVec, space: &PNormSpace, rank_tol: f64) -> Result<MinNormSolution> {
    let p = space.exponent().value();
    let set = affine_solutions(b, z, rank_tol)?;
    let n = b.ncols();
    let k = set.kernel.ncols();
    let d = space.scales();
    let w: Vec<f64> = d.iter().map(|d| d.powf(p)).collect();
    let objective = |y: &CVec| -> f64 { y.iter().zip(&w).map(|(u, w)| w * u.norm().powf(p)).sum() };

    let mut cvec = CVec::zeros(k);
    let mut y = set.y0.clone();
    let mut fy = objective(&y);
    let scale = y.iter().fold(0.0f64, |a, u| a.max(u.norm())).max(f64::MIN_POSITIVE);
    for step in 0..MAX_NEWTON_STEPS {
        if k == 0 {
            break;
        }
        let mut grad = DVector::<f64>::zeros(2 * k);
        let mut hess = DMatrix::<f64>::zeros(2 * k, 2 * k);
        for i in 0..n {
            let r = [y[i].re, y[i].im];
            let m = y[i].norm().max(1e-12 * scale);
            let g_coef = w[i] * p * m.powf(p - 2.0);
            let h_coef = w[i] * p * (p - 2.0) * m.powf(p - 4.0);
            // Jacobian of (Re uᵢ, Im uᵢ) with respect to (a_j, b_j).
            let mut jac = DMatrix::<f64>::zeros(2, 2 * k);
            for j in 0..k {
                let g = set.kernel[(i, j)];
                jac[(0, 2 * j)] = g.re;
                jac[(1, 2 * j)] = g.im;
                jac[(0, 2 * j + 1)] = -g.im;
                jac[(1, 2 * j + 1)] = g.re;
            }
            let rv = nalgebra::Vector2::new(r[0], r[1]);
            let local_h = nalgebra::Matrix2::identity() * g_coef + rv * rv.transpose() * h_coef;
            let jt = jac.transpose();
            grad += &jt * DVector::from_column_slice(&[g_coef * r[0], g_coef * r[1]]);
            let lh = DMatrix::from_column_slice(2, 2, local_h.as_slice());
            hess += &jt * lh * &jac;
        }
        let trace = hess.trace().abs().max(f64::MIN_POSITIVE);
        for i in 0..2 * k {
            hess[(i, i)] += 1e-14 * trace;
        }
        let Some(chol) = hess.clone().cholesky() else {
            return Err(Error::SolverStall {
                reason: "Newton Hessian is not positive definite".into(),
                residual: grad.norm(),
            });
        };
        let dir = -chol.solve(&grad);
        let decrement = -grad.dot(&dir);
        if decrement <= NEWTON_TOL * NEWTON_TOL * fy.max(f64::MIN_POSITIVE) {
            let norm = space.norm(&y);
            return Ok(MinNormSolution {
                y,
                norm,
                lower_bound: None,
                iterations: step,
            });
        }
        let mut t = 1.0;
        loop {
            let trial_c = &cvec + CVec::from_fn(k, |j, _| c(t * dir[2 * j], t * dir[2 * j + 1]));
            let trial_y = &set.y0 + &set.kernel * &trial_c;
            let ft = objective(&trial_y);
            if ft <= fy - 0.25 * t * decrement || t < 1e-12 {
                cvec = trial_c;
                y = trial_y;
                fy = ft;
                break;
            }
            t *= 0.5;
        }
    }
    if k == 0 {
        let norm = space.norm(&y);
        return Ok(MinNormSolution {
            y,
            norm,
            lower_bound: Some(norm),
            iterations: 0,
        });
    }
    Err(Error::SolverStall {
        reason: format!("Newton did not converge for p = {p}"),
        residual: fy,
    })
}
