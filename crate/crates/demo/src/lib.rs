//! Browser bindings. Every export returns a JSON string; failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use fortin_core::banach::{
    decomposition_kappa, min_norm_right_inverse, BanachOperator, DecompositionNorm, Exponent, PNormSpace, Resolution,
};
use fortin_core::fortin::{build_fortin, restrict, verify_fortin, Tolerances};
use fortin_core::linalg::{real_matrix, real_vector, DEFAULT_RANK_TOL};
use fortin_core::problems::{gen_fem1d, gen_random, Dims, ProblemInstance};
use fortin_core::spectra::infsup_constant;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

const EXPONENTS: [(&str, Exponent); 3] = [("1", Exponent::One), ("2", Exponent::Two), ("inf", Exponent::Inf)];

fn render(r: fortin_core::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn analyze(inst: &ProblemInstance) -> fortin_core::Result<Value> {
    let tol = Tolerances::default();
    let pair = inst.pair(tol.rank)?;
    let r = restrict(&pair)?;
    let alpha_fine = infsup_constant(&inst.form)?;
    let mut out = json!({
        "dims": [inst.space_v().dim(), inst.space_w().dim(), pair.dim_vh(), pair.dim_wh()],
        "norm_a": r.norm_a,
        "alpha_fine": alpha_fine,
        "alpha_hat": r.alpha_hat,
    });
    match build_fortin(&pair, &tol) {
        Ok(op) => {
            let cert = verify_fortin(&op, &pair, &tol)?;
            out["gamma_pi"] = json!(op.gamma_pi);
            out["alpha_tilde"] = json!(cert.alpha_tilde);
            out["norm_pi"] = json!(cert.measured_norm);
            out["bound"] = json!(cert.stability_bound);
            out["orthogonality_residual"] = json!(cert.orthogonality_residual);
            out["idempotence_residual"] = json!(cert.idempotence_residual);
            out["verdict"] = json!(if cert.passed() { "pass" } else { "fail" });
        }
        Err(e @ fortin_core::Error::InfSupFailure { .. }) => {
            out["verdict"] = json!("fail");
            out["message"] = json!(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}

pub fn analyze_random_value(seed: u32, v: usize, w: usize, vh: usize, wh: usize, cond: f64) -> fortin_core::Result<Value> {
    let dims = Dims { v, w, vh, wh };
    dims.validate()?;
    analyze(&gen_random(seed.into(), dims, cond, true, DEFAULT_RANK_TOL)?)
}

/// Constants and certificate summary of a seeded random complex instance.
#[wasm_bindgen]
pub fn analyze_random(seed: u32, v: usize, w: usize, vh: usize, wh: usize, cond: f64) -> String {
    render(analyze_random_value(seed, v, w, vh, wh, cond))
}

pub fn analyze_fem_value(cells: usize, coarsen: usize) -> fortin_core::Result<Value> {
    analyze(&gen_fem1d(cells, coarsen)?)
}

/// Constants and certificate summary of the 1D finite element pair.
#[wasm_bindgen]
pub fn analyze_fem(cells: usize, coarsen: usize) -> String {
    render(analyze_fem_value(cells, coarsen))
}

pub fn kappa_oblique_value(angle: f64) -> fortin_core::Result<Value> {
    let kernel = real_matrix(2, 1, &[1.0, 0.0]);
    let complement = real_matrix(2, 1, &[angle.cos(), angle.sin()]);
    let res = Resolution::default();
    let mut kappa = serde_json::Map::new();
    for (label, p) in EXPONENTS {
        let space = PNormSpace::new(2, p)?;
        let k = decomposition_kappa(DecompositionNorm::PNorm(&space), &kernel, &complement, DEFAULT_RANK_TOL, &res)?;
        kappa.insert(label.into(), json!(k));
    }
    Ok(json!({
        "angle": angle,
        "kappa": kappa,
        "euclidean_closed_form": angle.sin().abs(),
    }))
}

/// κ of C² = span{(1, 0)} ⊕ span{(cos θ, sin θ)} in the ℓ¹, ℓ² and ℓ∞ norms.
#[wasm_bindgen]
pub fn kappa_oblique(angle: f64) -> String {
    render(kappa_oblique_value(angle))
}

pub fn min_norm_row_value(b1: f64, b2: f64, z: f64) -> fortin_core::Result<Value> {
    let b = real_matrix(1, 2, &[b1, b2]);
    let rhs = real_vector(&[z]);
    let mut out = serde_json::Map::new();
    for (label, p) in EXPONENTS {
        let op = BanachOperator::uniform(b.clone(), p)?;
        let sol = min_norm_right_inverse(&op, &rhs, DEFAULT_RANK_TOL)?;
        // Hölder: the minimum is |z| / ‖b‖_q.
        let closed = z.abs() / op.space_y().dual_norm(&b.row(0).transpose());
        out.insert(
            label.into(),
            json!({
                "y": [sol.y[0].re, sol.y[1].re],
                "norm": sol.norm,
                "closed_form": closed,
            }),
        );
    }
    Ok(Value::Object(out))
}

/// Minimum-norm solutions of `b1·y1 + b2·y2 = z` for p = 1, 2, ∞.
#[wasm_bindgen]
pub fn min_norm_row(b1: f64, b2: f64, z: f64) -> String {
    render(min_norm_row_value(b1, b2, z))
}
