//! Acceptance suite, run without the test harness so every criterion prints
//! its PASS/FAIL line. Exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use fortin_core::banach::{
    beta_bruteforce, build_fortin_with_decomposition, decomposition_kappa, infsup_duality_check, min_norm_right_inverse,
    surjectivity_test, BanachOperator, DecompositionNorm, Exponent, PNormSpace, Resolution,
};
use fortin_core::fortin::{build_fortin, kernel_complement, restrict, right_inverse, verify_fortin, SubspacePair, Tolerances};
use fortin_core::linalg::{c, real_matrix, CMat, CVec, DEFAULT_RANK_TOL};
use fortin_core::problems::{gen_fem1d, gen_random, Dims};
use fortin_core::spectra::{infsup_constant, DualVector, FormMatrix, InnerProductSpace};
use fortin_core::Error;
use rand::Rng;

const CERT_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-12;
const DUALITY_TOL: f64 = 2e-3;
const FEASIBILITY_TOL: f64 = 1e-10;
const BETA_SLACK: f64 = 1e-3;
const PINV_TOL: f64 = 1e-8;
const KAPPA_ORTHO_TOL: f64 = 1e-10;
const KAPPA_OBLIQUE_TOL: f64 = 1e-6;
const FEM_TOL: f64 = 1e-10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let passed = out.passed && in_time;
    println!(
        "{} criterion {id} ({name}): {} [{:.2}s of {:.0}s]",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    passed
}

fn criterion_1() -> Outcome {
    let tol = Tolerances {
        residual: CERT_TOL,
        rank: DEFAULT_RANK_TOL,
    };
    let mut g = rng(2024);
    let mut passed = 0;
    let mut worst_gap: f64 = 1.0;
    let mut failures = Vec::new();
    let mut seed = 0u64;
    let mut skipped = 0;
    while passed + failures.len() < 50 {
        let vh = g.random_range(1..=5);
        let wh = g.random_range(vh..=8);
        let d = Dims {
            v: g.random_range(vh..=12),
            w: g.random_range(wh..=16),
            vh,
            wh,
        };
        let cond = 10f64.powf(g.random_range(0.0..=3.0));
        seed += 1;
        let inst = gen_random(seed, d, cond, true, DEFAULT_RANK_TOL).expect("generator");
        let pair = inst.pair(DEFAULT_RANK_TOL).expect("pair");
        let r = restrict(&pair).expect("restriction");
        if r.alpha_hat <= DEFAULT_RANK_TOL * r.norm_a {
            skipped += 1;
            continue;
        }
        let op = build_fortin(&pair, &tol).expect("build");
        let cert = verify_fortin(&op, &pair, &tol).expect("verify");
        let v = &cert.verdict;
        if v.orthogonality && v.stability && v.idempotence && v.direct_bound {
            passed += 1;
            worst_gap = worst_gap.max(cert.gap_ratio());
        } else {
            failures.push(seed);
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{passed}/50 certificates pass (skipped {skipped} with α̂ ≤ rank_tol·‖a‖), largest bound/measured ratio {worst_gap:.3}, failing seeds {failures:?}"
        ),
    }
}

/// Random lower-triangular factor with positive diagonal.
fn random_factor(g: &mut rand_chacha::ChaCha8Rng, n: usize) -> CMat {
    let mut l = random_matrix(g, n, n);
    for i in 0..n {
        for j in i + 1..n {
            l[(i, j)] = c(0.0, 0.0);
        }
        l[(i, i)] = c(0.5 + l[(i, i)].norm(), 0.0);
    }
    l
}

fn criterion_2() -> Outcome {
    let tol = Tolerances::default();
    let mut g = rng(7);
    let mut worst_identity: f64 = 0.0;
    let mut worst_equal: f64 = 0.0;
    let mut all_pass = true;
    for n in [1, 2, 4, 7] {
        // Generic square invertible form: Π must be the identity.
        let gv = random_gram(&mut g, n, 0.5);
        let gw = random_gram(&mut g, n, 0.5);
        let form = FormMatrix::new(random_matrix(&mut g, n, n), InnerProductSpace::new(gv).unwrap(), InnerProductSpace::new(gw).unwrap()).unwrap();
        let pair = SubspacePair::new(form, CMat::identity(n, n), CMat::identity(n, n), DEFAULT_RANK_TOL).unwrap();
        let op = build_fortin(&pair, &tol).unwrap();
        worst_identity = worst_identity.max((&op.mat_pi - CMat::identity(n, n)).norm() / (n as f64).sqrt());
        all_pass &= verify_fortin(&op, &pair, &tol).unwrap().passed();

        // All whitened singular values equal: mat = s·L_W·U·L_Vᴴ with U unitary.
        let lv = random_factor(&mut g, n);
        let lw = random_factor(&mut g, n);
        let u = random_matrix(&mut g, n, n).qr().q();
        let s = g.random_range(0.5..3.0);
        let mat = &lw * u * lv.adjoint() * c(s, 0.0);
        let form = FormMatrix::new(
            mat,
            InnerProductSpace::new(&lv * lv.adjoint()).unwrap(),
            InnerProductSpace::new(&lw * lw.adjoint()).unwrap(),
        )
        .unwrap();
        let pair = SubspacePair::new(form, CMat::identity(n, n), CMat::identity(n, n), DEFAULT_RANK_TOL).unwrap();
        let op = build_fortin(&pair, &tol).unwrap();
        let cert = verify_fortin(&op, &pair, &tol).unwrap();
        all_pass &= cert.passed();
        worst_equal = worst_equal.max((1.0 / cert.measured_norm - op.gamma_pi).abs());
        worst_identity = worst_identity.max((&op.mat_pi - CMat::identity(n, n)).norm() / (n as f64).sqrt());
    }
    Outcome {
        passed: all_pass && worst_identity <= IDENTITY_TOL && worst_equal <= IDENTITY_TOL,
        detail: format!("max |Π − I| = {worst_identity:.1e}, max |1/‖Π‖ − γ_Π| with equal singular values = {worst_equal:.1e}"),
    }
}

fn criterion_3() -> Outcome {
    let res = Resolution::default();
    let mut g = rng(33);
    let mut worst_lr: f64 = 0.0;
    let mut worst_sv: f64 = 0.0;
    let mut count = 0;
    while count < 20 {
        let b = random_matrix(&mut g, 3, 3);
        let id = InnerProductSpace::identity(3);
        let form = FormMatrix::new(b.clone(), id.clone(), id).unwrap();
        let sigma_min = infsup_constant(&form).unwrap();
        let op = BanachOperator::uniform(b, Exponent::Two).unwrap();
        let d = match infsup_duality_check(&op, &res, DEFAULT_RANK_TOL) {
            Ok(d) => d,
            Err(Error::NotBijective { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        count += 1;
        worst_lr = worst_lr.max((d.l - d.r).abs());
        worst_sv = worst_sv.max((d.l - sigma_min).abs()).max((d.r - sigma_min).abs());
    }
    Outcome {
        passed: worst_lr <= DUALITY_TOL && worst_sv <= DUALITY_TOL,
        detail: format!("20 instances, max |l − r| = {worst_lr:.1e}, max distance to σ_min = {worst_sv:.1e}"),
    }
}

fn criterion_4() -> Outcome {
    let res = Resolution::default();
    let mut g = rng(44);
    let mut worst_feas: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    let mut worst_pinv: f64 = 0.0;
    let mut instances = 0;
    while instances < 20 {
        let m = g.random_range(1..=3);
        let n = g.random_range(m..=6);
        let b = random_matrix(&mut g, m, n);
        let z = random_vector(&mut g, m);
        let surjective = surjectivity_test(&BanachOperator::uniform(b.clone(), Exponent::Two).unwrap(), &res, DEFAULT_RANK_TOL)
            .map(|r| r.surjective)
            .unwrap_or(false);
        if !surjective {
            continue;
        }
        instances += 1;
        for p in [Exponent::One, Exponent::Two, Exponent::Inf] {
            let op = BanachOperator::uniform(b.clone(), p).unwrap();
            let beta = beta_bruteforce(&op, &res).unwrap().beta;
            let sol = min_norm_right_inverse(&op, &z, DEFAULT_RANK_TOL).unwrap();
            worst_feas = worst_feas.max((&b * &sol.y - &z).norm() / z.norm());
            worst_bound = worst_bound.max(beta * sol.norm / op.space_z().norm(&z) - 1.0);
            if p == Exponent::Two {
                // Hilbert path: Fortin right inverse for A_h = Bᴴ.
                let form = FormMatrix::new(b.adjoint(), InnerProductSpace::identity(m), InnerProductSpace::identity(n)).unwrap();
                let pair = SubspacePair::new(form, CMat::identity(m, m), CMat::identity(n, n), DEFAULT_RANK_TOL).unwrap();
                let r = restrict(&pair).unwrap();
                let split = kernel_complement(&r.disc, &r.space_wh, DEFAULT_RANK_TOL).unwrap();
                let t = DualVector::new(z.clone(), r.space_vh.clone()).unwrap();
                let y = right_inverse(&r, &split.complement, &t, DEFAULT_RANK_TOL).unwrap();
                worst_pinv = worst_pinv.max((&sol.y - &y).norm() / y.norm());
            }
        }
    }
    Outcome {
        passed: worst_feas <= FEASIBILITY_TOL && worst_bound <= BETA_SLACK && worst_pinv <= PINV_TOL,
        detail: format!(
            "20 instances × p ∈ {{1, 2, ∞}}: max feasibility {worst_feas:.1e}, max β‖y‖/‖z‖ − 1 = {worst_bound:.1e}, p = 2 vs Hilbert path {worst_pinv:.1e}"
        ),
    }
}

fn criterion_5() -> Outcome {
    let res = Resolution::default();
    let mut g = rng(55);
    let mut worst_ortho: f64 = 0.0;
    for n in [2, 3, 4, 6] {
        let gram = random_gram(&mut g, n, 0.5);
        let space = InnerProductSpace::new(gram.clone()).unwrap();
        let kernel = random_matrix(&mut g, n, n / 2);
        // Gram-orthogonal complement: G⁻¹ applied to the Euclidean complement of the kernel.
        let euclid = fortin_core::linalg::orthonormal_completion(&kernel.clone().qr().q());
        let complement = lu_inverse(&gram) * euclid;
        let k = decomposition_kappa(DecompositionNorm::Gram(&space), &kernel, &complement, DEFAULT_RANK_TOL, &res).unwrap();
        worst_ortho = worst_ortho.max((k - 1.0).abs());
    }

    let kernel = real_matrix(2, 1, &[1.0, 0.0]);
    let complement = real_matrix(2, 1, &[1.0, 1.0]);
    let target = 0.5f64.sqrt();
    let k_gram = decomposition_kappa(DecompositionNorm::Gram(&InnerProductSpace::identity(2)), &kernel, &complement, DEFAULT_RANK_TOL, &res).unwrap();
    let p2 = PNormSpace::new(2, Exponent::Two).unwrap();
    let k_search = decomposition_kappa(DecompositionNorm::PNorm(&p2), &kernel, &complement, DEFAULT_RANK_TOL, &res).unwrap();
    let oblique_err = (k_gram - target).abs().max((k_search - target).abs());

    let tol = Tolerances::default();
    let mut bound_ok = true;
    let mut worst_ratio: f64 = 0.0;
    // The coordinate example with K = span{(1, 1)}.
    let id = InnerProductSpace::identity(3);
    let form = FormMatrix::new(CMat::identity(3, 3), id.clone(), id).unwrap();
    let pair = SubspacePair::new(form, real_matrix(3, 1, &[1.0, 0.0, 0.0]), real_matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]), DEFAULT_RANK_TOL).unwrap();
    let mut cases = vec![(pair, real_matrix(2, 1, &[0.0, 1.0]), real_matrix(2, 1, &[1.0, 1.0]))];
    for seed in 0..10 {
        let inst = gen_random(500 + seed, Dims { v: 6, w: 9, vh: 2, wh: 5 }, 100.0, true, DEFAULT_RANK_TOL).unwrap();
        let pair = inst.pair(DEFAULT_RANK_TOL).unwrap();
        let r = restrict(&pair).unwrap();
        let split = kernel_complement(&r.disc, &r.space_wh, DEFAULT_RANK_TOL).unwrap();
        let tilt = random_matrix(&mut g, split.kernel.ncols(), split.complement.ncols());
        let oblique = &split.complement + &split.kernel * tilt;
        cases.push((pair, split.kernel, oblique));
    }
    for (pair, kernel, complement) in &cases {
        let op = build_fortin_with_decomposition(pair, kernel, complement, &tol).unwrap();
        let cert = verify_fortin(&op, pair, &tol).unwrap();
        let bound = op.norm_a / (op.kappa * op.alpha_hat);
        bound_ok &= cert.passed() && cert.measured_norm <= bound * (1.0 + CERT_TOL);
        worst_ratio = worst_ratio.max(cert.measured_norm / bound);
    }
    Outcome {
        passed: worst_ortho <= KAPPA_ORTHO_TOL && oblique_err <= KAPPA_OBLIQUE_TOL && bound_ok,
        detail: format!(
            "orthogonal max |κ − 1| = {worst_ortho:.1e}, oblique C² |κ − 1/√2| = {oblique_err:.1e}, {} oblique builds with max ‖Π‖κα̂/‖a‖ = {worst_ratio:.6}",
            cases.len()
        ),
    }
}

fn criterion_6() -> Outcome {
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    let mut certs = true;
    let mut alphas = Vec::new();
    for cells in [8, 16, 32] {
        let inst = gen_fem1d(cells, 2).unwrap();
        let pair = inst.pair(DEFAULT_RANK_TOL).unwrap();
        let op = build_fortin(&pair, &tol).unwrap();
        certs &= verify_fortin(&op, &pair, &tol).unwrap().passed();
        let g_vh = inst.embed_v.adjoint() * inst.space_v().gram() * &inst.embed_v;
        let g_wh = inst.embed_w.adjoint() * inst.space_w().gram() * &inst.embed_w;
        let a_h = inst.embed_w.adjoint() * inst.form.mat() * &inst.embed_v;
        let (_, oracle) = norm_and_infsup(&a_h, &g_vh, &g_wh);
        worst = worst.max(rel_err(op.alpha_hat, oracle));
        alphas.push(infsup_constant(&inst.form).unwrap());
    }
    Outcome {
        passed: worst <= FEM_TOL && certs,
        detail: format!("n ∈ {{8, 16, 32}}: max relative α̂ error {worst:.1e}, certificates pass = {certs}, fine α = {alphas:.6?}"),
    }
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let mut messages = Vec::new();
    let mut ok = true;

    // Zero column: V_h = span{e₂} with the form killing e₂.
    let id = InnerProductSpace::identity(3);
    let mut mat = CMat::identity(3, 3);
    mat.column_mut(1).fill(c(0.0, 0.0));
    let form = FormMatrix::new(mat, id.clone(), id.clone()).unwrap();
    let zero_col = SubspacePair::new(form, real_matrix(3, 1, &[0.0, 1.0, 0.0]), CMat::identity(3, 3), DEFAULT_RANK_TOL).unwrap();

    // dim W_h < dim V_h.
    let form = FormMatrix::new(CMat::identity(3, 3), id.clone(), id.clone()).unwrap();
    let thin_w = SubspacePair::new(form, CMat::identity(3, 3).columns(0, 2).into_owned(), real_matrix(3, 1, &[1.0, 0.0, 0.0]), DEFAULT_RANK_TOL).unwrap();

    // Nearly annihilated direction, α̂ ≈ 1e-14·‖a‖.
    let form = FormMatrix::new(CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(1e-14, 0.0), c(1.0, 0.0)])), id.clone(), id).unwrap();
    let near = SubspacePair::new(form, CMat::identity(3, 3), CMat::identity(3, 3), DEFAULT_RANK_TOL).unwrap();

    for (name, pair) in [("zero column", zero_col), ("dim W_h < dim V_h", thin_w), ("near-singular", near)] {
        match build_fortin(&pair, &tol) {
            Err(e @ Error::InfSupFailure { .. }) => {
                let msg = e.to_string();
                ok &= msg.contains("discrete inf-sup");
                messages.push(format!("{name}: \"{msg}\""));
            }
            Err(e) => {
                ok = false;
                messages.push(format!("{name}: wrong error {e}"));
            }
            Ok(_) => {
                ok = false;
                messages.push(format!("{name}: built silently"));
            }
        }
    }
    Outcome {
        passed: ok,
        detail: messages.join("; "),
    }
}

fn main() {
    let results = [
        run(1, "converse-Fortin certificate suite", Duration::from_secs(10), criterion_1),
        run(2, "full-space degenerate case", Duration::from_secs(1), criterion_2),
        run(3, "inf-sup duality", Duration::from_secs(30), criterion_3),
        run(4, "right-inverse bound", Duration::from_secs(30), criterion_4),
        run(5, "κ machinery", Duration::from_secs(5), criterion_5),
        run(6, "FEM family", Duration::from_secs(10), criterion_6),
        run(7, "failure detection", Duration::from_secs(1), criterion_7),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
