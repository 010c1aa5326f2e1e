use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use fortin_core::banach::{
    beta_bruteforce, decomposition_kappa, decomposition_projector, infsup_duality_check, min_norm_right_inverse,
    surjectivity_test, BanachOperator, DecompositionNorm, Exponent, PNormSpace, Resolution,
};
use fortin_core::fortin::{restrict, Tolerances};
use fortin_core::linalg::{CMat, CVec};
use fortin_core::problems::{from_json, matrix_from_json, MATRIX_SCHEMA_VERSION};
use fortin_core::spectra::InnerProductSpace;
use serde_json::{json, Value};

use crate::input::{matrix_value, parse_matrix, parse_vector, vector_value};
use crate::report::{elapsed_ms, sci, Entry, Report, ReportTolerances};
use crate::{is_property_failure, CliError, Common};

/// Allowed relative excess of `β·‖y‖` over `‖z‖`.
pub const BETA_SLACK: f64 = 1e-3;
/// Allowed `|l − r| / max(1, l, r)`.
pub const DUALITY_TOL: f64 = 2e-3;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Check {
    /// Surjectivity by rank and by the brute-force inf-sup constant β.
    Beta,
    /// Minimum-norm preimage of `--z` and the bound β‖y‖ ≤ ‖z‖.
    Rightinv,
    /// Inf-sup constant of a bijection and of its adjoint.
    Duality,
    /// Stability constant of the decomposition `--kernel` ⊕ `--complement`.
    Kappa,
}

#[derive(Args, Debug)]
pub struct BanachArgs {
    check: Check,
    /// Matrix file, or problem file (then B is the adjoint of the discrete operator).
    #[arg(long, conflicts_with = "matrix")]
    file: Option<PathBuf>,
    /// Inline matrix, e.g. "1,1;0,2".
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Norm exponent on both sides: a number in [1, ∞) or "inf".
    #[arg(long, default_value = "2")]
    p: Exponent,
    /// Exponent of the domain Y (overrides --p).
    #[arg(long)]
    py: Option<Exponent>,
    /// Exponent of the target Z (overrides --p).
    #[arg(long)]
    pz: Option<Exponent>,
    /// Right-hand side for rightinv, e.g. "1,0".
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Kernel basis as columns, e.g. "1;0".
    #[arg(long, allow_hyphen_values = true)]
    kernel: Option<String>,
    /// Complement basis as columns, e.g. "1;1".
    #[arg(long, allow_hyphen_values = true)]
    complement: Option<String>,
    /// Random starts of the brute-force searches.
    #[arg(long, default_value_t = Resolution::default().starts)]
    resolution: usize,
    /// Grid points per angle on small spheres.
    #[arg(long, default_value_t = Resolution::default().grid)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

fn exponent_label(p: Exponent) -> String {
    match p {
        Exponent::Inf => "inf".into(),
        other => other.value().to_string(),
    }
}

fn read_operator_matrix(args: &BanachArgs, tol: &Tolerances) -> Result<(CMat, Value), CliError> {
    if let Some(s) = &args.matrix {
        return Ok((parse_matrix("--matrix", s)?, json!({ "source": "inline" })));
    }
    let path = args
        .file
        .as_ref()
        .ok_or_else(|| CliError::input("this check needs --matrix or --file"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let wrap = |e: fortin_core::Error| CliError::input(format!("{}: {e}", path.display()));
    let is_matrix = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| v.get("version").and_then(Value::as_str).map(|s| s == MATRIX_SCHEMA_VERSION))
        .unwrap_or(false);
    let source = json!({ "source": path.display().to_string() });
    if is_matrix {
        return Ok((matrix_from_json(&text).map_err(wrap)?, source));
    }
    let inst = from_json(&text).map_err(wrap)?;
    let r = restrict(&inst.pair(tol.rank)?)?;
    Ok((r.disc.mat_ah.adjoint(), json!({ "source": path.display().to_string(), "operator": "adjoint of the discrete operator" })))
}

fn operator(args: &BanachArgs, tol: &Tolerances) -> Result<(BanachOperator, Value), CliError> {
    let (mat, mut input) = read_operator_matrix(args, tol)?;
    let py = args.py.unwrap_or(args.p);
    let pz = args.pz.unwrap_or(args.p);
    input["matrix"] = matrix_value(&mat);
    input["p_y"] = json!(exponent_label(py));
    input["p_z"] = json!(exponent_label(pz));
    let (rows, cols) = mat.shape();
    let op = BanachOperator::new(mat, PNormSpace::new(cols, py)?, PNormSpace::new(rows, pz)?)?;
    Ok((op, input))
}

type CoreResult = Result<(), fortin_core::Error>;

fn beta(op: &BanachOperator, tol: &Tolerances, res: &Resolution, entry: &mut Entry) -> CoreResult {
    let rep = surjectivity_test(op, res, tol.rank)?;
    entry.summary = vec![
        ("rank", rep.rank.to_string()),
        ("beta", sci(rep.beta.beta)),
        ("threshold", sci(rep.threshold)),
    ];
    if !rep.surjective {
        entry.fail(format!("operator is not surjective (rank {} < {})", rep.rank, op.space_z().dim()));
    }
    entry.banach = Some(json!({
        "dim_z": op.space_z().dim(),
        "rank": rep.rank,
        "beta": rep.beta.beta,
        "scale": rep.beta.scale,
        "threshold": rep.threshold,
        "surjective": rep.surjective,
        "evaluations": rep.beta.evaluations,
        "resolution": rep.beta.resolution,
    }));
    Ok(())
}

fn rightinv(op: &BanachOperator, z: &CVec, tol: &Tolerances, res: &Resolution, entry: &mut Entry) -> CoreResult {
    let sol = min_norm_right_inverse(op, z, tol.rank)?;
    let estimate = beta_bruteforce(op, res)?;
    let z_norm = op.space_z().norm(z);
    let residual = (op.mat() * &sol.y - z).norm() / z.norm().max(f64::MIN_POSITIVE);
    let lhs = estimate.beta * sol.norm;
    entry.summary = vec![
        ("norm_y", sci(sol.norm)),
        ("beta", sci(estimate.beta)),
        ("residual", sci(residual)),
    ];
    let mut failed = Vec::new();
    if residual > tol.residual {
        failed.push(format!("residual {residual:e} exceeds {:e}", tol.residual));
    }
    if lhs > z_norm * (1.0 + BETA_SLACK) {
        failed.push(format!("beta·‖y‖ = {lhs:e} exceeds ‖z‖ = {z_norm:e}"));
    }
    if !failed.is_empty() {
        entry.fail(failed.join("; "));
    }
    let mut out = json!({
        "y": vector_value(&sol.y),
        "norm_y": sol.norm,
        "iterations": sol.iterations,
        "residual": residual,
        "norm_z": z_norm,
        "beta": estimate.beta,
        "beta_times_norm_y": lhs,
        "resolution": estimate.resolution,
    });
    if let Some(lower) = sol.lower_bound {
        out["lower_bound"] = json!(lower);
    }
    entry.banach = Some(out);
    Ok(())
}

fn duality(op: &BanachOperator, tol: &Tolerances, res: &Resolution, entry: &mut Entry) -> CoreResult {
    let d = infsup_duality_check(op, res, tol.rank)?;
    let gap = (d.l - d.r).abs() / d.l.max(d.r).max(1.0);
    entry.summary = vec![("l", sci(d.l)), ("r", sci(d.r)), ("gap", sci(gap))];
    if gap > DUALITY_TOL {
        entry.fail(format!("l and r differ by {gap:e} (relative), above {DUALITY_TOL:e}"));
    }
    entry.banach = Some(json!({
        "l": d.l,
        "r": d.r,
        "relative_gap": gap,
        "condition": d.condition,
        "resolution": d.resolution,
    }));
    Ok(())
}

fn kappa(kernel: &CMat, complement: &CMat, p: Exponent, tol: &Tolerances, res: &Resolution, entry: &mut Entry) -> CoreResult {
    let n = kernel.nrows();
    let projector = decomposition_projector(kernel, complement, tol.rank)?;
    // p = 2 is the Euclidean inner product, handled exactly.
    let euclid = InnerProductSpace::identity(n);
    let pspace = PNormSpace::new(n, p)?;
    let norm = if p == Exponent::Two {
        DecompositionNorm::Gram(&euclid)
    } else {
        DecompositionNorm::PNorm(&pspace)
    };
    let k = decomposition_kappa(norm, kernel, complement, tol.rank, res)?;
    entry.summary = vec![("kappa", sci(k)), ("norm_projector", sci(1.0 / k))];
    if !(k > 0.0 && k <= 1.0 + tol.residual) {
        entry.fail(format!("kappa = {k:e} is outside (0, 1]"));
    }
    let mut out = json!({
        "kappa": k,
        "norm_projector": 1.0 / k,
        "projector": matrix_value(&projector),
        "method": if p == Exponent::Two { "exact" } else { "search" },
    });
    if p != Exponent::Two {
        out["resolution"] = serde_json::to_value(res).expect("resolution serializes");
    }
    entry.banach = Some(out);
    Ok(())
}

/// Property failures become a failing entry; anything else is an input error.
fn settle(r: CoreResult, entry: &mut Entry) -> Result<(), CliError> {
    match r {
        Ok(()) => Ok(()),
        Err(e) if is_property_failure(&e) => {
            entry.fail(e.to_string());
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: BanachArgs) -> Result<bool, CliError> {
    let started = Instant::now();
    let tol = args.common.tolerances()?;
    let res = Resolution {
        starts: args.resolution,
        grid: args.grid,
        seed: args.seed,
    };
    let label = format!("{:?}", args.check).to_lowercase();
    let start = Instant::now();
    let entry = match args.check {
        Check::Kappa => {
            let need = |s: &Option<String>, flag: &str| -> Result<CMat, CliError> {
                let text = s.as_ref().ok_or_else(|| CliError::input(format!("kappa needs {flag}")))?;
                parse_matrix(flag, text)
            };
            let kernel = need(&args.kernel, "--kernel")?;
            let complement = need(&args.complement, "--complement")?;
            let input = json!({
                "kernel": matrix_value(&kernel),
                "complement": matrix_value(&complement),
                "p": exponent_label(args.p),
            });
            let mut entry = Entry::new(label, input);
            settle(kappa(&kernel, &complement, args.p, &tol, &res, &mut entry), &mut entry)?;
            entry
        }
        check => {
            let (op, input) = operator(&args, &tol)?;
            let mut entry = Entry::new(label, input);
            let r = match check {
                Check::Beta => beta(&op, &tol, &res, &mut entry),
                Check::Duality => duality(&op, &tol, &res, &mut entry),
                _ => {
                    let text = args.z.as_ref().ok_or_else(|| CliError::input("rightinv needs --z"))?;
                    let z = parse_vector("--z", text)?;
                    if z.len() != op.space_z().dim() {
                        return Err(CliError::input(format!(
                            "--z has {} entries, expected {}",
                            z.len(),
                            op.space_z().dim()
                        )));
                    }
                    entry.input["z"] = vector_value(&z);
                    rightinv(&op, &z, &tol, &res, &mut entry)
                }
            };
            settle(r, &mut entry)?;
            entry
        }
    };
    let mut entry = entry;
    entry.timings_ms.insert("check", elapsed_ms(start));
    let mut tolerances = ReportTolerances::from(tol);
    match args.check {
        Check::Rightinv => tolerances.beta_slack = Some(BETA_SLACK),
        Check::Duality => tolerances.duality = Some(DUALITY_TOL),
        _ => {}
    }
    Report::new("banach", tolerances, vec![entry], started).emit(&args.common)
}
