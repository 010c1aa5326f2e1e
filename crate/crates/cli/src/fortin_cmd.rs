use std::ops::Range;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgGroup, Args};
use fortin_core::fortin::{build_fortin, restrict, verify_fortin, Certificate, Tolerances, Verdict as Checks};
use fortin_core::linalg::CMat;
use fortin_core::problems::{gen_random, load, matrix_to_json, to_json, Dims, ProblemInstance};
use fortin_core::spectra::infsup_constant;
use fortin_core::Error;
use rayon::prelude::*;
use serde_json::Value;

use crate::report::{elapsed_ms, sci, Constants, Entry, Report, Verdict};
use crate::{is_property_failure, CliError, Common};

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    file: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["file", "seed_range"])))]
pub struct FortinArgs {
    file: Option<PathBuf>,
    /// Seeded random instances `A..B` (end exclusive) or `A..=B`.
    #[arg(long, value_parser = parse_seed_range, requires = "dims")]
    seed_range: Option<Range<u64>>,
    #[arg(long)]
    dims: Option<Dims>,
    #[arg(long, default_value_t = 1.0)]
    cond: f64,
    #[arg(long)]
    real: bool,
    /// Run the full certificate.
    #[arg(long)]
    verify: bool,
    /// Write the operator matrix to this file (single instance only).
    #[arg(long)]
    dump: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn parse_seed_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected A..B, got {s:?}"));
    };
    let a: u64 = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    let end = if inclusive { b.checked_add(1).ok_or("range end overflows")? } else { b };
    if end <= a {
        return Err(format!("empty seed range {s:?}"));
    }
    Ok(a..end)
}

fn load_instance(path: &PathBuf) -> Result<ProblemInstance, CliError> {
    load(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn instance_value(inst: &ProblemInstance) -> Result<Value, CliError> {
    let text = to_json(inst)?;
    serde_json::from_str(&text).map_err(|e| CliError::input(e.to_string()))
}

fn analyze_entry(label: String, inst: &ProblemInstance, tol: &Tolerances) -> Result<Entry, CliError> {
    let mut entry = Entry::new(label, instance_value(inst)?);
    let start = Instant::now();
    let pair = inst.pair(tol.rank)?;
    let r = restrict(&pair)?;
    let constants = Constants {
        norm_a: r.norm_a,
        alpha_fine: infsup_constant(&inst.form)?,
        alpha_hat: r.alpha_hat,
        infsup_threshold: tol.rank * r.norm_a,
        alpha_tilde: Some(infsup_constant(&r.cross_form(inst.space_w()))?),
        gamma_pi: None,
        kappa: None,
    };
    entry.timings_ms.insert("constants", elapsed_ms(start));
    entry.summary = vec![
        ("norm_a", sci(constants.norm_a)),
        ("alpha_fine", sci(constants.alpha_fine)),
        ("alpha_hat", sci(constants.alpha_hat)),
        ("alpha_tilde", sci(constants.alpha_tilde.unwrap_or(0.0))),
    ];
    if !(constants.alpha_hat > constants.infsup_threshold) {
        entry.fail(
            Error::InfSupFailure {
                alpha_hat: constants.alpha_hat,
                threshold: constants.infsup_threshold,
            }
            .to_string(),
        );
    }
    entry.constants = Some(constants);
    Ok(entry)
}

pub fn analyze(args: AnalyzeArgs) -> Result<bool, CliError> {
    let started = Instant::now();
    let tol = args.common.tolerances()?;
    let inst = load_instance(&args.file)?;
    let entry = analyze_entry(args.file.display().to_string(), &inst, &tol)?;
    Report::new("analyze", tol.into(), vec![entry], started).emit(&args.common)
}

fn failed_checks(v: &Checks) -> Vec<&'static str> {
    [
        ("orthogonality", v.orthogonality),
        ("stability", v.stability),
        ("idempotence", v.idempotence),
        ("range", v.range),
        ("direct bound", v.direct_bound),
    ]
    .into_iter()
    .filter(|(_, ok)| !ok)
    .map(|(name, _)| name)
    .collect()
}

fn certificate_summary(entry: &mut Entry, cert: &Certificate) {
    let worst = cert
        .orthogonality_residual
        .max(cert.idempotence_residual)
        .max(cert.range_residual);
    entry.summary.push(("norm_pi", sci(cert.measured_norm)));
    entry.summary.push(("bound", sci(cert.stability_bound)));
    entry.summary.push(("max_residual", sci(worst)));
}

/// Builds (and optionally certifies) one operator. Property failures become a
/// failing entry; input errors abort the run.
fn fortin_entry(label: String, inst: &ProblemInstance, tol: &Tolerances, verify: bool) -> Result<(Entry, Option<CMat>), CliError> {
    let mut entry = Entry::new(label, instance_value(inst)?);
    let pair = inst.pair(tol.rank)?;
    let start = Instant::now();
    let built = build_fortin(&pair, tol);
    entry.timings_ms.insert("build", elapsed_ms(start));
    let op = match built {
        Ok(op) => op,
        Err(e) if is_property_failure(&e) => {
            if let Ok(r) = restrict(&pair) {
                entry.constants = Some(Constants {
                    norm_a: r.norm_a,
                    alpha_fine: infsup_constant(&inst.form)?,
                    alpha_hat: r.alpha_hat,
                    infsup_threshold: tol.rank * r.norm_a,
                    ..Constants::default()
                });
                entry.summary.push(("alpha_hat", sci(r.alpha_hat)));
            }
            entry.fail(e.to_string());
            return Ok((entry, None));
        }
        Err(e) => return Err(e.into()),
    };
    let mut constants = Constants {
        norm_a: op.norm_a,
        alpha_fine: infsup_constant(&inst.form)?,
        alpha_hat: op.alpha_hat,
        infsup_threshold: tol.rank * op.norm_a,
        alpha_tilde: None,
        gamma_pi: Some(op.gamma_pi),
        kappa: Some(op.kappa),
    };
    entry.summary.push(("alpha_hat", sci(op.alpha_hat)));
    entry.summary.push(("gamma_pi", sci(op.gamma_pi)));
    if verify {
        let start = Instant::now();
        let cert = verify_fortin(&op, &pair, tol)?;
        entry.timings_ms.insert("verify", elapsed_ms(start));
        constants.alpha_tilde = Some(cert.alpha_tilde);
        certificate_summary(&mut entry, &cert);
        if !cert.passed() {
            entry.fail(format!("Fortin certificate failed: {}", failed_checks(&cert.verdict).join(", ")));
        }
        entry.certificate = Some(cert);
    }
    entry.constants = Some(constants);
    Ok((entry, Some(op.mat_pi)))
}

pub fn fortin(args: FortinArgs) -> Result<bool, CliError> {
    let started = Instant::now();
    let tol = args.common.tolerances()?;
    let (entries, dumped) = match (&args.file, &args.seed_range) {
        (Some(path), _) => {
            let inst = load_instance(path)?;
            let (entry, pi) = fortin_entry(path.display().to_string(), &inst, &tol, args.verify)?;
            (vec![entry], pi)
        }
        (None, Some(range)) => {
            if args.dump.is_some() {
                return Err(CliError::input("--dump needs a single problem file"));
            }
            let dims = args.dims.expect("clap enforces --dims");
            dims.validate()?;
            let complex = !args.real;
            let entries = range
                .clone()
                .into_par_iter()
                .map(|seed| {
                    let inst = gen_random(seed, dims, args.cond, complex, tol.rank)?;
                    fortin_entry(format!("seed {seed}"), &inst, &tol, args.verify).map(|(e, _)| e)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (entries, None)
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    if let (Some(path), Some(pi)) = (&args.dump, &dumped) {
        std::fs::write(path, matrix_to_json(pi)? + "\n").map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    let report = Report::new("fortin", tol.into(), entries, started);
    let ok = report.emit(&args.common)?;
    debug_assert_eq!(ok, report.verdict == Verdict::Pass);
    Ok(ok)
}
