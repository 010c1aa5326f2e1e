use std::path::PathBuf;

use clap::{ArgGroup, Args};
use fortin_core::linalg::DEFAULT_RANK_TOL;
use fortin_core::problems::{gen_fem1d, gen_random, save, Dims};

use crate::CliError;

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("generator").required(true).args(["random", "fem1d"])))]
pub struct GenArgs {
    /// Seeded random instance.
    #[arg(long)]
    random: bool,
    /// Conforming P1 / P0 pair on a uniform 1D mesh.
    #[arg(long)]
    fem1d: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// dim V, dim W, dim V_h, dim W_h.
    #[arg(long)]
    dims: Option<Dims>,
    /// Condition number of the random Gram matrices.
    #[arg(long, default_value_t = 1.0)]
    cond: f64,
    /// Real instead of complex entries.
    #[arg(long)]
    real: bool,
    #[arg(long, default_value_t = 16)]
    cells: usize,
    #[arg(long, default_value_t = 2)]
    coarsen: usize,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

pub fn run(args: GenArgs) -> Result<bool, CliError> {
    let (instance, default_name) = if args.random {
        let dims = args
            .dims
            .ok_or_else(|| CliError::input("--random needs --dims v,w,vh,wh"))?;
        dims.validate()?;
        let inst = gen_random(args.seed, dims, args.cond, !args.real, args.rank_tol)?;
        let name = format!("random-{}-{}x{}x{}x{}.json", args.seed, dims.v, dims.w, dims.vh, dims.wh);
        (inst, name)
    } else {
        (gen_fem1d(args.cells, args.coarsen)?, format!("fem1d-{}-{}.json", args.cells, args.coarsen))
    };
    let path = args.out.unwrap_or_else(|| PathBuf::from(default_name));
    save(&instance, &path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if !args.quiet {
        let m = &instance.metadata;
        println!("wrote {}", path.display());
        println!("generator: {}", m.generator);
        if let Some(seed) = m.seed {
            println!("seed: {seed}");
        }
        println!("params: {}", serde_json::to_string(&m.params).unwrap_or_default());
        if m.redraws > 0 {
            println!("redraws: {}", m.redraws);
        }
        for note in &m.notes {
            println!("note: {note}");
        }
    }
    Ok(true)
}
