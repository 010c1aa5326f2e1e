//! Seeded test instances and their on-disk format.
//!
//! A problem file is one JSON document:
//!
//! ```json
//! {
//!   "version": "fortin-problem/1",
//!   "metadata": { "generator": "random", "seed": 42, "params": { ... }, "redraws": 0, "notes": [] },
//!   "spaces": { "V": { "dim": 2, "gram": [[1, 0], [0, 1]] }, "W": { ... } },
//!   "form": [[...], ...],
//!   "embeddings": { "V_h": [[...]], "W_h": [[...]] }
//! }
//! ```
//!
//! Matrices are arrays of rows. An entry with a zero imaginary part is a plain
//! number, anything else is `[re, im]`. Numbers are written as shortest
//! round-trip decimals, so `load(save(x))` reproduces every bit.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fortin::SubspacePair;
use crate::linalg::{c, hermitian_part, CMat, C64};
use crate::spectra::{FormMatrix, InnerProductSpace};

pub const SCHEMA_VERSION: &str = "fortin-problem/1";
pub const MATRIX_SCHEMA_VERSION: &str = "fortin-matrix/1";
const MAX_REDRAWS: u32 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub redraws: u32,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn named(generator: &str) -> Self {
        Self {
            generator: generator.into(),
            seed: None,
            params: BTreeMap::new(),
            redraws: 0,
            notes: Vec::new(),
        }
    }
}

/// The quintuple (V, W, a, V_h, W_h) plus provenance.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub form: FormMatrix,
    /// `dim V × dim V_h`
    pub embed_v: CMat,
    /// `dim W × dim W_h`
    pub embed_w: CMat,
    pub metadata: Metadata,
}

impl ProblemInstance {
    pub fn space_v(&self) -> &InnerProductSpace {
        self.form.space_v()
    }

    pub fn space_w(&self) -> &InnerProductSpace {
        self.form.space_w()
    }

    pub fn pair(&self, rank_tol: f64) -> Result<SubspacePair> {
        SubspacePair::new(self.form.clone(), self.embed_v.clone(), self.embed_w.clone(), rank_tol)
    }
}

impl PartialEq for ProblemInstance {
    fn eq(&self, other: &Self) -> bool {
        self.metadata == other.metadata
            && self.form.mat() == other.form.mat()
            && self.space_v().gram() == other.space_v().gram()
            && self.space_w().gram() == other.space_w().gram()
            && self.embed_v == other.embed_v
            && self.embed_w == other.embed_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub v: usize,
    pub w: usize,
    pub vh: usize,
    pub wh: usize,
}

impl Dims {
    pub fn validate(&self) -> Result<()> {
        let Dims { v, w, vh, wh } = *self;
        if v == 0 || w == 0 || vh == 0 || wh == 0 {
            return Err(Error::InvalidDims("all dimensions must be positive".into()));
        }
        if vh > v || wh > w {
            return Err(Error::InvalidDims(format!(
                "subspaces exceed their spaces: dim V_h = {vh}, dim V = {v}, dim W_h = {wh}, dim W = {w}"
            )));
        }
        if vh > wh {
            return Err(Error::InvalidDims(format!(
                "dim V_h = {vh} exceeds dim W_h = {wh}; the discrete inf-sup condition cannot hold"
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for Dims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidDims(format!("expected four comma-separated integers, got {s:?}")))?;
        match parts[..] {
            [v, w, vh, wh] => Ok(Dims { v, w, vh, wh }),
            _ => Err(Error::InvalidDims(format!("expected four dimensions, got {}", parts.len()))),
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, complex: bool) -> CMat {
    // Column-major fill; the draw order is part of the determinism contract.
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
        c(re, im)
    })
}

/// `U·diag(cond^t)·U*` with `t₀ = 0`, `t₁ = 1` and the rest uniform in [0, 1].
fn random_gram(rng: &mut ChaCha8Rng, n: usize, cond: f64, complex: bool) -> CMat {
    if cond == 1.0 {
        return CMat::identity(n, n);
    }
    let q = gaussian(rng, n, n, complex).qr().q();
    let spectrum: Vec<f64> = (0..n)
        .map(|k| match k {
            0 => 1.0,
            1 => cond,
            _ => cond.powf(rng.random::<f64>()),
        })
        .collect();
    let mut scaled = q.clone();
    for (j, s) in spectrum.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    hermitian_part(&(scaled * q.adjoint()))
}

/// Dense random instance from a seeded ChaCha8 stream.
pub fn gen_random(seed: u64, dims: Dims, cond: f64, complex: bool, rank_tol: f64) -> Result<ProblemInstance> {
    dims.validate()?;
    if !(cond >= 1.0) || !cond.is_finite() {
        return Err(Error::InvalidParameter(format!("gram condition number must be ≥ 1, got {cond}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space_v = InnerProductSpace::named("gram of V", random_gram(&mut rng, dims.v, cond, complex))?;
    let space_w = InnerProductSpace::named("gram of W", random_gram(&mut rng, dims.w, cond, complex))?;
    let form = FormMatrix::new(gaussian(&mut rng, dims.w, dims.v, complex), space_v, space_w)?;

    let mut redraws = 0;
    let (embed_v, embed_w) = loop {
        let ev = gaussian(&mut rng, dims.v, dims.vh, complex);
        let ew = gaussian(&mut rng, dims.w, dims.wh, complex);
        match SubspacePair::new(form.clone(), ev.clone(), ew.clone(), rank_tol) {
            Ok(_) => break (ev, ew),
            Err(Error::RankDeficientEmbedding { .. }) if redraws < MAX_REDRAWS => redraws += 1,
            Err(e) => return Err(e),
        }
    };

    let mut metadata = Metadata::named("random");
    metadata.seed = Some(seed);
    metadata.redraws = redraws;
    let p = &mut metadata.params;
    p.insert("dims".into(), serde_json::json!([dims.v, dims.w, dims.vh, dims.wh]));
    p.insert("cond".into(), serde_json::json!(cond));
    p.insert("complex".into(), serde_json::json!(complex));
    p.insert("rank_tol".into(), serde_json::json!(rank_tol));
    Ok(ProblemInstance {
        form,
        embed_v,
        embed_w,
        metadata,
    })
}

/// P1–P0 pairing `a(v, w) = ∫ v′·conj(w)` on (0, 1) with a two-level mesh.
///
/// V: continuous piecewise-linear, zero at both ends, H¹-seminorm gram.
/// W: piecewise constants, L² gram. V_h and W_h live on the mesh with
/// `cells / coarsen` cells, embedded by nodal interpolation and aggregation.
pub fn gen_fem1d(cells: usize, coarsen: usize) -> Result<ProblemInstance> {
    if cells < 4 {
        return Err(Error::InvalidDims(format!("need at least 4 fine cells, got {cells}")));
    }
    if coarsen == 0 || !cells.is_multiple_of(coarsen) {
        return Err(Error::InvalidDims(format!("{cells} fine cells cannot be coarsened by {coarsen}")));
    }
    let coarse = cells / coarsen;
    if coarse < 2 {
        return Err(Error::InvalidDims(format!("coarse mesh has {coarse} cell; need at least 2")));
    }
    let n = cells;
    let h = 1.0 / n as f64;

    // Node k of V is the fine interior node x_{k+1}; cell j is [x_j, x_{j+1}].
    let gram_v = CMat::from_fn(n - 1, n - 1, |i, j| match i.abs_diff(j) {
        0 => c(2.0 / h, 0.0),
        1 => c(-1.0 / h, 0.0),
        _ => c(0.0, 0.0),
    });
    let gram_w = CMat::from_diagonal_element(n, n, c(h, 0.0));
    let mat = CMat::from_fn(n, n - 1, |j, k| {
        if j == k {
            c(1.0, 0.0)
        } else if j == k + 1 {
            c(-1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let form = FormMatrix::new(
        mat,
        InnerProductSpace::named("gram of V", gram_v)?,
        InnerProductSpace::named("gram of W", gram_w)?,
    )?;

    // Coarse hat m (node m+1 of the coarse mesh) at fine node k+1.
    let embed_v = CMat::from_fn(n - 1, coarse - 1, |k, m| {
        let offset = (k + 1).abs_diff((m + 1) * coarsen);
        let value = if offset < coarsen {
            1.0 - offset as f64 / coarsen as f64
        } else {
            0.0
        };
        c(value, 0.0)
    });
    let embed_w = CMat::from_fn(n, coarse, |j, m| c(if j / coarsen == m { 1.0 } else { 0.0 }, 0.0));

    let mut metadata = Metadata::named("fem1d");
    metadata.params.insert("cells".into(), serde_json::json!(cells));
    metadata.params.insert("coarsen".into(), serde_json::json!(coarsen));
    metadata.params.insert("V_norm".into(), serde_json::json!("H1 seminorm"));
    metadata.params.insert("W_norm".into(), serde_json::json!("L2"));
    Ok(ProblemInstance {
        form,
        embed_v,
        embed_w,
        metadata,
    })
}

/// One matrix entry in file form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar(pub C64);

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let z = self.0;
        // Bitwise test keeps -0.0 imaginary parts.
        if z.im.to_bits() == 0 {
            s.serialize_f64(z.re)
        } else {
            [z.re, z.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Complex([f64; 2]),
        }
        match Repr::deserialize(d) {
            Ok(Repr::Real(re)) => Ok(Scalar(c(re, 0.0))),
            Ok(Repr::Complex([re, im])) => Ok(Scalar(c(re, im))),
            Err(_) => Err(de::Error::custom("expected a number or a [re, im] pair")),
        }
    }
}

pub type Rows = Vec<Vec<Scalar>>;

pub fn encode_matrix(m: &CMat) -> Result<Rows> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    Ok(m.row_iter().map(|r| r.iter().map(|z| Scalar(*z)).collect()).collect())
}

/// `cols` is needed for matrices without rows.
pub fn decode_matrix(what: &str, rows: &Rows, cols: Option<usize>) -> Result<CMat> {
    let width = rows.first().map(Vec::len).or(cols).unwrap_or(0);
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Parse(format!(
            "{what}: row {bad} has {} entries, expected {width}",
            rows[bad].len()
        )));
    }
    Ok(CMat::from_fn(rows.len(), width, |i, j| rows[i][j].0))
}

#[derive(Serialize, Deserialize)]
struct SpaceRecord {
    dim: usize,
    gram: Rows,
}

#[derive(Serialize, Deserialize)]
struct Spaces {
    #[serde(rename = "V")]
    v: SpaceRecord,
    #[serde(rename = "W")]
    w: SpaceRecord,
}

#[derive(Serialize, Deserialize)]
struct Embeddings {
    #[serde(rename = "V_h")]
    vh: Rows,
    #[serde(rename = "W_h")]
    wh: Rows,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    version: String,
    metadata: Metadata,
    spaces: Spaces,
    form: Rows,
    embeddings: Embeddings,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<String>,
}

fn check_version(text: &str, expected: &str) -> Result<()> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match probe.version {
        None => Err(Error::Parse("missing field `version`".into())),
        Some(v) if v == expected => Ok(()),
        Some(found) => Err(Error::SchemaVersionMismatch {
            expected: expected.into(),
            found,
        }),
    }
}

pub fn to_json(instance: &ProblemInstance) -> Result<String> {
    let file = ProblemFile {
        version: SCHEMA_VERSION.into(),
        metadata: instance.metadata.clone(),
        spaces: Spaces {
            v: SpaceRecord {
                dim: instance.space_v().dim(),
                gram: encode_matrix(instance.space_v().gram())?,
            },
            w: SpaceRecord {
                dim: instance.space_w().dim(),
                gram: encode_matrix(instance.space_w().gram())?,
            },
        },
        form: encode_matrix(instance.form.mat())?,
        embeddings: Embeddings {
            vh: encode_matrix(&instance.embed_v)?,
            wh: encode_matrix(&instance.embed_w)?,
        },
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))
}

fn decode_space(name: &str, rec: &SpaceRecord) -> Result<InnerProductSpace> {
    let gram = decode_matrix(&format!("spaces.{name}.gram"), &rec.gram, Some(rec.dim))?;
    if gram.nrows() != rec.dim || gram.ncols() != rec.dim {
        return Err(Error::DimensionMismatch {
            what: format!("spaces.{name}.gram"),
            expected: format!("{0}x{0}", rec.dim),
            found: format!("{}x{}", gram.nrows(), gram.ncols()),
        });
    }
    InnerProductSpace::named(&format!("gram of {name}"), gram)
}

/// Parses and validates a problem document.
pub fn from_json(text: &str) -> Result<ProblemInstance> {
    check_version(text, SCHEMA_VERSION)?;
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let space_v = decode_space("V", &file.spaces.v)?;
    let space_w = decode_space("W", &file.spaces.w)?;
    let (dv, dw) = (space_v.dim(), space_w.dim());
    let form = FormMatrix::new(decode_matrix("form", &file.form, Some(dv))?, space_v, space_w)?;
    let embed_v = decode_matrix("embeddings.V_h", &file.embeddings.vh, None)?;
    let embed_w = decode_matrix("embeddings.W_h", &file.embeddings.wh, None)?;
    for (what, m, rows) in [("embeddings.V_h", &embed_v, dv), ("embeddings.W_h", &embed_w, dw)] {
        if m.nrows() != rows {
            return Err(Error::DimensionMismatch {
                what: what.into(),
                expected: format!("{rows} rows"),
                found: format!("{} rows", m.nrows()),
            });
        }
    }
    Ok(ProblemInstance {
        form,
        embed_v,
        embed_w,
        metadata: file.metadata,
    })
}

pub fn save(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(instance)? + "\n")?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    from_json(&std::fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    version: String,
    rows: usize,
    cols: usize,
    entries: Rows,
}

/// A lone matrix in the problem-file number format.
pub fn matrix_to_json(m: &CMat) -> Result<String> {
    let file = MatrixFile {
        version: MATRIX_SCHEMA_VERSION.into(),
        rows: m.nrows(),
        cols: m.ncols(),
        entries: encode_matrix(m)?,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))
}

pub fn matrix_from_json(text: &str) -> Result<CMat> {
    check_version(text, MATRIX_SCHEMA_VERSION)?;
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let m = decode_matrix("entries", &file.entries, Some(file.cols))?;
    if m.nrows() != file.rows || m.ncols() != file.cols {
        return Err(Error::DimensionMismatch {
            what: "matrix file".into(),
            expected: format!("{}x{}", file.rows, file.cols),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(m)
}
