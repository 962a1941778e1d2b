//! `gtorsion`: command line access to every module of `graded-torsion`.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns
//! the exit code with the text that belongs on standard output and error.
//! Exit codes: 0 success, 1 validation error raised by a module, 2 malformed
//! invocation or input file.

pub mod formats;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use graded_torsion::cohomology::{GradedInnerProduct, WeightedCohomology};
use graded_torsion::graded_lie::GradedLieAlgebra;
use graded_torsion::nilgroup::{self, CharacterPoint, GroupElement};
use graded_torsion::rational::format_rational;
use graded_torsion::rumin::rumin_complex;
use graded_torsion::sieve::{self, DimensionVector, Shape};
use graded_torsion::torsion::FiniteComplex;
use rand_chacha::rand_core::SeedableRng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::formats::{matrix_strings, AlgebraFile, ComplexFile, GeneratorsFile, GramFile, ShapeError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "gtorsion", version, about = "Cohomology, Rumin complexes, purity sieve and torsion of graded nilpotent Lie algebras")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Betti numbers, weights and purity of Λ𝔤*.
    Cohomology(AlgebraArgs),
    /// The purity sieve on dimension vectors.
    Sieve(SieveArgs),
    /// Rumin differentials of the flat model.
    Rumin(RuminArgs),
    /// Torsion norm of a finite complex.
    Torsion(TorsionArgs),
    /// Arithmetic in the (2,3,5) group.
    Nilgroup {
        #[command(subcommand)]
        op: NilOp,
    },
}

#[derive(Debug, Args)]
struct AlgebraArgs {
    /// 235, heisenberg3, heisenberg5 or abelian:<m>:<degree>.
    #[arg(long, conflicts_with = "algebra", required_unless_present = "algebra")]
    preset: Option<String>,
    /// Structure constants file, or a preset name.
    #[arg(long)]
    algebra: Option<String>,
    /// Gram matrix file for the inner product on 𝔤, or `identity`.
    #[arg(long, visible_alias = "gram", default_value = "identity")]
    metric: String,
}

#[derive(Debug, Args)]
struct RuminArgs {
    #[command(flatten)]
    algebra: AlgebraArgs,
    /// Verify D²=0, the splitting conditions, the associated graded and the star identity.
    #[arg(long, visible_alias = "check-star")]
    check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// `(n₁, n₂)` for fixed `n₂`.
    N2Grading,
    /// `(n₁, n₂, n₃)` for fixed `n₂, n₃`.
    ThreeStep,
}

#[derive(Debug, Args)]
struct SieveArgs {
    /// One dimension vector, e.g. 2,1,2.
    #[arg(long, conflicts_with_all = ["shape", "family"])]
    dv: Option<String>,
    /// Ranges for n₁,…,n_r, e.g. 0..100,0..5,3.
    #[arg(long, conflicts_with = "family")]
    shape: Option<String>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    n2: Option<u64>,
    #[arg(long)]
    n3: Option<u64>,
    /// Largest homogeneous dimension in a family scan.
    #[arg(long, default_value_t = 10_000)]
    n_max: u64,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Include the coefficients of P.
    #[arg(long)]
    emit_p: bool,
    /// Include failing rows of a family scan.
    #[arg(long)]
    all: bool,
}

#[derive(Debug, Args)]
struct TorsionArgs {
    /// Finite complex file.
    #[arg(long)]
    input: PathBuf,
    /// Spectral cutoff λ.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Comma separated N, one entry per degree.
    #[arg(long = "N")]
    n: Option<String>,
    /// Comma separated exponents a, one per differential.
    #[arg(long)]
    a: Option<String>,
    /// Run the λ, N and a invariance battery.
    #[arg(long)]
    check_invariance: bool,
}

#[derive(Debug, Subcommand)]
enum NilOp {
    /// x·y.
    Mul { x: String, y: String },
    /// x y x⁻¹ y⁻¹.
    Comm { x: String, y: String },
    /// log(γ₁^k γ₂^l).
    Pow {
        #[arg(allow_hyphen_values = true)]
        k: i64,
        #[arg(allow_hyphen_values = true)]
        l: i64,
    },
    /// Membership in Γ₀.
    #[command(name = "in-gamma0")]
    InGamma0 { x: String },
    /// An automorphism carrying a lattice into Γ₀.
    Embed {
        #[arg(long)]
        generators: PathBuf,
    },
    /// Orbit samples of a character under GL(2,ℤ).
    #[command(name = "char-orbit")]
    CharOrbit {
        #[arg(long, default_value_t = std::f64::consts::SQRT_2 - 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        words: usize,
        #[arg(long, default_value_t = 24)]
        word_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub subcommand: String,
    pub input_digest: String,
    pub results: Value,
    pub version: String,
}

#[derive(Debug)]
enum CliError {
    /// Exit 1.
    Validation(String),
    /// Exit 2.
    Malformed(String),
}

fn validation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

fn malformed<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Malformed(e.to_string())
}

struct Ctx {
    digest: Sha256,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Malformed(format!("IoError: {}: {e}", path.display())))?;
        self.digest.update(b"\0file\0");
        self.digest.update(text.as_bytes());
        Ok(text)
    }

    fn parse<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Malformed(format!("ParseError: {} line {} column {}: {e}", path.display(), e.line(), e.column()))
        })
    }
}

fn shape_error(path: &Path) -> impl Fn(ShapeError) -> CliError + '_ {
    move |e| CliError::Malformed(format!("ParseError: {}: {}", path.display(), e.0))
}

pub fn preset(name: &str) -> Result<GradedLieAlgebra, String> {
    match name {
        "235" => Ok(GradedLieAlgebra::two_three_five()),
        "heisenberg3" => Ok(GradedLieAlgebra::heisenberg(1)),
        "heisenberg5" => Ok(GradedLieAlgebra::heisenberg(2)),
        _ => {
            let parts: Vec<&str> = name.split(':').collect();
            if let ["abelian", m, d] = parts.as_slice() {
                let m: usize = m.parse().map_err(|_| format!("UnknownPreset: {name}"))?;
                let d: i32 = d.parse().map_err(|_| format!("UnknownPreset: {name}"))?;
                // Both abelian:3:1 and abelian:3:-1 mean three generators of degree -1.
                return GradedLieAlgebra::abelian(m, -d.abs()).map_err(|e| e.to_string());
            }
            Err(format!("UnknownPreset: {name}"))
        }
    }
}

fn load_algebra(ctx: &mut Ctx, args: &AlgebraArgs) -> Result<(GradedLieAlgebra, GradedInnerProduct), CliError> {
    let alg = match (&args.preset, &args.algebra) {
        (Some(p), _) => preset(p).map_err(CliError::Malformed)?,
        (None, Some(a)) if !Path::new(a).exists() && preset(a).is_ok() => preset(a).map_err(CliError::Malformed)?,
        (None, Some(a)) => {
            let path = Path::new(a);
            let file: AlgebraFile = ctx.parse(path)?;
            let specs = file.to_specs().map_err(shape_error(path))?;
            GradedLieAlgebra::build(file.degrees, &specs).map_err(validation)?
        }
        (None, None) => return Err(CliError::Malformed("one of --preset or --algebra is required".into())),
    };
    let inner = if args.metric == "identity" {
        GradedInnerProduct::identity(&alg)
    } else {
        let path = Path::new(&args.metric);
        let file: GramFile = ctx.parse(path)?;
        let g = file.to_matrix().map_err(shape_error(path))?;
        GradedInnerProduct::new(&alg, g).map_err(validation)?
    };
    Ok((alg, inner))
}

fn tuple<T: std::fmt::Display>(xs: &[T]) -> String {
    format!("({})", xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| CliError::Malformed(format!("ParseError: {what}: cannot read {p:?}"))))
        .collect()
}

type Report = (Value, String);

fn cohomology(ctx: &mut Ctx, args: &AlgebraArgs) -> Result<Report, CliError> {
    let (alg, inner) = load_algebra(ctx, args)?;
    let c = WeightedCohomology::compute(&alg, &inner);
    let supertrace: Vec<String> = c.weight_supertrace().iter().map(ToString::to_string).collect();
    let results = json!({
        "dim": c.dim,
        "degrees": alg.degrees(),
        "dimension_vector": alg.dimension_vector(),
        "betti": c.betti,
        "weights": c.weights,
        "pure": c.pure,
        "p": c.p,
        "k": c.k,
        "homogeneous_dimension": c.homogeneous_dimension,
        "euler_characteristic": c.euler_characteristic(),
        "weight_supertrace": supertrace,
    });
    let mut text = String::new();
    let _ = writeln!(text, "dim = {}, degrees = {}", c.dim, tuple(alg.degrees()));
    let _ = writeln!(text, "b = {}", tuple(&c.betti));
    for (q, w) in c.weights.iter().enumerate() {
        let _ = writeln!(text, "weights H^{q} = {}", tuple(w));
    }
    let _ = writeln!(text, "pure = {}", c.pure);
    if let (Some(p), Some(k)) = (&c.p, &c.k) {
        let _ = writeln!(text, "p = {}", tuple(p));
        let _ = writeln!(text, "k = {}", tuple(k));
    }
    let _ = writeln!(text, "n = {}", c.homogeneous_dimension);
    Ok((results, text))
}

fn parse_shape(s: &str) -> Result<Shape, CliError> {
    let mut ranges = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let part = part.split_once(':').map_or(part, |(_, r)| r);
        let bad = || CliError::Malformed(format!("ParseError: shape component {part:?}"));
        let r = match part.split_once("..") {
            Some((a, b)) => {
                let b = b.trim_start_matches('=');
                a.parse::<u64>().map_err(|_| bad())?..=b.parse::<u64>().map_err(|_| bad())?
            }
            None => {
                let v = part.parse::<u64>().map_err(|_| bad())?;
                v..=v
            }
        };
        ranges.push(r);
    }
    Ok(Shape::new(ranges))
}

fn pass_list(ns: &[u64]) -> String {
    match ns {
        [] => "pass list: none".into(),
        [n] => format!("pass list: n={n} only"),
        _ => format!("pass list: n={}", ns.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")),
    }
}

fn sieve_cmd(args: &SieveArgs) -> Result<Report, CliError> {
    if let Some(dv) = &args.dv {
        let v: Vec<u64> = parse_list(dv, "dimension vector")?;
        let dv = DimensionVector::new(v).map_err(validation)?;
        let r = sieve::sieve_check(&dv);
        let strings = |xs: &[_]| xs.iter().map(ToString::to_string).collect::<Vec<_>>();
        let mut results = json!({
            "dimension_vector": dv.entries(),
            "d": r.d,
            "n": r.n,
            "nonzero_count": r.nonzero_count,
            "pass": r.pass,
            "roots": r.roots,
            "weights": r.weights,
            "normalization_holds": r.normalization_holds,
        });
        let mut text = format!("{} d={} n={} nonzero={} pass={}\n", dv, r.d, r.n, r.nonzero_count, r.pass);
        let _ = writeln!(text, "roots = {}", tuple(&r.roots));
        if args.emit_p {
            results["p_coefficients"] = json!(strings(&r.p_coefficients));
            let _ = writeln!(text, "P = {}", tuple(&strings(&r.p_coefficients)));
        }
        return Ok((results, text));
    }
    if let Some(shape) = &args.shape {
        let shape = parse_shape(shape)?;
        let found = sieve::with_jobs(args.jobs, || sieve::sieve_range(&shape)).map_err(validation)?.map_err(validation)?;
        let mut text = String::new();
        let width = shape.ranges.len();
        let header: Vec<String> = (1..=width).map(|i| format!("n{i}")).collect();
        let _ = writeln!(text, "{},n,d,nonzero_count,pass,roots{}", header.join(","), if args.emit_p { ",P" } else { "" });
        let mut rows = Vec::new();
        for dv in &found {
            let mut e = dv.entries().to_vec();
            e.resize(width, 0);
            let cells: Vec<String> = e.iter().map(ToString::to_string).collect();
            let r = sieve::sieve_check(dv);
            let roots: Vec<String> = r.roots.iter().map(ToString::to_string).collect();
            let mut row = json!({
                "dimension_vector": dv.entries(),
                "n": r.n,
                "d": r.d,
                "nonzero_count": r.nonzero_count,
                "pass": r.pass,
                "roots": r.roots,
                "known_family": sieve::is_known_family(dv),
            });
            let mut line = format!("{},{},{},{},{},{}", cells.join(","), r.n, r.d, r.nonzero_count, r.pass, roots.join(" "));
            if args.emit_p {
                let p: Vec<String> = r.p_coefficients.iter().map(ToString::to_string).collect();
                let _ = write!(line, ",{}", p.join(" "));
                row["p_coefficients"] = json!(p);
            }
            let _ = writeln!(text, "{line}");
            rows.push(row);
        }
        let unknown = found.iter().filter(|d| !sieve::is_known_family(d)).count();
        let _ = writeln!(text, "passing vectors: {}, outside known families: {unknown}", found.len());
        return Ok((json!({"passing": rows, "count": found.len(), "outside_known_families": unknown}), text));
    }
    let family = args.family.ok_or_else(|| CliError::Malformed("one of --dv, --shape or --family is required".into()))?;
    let tail: Vec<u64> = match family {
        Family::N2Grading => vec![args.n2.ok_or_else(|| CliError::Malformed("--n2 is required".into()))?],
        Family::ThreeStep => vec![
            args.n2.ok_or_else(|| CliError::Malformed("--n2 is required".into()))?,
            args.n3.ok_or_else(|| CliError::Malformed("--n3 is required".into()))?,
        ],
    };
    let rows = sieve::with_jobs(args.jobs, || sieve::family_scan(&tail, 0..=args.n_max)).map_err(validation)?.map_err(validation)?;
    let passing: Vec<u64> = rows.iter().filter(|r| r.pass).map(|r| r.n).collect();
    let mut text = String::from("n1,n,d,pass,roots,radical_roots\n");
    let mut out_rows = Vec::new();
    for r in rows.iter().filter(|r| args.all || r.pass) {
        let join = |xs: &[u64]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(text, "{},{},{},{},{},{}", r.n1, r.n, r.d, r.pass, join(&r.roots), join(&r.radical_roots));
        out_rows.push(json!({"n1": r.n1, "n": r.n, "d": r.d, "pass": r.pass, "roots": r.roots, "radical_roots": r.radical_roots}));
    }
    let summary = pass_list(&passing);
    let _ = writeln!(text, "{summary}");
    Ok((json!({"tail": tail, "n_max": args.n_max, "rows": out_rows, "pass_list": passing, "summary": summary}), text))
}

fn rumin_cmd(ctx: &mut Ctx, args: &RuminArgs) -> Result<Report, CliError> {
    let (alg, inner) = load_algebra(ctx, &args.algebra)?;
    let rc = rumin_complex(&alg, &inner).map_err(validation)?;
    let orders: Vec<Option<u64>> = rc.orders();
    let mut text = String::new();
    let _ = writeln!(text, "k = {}", tuple(rc.cohomology.k.as_deref().unwrap_or(&[])));
    let _ = writeln!(
        text,
        "orders = {}",
        tuple(&orders.iter().map(|o| o.map_or("-".to_string(), |x| x.to_string())).collect::<Vec<_>>())
    );
    let _ = writeln!(text, "D^2 = 0: {}", rc.d_squared_zero());
    let mut ds = Vec::new();
    for (q, d) in rc.d.iter().enumerate() {
        let mut entries = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                let e = d.get(i, j);
                if !e.is_zero() {
                    let op = rc.env.format(e);
                    let _ = writeln!(text, "D_{q}[{},{}] = {op}", i + 1, j + 1);
                    for (m, c) in e.terms() {
                        entries.push(json!({
                            "row": i + 1,
                            "col": j + 1,
                            "monomial": rc.env.format_monomial(m),
                            "coefficient": format_rational(c),
                        }));
                    }
                }
            }
        }
        ds.push(json!({"q": q, "rows": d.nrows(), "cols": d.ncols(), "order": orders[q], "entries": entries}));
    }
    let splitting: Vec<Value> = rc
        .splitting
        .iter()
        .enumerate()
        .map(|(q, s)| json!({"q": q, "slack": s.slack, "unknowns": s.unknowns, "unique": s.unique}))
        .collect();
    let mut results = json!({
        "k": rc.cohomology.k,
        "orders": orders,
        "orders_certified": rc.orders_certified(),
        "d_squared_zero": rc.d_squared_zero(),
        "splitting": splitting,
        "d": ds,
    });
    if args.check {
        let report = rc.star_duality_check();
        let checks = [
            ("d_squared_zero", rc.d_squared_zero()),
            ("de_rham_squared_zero", rc.de_rham_squared_zero()),
            ("associated_graded_is_ce", rc.associated_graded_is_ce()),
            ("splitting_conditions", rc.splitting_conditions_hold()),
            ("star_duality", report.all_hold()),
        ];
        for (name, ok) in &checks {
            let _ = writeln!(text, "{name}: {}", if *ok { "pass" } else { "fail" });
        }
        let mut c = serde_json::Map::new();
        for (name, ok) in &checks {
            c.insert((*name).to_string(), json!(ok));
        }
        c.insert("star_identity_per_degree".into(), json!(report.identity_holds));
        c.insert("orders_symmetric".into(), json!(report.orders_symmetric));
        results["checks"] = Value::Object(c);
    }
    Ok((results, text))
}

fn torsion_cmd(ctx: &mut Ctx, args: &TorsionArgs) -> Result<Report, CliError> {
    let file: ComplexFile = ctx.parse(&args.input)?;
    let data = file.to_data().map_err(shape_error(&args.input))?;
    let c = FiniteComplex::new(data.lowest_degree, data.grams, data.differentials, data.k).map_err(validation)?;
    let mut p = c.default_params();
    p.lambda = args.lambda;
    if let Some(n) = &args.n {
        p.n = parse_list(n, "--N")?;
    }
    if let Some(a) = &args.a {
        p.a = parse_list(a, "--a")?;
    }
    let reference = data.reference.unwrap_or_else(|| c.canonical_reference());
    let r = c.torsion_norm(&reference, &p).map_err(validation)?;
    let exact = r.exact_square.as_ref().map(format_rational);
    let mut results = json!({
        "lowest_degree": c.lowest_degree(),
        "dims": c.dims(),
        "betti": c.betti(),
        "k": c.k(),
        "a": p.a,
        "N": p.n,
        "lambda": r.lambda,
        "kappa": r.kappa,
        "zeta_prime": r.zeta_prime,
        "zeta_part": r.zeta_part,
        "finite_part": r.finite_part,
        "torsion": r.total,
        "torsion_squared_exact": exact,
        "error_bound": r.error_bound,
    });
    let mut text = String::new();
    let _ = writeln!(text, "dims = {}, b = {}", tuple(&c.dims()), tuple(&c.betti()));
    let _ = writeln!(text, "kappa = {}, lambda = {}", r.kappa, r.lambda);
    let _ = writeln!(text, "zeta'(0) = {:.12e}", r.zeta_prime);
    let _ = writeln!(text, "zeta part = {:.12e}, finite part = {:.12e}", r.zeta_part, r.finite_part);
    let _ = writeln!(text, "torsion = {:.12e} (error bound {:.1e})", r.total, r.error_bound);
    if let Some(e) = &exact {
        let _ = writeln!(text, "torsion^2 = {e}");
    }
    if args.check_invariance {
        let report = c.invariance_report(&reference, &p).map_err(validation)?;
        let _ = writeln!(text, "lambda invariance: {}", report.lambda_invariant);
        let _ = writeln!(text, "N-shift invariance: {}", report.n_invariant);
        let _ = writeln!(text, "a-scaling invariance: {}", report.a_invariant);
        results["invariance"] = json!({
            "lambda": report.lambda_values.iter().map(|(l, t)| json!({"lambda": l, "torsion": t})).collect::<Vec<_>>(),
            "lambda_invariant": report.lambda_invariant,
            "n_shift": report.n_values.iter().map(|(s, zp, z0)| json!({"shift": s, "zeta_prime": zp, "zeta_zero": z0})).collect::<Vec<_>>(),
            "n_invariant": report.n_invariant,
            "a_scaling": report.a_values.iter().map(|(r, t)| json!({"factor": r, "torsion": t})).collect::<Vec<_>>(),
            "a_invariant": report.a_invariant,
            "all_hold": report.all_hold(),
        });
    }
    Ok((results, text))
}

fn element(s: &str) -> Result<GroupElement, CliError> {
    GroupElement::parse(s).map_err(malformed)
}

fn element_json(x: &GroupElement) -> Value {
    json!(x.coords().iter().map(format_rational).collect::<Vec<_>>())
}

fn nilgroup_cmd(ctx: &mut Ctx, op: &NilOp) -> Result<Report, CliError> {
    match op {
        NilOp::Mul { x, y } => {
            let z = nilgroup::bch_multiply(&element(x)?, &element(y)?);
            Ok((json!({"result": element_json(&z)}), format!("{z}\n")))
        }
        NilOp::Comm { x, y } => {
            let z = nilgroup::commutator(&element(x)?, &element(y)?);
            Ok((json!({"result": element_json(&z)}), format!("{z}\n")))
        }
        NilOp::Pow { k, l } => {
            let z = nilgroup::power_word(*k, *l);
            Ok((json!({"k": k, "l": l, "result": element_json(&z)}), format!("{z}\n")))
        }
        NilOp::InGamma0 { x } => {
            let x = element(x)?;
            let b = nilgroup::in_gamma0(&x);
            Ok((json!({"element": element_json(&x), "in_gamma0": b}), format!("{b}\n")))
        }
        NilOp::Embed { generators } => {
            let file: GeneratorsFile = ctx.parse(generators)?;
            let gens = file.generators.iter().map(|s| element(s)).collect::<Result<Vec<_>, _>>()?;
            let e = nilgroup::embed_into_gamma0(&gens).map_err(validation)?;
            let mut text = format!("k = {}, r = {}\n", e.k, e.r);
            for (i, img) in e.images.iter().enumerate() {
                let _ = writeln!(text, "phi(w{}) = {img} in Gamma0: {}", i + 1, nilgroup::in_gamma0(img));
            }
            Ok((
                json!({
                    "k": e.k,
                    "r": e.r,
                    "phi": matrix_strings(&e.phi.matrix),
                    "images": e.images.iter().map(element_json).collect::<Vec<_>>(),
                    "all_in_gamma0": e.images.iter().all(nilgroup::in_gamma0),
                }),
                text,
            ))
        }
        NilOp::CharOrbit { s, t, words, word_len, seed, resolution } => {
            if !(*resolution > 0.0 && *resolution <= 1.0) {
                return Err(CliError::Malformed(format!("ParseError: resolution {resolution} must lie in (0,1]")));
            }
            let start = CharacterPoint::Float(*s, *t).reduced().as_f64();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let report = nilgroup::density_probe(&mut rng, start, *words, *word_len, *resolution);
            let mut text = String::from("s,t\n");
            for (a, b) in &report.samples {
                let _ = writeln!(text, "{a:.12},{b:.12}");
            }
            let _ = writeln!(text, "coverage: {}/{} boxes", report.boxes_hit, report.boxes_total);
            Ok((
                json!({
                    "samples": report.samples,
                    "boxes_hit": report.boxes_hit,
                    "boxes_total": report.boxes_total,
                }),
                text,
            ))
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Cohomology(_) => "cohomology",
        Command::Sieve(_) => "sieve",
        Command::Rumin(_) => "rumin",
        Command::Torsion(_) => "torsion",
        Command::Nilgroup { .. } => "nilgroup",
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        Outcome { code: 2, stdout: String::new(), stderr: rendered }
                    } else {
                        Outcome { code: 0, stdout: rendered, stderr: String::new() }
                    }
                }
                ErrorKind::InvalidSubcommand => {
                    let name = argv.iter().skip(1).find(|a| !a.to_string_lossy().starts_with('-')).map(|a| a.to_string_lossy().into_owned());
                    Outcome {
                        code: 2,
                        stdout: String::new(),
                        stderr: format!("error: UnknownSubcommand: {}\n{rendered}", name.unwrap_or_default()),
                    }
                }
                _ => Outcome { code: 2, stdout: String::new(), stderr: rendered },
            };
        }
    };
    let mut ctx = Ctx { digest: Sha256::new() };
    for a in argv.iter().skip(1) {
        ctx.digest.update(a.to_string_lossy().as_bytes());
        ctx.digest.update(b"\0");
    }
    let name = subcommand_name(&cli.command);
    log::info!("running {name}");
    let result = match &cli.command {
        Command::Cohomology(a) => cohomology(&mut ctx, a),
        Command::Sieve(a) => sieve_cmd(a),
        Command::Rumin(a) => rumin_cmd(&mut ctx, a),
        Command::Torsion(a) => torsion_cmd(&mut ctx, a),
        Command::Nilgroup { op } => nilgroup_cmd(&mut ctx, op),
    };
    match result {
        Ok((results, text)) => {
            let stdout = match cli.format {
                Format::Text => text,
                Format::Json => {
                    let doc = ReportDocument {
                        schema_version: SCHEMA_VERSION,
                        subcommand: name.to_string(),
                        input_digest: format!("{:x}", ctx.digest.finalize()),
                        results,
                        version: env!("CARGO_PKG_VERSION").to_string(),
                    };
                    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
                    s.push('\n');
                    s
                }
            };
            Outcome { code: 0, stdout, stderr: String::new() }
        }
        Err(CliError::Validation(msg)) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: {msg}\n") },
        Err(CliError::Malformed(msg)) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}
