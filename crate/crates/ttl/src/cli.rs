//! The `ttl` command line.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 for usage and
//! configuration errors, 3 for I/O errors. Every JSON document carries
//! `"schema": 1`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::chi::ChiContext;
use crate::cyclo::{GaussConvention, Rot};
use crate::galois::{enumerate_double_cosets, ExtShape};
use crate::jumps::JumpDatum;
use crate::rectifier::{full_rectifier, TameChar};
use crate::suites::{self, Suite, SweepConfig, SCHEMA};
use crate::symplectic::{occupancy, t_mu, t_varpi};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ttl", version, about = "Exact invariants of tamely ramified extensions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the double cosets of an extension.
    Cosets {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// The rectifier of a jump datum.
    Rectifier(DatumArgs),
    /// The χ-data of a jump datum, one entry per nontrivial coset.
    Chi(DatumArgs),
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Emit the per-coset invariants of a seeded sweep.
    Sweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct ShapeArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    #[arg(long, default_value_t = 1)]
    pub e: u64,
    #[arg(long, default_value_t = 1)]
    pub f: u64,
    #[arg(long, default_value_t = 0)]
    pub zeta_ef: u64,
    #[arg(long, default_value_t = 0)]
    pub zeta_phi_shift: u64,
}

impl ShapeArgs {
    fn shape(&self) -> Result<ExtShape, Failure> {
        ExtShape::new(self.p, self.m, self.e, self.f, self.zeta_ef)
            .and_then(|s| s.with_zeta_phi_shift(self.zeta_phi_shift))
            .map_err(|e| Failure::usage(e.to_string()))
    }
}

#[derive(Args, Debug, Clone)]
pub struct DatumArgs {
    /// A jump datum in JSON.
    #[arg(long, conflicts_with_all = ["p", "random"])]
    pub jump_file: Option<PathBuf>,
    #[arg(long, requires = "random")]
    pub p: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    #[arg(long, default_value_t = 1)]
    pub e: u64,
    #[arg(long, default_value_t = 1)]
    pub f: u64,
    #[arg(long, default_value_t = 0)]
    pub zeta_ef: u64,
    /// Seed of a random valid datum on the given shape.
    #[arg(long, requires = "p")]
    pub random: Option<u64>,
    #[arg(long, value_enum, default_value_t = Convention::Standard)]
    pub convention: Convention,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Standard,
    Conjugate,
}

impl From<Convention> for GaussConvention {
    fn from(c: Convention) -> GaussConvention {
        match c {
            Convention::Standard => GaussConvention::Standard,
            Convention::Conjugate => GaussConvention::Conjugate,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// Residue characteristics, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub m_max: u64,
    #[arg(long, default_value_t = 12)]
    pub e_max: u64,
    #[arg(long, default_value_t = 4)]
    pub f_max: u64,
    #[arg(long, default_value_t = 2)]
    pub zeta_ef_max: u64,
    #[arg(long, default_value_t = 1 << 20)]
    pub qf_max: u64,
    #[arg(long, default_value_t = 8)]
    pub seeds: u64,
    #[arg(long, value_enum, default_value_t = Convention::Standard)]
    pub convention: Convention,
    /// Also run every alternative choice of the Frobenius root.
    #[arg(long)]
    pub all_zeta_phi: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SweepArgs {
    fn config(&self) -> Result<SweepConfig, Failure> {
        let cfg = SweepConfig {
            primes: self.primes.clone(),
            m_max: self.m_max,
            e_max: self.e_max,
            f_max: self.f_max,
            zeta_ef_max: self.zeta_ef_max,
            qf_max: self.qf_max,
            seeds: self.seeds,
            convention: self.convention.into(),
            all_zeta_phi: self.all_zeta_phi,
        };
        cfg.validate().map_err(Failure::usage)?;
        Ok(cfg)
    }
}

/// Why a command stopped, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Failure {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }

    fn io(message: impl ToString) -> Failure {
        Failure { code: EXIT_IO, message: message.to_string() }
    }
}

/// A root of unity, with its sign when it is one.
#[derive(Serialize)]
struct Value {
    value: Rot,
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<i8>,
}

impl From<Rot> for Value {
    fn from(value: Rot) -> Value {
        Value { value, sign: value.as_sign().map(|s| s.as_i8()) }
    }
}

fn char_json(c: &TameChar, shape: &ExtShape) -> serde_json::Value {
    json!({ "mu": Value::from(c.mu), "varpi": Value::from(c.varpi), "mu_mult": c.mu_mult(shape) })
}

/// Runs the command line on `args`, writing to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(f) = configure_threads() {
        let _ = writeln!(err, "error: {}", f.message);
        return f.code;
    }
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Sizes the worker pool from `TTL_THREADS`, once.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("TTL_THREADS") else { return Ok(()) };
    let n: usize = raw.parse().map_err(|_| Failure::usage(format!("TTL_THREADS={raw} is not a number")))?;
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
        None => out.write_all(bytes).map_err(Failure::io),
    }
}

fn to_json(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("reports serialize");
    s.push(b'\n');
    s
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Cosets { shape, format } => {
            let s = shape.shape()?;
            let rows = enumerate_double_cosets(&s);
            let bytes = match format {
                Format::Json => to_json(&json!({ "schema": SCHEMA, "shape": s, "cosets": rows })),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["k", "i", "kind", "t_min", "deg"]).map_err(Failure::io)?;
                    for c in &rows {
                        let t = c.t_min.map(|t| t.to_string()).unwrap_or_default();
                        w.write_record([c.k.to_string(), c.i.to_string(), c.kind.as_str().into(), t, c.deg.to_string()])
                            .map_err(Failure::io)?;
                    }
                    w.into_inner().map_err(Failure::io)?
                }
            };
            emit(out, None, &bytes)?;
            Ok(EXIT_OK)
        }
        Command::Rectifier(args) => {
            let jd = load_datum(&args)?;
            let conv = args.convention.into();
            let rect = full_rectifier(&jd, conv).map_err(|e| Failure::usage(e.to_string()))?;
            emit(
                out,
                None,
                &to_json(&json!({ "schema": SCHEMA, "datum": jd, "rectifier": char_json(&rect, &jd.shape) })),
            )?;
            Ok(EXIT_OK)
        }
        Command::Chi(args) => {
            let jd = load_datum(&args)?;
            let ctx = ChiContext::new(&jd, args.convention.into()).map_err(|e| Failure::usage(e.to_string()))?;
            let mut data = Vec::new();
            for dc in enumerate_double_cosets(&jd.shape).iter().filter(|d| !d.is_trivial()) {
                let d = ctx.assign(dc).map_err(|e| Failure::usage(e.to_string()))?;
                data.push(json!({
                    "k": dc.k,
                    "i": dc.i,
                    "kind": dc.kind,
                    "mu": Value::from(d.mu_part),
                    "varpi": Value::from(d.varpi_val),
                    "pair_only": d.constrained_only,
                }));
            }
            emit(out, None, &to_json(&json!({ "schema": SCHEMA, "datum": jd, "chi": data })))?;
            Ok(EXIT_OK)
        }
        Command::Verify { suite, sweep } => {
            let cfg = sweep.config()?;
            let report = suites::run(suite, &cfg);
            emit(out, sweep.out.as_ref(), &to_json(&report))?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Sweep { sweep, format } => {
            let cfg = sweep.config()?;
            let rows = sweep_rows(&cfg)?;
            let bytes = match format {
                Format::Json => to_json(&json!({ "schema": SCHEMA, "rows": rows })),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for r in &rows {
                        w.serialize(r).map_err(Failure::io)?;
                    }
                    if rows.is_empty() {
                        w.write_record(SWEEP_HEADER).map_err(Failure::io)?;
                    }
                    w.into_inner().map_err(Failure::io)?
                }
            };
            emit(out, sweep.out.as_ref(), &bytes)?;
            Ok(EXIT_OK)
        }
    }
}

fn load_datum(args: &DatumArgs) -> Result<JumpDatum, Failure> {
    let jd = if let Some(path) = &args.jump_file {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str::<JumpDatum>(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
    } else {
        let (Some(p), Some(seed)) = (args.p, args.random) else {
            return Err(Failure::usage("give --jump-file, or --p with --random"));
        };
        let s = ExtShape::new(p, args.m, args.e, args.f, args.zeta_ef).map_err(|e| Failure::usage(e.to_string()))?;
        JumpDatum::random_valid(&s, seed)
    };
    jd.validate().map_err(|v| {
        Failure::usage(format!("invalid jump datum: {}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")))
    })?;
    Ok(jd)
}

pub const SWEEP_HEADER: [&str; 17] = [
    "p", "m", "e", "f", "zeta_ef", "zeta_phi_shift", "seed", "k", "i", "kind", "deg", "occupied", "t0_mu", "t1_mu",
    "t_varpi", "rect_mu", "rect_varpi",
];

/// One coset of one datum. Columns follow [`SWEEP_HEADER`].
#[derive(Serialize)]
pub struct SweepRow {
    pub p: u64,
    pub m: u64,
    pub e: u64,
    pub f: u64,
    pub zeta_ef: u64,
    pub zeta_phi_shift: u64,
    pub seed: u64,
    pub k: u64,
    pub i: u64,
    pub kind: &'static str,
    pub deg: u64,
    pub occupied: bool,
    pub t0_mu: Option<i8>,
    pub t1_mu: Option<Rot>,
    pub t_varpi: Option<Rot>,
    pub rect_mu: Rot,
    pub rect_varpi: Rot,
}

/// Every coset of every datum in the sweep, trivial ones included.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>, Failure> {
    use rayon::prelude::*;
    let work: Vec<(ExtShape, u64)> =
        cfg.shapes().into_iter().flat_map(|s| (0..cfg.seeds).map(move |seed| (s, seed))).collect();
    let per: Result<Vec<Vec<SweepRow>>, String> = work
        .par_iter()
        .map(|&(s, seed)| {
            let jd = JumpDatum::random_valid(&s, seed);
            let rect = full_rectifier(&jd, cfg.convention).map_err(|e| e.to_string())?;
            let occ = occupancy(&jd);
            enumerate_double_cosets(&s)
                .into_iter()
                .map(|dc| {
                    let (t0, t1, tv) = if dc.is_trivial() {
                        (None, None, None)
                    } else {
                        let mu = t_mu(&dc, &occ, &s).map_err(|e| e.to_string())?;
                        let v = t_varpi(&dc, &occ, &s).map_err(|e| e.to_string())?;
                        (Some(mu.t0.as_i8()), Some(mu.t1), Some(v.value()))
                    };
                    Ok(SweepRow {
                        p: s.p(),
                        m: s.m(),
                        e: s.e(),
                        f: s.f(),
                        zeta_ef: s.zeta_ef(),
                        zeta_phi_shift: s.zeta_phi_shift(),
                        seed,
                        k: dc.k,
                        i: dc.i,
                        kind: dc.kind.as_str(),
                        deg: dc.deg,
                        occupied: occ.get(&dc),
                        t0_mu: t0,
                        t1_mu: t1,
                        t_varpi: tv,
                        rect_mu: rect.mu,
                        rect_varpi: rect.varpi,
                    })
                })
                .collect()
        })
        .collect();
    per.map(|v| v.into_iter().flatten().collect()).map_err(|e| Failure { code: EXIT_FAILED, message: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ttl").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
    }

    #[test]
    fn cosets_table() {
        let (code, text) = call(&["cosets", "--p", "2", "--m", "1", "--e", "7", "--f", "1", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(text.lines().count(), 1 + 3, "{text}");
        let (code, text) = call(&["cosets", "--p", "3", "--e", "1", "--f", "1", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(text.lines().nth(1), Some("0,0,trivial,,1"));
        assert_eq!(call(&["cosets", "--p", "2", "--e", "6"]).0, 2);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["verify", "--suite", "nonsense"]).0, 2);
        assert_eq!(call(&["verify", "--suite", "counts", "--seeds", "0"]).0, 2);
        assert_eq!(call(&["verify", "--suite", "counts", "--primes", "4"]).0, 2);
        assert_eq!(call(&["rectifier"]).0, 2);
        assert_eq!(call(&["rectifier", "--jump-file", "/nonexistent/datum.json"]).0, 3);
    }

    #[test]
    fn rectifier_json() {
        let (code, text) = call(&["rectifier", "--p", "3", "--e", "4", "--random", "5"]);
        assert_eq!(code, 0, "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], 1);
        assert!(v["rectifier"]["varpi"]["value"].as_str().unwrap().contains('/'));
    }

    #[test]
    fn sweep_is_deterministic() {
        let args = ["sweep", "--primes", "3", "--e-max", "4", "--f-max", "2", "--seeds", "2"];
        let (a, first) = call(&args);
        let (_, second) = call(&args);
        assert_eq!(a, 0);
        assert_eq!(first, second);
        assert_eq!(first.lines().next().unwrap(), SWEEP_HEADER.join(","));
    }
}
