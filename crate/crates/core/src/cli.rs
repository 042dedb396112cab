//! Command-line front end; `run` returns the process exit code.
//!
//! Exit codes: 0 feasible or success, 1 a definite negative answer
//! (infeasible, non-convergent), 2 usage or numerical error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::construct::{self, AltOptions};
use crate::error::{Error, Result};
use crate::honeylp::{self, SolveOptions};
use crate::output::to_json;
use crate::screen;
use crate::spectra::{combine_pythagorean, SingularSpectrum, Spectrum};
use crate::tt::{self, check_orthogonality, DenseTensor, Side};
use crate::Execution;

#[derive(Parser, Debug)]
#[command(name = "ttspectra", version, about = "Feasibility of tensor-train singular spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Necessary inequalities for a pair and mode size m
    Screen {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        m: usize,
        /// Largest general index family size tried
        #[arg(long, default_value_t = screen::DEFAULT_MAX_FAMILIES)]
        max_families: usize,
    },
    /// Exact hive certificate for a pair and mode size m
    CheckPair {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        lp: LpArgs,
        /// Write the hive and its solution as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest certified mode size of a pair
    MinM {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        lp: LpArgs,
    },
    /// Decide λ⁽¹⁾ ⊞ … ⊞ λ⁽ᵐ⁾ ∼ ν for hermitian eigenvalues
    SumRelation {
        /// Summands separated by ';', entries by ','
        #[arg(long, allow_hyphen_values = true)]
        lambdas: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        /// JSON file {"lambdas": [[..], ..], "nu": [..]}
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        lp: LpArgs,
    },
    /// Witness core for a pair at mode size n
    ConstructCore {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        alt: AltArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tensor with a prescribed singular spectrum
    ConstructTensor {
        /// JSON singular spectrum {"norm": x, "entries": [[..], ..]}
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[command(flatten)]
        alt: AltArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular spectrum of a dense tensor
    Spectrum {
        /// JSON tensor {"dims": [..], "data": [..]}
        #[arg(long)]
        input: PathBuf,
    },
    /// Pythagorean combination of two singular spectra
    Combine {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Certify a pair and draw the hive as SVG
    Render {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        lp: LpArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive diagonal feasibility (r ≤ 4, n ≤ 3)
    DiagBrute {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_sq: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta_sq: Option<String>,
    /// Read --gamma and --theta as squared values
    #[arg(long)]
    squared: bool,
    /// JSON file {"gamma": [..], "theta": [..]} or with gamma_sq/theta_sq
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LpArgs {
    #[arg(long, default_value_t = crate::simplex::DEFAULT_LP_TOL)]
    tol: f64,
    /// Half-width of the band around fixed boundaries
    #[arg(long)]
    relax: Option<f64>,
}

#[derive(Args, Debug)]
struct AltArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    iter_max: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, env = "TTSPECTRA_SEED", default_value_t = 0)]
    seed: u64,
}

impl AltArgs {
    fn options(&self) -> AltOptions {
        AltOptions {
            tol: self.tol,
            iter_max: self.iter_max,
            restarts: self.restarts,
        }
    }
}

impl LpArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            lp_tol: self.tol,
            relax: self.relax,
        }
    }
}

#[derive(Deserialize, Default)]
struct PairFile {
    gamma: Option<Vec<f64>>,
    theta: Option<Vec<f64>>,
    gamma_sq: Option<Vec<f64>>,
    theta_sq: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct SumFile {
    lambdas: Vec<Vec<f64>>,
    nu: Vec<f64>,
}

/// Exit status paired with the JSON document to print.
struct Outcome {
    code: i32,
    body: Value,
}

fn ok(body: Value) -> Outcome {
    Outcome { code: 0, body }
}

fn negative(body: Value) -> Outcome {
    Outcome { code: 1, body }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| usage(format!("cannot parse '{x}': {e}"))))
        .collect()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn spectrum(values: Vec<f64>, squared: bool) -> Result<Spectrum> {
    if squared {
        Spectrum::from_squared(&values)
    } else {
        Spectrum::new(values)
    }
}

impl PairArgs {
    fn load(&self) -> Result<(Spectrum, Spectrum)> {
        let file: PairFile = match &self.input {
            Some(p) => read_json(p)?,
            None => PairFile::default(),
        };
        let side = |plain: &Option<String>, sq: &Option<String>, fplain: Option<Vec<f64>>, fsq: Option<Vec<f64>>, name: &str| -> Result<Spectrum> {
            match (plain, sq) {
                (Some(_), Some(_)) => Err(usage(format!("give only one of --{name} and --{name}-sq"))),
                (Some(v), None) => spectrum(parse_list(v)?, self.squared),
                (None, Some(v)) => spectrum(parse_list(v)?, true),
                (None, None) => match (fplain, fsq) {
                    (Some(v), None) => spectrum(v, self.squared),
                    (None, Some(v)) => spectrum(v, true),
                    _ => Err(usage(format!("need exactly one of --{name}, --{name}-sq or an input file entry"))),
                },
            }
        };
        let g = side(&self.gamma, &self.gamma_sq, file.gamma, file.gamma_sq, "gamma")?;
        let t = side(&self.theta, &self.theta_sq, file.theta, file.theta_sq, "theta")?;
        Ok((g, t))
    }
}

fn squares(s: &Spectrum) -> Vec<f64> {
    s.squared()
}

fn trace_mismatch(e: &Error) -> Option<Value> {
    match e {
        Error::Trace { left, right } => Some(json!({"reason": "trace", "lhs": left, "rhs": right})),
        _ => None,
    }
}

fn hive_tol(spec: &honeylp::HiveSpec) -> f64 {
    let s = spec.fixings.iter().map(|f| f.values.get(0)).fold(1.0, f64::max);
    1e-7 * s
}

/// Runs a certified pair check and re-verifies the emitted witness.
fn certified(gamma: &Spectrum, theta: &Spectrum, m: usize, opts: SolveOptions) -> Result<std::result::Result<honeylp::PairCheck, Value>> {
    let check = match honeylp::check_pair_feasible_with(gamma, theta, m, opts) {
        Ok(c) => c,
        Err(e) => return trace_mismatch(&e).ok_or(e).map(Err),
    };
    if let Some(w) = &check.witness {
        if let (Some(spec), Some(sol)) = (&w.spec, &w.solution) {
            let v = honeylp::verify_solution(spec, sol)?;
            if v.worst() > hive_tol(spec) {
                return Err(Error::Numerical(format!("hive witness fails verification by {:e}", v.worst())));
            }
        }
    }
    Ok(Ok(check))
}

fn pair_json(check: &honeylp::PairCheck, with_solution: bool) -> Value {
    let mut v = json!({"feasible": check.feasible, "m": check.m});
    if let Some(w) = &check.witness {
        v["summands"] = json!(w.summands.iter().map(|s| s.values().to_vec()).collect::<Vec<_>>());
        if with_solution {
            v["boundaries"] = json!(w.solution.as_ref().map(|s| &s.boundaries));
        }
    }
    v
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Screen { pair, m, max_families } => {
            let (g, t) = pair.load()?;
            let report = screen::screen_pair(&g, &t, m, max_families);
            let body = serde_json::to_value(&report)?;
            Ok(if report.pass { ok(body) } else { negative(body) })
        }
        Command::CheckPair { pair, m, lp, out } => {
            let (g, t) = pair.load()?;
            match certified(&g, &t, m, lp.options())? {
                Err(reason) => Ok(negative(json!({"feasible": false, "m": m, "detail": reason}))),
                Ok(check) => {
                    if let (Some(path), Some(w)) = (&out, &check.witness) {
                        write_file(path, &to_json(&json!({"spec": w.spec, "solution": w.solution}))?)?;
                    }
                    let body = pair_json(&check, true);
                    Ok(if check.feasible { ok(body) } else { negative(body) })
                }
            }
        }
        Command::MinM { pair, lp } => {
            let (g, t) = pair.load()?;
            let lower = match screen::min_m_lower_bound(&g, &t) {
                Ok(l) => l,
                Err(e) => return trace_mismatch(&e).map(|r| negative(json!({"m": null, "detail": r}))).ok_or(e),
            };
            let check = honeylp::min_feasible_m_with(&g, &t, lp.options(), Execution::default())?;
            let again = certified(&g, &t, check.m, lp.options())?;
            if !matches!(&again, Ok(c) if c.feasible) {
                return Err(Error::Numerical(format!("m = {} failed re-certification", check.m)));
            }
            let mut body = pair_json(&check, false);
            body["lower_bound"] = json!(lower);
            Ok(ok(body))
        }
        Command::SumRelation { lambdas, nu, input, lp } => {
            let (ls, n) = match (lambdas, nu, input) {
                (Some(l), Some(n), None) => {
                    let ls = l.split(';').map(parse_list).collect::<Result<Vec<_>>>()?;
                    (ls, parse_list(&n)?)
                }
                (None, None, Some(p)) => {
                    let f: SumFile = read_json(&p)?;
                    (f.lambdas, f.nu)
                }
                _ => return Err(usage("give --lambdas with --nu, or --input")),
            };
            let ls = ls.into_iter().map(Spectrum::new).collect::<Result<Vec<_>>>()?;
            let nu = Spectrum::new(n)?;
            let rel = honeylp::check_sum_relation_with(&ls, &nu, lp.options())?;
            if let Some(sol) = &rel.witness {
                let mut spec = honeylp::sum_relation_hive(&ls, &nu)?;
                if let Some(r) = lp.relax {
                    spec.relax = r;
                }
                let v = honeylp::verify_solution(&spec, sol)?;
                if v.worst() > hive_tol(&spec) {
                    return Err(Error::Numerical(format!("hive witness fails verification by {:e}", v.worst())));
                }
            }
            let body = json!({"feasible": rel.feasible});
            Ok(if rel.feasible { ok(body) } else { negative(body) })
        }
        Command::ConstructCore { pair, n, alt, out } => {
            let (g, t) = pair.load()?;
            let opts = alt.options();
            let (core, method, seed) = if g.degree() <= n && t.degree() <= n {
                let table = construct::diagonal_construct(&g, &t, n)?;
                (Some(construct::core_from_table(&table, &g, &t)?), "diagonal", None)
            } else {
                let r = construct::alternating_svd_restarts(&g, &t, n, opts, alt.seed, Execution::default())?;
                (r.core, "alternating", r.seed)
            };
            let Some(core) = core else {
                return Ok(negative(json!({"converged": false, "method": method, "restarts": opts.restarts})));
            };
            let tol = if method == "diagonal" { construct::ORTHO_TOL } else { 10.0 * opts.tol };
            if !check_orthogonality(&core.scale_rows(g.positive()), Side::Left, tol)
                || !check_orthogonality(&core.scale_cols(t.positive()), Side::Right, tol)
            {
                return Err(Error::Numerical("constructed core fails the orthogonality check".into()));
            }
            if let Some(p) = &out {
                write_file(p, &to_json(&core)?)?;
            }
            Ok(ok(json!({"converged": true, "method": method, "seed": seed, "core": core})))
        }
        Command::ConstructTensor { input, dims, alt, out } => {
            let target: SingularSpectrum = read_json(&input)?;
            let a = match construct::build_tensor_from_spectrum_with(&target, &dims, alt.seed, alt.options(), Execution::default()) {
                Ok(a) => a,
                Err(Error::Construction { mode, reason }) => {
                    return Ok(negative(json!({"constructed": false, "mode": mode, "reason": reason})));
                }
                Err(e) => return Err(e),
            };
            if let Some(p) = &out {
                write_file(p, &to_json(&a)?)?;
            }
            Ok(ok(serde_json::to_value(&a)?))
        }
        Command::Spectrum { input } => {
            let a: DenseTensor = read_json(&input)?;
            Ok(ok(serde_json::to_value(tt::singular_spectrum(&a)?)?))
        }
        Command::Combine { left, right } => {
            let s: SingularSpectrum = read_json(&left)?;
            let t: SingularSpectrum = read_json(&right)?;
            Ok(ok(serde_json::to_value(combine_pythagorean(&s, &t)?)?))
        }
        Command::Render { pair, m, lp, out } => {
            let (g, t) = pair.load()?;
            if m < 2 {
                return Err(usage("rendering needs m >= 2"));
            }
            match certified(&g, &t, m, lp.options())? {
                Ok(check) if check.feasible => {
                    let w = check.witness.as_ref().expect("feasible check carries a witness");
                    let (spec, sol) = (w.spec.as_ref().unwrap(), w.solution.as_ref().unwrap());
                    honeylp::render_svg(sol, spec, &out)?;
                    let mut body = pair_json(&check, false);
                    body["svg"] = json!(out.display().to_string());
                    Ok(ok(body))
                }
                Ok(check) => Ok(negative(pair_json(&check, false))),
                Err(reason) => Ok(negative(json!({"feasible": false, "m": m, "detail": reason}))),
            }
        }
        Command::DiagBrute { pair, n } => {
            let (g, t) = pair.load()?;
            let w = construct::diagonal_witness_bruteforce(&g, &t, n, Execution::default())?;
            match w {
                Some(table) => {
                    let r = g.degree().max(t.degree());
                    let res = table.residual(&g.squared_padded(r), &t.squared_padded(r))?;
                    if res > construct::TABLE_TOL * g.sum_sq().max(1.0) {
                        return Err(Error::Numerical(format!("table misses the pair by {res:e}")));
                    }
                    Ok(ok(json!({"feasible": true, "n": n, "table": table})))
                }
                None => Ok(negative(json!({
                    "feasible": false,
                    "n": n,
                    "gamma_sq": squares(&g),
                    "theta_sq": squares(&t),
                }))),
            }
        }
    }
}

/// Parses `argv` (program name first), runs the command and writes JSON to
/// `out`; diagnostics go to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let res = execute(cli.command).and_then(|o| Ok((o.code, to_json(&o.body)?)));
    match res {
        Ok((code, text)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, Error::Precondition(_)) {
                let _ = writeln!(err, "run with --help for the expected arguments");
            }
            2
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
