//! Command-line front end.
//!
//! Exit codes: 0 when every asserted invariant holds, 1 on a numerical
//! failure (the failing rows are printed), 2 on a bad config or usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::approx::{best_poly, Norm, NormGrid};
use crate::error::{Error, Result};
use crate::harness::report::SCHEMA_VERSION;
use crate::harness::{run_and_write, Experiment, ExperimentConfig, TestFunction, CODE_VERSION};
use crate::mrs::MrsTable;
use crate::operators::{partial_sum, primitive_vp, vallee_poussin};
use crate::orthopoly::{RecurrenceTable, MAX_DEGREE};
use crate::weights::WeightSpec;

#[derive(Parser, Debug)]
#[command(name = "expweight", version = CODE_VERSION, about = "Weighted polynomial approximation with exponential weights")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// MRS numbers: x, a_x, T(a_x), delta_x, T(a_x) / (x / a_x)^(2/3).
    Mrs {
        #[command(flatten)]
        w: WeightArg,
        /// Comma-separated x values.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Recurrence coefficients k, b_k.
    Recurrence {
        #[command(flatten)]
        w: WeightArg,
        #[arg(long, default_value_t = MAX_DEGREE)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Gauss nodes and Christoffel numbers k, x_k, lambda_k.
    Gauss {
        #[command(flatten)]
        w: WeightArg,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evaluates s_n(f), v_n(f) or V_n(f) on a uniform grid: x, f, op, w, weighted error.
    ApproxOp {
        #[command(flatten)]
        w: WeightArg,
        #[arg(long, default_value = "sin")]
        function: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "v")]
        op: Op,
        /// Norm used for the constant of V_n.
        #[arg(long, default_value = "2")]
        p: Norm,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Best-approximation errors n, p, E_{p,n}, certificate, flags.
    Best {
        #[command(flatten)]
        w: WeightArg,
        #[arg(long, default_value = "sin")]
        function: String,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        p: Vec<Norm>,
        #[arg(long, default_value_t = 1)]
        nmin: usize,
        #[arg(long, default_value_t = 16)]
        nmax: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Runs verification experiments and writes CSV, JSON summary and plot data.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct WeightArg {
    /// `freud:<alpha>`, `erdos`, `erdos:<u>,<alpha>,<l>` or a JSON object.
    #[arg(long, default_value = "erdos")]
    weight: String,
}

#[derive(Args, Debug)]
struct OutArg {
    /// CSV destination; a JSON summary is written next to it. Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// JSON experiment config; command-line options override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated experiments (simultaneous, perturbed, higher_derivatives, step_l1,
    /// tail_operator, favard, vp_near_best, vp_primitive, asymptotics, mrs_growth).
    #[arg(long, value_delimiter = ',')]
    experiment: Vec<Experiment>,
    /// Weight in the `--weight` syntax of the other commands; repeatable.
    #[arg(long)]
    weight: Vec<String>,
    /// Comma-separated norms: 1, 2, inf.
    #[arg(long, value_delimiter = ',')]
    p: Vec<Norm>,
    /// Comma-separated test functions: sin, arctan, xgauss, abs3, pcomb.
    #[arg(long, value_delimiter = ',')]
    function: Vec<String>,
    /// Smallest degree n.
    #[arg(long)]
    nmin: Option<usize>,
    /// Largest degree n (at most 20).
    #[arg(long)]
    nmax: Option<usize>,
    /// Output directory for CSV files, summary.json and plots/. Default: group verdicts on stdout only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Op {
    /// Fourier partial sum `s_n`.
    S,
    /// de la Vallee Poussin mean `v_n`.
    V,
    /// Primitive operator `V_n` with `V_n' = v_n(f')`.
    #[value(name = "prim")]
    Prim,
}

impl clap::builder::ValueParserFactory for Experiment {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Experiment>().map_err(|e| e.to_string()))
    }
}

impl clap::builder::ValueParserFactory for Norm {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Norm>().map_err(|e| e.to_string()))
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            1
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct TableSummary<'a> {
    schema_version: u32,
    code_version: &'a str,
    command: &'a str,
    weight: String,
    header: &'a [&'a str],
    rows: usize,
    pass: usize,
    fail: usize,
}

/// Writes a CSV table to `out` (with a JSON summary) or stdout.
fn emit(command: &str, weight: &WeightSpec, header: &[&str], rows: &[Vec<String>], fail: usize, out: &OutArg) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    match &out.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, &text)?;
            let summary = TableSummary {
                schema_version: SCHEMA_VERSION,
                code_version: CODE_VERSION,
                command,
                weight: weight.label(),
                header,
                rows: rows.len(),
                pass: rows.len() - fail,
                fail,
            };
            fs::write(path.with_extension("json"), serde_json::to_string_pretty(&summary)? + "\n")?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn rec_for(weight: &WeightSpec, n: usize) -> Result<Arc<RecurrenceTable>> {
    Ok(Arc::new(RecurrenceTable::for_weight(weight.clone(), n)?))
}

fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Mrs { w, x, out } => {
            let spec = WeightSpec::parse(&w.weight)?;
            if x.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Config("x values must be positive".into()));
            }
            let table = MrsTable::new(spec.clone());
            let mut rows = Vec::new();
            for &v in &x {
                let a = table.compute_a(v)?;
                let t = spec.t(a)?;
                rows.push(vec![num(v), num(a), num(t), num(table.delta(v)?), num(t / (v / a).powf(2.0 / 3.0))]);
            }
            emit("mrs", &spec, &["x", "a_x", "t_ax", "delta_x", "growth_ratio"], &rows, 0, &out)?;
            Ok(true)
        }
        Cmd::Recurrence { w, n, out } => {
            let spec = WeightSpec::parse(&w.weight)?;
            if n == 0 || n > MAX_DEGREE {
                return Err(Error::Config(format!("n must be in 1..={MAX_DEGREE}")));
            }
            let rec = rec_for(&spec, n)?;
            let rows: Vec<Vec<String>> = (1..=n).map(|k| vec![k.to_string(), num(rec.b(k))]).collect();
            emit("recurrence", &spec, &["k", "b_k"], &rows, 0, &out)?;
            Ok(true)
        }
        Cmd::Gauss { w, n, out } => {
            let spec = WeightSpec::parse(&w.weight)?;
            if n == 0 || n > MAX_DEGREE {
                return Err(Error::Config(format!("n must be in 1..={MAX_DEGREE}")));
            }
            let rec = rec_for(&spec, n.min(MAX_DEGREE))?;
            let g = rec.gauss_data(n)?;
            let rows: Vec<Vec<String>> = g
                .zeros
                .iter()
                .zip(&g.lambdas)
                .enumerate()
                .map(|(k, (x, l))| vec![(k + 1).to_string(), num(*x), num(*l)])
                .collect();
            emit("gauss", &spec, &["k", "x_k", "lambda_k"], &rows, 0, &out)?;
            Ok(true)
        }
        Cmd::ApproxOp { w, function, n, op, p, points, out } => {
            let spec = WeightSpec::parse(&w.weight)?;
            if n == 0 || 2 * n > MAX_DEGREE || points < 2 {
                return Err(Error::Config(format!("need 1 <= n <= {} and points >= 2", MAX_DEGREE / 2)));
            }
            let rec = rec_for(&spec, MAX_DEGREE)?;
            let f = TestFunction::by_name(&function, &rec)?;
            let eval: Box<dyn Fn(f64) -> f64> = match op {
                Op::S => {
                    let s = partial_sum(&rec, f.deriv(0), n)?;
                    Box::new(move |x| s.eval(x))
                }
                Op::V => {
                    let v = vallee_poussin(&rec, f.deriv(0), n)?;
                    Box::new(move |x| v.eval(x))
                }
                Op::Prim => {
                    let grid = NormGrid::new(&rec, 2 * n)?;
                    let v = primitive_vp(&rec, f.deriv(0), f.deriv(1), n, p, &grid)?;
                    Box::new(move |x| v.poly.eval(x))
                }
            };
            let r = rec.mrs().compute_a(2.0 * n as f64)?;
            let rows: Vec<Vec<String>> = (0..points)
                .map(|i| {
                    let x = -r + 2.0 * r * i as f64 / (points - 1) as f64;
                    let fx = f.eval(x, 0);
                    let ox = eval(x);
                    vec![num(x), num(fx), num(ox), num(spec.w(x)), num(spec.mul_weight(fx - ox, x, 1.0))]
                })
                .collect();
            emit("approx-op", &spec, &["x", "f", "op", "w", "weighted_error"], &rows, 0, &out)?;
            Ok(true)
        }
        Cmd::Best { w, function, p, nmin, nmax, out } => {
            let spec = WeightSpec::parse(&w.weight)?;
            if nmin > nmax || nmax > MAX_DEGREE {
                return Err(Error::Config(format!("need nmin <= nmax <= {MAX_DEGREE}")));
            }
            let rec = rec_for(&spec, MAX_DEGREE)?;
            let f = TestFunction::by_name(&function, &rec)?;
            let mut rows = Vec::new();
            for &norm in &p {
                for n in nmin..=nmax {
                    let grid = NormGrid::new(&rec, n)?;
                    let b = best_poly(&rec, f.deriv(0), norm, n, &grid)?;
                    rows.push(vec![
                        n.to_string(),
                        norm.to_string(),
                        num(b.error),
                        num(b.certificate),
                        b.exact.to_string(),
                        b.tail_flag.to_string(),
                        b.noise_limited.to_string(),
                    ]);
                }
            }
            let header = ["n", "p", "e", "certificate", "exact", "tail_flag", "noise_limited"];
            emit("best", &spec, &header, &rows, 0, &out)?;
            Ok(true)
        }
        Cmd::Verify(args) => verify(args),
    }
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json(&read(path)?)?,
        None => ExperimentConfig::default(),
    };
    if !args.experiment.is_empty() {
        cfg.experiments = args.experiment.clone();
    }
    if !args.weight.is_empty() {
        cfg.weights = args
            .weight
            .iter()
            .map(|w| {
                WeightSpec::parse(w)?
                    .to_config()
                    .ok_or_else(|| Error::Config(format!("weight `{w}` has no config form")))
            })
            .collect::<Result<_>>()?;
    }
    if !args.p.is_empty() {
        cfg.p = args.p.clone();
    }
    if !args.function.is_empty() {
        cfg.functions = args.function.clone();
    }
    if let Some(n) = args.nmin {
        cfg.n_min = n;
    }
    if let Some(n) = args.nmax {
        cfg.n_max = n;
    }
    if let Some(o) = args.out {
        cfg.output_dir = Some(o);
    }
    cfg.validate()?;
    let (rep, files) = run_and_write(&cfg)?;
    let mut stdout = std::io::stdout().lock();
    for g in &rep.groups {
        let verdict = match (g.pass, g.asserted) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "fail (comparison only)",
        };
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into());
        writeln!(
            stdout,
            "{verdict} {} {}",
            g.label(),
            format_args!("max={} median={} rows={}", fmt(g.max_ratio), fmt(g.median_ratio), g.rows)
        )?;
    }
    for g in rep.failing_groups() {
        for r in &g.reasons {
            writeln!(stdout, "  failing {}: {r}", g.label())?;
        }
    }
    for f in &files {
        writeln!(stdout, "wrote {}", f.display())?;
    }
    writeln!(stdout, "groups: {} pass, {} fail", rep.pass_count, rep.fail_count)?;
    Ok(rep.passed())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}
