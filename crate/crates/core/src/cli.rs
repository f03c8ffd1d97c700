//! Command-line driver with machine-readable output.
//!
//! Subcommands: `zeta`, `residue`, `haar`, `verify`, `scan-a2`. Global
//! options select the deformation parameter (an exact rational), working
//! precision, truncation, weight exponents, output format and the seed for
//! randomized suites; an optional key-value config file is merged underneath
//! the flags. JSON output carries a `schema: "qsu2/1"` marker and is
//! byte-identical across runs for identical configuration and seed.
//!
//! Exit codes: 0 success, 1 suite failure, 2 invalid parameters, 3 pole hit.

use crate::error::Error;
use crate::integral::{IntegralContext, WeightSpec};
use crate::numerics::{DeformationParameter, HalfInt};
use crate::verify::{run_suites, VerifyConfig};
use crate::zeta::{
    residue, residue_gamma_weighted, spectral_dimension, zeta_closed, ResidueMode, ZetaParams,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::{Complex, Float};
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "qsu2",
    version,
    about = "Spectral zeta functions, residues and the Haar state for quantum SU(2)"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Deformation parameter q as an exact rational "num/den" in (0, 1).
    #[arg(long, global = true)]
    q: Option<String>,

    /// Working precision in bits (>= 64).
    #[arg(long, global = true)]
    prec: Option<u32>,

    /// Truncation l_max, an integer or half-integer such as "20" or "41/2".
    #[arg(long, global = true)]
    lmax: Option<String>,

    /// Weight exponent a.
    #[arg(long, global = true)]
    a: Option<f64>,

    /// Weight exponent b.
    #[arg(long, global = true)]
    b: Option<f64>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    output: Option<OutputFormat>,

    /// Seed for randomized property suites.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Key-value config file merged under the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the closed-form zeta function at a point.
    Zeta {
        /// Real part of z.
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        /// Imaginary part of z.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z_im: f64,
        /// Absolute tail target for the adaptive truncation.
        #[arg(long, default_value_t = 1e-30)]
        eps: f64,
    },
    /// Residue of the zeta function at a pole.
    Residue {
        /// Pole location: "n", "n-2", or an explicit real number.
        #[arg(long, default_value = "n")]
        at: String,
        /// Weight the residue by the gamma function at the pole.
        #[arg(long)]
        gamma: bool,
    },
    /// Compare the normalized non-commutative integral with the Haar state.
    Haar {
        /// Algebra element, e.g. "b c" or "a^2 b + -1/4 d".
        #[arg(long)]
        expr: String,
        /// Comparison tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run a verification suite.
    Verify {
        /// One of algebra, spectral, zeta, integral, all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Scan for the weight exponent with vanishing residue two steps below
    /// the spectral dimension.
    ScanA2 {
        #[arg(long, default_value_t = 1.2)]
        a_min: f64,
        #[arg(long, default_value_t = 3.5)]
        a_max: f64,
    },
}

/// Effective run configuration after merging flags, config file and defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dp: DeformationParameter,
    pub prec: u32,
    pub l_max: HalfInt,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
    output: OutputFormat,
}

fn parse_half_int(s: &str) -> Result<HalfInt, Error> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad half-integer {s:?}")))?;
        match den.trim() {
            "1" => Ok(HalfInt::from_int(num)),
            "2" => Ok(HalfInt::from_twice(num)),
            _ => Err(Error::Parse(format!(
                "half-integer denominator must be 1 or 2 in {s:?}"
            ))),
        }
    } else {
        let n: i64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad half-integer {s:?}")))?;
        Ok(HalfInt::from_int(n))
    }
}

fn load_config_file(path: &PathBuf) -> Result<Vec<(String, String)>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read config {path:?}: {e}")))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "config line {} is not key = value: {line:?}",
                lineno + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl GlobalOpts {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut q = self.q.clone();
        let mut prec = self.prec;
        let mut lmax = self.lmax.clone();
        let mut a = self.a;
        let mut b = self.b;
        let mut seed = self.seed;
        let mut output = self.output;

        if let Some(path) = &self.config {
            for (k, v) in load_config_file(path)? {
                match k.as_str() {
                    "q" => {
                        q.get_or_insert(v);
                    }
                    "prec" => {
                        let parsed = v
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad prec {v:?}")))?;
                        prec.get_or_insert(parsed);
                    }
                    "lmax" => {
                        lmax.get_or_insert(v);
                    }
                    "a" => {
                        let parsed = v
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad a {v:?}")))?;
                        a.get_or_insert(parsed);
                    }
                    "b" => {
                        let parsed = v
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad b {v:?}")))?;
                        b.get_or_insert(parsed);
                    }
                    "seed" => {
                        let parsed = v
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad seed {v:?}")))?;
                        seed.get_or_insert(parsed);
                    }
                    "output" => {
                        let parsed = match v.as_str() {
                            "json" => OutputFormat::Json,
                            "csv" => OutputFormat::Csv,
                            "table" => OutputFormat::Table,
                            other => {
                                return Err(Error::Parse(format!("bad output format {other:?}")))
                            }
                        };
                        output.get_or_insert(parsed);
                    }
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown config key {other:?}"
                        )))
                    }
                }
            }
        }

        Ok(RunConfig {
            dp: DeformationParameter::from_q_str(&q.unwrap_or_else(|| "1/2".into()))?,
            prec: prec.unwrap_or(crate::numerics::DEFAULT_PREC),
            l_max: parse_half_int(&lmax.unwrap_or_else(|| "20".into()))?,
            a: a.unwrap_or(2.0),
            b: b.unwrap_or(1.0),
            seed: seed.unwrap_or(42),
            output: output.unwrap_or(OutputFormat::Json),
        })
    }
}

fn fmt_float(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    format!("{:.36e}", x)
}

fn fmt_complex_parts(v: &Complex) -> (String, String) {
    (fmt_float(v.real()), fmt_float(v.imag()))
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::PoleHit { .. } | Error::GammaPole { .. } => 3,
        Error::DivergentParameters { .. }
        | Error::DoublePole { .. }
        | Error::Parse(_)
        | Error::InvalidParameter(_)
        | Error::SeriesDivergence { .. } => 2,
    }
}

fn base_report(cfg: &RunConfig, command: &str) -> Value {
    json!({
        "schema": "qsu2/1",
        "command": command,
        "q": cfg.dp.q().to_string(),
        "prec": cfg.prec,
        "a": cfg.a,
        "b": cfg.b,
        "seed": cfg.seed,
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        for (k, v) in e {
            b.insert(k, v);
        }
    }
    base
}

fn render(value: &Value, fmt: OutputFormat) -> String {
    match fmt {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("serializable");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            let mut s = String::from("key,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{k},{v}\n"));
            }
            s
        }
        OutputFormat::Table => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            let mut s = String::new();
            for (k, v) in rows {
                s.push_str(&format!("{k:<width$}  {v}\n"));
            }
            s
        }
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push((
            prefix.to_string(),
            match other {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            },
        )),
    }
}

fn resolve_residue_point(cfg: &RunConfig, at: &str) -> Result<f64, Error> {
    let params = ZetaParams::new(cfg.dp.clone(), cfg.a, cfg.b);
    match at {
        "n" => spectral_dimension(&params),
        "n-2" => Ok(spectral_dimension(&params)? - 2.0),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad residue location {other:?}"))),
    }
}

fn run_command(cfg: &RunConfig, command: &Command) -> Result<(Value, i32), Error> {
    match command {
        Command::Zeta { z, z_im, eps } => {
            let params = ZetaParams::new(cfg.dp.clone(), cfg.a, cfg.b);
            let zz = Complex::with_val(cfg.prec, (*z, *z_im));
            let out = zeta_closed(&params, &zz, cfg.prec, *eps)?;
            let (re, im) = fmt_complex_parts(&out.value);
            let report = merge(
                base_report(cfg, "zeta"),
                json!({
                    "z_re": z,
                    "z_im": z_im,
                    "value_re": re,
                    "value_im": im,
                    "k_truncation": out.k_used,
                    "tail_bound": fmt_float(&out.tail_bound),
                }),
            );
            Ok((report, 0))
        }
        Command::Residue { at, gamma } => {
            let params = ZetaParams::new(cfg.dp.clone(), cfg.a, cfg.b);
            let z0 = resolve_residue_point(cfg, at)?;
            let rep = if *gamma {
                residue_gamma_weighted(&params, z0, cfg.prec, ResidueMode::Verified)?
            } else {
                residue(&params, z0, cfg.prec, ResidueMode::Verified)?
            };
            let (re, im) = fmt_complex_parts(&rep.residue);
            let report = merge(
                base_report(cfg, "residue"),
                json!({
                    "at": at,
                    "z0": rep.z0,
                    "order": "simple",
                    "contributing_k": rep.contributing_k,
                    "gamma_weighted": gamma,
                    "residue_re": re,
                    "residue_im": im,
                    "error_bound": fmt_float(&rep.error_bound),
                }),
            );
            Ok((report, 0))
        }
        Command::Haar { expr, tol } => {
            let ictx = IntegralContext::new(cfg.dp.clone(), WeightSpec::haar(cfg.a), cfg.prec)?;
            let x = ictx.algebra().parse(expr)?;
            let rep = ictx.haar_equality_check(&x, *tol)?;
            let rows: Vec<Value> = rep
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "monomial": r.monomial,
                        "normalized_integral": format!("{:.15e}", r.normalized_integral),
                        "haar_state": format!("{:.15e}", r.haar_state),
                        "abs_diff": format!("{:.3e}", r.abs_diff),
                    })
                })
                .collect();
            let sweep: Vec<Value> = rep
                .a_sweep
                .iter()
                .map(|(a, v)| json!({"a": a, "value": format!("{v:.15e}")}))
                .collect();
            let report = merge(
                base_report(cfg, "haar"),
                json!({
                    "expr": expr,
                    "tol": tol,
                    "monomials": rows,
                    "value": format!("{:.15e}", rep.whole_value),
                    "haar_state": format!("{:.15e}", rep.whole_haar),
                    "abs_diff": format!("{:.3e}", rep.whole_diff),
                    "a_sweep": sweep,
                    "a_spread": format!("{:.3e}", rep.a_spread),
                    "pass": rep.pass,
                }),
            );
            Ok((report, if rep.pass { 0 } else { 1 }))
        }
        Command::Verify { suite } => {
            let vcfg = VerifyConfig {
                dp: cfg.dp.clone(),
                prec: cfg.prec,
                l_max: cfg.l_max,
                a: cfg.a,
                b: cfg.b,
                seed: cfg.seed,
            };
            let reports = run_suites(&vcfg, suite)?;
            let pass = reports.iter().all(|r| r.pass());
            let suites: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "suite": r.suite,
                        "pass": r.pass(),
                        "checks": r.checks.iter().map(|c| json!({
                            "name": c.name,
                            "pass": c.pass,
                            "detail": c.detail,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let report = merge(
                base_report(cfg, "verify"),
                json!({
                    "lmax": cfg.l_max.to_string(),
                    "suites": suites,
                    "pass": pass,
                }),
            );
            Ok((report, if pass { 0 } else { 1 }))
        }
        Command::ScanA2 { a_min, a_max } => {
            let rep = crate::zeta::a2_criterion_scan(&cfg.dp, *a_min, *a_max, cfg.prec)?;
            let report = merge(
                base_report(cfg, "scan-a2"),
                json!({
                    "a_min": a_min,
                    "a_max": a_max,
                    "root_found": rep.a_star.is_some(),
                    "a_star": rep.a_star.map(|r| format!("{r:.12}")),
                    "bracket": rep.bracket.map(|(lo, hi)| vec![format!("{lo:.12}"), format!("{hi:.12}")]),
                    "residual": format!("{:.3e}", rep.residual),
                    "evaluations": rep.evaluations,
                }),
            );
            Ok((report, 0))
        }
    }
}

/// Parse arguments, run, and print; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version through this path.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match cli.opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    match run_command(&cfg, &cli.command) {
        Ok((report, code)) => {
            print!("{}", render(&report, cfg.output));
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
