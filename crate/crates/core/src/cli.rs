//! Command line front end. Every command prints one JSON report with a
//! `pass` flag and the tool version.
//!
//! Exit codes: 0 when the report passes, 1 when a check fails (the report is
//! still printed), 2 on malformed input.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::analytic::{SchurCheck, TaylorFn, DEFAULT_DEGREE};
use crate::dataset::{build_omega, random_dataset, validate, DataSet, Dims, OmegaData, Preset};
use crate::error::Error;
use crate::jmap::{canonical_parameter, j_gamma, parameter_to_constrained, s_omega_margin};
use crate::lifting::{build_big_omega, gamma_from_pair, uniqueness_check, verify_solution, GammaOp};
use crate::majorant::majorant_report;
use crate::opcore::DEFAULT_RANK_TOL;
use crate::schurpair::{pair_from_parameter, parameter_from_pair, verify_pair};
use crate::VERSION;

#[derive(Debug, Parser)]
#[command(name = "rcl", version, about = "Solve and verify relaxed commutant lifting problems")]
pub struct Cli {
    /// Truncation degree of all series
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE)]
    pub degree: usize,
    /// Verification tolerance (checks on Ω use ten times this value)
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Boundary samples for Schur-class and majorant checks
    #[arg(long, global = true, default_value_t = 64)]
    pub samples: usize,
    /// Seed for instance generation
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random data set
    Gen {
        #[arg(long, default_value = "generic")]
        preset: Preset,
        /// Dimensions `dim H_0,dim H,dim H'`
        #[arg(long, default_value = "2,3,3", value_parser = parse_dims)]
        dims: Dims,
        /// Output file (standard output when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the constraints of a data set
    Validate { data: PathBuf },
    /// Summarize the coupling contraction of a data set
    Omega { data: PathBuf },
    /// Build the solution of a Schur parameter (zero when absent)
    Solve {
        data: PathBuf,
        #[arg(long)]
        param: Option<PathBuf>,
    },
    /// Verify a symbol against a data set
    Verify { data: PathBuf, gamma: PathBuf },
    /// Map a constrained parameter back to a Schur pair
    Jmap {
        data: PathBuf,
        gamma: PathBuf,
        /// Member of the constrained Schur class
        #[arg(long, conflicts_with = "c1")]
        c: Option<PathBuf>,
        /// Free parameter of the constrained Schur class
        #[arg(long)]
        c1: Option<PathBuf>,
    },
    /// Harmonic majorant checks for a symbol
    Majorant {
        gamma: PathBuf,
        /// Schur-class parameter on the defect space of the symbol
        #[arg(long)]
        c: Option<PathBuf>,
    },
    /// Uniqueness verdict for a data set
    Unique { data: PathBuf },
    /// Parameter -> pair -> symbol -> constrained parameter -> pair -> symbol
    Roundtrip {
        data: PathBuf,
        #[arg(long)]
        param: Option<PathBuf>,
        #[arg(long)]
        c1: Option<PathBuf>,
    },
}

impl std::str::FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [h0, h, hp] => Ok(Dims::new(h0, h, hp)),
            _ => Err(format!("expected three comma-separated dimensions, got {s:?}")),
        }
    }
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    s.parse()
}

/// Outcome of a command: exit code and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    /// Bad input: exit 2, no report.
    Input(String),
    /// A check could not be completed: exit 1 with a failing report.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch(_) | Error::InvalidInput(_) | Error::NotScalar { .. } => {
                Failure::Input(e.to_string())
            }
            other => Failure::Check(other.to_string()),
        }
    }
}

type CmdResult = Result<Value, Failure>;

/// Runs the tool on `args` (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(Output::Report(report)) => {
            let pass = report.get("pass").and_then(Value::as_bool).unwrap_or(false);
            Outcome {
                code: if pass { 0 } else { 1 },
                stdout: render(&report),
                stderr: String::new(),
            }
        }
        Ok(Output::Text(text)) => Outcome { code: 0, stdout: text, stderr: String::new() },
        Err(Failure::Input(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Check(msg)) => {
            let report = json!({ "pass": false, "error": msg, "version": VERSION });
            Outcome {
                code: 1,
                stdout: render(&report),
                stderr: format!("error: {msg}\n"),
            }
        }
    }
}

enum Output {
    Report(Value),
    /// Raw text, already formatted (possibly empty when written to a file).
    Text(String),
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("reports are plain JSON");
    s.push('\n');
    s
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn with_meta(mut v: Value, pass: bool) -> Value {
    let obj = v.as_object_mut().expect("reports are objects");
    obj.insert("pass".into(), Value::Bool(pass));
    obj.insert("version".into(), Value::String(VERSION.into()));
    v
}

struct Settings {
    degree: usize,
    tol: f64,
    samples: usize,
    check: SchurCheck,
}

impl Settings {
    fn from(cli: &Cli) -> Self {
        Settings {
            degree: cli.degree,
            tol: cli.tol,
            samples: cli.samples,
            check: SchurCheck {
                sections: 8,
                samples: cli.samples,
                tol: cli.tol,
            },
        }
    }

    fn omega_tol(&self) -> f64 {
        10.0 * self.tol
    }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let s = Settings::from(cli);
    let report = match &cli.command {
        Command::Gen { preset, dims, out } => {
            let ds = random_dataset(cli.seed, *dims, *preset).map_err(|e| match e {
                Error::GenerationFailed(m) => Failure::Input(m),
                other => other.into(),
            })?;
            let text = render(&to_value(&ds));
            return match out {
                Some(path) => {
                    std::fs::write(path, text)
                        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
                    Ok(Output::Text(String::new()))
                }
                None => Ok(Output::Text(text)),
            };
        }
        Command::Validate { data } => cmd_validate(&read_json(data)?, &s)?,
        Command::Omega { data } => cmd_omega(&read_json(data)?, &s)?,
        Command::Solve { data, param } => {
            let h = param.as_deref().map(read_json).transpose()?;
            cmd_solve(&read_json(data)?, h, &s)?
        }
        Command::Verify { data, gamma } => {
            let ds: DataSet = read_json(data)?;
            let g: GammaOp = read_json(gamma)?;
            let rep = verify_solution(&ds, &g, s.tol)?;
            with_meta(json!({ "solution": rep }), rep.pass)
        }
        Command::Jmap { data, gamma, c, c1 } => {
            let c = c.as_deref().map(read_json).transpose()?;
            let c1 = c1.as_deref().map(read_json).transpose()?;
            cmd_jmap(&read_json(data)?, &read_json(gamma)?, c, c1, &s)?
        }
        Command::Majorant { gamma, c } => {
            let g: GammaOp = read_json(gamma)?;
            let c: Option<TaylorFn> = c.as_deref().map(read_json).transpose()?;
            let rep = majorant_report(&g, c.as_ref(), s.degree, s.samples, &s.check, 10.0 * s.tol)?;
            let pass = rep.pass;
            with_meta(to_value(&rep), pass)
        }
        Command::Unique { data } => {
            let ds: DataSet = read_json(data)?;
            let od = build_omega(&ds, DEFAULT_RANK_TOL, s.tol)?;
            let rep = uniqueness_check(&ds, &od, s.tol)?;
            with_meta(json!({ "uniqueness": rep }), true)
        }
        Command::Roundtrip { data, param, c1 } => {
            let h = param.as_deref().map(read_json).transpose()?;
            let c1 = c1.as_deref().map(read_json).transpose()?;
            cmd_roundtrip(&read_json(data)?, h, c1, &s)?
        }
    };
    Ok(Output::Report(report))
}

fn cmd_validate(ds: &DataSet, s: &Settings) -> CmdResult {
    let rep = validate(ds, s.tol)?;
    Ok(with_meta(json!({ "validation": rep }), rep.pass))
}

fn cmd_omega(ds: &DataSet, s: &Settings) -> CmdResult {
    let od = build_omega(ds, DEFAULT_RANK_TOL, s.tol)?;
    let summary = od.summary();
    let pass = summary.contraction_margin >= -s.tol && summary.defining_residual <= s.tol;
    Ok(with_meta(json!({ "omega": summary }), pass))
}

fn zero_parameter(od: &OmegaData) -> TaylorFn {
    let (rows, cols) = od.coupling().parameter_shape();
    TaylorFn::zeros(rows, cols, 0)
}

fn cmd_solve(ds: &DataSet, h: Option<TaylorFn>, s: &Settings) -> CmdResult {
    let od = build_omega(ds, DEFAULT_RANK_TOL, s.tol)?;
    let h = h.unwrap_or_else(|| zero_parameter(&od));
    let pair = pair_from_parameter(&od, &h, h.degree(), &s.check)?;
    let pair_report = verify_pair(&od, &pair, s.check.sections, s.samples, s.tol)?;
    let gamma = gamma_from_pair(&pair, s.degree);
    let solution = verify_solution(ds, &gamma, s.tol)?;
    let pass = pair_report.pass && solution.pass;
    Ok(with_meta(
        json!({
            "pair": pair,
            "pair_report": pair_report,
            "gamma": gamma,
            "solution": solution,
        }),
        pass,
    ))
}

/// Largest coefficient index at which a `J_Γ` round trip is compared.
fn comparison_degree(degree: usize, parameter_degree: usize) -> usize {
    degree.saturating_sub(parameter_degree + 2)
}

fn cmd_jmap(
    ds: &DataSet,
    g: &GammaOp,
    c: Option<TaylorFn>,
    c1: Option<TaylorFn>,
    s: &Settings,
) -> CmdResult {
    let od = build_omega(ds, DEFAULT_RANK_TOL, s.tol)?;
    let bo = build_big_omega(ds, &od, g, DEFAULT_RANK_TOL, s.tol)?;
    let c = match (c, c1) {
        (Some(c), _) => c,
        (None, Some(c1)) => parameter_to_constrained(&bo, &c1, c1.degree(), &s.check)?,
        (None, None) => canonical_parameter(&bo),
    };
    let omega_check = SchurCheck { tol: s.omega_tol(), ..s.check };
    let membership = s_omega_margin(&c, &bo, omega_check.sections, s.samples, omega_check.tol)?;
    let out = j_gamma(g, &bo, &c, g.degree(), &omega_check)?;
    let back = gamma_from_pair(&out.pair, g.degree());
    let upto = comparison_degree(g.degree(), c.degree());
    let roundtrip_residual = back.theta().max_coeff_distance(g.theta(), upto);
    let pass = membership.pass && roundtrip_residual <= s.omega_tol();
    Ok(with_meta(
        json!({
            "pair": out.pair,
            "w0_deviation": out.w0_deviation,
            "membership": membership,
            "big_omega": bo.summary(),
            "roundtrip_residual": roundtrip_residual,
            "compared_through_degree": upto,
        }),
        pass,
    ))
}

fn cmd_roundtrip(ds: &DataSet, h: Option<TaylorFn>, c1: Option<TaylorFn>, s: &Settings) -> CmdResult {
    let od = build_omega(ds, DEFAULT_RANK_TOL, s.tol)?;
    let h = h.unwrap_or_else(|| zero_parameter(&od));
    let pair = pair_from_parameter(&od, &h, h.degree(), &s.check)?;
    let h_back = parameter_from_pair(&od, &pair, s.tol)?;
    let parameter_residual = h_back.max_coeff_distance(&h, h.degree());
    let gamma = gamma_from_pair(&pair, s.degree);
    let solution = verify_solution(ds, &gamma, s.tol)?;
    let bo = build_big_omega(ds, &od, &gamma, DEFAULT_RANK_TOL, s.tol)?;
    let c = match c1 {
        Some(c1) => parameter_to_constrained(&bo, &c1, c1.degree(), &s.check)?,
        None => canonical_parameter(&bo),
    };
    let omega_check = SchurCheck { tol: s.omega_tol(), ..s.check };
    let out = j_gamma(&gamma, &bo, &c, s.degree, &omega_check)?;
    let pair_report = verify_pair(&od, &out.pair, s.check.sections, s.samples, s.omega_tol())?;
    let gamma_back = gamma_from_pair(&out.pair, s.degree);
    let upto = comparison_degree(s.degree, c.degree());
    let theta_residual = gamma_back.theta().max_coeff_distance(gamma.theta(), upto);
    let pass = parameter_residual <= s.tol
        && solution.pass
        && theta_residual <= s.omega_tol();
    Ok(with_meta(
        json!({
            "parameter_residual": parameter_residual,
            "solution": {
                "contraction_margin": solution.contraction_margin,
                "max_residual": solution.max_residual,
                "tail_norm": solution.tail_norm,
                "pass": solution.pass,
            },
            "big_omega": bo.summary(),
            "w0_deviation": out.w0_deviation,
            // both only hold up to the truncated tail of the symbol
            "pair_restriction_residual": pair_report.restriction_residual,
            "pair_schur": pair_report.schur,
            "theta_residual": theta_residual,
            "compared_through_degree": upto,
        }),
        pass,
    ))
}
