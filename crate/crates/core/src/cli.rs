//! Command-line front end. Every command prints a short summary to stdout
//! and, with `--output`, writes its JSON report to a file.
//!
//! Exit codes: 0 when the verdict holds, 1 when it does not, 2 for input
//! errors (unreadable files, malformed JSON, invalid arguments).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::complexes::{build_qi, verify_exactness};
use crate::error::Error;
use crate::exterior::ExteriorElement;
use crate::fixtures::{random_skew, rng};
use crate::genpos::poisson_t_general;
use crate::index_set::IndexSet;
use crate::linalg::det_dense;
use crate::poisson::{log_matrix, pfaffian, self_bracket, PoissonStructure, SkewMatrix};
use crate::ring::{parse_rational, Rational, VarSpec};
use crate::toric::{certify, dimension_table, make_toric_from_rationals};

#[derive(Debug, Parser)]
#[command(name = "logsymp", version, about = "Exact checks for log-symplectic Poisson structures")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check [Π, Π] = 0.
    Jacobi {
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Pfaffian and determinant of a skew matrix.
    Pfaffian {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Standard t-general position of the log matrix, with a certificate.
    Genpos {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        t: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Cohomology of the graded piece Q_I per (degree, weight).
    VerifyExactness {
        #[arg(long)]
        structure: PathBuf,
        /// Comma-separated 1-based divisor indices, e.g. 1,2.
        #[arg(long = "I", value_delimiter = ',', required = true)]
        index: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(i64).range(0..))]
        weight_cap: i64,
        #[command(flatten)]
        out: Output,
    },
    /// Certification and dimension table for a toric structure.
    ToricReport {
        #[arg(long, conflicts_with = "seed", required_unless_present = "seed")]
        matrix: Option<PathBuf>,
        /// Draw a random matrix instead.
        #[arg(long)]
        seed: Option<u64>,
        /// Half-dimension of the random matrix.
        #[arg(long, default_value_t = 2, requires = "seed")]
        n: usize,
        #[command(flatten)]
        out: Output,
    },
}

/// Failure before a verdict could be reached.
#[derive(Debug)]
struct InputError(String);

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError(e.to_string())
    }
}

fn read_json(path: &Path) -> Result<Value, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn read_structure(path: &Path) -> Result<PoissonStructure, InputError> {
    Ok(PoissonStructure::from_json(&read_json(path)?)?)
}

/// `{"matrix": [[...]]}` with integer or `"p/q"` string entries.
fn read_matrix(path: &Path) -> Result<Vec<Vec<Rational>>, InputError> {
    let v = read_json(path)?;
    let rows = v
        .get("matrix")
        .and_then(Value::as_array)
        .ok_or_else(|| InputError("expected {\"matrix\": [[...]]}".into()))?;
    rows.iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| InputError("matrix rows must be lists".into()))?
                .iter()
                .map(|x| match x {
                    Value::String(s) => Ok(parse_rational(s)?),
                    Value::Number(n) if n.is_i64() => Ok(parse_rational(&n.to_string())?),
                    _ => Err(InputError(format!("matrix entry {x} must be an integer or a \"p/q\" string"))),
                })
                .collect()
        })
        .collect()
}

fn matrix_json(a: &[Vec<Rational>]) -> Value {
    json!(a.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn write_report(out: &Output, report: &Value) -> Result<(), InputError> {
    if let Some(path) = &out.output {
        let mut text = serde_json::to_string_pretty(report).expect("JSON values serialize");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<bool, InputError> {
    let say = |stdout: &mut dyn Write, s: String| {
        let _ = writeln!(stdout, "{s}");
    };
    match cmd {
        Command::Jacobi { structure, out } => {
            let p = read_structure(structure)?;
            let bracket = self_bracket(&p);
            let holds = bracket.is_zero();
            let mut report = json!({ "jacobi": holds });
            if holds {
                say(stdout, "jacobi: [Pi, Pi] = 0".into());
            } else {
                say(stdout, format!("jacobi: [Pi, Pi] = {bracket}"));
                report["bracket"] = ExteriorElement::to_json(&bracket);
            }
            write_report(out, &report)?;
            Ok(holds)
        }
        Command::Pfaffian { matrix, out } => {
            let a = read_matrix(matrix)?;
            let sk = SkewMatrix::from_rationals(VarSpec::new(a.len(), 0)?, &a)?;
            let pf = pfaffian(&sk)?;
            let det = det_dense(&a);
            let consistent = &pf * &pf == det;
            say(stdout, format!("pfaffian: {pf} (det {det})"));
            write_report(
                out,
                &json!({
                    "size": a.len(),
                    "pfaffian": pf.to_string(),
                    "determinant": det.to_string(),
                    "pf_squared_equals_det": consistent,
                }),
            )?;
            Ok(consistent)
        }
        Command::Genpos { structure, t, out } => {
            let p = read_structure(structure)?;
            let cert = poisson_t_general(&p, *t as usize)?;
            let verified = cert.verify_standard(log_matrix(&p)?.matrix())?;
            match cert.first_failure() {
                None => say(stdout, format!("genpos: {t}-general (certificate verified: {verified})")),
                Some(f) => say(stdout, format!("genpos: not {t}-general, columns {f} have no unit minor")),
            }
            let mut report = cert.to_json();
            report["certificate_verified"] = json!(verified);
            write_report(out, &report)?;
            Ok(cert.verdict && verified)
        }
        Command::VerifyExactness { structure, index, max_degree, weight_cap, out } => {
            let p = read_structure(structure)?;
            let total = p.spec().total_vars();
            if index.iter().any(|i| *i == 0 || *i > total) {
                return Err(InputError(format!("--I takes 1-based indices in 1..={total}")));
            }
            let set = IndexSet::from_indices(index.iter().map(|i| i - 1));
            let q = build_qi(&p, set, *weight_cap, *max_degree)?;
            let report = verify_exactness(&q.complex, 0..=*max_degree)?;
            say(stdout, format!("{}: {} (weights <= {weight_cap}, degrees <= {max_degree})", report.complex_id, report.verdict));
            for row in report.table.iter().filter(|r| r.dim_cohomology > 0) {
                say(stdout, format!("  H^{} at weight {}: {}", row.degree, row.weight, row.dim_cohomology));
            }
            write_report(out, &report.to_json())?;
            Ok(report.is_exact())
        }
        Command::ToricReport { matrix, seed, n, out } => {
            let a = match (matrix, seed) {
                (Some(path), _) => read_matrix(path)?,
                (None, Some(s)) => random_skew(&mut rng(*s), 2 * n),
                (None, None) => unreachable!("clap requires one of --matrix, --seed"),
            };
            let (t, p) = make_toric_from_rationals(&a)?;
            let r = certify(&t, &p)?;
            let verdict = r.log_symplectic && r.t_general(2) == Some(true);
            say(
                stdout,
                format!(
                    "toric-report: Pf = {}, log-symplectic {}, 2-general {}",
                    r.pfaffian,
                    r.log_symplectic,
                    r.t_general(2).unwrap_or(false)
                ),
            );
            write_report(
                out,
                &json!({
                    "matrix": matrix_json(&a),
                    "seed": seed,
                    "certify": r.to_json(),
                    "dimensions": dimension_table(a.len()),
                    "verdict": verdict,
                }),
            )?;
            Ok(verdict)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match execute(&config.command, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(InputError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}
