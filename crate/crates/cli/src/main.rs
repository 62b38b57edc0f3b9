//! `solitonlab`: command-line front end for the soliton checks.
//!
//! Exit status is 0 when every requested check passes, 1 when a check fails
//! or a computation errors, and 2 for usage errors (bad flags, unknown names).

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use solitonlab::sampling::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(name = "solitonlab", version, about = "Checks for homogeneous expanding Ricci solitons")]
pub struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Soliton residual, divergence and nongradience of a catalog structure.
    VerifySoliton(VerifyArgs),
    /// Integrated stability form and its optimal decay constant.
    Stability(StabilityArgs),
    /// Homogeneous Ricci flow from a given initial metric.
    Flow(FlowArgs),
    /// Discrete resolvent solve `(λ − L)u = f`.
    Resolvent(ResolventArgs),
    /// Backward-Euler iteration of the discrete resolvent.
    Semigroup(SemigroupArgs),
    /// Run every published check and print a summary.
    ReproducePaper(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub name: String,
    /// sol3 family parameter.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Expansion constant override.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Half-width of the sampling box.
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
}

#[derive(Args, Debug)]
pub struct StabilityArgs {
    pub name: String,
    #[arg(long, value_parser = ["raw", "koiso"])]
    pub mode: Option<String>,
    /// Also compute ω_opt with a witness and compare it with the published constant.
    #[arg(long)]
    pub optimal: bool,
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    pub name: String,
    /// Initial frame metric as a JSON matrix (inline or a file path), or
    /// `soliton` for the self-similar initial metric `α t0 g`.
    #[arg(long, default_value = "soliton")]
    pub g0: String,
    #[arg(long, default_value_t = 1.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 1e6)]
    pub t1: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    /// Output samples per decade of time.
    #[arg(long, default_value_t = 10)]
    pub per_decade: usize,
}

#[derive(Args, Debug)]
pub struct ResolventArgs {
    pub name: String,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Imaginary part of λ.
    #[arg(long, default_value_t = 0.0)]
    pub lambda_im: f64,
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    #[arg(long = "box", default_value_t = 6.0)]
    pub box_radius: f64,
    /// Cutoff index k of the approximant; omitted means the full coefficients.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// `bump` or a JSON grid field.
    #[arg(long, default_value = "bump")]
    pub f: String,
    /// Decay constant; defaults to the published one.
    #[arg(long)]
    pub omega: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SemigroupArgs {
    pub name: String,
    #[arg(long, default_value_t = 0.1)]
    pub dtau: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 24)]
    pub grid: usize,
    #[arg(long = "box", default_value_t = 6.0)]
    pub box_radius: f64,
    #[arg(long)]
    pub omega: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Comma-separated criterion numbers; all by default.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u32>>,
    #[arg(long, default_value_t = 32)]
    pub resolvent_grid: usize,
    #[arg(long, default_value_t = 24)]
    pub convergence_grid: usize,
    #[arg(long, default_value_t = 24)]
    pub semigroup_grid: usize,
}

/// An error in the invocation rather than in the computation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// What a command produced.
pub struct Outcome {
    pub body: String,
    /// Human-readable notes for standard error.
    pub notes: Option<String>,
    pub passed: bool,
}

pub fn execute(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::VerifySoliton(a) => commands::verify_soliton(cli, a),
        Command::Stability(a) => commands::stability(cli, a),
        Command::Flow(a) => commands::flow(cli, a),
        Command::Resolvent(a) => commands::resolvent(cli, a),
        Command::Semigroup(a) => commands::semigroup(cli, a),
        Command::ReproducePaper(a) => commands::reproduce(cli, a),
    }
}

/// Runs the tool on an argument list; returns the exit code, the body and
/// the notes. Used by `main` and by the tests.
pub fn run_args<I, T>(args: I) -> (u8, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version are not errors
            return if e.use_stderr() {
                (2, String::new(), e.render().to_string())
            } else {
                (0, e.render().to_string(), String::new())
            };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let code = if o.passed { 0 } else { 1 };
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &o.body) {
                    return (1, String::new(), format!("error: writing {}: {e}\n", path.display()));
                }
                return (code, String::new(), o.notes.unwrap_or_default());
            }
            (code, o.body, o.notes.unwrap_or_default())
        }
        Err(e) => {
            let usage = e.downcast_ref::<UsageError>().is_some()
                || matches!(e.downcast_ref::<solitonlab::Error>(), Some(solitonlab::Error::UnknownGeometry(_)));
            (if usage { 2 } else { 1 }, String::new(), format!("error: {e:#}\n"))
        }
    }
}

fn main() -> ExitCode {
    let (code, body, notes) = run_args(std::env::args_os());
    let _ = std::io::stdout().write_all(body.as_bytes());
    let _ = std::io::stderr().write_all(notes.as_bytes());
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::run_args;
    use serde_json::Value;

    fn run(args: &[&str]) -> (u8, String, String) {
        run_args(std::iter::once("solitonlab").chain(args.iter().copied()))
    }

    fn json(args: &[&str]) -> (u8, Value) {
        let (code, body, notes) = run(args);
        let v = serde_json::from_str(&body).unwrap_or_else(|e| panic!("{e}: {body} {notes}"));
        (code, v)
    }

    #[test]
    fn verify_nil3_reports_zero_residual_and_divergence_four() {
        let (code, v) = json(&["verify-soliton", "nil3"]);
        assert_eq!(code, 0);
        assert_eq!(v["residual_max"].as_f64(), Some(0.0));
        assert_eq!(v["divergence"], "4");
        assert_eq!(v["nongradient"], true);
        assert_eq!(v["samples"], 100);
    }

    #[test]
    fn unknown_geometry_is_a_usage_error() {
        let (code, body, notes) = run(&["verify-soliton", "unknown-name"]);
        assert_eq!(code, 2);
        assert!(body.is_empty());
        assert!(notes.contains("unknown geometry"));
        assert_eq!(run(&["stability", "nil5"]).0, 2);
        assert_eq!(run(&["resolvent", "nil5", "--grid", "8"]).0, 2);
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        assert_eq!(run(&["verify-soliton", "nil3", "--bogus"]).0, 2);
        assert_eq!(run(&["verify-soliton", "sol3", "--gamma", "x/y"]).0, 2);
        assert_eq!(run(&["verify-soliton", "nil3", "--gamma", "1/2"]).0, 2);
        assert_eq!(run(&["stability", "nil3", "--mode", "other"]).0, 2);
        assert_eq!(run(&["flow", "nil3", "--g0", "[[1,0],[0,1]]"]).0, 2);
        assert_eq!(run(&["flow", "nil3", "--t0", "2", "--t1", "1"]).0, 2);
        assert_eq!(run(&["semigroup", "nil3", "--dtau", "0"]).0, 2);
        assert_eq!(run(&["reproduce-paper", "--criteria", "9"]).0, 2);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn failing_check_exits_one_with_diagnostics() {
        // the printed nil⁴ field is not a soliton
        let (code, v) = json(&["verify-soliton", "nil4"]);
        assert_eq!(code, 1);
        assert_eq!(v["passed"], false);
        assert!(v["residual_max"].as_f64().unwrap() > 1.0);
        assert_eq!(json(&["verify-soliton", "nil4-half"]).0, 0);
    }

    #[test]
    fn stability_reports_published_and_optimal_constants() {
        let (code, v) = json(&["stability", "sol3", "--optimal"]);
        assert_eq!(code, 0);
        assert_eq!(v["mode"], "koiso");
        let w = v["omega_optimal"].as_f64().unwrap();
        assert!((w - (5.0 - 17f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(v["M"].as_array().unwrap().len(), 6);
        let (_, raw) = json(&["stability", "sol3", "--mode", "raw", "--optimal"]);
        assert_eq!(raw["passed"], false);
        assert!(raw["omega_optimal"].as_f64().unwrap() < 0.0);
    }

    #[test]
    fn flow_csv_has_header_and_diagnostics() {
        let (code, body, notes) = run(&["flow", "nil3", "--t1", "1e4", "--per-decade", "2"]);
        assert_eq!(code, 0);
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("t,g11,g12,g13,g22,g23,g33,t_rm"));
        assert_eq!(lines.count(), 9);
        let d: Value = serde_json::from_str(&notes).unwrap();
        assert!(d["orbit_deviation"].as_f64().unwrap() < 1e-6);
        assert!((d["type3_sup"].as_f64().unwrap() - 0.5527707984).abs() < 1e-8);
    }

    #[test]
    fn flow_accepts_an_inline_metric() {
        let (code, v) = json(&["--format", "json", "flow", "nil3", "--g0", "[[1,0,0],[0,2,0],[0,0,0.5]]", "--t1", "100"]);
        assert_eq!(code, 0);
        assert_eq!(v["diagnostics"]["orbit_deviation"].as_f64().map(|d| d < 1e-6), Some(true));
        let traj = v["trajectory"].as_array().unwrap();
        assert_eq!(traj[0]["g"][1][1].as_f64(), Some(2.0));
    }

    #[test]
    fn resolvent_small_grid_satisfies_the_bound() {
        let (code, v) = json(&["resolvent", "nil3", "--grid", "10", "--lambda", "1"]);
        assert_eq!(code, 0);
        assert!(v["slack"].as_f64().unwrap() <= 0.05);
        assert_eq!(v["omega"].as_f64(), Some(0.5));
        let (code, v) = json(&["resolvent", "nil3", "--grid", "10", "--cutoff", "4"]);
        assert_eq!(code, 0);
        assert_eq!(v["cutoff"]["k"], 4);
    }

    #[test]
    fn resolvent_reads_a_field_file() {
        use solitonlab::resolvent::{default_bump, Grid};
        let s = solitonlab::soliton_by_name("nil3", None, None).unwrap().soliton;
        let grid = Grid::new(3, 8, 6.0).unwrap();
        let f = default_bump(&s, &grid);
        let dir = std::env::temp_dir().join(format!("solitonlab-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.json");
        std::fs::write(&path, serde_json::to_string(&f).unwrap()).unwrap();
        let p = path.to_str().unwrap();
        let (code, v) = json(&["resolvent", "nil3", "--grid", "8", "--f", p]);
        assert_eq!(code, 0, "{v}");
        // a field on another grid is rejected before solving
        assert_eq!(run(&["resolvent", "nil3", "--grid", "9", "--f", p]).0, 2);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn semigroup_defaults_to_csv() {
        let (code, body, _) = run(&["semigroup", "nil3", "--grid", "8", "--steps", "5"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines[0], "step,tau,norm0,factor");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn out_flag_writes_a_file() {
        let dir = std::env::temp_dir().join(format!("solitonlab-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v.json");
        let (code, body, _) = run(&["--out", path.to_str().unwrap(), "verify-soliton", "sol3"]);
        assert_eq!(code, 0);
        assert!(body.is_empty());
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["divergence"], "4");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn reproduce_selected_criteria_is_deterministic() {
        let args = ["--seed", "11", "reproduce-paper", "--criteria", "3,4"];
        let (code, a, _) = run(&args);
        let (_, b, _) = run(&args);
        assert_eq!(code, 0);
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["criteria"].as_array().unwrap().len(), 2);
        let (_, csv, _) = run(&["--format", "csv", "reproduce-paper", "--criteria", "3"]);
        assert!(csv.starts_with("criterion,title,check,gating,passed,summary\n"));
    }
}
