use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use eqcover::count::cover_count;
use eqcover::problem::{enumerate_problems, CyclicData, ProblemSpec, ValidationResult};
use eqcover::solver::{verify_count, Precision, ToleranceSet, Verdict, VerifyReport};
use serde::Serialize;
use serde_json::Value;

mod record;

use record::{Command, Params, RunRecord};

const EXIT_FAIL: i32 = 2;
const EXIT_SOLVER: i32 = 3;
const EXIT_USAGE: i32 = 64;
const EXIT_DATA: i32 = 65;
const EXIT_NOINPUT: i32 = 66;
const EXIT_IO: i32 = 74;

/// Count and numerically verify cyclic-equivariant covers of the projective line.
#[derive(Debug, Parser)]
#[command(name = "eqcover", version)]
struct Cli {
    /// Append a run record to this JSON-lines file.
    #[arg(long, global = true)]
    journal: Option<PathBuf>,
    /// Print the result as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check every constraint on a problem spec.
    Validate { spec: PathBuf },
    /// Closed-form cover count.
    Count { spec: PathBuf },
    /// All valid specs over a cyclic base up to a degree bound.
    Enumerate {
        #[arg(long)]
        r: u32,
        /// Monodromy, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        xi: Vec<u32>,
        #[arg(long)]
        dmax: u64,
    },
    /// Solve the intersection system and compare with the count.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        /// Worker threads for path tracking (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Theta characteristic of a hyperelliptic spec.
    Theta { spec: PathBuf },
    /// Re-run every record of a journal and compare results.
    Replay { journal_file: PathBuf },
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long)]
    residual_tol: Option<f64>,
    #[arg(long)]
    dedup_radius: Option<f64>,
    #[arg(long)]
    singular_tol: Option<f64>,
    #[arg(long)]
    divergence_norm: Option<f64>,
    #[arg(long)]
    step_budget: Option<u64>,
    #[arg(long)]
    cluster_radius: Option<f64>,
    /// double or extended
    #[arg(long)]
    precision: Option<Precision>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

/// Payload, text rendering and exit status of one command.
struct Output {
    payload: Value,
    text: String,
    code: i32,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable payload")
}

fn read_spec(path: &Path) -> Result<ProblemSpec, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| fail(EXIT_NOINPUT, format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| fail(EXIT_NOINPUT, format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| fail(EXIT_DATA, format!("{}: malformed spec: {e}", path.display())))
}

fn violations_text(v: &ValidationResult) -> String {
    v.violations()
        .iter()
        .map(|v| format!("  [{}] {}\n", v.constraint, v.message))
        .collect()
}

fn require_valid(spec: &ProblemSpec) -> Result<(), Failure> {
    let v = spec.validate();
    if v.is_ok() {
        Ok(())
    } else {
        Err(fail(EXIT_DATA, format!("invalid spec:\n{}", violations_text(&v).trim_end())))
    }
}

fn tolerances(args: &TolArgs) -> Result<ToleranceSet, Failure> {
    let mut t = ToleranceSet::from_env().map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    if let Some(v) = args.residual_tol {
        t.residual_tol = v;
    }
    if let Some(v) = args.dedup_radius {
        t.dedup_radius = v;
    }
    if let Some(v) = args.singular_tol {
        t.singular_tol = v;
    }
    if let Some(v) = args.divergence_norm {
        t.divergence_norm = v;
    }
    if let Some(v) = args.step_budget {
        t.step_budget = v;
    }
    if let Some(v) = args.cluster_radius {
        t.cluster_radius = v;
    }
    if let Some(v) = args.precision {
        t.precision = v;
    }
    Ok(t)
}

fn run_validate(spec: &ProblemSpec) -> Output {
    let v = spec.validate();
    let text = match &v {
        ValidationResult::Ok { derived } => format!(
            "valid: genus {}, degree {}, k = {}, b = {}, t = {}\n",
            derived.genus, derived.d, derived.k, derived.b, derived.t
        ),
        ValidationResult::Invalid { .. } => format!("invalid:\n{}", violations_text(&v)),
    };
    let code = if v.is_ok() { 0 } else { EXIT_DATA };
    Output { payload: to_value(&v), text, code }
}

fn run_count(spec: &ProblemSpec) -> Result<Output, Failure> {
    require_valid(spec)?;
    let c = cover_count(spec).map_err(|e| fail(EXIT_DATA, e.to_string()))?;
    let text = format!("segre {}\nrho {}\ntotal {}\n", c.segre, c.rho, c.total);
    Ok(Output { payload: to_value(&c), text, code: 0 })
}

fn run_enumerate(r: u32, xi: &[u32], dmax: u64) -> Result<Output, Failure> {
    let base = CyclicData::new(r, xi.to_vec()).map_err(|e| fail(EXIT_DATA, e.to_string()))?;
    let specs = enumerate_problems(&base, dmax);
    let mut text = String::new();
    for s in &specs {
        text.push_str(&s.to_canonical_json());
        text.push('\n');
    }
    Ok(Output { payload: to_value(&specs), text, code: 0 })
}

fn report_line(r: &VerifyReport) -> String {
    let verdict = match r.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Error => "ERROR",
    };
    let mut s = format!(
        "trial {}: {verdict} accepted {} expected {} (paths {}: {} finite, {} at infinity, {} truncated, {} failed)",
        r.trial,
        r.accepted,
        r.expected,
        r.paths.tracked,
        r.paths.finite,
        r.paths.at_infinity,
        r.paths.truncated,
        r.paths.failed
    );
    let rej = &r.rejected;
    let _ = write!(
        s,
        "\n  rejected: {} duplicate, {} outside U, {} profile mismatch, {} singular, {} precision",
        rej.duplicate, rej.outside_u, rej.profile_mismatch, rej.singular_jacobian, rej.precision_exhausted
    );
    if let (Some(res), Some(rc)) = (r.max_residual, r.min_rcond) {
        let _ = write!(s, "\n  max residual {res:.2e}, min rcond {rc:.2e}");
    }
    if let Some(e) = &r.error {
        let _ = write!(s, "\n  error: {e}");
    }
    s.push('\n');
    s
}

fn run_verify(
    spec: &ProblemSpec,
    trials: u32,
    seed: u64,
    tol: &ToleranceSet,
    threads: Option<usize>,
) -> Result<Output, Failure> {
    require_valid(spec)?;
    let go = || verify_count(spec, trials, seed, tol);
    let reports = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| fail(EXIT_USAGE, e.to_string()))?
            .install(go),
        None => go(),
    }
    .map_err(|e| fail(EXIT_DATA, e.to_string()))?;
    let code = if reports.iter().any(|r| r.verdict == Verdict::Error) {
        EXIT_SOLVER
    } else if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        EXIT_FAIL
    } else {
        0
    };
    let text = reports.iter().map(report_line).collect();
    Ok(Output { payload: to_value(&reports), text, code })
}

fn run_theta(spec: &ProblemSpec) -> Result<Output, Failure> {
    let div = spec.theta_characteristic().map_err(|e| fail(EXIT_DATA, e.to_string()))?;
    let mut text = format!("{} H", div.h_coeff);
    for (i, c) in div.point_coeffs.iter().enumerate() {
        let _ = write!(text, " {} {} P{}", if *c < 0 { '-' } else { '+' }, c.abs(), i + 1);
    }
    let _ = writeln!(text, "\ndegree {}", div.degree());
    Ok(Output { payload: to_value(&div), text, code: 0 })
}

/// Re-executes a record from its stored inputs alone.
fn rerun(rec: &RunRecord) -> Result<Output, Failure> {
    let spec = || rec.spec.as_ref().ok_or_else(|| fail(EXIT_DATA, "record has no spec"));
    match rec.command {
        Command::Validate => Ok(run_validate(spec()?)),
        Command::Count => run_count(spec()?),
        Command::Theta => run_theta(spec()?),
        Command::Enumerate => {
            let p = &rec.params;
            match (p.r, &p.xi, p.dmax) {
                (Some(r), Some(xi), Some(dmax)) => run_enumerate(r, xi, dmax),
                _ => Err(fail(EXIT_DATA, "enumerate record lacks r, xi or dmax")),
            }
        }
        Command::Verify => {
            let tol = rec.params.tolerances.clone().unwrap_or_default();
            run_verify(spec()?, rec.params.trials.unwrap_or(1), rec.seed.unwrap_or(0), &tol, None)
        }
    }
}

#[derive(Serialize)]
struct ReplayEntry {
    line: usize,
    command: Command,
    reproduced: bool,
}

fn run_replay(path: &Path) -> Result<Output, Failure> {
    let records = record::read_all(path).map_err(|e| fail(EXIT_DATA, format!("{e:#}")))?;
    let mut entries = Vec::new();
    let mut text = String::new();
    for (i, rec) in records.iter().enumerate() {
        let reproduced = match rerun(rec) {
            Ok(out) => out.payload == rec.result && out.code == rec.exit_code,
            Err(f) => f.code == rec.exit_code && rec.result.is_null(),
        };
        let _ = writeln!(
            text,
            "record {}: {} {}",
            i + 1,
            to_value(&rec.command).as_str().unwrap_or("?"),
            if reproduced { "reproduced" } else { "DIFFERS" }
        );
        entries.push(ReplayEntry { line: i + 1, command: rec.command, reproduced });
    }
    let code = if entries.iter().all(|e| e.reproduced) { 0 } else { EXIT_FAIL };
    Ok(Output { payload: to_value(&entries), text, code })
}

fn journal(path: Option<&Path>, rec: &mut RunRecord, started: Instant, out: &Result<Output, Failure>) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    match out {
        Ok(o) => {
            rec.result = o.payload.clone();
            rec.exit_code = o.code;
        }
        Err(f) => rec.exit_code = f.code,
    }
    rec.elapsed = started.elapsed().as_secs_f64();
    record::append(path, rec).map_err(|e| fail(EXIT_IO, format!("{e:#}")))
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let started = Instant::now();
    let (out, mut rec) = match &cli.command {
        Cmd::Validate { spec } => {
            let spec = read_spec(spec)?;
            (Ok(run_validate(&spec)), RunRecord::new(Command::Validate, Some(spec), None, Params::default()))
        }
        Cmd::Count { spec } => {
            let spec = read_spec(spec)?;
            (run_count(&spec), RunRecord::new(Command::Count, Some(spec), None, Params::default()))
        }
        Cmd::Theta { spec } => {
            let spec = read_spec(spec)?;
            (run_theta(&spec), RunRecord::new(Command::Theta, Some(spec), None, Params::default()))
        }
        Cmd::Enumerate { r, xi, dmax } => {
            let params = Params { r: Some(*r), xi: Some(xi.clone()), dmax: Some(*dmax), ..Default::default() };
            (run_enumerate(*r, xi, *dmax), RunRecord::new(Command::Enumerate, None, None, params))
        }
        Cmd::Verify { spec, trials, seed, tol, threads } => {
            let spec = read_spec(spec)?;
            let tol = tolerances(tol)?;
            let out = run_verify(&spec, *trials, *seed, &tol, *threads);
            let params = Params { trials: Some(*trials), tolerances: Some(tol), ..Default::default() };
            (out, RunRecord::new(Command::Verify, Some(spec), Some(*seed), params))
        }
        Cmd::Replay { journal_file } => return run_replay(journal_file),
    };
    journal(cli.journal.as_deref(), &mut rec, started, &out)?;
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not an error of the run
            let _ = if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&out.payload).expect("json"))
            } else {
                stdout.write_all(out.text.as_bytes())
            };
            ExitCode::from(out.code as u8)
        }
        Err(f) => {
            eprintln!("eqcover: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
