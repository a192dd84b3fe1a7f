//! Command-line front end for the coupling-capacity library.
//!
//! Subcommands: `alpha`, `beta`, `gap`, `gamma`, `strassen`, `classical`,
//! `schmidt`, `paper-examples`. Problems are read from JSON files (see
//! `format`), reports are written as JSON to stdout or `--output`.
//!
//! Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
//! 4 regression failure.

mod examples;
mod format;

use coupcap::capacity;
use coupcap::classical;
use coupcap::entangle;
use coupcap::gamma::{self, GammaMethod};
use coupcap::linalg::{range_projection, ProjectionOperator};
use coupcap::sdp::{SolverOptions, SolverStatus};
use format::{matrix_json, CertificateJson, CoverJson, ProblemFile, Report, ValidationError};
use std::process::ExitCode;
use std::time::Instant;

const USAGE: &str = "usage: coupcap <command> [<problem.json>] [flags]

commands:
  alpha <file>       coupling capacity of T (or of the rank-one projection of \"vector\")
  beta <file>        covering capacity, with the optimizing cover as certificate
  gap <file>         both capacities from independent solves, and their difference
  gamma <file>       projective capacity: exact on solved families, else a certified interval
  strassen <file>    support feasibility for the subspace in \"subspace\"
  classical <file>   transport/covering/vertex-cover values of the \"classical\" block
  schmidt <file>     schmidt coefficients of \"vector\"
  paper-examples     rerun the built-in reference-value regression table

flags:
  --tol <real>        solver residual tolerance (default 1e-8)
  --max-iters <int>   solver iteration cap (default 50000)
  --restarts <int>    random restarts for the projective search (default 32)
  --seed <int>        seed for randomized searches (default 0)
  --emit-witness      include witness and certificate matrices in the report
  --output <path>     write the report to a file instead of stdout";

struct Flags {
    tol: f64,
    max_iters: usize,
    restarts: usize,
    seed: u64,
    emit_witness: bool,
    output: Option<String>,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 50_000,
            restarts: 32,
            seed: 0,
            emit_witness: false,
            output: None,
        }
    }
}

impl Flags {
    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.max_iters,
            residual_tol: self.tol,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }

    fn fill_tolerances(&self, report: &mut Report) {
        report.seed = self.seed;
        report.tolerances.residual_tol = self.tol;
        report.tolerances.max_iterations = self.max_iters;
        report.tolerances.restarts = self.restarts;
    }
}

fn parse_flags(args: &[String]) -> Result<Flags, ValidationError> {
    let mut flags = Flags::default();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| ValidationError(format!("flag {name} needs a value")))
        };
        match arg.as_str() {
            "--tol" => {
                flags.tol = value("--tol")?
                    .parse()
                    .map_err(|e| ValidationError(format!("--tol: {e}")))?;
            }
            "--max-iters" => {
                flags.max_iters = value("--max-iters")?
                    .parse()
                    .map_err(|e| ValidationError(format!("--max-iters: {e}")))?;
            }
            "--restarts" => {
                flags.restarts = value("--restarts")?
                    .parse()
                    .map_err(|e| ValidationError(format!("--restarts: {e}")))?;
            }
            "--seed" => {
                flags.seed = value("--seed")?
                    .parse()
                    .map_err(|e| ValidationError(format!("--seed: {e}")))?;
            }
            "--emit-witness" => flags.emit_witness = true,
            "--output" => flags.output = Some(value("--output")?),
            other => {
                return Err(ValidationError(format!("unknown flag {other}")));
            }
        }
    }
    Ok(flags)
}

fn load(path: &str) -> Result<ProblemFile, ValidationError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ValidationError(format!("cannot read {path}: {e}")))?;
    ProblemFile::parse(&text)
}

fn status_string(status: SolverStatus) -> &'static str {
    match status {
        SolverStatus::Converged => "converged",
        SolverStatus::MaxIterations => "max-iterations",
        SolverStatus::Infeasible => "infeasible",
    }
}

fn emit(report: &Report, flags: &Flags) -> Result<(), ValidationError> {
    let text = report.to_json();
    match &flags.output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| ValidationError(format!("cannot write {path}: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Exit 3 when a capacity solve stopped on its iteration cap.
fn converged_or_exit3(report: &Report) -> ExitCode {
    if report.status == "max-iterations" {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_capacity(
    kind: &str,
    path: &str,
    flags: &Flags,
) -> Result<(Report, ExitCode), ValidationError> {
    let start = Instant::now();
    let file = load(path)?;
    let (n, m) = file.dims()?;
    let (left, right) = file.states()?;
    let t = file.operator()?;
    let opts = flags.solver_options();

    let mut report = Report::new(kind, path, n, m);
    flags.fill_tolerances(&mut report);

    match kind {
        "alpha" | "beta" => {
            let res = if kind == "alpha" {
                capacity::alpha(&t, &left, &right, &opts)?
            } else {
                capacity::beta(&t, &left, &right, &opts)?
            };
            report.values.insert(kind.to_string(), res.value);
            report.values.insert("certificate_gap".into(), res.gap);
            report.status = status_string(res.diagnostics.status).into();
            report.iterations = res.diagnostics.iterations;
            report.residuals.primal = res.diagnostics.primal_residual;
            report.residuals.dual = res.diagnostics.dual_residual;
            if flags.emit_witness {
                report.witness = res
                    .witness
                    .as_ref()
                    .map(|w| matrix_json(w.density().matrix()));
                report.certificate = res.certificate.as_ref().map(|(a, b)| CertificateJson {
                    a: matrix_json(a.matrix()),
                    b: matrix_json(b.matrix()),
                });
            }
        }
        "gap" => {
            let a = capacity::alpha(&t, &left, &right, &opts)?;
            let b = capacity::beta(&t, &left, &right, &opts)?;
            report.values.insert("alpha".into(), a.value);
            report.values.insert("beta".into(), b.value);
            report.values.insert("gap".into(), b.value - a.value);
            let worst = if a.diagnostics.status == SolverStatus::Converged
                && b.diagnostics.status == SolverStatus::Converged
            {
                SolverStatus::Converged
            } else {
                SolverStatus::MaxIterations
            };
            report.status = status_string(worst).into();
            report.iterations = a.diagnostics.iterations + b.diagnostics.iterations;
            report.residuals.primal = a
                .diagnostics
                .primal_residual
                .max(b.diagnostics.primal_residual);
            report.residuals.dual = a.diagnostics.dual_residual.max(b.diagnostics.dual_residual);
        }
        _ => unreachable!(),
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let code = converged_or_exit3(&report);
    Ok((report, code))
}

/// Split a projection into tensor factors when it has exact product form.
fn product_factors(
    e: &ProjectionOperator,
    n: usize,
    m: usize,
) -> Option<(ProjectionOperator, ProjectionOperator)> {
    let ta = coupcap::linalg::partial_trace_a(e.base(), n, m).ok()?;
    let tb = coupcap::linalg::partial_trace_b(e.base(), n, m).ok()?;
    let p = range_projection(&tb, None).ok()?;
    let q = range_projection(&ta, None).ok()?;
    let candidate = capacity::product_projection(&p, &q);
    if candidate.sub(e.base()).fro_norm() <= 1e-8 {
        Some((p, q))
    } else {
        None
    }
}

fn cmd_gamma(path: &str, flags: &Flags) -> Result<(Report, ExitCode), ValidationError> {
    let start = Instant::now();
    let file = load(path)?;
    let (n, m) = file.dims()?;
    let (left, right) = file.states()?;
    let mut report = Report::new("gamma", path, n, m);
    flags.fill_tolerances(&mut report);

    let uniform = left.is_uniform(1e-9) && right.is_uniform(1e-9);
    let result = if file.vector.is_some() && n == 2 && m == 2 && uniform {
        gamma::gamma_rank_one_2x2(&file.unit_vector()?)?
    } else {
        let t = file.operator()?;
        let e = ProjectionOperator::new(t.clone()).or_else(|_| range_projection(&t, None))?;
        if let Some((p, q)) = product_factors(&e, n, m) {
            gamma::gamma_product(&p, &q, &left, &right)?
        } else {
            gamma::gamma_search(&e, &left, &right, flags.restarts, flags.seed)?
        }
    };

    report.method = Some(
        match result.method {
            GammaMethod::ExactProduct => "exact-product",
            GammaMethod::Exact2x2RankOne => "exact-2x2-rank-one",
            GammaMethod::CommutingSweep => "commuting-sweep",
            GammaMethod::RandomSearch => "random-search",
        }
        .to_string(),
    );
    report.values.insert("gamma_lower".into(), result.lower);
    report.values.insert("gamma_upper".into(), result.upper);
    if let Some(exact) = result.exact {
        report.values.insert("gamma".into(), exact);
    }
    if flags.emit_witness {
        if let Some((p, q)) = &result.optimizer {
            report.certificate = Some(CertificateJson {
                a: matrix_json(p.matrix()),
                b: matrix_json(q.matrix()),
            });
        }
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((report, ExitCode::SUCCESS))
}

fn cmd_strassen(path: &str, flags: &Flags) -> Result<(Report, ExitCode), ValidationError> {
    let start = Instant::now();
    let file = load(path)?;
    let (n, m) = file.dims()?;
    let (left, right) = file.states()?;
    let x = file.subspace()?;
    let verdict = capacity::strassen_decide(&x, &left, &right, &flags.solver_options())?;

    let mut report = Report::new("strassen", path, n, m);
    flags.fill_tolerances(&mut report);
    report.verdict = Some(
        if verdict.indeterminate {
            "indeterminate"
        } else if verdict.feasible {
            "feasible"
        } else {
            "infeasible"
        }
        .to_string(),
    );
    report.values.insert("alpha".into(), verdict.alpha_value);
    if let Some(r) = verdict.support_residual {
        report.values.insert("support_residual".into(), r);
    }
    if let Some(margin) = verdict.margin {
        report.values.insert("margin".into(), margin);
    }
    report.status = status_string(verdict.diagnostics.status).into();
    report.iterations = verdict.diagnostics.iterations;
    report.residuals.primal = verdict.diagnostics.primal_residual;
    report.residuals.dual = verdict.diagnostics.dual_residual;
    if flags.emit_witness {
        report.witness = verdict
            .witness
            .as_ref()
            .map(|w| matrix_json(w.density().matrix()));
        report.certificate = verdict
            .certificate
            .as_ref()
            .map(|(a1, a2)| CertificateJson {
                a: matrix_json(a1.matrix()),
                b: matrix_json(a2.matrix()),
            });
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let code = converged_or_exit3(&report);
    Ok((report, code))
}

fn cmd_classical(path: &str, flags: &Flags) -> Result<(Report, ExitCode), ValidationError> {
    let start = Instant::now();
    let file = load(path)?;
    let inst = file.classical_instance()?;
    let (n, m) = (inst.n(), inst.m());

    let (alpha, plan) = classical::ot_alpha(&inst)?;
    let (beta, _, _) = classical::ot_beta(&inst)?;
    let mut report = Report::new("classical", path, n, m);
    flags.fill_tolerances(&mut report);
    report.values.insert("alpha".into(), alpha);
    report.values.insert("beta".into(), beta);
    // vertex covers are defined for 0/1 costs only
    if let Ok((gamma_v, a, b)) = classical::ot_gamma(&inst) {
        report.values.insert("gamma".into(), gamma_v);
        report.cover = Some(CoverJson { left: a, right: b });
    }
    report.plan = Some(
        (0..n)
            .map(|i| (0..m).map(|j| plan.entry(i, j)).collect())
            .collect(),
    );
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((report, ExitCode::SUCCESS))
}

fn cmd_schmidt(path: &str, flags: &Flags) -> Result<(Report, ExitCode), ValidationError> {
    let start = Instant::now();
    let file = load(path)?;
    let (n, m) = file.dims()?;
    let xi = file.unit_vector()?;
    let dec = entangle::schmidt(&xi, n, m)?;

    let mut report = Report::new("schmidt", path, n, m);
    flags.fill_tolerances(&mut report);
    report.schmidt_coefficients = Some(dec.coefficients().to_vec());
    report
        .values
        .insert("top_coefficient".into(), dec.coefficients()[0]);
    report
        .values
        .insert("schmidt_rank".into(), dec.rank(1e-8) as f64);
    if flags.emit_witness {
        report.certificate = Some(CertificateJson {
            a: matrix_json(dec.left_frame()),
            b: matrix_json(dec.right_frame()),
        });
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((report, ExitCode::SUCCESS))
}

fn cmd_examples(flags: &Flags) -> ExitCode {
    let cases = examples::run(flags.seed, &flags.solver_options());
    let mut failures = 0usize;
    for case in &cases {
        if case.passed() {
            println!(
                "ok   {:<55} observed {:+.9e}  expected {:+.9e}",
                case.name, case.observed, case.expected
            );
        } else {
            failures += 1;
            println!(
                "FAIL {:<55} observed {:+.9e}  expected {:+.9e}  (tol {:.1e}, delta {:.3e})",
                case.name,
                case.observed,
                case.expected,
                case.tol,
                (case.observed - case.expected).abs()
            );
        }
    }
    println!(
        "{} of {} reference cases passed (seed {})",
        cases.len() - failures,
        cases.len(),
        flags.seed
    );
    if failures > 0 {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    }
}

fn run() -> Result<ExitCode, ValidationError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return Ok(ExitCode::from(2));
    };
    match command.as_str() {
        "paper-examples" => {
            let flags = parse_flags(&args[1..])?;
            Ok(cmd_examples(&flags))
        }
        "alpha" | "beta" | "gap" | "gamma" | "strassen" | "classical" | "schmidt" => {
            let Some(path) = args.get(1) else {
                return Err(ValidationError(format!("{command} needs a problem file")));
            };
            let flags = parse_flags(&args[2..])?;
            let (report, code) = match command.as_str() {
                "alpha" | "beta" | "gap" => cmd_capacity(command, path, &flags)?,
                "gamma" => cmd_gamma(path, &flags)?,
                "strassen" => cmd_strassen(path, &flags)?,
                "classical" => cmd_classical(path, &flags)?,
                "schmidt" => cmd_schmidt(path, &flags)?,
                _ => unreachable!(),
            };
            emit(&report, &flags)?;
            Ok(code)
        }
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => Err(ValidationError(format!("unknown command {other}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
