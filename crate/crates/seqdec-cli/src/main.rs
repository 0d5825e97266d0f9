//! Command line front end: solve registered or file-described problems,
//! print policy tables and trajectory containers, and run the oracle
//! verification suite.
//!
//! Exit codes: 0 success, 2 ill-posed problem, 3 domain error, 4 resource
//! cap exceeded, 1 internal or failed checks.

mod output;

use clap::{Parser, Subcommand, ValueEnum};
use output::CheckLine;
use seqdec::error::Error;
use seqdec::examples;
use seqdec::laws::{container_law_suite, measure_law_suite};
use seqdec::oracle::{check_bellman, check_opt_policy_seq};
use seqdec::problem::{resolve_state, validate, Measure, MeasureOverride, SdpProblem};
use seqdec::problemfile::parse_problem_file;
use seqdec::solver::{backwards_induction, SolveOptions};
use seqdec::trajectory::{render_trajectories, state_ctrl_trj, trajectory_value};
use std::path::Path;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "seqdec", version, about = "Finite-horizon sequential decision solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Expected,
    Worst,
    Best,
}

impl MeasureArg {
    fn to_measure(self) -> Measure {
        match self {
            MeasureArg::Expected => Measure::Expected,
            MeasureArg::Worst => Measure::Worst,
            MeasureArg::Best => Measure::Best,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve by backwards induction and print the policy tables
    Solve {
        /// Registry id (cyl-det, cyl-time, cyl-nondet, cyl-stoch,
        /// knapsack) or a path to a problem file
        problem: String,
        /// First decision step
        #[arg(long, default_value_t = 0)]
        t0: usize,
        /// Number of decision steps
        #[arg(long)]
        steps: usize,
        /// Override the problem's aggregation measure
        #[arg(long, value_enum)]
        measure: Option<MeasureArg>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print every trajectory the optimal policies can realize from a start
    Trajectories {
        problem: String,
        /// Key of the start state in layer t0
        #[arg(long)]
        start: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        t0: usize,
        #[arg(long, value_enum)]
        measure: Option<MeasureArg>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run validation, law suites and exhaustive optimality checks
    Verify {
        problem: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        t0: usize,
        /// Cap on evaluated (candidate, start) pairs per check
        #[arg(long, default_value_t = seqdec::oracle::DEFAULT_CAP)]
        cap: u64,
        #[arg(long, value_enum)]
        measure: Option<MeasureArg>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check well-posedness and print the violation report
    Validate {
        problem: String,
        /// Last decision step to check (defaults to the problem's horizon
        /// hint, else 8)
        #[arg(long)]
        max_t: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::IllPosed(_)
        | Error::Parse { .. }
        | Error::KindMismatch { .. }
        | Error::NotNormalized { .. }
        | Error::NegativeProbability { .. }
        | Error::InvalidSlip { .. }
        | Error::UncheckedMeasure { .. } => 2,
        Error::DomainMiss { .. }
        | Error::NotViable { .. }
        | Error::NotDeterministic
        | Error::InvalidState { .. }
        | Error::InvalidCtrl { .. }
        | Error::InfeasibleCtrl { .. }
        | Error::EmptyChoice
        | Error::EmptyContainer
        | Error::TableMiss { .. } => 3,
        Error::TooLarge { .. } => 4,
    }
}

fn load_problem(spec: &str, measure: Option<MeasureArg>) -> Result<Box<dyn SdpProblem>, String> {
    let base: Box<dyn SdpProblem> = if let Some(p) = examples::by_id(spec) {
        p
    } else if Path::new(spec).exists() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| format!("cannot read `{spec}`: {e}"))?;
        match parse_problem_file(&text) {
            Ok(p) => Box::new(p),
            Err(e) => return Err(format!("cannot parse `{spec}`: {e}")),
        }
    } else {
        return Err(format!(
            "unknown problem `{spec}` (registry ids: {})",
            examples::registry_ids().join(", ")
        ));
    };
    Ok(match measure {
        Some(m) => Box::new(MeasureOverride::new(base, m.to_measure())),
        None => base,
    })
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if matches!(e, Error::TooLarge { .. }) {
        eprintln!("hint: lower --steps or raise --cap");
    }
    ExitCode::from(exit_code_for(e))
}

fn cmd_solve(
    problem: &str,
    t0: usize,
    steps: usize,
    measure: Option<MeasureArg>,
    format: Format,
) -> ExitCode {
    let p = match load_problem(problem, measure) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let sol = match backwards_induction(&p, t0, steps, &SolveOptions::default()) {
        Ok(sol) => sol,
        Err(e) => return fail(&e),
    };
    if steps > 0 && sol.policies.policies()[0].table.is_empty() {
        eprintln!("error: no start state at t={t0} is both reachable and viable for {steps} steps");
        return ExitCode::from(3);
    }
    match format {
        Format::Text => print!("{}", sol.render_text()),
        Format::Json => println!(
            "{}",
            output::solution_json(problem, t0, steps, p.measure().name(), &sol)
        ),
    }
    ExitCode::SUCCESS
}

fn cmd_trajectories(
    problem: &str,
    start: &str,
    steps: usize,
    t0: usize,
    measure: Option<MeasureArg>,
    format: Format,
) -> ExitCode {
    let p = match load_problem(problem, measure) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let sol = match backwards_induction(&p, t0, steps, &SolveOptions::default()) {
        Ok(sol) => sol,
        Err(e) => return fail(&e),
    };
    let Some(x) = resolve_state(&p, t0, start) else {
        eprintln!("error: `{start}` is not a state of layer t={t0}");
        return ExitCode::from(3);
    };
    let trajectories = match state_ctrl_trj(&p, &sol.policies, &x) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let values = trajectories.fmap(|trj| trajectory_value(&p, trj));
    let aggregate = match p.meas(&values) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => {
            print!("{}", render_trajectories(&p, &trajectories));
            println!("meas : {}", output::num(aggregate));
        }
        Format::Json => println!(
            "{}",
            output::trajectories_json(
                &p,
                problem,
                start,
                steps,
                p.measure().name(),
                &trajectories,
                aggregate,
            )
        ),
    }
    ExitCode::SUCCESS
}

fn cmd_verify(
    problem: &str,
    steps: usize,
    t0: usize,
    cap: u64,
    measure: Option<MeasureArg>,
    format: Format,
) -> ExitCode {
    let p = match load_problem(problem, measure) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let mut checks: Vec<CheckLine> = Vec::new();

    let report = validate(&p, t0 + steps);
    let validate_ok = report.is_ok();
    checks.push(CheckLine {
        name: "validate".into(),
        pass: validate_ok,
        detail: if validate_ok {
            String::new()
        } else {
            format!(
                "({} violations, first: {})",
                report.violations.len(),
                report.violations[0]
            )
        },
    });
    if !validate_ok {
        emit_checks(&checks, format);
        return ExitCode::from(2);
    }

    const LAW_CASES: u32 = 1000;
    const LAW_SEED: u64 = 0x5EED;
    for law in container_law_suite(p.kind(), LAW_CASES, LAW_SEED) {
        checks.push(CheckLine {
            name: law.name.clone(),
            pass: law.passed(),
            detail: if law.passed() {
                format!("({} cases)", law.cases)
            } else {
                law.first_failure.clone().unwrap_or_default()
            },
        });
    }
    for law in measure_law_suite(&p.measure(), p.kind(), LAW_CASES, LAW_SEED) {
        checks.push(CheckLine {
            name: law.name.clone(),
            pass: law.passed(),
            detail: if law.passed() {
                format!("({} cases)", law.cases)
            } else {
                law.first_failure.clone().unwrap_or_default()
            },
        });
    }

    let sol = match backwards_induction(&p, t0, steps, &SolveOptions::default()) {
        Ok(sol) => sol,
        Err(e) => return fail(&e),
    };
    match check_opt_policy_seq(&p, &sol.policies, cap) {
        Ok(report) => checks.push(CheckLine {
            name: "opt_policy_seq".into(),
            pass: report.pass,
            detail: if report.pass {
                format!("({} pairs)", report.pairs_checked)
            } else {
                report.to_string()
            },
        }),
        Err(e) => return fail(&e),
    }
    for n in 0..steps {
        let tail = match backwards_induction(&p, t0 + 1, n, &SolveOptions::default()) {
            Ok(sol) => sol,
            Err(e) => return fail(&e),
        };
        match check_bellman(&p, &tail.policies, cap) {
            Ok(report) => checks.push(CheckLine {
                name: format!("bellman n={n}"),
                pass: report.pass,
                detail: if report.pass {
                    String::new()
                } else {
                    report.to_string()
                },
            }),
            Err(e) => return fail(&e),
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    emit_checks(&checks, format);
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn emit_checks(checks: &[CheckLine], format: Format) {
    match format {
        Format::Text => print!("{}", output::checks_text(checks)),
        Format::Json => println!("{}", output::checks_json(checks)),
    }
}

fn cmd_validate(problem: &str, max_t: Option<usize>, format: Format) -> ExitCode {
    let p = match load_problem(problem, None) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let max_t = max_t.or_else(|| p.horizon_hint()).unwrap_or(8);
    let report = validate(&p, max_t);
    match format {
        Format::Text => {
            if report.is_ok() {
                println!("OK");
            } else {
                print!("{report}");
            }
        }
        Format::Json => println!("{}", output::validation_json(&report)),
    }
    if report.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            problem,
            t0,
            steps,
            measure,
            format,
        } => cmd_solve(&problem, t0, steps, measure, format),
        Command::Trajectories {
            problem,
            start,
            steps,
            t0,
            measure,
            format,
        } => cmd_trajectories(&problem, &start, steps, t0, measure, format),
        Command::Verify {
            problem,
            steps,
            t0,
            cap,
            measure,
            format,
        } => cmd_verify(&problem, steps, t0, cap, measure, format),
        Command::Validate {
            problem,
            max_t,
            format,
        } => cmd_validate(&problem, max_t, format),
    }
}
