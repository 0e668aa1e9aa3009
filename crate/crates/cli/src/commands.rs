use std::path::{Path, PathBuf};

use gradspace::SolverConfig;

use crate::certify;
use crate::error::{CliError, Result};
use crate::problem::{Family, ProblemFile, Task};
use crate::report::{self, Report, Status};
use crate::run::{self, Solution};

/// Options shared by the solving subcommands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parsed, validated and assembled; nothing has been written yet.
pub struct Prepared {
    pub doc: ProblemFile,
    pub cfg: SolverConfig,
    pub task: Task,
}

pub fn prepare(doc: ProblemFile, family: Family, opts: &RunOptions) -> Result<Prepared> {
    if !family.admits(doc.problem) {
        return Err(CliError::schema(format!(
            "problem `{}` cannot run under this subcommand",
            doc.problem.name()
        )));
    }
    let cfg = doc.solver_config(opts.tol, opts.max_iter, opts.seed)?;
    cfg.validate()?;
    let task = doc.task()?;
    Ok(Prepared { doc, cfg, task })
}

fn blank_report(p: &Prepared, status: Status) -> Report {
    Report {
        status,
        problem: p.doc.problem,
        instance: p.doc.instance,
        version: VERSION.to_string(),
        message: None,
        objective: None,
        energy: None,
        iterations: None,
        converged: None,
        feasibility_residual: None,
        tol_objective: p.cfg.tol_objective,
        tol_feasibility: p.cfg.tol_feasibility,
        seed: p.cfg.seed,
        values: Default::default(),
        certificate: None,
        fields: Default::default(),
    }
}

/// Solves and certifies in memory.
pub fn solve_prepared(p: &Prepared) -> Result<(Report, Solution)> {
    let sol = run::solve(&p.task, p.doc.instance, &p.cfg)?;
    let checked = certify::check(&p.task, &sol.field_values(), &p.cfg)?;
    let mut report = blank_report(p, Status::Ok);
    if !checked.certificate.passed {
        report.status = Status::Uncertified;
        report.message = Some("the solution failed its certificate".into());
    }
    report.objective = Some(sol.objective);
    report.energy = sol.energy;
    report.iterations = sol.iterations;
    report.converged = sol.converged;
    report.feasibility_residual = sol.feasibility_residual;
    report.values = sol.values.clone();
    report.certificate = Some(checked.certificate);
    report.fields = sol.fields.keys().map(|k| (k.clone(), format!("{k}.csv"))).collect();
    Ok((report, sol))
}

/// `solve`, `rayleigh`, `lattice` and `gradient`: returns the exit code.
pub fn run_problem(path: &Path, family: Family, opts: &RunOptions) -> Result<u8> {
    let p = prepare(ProblemFile::load(path)?, family, opts)?;
    match solve_prepared(&p) {
        Ok((report, sol)) => {
            report::write_all(&opts.out, &report, &sol.fields)?;
            let code = if report.status == Status::Ok { 0 } else { 3 };
            eprintln!(
                "{}: {} (objective {:.10e})",
                p.doc.problem.name(),
                status_name(report.status),
                sol.objective
            );
            Ok(code)
        }
        Err(CliError::Solver(e)) => {
            let err = CliError::Solver(e.clone());
            let status = match e {
                gradspace::Error::Infeasible(_) => Status::Infeasible,
                gradspace::Error::RegularityViolation { .. } => Status::RegularityViolation,
                _ if err.exit_code() == 3 => Status::NotConverged,
                _ => return Err(err),
            };
            let mut report = blank_report(&p, status);
            report.message = Some(e.to_string());
            report::write_all(&opts.out, &report, &Default::default())?;
            Err(err)
        }
        Err(e) => Err(e),
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Infeasible => "infeasible",
        Status::NotConverged => "not converged",
        Status::RegularityViolation => "regularity violated",
        Status::Uncertified => "uncertified",
    }
}

/// Re-checks the report in `opts.out` against the problem file.
pub fn certify(path: &Path, opts: &RunOptions) -> Result<()> {
    let doc = ProblemFile::load(path)?;
    let report = Report::load(&opts.out)?;
    if report.version != VERSION {
        return Err(CliError::Rejected(format!("report written by version {}, this is {VERSION}", report.version)));
    }
    if report.problem != doc.problem || report.instance != doc.instance {
        return Err(CliError::Rejected("the report belongs to a different problem".into()));
    }
    if report.status != Status::Ok {
        return Err(CliError::Rejected(format!("report status is {}", status_name(report.status))));
    }
    let fields = report::load_fields(&opts.out, &report)?;
    let cfg = SolverConfig {
        tol_objective: report.tol_objective,
        tol_feasibility: report.tol_feasibility,
        seed: report.seed,
        ..doc.solver_config(None, None, None)?
    };
    let task = doc.task()?;
    let checked = certify::check(&task, &fields, &cfg)?;
    let c = &checked.certificate;
    if !c.passed {
        return Err(CliError::Rejected(format!(
            "feasibility {:.3e} (tolerance {:.1e}), optimality {:.3e} (tolerance {:.1e})",
            c.feasibility_residual, c.feasibility_tolerance, c.optimality_residual, c.optimality_tolerance
        )));
    }
    let stored = report
        .objective
        .ok_or_else(|| CliError::Rejected("the report has no objective".into()))?;
    if (checked.objective - stored).abs() > 1e-6 * stored.abs().max(1.0) {
        return Err(CliError::Rejected(format!(
            "objective {stored} does not match the fields ({})",
            checked.objective
        )));
    }
    eprintln!(
        "certified: feasibility {:.3e}, optimality {:.3e} ({})",
        c.feasibility_residual, c.optimality_residual, c.method
    );
    Ok(())
}
