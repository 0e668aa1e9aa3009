//! The stored example problems with the values they must reproduce.

use gradspace::grid::GridDomain;

use crate::commands::{prepare, solve_prepared, RunOptions};
use crate::error::Result;
use crate::problem::{Family, ProblemFile};
use crate::report::Status;
use crate::run::Solution;

pub struct Example {
    pub name: &'static str,
    pub source: &'static str,
    check: fn(&ProblemFile, &Solution) -> Result<String, String>,
}

fn field<'a>(sol: &'a Solution, name: &str) -> &'a [f64] {
    &sol.fields[name].values
}

fn within(what: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    let msg = format!("{what} {got:.8} (want {want} ± {tol:e})");
    if (got - want).abs() <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn annulus(doc: &ProblemFile, sol: &Solution) -> Result<String, String> {
    let h = doc.grid.as_ref().and_then(|g| g.spacing).ok_or("no spacing")?;
    let dom = GridDomain::annulus(h).map_err(|e| e.to_string())?;
    let u = field(sol, "minimizer");
    let mut err = 0.0_f64;
    let mut at_corner = f64::NAN;
    for i in (0..dom.node_count()).filter(|i| dom.interior_mask()[*i]) {
        let x = dom.coordinates(i);
        let r = x[0].hypot(x[1]);
        err = err.max((u[i] - (1.0 - r.log2())).abs());
        if (x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9 {
            at_corner = u[i];
        }
    }
    if err > 0.05 {
        return Err(format!("max error {err:.4} against 1 − log₂|x|"));
    }
    within("u(1, 1)", at_corner, 0.5, 0.05).map(|m| format!("max error {err:.4}, {m}"))
}

fn toy_complex(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    let u = field(sol, "minimizer");
    if (u[0] - 1.0).abs() > 1e-6 || u[1].abs() > 1.0 + 1e-6 {
        return Err(format!("minimizer ({}, {}) is not of the form 1 + ai with |a| ≤ 1", u[0], u[1]));
    }
    within("objective", sol.objective, 1.0, 1e-8)
}

fn psd_max(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    let v = field(sol, "maximum");
    let dist = [v[0] - 1.0, v[1], v[2], v[3] - 1.0].iter().map(|x| x * x).sum::<f64>().sqrt();
    within("‖max − I‖_F", dist, 0.0, 1e-6)
}

fn psd_min(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    let v = field(sol, "minimum");
    within("‖min‖_F", v.iter().map(|x| x * x).sum::<f64>().sqrt(), 0.0, 1e-6)
}

fn rayleigh(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    let pi = std::f64::consts::PI;
    within("quotient", sol.objective, pi, 0.01 * pi)
}

fn hajlasz(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    // two points at distance 1 with a unit jump: h = (½, ½)
    let h = field(sol, "minimal_gradient");
    within("h₀", h[0], 0.5, 1e-6)?;
    within("‖h‖", sol.objective, 0.5f64.sqrt(), 1e-6)
}

fn fredholm(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    within("kernel dimension", sol.values["kernel_dimension"], 1.0, 0.0)?;
    within("constant", sol.objective, 1.0, 1e-12)
}

fn tent_obstacle(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    // contact on the top of the tent only: u is the taut string over (½, ½)
    let u = field(sol, "minimizer");
    let n = u.len();
    let mut err = 0.0_f64;
    for (i, v) in u.iter().enumerate() {
        let x = i as f64 / (n - 1) as f64;
        err = err.max((v - x.min(1.0 - x)).abs());
    }
    within("max deviation from the tent", err, 0.0, 1e-6)
}

fn biharmonic(_: &ProblemFile, sol: &Solution) -> Result<String, String> {
    within("objective", sol.objective, 0.0, 1e-9)
}

pub const EXAMPLES: &[Example] = &[
    Example {
        name: "annulus",
        source: include_str!("../problems/annulus.problem"),
        check: annulus,
    },
    Example {
        name: "toy-complex",
        source: include_str!("../problems/toy-complex.problem"),
        check: toy_complex,
    },
    Example {
        name: "psd2x2",
        source: include_str!("../problems/psd2x2.problem"),
        check: psd_max,
    },
    Example {
        name: "psd2x2-min",
        source: include_str!("../problems/psd2x2-min.problem"),
        check: psd_min,
    },
    Example {
        name: "rayleigh-interval",
        source: include_str!("../problems/rayleigh-interval.problem"),
        check: rayleigh,
    },
    Example {
        name: "hajlasz-two-points",
        source: include_str!("../problems/hajlasz-two-points.problem"),
        check: hajlasz,
    },
    Example {
        name: "fredholm-diagonal",
        source: include_str!("../problems/fredholm-diagonal.problem"),
        check: fredholm,
    },
    Example {
        name: "tent-obstacle",
        source: include_str!("../problems/tent-obstacle.problem"),
        check: tent_obstacle,
    },
    Example {
        name: "biharmonic-affine",
        source: include_str!("../problems/biharmonic-affine.problem"),
        check: biharmonic,
    },
];

/// Runs every example; prints one line each and returns whether all passed.
pub fn selftest() -> bool {
    let mut ok = true;
    for ex in EXAMPLES {
        let outcome = ProblemFile::parse(ex.source)
            .and_then(|doc| prepare(doc, Family::Any, &RunOptions::default()))
            .map_err(|e| e.to_string())
            .and_then(|p| {
                let (report, sol) = solve_prepared(&p).map_err(|e| e.to_string())?;
                if report.status != Status::Ok {
                    return Err("certificate failed".to_string());
                }
                (ex.check)(&p.doc, &sol)
            });
        match outcome {
            Ok(msg) => println!("PASS {}: {msg}", ex.name),
            Err(msg) => {
                ok = false;
                println!("FAIL {}: {msg}", ex.name);
            }
        }
    }
    ok
}
