use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gradspace::grid::GridDomain;
use gradspace_cli::report::{parse_csv, Report, Status};
use gradspace_cli::ProblemFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradspace"))
}

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv(dir: &Path, name: &str) -> Vec<f64> {
    parse_csv(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn write_problem(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("p.problem");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn annulus_matches_the_logarithm_and_certifies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("annulus");
    let file = problem("annulus.problem");
    let o = run(&["solve", file.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(out.join("minimizer.csv")).unwrap();
    assert!(text.starts_with("node,value\n"));
    let second = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = second.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{second}");

    let u = csv(&out, "minimizer.csv");
    let dom = GridDomain::annulus(1.0 / 32.0).unwrap();
    assert_eq!(u.len(), dom.node_count());
    for i in (0..dom.node_count()).filter(|i| dom.interior_mask()[*i]) {
        let x = dom.coordinates(i);
        assert!((u[i] - (1.0 - x[0].hypot(x[1]).log2())).abs() <= 0.05);
    }
    let report = Report::load(&out).unwrap();
    assert_eq!(report.status, Status::Ok);
    let cert = report.certificate.unwrap();
    assert!(cert.passed && cert.optimality_residual <= cert.optimality_tolerance);
    assert!(report.feasibility_residual.unwrap() <= cert.feasibility_tolerance);

    let o = run(&["certify", file.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn psd_lattice_maximum_is_the_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["lattice", problem("psd2x2.problem").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0);
    let v = csv(tmp.path(), "maximum.csv");
    let want = [1.0, 0.0, 0.0, 1.0];
    assert!(v.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-6), "{v:?}");
}

#[test]
fn malformed_files_leave_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for text in [
        "problem = \"dirichlet\"\ninstance = \"grid\"\n",
        "problem = \"nonsense\"\ninstance = \"grid\"\n",
        "this is not toml",
        "problem = \"lattice-max\"\ninstance = \"matrix\"\n[matrix]\nn = 2\n[data]\npsi1 = [1.0, 0.0]\npsi2 = [0.0, 0.0, 0.0, 1.0]\n",
        "problem = \"dirichlet\"\ninstance = \"grid\"\n[grid]\ndims = [5]\nboundary = [0.0, 1.0, 2.0, 3.0, inf]\n",
    ] {
        let file = write_problem(tmp.path(), text);
        let o = run(&["solve", file.to_str().unwrap()], &out);
        assert_eq!(code(&o), 4, "{text}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists());
    }
    let o = run(&["rayleigh", problem("psd2x2.problem").to_str().unwrap()], &out);
    assert_eq!(code(&o), 4);
    assert!(!out.exists());
}

#[test]
fn certify_rejects_a_corrupted_minimizer() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["tent-obstacle.problem", "toy-complex.problem"] {
        let out = tmp.path().join(name);
        let file = problem(name);
        assert_eq!(code(&run(&["solve", file.to_str().unwrap()], &out)), 0);
        assert_eq!(code(&run(&["certify", file.to_str().unwrap()], &out)), 0);

        let path = out.join("minimizer.csv");
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let row = if name.starts_with("tent") { 11 } else { 1 };
        let (idx, val) = lines[row].split_once(',').unwrap();
        let bumped = val.parse::<f64>().unwrap() + if name.starts_with("tent") { 0.05 } else { 0.5 };
        lines[row] = format!("{idx},{bumped:.16e}");
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        let o = run(&["certify", file.to_str().unwrap()], &out);
        assert_eq!(code(&o), 5, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn trivial_zero_problem_certifies() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_problem(tmp.path(), "problem = \"dirichlet\"\ninstance = \"grid\"\n[grid]\ndims = [6, 5]\nspacing = 0.25\n");
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&["solve", file.to_str().unwrap()], &out)), 0);
    assert!(csv(&out, "minimizer.csv").iter().all(|v| *v == 0.0));
    assert_eq!(code(&run(&["certify", file.to_str().unwrap()], &out)), 0);
}

#[test]
fn certify_needs_matching_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let file = problem("toy-complex.problem");
    assert_eq!(code(&run(&["certify", file.to_str().unwrap()], &out)), 1);
    assert_eq!(code(&run(&["solve", file.to_str().unwrap()], &out)), 0);
    let other = problem("psd2x2.problem");
    assert_eq!(code(&run(&["certify", other.to_str().unwrap()], &out)), 5);
    std::fs::remove_file(out.join("minimal_gradient.csv")).unwrap();
    assert_eq!(code(&run(&["certify", file.to_str().unwrap()], &out)), 1);
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["tent-obstacle.problem", "hajlasz-two-points.problem", "rayleigh-interval.problem"] {
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        let file = problem(name);
        for dir in [&a, &b] {
            assert_eq!(code(&run(&["solve", file.to_str().unwrap(), "--seed", "5"], dir)), 0);
        }
        let mut files: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        assert!(files.len() >= 2);
        for f in files {
            assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap(), "{f:?}");
        }
    }
}

#[test]
fn solver_failures_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    // an obstacle above the prescribed end values
    let file = write_problem(
        tmp.path(),
        "problem = \"obstacle\"\ninstance = \"grid\"\n[grid]\ndims = [5]\n[data]\nobstacle = [1.0, 1.0, 1.0, 1.0, 1.0]\n",
    );
    let o = run(&["solve", file.to_str().unwrap()], &out);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(Report::load(&out).unwrap().status, Status::Infeasible);

    let mut values = vec![0.0; 65];
    values[64] = 1.0;
    let file = write_problem(
        tmp.path(),
        &format!("problem = \"dirichlet\"\ninstance = \"grid\"\n[grid]\ndims = [65]\nboundary = {values:?}\n[norms]\np_v = 4.0\np_w = 4.0\n"),
    );
    let o = run(&["solve", file.to_str().unwrap(), "--max-iter", "3", "--tol", "1e-12"], &out);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(Report::load(&out).unwrap().status, Status::NotConverged);
    assert!(!out.join("minimizer.csv").exists());

    // no constraints on a path graph: constants have zero gradient
    let file = write_problem(
        tmp.path(),
        "problem = \"rayleigh\"\ninstance = \"graph\"\n[graph]\nvertices = 3\nedges = [[0, 1, 1.0], [1, 2, 1.0]]\n",
    );
    let o = run(&["rayleigh", file.to_str().unwrap()], &out);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(Report::load(&out).unwrap().status, Status::RegularityViolation);

    assert_eq!(code(&run(&["solve", "/nonexistent/problem"], &out)), 1);
    assert_eq!(code(&bin().args(["solve"]).output().unwrap()), 4);
    assert_eq!(code(&bin().args(["frobnicate"]).output().unwrap()), 4);
    assert_eq!(code(&bin().args(["--help"]).output().unwrap()), 0);
    assert_eq!(code(&bin().args(["solve", "x", "--format", "json"]).output().unwrap()), 4);
}

#[test]
fn every_stored_problem_round_trips() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let doc = ProblemFile::parse(&text).unwrap();
        let again = ProblemFile::parse(&doc.to_toml()).unwrap();
        assert_eq!(doc, again);
        assert_eq!(again.to_toml(), doc.to_toml());
        count += 1;
    }
    assert!(count >= 9);
}

#[test]
fn selftest_passes() {
    let o = bin().arg("selftest").output().unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
}
