use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const DESK: &str = r#"
[grating]
radius = 0.01
spacing = 0.04
eps_r = 2.0
mu_r = 1.0
k0 = 50.0

[incidence]
e0v = 1.0
theta_deg = 60.0
phi_deg = PHI

[truncation]
n = 8
"#;

fn desk(phi: f64) -> String {
    DESK.replace("PHI", &format!("{phi:?}"))
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("run.toml"), config).unwrap();
        Self { dir }
    }

    fn config(&self) -> PathBuf {
        self.dir.path().join("run.toml")
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn cmd(&self, args: &[&str]) -> Command {
        let mut c = Command::new(env!("CARGO_BIN_EXE_cylgrating"));
        c.args(args)
            .arg("--config")
            .arg(self.config())
            .arg("--out")
            .arg(self.out())
            .env_remove("GRATING_THREADS");
        c
    }

    fn run(&self, args: &[&str]) -> Output {
        self.cmd(args).output().unwrap()
    }

    fn csv(&self, name: &str) -> Vec<Vec<String>> {
        read_csv(&self.out().join(name))
    }
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# cylgrating "), "missing provenance header");
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn all_routes_agree_and_are_summarised() {
    let run = Run::new(&desk(0.0));
    let o = run.run(&["solve", "--route", "all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let devs: Vec<f64> = out
        .lines()
        .filter_map(|l| l.split("max relative deviation from direct ").nth(1))
        .map(f)
        .collect();
    assert_eq!(devs.len(), 2, "{out}");
    assert!(devs.iter().all(|&d| d <= 1e-10), "{out}");
    assert!(out.contains("residual") && out.contains("anomaly distance"));
    let rows = run.csv("coefficients.csv");
    assert_eq!(rows.len(), 17);
    assert_eq!(rows[0][0], "-8");
    assert!(run.out().join("coefficients_schur.csv").exists());
    assert!(fs::read_to_string(run.out().join("summary.txt")).unwrap().contains("N = 8"));
}

#[test]
fn transparent_grating_writes_zero_coefficients() {
    let run = Run::new(&desk(20.0).replace("eps_r = 2.0", "eps_r = 1.0"));
    let o = run.run(&["solve"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for row in run.csv("coefficients.csv") {
        assert!(row[1..].iter().all(|v| f(v) == 0.0), "{row:?}");
    }
}

#[test]
fn anomalous_spacing_exits_three() {
    // normal incidence, kr d = 2 pi
    let cfg = desk(0.0)
        .replace("theta_deg = 60.0", "theta_deg = 90.0")
        .replace("spacing = 0.04", &format!("spacing = {:?}", 2.0 * std::f64::consts::PI / 50.0));
    let run = Run::new(&cfg);
    let o = run.run(&["solve"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("anomaly"), "{}", stderr(&o));
    assert_eq!(code(&run.run(&["schlomilch"])), 3);
}

#[test]
fn imaginary_interior_wavenumber_exits_four() {
    let cfg = desk(0.0)
        .replace("eps_r = 2.0", "eps_r = 0.2")
        .replace("theta_deg = 60.0", "theta_deg = 10.0");
    let o = Run::new(&cfg).run(&["solve"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn invalid_configs_exit_two_with_field_names() {
    let o = Run::new(&desk(0.0).replace("radius = 0.01", "radius = -0.01")).run(&["solve"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("grating.radius"), "{}", stderr(&o));

    let o = Run::new(&desk(0.0).replace("spacing = 0.04", "spacing = 0.015")).run(&["solve"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("grating.spacing"));

    let o = Run::new(&desk(0.0).replace("k0 = 50.0", "k0 = 50.0\ncolour = 3")).run(&["solve"]);
    assert_eq!(code(&o), 2);

    let o = Run::new(&desk(0.0).replace("n = 8", "n = 0")).run(&["solve"]);
    assert_eq!(code(&o), 2);

    let o = Run::new(&format!("{}\n[schlomilch]\ntol = 2.0\n", desk(0.0))).run(&["solve"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("schlomilch.tol"));
}

#[test]
fn missing_config_file_exits_one() {
    let run = Run::new("");
    fs::remove_file(run.config()).unwrap();
    assert_eq!(code(&run.run(&["solve"])), 1);
}

#[test]
fn automatic_truncation() {
    let run = Run::new(&desk(15.0).replace("n = 8", "n = \"auto\""));
    let o = run.run(&["solve"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("automatic truncation"));
    let o = Run::new(&desk(15.0)).run(&["solve", "--N", "auto"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn matrix_dump_has_every_entry() {
    let run = Run::new(&desk(10.0).replace("n = 8", "n = 3"));
    assert_eq!(code(&run.run(&["solve", "--dump-matrix"])), 0);
    let rows = run.csv("matrix.csv");
    assert_eq!(rows.len(), 12 * 12);
    assert_eq!(rows[0][..2], ["0".to_string(), "0".to_string()]);
    // the diagonal starts from the identity
    let diag_re = f(&rows[0][2]);
    assert!(diag_re.is_finite());
}

#[test]
fn convergence_table_and_determinism() {
    let run = Run::new(&desk(0.0));
    let o = run.run(&["converge", "--n-list", "6,8,10,12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let diffs: Vec<f64> = run.csv("differences.csv").iter().map(|r| f(&r[2])).collect();
    assert_eq!(diffs.len(), 3);
    assert!(diffs.windows(2).all(|w| w[1] <= w[0]), "{diffs:?}");
    let first = fs::read(run.out().join("convergence.csv")).unwrap();
    assert_eq!(code(&run.run(&["converge", "--n-list", "6,8,10,12"])), 0);
    assert_eq!(first, fs::read(run.out().join("convergence.csv")).unwrap());

    assert_eq!(code(&run.run(&["converge", "--n-list", "5"])), 0);
    assert!(run.csv("differences.csv").is_empty());
    assert_eq!(run.csv("convergence.csv").len(), 11);

    assert_eq!(code(&run.run(&["converge"])), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = Run::new(&desk(25.0));
    assert_eq!(code(&run.cmd(&["schlomilch", "--n-max", "20"]).env("GRATING_THREADS", "1").output().unwrap()), 0);
    let one = fs::read(run.out().join("lattice.csv")).unwrap();
    assert_eq!(code(&run.cmd(&["schlomilch", "--n-max", "20"]).env("GRATING_THREADS", "4").output().unwrap()), 0);
    assert_eq!(one, fs::read(run.out().join("lattice.csv")).unwrap());
    let bad = run.cmd(&["solve"]).env("GRATING_THREADS", "many").output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn lattice_dump_properties() {
    let run = Run::new(&desk(0.0));
    assert_eq!(code(&run.run(&["schlomilch", "--n-max", "9"])), 0);
    let rows = run.csv("lattice.csv");
    assert_eq!(rows.len(), 19);
    for r in &rows {
        let n: i32 = r[0].parse().unwrap();
        if n % 2 != 0 {
            assert_eq!((f(&r[1]), f(&r[2])), (0.0, 0.0));
        }
        assert!(f(&r[3]) <= 1e-8);
    }

    let base = Run::new(&desk(20.0));
    let flip = Run::new(&desk(-20.0));
    assert_eq!(code(&base.run(&["schlomilch", "--n-max", "6"])), 0);
    assert_eq!(code(&flip.run(&["schlomilch", "--n-max", "6"])), 0);
    let (b, fl) = (base.csv("lattice.csv"), flip.csv("lattice.csv"));
    for r in &b {
        let n: i32 = r[0].parse().unwrap();
        let m = fl.iter().find(|q| q[0] == (-n).to_string()).unwrap();
        assert_eq!(r[1..3], m[1..3], "n = {n}");
    }
}

#[test]
fn field_map_outputs() {
    let run = Run::new(&desk(30.0));
    let o = run.run(&["fieldmap", "--region", "0.02,0.02,0.005,0.005", "--resolution", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = run.csv("fields.csv");
    assert_eq!(rows.len(), 1);
    assert_eq!((f(&rows[0][0]), f(&rows[0][1])), (0.02, 0.005));

    let o = run.run(&["fieldmap", "--region", "-0.03,0.03,-0.03,0.03", "--resolution", "13,9"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("inside cylinders"));
    let text = fs::read_to_string(run.out().join("fields.csv")).unwrap();
    assert!(text.contains("# warning:"));

    // nothing evaluable is a warning, not a failure
    let o = run.run(&["fieldmap", "--region", "0,0.001,0,0.001", "--resolution", "3"]);
    assert_eq!(code(&o), 0);
    assert!(run.csv("fields.csv").is_empty());

    assert_eq!(code(&run.run(&["fieldmap"])), 2);
    assert_eq!(code(&run.run(&["fieldmap", "--region", "0,1,0,1", "--resolution", "0"])), 2);
}

#[test]
fn isolated_check_passes() {
    let run = Run::new(&desk(30.0));
    let o = run.run(&["isolated-check", "--route", "all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("passed"));
    assert_eq!(run.csv("isolated.csv").len(), 3 * 17);
}

#[test]
fn shipped_example_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cylgrating"))
        .args(["isolated-check", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}
