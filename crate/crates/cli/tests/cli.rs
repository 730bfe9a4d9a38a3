use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn satdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satdyn"))
        .args(args)
        .env_remove("SATDYN_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&satdyn(&["figure", "--figure", "9"])), 2);
    assert_eq!(code(&satdyn(&["figure"])), 2);
    assert_eq!(code(&satdyn(&["table"])), 2);
    assert_eq!(code(&satdyn(&["price"])), 2);
    assert_eq!(
        code(&satdyn(&["price", "--upper", "10", "--confidence", "0.99"])),
        2
    );
    assert_eq!(code(&satdyn(&["simulate", "--model", "quadratic"])), 2);
    assert_eq!(code(&satdyn(&["frobnicate"])), 2);
}

#[test]
fn infinite_upper_bound_is_a_domain_error() {
    let out = satdyn(&["price", "--upper", "inf"]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("diverges"), "{err}");
    assert!(err.contains("confidence"), "{err}");
}

#[test]
fn domain_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = satdyn(&["simulate", "--s0", "-1", "--out", path(tmp.path())]);
    assert_eq!(code(&out), 3);
    let out = satdyn(&[
        "simulate",
        "--model",
        "saturated-approx",
        "--beta",
        "0.05",
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(
        code(&out),
        3,
        "beta*s0 = 2.5 is outside the approximation's range"
    );
}

#[test]
fn missing_files_exit_1() {
    assert_eq!(code(&satdyn(&["replay", "/nonexistent/manifest.txt"])), 1);
    assert_eq!(
        code(&satdyn(&["simulate", "--config", "/nonexistent/run.conf"])),
        1
    );
}

#[test]
fn confidence_truncation_point() {
    let out = satdyn(&["price", "--confidence", "0.999999", "--nu", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("truncation point: 103.29"), "{text}");
}

#[test]
fn flat_kernel_integral_and_empty_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let out = satdyn(&[
        "price",
        "--sigma",
        "0",
        "--lower",
        "0",
        "--upper",
        "1e6",
        "--nu",
        "3",
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(tmp.path().join("price.csv")).unwrap();
    let value = column(&csv, "integral")[0];
    assert!(
        (value - 3f64.sqrt() * std::f64::consts::PI / 4.0).abs() < 1e-8,
        "{value}"
    );

    let out = satdyn(&[
        "price",
        "--lower",
        "2",
        "--upper",
        "2",
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(tmp.path().join("price.csv")).unwrap();
    assert_eq!(column(&csv, "integral")[0], 0.0);
}

#[test]
fn simulate_outputs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = satdyn(&[
        "simulate",
        "--n",
        "1000",
        "--seed",
        "5",
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let samples = fs::read_to_string(tmp.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("index,w,x,s,r\n"));
    assert_eq!(samples.lines().count(), 1001);
    let s = column(&samples, "s");
    let r = column(&samples, "r");
    for (s, r) in s.iter().zip(&r) {
        assert!(((s / 50.0).ln() - r).abs() < 1e-12);
    }

    let manifest = fs::read_to_string(tmp.path().join("manifest.txt")).unwrap();
    for line in [
        "command=simulate",
        "seed=5",
        "n=1000",
        "model=standard",
        "std_convention=sample_n_minus_1",
        "kurtosis_convention=excess_g2_population_moments",
        "outputs=samples.csv,summary.csv",
    ] {
        assert!(
            manifest.lines().any(|l| l == line),
            "missing {line} in\n{manifest}"
        );
    }
    assert!(manifest.lines().any(|l| l.starts_with("timestamp_unix=")));
    assert!(!manifest.contains("workers"));
}

#[test]
fn reruns_are_byte_identical_and_seed_matters() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, seed: &str, workers: &str| {
        let d = tmp.path().join(dir);
        let out = satdyn(&[
            "table",
            "--preset",
            "table1",
            "--seed",
            seed,
            "--workers",
            workers,
            "--out",
            path(&d),
        ]);
        assert_eq!(code(&out), 0);
        fs::read(d.join("table.csv")).unwrap()
    };
    let a = run("a", "11", "1");
    assert_eq!(a, run("b", "11", "6"));
    assert_ne!(a, run("c", "12", "1"));
}

#[test]
fn seed_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_satdyn"))
        .args(["simulate", "--n", "10", "--out", path(tmp.path())])
        .env("SATDYN_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let manifest = fs::read_to_string(tmp.path().join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "seed=77"), "{manifest}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("run.conf");
    fs::write(
        &conf,
        "# shared settings\nmodel = saturated\nbeta = 1\nn = 300\nseed = 2\n",
    )
    .unwrap();
    let out = satdyn(&[
        "simulate",
        "--config",
        path(&conf),
        "--n",
        "200",
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(tmp.path().join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "n=200"));
    assert!(manifest.lines().any(|l| l == "beta=1.0"));
    assert!(manifest.lines().any(|l| l == "model=saturated"));
    let r = column(
        &fs::read_to_string(tmp.path().join("samples.csv")).unwrap(),
        "r",
    );
    assert_eq!(r.len(), 200);
    assert!(
        r.iter().all(|r| r.abs() < 1.0),
        "beta = 1 bounds the returns"
    );
}

#[test]
fn replay_reproduces_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let out = satdyn(&[
        "figure",
        "--figure",
        "6",
        "--points",
        "101",
        "--out",
        path(&first),
    ]);
    assert_eq!(code(&out), 0);
    let second = tmp.path().join("second");
    let out = satdyn(&[
        "replay",
        path(&first.join("manifest.txt")),
        "--out",
        path(&second),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["fig6.csv", "fig6_tics.csv"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn saturated_figure_anchors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = satdyn(&["figure", "--figure", "5", "--out", path(tmp.path())]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(tmp.path().join("fig5.csv")).unwrap();
    assert!(csv.starts_with("x,beta_0.0,beta_0.25,beta_0.5,beta_1.0\n"));
    let x = column(&csv, "x");
    let r = column(&csv, "beta_1.0");
    assert_eq!(x.len(), 401);
    assert!((r[400] - 0.331).abs() < 1e-3 && (r[0] + 0.494).abs() < 1e-3);
    assert_eq!(column(&csv, "beta_0.0"), x);
}

#[test]
fn pricing_figure_tics() {
    let tmp = tempfile::tempdir().unwrap();
    let out = satdyn(&["figure", "--figure", "6", "--out", path(tmp.path())]);
    assert_eq!(code(&out), 0);
    let tics = fs::read_to_string(tmp.path().join("fig6_tics.csv")).unwrap();
    let cv = column(&tics, "critical_value");
    assert!(
        (cv[0] - 4.5407).abs() < 1e-3 && (cv[4] - 103.2995).abs() < 1e-3,
        "{cv:?}"
    );
    let fig = fs::read_to_string(tmp.path().join("fig6.csv")).unwrap();
    assert!(fig.starts_with("xi,numerator,integrand\n"));
    assert_eq!(fig.lines().count(), 1002);
}
