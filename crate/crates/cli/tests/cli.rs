use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use hjsort::{GridField, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn hjsort(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjsort"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HJSORT_OUT_DIR")
        .env_remove("HJSORT_MEM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_field(path: &Path) -> GridField {
    GridField::read_binary(fs::File::open(path).unwrap()).unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_constant_s2_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjsort(&["solve", "--scheme", "s2", "--case", "const:1", "--n", "2", "--m", "40"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let field = read_field(&dir.path().join("S2_const-1_n2_m40.bin"));
    field.for_each_node(|_, x, v| assert!((v - x[0] * x[1]).abs() <= 1e-12));
    let rep = report(&dir.path().join("S2_const-1_n2_m40.report.json"));
    assert!(rep["stats"]["wall_seconds"].is_number());
    assert!(rep["linf_error_u"].as_f64().unwrap() < 1e-12);
}

#[test]
fn solve_s1_three_dims_certifies_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjsort(&["solve", "--scheme", "s1", "--case", "f2", "--n", "3", "--m", "20"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = report(&dir.path().join("S1_f2_n3_m20.report.json"));
    let stats = &rep["stats"];
    assert!(stats["max_residual"].as_f64().unwrap() <= 0.05);
    assert!(stats["min_residual"].as_f64().unwrap() >= -1e-12);
    assert_eq!(stats["saturated_nodes"].as_u64().unwrap(), 0);
    assert!(stats["max_iterations"].as_u64().unwrap() > 0);
}

#[test]
fn forced_bisection_matches_closed_form_within_band() {
    let dir = tempfile::tempdir().unwrap();
    let closed_dir = dir.path().join("closed");
    let bis_dir = dir.path().join("bis");
    let base = ["solve", "--scheme", "s3", "--case", "f3", "--n", "2", "--m", "160"];
    let o = hjsort(&[&base[..], &["--out", closed_dir.to_str().unwrap()]].concat(), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = hjsort(&[&base[..], &["--out", bis_dir.to_str().unwrap(), "--force-bisection"]].concat(), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let closed = read_field(&closed_dir.join("S3_f3_n2_m160.bin"));
    let bis = read_field(&bis_dir.join("S3_f3_n2_m160.bin"));
    // w scales like f^(1/2), so the (1+h) band bounds the ratio by (1+h)^(1/2)
    let cap = (1.0 + 1.0 / 160.0f64).sqrt() * (1.0 + 1e-12);
    for (c, b) in closed.values().iter().zip(bis.values()) {
        assert!(*b >= c * (1.0 - 1e-12) && *b <= c * cap, "{c} vs {b}");
    }
    assert_eq!(report(&bis_dir.join("S3_f3_n2_m160.report.json"))["method"], "bisection");
}

#[test]
fn solve_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = hjsort(
            &[
                "solve",
                "--scheme",
                "s3",
                "--case",
                "f2",
                "--n",
                "3",
                "--m",
                "9",
                "--format",
                "csv",
                "--emit-levelsets",
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        (fs::read(out.join("S3_f2_n3_m9.csv")).unwrap(), fs::read(out.join("S3_f2_n3_m9.levelsets.csv")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn levelsets_hold_u_scale_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjsort(
        &["solve", "--scheme", "s2", "--case", "const:1", "--n", "2", "--m", "8", "--emit-levelsets"],
        dir.path(),
    );
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("S2_const-1_n2_m8.levelsets.csv")).unwrap();
    let spec = GridSpec::new(2, 8).unwrap();
    let u = GridField::read_csv(spec, text.as_bytes()).unwrap();
    u.for_each_node(|_, x, v| assert!((v - 2.0 * (x[0] * x[1]).sqrt()).abs() < 1e-12));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_hjsort"))
        .args(["solve", "--case", "f1", "--n", "2", "--m", "10"])
        .current_dir(dir.path())
        .env("HJSORT_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(target.join("S2_f1_n2_m10.bin").exists());
}

#[test]
fn rhs_from_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::new(2, 12).unwrap();
    let f = GridField::from_fn(spec, |x| 1.0 + x[0] * x[1]);
    let mut file = fs::File::create(dir.path().join("f.bin")).unwrap();
    f.write_binary(&mut file).unwrap();
    file.flush().unwrap();
    let o = hjsort(&["solve", "--scheme", "s1", "--f-file", "f.bin", "--n", "2", "--m", "12"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let u = read_field(&dir.path().join("S1_file_n2_m12.bin"));
    assert_eq!(u.spec(), spec);
    assert!(report(&dir.path().join("S1_file_n2_m12.report.json"))["linf_error_u"].is_null());

    let o = hjsort(&["solve", "--f-file", "f.bin", "--n", "2", "--m", "13"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = hjsort(&["solve", "--f-file", "missing.bin", "--n", "2", "--m", "12"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--n", "1", "--m", "4"][..],
        &["solve", "--n", "2", "--m", "0"],
        &["solve", "--n", "2", "--m", "4", "--case", "f7"],
        &["solve", "--n", "2", "--m", "4", "--scheme", "s4"],
        &["solve", "--n", "2", "--m", "4", "--rolling", "--emit-levelsets"],
        &["solve", "--n", "2", "--m", "4", "--case", "f1", "--f-file", "x.bin"],
        &["convergence", "--case", "f2", "--n", "2", "--meshes", "160,40"],
        &["convergence", "--case", "f2", "--n", "2", "--jobs", "0"],
        &["convergence", "--case", "f2", "--n", "2", "--max-k", "2", "--meshes", "10,20"],
        &["frobnicate"],
    ] {
        let o = hjsort(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn memory_guard_suggests_rolling() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjsort(&["solve", "--n", "3", "--m", "200", "--mem-cap", "1000000"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--rolling"));
    let o = Command::new(env!("CARGO_BIN_EXE_hjsort"))
        .args(["solve", "--n", "3", "--m", "200"])
        .current_dir(dir.path())
        .env("HJSORT_MEM_CAP", "1000000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = hjsort(&["solve", "--n", "2", "--m", "300", "--mem-cap", "1000", "--rolling"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!dir.path().join("S2_f2_n2_m300.bin").exists());
}

#[test]
fn help_lists_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjsort(&["--help"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for sub in ["solve", "convergence", "pareto"] {
        assert!(text.contains(sub));
    }
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn convergence_f2_two_dims() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjsort(
        &["convergence", "--case", "f2", "--n", "2", "--max-k", "3", "--format", "csv", "--jobs", "2"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    let s2: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "S2").collect();
    assert_eq!(s2.len(), 3);
    for (row, expected) in s2[1..].iter().zip([0.99, 0.97]) {
        let order: f64 = row[6].parse().unwrap();
        assert!((order - expected).abs() < 0.05, "{order}");
    }

    let o = hjsort(&["convergence", "--case", "f2", "--n", "2", "--max-k", "3"], dir.path());
    let table = stdout(&o);
    assert_eq!(table.lines().filter(|l| l.starts_with("| ") && l.contains("(m=")).count(), 3);
    assert!(table.contains("| 2.5e-2 (m=40) | 9.5e-2 |"));
}

#[test]
fn convergence_f1_four_dims() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = hjsort(
        &[
            "convergence",
            "--case",
            "f1",
            "--n",
            "4",
            "--max-k",
            "2",
            "--scheme",
            "s3",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let order = v["schemes"][0]["rows"][1]["order"].as_f64().unwrap();
    assert!((0.24..=0.27).contains(&order), "{order}");
}

#[test]
fn convergence_constant_three_dims() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjsort(
        &["convergence", "--case", "const:2", "--n", "3", "--max-k", "1", "--scheme", "s2", "--format", "csv"],
        dir.path(),
    );
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let error: f64 = rows[0][5].parse().unwrap();
    assert!(error <= 0.05, "{error}");
}

#[test]
fn pareto_toy_cloud() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.csv"), "f1,f2\n1,2\n2,1\n3,3\n").unwrap();
    let o = hjsort(&["pareto", "--input", "toy.csv", "--m", "40"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    let fronts: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(fronts, ["1", "1", "2"]);
    let x: f64 = rows[2][0].parse().unwrap();
    assert_eq!(x, 3.0);
}

#[test]
fn pareto_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.csv"), "").unwrap();
    let o = hjsort(&["pareto", "--input", "empty.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no points"));

    fs::write(dir.path().join("bad.csv"), "0.1,0.2\n0.3,0.4\n0.5,oops\n").unwrap();
    let o = hjsort(&["pareto", "--input", "bad.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    fs::write(dir.path().join("ragged.csv"), "0.1,0.2\n0.3\n").unwrap();
    let o = hjsort(&["pareto", "--input", "ragged.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    fs::write(dir.path().join("wide.csv"), "0.1,2.0\n0.3,0.4\n").unwrap();
    let o = hjsort(&["pareto", "--input", "wide.csv", "--no-normalize", "--m", "8"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = hjsort(&["pareto", "--input", "nope.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pareto_agreement_above_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut text = String::new();
    for _ in 0..10_000 {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        text.push_str(&format!("{a:.17e},{b:.17e}\n"));
    }
    fs::write(dir.path().join("cloud.csv"), text).unwrap();
    let o = hjsort(
        &["pareto", "--input", "cloud.csv", "--case", "const:1", "--m", "640", "--no-normalize", "--out", "ranked.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    let agreement: f64 = err.rsplit("agreement: ").next().unwrap().trim().parse().unwrap();
    assert!(agreement >= 0.9865, "{agreement}");
    let rows = csv_rows(&fs::read_to_string(dir.path().join("ranked.csv")).unwrap());
    assert_eq!(rows.len(), 10_000);
}
