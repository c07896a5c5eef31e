use std::path::Path;
use std::process::Command;

use squeeze_dyn::io::{parse_f64, Header};
use squeeze_dyn::squeezing::xi2_oat;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squeeze-dyn"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn rerun_from_header(path: &Path, out: &Path) -> Vec<u8> {
    let text = std::fs::read_to_string(path).unwrap();
    let args = Header::parse(&text).get("args").unwrap().to_string();
    let status = bin()
        .args(args.split(' '))
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::read(out).unwrap()
}

#[test]
fn evolve_is_byte_identical_and_regenerable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = [
        "evolve",
        "--n",
        "10",
        "--channel",
        "dephasing",
        "--definition",
        "xi",
        "--kappa",
        "lorentzian",
        "--gamma",
        "0.01",
        "--eta0",
        "10",
        "--t-max",
        "40",
        "--dt",
        "0.05",
        "--compare-markovian",
        "0.005",
        "--reproducible",
    ];
    for p in [&a, &b] {
        let status = bin().args(args).arg("--out").arg(p).status().unwrap();
        assert!(status.success());
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let c = dir.path().join("c.csv");
    assert_eq!(rerun_from_header(&a, &c), first);

    let text = String::from_utf8(first).unwrap();
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(columns, "t,kappa,xi2,kappa_markovian,xi2_markovian");
    assert_eq!(
        text.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 801
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "evolve",
        "--n",
        "8",
        "--channel",
        "depolarizing",
        "--t-max",
        "20",
        "--reproducible",
    ];
    let one = bin().args(args).arg("--threads").arg("1").output().unwrap();
    let four = bin()
        .args(args)
        .env("SQUEEZE_DYN_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = bin()
        .args(args)
        .env("SQUEEZE_DYN_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn json_evolve_has_schema() {
    let (code, out) = run(&[
        "evolve",
        "--n",
        "10",
        "--channel",
        "damping",
        "--definition",
        "xi-prime",
        "--t-max",
        "5",
        "--dt",
        "1",
        "--format",
        "json",
        "--reproducible",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "squeeze-dyn/1");
    assert_eq!(v["columns"][2], "xi2_prime");
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn timestamp_only_without_reproducible() {
    let (_, out) = run(&[
        "alpha-scan",
        "--n-min",
        "3",
        "--n-max",
        "4",
        "--points",
        "2",
    ]);
    assert!(Header::parse(&out).get("generated_unix").is_some());
    let (_, out) = run(&[
        "alpha-scan",
        "--n-min",
        "3",
        "--n-max",
        "4",
        "--points",
        "2",
        "--reproducible",
    ]);
    assert!(Header::parse(&out).get("generated_unix").is_none());
}

#[test]
fn alpha_scan_rows_match_dense_scan() {
    let (code, out) = run(&[
        "alpha-scan",
        "--n-min",
        "3",
        "--n-max",
        "4",
        "--points",
        "2",
        "--reproducible",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        let n: usize = cells[0].parse().unwrap();
        let xi_min = parse_f64(cells[2]).unwrap();
        let dense = (1..200_000)
            .map(|i| {
                xi2_oat(n, std::f64::consts::FRAC_PI_2 * i as f64 / 200_000.0)
                    .unwrap()
                    .xi2
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        assert!((xi_min - dense).abs() < 1e-7, "n={n}");
    }
}

#[test]
fn death_times_report() {
    let (code, out) = run(&[
        "death-times",
        "--n",
        "10",
        "--channel",
        "damping",
        "--definition",
        "xi",
        "--kappa",
        "markovian",
        "--rate",
        "0.005",
        "--horizon",
        "1000",
        "--reproducible",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["curve"]["first_death"].is_null());
    assert!(v["curve"]["final_death"].is_null());
    assert_eq!(v["curve"]["intervals"].as_array().unwrap().len(), 1);

    let (_, out) = run(&[
        "death-times",
        "--n",
        "10",
        "--channel",
        "depolarizing",
        "--kappa",
        "markovian",
        "--rate",
        "0.005",
        "--reproducible",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let t = v["curve"]["first_death"].as_f64().unwrap();
    assert!((t - 68.76).abs() / 68.76 < 0.05);

    let (_, out) = run(&[
        "death-times",
        "--n",
        "10",
        "--channel",
        "dephasing",
        "--horizon",
        "600",
        "--compare-markovian",
        "0.005",
        "--reproducible",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["curve"]["intervals"].as_array().unwrap().len() >= 3);
    assert!(v["markovian"]["rate"].as_f64().unwrap() == 0.005);
    assert!(v["markovian"]["first_death"].as_f64().is_some());
}

#[test]
fn verify_exit_codes() {
    let (code, out) = run(&["verify", "--max-n", "4", "--reproducible"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["mismatches"], 0);
    assert_eq!(v["report"]["pair_reduction"].as_array().unwrap().len(), 3);
    // A tolerance below rounding error leaves some cases unexplained.
    let (code, _) = run(&[
        "verify",
        "--max-n",
        "4",
        "--tolerance",
        "1e-18",
        "--reproducible",
    ]);
    assert_eq!(code, 1);
    assert_eq!(run(&["verify", "--max-n", "13"]).0, 2);
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(run(&["evolve", "--n", "1", "--channel", "dephasing"]).0, 2);
    assert_eq!(run(&["alpha-scan", "--n-min", "10", "--n-max", "5"]).0, 2);
    assert_eq!(run(&["evolve", "--channel", "dephasing"]).0, 2);
    let status = bin()
        .args([
            "alpha-scan",
            "--n-min",
            "3",
            "--n-max",
            "4",
            "--points",
            "2",
            "--out",
            "/nonexistent/dir/x.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
