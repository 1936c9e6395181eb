use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ppclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppclab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ppclab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

/// `g` column of a gaps CSV.
fn g_column(csv: &str) -> Vec<usize> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,g,max_multiplicity,max_ratio"));
    lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn equispaced_has_one_gap() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "eq.txt");
    ok(&["generate", "--kind", "equispaced", "--n", "8", "--out", &f]);
    let csv = ok(&["gaps", "--in", &f, "--checkpoints", "8"]);
    assert_eq!(g_column(&csv), vec![1]);
}

#[test]
fn golden_kronecker_has_at_most_three_gaps() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "k.txt");
    ok(&[
        "generate",
        "--kind",
        "kronecker",
        "--alpha",
        "golden",
        "--n",
        "4096",
        "--out",
        &f,
    ]);
    let g = g_column(&ok(&["gaps", "--in", &f, "--checkpoints", "16,256,4096"]));
    assert_eq!(g.len(), 3);
    assert!(g.iter().all(|&g| g <= 3), "{g:?}");
}

#[test]
fn stdout_and_file_outputs_agree() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "c.txt");
    let args = [
        "generate",
        "--kind",
        "construction",
        "--n",
        "300",
        "--seed",
        "5",
    ];
    let stdout = ok(&args);
    ok(&[&args[..], &["--out", &f]].concat());
    assert_eq!(fs::read_to_string(&f).unwrap(), stdout);
    assert!(stdout.starts_with("#ppclab v1 kind=construction n=300 repr=dyadic seed=5\n"));
}

#[test]
fn generation_is_reproducible() {
    for kind in ["iid", "construction"] {
        let args = ["generate", "--kind", kind, "--n", "500", "--seed", "99"];
        assert_eq!(ok(&args), ok(&args), "{kind}");
    }
    let a = ok(&["generate", "--kind", "iid", "--n", "50", "--seed", "1"]);
    let b = ok(&["generate", "--kind", "iid", "--n", "50", "--seed", "2"]);
    assert_ne!(a, b);
}

#[test]
fn effective_config_line_names_seed_and_digest() {
    let out = ppclab(&[
        "generate",
        "--kind",
        "construction",
        "--n",
        "64",
        "--seed",
        "7",
    ]);
    let err = String::from_utf8(out.stderr).unwrap();
    let line = err
        .lines()
        .find(|l| l.starts_with("# effective-config"))
        .unwrap();
    assert!(line.contains("seed=7"), "{line}");
    assert!(line.contains("digest="), "{line}");
}

#[test]
fn construction_gaps_respect_q() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "c.txt");
    ok(&[
        "generate",
        "--kind",
        "construction",
        "--n",
        "4096",
        "--seed",
        "3",
        "--q-spec",
        "builtin:logn",
        "--out",
        &f,
    ]);
    let cps = [16usize, 64, 256, 1024, 4096];
    let list: Vec<String> = cps.iter().map(ToString::to_string).collect();
    let g = g_column(&ok(&["gaps", "--in", &f, "--checkpoints", &list.join(",")]));
    for (&n, &g) in cps.iter().zip(&g) {
        assert!(g as u32 <= n.ilog2() + 4, "n = {n}: g = {g}");
    }
}

#[test]
fn explicit_schedule_files() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.txt"), path(&dir, "b.txt"));
    fs::write(&a, "1 1 2 2 3 3\n").unwrap();
    fs::write(&b, "[1, 1, 2, 2, 3, 3]").unwrap();
    let out = ok(&[
        "generate",
        "--kind",
        "construction",
        "--n",
        "60",
        "--seed",
        "1",
        "--a",
        &a,
        "--b",
        &b,
    ]);
    assert_eq!(out.lines().count(), 61);

    fs::write(&b, "0 1 1 1 1 1\n").unwrap();
    let out = ppclab(&[
        "generate",
        "--kind",
        "construction",
        "--n",
        "60",
        "--seed",
        "1",
        "--a",
        &a,
        "--b",
        &b,
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_q_and_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "cfg.json");
    let q: Vec<u64> = (1..=64u64).map(|n| (n.ilog2() as u64 + 4).max(4)).collect();
    fs::write(&cfg, format!(r#"{{"source":"q","q":{q:?},"seed":17}}"#)).unwrap();
    let from_file = ok(&[
        "generate",
        "--kind",
        "construction",
        "--n",
        "40",
        "--q-spec",
        &cfg,
    ]);
    let explicit = ok(&[
        "generate",
        "--kind",
        "construction",
        "--n",
        "40",
        "--seed",
        "17",
        "--q-spec",
        "builtin:logn",
    ]);
    assert_eq!(from_file, explicit);
}

#[test]
fn ppc_curve_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "eq.txt");
    ok(&["generate", "--kind", "equispaced", "--n", "16", "--out", &f]);
    let csv = ok(&["ppc", "--in", &f, "--s-grid", "0.5:2:0.5"]);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "s,F");
    assert_eq!(rows.len(), 5);
    // equispaced: F(s) counts neighbours at distance k/16 < s/16
    assert_eq!(rows[1], "5.0000000000000000e-1,0.0000000000000000e0");
    assert_eq!(rows[4], "2.0000000000000000e0,2.0000000000000000e0");

    let json: serde_json::Value = serde_json::from_str(&ok(&[
        "ppc",
        "--in",
        &f,
        "--s",
        "2",
        "--predicate",
        "nonstrict",
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(json["curve"][0]["F"], 4.0);
    assert_eq!(json["predicate"], "nonstrict");
}

#[test]
fn oracle_and_mc_reports() {
    let json: serde_json::Value = serde_json::from_str(&ok(&[
        "oracle",
        "--n",
        "1024",
        "--s",
        "1",
        "--q-spec",
        "builtin:half",
    ]))
    .unwrap();
    let e = json[0]["expectation"]["value"].as_f64().unwrap();
    assert!((e - 2.0).abs() < 0.1, "{e}");
    assert!(json[0]["expectation"]["exact"]
        .as_str()
        .unwrap()
        .ends_with("·N⁻²"));

    let args = [
        "mc",
        "--n",
        "256",
        "--s",
        "1",
        "--samples",
        "64",
        "--seed",
        "4",
        "--q-spec",
        "builtin:half",
    ];
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    let json: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(json["mc"]["samples"], 64);
    assert_eq!(json["mc"]["seed"], 4);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["generate", "--kind", "iid", "--n", "5"][..],
        &["mc", "--n", "64", "--s", "1", "--samples", "10"],
        &["generate", "--kind", "bogus", "--n", "5"],
        &["gaps", "--unknown"],
        &["ppc", "--in", "x", "--s-grid", "1:2"],
        &["frobnicate"],
    ] {
        assert_eq!(ppclab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn validation_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "bad.txt");
    fs::write(&f, "#ppclab v1 kind=x n=1 repr=dyadic seed=none\n2 2\n").unwrap();
    let out = ppclab(&["gaps", "--in", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("canonical"));

    let eq = path(&dir, "eq.txt");
    ok(&["generate", "--kind", "equispaced", "--n", "8", "--out", &eq]);
    assert_eq!(
        ppclab(&["gaps", "--in", &eq, "--checkpoints", "9"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_exits_0() {
    let out = ppclab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(env!("CARGO_BIN_EXE_ppclab")).exists());
}

#[test]
fn verify_passes_every_criterion() {
    let stdout = ok(&["verify"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|l| l.starts_with("[PASS]")), "{stdout}");
}
