use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const AMPLITUDE_DAMPING: &str = r#"{"kind":"kraus","dim":2,"operators":[[[[1,0],[0,0]],[[0,0],[0.9,0]]],[[[0,0],[0.4358898943540674,0]],[[0,0],[0,0]]]]}"#;
const IDENTITY: &str = r#"{"kind":"unitary","dim":2,"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
const DEPOLARIZING: &str = r#"{"kind":"chi","dim":2,"basis":"standard","matrix":[[[0.85,0],[0,0],[0,0],[0,0]],[[0,0],[0.05,0],[0,0],[0,0]],[[0,0],[0,0],[0.05,0],[0,0]],[[0,0],[0,0],[0,0],[0.05,0]]]}"#;
const CNOT: &str = r#"{"kind":"unitary","dim":4,"matrix":[
  [[1,0],[0,0],[0,0],[0,0]],
  [[0,0],[1,0],[0,0],[0,0]],
  [[0,0],[0,0],[0,0],[1,0]],
  [[0,0],[0,0],[1,0],[0,0]]]}"#;

fn qpt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpt"))
        .args(args)
        .current_dir(dir)
        .env_remove("QPT_SEED")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qpt(dir, args);
    assert!(
        out.status.success(),
        "qpt {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    qpt(dir, args).status.code().unwrap()
}

fn json(dir: &Path, file: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(file)).unwrap()).unwrap()
}

fn report_value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap()
        .parse()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("ad.json", AMPLITUDE_DAMPING),
        ("id.json", IDENTITY),
        ("dep.json", DEPOLARIZING),
        ("cnot.json", CNOT),
    ] {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn entry(m: &Value, i: usize, j: usize) -> (f64, f64) {
    let z = &m[i][j];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

#[test]
fn identity_dataset_records_are_basis_elements() {
    let dir = setup();
    let d = dir.path();
    ok(
        d,
        &["generate", "id.json", "--qubits", "1", "--out", "data.json"],
    );
    let data = json(d, "data.json");
    assert_eq!(data["shots"], "exact");
    assert_eq!(data["manifest"]["command"], "generate");
    for (idx, r) in data["records"].as_array().unwrap().iter().enumerate() {
        assert_eq!(r["j"].as_u64().unwrap() as usize, idx + 1);
        for i in 0..2 {
            for k in 0..2 {
                let expected = if i * 2 + k == idx { 1.0 } else { 0.0 };
                let (re, im) = entry(&r["rho"], i, k);
                assert!((re - expected).abs() < 1e-12 && im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn generate_is_deterministic_and_honours_seed_sources() {
    let dir = setup();
    let d = dir.path();
    ok(
        d,
        &[
            "generate", "dep.json", "--shots", "1e4", "--seed", "7", "--out", "a.json",
        ],
    );
    ok(
        d,
        &[
            "generate", "dep.json", "--shots", "1e4", "--seed", "7", "--out", "b.json",
        ],
    );
    assert_eq!(
        fs::read(d.join("a.json")).unwrap(),
        fs::read(d.join("b.json")).unwrap()
    );

    let env_run = |seed: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_qpt"))
            .args(["generate", "dep.json", "--shots", "1e4", "--out", out])
            .current_dir(d)
            .env("QPT_SEED", seed)
            .status()
            .unwrap();
        assert!(status.success());
    };
    env_run("7", "c.json");
    assert_eq!(json(d, "c.json")["records"], json(d, "a.json")["records"]);
    env_run("8", "e.json");
    assert_ne!(json(d, "e.json")["records"], json(d, "a.json")["records"]);

    let status = Command::new(env!("CARGO_BIN_EXE_qpt"))
        .args([
            "generate", "dep.json", "--shots", "1e4", "--seed", "7", "--out", "f.json",
        ])
        .current_dir(d)
        .env("QPT_SEED", "8")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(json(d, "f.json")["records"], json(d, "a.json")["records"]);
}

#[test]
fn dimension_and_parse_errors() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(
        code(
            d,
            &["generate", "cnot.json", "--qubits", "1", "--out", "x.json"]
        ),
        3
    );
    fs::write(d.join("bad.json"), "{\"kind\": \"kraus\"").unwrap();
    assert_eq!(code(d, &["generate", "bad.json", "--out", "x.json"]), 2);
    assert_eq!(code(d, &["generate", "missing.json", "--out", "x.json"]), 2);
    assert_eq!(
        code(
            d,
            &["generate", "id.json", "--shots", "lots", "--out", "x.json"]
        ),
        2
    );
}

#[test]
fn reconstruct_identity_and_method_equivalence() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["generate", "id.json", "--out", "data.json"]);
    let report = ok(d, &["reconstruct", "data.json", "--out", "general.json"]);
    assert!(report_value(&report, "residual") < 1e-12);
    let chi = json(d, "general.json");
    assert_eq!(chi["kind"], "chi");
    for i in 0..4 {
        for k in 0..4 {
            let expected = if i == 0 && k == 0 { 1.0 } else { 0.0 };
            let (re, im) = entry(&chi["matrix"], i, k);
            assert!((re - expected).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }

    ok(d, &["generate", "ad.json", "--out", "ad_data.json"]);
    ok(d, &["reconstruct", "ad_data.json", "--out", "g.json"]);
    ok(
        d,
        &[
            "reconstruct",
            "ad_data.json",
            "--method",
            "closed1q",
            "--out",
            "c.json",
        ],
    );
    let (g, c) = (json(d, "g.json"), json(d, "c.json"));
    for i in 0..4 {
        for k in 0..4 {
            let (a, b) = (entry(&g["matrix"], i, k), entry(&c["matrix"], i, k));
            assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
        }
    }
    assert_eq!(
        code(
            d,
            &[
                "reconstruct",
                "ad_data.json",
                "--method",
                "closed2q",
                "--out",
                "x.json"
            ]
        ),
        5
    );
}

#[test]
fn projection_makes_noisy_chi_positive() {
    let dir = setup();
    let d = dir.path();
    ok(
        d,
        &[
            "generate",
            "ad.json",
            "--shots",
            "100",
            "--seed",
            "3",
            "--out",
            "data.json",
        ],
    );
    let raw = ok(d, &["reconstruct", "data.json", "--out", "raw.json"]);
    let projected = ok(
        d,
        &[
            "reconstruct",
            "data.json",
            "--project-physical",
            "--out",
            "p.json",
        ],
    );
    assert!(report_value(&raw, "min_eigenvalue") < 0.0);
    assert!(report_value(&projected, "min_eigenvalue") >= 0.0);
    assert_ne!(code(d, &["verify", "raw.json"]), 0);
    ok(d, &["verify", "p.json"]);
    assert_ne!(
        code(d, &["--verify", "kraus", "raw.json", "--out", "k.json"]),
        0
    );
}

#[test]
fn kraus_of_cnot_data_is_a_single_operator() {
    let dir = setup();
    let d = dir.path();
    ok(
        d,
        &[
            "generate",
            "cnot.json",
            "--qubits",
            "2",
            "--out",
            "data.json",
        ],
    );
    ok(
        d,
        &[
            "reconstruct",
            "data.json",
            "--method",
            "closed2q",
            "--out",
            "chi.json",
        ],
    );
    ok(d, &["kraus", "chi.json", "--out", "k.json"]);
    let k = json(d, "k.json");
    let ops = k["operators"].as_array().unwrap();
    assert_eq!(ops.len(), 1);
    // equal to CNOT up to a global phase
    let (pr, pi) = entry(&ops[0], 0, 0);
    let cnot = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ];
    for (i, row) in cnot.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let (re, im) = entry(&ops[0], i, j);
            assert!((re - v * pr).abs() < 1e-9 && (im - v * pi).abs() < 1e-9);
        }
    }
}

#[test]
fn bloch_csv_for_amplitude_damping() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["bloch", "ad.json", "--csv", "ad.csv"]);
    let text = fs::read_to_string(d.join("ad.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: "));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!((col("c1"), col("c2"), col("c3")), (0.0, 0.0, 0.19));
    assert_eq!((col("m11"), col("m22"), col("m33")), (0.9, 0.9, 0.81));
    assert_eq!(code(d, &["bloch", "cnot.json"]), 3);
}

#[test]
fn metrics_reports() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["generate", "id.json", "--out", "data.json"]);
    ok(d, &["reconstruct", "data.json", "--out", "chi.json"]);
    let capacity: Value =
        serde_json::from_str(&ok(d, &["metrics", "chi.json", "--metric", "capacity"])).unwrap();
    assert!((capacity["capacity"].as_f64().unwrap() - 1.0).abs() < 1e-3);

    let efid: Value =
        serde_json::from_str(&ok(d, &["metrics", "dep.json", "--metric", "efid"])).unwrap();
    assert!((efid["value"].as_f64().unwrap() - 0.85).abs() < 1e-12);

    ok(
        d,
        &[
            "metrics", "ad.json", "--metric", "minfid", "--target", "id.json", "--out", "m.json",
        ],
    );
    assert!((json(d, "m.json")["value"].as_f64().unwrap() - 0.81).abs() < 1e-4);

    let flip = r#"{"kind":"unitary","dim":2,"matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#;
    fs::write(d.join("flip.json"), flip).unwrap();
    assert_eq!(
        code(d, &["metrics", "flip.json", "--metric", "lindblad"]),
        6
    );
    assert_eq!(
        code(
            d,
            &[
                "metrics",
                "ad.json",
                "--metric",
                "efid",
                "--target",
                "cnot.json"
            ]
        ),
        3
    );
}

#[test]
fn measurement_branches() {
    let dir = setup();
    let d = dir.path();
    let instrument = r#"{"dim":2,"branches":[
        {"label":"0","operators":[[[[1,0],[0,0]],[[0,0],[0,0]]]]},
        {"label":"1","operators":[[[[0,0],[0,0]],[[0,0],[1,0]]]]}]}"#;
    fs::write(d.join("inst.json"), instrument).unwrap();
    ok(
        d,
        &[
            "measure",
            "inst.json",
            "--branch",
            "0",
            "--save-data",
            "b.json",
            "--out",
            "chi0.json",
        ],
    );
    ok(d, &["verify", "b.json"]);
    ok(
        d,
        &[
            "measure",
            "inst.json",
            "--branch",
            "0",
            "--data",
            "b.json",
            "--out",
            "again.json",
        ],
    );
    let chi = json(d, "chi0.json");
    let again = json(d, "again.json");
    for i in 0..4 {
        for k in 0..4 {
            let (a, b) = (entry(&chi["matrix"], i, k), entry(&again["matrix"], i, k));
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }
    assert_eq!(chi["trace_preserving"], false);
    // {|0⟩⟨0|} = (I + σz)/2: χ has 1/4 in the (I, σz) block
    for (i, k) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        let (re, im) = entry(&chi["matrix"], i, k);
        assert!((re - 0.25).abs() < 1e-12 && im.abs() < 1e-12);
    }
    let all: Value =
        serde_json::from_str(&ok(d, &["measure", "inst.json", "--all-branches"])).unwrap();
    assert_eq!(all["branches"].as_array().unwrap().len(), 2);
    assert!(all["sum_trace_defect"].as_f64().unwrap() < 1e-8);
    assert_eq!(code(d, &["measure", "inst.json", "--branch", "7"]), 2);
}

#[test]
fn verify_recognizes_files_and_rejects_violations() {
    let dir = setup();
    let d = dir.path();
    assert!(ok(d, &["verify", "ad.json"]).starts_with("ok: channel (kraus"));
    assert!(ok(d, &["verify", "dep.json"]).starts_with("ok: channel (chi"));
    let not_tp = r#"{"kind":"kraus","dim":2,"operators":[[[[1,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
    fs::write(d.join("not_tp.json"), not_tp).unwrap();
    assert_eq!(code(d, &["verify", "not_tp.json"]), 2);
    let state = r#"{"dim":2,"rho":[[[0.7,0],[0,0]],[[0,0],[0.4,0]]]}"#;
    fs::write(d.join("state.json"), state).unwrap();
    assert_eq!(code(d, &["verify", "state.json"]), 2);
    fs::write(d.join("other.json"), "{\"hello\": 1}").unwrap();
    assert_eq!(code(d, &["verify", "other.json"]), 2);
}
