use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kcenter(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kcenter"));
    cmd.args(args)
        .env_remove("KCENTER_MEMORY")
        .env_remove("KCENTER_ROUND_LIMIT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn line_file(dir: &Path) -> String {
    let path = dir.join("line.csv");
    fs::write(&path, "0\n1\n2\n3\n").unwrap();
    path.display().to_string()
}

#[test]
fn exact_on_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = line_file(dir.path());
    let out = dir.path().join("r.json");
    let o = kcenter(
        &[
            "solve",
            &input,
            "--alg",
            "exact",
            "--k",
            "2",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["algorithms"][0]["radius"], 1.0);
    assert_eq!(r["oracle_radius"], 1.0);
}

#[test]
fn alg2_single_machine_within_twice_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let input = line_file(dir.path());
    let out = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let o = kcenter(
        &[
            "solve",
            &input,
            "--alg",
            "alg2",
            "--k",
            "2",
            "--L",
            "1",
            "--out",
            out.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert!(r["algorithms"][0]["radius"].as_f64().unwrap() <= 2.0);
    assert!(fs::read_to_string(csv).unwrap().starts_with("algorithm,"));
}

#[test]
fn small_memory_warns_and_proceeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("six.csv");
    fs::write(&input, "0\n1\n2\n3\n10\n11\n").unwrap();
    let out = dir.path().join("r.json");
    let args = [
        "solve",
        input.to_str().unwrap(),
        "--k",
        "2",
        "--L",
        "2",
        "--out",
        out.to_str().unwrap(),
    ];
    let o = kcenter(&args, &[("KCENTER_MEMORY", "6")]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["instance"]["memory"], 6);
    let warnings = r["warnings"].as_array().unwrap();
    assert!(warnings
        .iter()
        .any(|w| w.as_str().unwrap().contains("k^2 L = 8")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));

    let o = kcenter(&args, &[("KCENTER_MEMORY", "3")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn descriptor_generate_validate_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("m.csv");
    let o = kcenter(
        &[
            "generate",
            "--kind",
            "matrix",
            "--n",
            "9",
            "--seed",
            "4",
            "--out",
            inst.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let o = kcenter(&["validate", inst.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"n\":9"));

    let desc = dir.path().join("run.json");
    fs::write(&desc, r#"{"instance": "m.csv", "k": 2, "L": 3, "partition": "random", "seed": 7, "algorithm": "all"}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = kcenter(
        &[
            "solve",
            "--descriptor",
            desc.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["algorithms"].as_array().unwrap().len(), 5);
    assert_eq!(r["flags"]["seed"], 7);

    let cmp = dir.path().join("c.json");
    let o = kcenter(
        &[
            "compare",
            inst.to_str().unwrap(),
            "--k",
            "2",
            "--L",
            "2",
            "--seeds",
            "1,2",
            "--out",
            cmp.to_str().unwrap(),
        ],
        &[],
    );
    let c = report(&cmp);
    assert_eq!(c["runs"].as_array().unwrap().len(), 3);
    let expected = if c["violations"] == 0 { 0 } else { 1 };
    assert_eq!(o.status.code(), Some(expected));
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "matrix,3\n0,1,10\n1,0,1\n10,1,0\n").unwrap();
    assert_eq!(
        kcenter(&["validate", bad.to_str().unwrap()], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        kcenter(&["solve", "missing.csv"], &[]).status.code(),
        Some(1)
    );
    assert_eq!(
        kcenter(&["solve", bad.to_str().unwrap(), "--alg", "nope"], &[])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = line_file(dir.path());
    let mut runs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = kcenter(
            &[
                "solve",
                &input,
                "--alg",
                "all",
                "--k",
                "2",
                "--L",
                "2",
                "--partition",
                "random",
                "--seed",
                "3",
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(o.status.code(), Some(0));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("timing_ms");
        runs.push(r);
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn literal_selection_can_be_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("u.csv");
    kcenter(
        &[
            "generate",
            "--kind",
            "uniform",
            "--n",
            "12",
            "--seed",
            "51",
            "--out",
            inst.to_str().unwrap(),
        ],
        &[],
    );
    let out = dir.path().join("r.json");
    let base = [
        "solve",
        inst.to_str().unwrap(),
        "--k",
        "2",
        "--L",
        "2",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(kcenter(&base, &[]).status.code(), Some(0));
    let mut literal = base.to_vec();
    literal.push("--compat-literal-select");
    assert_eq!(kcenter(&literal, &[]).status.code(), Some(2));
    assert_eq!(report(&out)["algorithms"][0]["feasible"], false);
}
