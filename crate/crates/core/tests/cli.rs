use std::path::Path;
use std::process::{Command, Output};

fn palab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_palab"))
        .args(args)
        .env_remove("PALAB_SEED")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_solve_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let out = palab(&[
        "gen",
        "--n",
        "100",
        "--d",
        "2",
        "--p",
        "2",
        "--seed",
        "7",
        "-o",
        path_str(&inst),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());

    let out = palab(&["solve", "--alg", "mst", "-i", path_str(&inst)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["functional"], "MST");
    assert_eq!(v["n"], 100);
    let mst = v["value"].as_f64().unwrap();

    let out = palab(&["solve", "--alg", "pt", "-i", path_str(&inst)]);
    let pt = serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!(mst > 0.0 && mst <= pt && pt <= 2.0 * mst + 1e-12);
}

#[test]
fn exact_solvers_agree_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("small.json");
    assert!(palab(&[
        "gen",
        "--n",
        "6",
        "--d",
        "2",
        "--seed",
        "3",
        "-o",
        path_str(&inst)
    ])
    .status
    .success());
    let value = |args: &[&str]| {
        let out = palab(args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    let p = path_str(&inst);
    let pa = value(&["solve", "--alg", "pa-exact", "-i", p]);
    let oracle = value(&["solve", "--alg", "oracle", "-i", p]);
    let pab = value(&["solve", "--alg", "pab-exact", "-i", p]);
    let oracle_b = value(&["solve", "--alg", "oracle", "--mode", "boundary", "-i", p]);
    assert!((pa - oracle).abs() <= 1e-9);
    assert!((pab - oracle_b).abs() <= 1e-9);
    assert!(pab <= pa + 1e-9);
}

#[test]
fn thirteen_points_exceed_the_exact_budget() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst13.json");
    assert!(palab(&["gen", "--n", "13", "-o", path_str(&inst)])
        .status
        .success());
    let out = palab(&["solve", "--alg", "pa-exact", "-i", path_str(&inst)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("12"), "{err}");
    assert!(out.stdout.is_empty());

    let out = palab(&[
        "solve",
        "--alg",
        "pa-exact",
        "--budget",
        "13",
        "-i",
        path_str(&inst),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_inputs_exit_one() {
    assert_eq!(palab(&["exp", "gamma", "--p", "0"]).status.code(), Some(1));
    assert_eq!(
        palab(&["solve", "--alg", "mst", "-i", "/nonexistent/x.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(palab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(palab(&["--version"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\"d\": 2, \"p\": 1.0, \"points\": [[0.1, 0.2, 0.3]]}",
    )
    .unwrap();
    let out = palab(&["solve", "--alg", "mst", "-i", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("validation"));
}

#[test]
fn same_command_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |o: &Path| {
        vec![
            "exp".to_string(),
            "gamma".into(),
            "--n".into(),
            "20,40".into(),
            "--trials".into(),
            "4".into(),
            "-o".into(),
            o.to_str().unwrap().to_string(),
        ]
    };
    for o in [&a, &b] {
        let out = Command::new(env!("CARGO_BIN_EXE_palab"))
            .args(args(o))
            .env("PALAB_SEED", "99")
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.contains("# seed=99\n"));
}

#[test]
fn star_generation_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let star = dir.path().join("star.json");
    assert!(
        palab(&["gen", "--m", "2", "--ratio", "10", "-o", path_str(&star)])
            .status
            .success()
    );
    let text = std::fs::read_to_string(&star).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let xs: Vec<f64> = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p[0].as_f64().unwrap())
        .collect();
    let want = [0.0, 0.45, 0.5, 0.55, 1.0];
    assert!(
        xs.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15),
        "{xs:?}"
    );

    let summary = dir.path().join("s.json");
    let csv = dir.path().join("r.csv");
    let out = palab(&[
        "exp",
        "ratio",
        "--d",
        "1",
        "--p",
        "2",
        "--n",
        "1000",
        "--trials",
        "10",
        "--seed",
        "42",
        "-o",
        path_str(&csv),
        "--summary",
        path_str(&summary),
    ]);
    assert!(out.status.success());
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["config"]["seed"], "42");
    let mean = s["summary"]["per_n"][0]["mean"].as_f64().unwrap();
    assert!((1.6..1.9).contains(&mean), "{mean}");
}
