//! End-to-end checks of the command-line interface and its exit codes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prismkit"))
}

#[test]
fn ext_subcommand_reports_h1() {
    let out = bin()
        .args(["ext", "--group", "2", "--coeff", "2"])
        .output()
        .expect("run prismkit");
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["H1"], serde_json::json!(["2"]));
}

#[test]
fn qlog_of_q_is_mu() {
    let out = bin()
        .args(["qlog", "--p", "2", "--depth", "1", "--Q", "16"])
        .output()
        .expect("run prismkit");
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nygaard_level_one"], serde_json::json!(true));
    // log_q(q) = q - 1; at depth 1 the table is in t = q_1 - 1 with
    // mu = (1+t)^2 - 1 = 2t + t^2
    assert_eq!(
        v["value"]["coeffs"],
        serde_json::json!([[[0, 1], 2], [[0, 2], 1]])
    );
}

#[test]
fn bad_input_exits_2() {
    let out = bin().args(["qlog", "--x", "not-json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_2() {
    let out = bin().args(["suite", "--only", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witt_polys_include_s1() {
    let out = bin().args(["witt", "polys", "--p", "2", "--len", "2"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let s1 = v["sum"][1].as_str().unwrap();
    assert!(s1.contains("x1"), "{}", s1);
    assert!(s1.contains("-1*x0*y0"), "{}", s1);
}

#[test]
fn window_check_roundtrip_via_files() {
    let dir = std::env::temp_dir().join(format!("prismkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let window = serde_json::json!({
        "prism": {"kind": "bk", "p": 2, "N": 6, "u_trunc": 8},
        "rank": 2,
        "L": [0],
        "psi": [
            [[[[0, 0], 1]], [[[1, 0], 1]]],
            [[[[0, 0], 2]], [[[0, 0], 1]]]
        ]
    });
    let path = dir.join("window.json");
    std::fs::write(&path, serde_json::to_string(&window).unwrap()).unwrap();

    let out = bin()
        .args(["window", "check", "--in", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["generation"], serde_json::json!(true));

    let out = bin()
        .args(["window", "to-bk", "--in", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // L-row of the BK matrix is d * psi row: (u - 2) * 1 = 62 + u
    assert_eq!(
        v["mat"][0][0],
        serde_json::json!([[[0, 0], 62], [[1, 0], 1]])
    );

    let out = bin()
        .args(["window", "normal", "--in", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["L"], serde_json::json!([0]));
    assert_eq!(v["T"], serde_json::json!([1]));

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn dm_standard_and_check() {
    let out = bin()
        .args(["dm", "standard", "--kind", "multiplicative", "--rank", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["phi"][0][0], serde_json::json!([[[0, 0], 2]]));

    // feed it back through dm check
    let dir = std::env::temp_dir().join(format!("prismkit-dm-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dm.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let out = bin()
        .args(["dm", "check", "--in", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn suite_single_deterministic() {
    let run = || {
        bin()
            .args(["suite", "--only", "ext", "--seed", "11"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_env_fallback() {
    let out = bin()
        .args(["suite", "--only", "ext"])
        .env("PRISMKIT_SEED", "13")
        .output()
        .unwrap();
    assert!(out.status.success());
}
