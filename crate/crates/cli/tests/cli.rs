use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcsys")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad json {text:?}: {e}"))
}

#[test]
fn ramanujan_check_succeeds() {
    let out = run(&["verify", "ramanujan", "--order", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ok"], true);
    assert_eq!(v["residual_max_order"], 30);
}

#[test]
fn solve_is_deterministic_and_exact() {
    let a = run(&["solve", "--n", "2", "--m", "3", "--order", "8", "--coord", "z"]);
    let b = run(&["solve", "--n", "2", "--m", "3", "--order", "8", "--coord", "z"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["N"], 1);
    assert_eq!(v["Q"]["terms"][1][1], "5/36");
    assert_eq!(v["Q"]["prec"], "8");
}

#[test]
fn dims_table_rows() {
    let out = run(&["dims", "--n", "3", "--m", "3", "--wmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let w2 = rows.as_array().unwrap().iter().find(|r| r["w"] == "2").unwrap();
    assert_eq!(w2["dim"], 2);
    assert_eq!(w2["rotation"], Value::Null);
    assert_eq!(w2["classes"].as_array().unwrap().len(), 2);
}

#[test]
fn bracket_of_catalog_forms() {
    let out = run(&["bracket", "--f", "DELTA", "--g", "E4", "--n", "1", "--order", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["weight"], "18");
}

#[test]
fn invalid_input_exits_two_with_error_json() {
    for args in [&["solve", "--n", "1", "--m", "3"][..], &["catalog", "--name", "E5"][..], &["nonsense"][..]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(json(&out)["error"].is_string());
    }
}

#[test]
fn sl2check_reads_a_system_file() {
    let dir = std::env::temp_dir().join(format!("rcsys-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("e.txt");
    std::fs::write(
        &good,
        "P : 2 = P^2 - Q/12\nQ : 4 = 4*P*Q - R/3\nR : 6 = 6*P*R - Q^2/2\n",
    )
    .unwrap();
    let out = run(&["sl2check", "--file", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["ok"], true);

    let missing = dir.join("missing.txt");
    assert_eq!(run(&["sl2check", "--file", missing.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
