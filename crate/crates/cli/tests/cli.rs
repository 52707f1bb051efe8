use std::process::Command;

fn canon(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_canon"))
        .args(args)
        .output()
        .expect("run canon");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn temp(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("canon-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn gallery_prime_denominator_passes() {
    let (code, out, _) = canon(&["gallery", "run", "--item", "thm2", "--param", "k=273"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("PASS"));
}

#[test]
fn malformed_system_is_a_usage_error() {
    let p = temp("bad.canon", "vars 2\nx1 + = x7\n");
    let (code, _, err) = canon(&["solve", "--in", p.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn missing_input_file_is_a_usage_error() {
    let (code, _, _) = canon(&["solve", "--in", "/nonexistent/sys.canon"]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, _) = canon(&["linear", "probe", "--bogus"]);
    assert_eq!(code, 2);
}

#[test]
fn pair_scan_reports_no_out_of_bound_solutions() {
    let (code, out, _) = canon(&["nonlinear", "pairscan", "--domain", "C"]);
    assert_eq!(code, 0);
    assert!(out.contains("no out-of-bound pair solutions"), "{out}");
}

#[test]
fn solve_prints_unique_solution() {
    let p = temp("two.canon", "vars 2\nx1 = 1\nx1 + x1 = x2\n");
    let (code, out, err) = canon(&["solve", "--in", p.to_str().unwrap(), "--domain", "C"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("(1, 2)"), "{out}");
}

#[test]
fn compile_round_trip_and_json_envelope() {
    let src = temp("sys.poly", "x1^2 - 2*x2 + 1\nx1*x2 - 3\n");
    let dst = src.with_extension("canon");
    let (code, out, err) = canon(&[
        "--format",
        "json",
        "compile",
        "--in",
        src.to_str().unwrap(),
        "--out",
        dst.to_str().unwrap(),
        "--verify",
        "20",
        "--seed",
        "5",
    ]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["kind"], "compile");
    assert_eq!(v["report"]["verification"]["passed"], true);
    assert!(v["config"]["gb_budget"].is_number());
    let text = std::fs::read_to_string(&dst).unwrap();
    assert!(text.contains("vars "));
}

#[test]
fn linear_probe_is_reproducible() {
    let args = ["--format", "json", "linear", "probe", "--n", "4", "--iters", "50", "--seed", "9"];
    let (c1, a, _) = canon(&args);
    let (c2, b, _) = canon(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn omega_of_two() {
    let (code, out, _) = canon(&["nbhd", "omega", "--r", "2", "--max-n", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("omega(2) = 2"), "{out}");
}
