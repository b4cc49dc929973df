use std::process::{Command, Output};

fn invmean(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invmean")).args(args).env_remove("INVMEAN_TOL").output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn complement_prints_the_value() {
    let out = invmean(&["complement", "--K", "geometric", "--M", "[arith,harm]", "--S", "2", "--x", "1,4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 1.6).abs() < 1e-12);
    assert_eq!(v["mean"]["kind"], "complement");
}

#[test]
fn bitmask_and_list_subsets_agree() {
    let a = invmean(&["complement", "--K", "geo", "--M", "[arith,beta,beta]", "--S", "1,3", "--x", "1,2,3"]);
    let b = invmean(&["complement", "--K", "geo", "--M", "[arith,beta,beta]", "--S", "0b101", "--x", "1,2,3"]);
    assert_eq!(a.stdout, b.stdout);
    assert!((json(&a)["value"].as_f64().unwrap() - 12f64.powf(0.25)).abs() < 1e-12);
}

#[test]
fn emitted_specs_reparse() {
    let out = invmean(&["complement", "--K", "geo", "--M", "[arith,harm]", "--S", "2"]);
    let spec = json(&out)["mean"].to_string();
    let again = invmean(&["eval", "--M", &spec, "--x", "1,4"]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    assert!((json(&again)["value"].as_f64().unwrap() - 1.6).abs() < 1e-12);
}

#[test]
fn unsolvable_completion_exits_two() {
    let out = invmean(&["complete", "--K", "arithmetic", "--fixed", "1=subset(1,2);2=proj(2)", "--x", "0.1,2,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "NoSolutionInRange");

    let json_fixed = r#"{"1":{"kind":"subset_arithmetic","S":[1,2]},"2":{"kind":"projection","i":2}}"#;
    let same = invmean(&["complete", "--K", "arithmetic", "--fixed", json_fixed, "--x", "0.1,2,0.1"]);
    assert_eq!(same.stdout, out.stdout);
}

#[test]
fn non_invariant_kernel_exits_two() {
    let out = invmean(&["complement", "--K", "arith", "--M", "[arith,geo]", "--S", "2", "--x", "1,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "NotInvariant");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(invmean(&[]).status.code(), Some(1));
    assert_eq!(invmean(&["eval", "--M", "[arith,geo]"]).status.code(), Some(1));
    assert_eq!(invmean(&["eval", "--M", "[arith,geo]", "--x", "1,two"]).status.code(), Some(1));
    assert_eq!(invmean(&["complement", "--K", "geo", "--M", "[arith,harm]", "--S", "3"]).status.code(), Some(1));
    assert_eq!(invmean(&["hfam-closure", "--p", "3", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(invmean(&["--version"]).status.code(), Some(0));
}

#[test]
fn hfam_closure_lists_four_vectors() {
    let v = json(&invmean(&["hfam-closure", "--p", "3", "--depth", "1"]));
    assert_eq!(v["count"], 4);
    assert_eq!(v["denominators"]["holds"], true);
    let custom = json(&invmean(&["hfam-closure", "--root", "1,-1"]));
    assert_eq!(custom["count"], 2);
    assert_eq!(invmean(&["hfam-closure", "--root", "1,1"]).status.code(), Some(2));
}

#[test]
fn closure_dot_output() {
    let out = invmean(&["closure", "--K", "geo", "--M", "[arith,harm]", "--format", "dot"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches(" -> ").count(), 1);
}

#[test]
fn iterate_trace_and_out_file() {
    let dir = std::env::temp_dir().join(format!("invmean-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace.csv");
    let out =
        invmean(&["iterate", "--M", "[arith,harm]", "--x", "1,4", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("step,x1,x2\n0,1.0,4.0\n1,2.5,1.6\n"), "{text}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tolerance_from_environment() {
    let base = ["invariance-check", "--K", "arith", "--M", "[arith,geo]", "--samples", "16"];
    let strict = invmean(&base);
    assert_eq!(json(&strict)["invariant"], false);
    let loose = Command::new(env!("CARGO_BIN_EXE_invmean")).args(base).env("INVMEAN_TOL", "10").output().unwrap();
    assert_eq!(json(&loose)["tol"], 10.0);
    assert_eq!(json(&loose)["invariant"], true);
    let bad = Command::new(env!("CARGO_BIN_EXE_invmean")).args(base).env("INVMEAN_TOL", "tiny").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn funceq_negative_case() {
    let out = invmean(&["funceq-verify", "--F", "arith", "--M", "[arith,geo]", "--x", "1,4"]);
    let v = json(&out);
    assert_eq!(v["solution"], false);
    assert!(v["eq2_residual"].as_f64().unwrap() >= 0.1);
    let ok = json(&invmean(&[
        "funceq-verify",
        "--phi",
        "power(2)",
        "--K",
        "geo",
        "--M",
        "[arith,beta,beta]",
        "--samples",
        "32",
    ]));
    assert_eq!(ok["solution"], true);
}
