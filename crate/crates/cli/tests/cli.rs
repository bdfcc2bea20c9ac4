use std::path::PathBuf;
use std::process::{Command, Output};

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn hpcause(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpcause")).args(args).output().unwrap()
}

fn model_arg(name: &str) -> String {
    models().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hpcause-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn billy_is_not_a_cause_when_hits_are_modelled() {
    let o = hpcause(&["check-cause", &model_arg("rock-hits-billy.query")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: not a cause"), "{}", stdout(&o));
    let o = hpcause(&["check-cause", &model_arg("rock-hits-suzy.query")]);
    assert!(stdout(&o).contains("verdict: cause"), "{}", stdout(&o));
}

#[test]
fn gun_original_witness_sets_b_and_c() {
    let o = hpcause(&["check-cause", &model_arg("gun-a-original.query")]);
    let out = stdout(&o);
    assert!(out.contains("verdict: cause"), "{out}");
    assert!(out.contains("W={B, C}"), "{out}");
    // The same query under the updated definition fails.
    let o = hpcause(&["--variant", "updated", "check-cause", &model_arg("gun-a-original.query")]);
    assert!(stdout(&o).contains("verdict: not a cause"), "{}", stdout(&o));
}

#[test]
fn explicit_model_overrides_query_line() {
    let dir = scratch("override");
    std::fs::write(dir.join("q.query"), "context: UA=1, UB=0, UC=1\ncause: C=1\neffect: D=1\n").unwrap();
    let q = dir.join("q.query").display().to_string();
    let o = hpcause(&["check-cause", &q]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = hpcause(&["check-cause", &q, "--model", &model_arg("gun.model")]);
    assert!(stdout(&o).contains("verdict: cause"), "{}", stderr(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_query_reports_position_and_exits_2() {
    let dir = scratch("malformed");
    std::fs::copy(models().join("gun.model"), dir.join("gun.model")).unwrap();
    let text = "model: gun.model\ncontext: UA=1, UB=0, UC=1\ncause: A=1\neffect: (D=1 & )\n";
    std::fs::write(dir.join("bad.query"), text).unwrap();
    let o = hpcause(&["check-cause", &dir.join("bad.query").display().to_string()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.query:4:"), "{err}");
    assert!(err.contains("byte"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_model_exits_3() {
    let dir = scratch("cyclic");
    std::fs::write(
        dir.join("cyc.model"),
        "variables\n  U : exo : {0,1}\n  A : endo : {0,1}\n  B : endo : {0,1}\nequations\n  A := B\n  B := A\n",
    )
    .unwrap();
    std::fs::write(dir.join("cyc.query"), "model: cyc.model\ncontext: U=0\ncause: A=0\neffect: B=0\n").unwrap();
    let o = hpcause(&["check-cause", &dir.join("cyc.query").display().to_string()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn budget_exhaustion_exits_4() {
    let o = hpcause(&["--budget", "50", "responsibility", &model_arg("voting-11-0.query")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
}

#[test]
fn voting_responsibility_is_one_sixth() {
    let o = hpcause(&["responsibility", &model_arg("voting-11-0.query")]);
    assert!(stdout(&o).contains("responsibility: 1/6"), "{}", stdout(&o));
    let o = hpcause(&["responsibility", &model_arg("voting-6-5.query")]);
    assert!(stdout(&o).contains("responsibility: 1/1"), "{}", stdout(&o));
}

#[test]
fn firing_squad_blame_is_one_tenth() {
    let o = hpcause(&[
        "blame",
        &model_arg("firing-squad.state"),
        "--setting",
        "S3=1",
        "--effect",
        "DIE=1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(": 1/10"), "{}", stdout(&o));
}

#[test]
fn enumerate_lists_rock_causes() {
    let o = hpcause(&[
        "--json",
        "enumerate",
        &model_arg("rock-hits.model"),
        "--context",
        "US=1, UB=1",
        "--effect",
        "BS=1",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let causes: Vec<String> = v["result"]["causes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["cause"].to_string())
        .collect();
    assert!(causes.contains(&r#"{"ST":1}"#.to_string()), "{causes:?}");
    assert!(!causes.contains(&r#"{"BT":1}"#.to_string()), "{causes:?}");
}

fn gen_and_check(flag: &str, cqbf: &str, expected: bool) {
    let dir = scratch(&format!("gen{flag}{expected}"));
    std::fs::write(dir.join("f.qbf"), cqbf).unwrap();
    let out = dir.join("out");
    let o = hpcause(&["gen-instance", flag, &dir.join("f.qbf").display().to_string(), &out.display().to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let label = std::fs::read_to_string(out.join("f.expected")).unwrap();
    assert!(label.contains(&format!("expected: {expected}")), "{label}");
    let o = hpcause(&["--json", "check-cause", &out.join("f.query").display().to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["result"];
    let member = if flag == "--sigma2" {
        r["ac1"] == true && r["ac2"] == true
    } else {
        r["ac1"] == true && r["ac3"] == true
    };
    assert_eq!(member, expected, "{v}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn generated_instances_match_their_labels() {
    gen_and_check("--sigma2", "exists x forall y\n(x | y)\n", true);
    gen_and_check("--sigma2", "exists x forall y\n(x & y)\n", false);
    gen_and_check("--pi2", "forall y exists x\n(x | y)\n", true);
    gen_and_check("--pi2", "forall y exists x\n(x & !x)\n", false);
}

#[test]
fn gen_instance_rejects_wrong_prefix() {
    let dir = scratch("prefix");
    std::fs::write(dir.join("f.qbf"), "forall y exists x\n(x | y)\n").unwrap();
    let o = hpcause(&["gen-instance", "--sigma2", &dir.join("f.qbf").display().to_string(), &dir.display().to_string()]);
    assert!(!o.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    for args in [
        vec!["--json", "check-cause", "QUERY"],
        vec!["--json", "responsibility", "QUERY"],
        vec!["--json", "--threads", "1", "responsibility", "QUERY"],
    ] {
        let q = model_arg("conjunctive.query");
        let args: Vec<&str> = args.iter().map(|a| if *a == "QUERY" { q.as_str() } else { a }).collect();
        let a = hpcause(&args);
        let b = hpcause(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        assert!(!stdout(&a).contains("time"));
    }
}

#[test]
fn selftest_passes() {
    let o = hpcause(&["selftest", "--scale", "40", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("selftest: PASS"));
}
