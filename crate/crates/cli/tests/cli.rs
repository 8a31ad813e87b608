use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn msset(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_msset"))
        .args(args)
        .env_remove("MSSET_BUDGET")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn msset");
    if let Some(bytes) = stdin {
        child.stdin.take().unwrap().write_all(bytes).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn json_line(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().next().expect("a line of output")).expect("json output")
}

fn write_temp(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("msset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn quick_suite_exits_zero() {
    let out = msset(&["suite", "--quick"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_line(&out);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 10);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 10);
}

#[test]
fn shuffle_certificate_round_trips_through_verify() {
    let cert = msset(&["decompose", "shuffle", "1", "2", "2"], None);
    assert_eq!(cert.status.code(), Some(0));
    let out = msset(&["decompose", "verify", "-"], Some(&cert.stdout));
    assert_eq!(out.status.code(), Some(0));
    let report = json_line(&out);
    assert!(report["issues"].as_array().unwrap().is_empty());
    assert!(report["steps"].as_u64().unwrap() > 0);
    // top-level alias
    assert_eq!(msset(&["verify", "-"], Some(&cert.stdout)).status.code(), Some(0));
}

#[test]
fn tampered_certificate_fails_verification() {
    let cert = msset(&["decompose", "spread", "3", "1", "2"], None);
    assert_eq!(cert.status.code(), Some(0));
    let mut v: Value = serde_json::from_slice(&cert.stdout).unwrap();
    let steps = v["steps"].as_array_mut().unwrap();
    assert!(!steps.is_empty());
    steps.pop();
    let out = msset(&["verify", "-"], Some(v.to_string().as_bytes()));
    assert_eq!(out.status.code(), Some(1));
    assert!(!json_line(&out)["issues"].as_array().unwrap().is_empty());
}

#[test]
fn non_associative_table_names_the_triple() {
    let bad = write_temp(
        "bad.json",
        r#"{"objects":["x"],"homs":{"x,x":["f","g"]},"comp":{"f,f":"g","f,g":"f","g,f":"f","g,g":"f"}}"#,
    );
    let out = msset(&["cat", "check", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let v = json_line(&out);
    assert_eq!(v["valid"], false);
    let first = &v["violations"][0];
    assert_eq!(first["kind"], "non_associative");
    for k in ["h", "g", "f"] {
        assert!(first[k].is_string());
    }
}

#[test]
fn group_table_reports_units() {
    let z3 = write_temp(
        "z3.json",
        r#"{"objects":["x"],"homs":{"x,x":["e","a","b"]},"comp":{"e,e":"e","e,a":"a","e,b":"b","a,e":"a","b,e":"b","a,a":"b","a,b":"e","b,a":"e","b,b":"a"}}"#,
    );
    let out = msset(&["cat", "check", z3.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json_line(&out);
    assert_eq!(v["quasi_units"], serde_json::json!(["e"]));
    assert_eq!(v["invertibles"].as_array().unwrap().len(), 3);

    let nerve = msset(&["cat", "nerve", z3.to_str().unwrap(), "--depth", "3", "--marking", "invertibles"], None);
    assert_eq!(nerve.status.code(), Some(0));
    let qu = msset(&["lift", "qu", "-"], Some(&nerve.stdout));
    assert_eq!(qu.status.code(), Some(0));
    let v = json_line(&qu);
    assert_eq!(v["via_rlp"], true);
    assert_eq!(v["direct"], true);

    let h = msset(&["homology", "-"], Some(&nerve.stdout));
    assert_eq!(json_line(&h)[1]["torsion"], serde_json::json!([3]));
}

#[test]
fn budget_exhaustion_exits_two() {
    let poset = write_temp(
        "p2.json",
        r#"{"objects":["a","b"],"homs":{"a,a":["ia"],"b,b":["ib"],"a,b":["u"]},"comp":{"ia,ia":"ia","ib,ib":"ib","u,ia":"u","ib,u":"u"}}"#,
    );
    let out = msset(&["--budget", "10", "kan", "rk", "--cat", poset.to_str().unwrap(), "--n", "2", "--mmax", "4"], None);
    assert_eq!(out.status.code(), Some(2));
    let v = json_line(&out);
    assert_eq!(v["error"], "budget");
    assert!(v["stage"].is_string());

    let ok = msset(&["kan", "counit", "--cat", poset.to_str().unwrap(), "--n", "2", "--mmax", "4"], None);
    assert_eq!(ok.status.code(), Some(0));
    assert!(json_line(&ok)["failures"].as_array().unwrap().is_empty());
}

#[test]
fn bad_input_exits_two() {
    let out = msset(&["decompose", "spread", "2", "0", "0"], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_line(&out)["error"], "rejected");

    let out = msset(&["homology", "-"], Some(b"not json"));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_line(&out)["error"], "parse");

    let out = msset(&["no-such-command"], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_line(&out)["error"], "usage");
}

#[test]
fn lift_check_reads_maps() {
    let point = msset(&["build", "standard", "0"], None);
    let edge = msset(&["build", "standard", "1", "--sharp"], None);
    let (point, edge): (Value, Value) = (serde_json::from_slice(&point.stdout).unwrap(), serde_json::from_slice(&edge.stdout).unwrap());
    let g = serde_json::json!({"source": point, "target": edge, "map": {"0": 1}});
    let p = serde_json::json!({"source": edge, "target": edge, "map": {"0": 0, "1": 1, "2": 2}});
    let g = write_temp("g.json", &g.to_string());
    let p = write_temp("p.json", &p.to_string());
    let out = msset(&["lift", "check", "--left", g.to_str().unwrap(), "--right", p.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_line(&out)["result"], "holds");
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["decompose", "shuffle", "2", "2", "1"][..],
        &["build", "cosk0", "3", "--depth", "3"],
        &["cat", "corpus", "--max-obj", "2", "--max-hom", "1", "--samples", "20", "--seed", "7", "--list"],
    ] {
        let a = msset(args, None);
        let b = msset(args, None);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn dot_output_for_objects() {
    let out = msset(&["--format", "dot", "build", "horn", "2", "1"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("digraph"));
}
