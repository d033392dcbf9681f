//! End-to-end checks of the binary: exit codes, the machine-readable error
//! object, file outputs, and report writing.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qcsplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcsplab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn testdata(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(name)
        .display()
        .to_string()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qcsplab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

#[test]
fn solve_exit_codes_carry_the_verdict() {
    let out = qcsplab(&[
        "solve",
        "--structure",
        &testdata("rho.structure.json"),
        "--instance",
        &testdata("forall_exists.txt"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "true");

    let dir = scratch_dir("solve");
    let false_instance = dir.join("false.txt");
    std::fs::write(&false_instance, "A x A y : rho(x,y)\n").expect("write instance");
    let report_path = dir.join("report.json");
    let out = qcsplab(&[
        "solve",
        "--structure",
        &testdata("rho.structure.json"),
        "--instance",
        false_instance.to_str().expect("utf8 path"),
        "--trace",
        "--report",
        report_path.to_str().expect("utf8 path"),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "false");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).expect("report"))
            .expect("json");
    // the recorded witness is the least failing universal pair (0,2)
    let witness = report["payload"]["universal_witness"]
        .as_array()
        .expect("trace recorded");
    assert_eq!(witness[0]["value"], "0");
    assert_eq!(witness[1]["value"], "2");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_files_exit_2_with_an_error_object() {
    let out = qcsplab(&[
        "solve",
        "--structure",
        "/nonexistent/structure.json",
        "--instance",
        "/nonexistent/q.txt",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).expect("stderr is JSON");
    assert_eq!(err["error"]["kind"], "read");
    assert!(err["error"]["path"]
        .as_str()
        .expect("path recorded")
        .contains("/nonexistent/structure.json"));
}

#[test]
fn pi2_mode_restricts_the_universal_block() {
    let dir = scratch_dir("pi2");
    let instance = dir.join("pi2.txt");
    std::fs::write(&instance, "A x A y E z : rho(x,z) & rho(y,z)\n").expect("write");
    let full = qcsplab(&[
        "solve",
        "--structure",
        &testdata("rho.structure.json"),
        "--instance",
        instance.to_str().expect("utf8"),
        "--mode",
        "pi2",
    ]);
    let restricted = qcsplab(&[
        "solve",
        "--structure",
        &testdata("rho.structure.json"),
        "--instance",
        instance.to_str().expect("utf8"),
        "--mode",
        "pi2",
        "--universe",
        "switch:1",
    ]);
    // shrinking the universe can only help, never hurt
    let full_true = full.status.code() == Some(0);
    let restricted_true = restricted.status.code() == Some(0);
    assert!(restricted_true || !full_true);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn decide_tau_smoke() {
    let dir = scratch_dir("decide");
    let instance = dir.join("q.txt");
    std::fs::write(&instance, "A x E y : tau_1(x,x,y)\n").expect("write");
    let out = qcsplab(&[
        "decide-tau",
        "--alpha",
        "0,1",
        "--beta",
        "1,2",
        "--instance",
        instance.to_str().expect("utf8"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "true");

    let universal = dir.join("u.txt");
    std::fs::write(&universal, "A x A y A z : tau_1(x,y,z)\n").expect("write");
    let out = qcsplab(&[
        "decide-tau",
        "--alpha",
        "0,1",
        "--beta",
        "1,2",
        "--instance",
        universal.to_str().expect("utf8"),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn reduce_naesat_writes_sentence_and_structure() {
    let dir = scratch_dir("reduce");
    let out_path = dir.join("q.txt");
    let out = qcsplab(&[
        "reduce-naesat",
        &testdata("triangle.nae"),
        "--cut",
        "0,1:1,2",
        "--out",
        out_path.to_str().expect("utf8"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let sentence = std::fs::read_to_string(&out_path).expect("sentence written");
    assert_eq!(sentence.trim(), "A x A y A z : tau_1(x,y,z)");
    let structure_path = dir.join("q.structure.json");
    let structure_text = std::fs::read_to_string(&structure_path).expect("structure written");
    let s = qcsplab_core::io::parse_structure(&structure_text).expect("parses back");
    assert_eq!(s.relation("tau_1").expect("tau_1").extension.len(), 15);

    // the written pair evaluates end to end: satisfiable source, false target
    let solve = qcsplab(&[
        "solve",
        "--structure",
        structure_path.to_str().expect("utf8"),
        "--instance",
        out_path.to_str().expect("utf8"),
    ]);
    assert_eq!(solve.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn gadget_emits_dnf_and_extension() {
    let out = qcsplab(&[
        "gadget",
        "--cut",
        "0,1:1,2",
        "--kind",
        "rho",
        "--emit",
        "extension",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<&str> = std::str::from_utf8(&out.stdout)
        .expect("utf8")
        .trim()
        .lines()
        .collect();
    assert_eq!(lines.len(), 7);
    assert!(lines.contains(&"(1,1)"));

    let out = qcsplab(&[
        "gadget", "--cut", "0,1:1,2", "--kind", "tau", "--k", "2", "--emit", "dnf",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.trim().split('|').count(), 32);
}

#[test]
fn check_tau_def_and_verify_exit_zero_when_clean() {
    let out = qcsplab(&["check-tau-def", "--cut", "0,1:1,2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = qcsplab(&["verify-powers-sanity"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn pol_counts_idempotent_unaries() {
    let dir = scratch_dir("pol");
    let report_path = dir.join("report.json");
    let out = qcsplab(&[
        "pol",
        "--structure",
        &testdata("rho.structure.json"),
        "--arity",
        "1",
        "--idempotent",
        "--report",
        report_path.to_str().expect("utf8"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).expect("report"))
            .expect("json");
    // the identity is the only idempotent unary operation
    assert_eq!(report["payload"]["count"], 1);
    assert_eq!(
        report["payload"]["operations"][0]["table"],
        serde_json::json!(["0", "1", "2"])
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn collapse_universe_spec_is_accepted() {
    let dir = scratch_dir("collapse");
    let instance = dir.join("pi2.txt");
    std::fs::write(&instance, "A x A y E z : rho(x,z) & rho(y,z)\n").expect("write");
    let out = qcsplab(&[
        "solve",
        "--structure",
        &testdata("rho.structure.json"),
        "--instance",
        instance.to_str().expect("utf8"),
        "--mode",
        "pi2",
        "--universe",
        "collapse:0",
    ]);
    // constants only: the diagonal responses always exist
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn powers_report_has_the_documented_schema() {
    let dir = scratch_dir("powers");
    let report_path = dir.join("report.json");
    let out = qcsplab(&[
        "powers",
        "--algebra",
        &testdata("meet.algebra.json"),
        "--max-m",
        "3",
        "--mode",
        "exact",
        "--report",
        report_path.to_str().expect("utf8"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).expect("report"))
            .expect("json");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], "powers");
    assert_eq!(report["payload"]["rows"][0]["m"], 1);
    assert_eq!(report["payload"]["rows"][0]["f"], 2);
    assert_eq!(report["payload"]["rows"][2]["f"], 4);
    assert_eq!(report["payload"]["hint"], "consistent-with-pgp");
    assert!(report["meta"]["timings_ms"].is_object());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn canonical_reports_the_worked_shape() {
    let dir = scratch_dir("canonical");
    let report_path = dir.join("report.json");
    let out_path = dir.join("canonical.txt");
    let out = qcsplab(&[
        "canonical",
        "--structure",
        &testdata("unary.structure.json"),
        "--m",
        "1",
        "--adversary",
        "full",
        "--out",
        out_path.to_str().expect("utf8"),
        "--report",
        report_path.to_str().expect("utf8"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).expect("report"))
            .expect("json");
    assert_eq!(report["payload"]["product_size"], 16);
    assert_eq!(report["payload"]["universal_count"], 2);
    assert_eq!(report["payload"]["existential_count"], 14);
    let text = std::fs::read_to_string(&out_path).expect("sentence");
    assert!(text.starts_with("A w_1_1 A w_2_1 E "));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn compactness_probe_runs_on_the_family_fixture() {
    let out = qcsplab(&[
        "compactness",
        "--structure",
        &testdata("family.structure.json"),
        "--family",
        "tau",
        "--k-max",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("k=1"));
    assert!(text.contains("forward monotone"));
}
