use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn shannon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shannon"))
        .args(args)
        .env_remove("SHANNON_CONFIG")
        .output()
        .expect("spawn shannon")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn c(name: &str) -> String {
    corpus(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn record(o: &Output) -> Value {
    serde_json::from_str(stdout(o).lines().next().expect("a record")).unwrap()
}

fn bounds(v: &Value) -> (f64, f64) {
    let e = &v["enclosure"];
    (
        e["lo_decimal"].as_str().unwrap().parse().unwrap(),
        e["hi_decimal"].as_str().unwrap().parse().unwrap(),
    )
}

#[test]
fn validate_accepts_the_corpus() {
    for f in ["zero.shn", "sinc.shn", "delta.shn", "delta-inf.shn", "tent.shn", "g-family.shn",
              "q64.shn", "q64-normalized.shn"] {
        let o = shannon(&["validate", &c(f)]);
        assert_eq!(code(&o), 0, "{f}: {}", stderr(&o));
    }
}

#[test]
fn syntax_errors_report_position() {
    let o = shannon(&["validate", &c("unbalanced.shn")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("3:1"), "{}", stderr(&o));
}

#[test]
fn canonical_output_reparses() {
    let o = shannon(&["validate", &c("tent.shn"), "--canonical"]);
    assert_eq!(code(&o), 0);
    let path = scratch("tent-canonical.shn");
    std::fs::write(&path, stdout(&o)).unwrap();
    let again = shannon(&["validate", path.to_str().unwrap(), "--canonical"]);
    assert_eq!(stdout(&again), stdout(&o));
}

#[test]
fn compile_directions_and_refusals() {
    let o = shannon(&["compile", &c("sinc.shn"), "-d", "sample"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("space lp;"));
    let report: Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert_eq!(report["direction"], "sample");
    assert_eq!(report["shift"], 0);

    assert_eq!(code(&shannon(&["compile", &c("delta-inf.shn"), "-d", "interpolate"])), 2);

    let o = shannon(&["compile", &c("delta.shn"), "-d", "interpolate", "--roundtrip", "8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("space Bpi;"));
}

#[test]
fn reconstruction_constant_comes_from_the_table() {
    let text = std::fs::read_to_string(corpus("delta.shn")).unwrap().replace("p 2;", "p 3;");
    let path = scratch("delta3.shn");
    std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&shannon(&["compile", p, "-d", "interpolate"])), 3);
    let o = shannon(&["--constants", &c("constants.toml"), "compile", p, "-d", "interpolate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert_eq!(report["shift"], 2);
}

#[test]
fn compile_writes_output_and_report() {
    let out = scratch("g-sampled.shn");
    let o = shannon(&["compile", &c("g-family.shn"), "-d", "sample", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = out.with_extension("shn.report.json");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(report["direction"], "sample");
    assert_eq!(code(&shannon(&["validate", out.to_str().unwrap()])), 0);
}

#[test]
fn norms_of_corpus_documents() {
    let o = shannon(&["--format", "jsonl", "norm", &c("sinc.shn"), "-q", "peak"]);
    assert_eq!(code(&o), 0);
    let v = record(&o);
    let (lo, hi) = bounds(&v);
    assert!(lo <= 1.0 && 1.0 <= hi && hi - lo < 2e-6);
    assert!(v["element"].is_null());

    assert_eq!(code(&shannon(&["norm", &c("sinc.shn"), "-q", "bibo"])), 4);

    let o = shannon(&["-M", "10", "--format", "jsonl", "norm", &c("q64.shn"), "-q", "bibo"]);
    assert_eq!(code(&o), 0);
    let (lo, hi) = bounds(&record(&o));
    assert!(lo > 3.84 && hi < 3.86, "[{lo}, {hi}]");

    let o = shannon(&["--format", "jsonl", "norm", &c("q64-normalized.shn")]);
    let (lo, hi) = bounds(&record(&o));
    assert!(lo <= 1.0 && 1.0 <= hi);

    let o = shannon(&["--format", "jsonl", "norm", &c("tent.shn")]);
    let (lo, hi) = bounds(&record(&o));
    let want = (5.0f64 / 3.0).sqrt();
    assert!(lo <= want && want <= hi && hi - lo < 1e-5, "[{lo}, {hi}]");
}

#[test]
fn g_witness_holds_for_n_1() {
    let o = shannon(&["witness", "g", "-n", "1"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert_eq!(s.matches(": holds").count(), 3, "{s}");
    assert!(s.contains("space Bpi;"));
}

#[test]
fn divergence_csv_has_one_row_per_n() {
    let o = shannon(&["--format", "csv", "witness", "divergence", "--family", "g", "--n-max", "3"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 4, "{s}");
    assert!(lines[0].starts_with("n,N,"));
    assert!(lines[3].starts_with("3,2^24,"));
}

#[test]
fn gated_loop_is_partial() {
    let o = shannon(&["witness", "gated", "--machine", &c("loop.tm"), "--mode", "pointvalue",
                      "--kmax", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("partial"));
    assert_eq!(s.matches("holds)").count(), 7);
}

#[test]
fn gated_budget_is_enforced() {
    let o = shannon(&["--max-steps", "64", "witness", "gated", "--machine", &c("loop.tm"),
                      "--mode", "pointvalue", "--kmax", "6"]);
    assert_eq!(code(&o), 6);
}

#[test]
fn machines_run() {
    let o = shannon(&["run", &c("halt37.tm"), "--steps", "100"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("37"));
}

#[test]
fn verify_suites_exit_codes() {
    assert_eq!(code(&shannon(&["verify", "lemma3"])), 0);
    assert_eq!(code(&shannon(&["verify", "roundtrip-p2", "--fuzz", "10"])), 0);
    assert_eq!(code(&shannon(&["verify", "refusal", "--fuzz", "10"])), 0);
    assert_eq!(code(&shannon(&["--max-log2-n", "16", "verify", "lemma1"])), 6);
    assert_eq!(code(&shannon(&["verify", "no-such-suite"])), 9);
}

#[test]
fn output_is_deterministic() {
    let g = c("g-family.shn");
    for args in [
        &["--format", "jsonl", "witness", "divergence", "--family", "g", "--n-max", "3"][..],
        &["compile", &g, "-d", "sample"][..],
    ] {
        let a = shannon(args);
        let b = shannon(args);
        assert_eq!(code(&a), 0, "{}", stderr(&a));
        assert_eq!((a.stdout, a.stderr), (b.stdout, b.stderr));
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let path = scratch("cfg.toml");
    std::fs::write(&path, "precision = 8\nformat = \"jsonl\"\n").unwrap();
    let tent = c("tent.shn");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_shannon"))
            .args(extra)
            .args(["norm", &tent])
            .env("SHANNON_CONFIG", &path)
            .output()
            .unwrap()
    };
    let o = run(&[]);
    assert_eq!(record(&o)["M"], 8);
    let o = run(&["-M", "12"]);
    assert_eq!(record(&o)["M"], 12);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&shannon(&["-M", "0", "validate", &c("zero.shn")])), 9);
    assert_eq!(code(&shannon(&["-M", "65", "validate", &c("zero.shn")])), 9);
    assert_eq!(code(&shannon(&["bogus"])), 9);
    assert_eq!(code(&shannon(&["--help"])), 0);
    assert_eq!(code(&shannon(&["validate", "/nonexistent/x.shn"])), 8);
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "precisoin = 3\n").unwrap();
    assert_eq!(code(&shannon(&["--config", bad.to_str().unwrap(), "validate", &c("zero.shn")])), 9);
}
