use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_dimscope");

fn dimscope(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).env_remove("DIMSCOPE_THREADS").args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dimscope(dir, args);
    assert!(out.status.success(), "dimscope {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = dimscope(dir, args);
    assert!(!out.status.success(), "dimscope {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sample_shapes_and_formats() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["sample", "--object", "sierpinski-carpet", "--n", "500", "--seed", "7", "--out", "carpet.bin"]);
    let bytes = std::fs::read(d.join("carpet.bin")).unwrap();
    assert_eq!(&bytes[..4], b"DIMC");
    assert_eq!(bytes.len(), 4 + 4 + 8 + 4 + 500 * 2 * 8);

    ok(
        d,
        &[
            "sample",
            "--object",
            "unit-sphere",
            "--intrinsic-dim",
            "5",
            "--d-target",
            "18",
            "--n",
            "50",
            "--out",
            "s.csv",
        ],
    );
    let text = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 18);
    assert_eq!(text.lines().count(), 51);

    ok(d, &["sample", "--object", "swiss-roll", "--n", "100", "--noise-uniform-frac", "0.2", "--out", "r.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("r.csv")).unwrap().lines().count(), 121);

    // --format overrides the extension.
    ok(d, &["sample", "--object", "unit-cube", "--n", "10", "--format", "bin", "--out", "cube.csv"]);
    assert_eq!(&std::fs::read(d.join("cube.csv")).unwrap()[..4], b"DIMC");
}

#[test]
fn flag_errors_exit_nonzero() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    fails(d, &["sample", "--object", "klein-bottle", "--out", "x.csv"]);
    let e = fails(d, &["sample", "--object", "swiss-roll", "--intrinsic-dim", "3", "--out", "x.csv"]);
    assert!(e.contains("two-dimensional"), "{e}");
    let e = fails(d, &["sample", "--object", "unit-cube", "--n", "5", "--d-target", "2", "--out", "x.csv"]);
    assert!(e.contains("must exceed"), "{e}");
    fails(d, &["sample", "--object", "unit-cube", "--noise-gauss", "-1", "--n", "5", "--out", "x.csv"]);
    fails(d, &["schweinhart", "missing.csv", "--out", "r.json"]);
    fails(d, &["brito-calibrate", "--dims", "9..3", "--out", "c.json"]);
}

#[test]
fn empty_admissible_set_still_succeeds() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["sample", "--object", "unit-cube", "--n", "1500", "--out", "c.csv"]);
    let stdout = ok(d, &["schweinhart", "c.csv", "--gamma", "1e-9", "--out", "r.json", "--csv", "r.csv"]);
    assert!(stdout.contains("no admissible alpha"));
    let r = json(&d.join("r.json"));
    assert_eq!(r["admissible"], Value::Array(vec![]));
    assert_eq!(r["d_min"], Value::Null);
    assert_eq!(r["schema_version"], 1);
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "alpha,d_hat,ci_low,ci_high,admissible");
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn manifests_describe_each_run() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["sample", "--object", "paraboloid", "--n", "800", "--seed", "3", "--out", "p.csv"]);
    ok(d, &["mst-stats", "p.csv", "--out", "m.json", "--edges", "e.csv", "--alpha", "1"]);
    let report = json(&d.join("m.json"));
    assert_eq!(report["manifest"], "m.json.manifest.json");
    assert_eq!(report["n"], 800);
    let m = json(&d.join("m.json.manifest.json"));
    assert_eq!(m["command"], "mst-stats");
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["inputs"][0]["path"], "p.csv");
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    let sample = json(&d.join("p.csv.manifest.json"));
    assert_eq!(sample["seeds"]["seed"], 3);
    assert_eq!(sample["parameters"]["object"], "paraboloid");
    // The input digest recorded by mst-stats is the digest of the sample output.
    assert_eq!(sample["outputs"][0]["sha256"], m["inputs"][0]["sha256"]);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    std::fs::write(d.join("run.conf"), "seed = 11\n[sample]\nobject = \"mobius-strip\"\nn = 300\n").unwrap();
    ok(d, &["--config", "run.conf", "sample", "--out", "a.csv"]);
    ok(d, &["--config", "run.conf", "sample", "--n", "200", "--out", "b.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("a.csv")).unwrap().lines().count(), 301);
    assert_eq!(std::fs::read_to_string(d.join("b.csv")).unwrap().lines().count(), 201);
    let m = json(&d.join("b.csv.manifest.json"));
    assert_eq!(m["config"]["applied"]["seed"], "11");
    assert_eq!(m["parameters"]["n"], 200);
    assert_eq!(m["parameters"]["seed"], 11);

    std::fs::write(d.join("bad.conf"), "sed = 1\n").unwrap();
    let e = fails(d, &["--config", "bad.conf", "sample", "--object", "unit-cube", "--out", "c.csv"]);
    assert!(e.contains("--sed"), "{e}");
}

#[test]
fn threads_env_var_is_the_default() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let out = Command::new(BIN)
        .current_dir(d)
        .env("DIMSCOPE_THREADS", "3")
        .args(["sample", "--object", "unit-cube", "--n", "10", "--out", "c.csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let m = json(&d.join("c.csv.manifest.json"));
    if m["parallel"] == true {
        assert_eq!(m["threads"], 3);
    }
}

#[test]
fn brito_reports_and_calibration_errors() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["brito-calibrate", "--dims", "2..4", "--n-cal", "200", "--L", "6", "--seed", "2", "--out", "cal.json"]);
    let cal = json(&d.join("cal.json"));
    assert_eq!(cal["L"], 6);
    assert_eq!(cal["entries"].as_array().unwrap().len(), 3);
    assert_eq!(cal["entries"][0]["i"], 2);

    ok(d, &["sample", "--object", "mobius-strip", "--n", "600", "--out", "m.csv"]);
    ok(d, &["brito", "m.csv", "--calib", "cal.json", "--sizes", "200,400,600", "--out", "b.json", "--csv", "b.csv"]);
    let b = json(&d.join("b.json"));
    assert_eq!(b["calibration"]["dims"], serde_json::json!([2, 4]));
    assert_eq!(b["curve"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "size,expected_dim,d_bqy");

    let e = fails(d, &["brito", "m.csv", "--calib", "nope.json", "--out", "x.json"]);
    assert!(e.contains("nope.json"), "{e}");
    // A table with a gap in its dimensions is rejected.
    let mut broken = cal.clone();
    broken["entries"].as_array_mut().unwrap().remove(1);
    std::fs::write(d.join("gap.json"), broken.to_string()).unwrap();
    let e = fails(d, &["brito", "m.csv", "--calib", "gap.json", "--out", "x.json"]);
    assert!(e.contains("gap.json"), "{e}");
    fails(d, &["brito", "m.csv", "--calib", "cal.json", "--sizes", "700", "--out", "x.json"]);
}

#[test]
fn embed_and_ngrams_validate_input() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    std::fs::create_dir(d.join("docs")).unwrap();
    std::fs::write(d.join("docs/a.txt"), "the cat sat on the mat\n").unwrap();
    std::fs::write(d.join("docs/b.txt"), "the dog sat on the log\n").unwrap();
    std::fs::write(d.join("docs/c.txt"), "a cat and a dog\n").unwrap();
    std::fs::write(d.join("stop.txt"), "the\non\na\nand\n").unwrap();
    ok(d, &["embed", "docs", "--stopwords", "stop.txt", "--d", "2", "--truncate", "1", "--out", "t.tsv"]);
    let table = std::fs::read_to_string(d.join("t.tsv")).unwrap();
    assert!(table.starts_with("#dim=2 #sigma="));
    assert!(d.join("t.d1.tsv").exists());
    fails(d, &["embed", "docs", "--d", "2", "--truncate", "3", "--out", "u.tsv"]);

    ok(
        d,
        &[
            "ngrams",
            "--table",
            "t.tsv",
            "--corpus",
            "docs",
            "--stopwords",
            "stop.txt",
            "--n",
            "2",
            "--out",
            "g.csv",
            "--keys",
            "g.keys",
        ],
    );
    let keys = std::fs::read_to_string(d.join("g.keys")).unwrap();
    assert_eq!(keys.lines().next(), Some("cat sat"));
    let cloud = std::fs::read_to_string(d.join("g.csv")).unwrap();
    assert_eq!(cloud.lines().count(), keys.lines().count() + 1);
    assert_eq!(cloud.lines().next(), Some("x0,x1,x2,x3"));

    // Every token a stopword: empty vocabulary is an error.
    std::fs::write(d.join("all.txt"), "cat\ndog\nsat\nmat\nlog\nthe\non\na\nand\n").unwrap();
    fails(d, &["embed", "docs", "--stopwords", "all.txt", "--out", "v.tsv"]);
    // No bigram of the corpus is in a one-word table.
    std::fs::write(d.join("one.tsv"), "#dim=1\nzebra\t1.0\n").unwrap();
    let e = fails(d, &["ngrams", "--table", "one.tsv", "--corpus", "docs", "--n", "2", "--out", "h.csv"]);
    assert!(e.contains("no 2-grams"), "{e}");
}
