use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use riskfold::microdata::{read_csv, Schema};

const BIN: &str = env!("CARGO_BIN_EXE_riskfold");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn riskfold(args: &[&str]) -> Output {
    let mut cmd = Command::new(BIN);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("RISKFOLD_")) {
        cmd.env_remove(k);
    }
    cmd.args(args).output().expect("run riskfold")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn small_dataset(dir: &Path) -> (String, String) {
    let schema = "population_size = 5000\n\n[[variables]]\nname = \"sex\"\ncardinality = 2\n\n[[variables]]\nname = \"age\"\ncardinality = 3\n\n[[variables]]\nname = \"region\"\ncardinality = 4\n";
    let mut csv = String::from("sex,age,region\n");
    for k in 0..60u32 {
        csv.push_str(&format!("{},{},{}\n", k % 2, (k / 2) % 3, (k * k + k / 7) % 4));
    }
    let s = dir.join("small.toml");
    let d = dir.join("small.csv");
    std::fs::write(&s, schema).unwrap();
    std::fs::write(&d, csv).unwrap();
    (s.to_str().unwrap().to_string(), d.to_str().unwrap().to_string())
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const ARTIFACTS: [&str; 8] =
    ["models.txt", "models.json", "model.json", "risk.txt", "risk.json", "swap_log.txt", "swap_log.json", "swapped.csv"];

#[test]
fn run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, csv) = small_dataset(tmp.path());
    let out = tmp.path().join("out");
    let o = riskfold(&[
        "run", "--schema", &schema, "--data", &csv, "--header", "--restarts", "8", "--risk-threshold", "0.05",
        "--out-dir", out.to_str().unwrap(),
    ]);
    ok(&o);
    for f in ARTIFACTS {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let models = read(&out, "models.txt");
    for label in ["number of times chosen", "AIC/2", "log likelihood", "degrees of freedom", "cliques", "separators"] {
        assert!(models.contains(label), "{label} missing from\n{models}");
    }
    let risk = read(&out, "risk.txt");
    assert!(risk.contains("estimated # of population uniques"));
    assert!(risk.contains("10^-2 to 10^-3"));

    let swapped = read(&out, "swapped.csv");
    assert!(swapped.starts_with("sex,age,region\n"));
    let schema = Schema::load(Path::new(&schema)).unwrap();
    let before = read_csv(Path::new(&csv), schema.clone(), true).unwrap();
    let after = read_csv(&out.join("swapped.csv"), schema, true).unwrap();
    assert_eq!(before.len(), after.len());
}

#[test]
fn unreadable_data_fails_in_ingest() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, _) = small_dataset(tmp.path());
    let out = tmp.path().join("out");
    let o = riskfold(&["run", "--schema", &schema, "--data", "/nonexistent/data.csv", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage ingest"));
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn domain_errors_exit_one_and_usage_errors_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, _) = small_dataset(tmp.path());
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "0,0,9\n").unwrap();
    let o = riskfold(&["fit", "--schema", &schema, "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain error"));

    assert_eq!(riskfold(&["run", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(riskfold(&["oracle", "count-chordal", "--m", "9"]).status.code(), Some(2));
    let o = riskfold(&["fit", "--schema", &schema, "--data", bad.to_str().unwrap(), "--restarts", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn partial_outputs_are_removed_on_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, csv) = small_dataset(tmp.path());
    let out = tmp.path().join("out");
    // a directory where the risk report should go makes the emit step fail after the model report
    std::fs::create_dir_all(out.join("risk.txt")).unwrap();
    let o = riskfold(&["run", "--schema", &schema, "--data", &csv, "--header", "--restarts", "3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage emit"));
    let left: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("risk.txt")]);
}

#[test]
fn stages_resume_from_the_model_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, csv) = small_dataset(tmp.path());
    let full = tmp.path().join("full");
    ok(&riskfold(&[
        "run", "--schema", &schema, "--data", &csv, "--header", "--restarts", "6", "--seed", "9", "--risk-threshold", "0.05",
        "--out-dir", full.to_str().unwrap(),
    ]));

    let staged = tmp.path().join("staged");
    ok(&riskfold(&["fit", "--schema", &schema, "--data", &csv, "--header", "--restarts", "6", "--seed", "9", "--out-dir", staged.to_str().unwrap()]));
    let mut names: Vec<String> =
        std::fs::read_dir(&staged).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["model.json", "models.json", "models.txt"]);

    let model = staged.join("model.json");
    let m = model.to_str().unwrap();
    ok(&riskfold(&["risk", "--schema", &schema, "--data", &csv, "--header", "--model", m, "--risk-threshold", "0.05", "--out-dir", staged.to_str().unwrap()]));
    ok(&riskfold(&["swap", "--schema", &schema, "--data", &csv, "--header", "--model", m, "--risk-threshold", "0.05", "--out-dir", staged.to_str().unwrap()]));
    for f in ARTIFACTS {
        assert_eq!(read(&full, f), read(&staged, f), "{f} differs");
    }
}

#[test]
fn missing_model_file_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, csv) = small_dataset(tmp.path());
    for cmd in ["risk", "swap"] {
        let o = riskfold(&[cmd, "--schema", &schema, "--data", &csv, "--header", "--model", "/nonexistent/model.json"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("not found"));
    }
}

#[test]
fn environment_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, csv) = small_dataset(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&riskfold(&["fit", "--schema", &schema, "--data", &csv, "--header", "--restarts", "4", "--seed", "77", "--out-dir", a.to_str().unwrap()]));
    let o = Command::new(BIN)
        .args(["fit", "--header", "--restarts", "4"])
        .env("RISKFOLD_SCHEMA", &schema)
        .env("RISKFOLD_DATA", &csv)
        .env("RISKFOLD_SEED", "77")
        .env("RISKFOLD_OUT_DIR", &b)
        .output()
        .unwrap();
    ok(&o);
    assert_eq!(read(&a, "models.json"), read(&b, "models.json"));
    assert!(read(&b, "models.json").contains("\"seed\": 77"));
}

#[test]
fn oracle_subcommands() {
    let o = riskfold(&["oracle", "count-chordal", "--m", "4"]);
    ok(&o);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "61");

    let tmp = tempfile::tempdir().unwrap();
    let prefix = tmp.path().join("s");
    let o = riskfold(&["oracle", "synth", "--cliques", "1,2;3", "--cardinalities", "3,2,4", "--n", "200", "--seed", "5", "--out", prefix.to_str().unwrap()]);
    ok(&o);
    let schema = Schema::load(&prefix.with_extension("toml")).unwrap();
    assert_eq!(schema.population_size(), 20_000);
    let t = read_csv(&prefix.with_extension("csv"), schema, false).unwrap();
    assert_eq!(t.len(), 200);
}

#[test]
fn fifty_record_swap_on_bundled_data() {
    let tmp = tempfile::tempdir().unwrap();
    let (schema, csv) = (data("synthetic.toml"), data("synthetic.csv"));
    let (schema, csv) = (schema.to_str().unwrap(), csv.to_str().unwrap());
    let out = tmp.path().to_str().unwrap();
    ok(&riskfold(&["fit", "--schema", schema, "--data", csv, "--restarts", "10", "--out-dir", out]));
    let model = tmp.path().join("model.json");
    ok(&riskfold(&[
        "swap", "--schema", schema, "--data", csv, "--model", model.to_str().unwrap(), "--risk-threshold", "1e-6",
        "--max-records", "50", "--out-dir", out,
    ]));
    let log: serde_json::Value = serde_json::from_str(&read(tmp.path(), "swap_log.json")).unwrap();
    assert_eq!(log["attempted"], 50);
    let swapped = log["swapped"].as_u64().unwrap();
    assert!(swapped > 25, "only {swapped} of 50 swapped");
    let n = read(tmp.path(), "swapped.csv").lines().count();
    assert_eq!(n, 3000);
}
