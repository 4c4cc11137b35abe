mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cimsim(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cimsim"));
    cmd.args(args).env_remove("CIMSIM_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_sweep_config(dir: &Path) -> String {
    let path = dir.join("sweep.toml");
    fs::write(
        &path,
        format!(
            r#"model = "{}"
dataset = "{}"
samples = 60
mappings = ["bnn-v", "bnn-vi"]
adc_bits = ["inf", 3]
alphas = [1.0, 0.3]
sigma_lrs = [0.0]
sigma_hrs = [0.0, 5.0]
currents = [[5.0, 30.0]]
trials = 3
seed = 4
"#,
            common::data("digits_mlp.toml"),
            common::data("digits_test.bin")
        ),
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn infer_reports_accuracy_and_counters() {
    let model = common::data("digits_mlp.toml");
    let data = common::data("digits_test.bin");
    let o = cimsim(
        &["infer", "--model", &model, "--dataset", &data, "--mapping", "bnn-v", "--i-lrs", "30", "--samples", "100", "--compare-host"],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let field = |k: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(k).map(|v| v.trim().to_string()))
            .unwrap_or_else(|| panic!("no {k} in\n{text}"))
    };
    assert_eq!(field("mapping"), "bnn-v");
    assert_eq!(field("samples"), "100");
    assert_eq!(field("accuracy"), field("host_accuracy"));
    assert_eq!(field("writes"), "3");
    assert_eq!(field("mvms"), "300");
}

#[test]
fn sweep_output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_sweep_config(dir.path());
    let one = dir.path().join("one.csv");
    let four = dir.path().join("four.csv");
    let o = cimsim(&["sweep", "--config", &cfg, "--output", one.to_str().unwrap(), "--workers", "1"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = cimsim(
        &["sweep", "--config", &cfg, "--output", four.to_str().unwrap()],
        &[("CIMSIM_WORKERS", "4")],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let a = fs::read(&one).unwrap();
    assert_eq!(a, fs::read(&four).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 16 * 3);
    for side in ["four.summary.csv", "four.dat", "four.timing.csv"] {
        assert!(dir.path().join(side).exists(), "{side}");
    }
    assert_eq!(
        fs::read(dir.path().join("one.summary.csv")).unwrap(),
        fs::read(dir.path().join("four.summary.csv")).unwrap()
    );
}

#[test]
fn verify_model_checks_the_fixture() {
    let o = cimsim(
        &["verify-model", "--model", &common::data("digits_mlp.toml"), "--dataset", &common::data("digits_test.bin")],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("0.969444"), "{}", stdout(&o));
}

#[test]
fn mapping_info_lists_every_scheme() {
    let o = cimsim(&["mapping-info"], &[]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("bnn-vi+cycles") && text.contains("tnn-v+cells"));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let o = cimsim(&["infer", "--model", "/nonexistent/m.toml", "--dataset", "x.bin"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:") && stderr(&o).contains("/nonexistent/m.toml"), "{}", stderr(&o));

    let o = cimsim(&["infer", "--bogus"], &[]);
    assert_eq!(o.status.code(), Some(2));

    let o = cimsim(
        &["infer", "--model", &common::data("digits_mlp.toml"), "--dataset", &common::data("digits_test.bin"), "--alpha", "1.5"],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
}
