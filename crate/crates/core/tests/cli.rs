use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
[grid]
f_start_Hz = 1e8
f_stop_Hz = 2e9
delta_f_Hz = 1e8

[arrays]
n_rx = 4

[fading]
block_len = 64

[run]
trials = 3
power_cdf_freqs_Hz = [1e9, 2e9]
corr_row_freqs_Hz = [1e9, 2e9]
steering_elements = 4
"#;

fn swmimo(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swmimo"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn snr_writes_one_row_per_subchannel_and_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = swmimo(&["snr"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("snr_vs_freq.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema: snr_vs_freq/v1");
    assert_eq!(lines[1], "freq_Hz,trial,snr_dB");
    assert_eq!(lines.len() - 2, 20 * 3);
}

#[test]
fn identical_seed_gives_identical_bytes_and_other_seed_differs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let read = |sub: &str, seed: &str| {
        let out = dir.path().join(format!("{sub}-{seed}"));
        let o = swmimo(&["power-cdf", "--seed", seed], Some(&cfg), &out);
        assert!(o.status.success());
        std::fs::read(out.join("power_cdf.csv")).unwrap()
    };
    let a = read("a", "5");
    assert_eq!(a, read("b", "5"));
    assert_ne!(a, read("c", "6"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = swmimo(&["snr", "--trials", "0"], None, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.trials"));

    let cfg = write_config(dir.path(), "[grid]\nf_stat_Hz = 1e8\n");
    let out = swmimo(&["snr"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("f_stat_Hz"));

    let out = swmimo(&["snr"], Some(&dir.path().join("missing.toml")), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("power_cdf_freqs_Hz = [1e9, 2e9]", "power_cdf_freqs_Hz = [5e9]"));
    let out = swmimo(&["power-cdf"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_passes_on_small_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = swmimo(&["validate", "--regime", "tight"], Some(&cfg), dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS pipeline equivalence"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn schema_lists_every_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = swmimo(&["--schema"], None, dir.path());
    assert!(out.status.success());
    let s = String::from_utf8_lossy(&out.stdout);
    for tag in ["snr_vs_freq/v1", "power_cdf/v1", "steering_profile/v1", "corr_row/v1", "circuit_dump/v1"] {
        assert!(s.contains(tag), "{tag} missing");
    }
    assert!(s.contains("element_index,magnitude,regime,freq_label"));
}

#[test]
fn svg_and_circuit_dump_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = swmimo(&["steering", "--svg", "--dump-circuit"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("steering_profile.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let dump = std::fs::read_to_string(dir.path().join("circuit_dump.csv")).unwrap();
    // 20 frequencies, Z_R and P are 4x4, Z_T and Q are 1x1
    assert_eq!(dump.lines().count(), 2 + 20 * (16 + 1 + 16 + 1));
}
