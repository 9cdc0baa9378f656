use std::fs;
use std::path::Path;
use std::process::Command;

use zeno_lab::output::{parse_series, SERIES_HEADER};

fn zeno_lab(cmd: &str, config: &Path, out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zeno-lab"))
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulate_bath_writes_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "# weak coupling\nengine = bath\nn_total = 500\nomega = 100\ndelta = 20\neta = 2\n",
    );
    let out = dir.path().join("p.csv");
    let res = zeno_lab("simulate", &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(SERIES_HEADER));
    let series = parse_series(&text).unwrap();
    assert_eq!(series.len(), 1);
    assert_eq!(series[0].len(), 500);
    assert!(series[0].values().iter().all(|p| (0.0..=1.0).contains(p)));
    assert_eq!(series[0].values()[0], 1.0);
}

#[test]
fn compare_bath_against_master_equation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "engine = bath\nn_total = 500\ndelta = 20\neta = 2\n");
    let out = dir.path().join("cmp.csv");
    let res = zeno_lab("compare", &cfg, &out);
    assert!(res.status.success());

    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("strength,kappa,engine_a,engine_b,max_abs,l2,points")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2], "bath");
    assert_eq!(row[3], "lindblad-closed");
    let max_abs: f64 = row[4].parse().unwrap();
    assert!(max_abs <= 0.05, "max_abs = {max_abs}");
}

#[test]
fn sweep_reports_turning_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "engine = lindblad\neta = 1/8, 1/2, 1, 2, 4, 8, 32\n");
    let out = dir.path().join("sweep.csv");
    let res = zeno_lab("sweep", &cfg, &out);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    let k: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("turning_point_kappa = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((1.0..=4.0).contains(&k), "{k}");

    let table = fs::read_to_string(&out).unwrap();
    assert_eq!(table.lines().count(), 8);
    assert!(table.contains(",zeno\n"));
    assert!(table.contains(",dissipative\n"));
    assert!(table.contains(",critical\n"));
}

#[test]
fn converge_writes_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "engine = collision\neta = 2\nt_ints = 4e-3, 2e-3, 1e-3\n");
    let out = dir.path().join("conv.csv");
    assert!(zeno_lab("converge", &cfg, &out).status.success());
    let table = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "");
    for r in &rows[1..] {
        let ratio: f64 = r[2].parse().unwrap();
        assert!((1.5..=2.5).contains(&ratio));
    }
}

#[test]
fn odd_bath_size_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "engine = bath\nn_total = 501\ndelta = 20\neta = 2\n");
    let out = dir.path().join("p.csv");
    let res = zeno_lab("simulate", &cfg, &out);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 2"));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_is_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "engine = lindblad\nkappa = 2\n");
    let out = dir.path().join("missing").join("p.csv");
    let res = zeno_lab("simulate", &cfg, &out);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_config_is_exit_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let res = zeno_lab("simulate", &dir.path().join("nope.conf"), &dir.path().join("p.csv"));
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn several_strengths_give_one_file_each() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "engine = lindblad\neta = 2, 8, 32\nsamples = 11\n");
    let out = dir.path().join("p.csv");
    assert!(zeno_lab("simulate", &cfg, &out).status.success());
    for eta in ["2", "8", "32"] {
        let text = fs::read_to_string(dir.path().join(format!("p_eta_{eta}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 12);
    }
    assert!(!out.exists());
}

#[test]
fn all_engines_share_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "engine = all\nn_total = 40\ndelta = 20\neta = 8\nt_max = 1\nsamples = 21\nt_int = 1e-2\n",
    );
    let out = dir.path().join("all.csv");
    assert!(zeno_lab("simulate", &cfg, &out).status.success());
    let series = parse_series(&fs::read_to_string(&out).unwrap()).unwrap();
    let tags: Vec<&str> = series.iter().map(|s| s.engine().as_str()).collect();
    assert_eq!(tags, ["bath", "lindblad-closed", "collision"]);
    assert_eq!(series[2].len(), 101);
}
