//! End-to-end tests of the `cosrod` binary: exit-code contract, output
//! shapes, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cosrod"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cosrod-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const MINIMAL_GEOMETRY: &str = r#"
[geometry]
length_um = 150.0
width_um = 6.0
height_um = 15.0
"#;

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn analyze_nick_writes_component_and_summary() {
    let dir = workdir("analyze");
    let out = dir.join("component.json");
    let output = run(bin()
        .arg("analyze")
        .arg("--config")
        .arg(repo_config("nick_component.toml"))
        .arg("--out")
        .arg(&out));
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], "1");
    let delta = doc["stiffness_defect_delta"].as_array().unwrap();
    let axial = delta[8][8].as_f64().unwrap();
    assert!(axial < -100.0, "axial defect entry should be strongly negative, got {axial}");

    let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(summary["defect_delta"]["frobenius"].as_f64().unwrap() > 0.0);
    let modal = summary["modal_estimates"].as_array().unwrap();
    assert_eq!(modal.len(), 1);
    assert!(modal[0]["frequency_hz"].as_f64().unwrap() > 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn analyze_without_defects_has_exactly_zero_delta() {
    let dir = workdir("nodefect");
    let cfg = write_config(&dir, "plain.toml", MINIMAL_GEOMETRY);
    let out = dir.join("component.json");
    let output = run(bin().arg("analyze").arg("--config").arg(&cfg).arg("--out").arg(&out));
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for row in doc["stiffness_defect_delta"].as_array().unwrap() {
        for v in row.as_array().unwrap() {
            assert_eq!(v.as_f64().unwrap(), 0.0);
        }
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_defect_geometry_exits_3() {
    let dir = workdir("badgeom");
    let cfg = write_config(
        &dir,
        "bad.toml",
        &format!(
            "{MINIMAL_GEOMETRY}
[[defect]]
name = \"through_cut\"
kind = \"nick\"
position_um = 50.0
depth_um = 6.0
"
        ),
    );
    let output = run(bin()
        .arg("analyze")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("x.json")));
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("invalid geometry"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_toml_exits_2_with_location() {
    let dir = workdir("badtoml");
    let cfg = write_config(&dir, "broken.toml", "[geometry\nlength_um = 150");
    let output = run(bin()
        .arg("analyze")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("x.json")));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line"), "parse error should be line-addressed: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_config_field_exits_2() {
    let dir = workdir("unknownfield");
    let cfg = write_config(
        &dir,
        "unknown.toml",
        "[geometry]\nlength_um = 150.0\nwidth_um = 6.0\nheight_um = 15.0\nbogus = 1.0\n",
    );
    let output = run(bin()
        .arg("analyze")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("x.json")));
    assert_eq!(output.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_reference_cases_report() {
    let dir = workdir("verify");
    let out = dir.join("report.csv");
    let output = run(bin()
        .arg("verify")
        .arg("--config")
        .arg(repo_config("reference_cases.toml"))
        .arg("--out")
        .arg(&out));
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let csv = std::fs::read_to_string(&out).unwrap();
    let provenance: Vec<&str> = csv.lines().filter(|l| l.starts_with('#')).collect();
    assert!(provenance.iter().any(|l| l.contains("config sha256")));
    assert!(provenance.iter().any(|l| l.contains("FEM")));
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "case,f_inf_hz,f_component_hz,percent_error,flags");
    assert_eq!(data.len(), 7, "six case rows: {csv}");
    let row_iv = data.iter().find(|l| l.starts_with("IV,")).unwrap();
    assert!(row_iv.ends_with("beyond-validity"), "case IV must be flagged: {row_iv}");
    let row_v = data.iter().find(|l| l.starts_with("V,")).unwrap();
    assert!(row_v.ends_with(','), "case V must carry no flags: {row_v}");

    // Fit diagnostics: positive slope for every conforming case.
    let fits: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("fits.json")).unwrap())
            .unwrap();
    let cases = fits["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 6);
    for c in cases {
        assert!(
            c["delta_hz_elements"].as_f64().unwrap() > 0.0,
            "delta must be positive: {c}"
        );
        assert_eq!(c["points"].as_array().unwrap().len(), 6);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_is_deterministic() {
    let dir = workdir("determinism");
    let out1 = dir.join("a.csv");
    let out2 = dir.join("b.csv");
    for out in [&out1, &out2] {
        let output = run(bin()
            .arg("verify")
            .arg("--config")
            .arg(repo_config("nick_component.toml"))
            .arg("--out")
            .arg(out));
        assert!(output.status.success());
    }
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
    assert_eq!(
        std::fs::read(out1.with_extension("fits.json")).unwrap(),
        std::fs::read(out2.with_extension("fits.json")).unwrap()
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_single_mesh_ladder_exits_3() {
    let dir = workdir("shortladder");
    let cfg = write_config(
        &dir,
        "one.toml",
        &format!(
            "{MINIMAL_GEOMETRY}
[[case]]
name = \"only\"
fixed_end = \"end2\"

[verify]
elements = [16]
"
        ),
    );
    let output = run(bin()
        .arg("verify")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("r.csv")));
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("extrapolation"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_depth_lowers_frequency_monotonically() {
    let dir = workdir("sweep");
    let out = dir.join("sweep.csv");
    let output = run(bin()
        .arg("sweep")
        .arg("--config")
        .arg(repo_config("nick_component.toml"))
        .arg("--param")
        .arg("depth")
        .arg("--from")
        .arg("0")
        .arg("--to")
        .arg("1.5")
        .arg("--steps")
        .arg("7")
        .arg("--out")
        .arg(&out));
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("param_value"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0], "parameter column must ascend");
        assert!(
            pair[1][1] < pair[0][1],
            "frequency must fall as the nick deepens: {rows:?}"
        );
        assert!(pair[1][2] <= pair[0][2], "axial delta must not increase");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_zero_length_range_gives_single_row() {
    let dir = workdir("sweep0");
    let out = dir.join("sweep.csv");
    let output = run(bin()
        .arg("sweep")
        .arg("--config")
        .arg(repo_config("nick_component.toml"))
        .arg("--param")
        .arg("extent")
        .arg("--from")
        .arg("1.5")
        .arg("--to")
        .arg("1.5")
        .arg("--steps")
        .arg("5")
        .arg("--out")
        .arg(&out));
    assert!(output.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("param_value"))
        .collect();
    assert_eq!(rows.len(), 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_gamma_is_antisymmetric_to_first_order() {
    let dir = workdir("sweepg");
    let out = dir.join("gamma.csv");
    let g = 0.1;
    let output = run(bin()
        .arg("sweep")
        .arg("--config")
        .arg(repo_config("nick_component.toml"))
        .arg("--param")
        .arg("gamma")
        .arg("--from")
        .arg(format!("-{g}"))
        .arg("--to")
        .arg(format!("{g}"))
        .arg("--steps")
        .arg("3")
        .arg("--out")
        .arg(&out));
    assert!(output.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("param_value"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let (f_minus, f_zero, f_plus) = (rows[0][1], rows[1][1], rows[2][1]);
    // Richardson-style check: the even part is second order in gamma.
    let second_order = (f_plus + f_minus - 2.0 * f_zero).abs();
    let first_order = (f_plus - f_minus).abs();
    assert!(
        second_order < 0.02 * first_order,
        "even part {second_order:.3e} vs odd {first_order:.3e}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_sweep_parameter_exits_2() {
    let output = run(bin()
        .arg("sweep")
        .arg("--config")
        .arg(repo_config("nick_component.toml"))
        .arg("--param")
        .arg("taper")
        .arg("--from")
        .arg("0")
        .arg("--to")
        .arg("1")
        .arg("--steps")
        .arg("2")
        .arg("--out")
        .arg("x.csv"));
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn export_matrix_text_round_trips_through_json() {
    let dir = workdir("export");
    let json_out = dir.join("c.json");
    let txt_out = dir.join("c.txt");
    for (fmt, out) in [("json", &json_out), ("matrix-text", &txt_out)] {
        let output = run(bin()
            .arg("export")
            .arg("--config")
            .arg(repo_config("nick_component.toml"))
            .arg("--format")
            .arg(fmt)
            .arg("--out")
            .arg(out));
        assert!(output.status.success());
    }
    // The matrix-text payload must reproduce the JSON matrices bit-exactly
    // through its 17-significant-digit decimals.
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    let text = std::fs::read_to_string(&txt_out).unwrap();
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace().map(|v| v.parse::<f64>().unwrap()))
        .collect();
    assert_eq!(values.len(), 288);
    let ideal = doc["stiffness_ideal"].as_array().unwrap();
    for i in 0..12 {
        for j in 0..12 {
            assert_eq!(values[12 * i + j], ideal[i][j].as_f64().unwrap());
        }
    }
    std::fs::remove_dir_all(&dir).ok();
}
