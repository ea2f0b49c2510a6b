use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fracphase")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn cli")
}

fn tmpdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fracphase-cli-{name}-{}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d
}

fn write_preset(dir: &Path) -> PathBuf {
    let p = dir.join("preset.json");
    fs::write(&p, r#"{"kind":"preset","name":"paper-fig3"}"#).unwrap();
    p
}

fn stdout_str(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sample_preset_shape_and_determinism() {
    let dir = tmpdir("sample");
    let model = write_preset(&dir);
    let args = [
        "sample", "--model", model.to_str().unwrap(), "--n", "1500", "--seed", "7",
    ];
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1501);
    assert_eq!(lines[0], "y1,y2");
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 2);
        for c in cells {
            let v: f64 = c.parse().unwrap();
            assert!(v >= 0.0 && v.is_finite());
        }
    }
    // bit-reproducible under the same seed
    let again = stdout_str(&run(&args));
    assert_eq!(text, again);
    // different sampler still the right shape
    let prod = run(&[
        "sample", "--model", model.to_str().unwrap(), "--n", "10", "--seed", "7",
        "--sampler", "product",
    ]);
    assert!(prod.status.success());
    assert_eq!(stdout_str(&prod).lines().count(), 11);
}

#[test]
fn sample_n_zero_header_only() {
    let dir = tmpdir("zero");
    let model = write_preset(&dir);
    let out_path = dir.join("empty.csv");
    let out = run(&[
        "sample", "--model", model.to_str().unwrap(), "--n", "0", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&out_path).unwrap(), "y1,y2\n");
}

#[test]
fn malformed_model_exits_one() {
    let dir = tmpdir("bad");
    let model = dir.join("bad.json");
    fs::write(&model, r#"{"kind":"ph","pi":[1.0],"T":[[2.0]]}"#).unwrap();
    let out = run(&["sample", "--model", model.to_str().unwrap(), "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    // unreadable path is an i/o failure
    let out = run(&["sample", "--model", dir.join("absent.json").to_str().unwrap(), "--n", "5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn density_grid_and_zero_floor() {
    let dir = tmpdir("density");
    let model = dir.join("fph.json");
    fs::write(&model, r#"{"kind":"fph","alpha":0.6,"pi":[1.0],"T":[[-1.0]]}"#).unwrap();
    let out = run(&["density", "--model", model.to_str().unwrap(), "--grid", "0:2:5"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,f");
    assert_eq!(lines.len(), 6);
    // grid touching 0 starts at the floor instead (density diverges at 0)
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 1e-4);
    assert!(first[1].parse::<f64>().unwrap().is_finite());
}

#[test]
fn density_bivariate_grid() {
    let dir = tmpdir("density2");
    let model = write_preset(&dir);
    let out = run(&[
        "density", "--model", model.to_str().unwrap(), "--grid", "0:4:5,0:4:5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,f");
    assert_eq!(lines.len(), 1 + 25);
    // frozen spot value appears on a grid through (1, 2)
    let row = lines
        .iter()
        .find(|l| l.starts_with("1,2,") || l.starts_with("1.0,2.0,"))
        .expect("grid point (1,2) present");
    let f: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((f - 0.023512334810987394).abs() < 1e-8, "{f}");
}

#[test]
fn laplace_at_zero_prints_initial_mass() {
    let dir = tmpdir("laplace");
    let model = write_preset(&dir);
    let out = run(&[
        "laplace", "--model", model.to_str().unwrap(), "--theta", "0,0", "--theta", "1,1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta1,theta2,L");
    let l0: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((l0 - 1.0).abs() < 1e-12, "L(0) = {l0}");
    let l1: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!((l1 - 0.30903924001828488).abs() < 1e-12);
}

#[test]
fn project_round_trip() {
    let dir = tmpdir("project");
    let model = write_preset(&dir);
    let reduced = dir.join("reduced.json");
    let out = run(&[
        "project", "--model", model.to_str().unwrap(), "--w", "1,1", "--out",
        reduced.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&reduced).unwrap();
    assert!(text.contains("\"kind\": \"fph\""));
    assert!(text.contains("\"atom\""));
    // reloaded reduced model evaluates identically to in-process projection
    let lap = run(&[
        "laplace", "--model", reduced.to_str().unwrap(), "--theta", "0.5", "--theta", "2",
    ]);
    assert!(lap.status.success(), "{}", String::from_utf8_lossy(&lap.stderr));
    use fracphase::model::{Model, ModelFile};
    let m = ModelFile::from_json(&fs::read_to_string(&reduced).unwrap())
        .unwrap()
        .build()
        .unwrap();
    let direct = ModelFile::Preset { name: "paper-fig3".into() }.build().unwrap();
    let proj = direct.as_mpha().unwrap().project(&[1.0, 1.0]).unwrap();
    let Model::Fph(re) = m else { panic!("expected fph") };
    for u in [0.1, 0.5, 1.0, 3.0] {
        assert!(
            (re.laplace(u).unwrap() - proj.dist.laplace(u).unwrap()).abs() < 1e-12,
            "u={u}"
        );
    }
    // identity projection of a univariate model reproduces it
    let uni = dir.join("uni.json");
    fs::write(
        &uni,
        r#"{"kind":"mpha","alpha":0.8,"pi":[0.5,0.5],"T":[[-2.0,1.0],[0.0,-3.0]],"R":[[1.0],[1.0]]}"#,
    )
    .unwrap();
    let red2 = dir.join("uni-reduced.json");
    let out = run(&[
        "project", "--model", uni.to_str().unwrap(), "--w", "1", "--out",
        red2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&red2).unwrap();
    let mf = ModelFile::from_json(&text).unwrap();
    match mf {
        ModelFile::Fph { alpha, pi, t, atom } => {
            assert_eq!(alpha, 0.8);
            assert_eq!(pi, vec![0.5, 0.5]);
            assert_eq!(t, vec![vec![-2.0, 1.0], vec![0.0, -3.0]]);
            assert_eq!(atom, Some(0.0));
        }
        _ => panic!("expected fph"),
    }
}

#[test]
fn verify_fast_suite_passes() {
    let dir = tmpdir("verify");
    let model = write_preset(&dir);
    let report_path = dir.join("reports.ndjson");
    let out = run(&[
        "verify", "--model", model.to_str().unwrap(), "--suite", "fast", "--seed", "5",
        "--out", report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&report_path).unwrap();
    let mut names = Vec::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true, "{line}");
        names.push(v["check"].as_str().unwrap().to_string());
    }
    for expected in ["kolmogorov", "laplace", "sampler_agreement", "projection"] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
}

#[test]
fn verify_non_fractional_model_is_validation_error() {
    let dir = tmpdir("verify-bad");
    let model = dir.join("mph.json");
    fs::write(
        &model,
        r#"{"kind":"mph","pi":[1.0],"T":[[-1.0]],"R":[[1.0]]}"#,
    )
    .unwrap();
    let out = run(&["verify", "--model", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
