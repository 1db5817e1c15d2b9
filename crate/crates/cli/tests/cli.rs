use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use vecscal_core::io::{read_field, write_field};
use vecscal_core::random::{random_vector, rng, Envelope};
use vecscal_core::{operators as op, GridSpec, HarmonicIndex, ScalarField, VectorField, C64};

fn vecscal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vecscal")).args(args).output().expect("runs vecscal")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn solenoidal_field() -> VectorField {
    let grid = GridSpec::ball(6, 48, 7.0).build().unwrap();
    let f = ScalarField::from_profile(&grid, HarmonicIndex::new(2, 1).unwrap(), |r| C64::new(r * r * (-r * r).exp(), 0.0));
    op::apply_l(&f)
}

#[test]
fn helmholtz_of_solenoidal_field() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.vsf");
    let v = solenoidal_field();
    write_field(&input, &v.clone().into()).unwrap();
    let out = dir.path().join("out");
    let o = vecscal(&["decompose", "--input", s(&input), "--mode", "helmholtz", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let long = read_field(out.join("longitudinal.vsf")).unwrap().into_vector().unwrap();
    assert!(long.norm() < 1e-9 * v.norm());
    let report = json(&out.join("report.json"));
    assert!(report["relative_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(json(&out.join("manifest.json"))["command"], "decompose");
}

#[test]
fn decompose_synthesize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::ball(6, 48, 7.0).build().unwrap();
    let v = random_vector(&grid, 4, Envelope::Gaussian { width: 1.0 }, true, &mut rng(5));
    let input = dir.path().join("v.vsf");
    write_field(&input, &v.clone().into()).unwrap();
    for mode in ["helmholtz", "debye"] {
        let parts = dir.path().join(mode);
        let o = vecscal(&["decompose", "--input", s(&input), "--mode", mode, "--output", s(&parts)]);
        assert_eq!(code(&o), 0, "{mode}: {}", stderr(&o));
        let back = dir.path().join(format!("{mode}.vsf"));
        let o = vecscal(&["synthesize", "--input", s(&parts), "--mode", mode, "--output", s(&back)]);
        assert_eq!(code(&o), 0, "{mode}: {}", stderr(&o));
        let w = read_field(&back).unwrap().into_vector().unwrap();
        assert!(w.sub(&v).unwrap().norm() < 1e-8 * v.norm(), "{mode}");
        assert!(back.with_file_name(format!("{mode}.vsf.manifest.json")).exists());
    }
}

#[test]
fn debye_gauge_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::ball(4, 24, 2.0).with_r_min(0.5).build().unwrap();
    let radial = ScalarField::from_profile(&grid, HarmonicIndex::new(0, 0).unwrap(), |r| C64::new(1.0 / (r * r), 0.0));
    let zero = ScalarField::zeros(&grid);
    let v = VectorField::from_channels(radial, zero.clone(), zero).unwrap();
    let input = dir.path().join("monopole.vsf");
    write_field(&input, &v.into()).unwrap();
    let o = vecscal(&["decompose", "--input", s(&input), "--mode", "debye", "--output", s(&dir.path().join("out"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("gauge violation"), "{}", stderr(&o));
}

#[test]
fn malformed_input_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.vsf");
    std::fs::write(&input, r#"{"format": "vsf-1", "grid": {"l_max": 2, "n_r": 4, "r_max": 1.0, "n_theta": 3}, "kind": "vector", "data": ""}"#).unwrap();
    let o = vecscal(&["decompose", "--input", s(&input), "--mode", "helmholtz", "--output", s(&dir.path().join("out"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("grid.n_phi"), "{}", stderr(&o));
    let o = vecscal(&["decompose", "--input", s(&dir.path().join("missing.vsf")), "--mode", "helmholtz", "--output", s(&dir.path().join("out"))]);
    assert_eq!(code(&o), 1);
}

fn rows(csv: &str) -> Vec<(usize, i64, String, f64, f64, String)> {
    csv.lines()
        .skip(1)
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            (c[0].parse().unwrap(), c[1].parse().unwrap(), c[2].into(), c[3].parse().unwrap(), c[4].parse().unwrap(), c[5].into())
        })
        .collect()
}

#[test]
fn moments_of_builtin_sources() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dipole.csv");
    let o = vecscal(&["moments", "--input", "builtin:gaussian_dipole?sigma=1", "--lmax", "3", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("l,m,n_or_k,re,im,quantity\n"));
    let q = rows(&text).into_iter().find(|r| r.0 == 1 && r.1 == 0 && r.2 == "0" && r.5 == "Qdot").unwrap();
    assert!((q.3 - 2.720699).abs() < 1e-6, "{q:?}");
    assert!(out.with_file_name("dipole.csv.manifest.json").exists());

    let out = dir.path().join("loop.csv");
    let o = vecscal(&["moments", "--input", "builtin:magnetic_loop", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let all = rows(&std::fs::read_to_string(&out).unwrap());
    let peak = all.iter().map(|r| r.3.hypot(r.4)).fold(0.0, f64::max);
    for r in &all {
        if r.3.hypot(r.4) > 1e-8 * peak {
            assert_eq!(r.5, "M", "{r:?}");
        }
    }
    assert!(all.iter().any(|r| r.5 == "M" && r.0 == 1 && r.1 == 0 && r.3.abs() > 1e-3 * peak));
}

#[test]
fn moments_fit_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = vecscal(&["moments", "--input", "builtin:gaussian_dipole", "--nk", "1", "--output", s(&dir.path().join("m.csv"))]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("fit error"));
}

#[test]
fn unknown_suite_prints_usage() {
    let o = vecscal(&["verify", "--suite", "everything"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = vecscal(&["verify", "--suite", "algebra", "--seed", "42", "--output", s(p)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report = json(&a);
    assert_eq!(report["suite"], "algebra");
    assert!(report["checks"].as_array().unwrap().len() > 50);
}

#[test]
fn anapole_demo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let o = vecscal(&["demo-anapole", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["nonradiating"], true);
    assert!(summary["slope_mismatch"].as_f64().unwrap() < 0.02);

    // Slope at the origin from the plot data alone: extrapolate E/k² linearly in k².
    let plot = std::fs::read_to_string(out.join("e10.csv")).unwrap();
    let pts: Vec<(f64, f64)> = plot
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (c[1], c[2] / c[1])
        })
        .collect();
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[1];
    let slope0 = y0 - x0 * (y1 - y0) / (x1 - x0);
    let t10 = summary["toroid_10"][0].as_f64().unwrap();
    let kappa = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
    assert!((slope0 - kappa * t10).abs() < 0.02 * (kappa * t10).abs(), "{slope0} vs {}", kappa * t10);

    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "demo-anapole");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn thin_torus_warns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let o = vecscal(&["demo-anapole", "--a", "0.4", "--sigma", "0.2", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("under-resolved"), "{}", stderr(&o));
    let o = vecscal(&["demo-anapole", "--R", "3", "--grid-rmax", "3", "--output", s(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn manifest_replays_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = vecscal(&["moments", "--input", "builtin:toroidal_solenoid", "--nmax", "1", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = std::fs::read(&out).unwrap();
    let manifest = json(&out.with_file_name("m.csv.manifest.json"));
    let argv: Vec<String> = manifest["argv"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
    std::fs::remove_file(&out).unwrap();
    let args: Vec<&str> = argv[1..].iter().map(String::as_str).collect();
    assert_eq!(code(&vecscal(&args)), 0);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}
