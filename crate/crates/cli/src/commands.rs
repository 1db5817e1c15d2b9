use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde_json::json;
use vecscal_core::decompose::{debye_decompose, debye_synthesize, helmholtz, psi_from_curl, psi_from_l_projection, DebyePotentials};
use vecscal_core::io::{read_field, write_field, Field};
use vecscal_core::multipole::{anapole, form_factors, log_k_grid, siegert_split, toroid_moment, MomentSet, CSV_HEADER};
use vecscal_core::operators as op;
use vecscal_core::sources::SourceSpec;
use vecscal_core::verify::{run, VerifyConfig};
use vecscal_core::{Error, ScalarField, VectorField};

use crate::input::{build_source, load_vector};
use crate::manifest::{manifest_path, ManifestBuilder};
use crate::{DecomposeArgs, DemoArgs, Mode, MomentsArgs, SynthesizeArgs, VerifyArgs};

/// Exit code for an error chain: 2 gauge violation, 3 numerical fit, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        match cause.downcast_ref::<Error>() {
            Some(Error::GaugeViolation { .. }) => return 2,
            Some(Error::Fit(_)) => return 3,
            _ => {}
        }
    }
    1
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn save(dir: &Path, name: &str, field: Field, m: &mut ManifestBuilder) -> Result<()> {
    let path = dir.join(name);
    write_field(&path, &field).with_context(|| format!("writing {}", path.display()))?;
    m.output(path);
    Ok(())
}

fn load(dir: &Path, name: &str) -> Result<Field> {
    let path = dir.join(name);
    read_field(&path).with_context(|| format!("reading {}", path.display()))
}

pub fn decompose(a: &DecomposeArgs) -> Result<ExitCode> {
    let mut m = ManifestBuilder::new("decompose", serde_json::to_value(a)?);
    m.input(a.input.clone());
    let v = load_vector(&a.input, &a.grid)?;
    create_dir(&a.output)?;
    let norm = v.norm();
    let report = match a.mode {
        Mode::Helmholtz => {
            let parts = helmholtz(&v);
            let residual = parts.residual(&v).norm() / norm;
            let cross = parts.cross_inner().norm() / (norm * norm);
            let report = json!({
                "mode": "helmholtz",
                "input_norm": norm,
                "longitudinal_norm": parts.longitudinal.norm(),
                "transverse_norm": parts.transverse.norm(),
                "relative_residual": residual,
                "relative_cross_inner": cross,
                "curl_longitudinal": op::curl(&parts.longitudinal).norm() / norm,
                "div_transverse": op::divergence(&parts.transverse).norm() / norm,
            });
            save(&a.output, "longitudinal.vsf", parts.longitudinal.into(), &mut m)?;
            save(&a.output, "transverse.vsf", parts.transverse.into(), &mut m)?;
            report
        }
        Mode::Debye => {
            let p = debye_decompose(&v, a.tol)?;
            let back = debye_synthesize(&p)?;
            let psi_a = psi_from_l_projection(&v, a.tol)?;
            let psi_b = psi_from_curl(&v, a.tol)?;
            let report = json!({
                "mode": "debye",
                "input_norm": norm,
                "phi_norm": p.phi.norm(),
                "psi_norm": p.psi.norm(),
                "chi_norm": p.chi.norm(),
                "relative_residual": back.sub(&v)?.norm() / norm,
                "psi_route_gap": psi_a.sub(&psi_b)?.norm() / psi_a.norm().max(f64::MIN_POSITIVE),
                "tol": a.tol,
            });
            save(&a.output, "phi.vsf", p.phi.into(), &mut m)?;
            save(&a.output, "psi.vsf", p.psi.into(), &mut m)?;
            save(&a.output, "chi.vsf", p.chi.into(), &mut m)?;
            report
        }
    };
    let path = a.output.join("report.json");
    write_text(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    m.output(path);
    m.finish(&manifest_path(&a.output, true))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

pub fn synthesize(a: &SynthesizeArgs) -> Result<ExitCode> {
    let mut m = ManifestBuilder::new("synthesize", serde_json::to_value(a)?);
    m.input(a.input.display().to_string());
    let v: VectorField = match a.mode {
        Mode::Helmholtz => {
            let l = load(&a.input, "longitudinal.vsf")?.into_vector()?;
            let t = load(&a.input, "transverse.vsf")?.into_vector()?;
            l.add(&t)?
        }
        Mode::Debye => {
            let scalar = |n: &str| -> Result<ScalarField> { Ok(load(&a.input, n)?.into_scalar()?) };
            debye_synthesize(&DebyePotentials {
                phi: scalar("phi.vsf")?,
                psi: scalar("psi.vsf")?,
                chi: scalar("chi.vsf")?,
            })?
        }
    };
    write_field(&a.output, &v.into()).with_context(|| format!("writing {}", a.output.display()))?;
    m.output(a.output.clone());
    m.finish(&manifest_path(&a.output, false))?;
    Ok(ExitCode::SUCCESS)
}

fn k_grid(kmin: f64, kmax: f64, nk: usize) -> Result<Vec<f64>> {
    if nk == 0 || !(kmin > 0.0) || (nk > 1 && !(kmax > kmin)) {
        bail!("wavenumber grid needs nk ≥ 1 and 0 < kmin < kmax (got kmin={kmin}, kmax={kmax}, nk={nk})");
    }
    Ok(log_k_grid(kmin, kmax, nk))
}

fn row(out: &mut String, l: usize, m: i64, key: &str, re: f64, im: f64, q: &str) {
    let _ = writeln!(out, "{l},{m},{key},{re:e},{im:e},{q}");
}

pub fn moments(a: &MomentsArgs) -> Result<ExitCode> {
    let mut man = ManifestBuilder::new("moments", serde_json::to_value(a)?);
    man.input(a.input.clone());
    let j = load_vector(&a.input, &a.grid)?;
    if a.lmax > j.grid.l_max() {
        bail!("--lmax {} exceeds the field's band limit {}", a.lmax, j.grid.l_max());
    }
    let ks = k_grid(a.kmin, a.kmax, a.nk)?;
    let set = MomentSet::compute(&j, a.lmax, a.nmax)?;
    let mut out = set.to_csv();
    for l in 1..=a.lmax {
        for m in -(l as i64)..=l as i64 {
            form_factors(&j, l, m, &ks)?.append_csv(&mut out);
            if !a.no_fit {
                let s = siegert_split(&j, l, m, &ks)?;
                row(&mut out, l, m, "0", s.residual, 0.0, "siegert_residual");
                row(&mut out, l, m, "0", s.t0_fit.re, s.t0_fit.im, "T_limit");
            }
        }
    }
    man.note("l=0 rows are given for Qdot only; M, E and T start at l=1");
    debug_assert!(out.starts_with(CSV_HEADER));
    write_text(&a.output, &out)?;
    man.output(a.output.clone());
    man.finish(&manifest_path(&a.output, false))?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: &VerifyArgs) -> Result<ExitCode> {
    let config = VerifyConfig {
        l_max: a.lmax,
        seed: a.seed,
        tol: a.tol,
        n_trials: a.trials,
        ..VerifyConfig::default()
    };
    let mut man = ManifestBuilder::new("verify", serde_json::to_value(a)?);
    let report = run(a.suite, &config)?;
    print!("{}", report.to_table());
    if let Some(path) = &a.output {
        write_text(path, &report.to_json()?)?;
        man.output(path.clone());
        man.finish(&manifest_path(path, false))?;
    }
    Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

/// Relative divergence above which the demo warns that the torus is under-resolved.
const RESOLUTION_LIMIT: f64 = 1e-9;

pub fn demo_anapole(a: &DemoArgs) -> Result<ExitCode> {
    let mut man = ManifestBuilder::new("demo-anapole", serde_json::to_value(a)?);
    let spec = SourceSpec::toroidal_solenoid(a.major, a.minor, a.sigma);
    man.input(spec.to_string());
    let j = build_source(&spec, &a.grid)?;
    create_dir(&a.output)?;
    let norm = j.norm();
    let div = op::divergence(&j).norm() / norm;
    if div > RESOLUTION_LIMIT {
        man.warn(format!("under-resolved: ‖div J‖/‖J‖ = {div:.2e}; the torus requires a finer grid (--grid-nr, --grid-lmax)"));
    }
    let ks = k_grid(a.kmin, a.kmax, a.nk)?;
    let report = anapole(&j, 3, &ks)?;
    let split = siegert_split(&j, 1, 0, &ks)?;

    let path = a.output.join("moments.csv");
    write_text(&path, &MomentSet::compute(&j, 3, 1)?.to_csv())?;
    man.output(path);

    let mut plot = String::from("k,k2,re_E,im_E,re_T,im_T\n");
    for ((k, e), t) in ks.iter().zip(&split.electric).zip(&split.t_of_k2) {
        let _ = writeln!(plot, "{k:e},{:e},{:e},{:e},{:e},{:e}", k * k, e.re, e.im, t.re, t.im);
    }
    let path = a.output.join("e10.csv");
    write_text(&path, &plot)?;
    man.output(path);

    let t10 = toroid_moment(&j, 1, 0, 0)?;
    let summary = json!({
        "source": spec.to_string(),
        "current_norm": norm,
        "relative_divergence": div,
        "max_qdot": report.max_qdot,
        "max_magnetic": report.max_magnetic,
        "toroid_10": [t10.re, t10.im],
        "slope_10": [report.slope_10.re, report.slope_10.im],
        "slope_mismatch": report.slope_mismatch,
        "nonradiating": report.nonradiating,
    });
    let path = a.output.join("summary.json");
    write_text(&path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    man.output(path);
    man.finish(&manifest_path(&a.output, true))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}
