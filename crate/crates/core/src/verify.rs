//! Verification suites: operator identities, decompositions and multipole checks.
//!
//! Each suite produces [`Check`] rows with a measured value and the threshold it is held to.
//! Reports contain no timing data, so a fixed seed gives byte-identical JSON.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{run_suite, standard_registry, SuiteConfig, Verdict};
use crate::decompose::{
    debye_decompose, debye_synthesize, gauge_field, gauge_field_curl_route, gauge_transport_check, helmholtz,
    psi_from_curl, psi_from_l_projection, uniqueness_construction, Branch, DebyePotentials, GaugeFieldSpec,
};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, C64};
use crate::harmonics::{eval_ylm, spherical_basis, HarmonicIndex};
use crate::multipole::{anapole, log_k_grid, long_wavelength_exponent, qdot_moment, siegert_split, toroid_moment};
use crate::operators as op;
use crate::quadrature::gauss_legendre_on;
use crate::random::{random_scalar, random_vector, rng, Envelope};
use crate::sources::{make_source, SourceSpec};

/// `√(3/4π) π^{3/2}`: charge-rate dipole of `ẑ e^{−r²}`.
pub const DIPOLE_QDOT: f64 = 2.720_699_046_351_327;

/// Direction at which the kernel quadrature is evaluated.
const KERNEL_POINT: (f64, f64) = (1.1, 0.4);

/// Kernel quadrature `(1/4π) ∮ k(r̂·r̂′) Y_lm(r̂′) dω′` at `r̂`, in a frame rotated onto `r̂`.
///
/// The polar angle about `r̂` is `α = π s³`, which tames the logarithm at `α = 0`;
/// `s` uses Gauss–Legendre nodes and the azimuth a uniform rule.
fn kernel_quadrature(idx: HarmonicIndex, theta: f64, phi: f64, kernel: impl Fn(f64) -> f64, n_s: usize, n_beta: usize) -> Result<C64> {
    let [n, e1, e2] = spherical_basis(theta, phi);
    let (s, w) = gauss_legendre_on(n_s, 0.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    for (si, wi) in s.iter().zip(&w) {
        let alpha = PI * si.powi(3);
        let jac = 3.0 * PI * si * si * alpha.sin();
        let kv = kernel(alpha);
        let (sa, ca) = alpha.sin_cos();
        let mut ring = C64::new(0.0, 0.0);
        for b in 0..n_beta {
            let beta = 2.0 * PI * b as f64 / n_beta as f64;
            let (sb, cb) = beta.sin_cos();
            let x: Vec<f64> = (0..3).map(|i| ca * n[i] + sa * (cb * e1[i] + sb * e2[i])).collect();
            let th = x[2].clamp(-1.0, 1.0).acos();
            let ph = x[1].atan2(x[0]);
            ring += eval_ylm(idx, th, ph)?;
        }
        acc += ring * (wi * jac * kv * 2.0 * PI / n_beta as f64);
    }
    Ok(acc / (4.0 * PI))
}

/// `ln(1 − cos α)`, evaluated as `ln 2 + 2 ln sin(α/2)`.
fn log_kernel(alpha: f64) -> f64 {
    std::f64::consts::LN_2 + 2.0 * (0.5 * alpha).sin().ln()
}

/// One degree of the kernel oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub l: usize,
    /// Worst `m` of `(1/4π)∮ ln(1−r̂·r̂′) Y_lm(r̂′) dω′ / Y_lm(r̂)`.
    pub measured: f64,
    pub expected: f64,
    pub error: f64,
    /// `max_m |(1/4π)∮ Y_lm dω′|`: the response to a unit additive kernel constant.
    pub constant_response: f64,
}

/// Compares direct quadrature of the logarithmic kernel with `−1/(l(l+1))` for `1 ≤ l ≤ l_max`.
pub fn kernel_oracle(l_max: usize) -> Result<Vec<KernelRow>> {
    let (theta, phi) = KERNEL_POINT;
    let n_s = 160;
    let n_beta = 2 * l_max + 8;
    let mut rows = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let expected = -1.0 / (l * (l + 1)) as f64;
        let mut worst = expected;
        let mut error = 0.0_f64;
        let mut constant_response = 0.0_f64;
        for m in -(l as i64)..=l as i64 {
            let idx = HarmonicIndex::new(l, m)?;
            let y = eval_ylm(idx, theta, phi)?;
            let got = kernel_quadrature(idx, theta, phi, log_kernel, n_s, n_beta)?;
            let ratio = got / y;
            let e = (ratio - expected).norm() / expected.abs();
            if e >= error {
                error = e;
                worst = ratio.re;
            }
            constant_response = constant_response.max(kernel_quadrature(idx, theta, phi, |_| 1.0, n_s, n_beta)?.norm());
        }
        rows.push(KernelRow {
            l,
            measured: worst,
            expected,
            error,
            constant_response,
        });
    }
    Ok(rows)
}

/// Suite selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Decompose,
    Multipole,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "decompose" => Ok(Suite::Decompose),
            "multipole" => Ok(Suite::Multipole),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite '{other}' (expected algebra, decompose, multipole or all)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub l_max: usize,
    pub seed: u64,
    /// Tolerance for the identity suite.
    pub tol: f64,
    pub n_trials: usize,
    /// Random fields in the Helmholtz round trip.
    pub n_fields: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            l_max: 8,
            seed: 42,
            tol: op::DEFAULT_TOL,
            n_trials: 20,
            n_fields: 50,
        }
    }
}

/// One measured quantity and the bound it must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Failure does not count against the suite.
    pub suspect: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn below(suite: &str, name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            suite: suite.into(),
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value < threshold,
            suspect: false,
            note: None,
        }
    }

    fn above(suite: &str, name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let mut c = Self::below(suite, name, value, threshold);
        c.pass = value.is_finite() && value > threshold;
        c.note = Some("lower bound".into());
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub config: VerifyConfig,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    /// True when every check not tagged suspect passes.
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.suspect)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass && !c.suspect)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Fixed-width text table, one row per check.
    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<10} {:<width$} {:>12} {:>12}  result\n", "suite", "check", "value", "threshold");
        for c in &self.checks {
            let result = match (c.pass, c.suspect) {
                (true, _) => "pass",
                (false, true) => "fail (suspect)",
                (false, false) => "FAIL",
            };
            let _ = writeln!(out, "{:<10} {:<width$} {:>12.3e} {:>12.3e}  {result}", c.suite, c.name, c.value, c.threshold);
        }
        let n_fail = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), n_fail);
        out
    }
}

/// Runs a suite. Deterministic for a fixed configuration.
pub fn run(suite: Suite, config: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Algebra | Suite::All) {
        checks.extend(algebra_checks(config)?);
    }
    if matches!(suite, Suite::Decompose | Suite::All) {
        checks.extend(decompose_checks(config)?);
    }
    if matches!(suite, Suite::Multipole | Suite::All) {
        checks.extend(multipole_checks(config)?);
    }
    Ok(VerifyReport {
        suite,
        config: config.clone(),
        checks,
    })
}

pub fn algebra_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    let suite = SuiteConfig {
        l_max: config.l_max,
        seed: config.seed,
        tol: config.tol,
        n_trials: config.n_trials,
        ..SuiteConfig::default()
    };
    let report = run_suite(&standard_registry(), &suite)?;
    Ok(report
        .reports
        .into_iter()
        .map(|r| Check {
            suite: "algebra".into(),
            name: r.name,
            value: r.max_rel_residual,
            threshold: config.tol,
            pass: r.verdict == Verdict::Pass,
            suspect: r.suspect,
            note: r.note,
        })
        .collect())
}

/// Worst relative `div`, `curl` and route disagreement of gauge fields with `l ≤ l_max`, all `m`.
/// Regular fields live on the unit ball, singular ones on the annulus `[1/4, 1]`.
pub fn gauge_field_residuals(branch: Branch, l_max: usize) -> Result<[f64; 3]> {
    let spec = GridSpec::ball(l_max, 64, 1.0);
    let grid = match branch {
        Branch::Regular => spec.build()?,
        Branch::Singular => spec.with_r_min(0.25).build()?,
    };
    let mut worst = [0.0_f64; 3];
    for l in 1..=l_max {
        for m in -(l as i64)..=l as i64 {
            let spec = GaugeFieldSpec::new(l, m, branch);
            let v = gauge_field(&spec, &grid)?;
            let w = gauge_field_curl_route(&spec, &grid)?;
            let n = v.norm();
            worst[0] = worst[0].max(op::divergence(&v).norm() / n);
            worst[1] = worst[1].max(op::curl(&v).norm() / n);
            worst[2] = worst[2].max(v.sub(&w)?.norm() / n);
        }
    }
    Ok(worst)
}

/// Worst relative Helmholtz residual and cross term over `n` random compact fields.
pub fn helmholtz_residuals(n: usize, seed: u64) -> Result<[f64; 2]> {
    let grid = GridSpec::ball(6, 48, 7.0).build()?;
    let mut r = rng(seed);
    let mut worst = [0.0_f64; 2];
    for _ in 0..n {
        let v = random_vector(&grid, 4, Envelope::Gaussian { width: 1.0 }, true, &mut r);
        let parts = helmholtz(&v);
        let n2 = v.norm();
        worst[0] = worst[0].max(parts.residual(&v).norm() / n2);
        worst[1] = worst[1].max(parts.cross_inner().norm() / (n2 * n2));
    }
    Ok(worst)
}

/// Debye round-trip error and the disagreement of the two `ψ` routes.
pub fn debye_residuals(seed: u64) -> Result<[f64; 2]> {
    let grid = GridSpec::ball(8, 48, 7.0).build()?;
    let mut r = rng(seed);
    let env = Envelope::Gaussian { width: 1.0 };
    let mut pot = DebyePotentials {
        phi: random_scalar(&grid, 8, env, false, &mut r),
        psi: random_scalar(&grid, 8, env, false, &mut r),
        chi: random_scalar(&grid, 8, env, false, &mut r),
    };
    let nh = grid.n_h();
    for j in 0..grid.n_r() {
        pot.psi.coef[j * nh] = C64::new(0.0, 0.0);
        pot.chi.coef[j * nh] = C64::new(0.0, 0.0);
    }
    let v = debye_synthesize(&pot)?;
    let back = debye_synthesize(&debye_decompose(&v, op::DEFAULT_TOL)?)?;
    let a = psi_from_l_projection(&v, op::DEFAULT_TOL)?;
    let b = psi_from_curl(&v, op::DEFAULT_TOL)?;
    Ok([back.sub(&v)?.norm() / v.norm(), a.sub(&b)?.norm() / a.norm()])
}

pub fn decompose_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    const S: &str = "decompose";
    let mut out = Vec::new();
    let l_gauge = config.l_max.min(6);
    for (branch, label) in [(Branch::Regular, "regular"), (Branch::Singular, "singular")] {
        let [div, curl, route] = gauge_field_residuals(branch, l_gauge)?;
        out.push(Check::below(S, format!("gauge {label}: div/norm"), div, 1e-10));
        out.push(Check::below(S, format!("gauge {label}: curl/norm"), curl, 1e-10));
        out.push(Check::below(S, format!("gauge {label}: route disagreement"), route, 1e-10));
    }
    let [res, cross] = helmholtz_residuals(config.n_fields, config.seed)?;
    out.push(Check::below(S, format!("helmholtz residual ({} fields)", config.n_fields), res, 1e-8));
    out.push(Check::below(S, format!("helmholtz cross term ({} fields)", config.n_fields), cross, 1e-8));
    let [round, routes] = debye_residuals(config.seed)?;
    out.push(Check::below(S, "debye round trip", round, 1e-8));
    out.push(Check::below(S, "debye psi routes", routes, 1e-9));
    let rows = kernel_oracle(config.l_max.max(1))?;
    let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    let constant = rows.iter().map(|r| r.constant_response).fold(0.0, f64::max);
    out.push(Check::below(S, "inverse L2 kernel eigenvalues", worst, 1e-6));
    out.push(Check::below(S, "inverse L2 kernel constant response", constant, 1e-12));
    let grid = GridSpec::ball(6, 16, 1.0).build()?;
    let mut worst = 0.0_f64;
    for l in 1..=6 {
        for m in -(l as i64)..=l as i64 {
            worst = worst.max(gauge_transport_check(l, m, &grid)?.residual);
        }
    }
    out.push(Check::below(S, "transport residual (l <= 6)", worst, 1e-9));
    let ratio = gauge_transport_check(1, 0, &grid)?.ratio;
    out.push(Check::below(S, "transport ratio l=1: |ratio + 2|", (ratio + 2.0).abs(), 1e-9));
    let tol = 1e-10;
    let con = uniqueness_construction(4, 24, 0.5, 2.0, tol, config.seed)?;
    out.push(Check::below(S, "uniqueness: constructed field norm", con.field.norm(), 10.0 * tol));
    out.push(Check::below(S, "uniqueness: kernel dimension", con.kernel_dimension as f64, 0.5));
    Ok(out)
}

/// Fitted exponents of the long-wavelength residual for `l = 1, 2, 3`.
pub fn long_wavelength_exponents() -> Result<Vec<f64>> {
    let grid = GridSpec::ball(6, 32, 1.0).build()?;
    (1..=3).map(|l| long_wavelength_exponent(l, 0, &[0.025, 0.05, 0.1, 0.2], &grid)).collect()
}

pub fn multipole_checks(_config: &VerifyConfig) -> Result<Vec<Check>> {
    const S: &str = "multipole";
    let mut out = Vec::new();
    for (l, e) in (1..).zip(long_wavelength_exponents()?) {
        out.push(Check::below(S, format!("long-wavelength exponent l={l}: |e - 2|/2"), (e - 2.0).abs() / 2.0, 0.05));
    }
    let grid = GridSpec::ball(6, 48, 7.0).build()?;
    let j = make_source(&SourceSpec::gaussian_dipole(1.0), &grid)?;
    let q = qdot_moment(&j, 1, 0)?;
    out.push(Check::below(S, "dipole qdot vs oracle", (q.re - DIPOLE_QDOT).abs() / DIPOLE_QDOT, 1e-8));
    let split = siegert_split(&j, 1, 0, &log_k_grid(0.005, 0.04, 12))?;
    out.push(Check::below(S, "siegert E(0) vs qdot", (split.electric0 - DIPOLE_QDOT).norm() / DIPOLE_QDOT, 5e-3));
    let exponent = split.exponent.map_or(f64::INFINITY, |e| (e - 2.0).abs());
    out.push(Check::below(S, "siegert exponent: |e - 2|", exponent, 0.05));
    out.push(Check::below(S, "siegert toroid limit residual", split.residual, 1e-6));
    let grid = GridSpec::ball(8, 64, 3.6).build()?;
    let j = make_source(&SourceSpec::toroidal_solenoid(1.5, 0.0, 0.35), &grid)?;
    let a = anapole(&j, 3, &log_k_grid(0.01, 0.06, 12))?;
    out.push(Check::below(S, "anapole max |qdot| / |J|", a.max_qdot / a.current_norm, 1e-6));
    out.push(Check::below(S, "anapole max |M| / |J|", a.max_magnetic / a.current_norm, 1e-6));
    out.push(Check::above(S, "anapole |T10| / |J|", toroid_moment(&j, 1, 0, 0)?.norm() / a.current_norm, 1e-3));
    out.push(Check::below(S, "anapole slope vs toroid moment", a.slope_mismatch, 0.02));
    Ok(out)
}
