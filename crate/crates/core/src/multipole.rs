//! Multipole form factors and moments of a current density.
//!
//! Channel projections use the vector harmonics
//! `Y_{l,l−1} = (l e_R + λ e_S)/√(l(2l+1))`, `Y_{ll} = e_T`,
//! `Y_{l,l+1} = (−(l+1) e_R + λ e_S)/√((l+1)(2l+1))`, so that
//! `a_{l,l'}(k) = ∫ j_{l'}(kr) Y*_{l l' m}·J d³r` reduces to radial quadrature of channel coefficients.
//!
//! Form factors are normalized so that they tend to moments as `k → 0`:
//!
//! | quantity | definition | `k → 0` |
//! |---|---|---|
//! | `M(k²)` | `(2l+1)!!/k^l · a_{l,l}` | `∫ r^l Y*_{ll}·J` |
//! | `Q̇(k²)` | `(2l+1)!!/k^{l−1} · G` | `∫ ∇(r^l Y*_lm)·J` |
//! | `E(k²)` | `(2l+1)!! √(l/(l+1))/k^{l−1} · P` | `Q̇(0)` |
//!
//! with `P = (√(l+1) a₋ − √l a₊)/√(2l+1)` and `G = (√l a₋ + √(l+1) a₊)/√(2l+1)`.
//! The 2×2 map `(a₋, a₊) ↦ (P, G)` is a rotation; `kG = ∫ ∇(j_l Y*_lm)·J`, so `G`
//! is the longitudinal channel and vanishes identically for divergence-free currents.
//! `E(k²) = Q̇(0) + k² T(k²)` with
//! `T(0) = κ_l · T^{(0)}_lm`, `κ_l = √((2l+1)/4π)`, where `T^{(2n)}_lm` is
//! [`toroid_moment`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Channel, ScalarField, SphericalGrid, VectorField, C64};
use crate::harmonics::{double_factorial, spherical_bessel_j, HarmonicIndex};
use crate::operators as op;

fn lambda(l: usize) -> f64 {
    ((l * (l + 1)) as f64).sqrt()
}

/// Relation between [`toroid_moment`] and the `k²` coefficient of `E_lm(k²)`.
pub fn toroid_convention_factor(l: usize) -> f64 {
    ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()
}

fn channel_profiles(j: &VectorField, h: usize) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
    (j.channel(Channel::R).profile(h), j.channel(Channel::S).profile(h), j.channel(Channel::T).profile(h))
}

/// `Σ_j w_j r_j² g(r_j) c_j`.
fn radial_integral(grid: &SphericalGrid, weight: impl Fn(f64) -> f64, values: &[C64]) -> C64 {
    (0..grid.n_r()).map(|j| values[j] * (grid.volume_weight(j) * weight(grid.r_nodes[j]))).sum()
}

fn index(j: &VectorField, l: usize, m: i64) -> Result<usize> {
    let idx = HarmonicIndex::new(l, m)?;
    if l > j.grid.l_max() {
        return Err(Error::Domain(format!("degree {l} exceeds grid band {}", j.grid.l_max())));
    }
    Ok(idx.flat())
}

/// Angular projection `∮ Y*_{l l' m}·J dω` as a radial profile.
fn angular_projection(j: &VectorField, l: usize, m: i64, lp: usize) -> Result<Vec<C64>> {
    let h = index(j, l, m)?;
    let (r, s, t) = channel_profiles(j, h);
    let lf = l as f64;
    let lam = lambda(l);
    let n = j.grid.n_r();
    if lp == l {
        return Ok(t);
    }
    if l == 0 {
        return if lp == 1 { Ok(r.iter().map(|x| -x).collect()) } else { Err(Error::Domain(format!("no channel l'={lp} for l=0"))) };
    }
    let (cr, cs) = if lp + 1 == l {
        let nrm = (lf * (2.0 * lf + 1.0)).sqrt();
        (lf / nrm, lam / nrm)
    } else if lp == l + 1 {
        let nrm = ((lf + 1.0) * (2.0 * lf + 1.0)).sqrt();
        (-(lf + 1.0) / nrm, lam / nrm)
    } else {
        return Err(Error::Domain(format!("l'={lp} is not one of l−1, l, l+1 for l={l}")));
    };
    Ok((0..n).map(|k| r[k] * cr + s[k] * cs).collect())
}

/// `a_{l,l'}(k) = ∫ j_{l'}(kr) Y*_{l l' m}(r̂)·J(r) d³r`.
pub fn channel_projection(j: &VectorField, l: usize, m: i64, lp: usize, k: f64) -> Result<C64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let prof = angular_projection(j, l, m, lp)?;
    Ok(radial_integral(&j.grid, |r| spherical_bessel_j(lp, k * r), &prof))
}

/// `M`, `E`, `Q̇` over a wavenumber grid for one `(l, m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormFactorTable {
    pub l: usize,
    pub m: i64,
    pub k: Vec<f64>,
    pub magnetic: Vec<C64>,
    pub electric: Vec<C64>,
    pub qdot: Vec<C64>,
}

fn check_k_grid(k_grid: &[f64]) -> Result<()> {
    if k_grid.is_empty() {
        return Err(Error::Domain("empty wavenumber grid".into()));
    }
    if k_grid.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return Err(Error::Domain("wavenumbers must be positive and finite".into()));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("wavenumber grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Form factors of degree `l ≥ 1`.
pub fn form_factors(j: &VectorField, l: usize, m: i64, k_grid: &[f64]) -> Result<FormFactorTable> {
    if l == 0 {
        return Err(Error::Domain("form factors need l ≥ 1".into()));
    }
    check_k_grid(k_grid)?;
    let lf = l as f64;
    let s = (2.0 * lf + 1.0).sqrt();
    let df = double_factorial(2 * l as i64 + 1);
    let minus = angular_projection(j, l, m, l - 1)?;
    let plus = angular_projection(j, l, m, l + 1)?;
    let tor = angular_projection(j, l, m, l)?;
    let mut table = FormFactorTable {
        l,
        m,
        k: k_grid.to_vec(),
        magnetic: Vec::new(),
        electric: Vec::new(),
        qdot: Vec::new(),
    };
    for &k in k_grid {
        let am = radial_integral(&j.grid, |r| spherical_bessel_j(l - 1, k * r), &minus);
        let ap = radial_integral(&j.grid, |r| spherical_bessel_j(l + 1, k * r), &plus);
        let at = radial_integral(&j.grid, |r| spherical_bessel_j(l, k * r), &tor);
        let p = (am * (lf + 1.0).sqrt() - ap * lf.sqrt()) / s;
        let g = (am * lf.sqrt() + ap * (lf + 1.0).sqrt()) / s;
        let kl1 = k.powi(l as i32 - 1);
        table.magnetic.push(at * (df / (kl1 * k)));
        table.electric.push(p * (df * (lf / (lf + 1.0)).sqrt() / kl1));
        table.qdot.push(g * (df / kl1));
    }
    Ok(table)
}

/// `Q̇^{(2n)}_lm = (−1/2)^n (2l+1)!!/(2l+2n+1)!! ∫ ∇(r^{l+2n} Y*_lm)·J d³r`; `n = 0` is `Q̇_lm(0)`.
pub fn qdot_radius(j: &VectorField, l: usize, m: i64, n: usize) -> Result<C64> {
    let h = index(j, l, m)?;
    let (r, s, _) = channel_profiles(j, h);
    let p = (l + 2 * n) as i32;
    let lam = lambda(l);
    let vals: Vec<C64> = (0..j.grid.n_r()).map(|k| r[k] * p as f64 + s[k] * lam).collect();
    let integral = radial_integral(&j.grid, |x| x.powi(p - 1), &vals);
    let pref = (-0.5_f64).powi(n as i32) * double_factorial(2 * l as i64 + 1) / double_factorial((2 * l + 2 * n + 1) as i64);
    Ok(integral * pref)
}

/// `Q̇_lm = ∫ ∇(r^l Y*_lm)·J d³r`, the charge-moment rate by continuity.
pub fn qdot_moment(j: &VectorField, l: usize, m: i64) -> Result<C64> {
    qdot_radius(j, l, m, 0)
}

/// `M_lm(0) = ∫ r^l Y*_{llm}·J d³r`.
pub fn magnetic_moment(j: &VectorField, l: usize, m: i64) -> Result<C64> {
    let prof = angular_projection(j, l, m, l)?;
    Ok(radial_integral(&j.grid, |r| r.powi(l as i32), &prof))
}

/// `T^{(2n)}_lm = −√(πl)/(2l+1) ∫ r^{l+2n+1} [Y*_{l,l−1,m} + 2√(l/(l+1))/(2l+3) Y*_{l,l+1,m}]·J d³r`.
///
/// The vector harmonics are direction-only; the radial dependence is the explicit power.
pub fn toroid_moment(j: &VectorField, l: usize, m: i64, n: usize) -> Result<C64> {
    if l == 0 {
        return Err(Error::Domain("toroid moments need l ≥ 1".into()));
    }
    let lf = l as f64;
    let minus = angular_projection(j, l, m, l - 1)?;
    let plus = angular_projection(j, l, m, l + 1)?;
    let c = 2.0 * (lf / (lf + 1.0)).sqrt() / (2.0 * lf + 3.0);
    let vals: Vec<C64> = minus.iter().zip(&plus).map(|(a, b)| a + b * c).collect();
    let integral = radial_integral(&j.grid, |r| r.powi((l + 2 * n + 1) as i32), &vals);
    Ok(integral * (-(PI * lf).sqrt() / (2.0 * lf + 1.0)))
}

/// Moments collected over `l ≤ l_max`, all `m`, radii `n ≤ n_max`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// `Q̇^{(2n)}_lm` keyed by `(l, m, n)`.
    pub qdot: BTreeMap<(usize, i64, usize), C64>,
    /// `M_lm(0)` keyed by `(l, m)`.
    pub magnetic: BTreeMap<(usize, i64), C64>,
    /// `T^{(2n)}_lm` keyed by `(l, m, n)`, `l ≥ 1`.
    pub toroid: BTreeMap<(usize, i64, usize), C64>,
}

impl MomentSet {
    pub fn compute(j: &VectorField, l_max: usize, n_max: usize) -> Result<Self> {
        let mut set = MomentSet::default();
        for l in 0..=l_max.min(j.grid.l_max()) {
            for m in -(l as i64)..=l as i64 {
                for n in 0..=n_max {
                    set.qdot.insert((l, m, n), qdot_radius(j, l, m, n)?);
                    if l >= 1 {
                        set.toroid.insert((l, m, n), toroid_moment(j, l, m, n)?);
                    }
                }
                if l >= 1 {
                    set.magnetic.insert((l, m), magnetic_moment(j, l, m)?);
                }
            }
        }
        Ok(set)
    }

    pub fn qdot0(&self, l: usize, m: i64) -> Option<C64> {
        self.qdot.get(&(l, m, 0)).copied()
    }

    /// CSV with columns `l,m,n_or_k,re,im,quantity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        for ((l, m, n), v) in &self.qdot {
            push_row(&mut out, *l, *m, &n.to_string(), *v, "Qdot");
        }
        for ((l, m), v) in &self.magnetic {
            push_row(&mut out, *l, *m, "0", *v, "M");
        }
        for ((l, m, n), v) in &self.toroid {
            push_row(&mut out, *l, *m, &n.to_string(), *v, "T");
        }
        out
    }
}

pub const CSV_HEADER: &str = "l,m,n_or_k,re,im,quantity\n";

fn push_row(out: &mut String, l: usize, m: i64, key: &str, v: C64, q: &str) {
    let _ = writeln!(out, "{l},{m},{key},{:e},{:e},{q}", v.re, v.im);
}

impl FormFactorTable {
    /// CSV with columns `l,m,n_or_k,re,im,quantity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        self.append_csv(&mut out);
        out
    }

    pub fn append_csv(&self, out: &mut String) {
        for (q, vals) in [("M", &self.magnetic), ("E", &self.electric), ("Qdot", &self.qdot)] {
            for (k, v) in self.k.iter().zip(vals.iter()) {
                push_row(out, self.l, self.m, &format!("{k:e}"), *v, q);
            }
        }
    }
}

/// Least-squares fit of `Σ_{i≤degree} c_i (k²)^i` over the smallest `points` wavenumbers.
pub fn even_fit(k: &[f64], values: &[C64], degree: usize, points: usize) -> Result<Vec<C64>> {
    let n = points.min(k.len());
    if n < degree + 1 {
        return Err(Error::Fit(format!("{n} wavenumbers cannot determine a degree-{degree} fit in k²")));
    }
    let scale = k[n - 1] * k[n - 1];
    let a = DMatrix::from_fn(n, degree + 1, |i, p| (k[i] * k[i] / scale).powi(p as i32));
    let svd = a.clone().svd(true, true);
    let cond = svd.singular_values.max() / svd.singular_values.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::Fit(format!("ill-conditioned k² fit (condition {cond:.2e})")));
    }
    let solve = |v: DVector<f64>| svd.solve(&v, 1e-14).map_err(|e| Error::Fit(e.to_string()));
    let re = solve(DVector::from_iterator(n, values[..n].iter().map(|c| c.re)))?;
    let im = solve(DVector::from_iterator(n, values[..n].iter().map(|c| c.im)))?;
    Ok((0..=degree).map(|p| C64::new(re[p], im[p]) / scale.powi(p as i32)).collect())
}

/// Number of low-k points and polynomial degree used for `k → 0` limits.
pub const FIT_POINTS: usize = 8;
pub const FIT_DEGREE: usize = 3;
/// Largest admissible `k_min · r_max` for a `k → 0` extrapolation.
pub const MAX_LOW_KR: f64 = 0.3;

/// Slope of `log|y|` against `log k` by least squares.
pub fn log_slope(k: &[f64], y: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = k.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Fit("need at least two nonzero points for a log-log slope".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate wavenumber spread".into()));
    }
    Ok(sxy / sxx)
}

/// `E_lm(k²) = Q̇_lm(0) + k² T_lm(k²)`, evaluated on a wavenumber grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiegertSplit {
    pub l: usize,
    pub m: i64,
    pub k: Vec<f64>,
    pub electric: Vec<C64>,
    /// `Q̇_lm(0)` from the moment integral.
    pub qdot0: C64,
    /// `k → 0` limit of `E_lm(k²)` from the even fit.
    pub electric0: C64,
    /// `(E − Q̇(0))/k²`.
    pub t_of_k2: Vec<C64>,
    /// `k → 0` limit of `T(k²)` from the even fit.
    pub t0_fit: C64,
    /// `κ_l T^{(0)}_lm` from the toroid integral.
    pub t0_moment: C64,
    /// `|t0_fit − t0_moment| / max(|t0_fit|, |t0_moment|, ε·scale)`.
    pub residual: f64,
    /// Fitted exponent of `|E − Q̇(0)|` against `k` over the low-k points;
    /// `None` when `E − Q̇(0)` vanishes to rounding.
    pub exponent: Option<f64>,
}

/// Splits `E_lm` into its charge and toroid parts and cross-checks the toroid limit.
pub fn siegert_split(j: &VectorField, l: usize, m: i64, k_grid: &[f64]) -> Result<SiegertSplit> {
    check_k_grid(k_grid)?;
    let kr = k_grid[0] * j.grid.spec.r_max;
    if kr > MAX_LOW_KR {
        return Err(Error::Fit(format!("smallest k·r_max = {kr:.3} exceeds {MAX_LOW_KR}; k → 0 limit not resolved")));
    }
    if k_grid.len() < FIT_DEGREE + 1 {
        return Err(Error::Fit(format!("{} wavenumbers are too few for the k → 0 fit", k_grid.len())));
    }
    let table = form_factors(j, l, m, k_grid)?;
    let qdot0 = qdot_moment(j, l, m)?;
    let t_of_k2: Vec<C64> = table.electric.iter().zip(k_grid).map(|(e, k)| (e - qdot0) / (k * k)).collect();
    let electric0 = even_fit(k_grid, &table.electric, FIT_DEGREE, FIT_POINTS)?[0];
    let t0_fit = even_fit(k_grid, &t_of_k2, FIT_DEGREE, FIT_POINTS)?[0];
    let t0_moment = toroid_moment(j, l, m, 0)? * toroid_convention_factor(l);
    let scale = j.norm() * j.grid.spec.r_max.powi(l as i32 + 3);
    let residual = (t0_fit - t0_moment).norm() / t0_fit.norm().max(t0_moment.norm()).max(1e-300_f64.max(1e-14 * scale));
    let n = FIT_POINTS.min(k_grid.len());
    let size = table.electric.iter().fold(qdot0.norm(), |m, e| m.max(e.norm()));
    let floor = 1e-12 * size.max(j.norm() * j.grid.spec.r_max.powf(l as f64 - 0.5));
    let gaps: Vec<f64> = table.electric[..n].iter().map(|e| (e - qdot0).norm()).map(|g| if g > floor { g } else { 0.0 }).collect();
    let exponent = if gaps.iter().filter(|g| **g > 0.0).count() >= 2 { Some(log_slope(&k_grid[..n], &gaps)?) } else { None };
    Ok(SiegertSplit {
        l,
        m,
        k: k_grid.to_vec(),
        electric: table.electric,
        qdot0,
        electric0,
        t_of_k2,
        t0_fit,
        t0_moment,
        residual,
        exponent,
    })
}

/// Long-wavelength comparison of `N(j_l Y)/λ` with `√((l+1)/l) ∇(j_l Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongWavelengthReport {
    pub l: usize,
    pub m: i64,
    pub k: f64,
    pub kr: f64,
    /// `‖N(j_lY)/λ − √((l+1)/l)∇(j_lY)‖ / ‖N(j_lY)/λ‖`.
    pub residual: f64,
    /// Relative error of `N(j_lY)/λ` against `√((l+1)/l) k^l/(2l+1)!! ∇(r^lY)`.
    pub leading_error: f64,
}

pub fn long_wavelength_check(l: usize, m: i64, k: f64, grid: &std::sync::Arc<SphericalGrid>) -> Result<LongWavelengthReport> {
    if l == 0 {
        return Err(Error::Domain("long-wavelength check needs l ≥ 1".into()));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let idx = HarmonicIndex::new(l, m)?;
    let lf = l as f64;
    let f = ScalarField::from_profile(grid, idx, |r| C64::new(spherical_bessel_j(l, k * r), 0.0));
    let lhs = op::apply_n(&f).scale(C64::new(1.0 / lambda(l), 0.0));
    let c = ((lf + 1.0) / lf).sqrt();
    let rhs = op::gradient(&f).scale(C64::new(c, 0.0));
    let residual = lhs.sub(&rhs)?.norm() / lhs.norm();
    let lead = k.powi(l as i32) / double_factorial(2 * l as i64 + 1);
    let p = ScalarField::from_profile(grid, idx, |r| C64::new(r.powi(l as i32) * lead, 0.0));
    let leading = op::gradient(&p).scale(C64::new(c, 0.0));
    let leading_error = lhs.sub(&leading)?.norm() / lhs.norm();
    Ok(LongWavelengthReport {
        l,
        m,
        k,
        kr: k * grid.spec.r_max,
        residual,
        leading_error,
    })
}

/// Fitted exponent of the long-wavelength residual against `k`.
pub fn long_wavelength_exponent(l: usize, m: i64, ks: &[f64], grid: &std::sync::Arc<SphericalGrid>) -> Result<f64> {
    let res: Vec<f64> = ks.iter().map(|&k| long_wavelength_check(l, m, k, grid).map(|r| r.residual)).collect::<Result<_>>()?;
    log_slope(ks, &res)
}

/// Anapole summary for a current density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnapoleReport {
    pub current_norm: f64,
    /// `max |Q̇_lm(0)|` over `l ≤ l_max`.
    pub max_qdot: f64,
    /// `max |M_lm(0)|` over `1 ≤ l ≤ l_max`.
    pub max_magnetic: f64,
    pub toroid_10: C64,
    /// `k → 0` slope `E_10/k²` from the form factor.
    pub slope_10: C64,
    /// `|slope_10 − κ_1 T_10| / |κ_1 T_10|`.
    pub slope_mismatch: f64,
    pub nonradiating: bool,
}

/// Checks the anapole signature: vanishing charge and magnetic moments with a toroid dipole.
pub fn anapole(j: &VectorField, l_max: usize, k_grid: &[f64]) -> Result<AnapoleReport> {
    let norm = j.norm();
    let mut max_qdot = 0.0_f64;
    let mut max_magnetic = 0.0_f64;
    for l in 0..=l_max.min(j.grid.l_max()) {
        for m in -(l as i64)..=l as i64 {
            max_qdot = max_qdot.max(qdot_moment(j, l, m)?.norm());
            if l >= 1 {
                max_magnetic = max_magnetic.max(magnetic_moment(j, l, m)?.norm());
            }
        }
    }
    let split = siegert_split(j, 1, 0, k_grid)?;
    let toroid_10 = toroid_moment(j, 1, 0, 0)?;
    let expected = toroid_10 * toroid_convention_factor(1);
    let slope_mismatch = (split.t0_fit - expected).norm() / expected.norm().max(f64::MIN_POSITIVE);
    Ok(AnapoleReport {
        current_norm: norm,
        max_qdot,
        max_magnetic,
        toroid_10,
        slope_10: split.t0_fit,
        slope_mismatch,
        nonradiating: max_qdot < 1e-6 * norm && max_magnetic < 1e-6 * norm && toroid_10.norm() > 1e-3 * norm,
    })
}

/// Logarithmically spaced wavenumbers.
pub fn log_k_grid(k_min: f64, k_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![k_min];
    }
    (0..n).map(|i| k_min * (k_max / k_min).powf(i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{synthesize_vector, GridSpec};
    use crate::random::{random_vector, rng, Envelope};
    use crate::sources::{make_source, SourceSpec};
    use std::sync::Arc;

    const DIPOLE_QDOT: f64 = 2.720699046351327;

    fn dipole() -> VectorField {
        let g = GridSpec::ball(6, 48, 7.0).build().unwrap();
        make_source(&SourceSpec::gaussian_dipole(1.0), &g).unwrap()
    }

    fn toroid() -> VectorField {
        let g = GridSpec::ball(8, 64, 3.6).build().unwrap();
        make_source(&SourceSpec::toroidal_solenoid(1.5, 0.0, 0.35), &g).unwrap()
    }

    fn bump(grid: &Arc<SphericalGrid>, l: usize, m: i64) -> ScalarField {
        let idx = HarmonicIndex::new(l, m).unwrap();
        ScalarField::from_profile(grid, idx, |r| C64::new(r * r * (-r * r).exp(), 0.0))
    }

    #[test]
    fn gradient_current_has_no_magnetic_channel() {
        let g = GridSpec::ball(6, 40, 6.0).build().unwrap();
        let f = bump(&g, 2, 1).add(&bump(&g, 3, -2)).unwrap();
        let j = op::gradient(&f);
        for l in 1..=4 {
            for m in -(l as i64)..=l as i64 {
                for k in [0.1, 0.7, 2.0] {
                    assert!(channel_projection(&j, l, m, l, k).unwrap().norm() < 1e-12 * j.norm());
                }
            }
        }
        let ff = form_factors(&j, 2, 1, &[0.05, 0.5, 1.5]).unwrap();
        assert!(ff.magnetic.iter().all(|v| v.norm() < 1e-10 * j.norm()));
    }

    #[test]
    fn l_field_lives_in_the_magnetic_channel() {
        let g = GridSpec::ball(6, 40, 6.0).build().unwrap();
        let j = op::apply_l(&bump(&g, 1, 0));
        for k in [0.2, 1.0] {
            assert!(channel_projection(&j, 1, 0, 0, k).unwrap().norm() < 1e-14);
            assert!(channel_projection(&j, 1, 0, 2, k).unwrap().norm() < 1e-14);
            assert!(channel_projection(&j, 1, 0, 1, k).unwrap().norm() > 1e-3);
        }
        assert!(channel_projection(&j, 1, 0, 3, 1.0).is_err());
        assert!(channel_projection(&j, 1, 0, 0, 0.0).is_err());
    }

    #[test]
    fn dipole_projection_small_k() {
        let a = channel_projection(&dipole(), 1, 0, 0, 1e-4).unwrap();
        let expected = PI.powf(1.5) / (4.0 * PI).sqrt();
        assert!((a.re - expected).abs() < 1e-7, "{a}");
        assert!((expected - 1.5705).abs() < 1e-3);
    }

    #[test]
    fn qdot_moment_examples() {
        let j = dipole();
        assert!((qdot_moment(&j, 1, 0).unwrap() - DIPOLE_QDOT).norm() < 1e-10);
        for m in -2..=2 {
            assert!(qdot_moment(&j, 2, m).unwrap().norm() < 1e-12);
        }
        let g = GridSpec::ball(6, 64, 6.0).build().unwrap();
        let solenoidal = op::curl(&op::apply_l(&bump(&g, 2, 1)));
        for l in 0..=4 {
            for m in -(l as i64)..=l as i64 {
                let q = qdot_moment(&solenoidal, l, m).unwrap().norm();
                assert!(q < 1e-10 * solenoidal.norm(), "l={l} m={m} {q:e} {:e}", solenoidal.norm());
            }
        }
    }

    #[test]
    fn dipole_form_factor_limits() {
        let j = dipole();
        let ks = log_k_grid(0.005, 0.04, 12);
        let t = form_factors(&j, 1, 0, &ks).unwrap();
        let q0 = even_fit(&ks, &t.qdot, FIT_DEGREE, FIT_POINTS).unwrap()[0];
        let e0 = even_fit(&ks, &t.electric, FIT_DEGREE, FIT_POINTS).unwrap()[0];
        assert!((q0.re - DIPOLE_QDOT).abs() < 1e-8 * DIPOLE_QDOT);
        assert!((e0.re - DIPOLE_QDOT).abs() < 1e-8 * DIPOLE_QDOT);
        assert!(form_factors(&j, 0, 0, &ks).is_err());
        assert!(form_factors(&j, 1, 0, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn direct_longitudinal_projection_matches_qdot_form_factor() {
        let j = dipole();
        let (l, m, k) = (1usize, 0i64, 0.8);
        let f = ScalarField::from_profile(&j.grid, HarmonicIndex::new(l, m).unwrap(), |r| C64::new(spherical_bessel_j(l, k * r), 0.0));
        let direct = op::gradient(&f).inner(&j) * (double_factorial(2 * l as i64 + 1) / k.powi(l as i32));
        let table = form_factors(&j, l, m, &[k]).unwrap();
        assert!((direct - table.qdot[0]).norm() < 1e-10 * direct.norm());
    }

    #[test]
    fn mean_radii_reconstruct_qdot() {
        let j = dipole();
        let ks = [0.05, 0.1, 0.2];
        let table = form_factors(&j, 1, 0, &ks).unwrap();
        let radii: Vec<C64> = (0..=3).map(|n| qdot_radius(&j, 1, 0, n).unwrap()).collect();
        let r_eff = 4.0_f64;
        for (i, &k) in ks.iter().enumerate() {
            let mut series = C64::new(0.0, 0.0);
            let mut fact = 1.0;
            for (n, q) in radii.iter().enumerate() {
                if n > 0 {
                    fact *= n as f64;
                }
                series += q * (k.powi(2 * n as i32) / fact);
            }
            let bound = (k * r_eff).powi(8) / 24.0 * DIPOLE_QDOT;
            assert!((series - table.qdot[i]).norm() < bound, "k={k}");
        }
    }

    #[test]
    fn toroid_moment_vanishes_on_l_fields() {
        let g = GridSpec::ball(6, 40, 6.0).build().unwrap();
        let j = op::apply_l(&bump(&g, 2, 1).add(&bump(&g, 1, 0)).unwrap());
        for l in 1..=3 {
            for m in -(l as i64)..=l as i64 {
                for n in 0..=2 {
                    assert!(toroid_moment(&j, l, m, n).unwrap().norm() < 1e-14);
                }
            }
        }
        assert!(toroid_moment(&j, 0, 0, 0).is_err());
    }

    #[test]
    fn real_source_moments_are_hermitian() {
        let g = GridSpec::ball(6, 32, 1.0).build().unwrap();
        let j = random_vector(&g, 4, Envelope::Polynomial { degree: 3 }, true, &mut rng(7));
        let set = MomentSet::compute(&j, 3, 1).unwrap();
        for l in 1..=3usize {
            for m in 1..=l as i64 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                for n in 0..=1 {
                    let a = set.qdot[&(l, m, n)];
                    let b = set.qdot[&(l, -m, n)];
                    assert!((b - a.conj() * sign).norm() < 1e-12 * (1.0 + a.norm()));
                    let a = set.toroid[&(l, m, n)];
                    let b = set.toroid[&(l, -m, n)];
                    assert!((b - a.conj() * sign).norm() < 1e-12 * (1.0 + a.norm()));
                }
            }
        }
    }

    #[test]
    fn channel_completeness() {
        let g = GridSpec::ball(6, 32, 1.0).build().unwrap();
        let j = random_vector(&g, 4, Envelope::Polynomial { degree: 3 }, false, &mut rng(11));
        let mut total = 0.0;
        for l in 0..=g.l_max() {
            for m in -(l as i64)..=l as i64 {
                let plus = angular_projection(&j, l, m, l + 1).unwrap();
                let mut sq: Vec<f64> = plus.iter().map(|c| c.norm_sqr()).collect();
                if l >= 1 {
                    let minus = angular_projection(&j, l, m, l - 1).unwrap();
                    let tor = angular_projection(&j, l, m, l).unwrap();
                    let lf = l as f64;
                    let s = (2.0 * lf + 1.0).sqrt();
                    for i in 0..g.n_r() {
                        let p = (minus[i] * (lf + 1.0).sqrt() - plus[i] * lf.sqrt()) / s;
                        let q = (minus[i] * lf.sqrt() + plus[i] * (lf + 1.0).sqrt()) / s;
                        sq[i] = p.norm_sqr() + q.norm_sqr() + tor[i].norm_sqr();
                    }
                }
                total += (0..g.n_r()).map(|i| g.volume_weight(i) * sq[i]).sum::<f64>();
            }
        }
        let norm2 = j.norm().powi(2);
        assert!((total - norm2).abs() < 1e-8 * norm2, "{total} vs {norm2}");
    }

    #[test]
    fn siegert_split_on_dipole() {
        let s = siegert_split(&dipole(), 1, 0, &log_k_grid(0.005, 0.04, 12)).unwrap();
        assert!((s.qdot0.re - DIPOLE_QDOT).abs() < 1e-10);
        assert!((s.electric0 - s.qdot0).norm() < 5e-3 * DIPOLE_QDOT);
        assert!(s.t_of_k2.iter().all(|t| t.norm().is_finite() && t.norm() < 10.0));
        assert!(s.residual < 1e-6, "{}", s.residual);
        assert!((s.exponent.unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn siegert_split_on_magnetic_source() {
        let g = GridSpec::ball(8, 64, 3.6).build().unwrap();
        let j = make_source(&SourceSpec::magnetic_loop(1.5, 0.35), &g).unwrap();
        let s = siegert_split(&j, 1, 0, &log_k_grid(0.01, 0.06, 12)).unwrap();
        assert_eq!(s.exponent, None);
        assert!(s.electric.iter().all(|e| e.norm() < 1e-12 * j.norm()));
    }

    #[test]
    fn fit_errors() {
        let j = dipole();
        assert!(matches!(siegert_split(&j, 1, 0, &[0.01, 0.02, 0.03]), Err(Error::Fit(_))));
        assert!(matches!(siegert_split(&j, 1, 0, &log_k_grid(0.05, 0.2, 8)), Err(Error::Fit(_))));
        let k = [0.1, 0.2];
        assert!(even_fit(&k, &[C64::new(1.0, 0.0); 2], 3, 8).is_err());
    }

    #[test]
    fn toroidal_solenoid_is_an_anapole() {
        let j = toroid();
        let a = anapole(&j, 3, &log_k_grid(0.01, 0.06, 12)).unwrap();
        assert!(a.nonradiating);
        assert!(a.max_qdot < 1e-8 * a.current_norm);
        assert!(a.max_magnetic < 1e-8 * a.current_norm);
        assert!(a.slope_mismatch < 1e-6, "{}", a.slope_mismatch);
        assert!(a.slope_10.norm() > 0.0);
        let table = form_factors(&j, 1, 0, &[0.05, 0.2]).unwrap();
        assert!(table.qdot.iter().all(|q| q.norm() < 1e-8 * a.current_norm));
        assert!(table.magnetic.iter().all(|q| q.norm() < 1e-8 * a.current_norm));
    }

    #[test]
    fn toroid_moment_matches_cartesian_oracle() {
        let j = toroid();
        let g = j.grid.clone();
        let samples = synthesize_vector(&j);
        let vals: Vec<C64> = samples
            .iter()
            .enumerate()
            .map(|(p, v)| {
                let x = g.point(p).3;
                let rj = x[0] * v[0] + x[1] * v[1] + x[2] * v[2];
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                (rj * x[2] - v[2] * 2.0 * r2) / 10.0
            })
            .collect();
        let tz = crate::grid::integrate_samples(&g, &vals);
        let t10 = toroid_moment(&j, 1, 0, 0).unwrap();
        assert!(t10.norm() > 1e-3 * j.norm());
        assert!((t10 - tz).norm() < 1e-8 * tz.norm(), "{t10} vs {tz}");
        let (a, b) = (toroid_moment(&j, 1, 1, 0).unwrap(), toroid_moment(&j, 1, -1, 0).unwrap());
        assert!((b + a.conj()).norm() < 1e-12 * t10.norm());
    }

    #[test]
    fn long_wavelength_examples() {
        let g = GridSpec::ball(6, 32, 1.0).build().unwrap();
        let r1 = long_wavelength_check(1, 0, 0.1, &g).unwrap();
        let r2 = long_wavelength_check(1, 0, 0.05, &g).unwrap();
        assert!(r1.residual < 0.01);
        assert!((r1.residual / r2.residual - 4.0).abs() < 0.1);
        for l in 1..=3 {
            assert!(long_wavelength_check(l, 0, 0.05, &g).unwrap().leading_error < 0.01);
            let e = long_wavelength_exponent(l, 0, &[0.025, 0.05, 0.1, 0.2], &g).unwrap();
            assert!((e - 2.0).abs() < 0.1, "l={l}: {e}");
        }
        assert!(long_wavelength_check(0, 0, 0.1, &g).is_err());
    }

    #[test]
    fn csv_layout() {
        let j = dipole();
        let csv = form_factors(&j, 1, 0, &[0.1, 0.2]).unwrap().to_csv();
        assert!(csv.starts_with("l,m,n_or_k,re,im,quantity\n"));
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(!csv.contains('\r'));
        let set = MomentSet::compute(&j, 1, 0).unwrap().to_csv();
        assert!(set.lines().skip(1).all(|l| l.split(',').count() == 6));
        assert!(set.contains(",Qdot\n") && set.contains(",M\n") && set.contains(",T\n"));
    }
}
