//! Spectral representation of scalar and vector fields on a ball (or annulus).
//!
//! Fields are nodal in radius and spectral in angle: a scalar field stores
//! `f_lm(r_j)` for every radial node `j` and flat harmonic index `h = l(l+1)+m`.
//! A vector field stores three channels per `(j, h)`:
//!
//! ```text
//! V(r) = Σ R_lm Y_lm r̂ + S_lm (r∇_S Y_lm)/√(l(l+1)) + T_lm (L Y_lm)/√(l(l+1))
//! ```
//!
//! Memory order is channel-major, then radial node, then `h`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::harmonics::{legendre_table, signed_legendre, spherical_basis, HarmonicIndex};
use crate::quadrature::{barycentric_weights, differentiation_matrix, gauss_legendre, gauss_legendre_on, lagrange_basis_at};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Vector channel labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    R = 0,
    S = 1,
    T = 2,
}

/// Parameters that fully determine a grid; nodes are recomputed from these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub l_max: usize,
    pub n_r: usize,
    pub r_max: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub r_min: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl GridSpec {
    /// Minimal angular sampling for band limit `l_max` on the ball.
    pub fn ball(l_max: usize, n_r: usize, r_max: f64) -> Self {
        Self {
            l_max,
            n_r,
            r_max,
            n_theta: l_max + 1,
            n_phi: 2 * l_max + 2,
            r_min: 0.0,
        }
    }

    pub fn with_angular(mut self, n_theta: usize, n_phi: usize) -> Self {
        self.n_theta = n_theta;
        self.n_phi = n_phi;
        self
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        self
    }

    pub fn build(self) -> Result<Arc<SphericalGrid>> {
        SphericalGrid::new(self).map(Arc::new)
    }
}

pub(crate) struct GreenMatrices {
    /// `∫_{r_min}^{r_j} s^{l+2} ℓ_k(s) ds`
    pub inner: Vec<f64>,
    /// `∫_{r_j}^{R} s^{1-l} ℓ_k(s) ds`
    pub outer: Vec<f64>,
    /// `∫_{r_min}^{R} s^{l+2} ℓ_k(s) ds`
    pub total: Vec<f64>,
}

/// Radial quadrature nodes plus a Gauss–Legendre × uniform angular grid.
pub struct SphericalGrid {
    pub spec: GridSpec,
    pub r_nodes: Vec<f64>,
    pub r_weights: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phi: Vec<f64>,
    plm: Vec<Vec<f64>>,
    dplm: Vec<Vec<f64>>,
    /// e^{i m φ_k} for m in -l_max..=l_max, row-major by (m + l_max, k).
    phase: Vec<C64>,
    basis: Vec<[[f64; 3]; 3]>,
    diff: Vec<f64>,
    bary: Vec<f64>,
    green: Vec<OnceLock<GreenMatrices>>,
}

impl std::fmt::Debug for SphericalGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphericalGrid").field("spec", &self.spec).finish()
    }
}

/// Ball grid with minimal angular sampling.
pub fn make_grid(l_max: usize, n_r: usize, r_max: f64) -> Result<Arc<SphericalGrid>> {
    GridSpec::ball(l_max, n_r, r_max).build()
}

impl SphericalGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.n_r < 2 {
            return Err(Error::Config(format!("n_r must be ≥ 2, got {}", spec.n_r)));
        }
        if !(spec.r_max > 0.0) || !(spec.r_min >= 0.0) || spec.r_min >= spec.r_max {
            return Err(Error::Config(format!(
                "need 0 ≤ r_min < r_max, got r_min={} r_max={}",
                spec.r_min, spec.r_max
            )));
        }
        if spec.n_theta < spec.l_max + 1 || spec.n_phi < 2 * spec.l_max + 1 {
            return Err(Error::Config(format!(
                "angular grid {}x{} too coarse for l_max={}",
                spec.n_theta, spec.n_phi, spec.l_max
            )));
        }
        let (r_nodes, r_weights) = gauss_legendre_on(spec.n_r, spec.r_min, spec.r_max);
        let (x, w) = gauss_legendre(spec.n_theta);
        // Ascending θ means descending cos θ.
        let theta: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
        let theta_weights: Vec<f64> = w.iter().rev().copied().collect();
        let phi: Vec<f64> = (0..spec.n_phi).map(|k| 2.0 * PI * k as f64 / spec.n_phi as f64).collect();
        let mut plm = Vec::with_capacity(theta.len());
        let mut dplm = Vec::with_capacity(theta.len());
        for &t in &theta {
            let (p, dp) = legendre_table(spec.l_max, t);
            plm.push(p);
            dplm.push(dp);
        }
        let lm = spec.l_max as i64;
        let mut phase = Vec::with_capacity((2 * spec.l_max + 1) * spec.n_phi);
        for m in -lm..=lm {
            for &p in &phi {
                phase.push(C64::from_polar(1.0, m as f64 * p));
            }
        }
        let mut basis = Vec::with_capacity(theta.len() * phi.len());
        for &t in &theta {
            for &p in &phi {
                basis.push(spherical_basis(t, p));
            }
        }
        let diff = differentiation_matrix(&r_nodes);
        let bary = barycentric_weights(&r_nodes);
        let green = (0..=spec.l_max).map(|_| OnceLock::new()).collect();
        Ok(Self {
            spec,
            r_nodes,
            r_weights,
            theta,
            theta_weights,
            phi,
            plm,
            dplm,
            phase,
            basis,
            diff,
            bary,
            green,
        })
    }

    #[inline]
    pub fn l_max(&self) -> usize {
        self.spec.l_max
    }
    #[inline]
    pub fn n_r(&self) -> usize {
        self.spec.n_r
    }
    #[inline]
    pub fn n_h(&self) -> usize {
        HarmonicIndex::count(self.spec.l_max)
    }
    #[inline]
    pub fn n_angular(&self) -> usize {
        self.spec.n_theta * self.spec.n_phi
    }
    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_r() * self.n_angular()
    }
    pub fn is_ball(&self) -> bool {
        self.spec.r_min == 0.0
    }

    /// Degree `l` of every flat index.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n_h()).map(|h| HarmonicIndex::from_flat(h).l).collect()
    }

    /// `(r, θ, φ, Cartesian position)` of sample point `p` (layout radial, θ, φ).
    pub fn point(&self, p: usize) -> (f64, f64, f64, [f64; 3]) {
        let na = self.n_angular();
        let j = p / na;
        let a = p % na;
        let i = a / self.spec.n_phi;
        let k = a % self.spec.n_phi;
        let r = self.r_nodes[j];
        let rh = self.basis[a][0];
        (r, self.theta[i], self.phi[k], [r * rh[0], r * rh[1], r * rh[2]])
    }

    /// Samples a pointwise scalar function at every grid point.
    pub fn sample_scalar(&self, f: impl Fn([f64; 3]) -> C64) -> Vec<C64> {
        (0..self.n_points()).map(|p| f(self.point(p).3)).collect()
    }

    pub fn sample_vector(&self, f: impl Fn([f64; 3]) -> [C64; 3]) -> Vec<[C64; 3]> {
        (0..self.n_points()).map(|p| f(self.point(p).3)).collect()
    }

    #[inline]
    fn phase(&self, m: i64, k: usize) -> C64 {
        self.phase[(m + self.spec.l_max as i64) as usize * self.spec.n_phi + k]
    }

    /// Forward φ transform of one θ-ring: `F_m = (2π/n_φ) Σ_k f_k e^{-imφ_k}`.
    fn ring_forward(&self, ring: &[C64], out: &mut [C64]) {
        let lm = self.spec.l_max as i64;
        let scale = 2.0 * PI / self.spec.n_phi as f64;
        for m in -lm..=lm {
            let mut acc = ZERO;
            for (k, v) in ring.iter().enumerate() {
                acc += v * self.phase(m, k).conj();
            }
            out[(m + lm) as usize] = acc * scale;
        }
    }

    fn ring_backward(&self, modes: &[C64], out: &mut [C64]) {
        let lm = self.spec.l_max as i64;
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for m in -lm..=lm {
                acc += modes[(m + lm) as usize] * self.phase(m, k);
            }
            *o = acc;
        }
    }

    /// Applies the radial differentiation matrix to every harmonic of a nodal block.
    pub fn radial_derivative(&self, vals: &[C64]) -> Vec<C64> {
        let n = self.n_r();
        let nh = vals.len() / n;
        let mut out = vec![ZERO; vals.len()];
        for i in 0..n {
            let row = &self.diff[i * n..(i + 1) * n];
            let dst = &mut out[i * nh..(i + 1) * nh];
            for (j, &d) in row.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let src = &vals[j * nh..(j + 1) * nh];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += s * d;
                }
            }
        }
        out
    }

    pub(crate) fn green(&self, l: usize) -> &GreenMatrices {
        self.green[l].get_or_init(|| self.build_green(l))
    }

    fn build_green(&self, l: usize) -> GreenMatrices {
        let n = self.n_r();
        let nodes = &self.r_nodes;
        let mut breaks = Vec::with_capacity(n + 2);
        breaks.push(self.spec.r_min);
        breaks.extend_from_slice(nodes);
        breaks.push(self.spec.r_max);
        let q = n / 2 + l + 12;
        let lf = l as i32;
        let mut seg_inner = vec![vec![0.0; n]; n + 1];
        let mut seg_outer = vec![vec![0.0; n]; n + 1];
        let mut basis = vec![0.0; n];
        for s in 0..=n {
            let (a, b) = (breaks[s], breaks[s + 1]);
            if b <= a {
                continue;
            }
            let (xs, ws) = gauss_legendre_on(q, a, b);
            for (x, w) in xs.iter().zip(&ws) {
                lagrange_basis_at(nodes, &self.bary, *x, &mut basis);
                let wi = w * x.powi(lf + 2);
                let wo = w * x.powi(1 - lf);
                for k in 0..n {
                    seg_inner[s][k] += wi * basis[k];
                    seg_outer[s][k] += wo * basis[k];
                }
            }
        }
        let mut inner = vec![0.0; n * n];
        let mut outer = vec![0.0; n * n];
        let mut total = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for s in 0..=n {
            for k in 0..n {
                acc[k] += seg_inner[s][k];
            }
            if s < n {
                inner[s * n..(s + 1) * n].copy_from_slice(&acc);
            }
        }
        total.copy_from_slice(&acc);
        let mut acc = vec![0.0; n];
        for s in (1..=n).rev() {
            for k in 0..n {
                acc[k] += seg_outer[s][k];
            }
            let j = s - 1;
            outer[j * n..(j + 1) * n].copy_from_slice(&acc);
        }
        GreenMatrices { inner, outer, total }
    }

    /// Volume quadrature weight `w_j r_j²` of radial node `j`.
    #[inline]
    pub fn volume_weight(&self, j: usize) -> f64 {
        self.r_weights[j] * self.r_nodes[j] * self.r_nodes[j]
    }
}

fn same_grid(a: &Arc<SphericalGrid>, b: &Arc<SphericalGrid>) -> bool {
    Arc::ptr_eq(a, b) || a.spec == b.spec
}

/// Scalar field: `coef[j * n_h + h] = f_lm(r_j)`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<SphericalGrid>,
    pub coef: Vec<C64>,
}

/// Vector field in the (R, S, T) channel basis.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub grid: Arc<SphericalGrid>,
    pub coef: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<SphericalGrid>) -> Self {
        Self {
            grid: grid.clone(),
            coef: vec![ZERO; grid.n_r() * grid.n_h()],
        }
    }

    pub fn from_coef(grid: &Arc<SphericalGrid>, coef: Vec<C64>) -> Result<Self> {
        if coef.len() != grid.n_r() * grid.n_h() {
            return Err(Error::Layout(format!(
                "scalar coefficient count {} != {}",
                coef.len(),
                grid.n_r() * grid.n_h()
            )));
        }
        Ok(Self { grid: grid.clone(), coef })
    }

    /// Field `Σ profile(r) Y_lm` for a single harmonic.
    pub fn from_profile(grid: &Arc<SphericalGrid>, idx: HarmonicIndex, profile: impl Fn(f64) -> C64) -> Self {
        let mut f = Self::zeros(grid);
        let h = idx.flat();
        let nh = grid.n_h();
        for (j, &r) in grid.r_nodes.iter().enumerate() {
            f.coef[j * nh + h] = profile(r);
        }
        f
    }

    #[inline]
    pub fn at(&self, j: usize, h: usize) -> C64 {
        self.coef[j * self.grid.n_h() + h]
    }

    /// Radial profile of one harmonic.
    pub fn profile(&self, h: usize) -> Vec<C64> {
        (0..self.grid.n_r()).map(|j| self.at(j, h)).collect()
    }

    pub fn map_coef(&self, f: impl Fn(usize, usize, C64) -> C64) -> Self {
        let nh = self.grid.n_h();
        let coef = self
            .coef
            .iter()
            .enumerate()
            .map(|(p, &c)| f(p / nh, p % nh, c))
            .collect();
        Self { grid: self.grid.clone(), coef }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_coef(|_, _, c| c * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_grids(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            coef: self.coef.iter().zip(&other.coef).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `√∫|f|² d³r` by Parseval.
    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// `∫ conj(self) · other d³r`.
    pub fn inner(&self, other: &Self) -> C64 {
        let nh = self.grid.n_h();
        let mut acc = ZERO;
        for j in 0..self.grid.n_r() {
            let w = self.grid.volume_weight(j);
            let a = &self.coef[j * nh..(j + 1) * nh];
            let b = &other.coef[j * nh..(j + 1) * nh];
            let s: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            acc += s * w;
        }
        acc
    }

    /// Norm of the l = 0 content.
    pub fn monopole_norm(&self) -> f64 {
        let nh = self.grid.n_h();
        (0..self.grid.n_r())
            .map(|j| self.grid.volume_weight(j) * self.coef[j * nh].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Ratio of the largest value on the outermost shell to the overall peak.
    pub fn support_leak(&self) -> f64 {
        let nh = self.grid.n_h();
        let peak = self.coef.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        let n = self.grid.n_r();
        let edge = self.coef[(n - 1) * nh..].iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    /// Radial derivative `∂_r f`.
    pub fn d_dr(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            coef: self.grid.radial_derivative(&self.coef),
        }
    }
}

impl VectorField {
    pub fn zeros(grid: &Arc<SphericalGrid>) -> Self {
        Self {
            grid: grid.clone(),
            coef: vec![ZERO; 3 * grid.n_r() * grid.n_h()],
        }
    }

    pub fn from_coef(grid: &Arc<SphericalGrid>, coef: Vec<C64>) -> Result<Self> {
        if coef.len() != 3 * grid.n_r() * grid.n_h() {
            return Err(Error::Layout(format!(
                "vector coefficient count {} != {}",
                coef.len(),
                3 * grid.n_r() * grid.n_h()
            )));
        }
        Ok(Self { grid: grid.clone(), coef })
    }

    /// Assembles a field from three channel blocks.
    pub fn from_channels(r: ScalarField, s: ScalarField, t: ScalarField) -> Result<Self> {
        check_grids(&r.grid, &s.grid)?;
        check_grids(&r.grid, &t.grid)?;
        let mut coef = r.coef;
        coef.extend_from_slice(&s.coef);
        coef.extend_from_slice(&t.coef);
        let mut v = Self { grid: r.grid, coef };
        v.clear_monopole_tangential();
        Ok(v)
    }

    /// S and T carry no l = 0 content.
    pub(crate) fn clear_monopole_tangential(&mut self) {
        let nh = self.grid.n_h();
        let block = self.grid.n_r() * nh;
        for c in 1..3 {
            for j in 0..self.grid.n_r() {
                self.coef[c * block + j * nh] = ZERO;
            }
        }
    }

    pub fn channel(&self, c: Channel) -> ScalarField {
        let block = self.grid.n_r() * self.grid.n_h();
        let c = c as usize;
        ScalarField {
            grid: self.grid.clone(),
            coef: self.coef[c * block..(c + 1) * block].to_vec(),
        }
    }

    pub fn channels(&self) -> (ScalarField, ScalarField, ScalarField) {
        (self.channel(Channel::R), self.channel(Channel::S), self.channel(Channel::T))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_grids(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            coef: self.coef.iter().zip(&other.coef).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `∫ conj(self)·other d³r`; the channel basis is orthonormal on each sphere.
    pub fn inner(&self, other: &Self) -> C64 {
        let (a, b, c) = self.channels();
        let (x, y, z) = other.channels();
        a.inner(&x) + b.inner(&y) + c.inner(&z)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn support_leak(&self) -> f64 {
        let (a, b, c) = self.channels();
        let peak = self.coef.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let lead = |f: &ScalarField| f.support_leak() * f.coef.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        (lead(&a).max(lead(&b)).max(lead(&c))) / peak
    }
}

pub(crate) fn check_grids(a: &Arc<SphericalGrid>, b: &Arc<SphericalGrid>) -> Result<()> {
    if same_grid(a, b) {
        Ok(())
    } else {
        Err(Error::Layout(format!("grid mismatch: {:?} vs {:?}", a.spec, b.spec)))
    }
}

/// Projects point samples (radial, θ, φ order) onto the harmonic basis.
pub fn analyze_scalar(grid: &Arc<SphericalGrid>, samples: &[C64]) -> Result<ScalarField> {
    if samples.len() != grid.n_points() {
        return Err(Error::Layout(format!(
            "sample count {} != grid points {}",
            samples.len(),
            grid.n_points()
        )));
    }
    let spec = grid.spec;
    let lm = spec.l_max as i64;
    let nh = grid.n_h();
    let mut out = ScalarField::zeros(grid);
    let mut modes = vec![ZERO; (2 * spec.l_max) + 1];
    for j in 0..spec.n_r {
        let dst = &mut out.coef[j * nh..(j + 1) * nh];
        for i in 0..spec.n_theta {
            let start = (j * spec.n_theta + i) * spec.n_phi;
            grid.ring_forward(&samples[start..start + spec.n_phi], &mut modes);
            let w = grid.theta_weights[i];
            for l in 0..=spec.l_max {
                for m in -(l as i64)..=(l as i64) {
                    let (p, _) = signed_legendre(&grid.plm[i], &grid.dplm[i], l, m);
                    dst[((l * (l + 1)) as i64 + m) as usize] +=
                        modes[(m + lm) as usize] * (w * p);
                }
            }
        }
    }
    Ok(out)
}

/// Evaluates a scalar field at every grid point.
pub fn synthesize_scalar(field: &ScalarField) -> Vec<C64> {
    let grid = &field.grid;
    let spec = grid.spec;
    let lm = spec.l_max as i64;
    let nh = grid.n_h();
    let mut out = vec![ZERO; grid.n_points()];
    let mut modes = vec![ZERO; 2 * spec.l_max + 1];
    for j in 0..spec.n_r {
        let src = &field.coef[j * nh..(j + 1) * nh];
        for i in 0..spec.n_theta {
            modes.iter_mut().for_each(|v| *v = ZERO);
            for l in 0..=spec.l_max {
                for m in -(l as i64)..=(l as i64) {
                    let (p, _) = signed_legendre(&grid.plm[i], &grid.dplm[i], l, m);
                    modes[(m + lm) as usize] += src[((l * (l + 1)) as i64 + m) as usize] * p;
                }
            }
            let start = (j * spec.n_theta + i) * spec.n_phi;
            grid.ring_backward(&modes, &mut out[start..start + spec.n_phi]);
        }
    }
    out
}

/// Projects Cartesian vector samples onto the (R, S, T) channels.
pub fn analyze_vector(grid: &Arc<SphericalGrid>, samples: &[[C64; 3]]) -> Result<VectorField> {
    if samples.len() != grid.n_points() {
        return Err(Error::Layout(format!(
            "sample count {} != grid points {}",
            samples.len(),
            grid.n_points()
        )));
    }
    let spec = grid.spec;
    let lm = spec.l_max as i64;
    let nh = grid.n_h();
    let block = spec.n_r * nh;
    let mut out = VectorField::zeros(grid);
    let na = grid.n_angular();
    let mut vr = vec![ZERO; spec.n_phi];
    let mut vt = vec![ZERO; spec.n_phi];
    let mut vp = vec![ZERO; spec.n_phi];
    let mut mr = vec![ZERO; 2 * spec.l_max + 1];
    let mut mt = vec![ZERO; 2 * spec.l_max + 1];
    let mut mp = vec![ZERO; 2 * spec.l_max + 1];
    for j in 0..spec.n_r {
        for i in 0..spec.n_theta {
            for k in 0..spec.n_phi {
                let a = i * spec.n_phi + k;
                let v = &samples[j * na + a];
                let b = &grid.basis[a];
                let proj = |e: &[f64; 3]| v[0] * e[0] + v[1] * e[1] + v[2] * e[2];
                vr[k] = proj(&b[0]);
                vt[k] = proj(&b[1]);
                vp[k] = proj(&b[2]);
            }
            grid.ring_forward(&vr, &mut mr);
            grid.ring_forward(&vt, &mut mt);
            grid.ring_forward(&vp, &mut mp);
            let w = grid.theta_weights[i];
            let inv_sin = 1.0 / grid.theta[i].sin();
            for l in 0..=spec.l_max {
                let lam = ((l * (l + 1)) as f64).sqrt();
                for m in -(l as i64)..=(l as i64) {
                    let h = ((l * (l + 1)) as i64 + m) as usize;
                    let mi = (m + lm) as usize;
                    let (p, dp) = signed_legendre(&grid.plm[i], &grid.dplm[i], l, m);
                    out.coef[j * nh + h] += mr[mi] * (w * p);
                    if l == 0 {
                        continue;
                    }
                    let imp = C64::new(0.0, m as f64 * p * inv_sin);
                    let s = (mt[mi] * dp - imp * mp[mi]) * (w / lam);
                    let t = (-imp * mt[mi] - mp[mi] * dp) * (w / lam);
                    out.coef[block + j * nh + h] += s;
                    out.coef[2 * block + j * nh + h] += t;
                }
            }
        }
    }
    Ok(out)
}

/// Evaluates a vector field at every grid point, Cartesian components.
pub fn synthesize_vector(field: &VectorField) -> Vec<[C64; 3]> {
    let grid = &field.grid;
    let spec = grid.spec;
    let lm = spec.l_max as i64;
    let nh = grid.n_h();
    let block = spec.n_r * nh;
    let na = grid.n_angular();
    let mut out = vec![[ZERO; 3]; grid.n_points()];
    let nm = 2 * spec.l_max + 1;
    let (mut mr, mut mt, mut mp) = (vec![ZERO; nm], vec![ZERO; nm], vec![ZERO; nm]);
    let (mut vr, mut vt, mut vp) = (vec![ZERO; spec.n_phi], vec![ZERO; spec.n_phi], vec![ZERO; spec.n_phi]);
    for j in 0..spec.n_r {
        for i in 0..spec.n_theta {
            for v in [&mut mr, &mut mt, &mut mp] {
                v.iter_mut().for_each(|x| *x = ZERO);
            }
            let inv_sin = 1.0 / grid.theta[i].sin();
            for l in 0..=spec.l_max {
                let lam = ((l * (l + 1)) as f64).sqrt();
                for m in -(l as i64)..=(l as i64) {
                    let h = ((l * (l + 1)) as i64 + m) as usize;
                    let mi = (m + lm) as usize;
                    let (p, dp) = signed_legendre(&grid.plm[i], &grid.dplm[i], l, m);
                    mr[mi] += field.coef[j * nh + h] * p;
                    if l == 0 {
                        continue;
                    }
                    let s = field.coef[block + j * nh + h] / lam;
                    let t = field.coef[2 * block + j * nh + h] / lam;
                    let imp = C64::new(0.0, m as f64 * p * inv_sin);
                    mt[mi] += s * dp + t * imp;
                    mp[mi] += s * imp - t * dp;
                }
            }
            grid.ring_backward(&mr, &mut vr);
            grid.ring_backward(&mt, &mut vt);
            grid.ring_backward(&mp, &mut vp);
            for k in 0..spec.n_phi {
                let a = i * spec.n_phi + k;
                let b = &grid.basis[a];
                let o = &mut out[j * na + a];
                for c in 0..3 {
                    o[c] = vr[k] * b[0][c] + vt[k] * b[1][c] + vp[k] * b[2][c];
                }
            }
        }
    }
    out
}

/// `∫ f d³r` over the grid's domain.
pub fn integrate_volume(field: &ScalarField) -> C64 {
    let nh = field.grid.n_h();
    let y00_integral = (4.0 * PI).sqrt();
    (0..field.grid.n_r())
        .map(|j| field.coef[j * nh] * field.grid.volume_weight(j) * y00_integral)
        .sum()
}

/// `∫ conj(a) b d³r` for two scalar fields.
pub fn integrate_product(a: &ScalarField, b: &ScalarField) -> Result<C64> {
    check_grids(&a.grid, &b.grid)?;
    Ok(a.inner(b))
}

/// Direct quadrature of pointwise samples over the domain (no transform).
pub fn integrate_samples(grid: &SphericalGrid, samples: &[C64]) -> C64 {
    let spec = grid.spec;
    let na = grid.n_angular();
    let dphi = 2.0 * PI / spec.n_phi as f64;
    let mut acc = ZERO;
    for j in 0..spec.n_r {
        let wr = grid.volume_weight(j);
        for i in 0..spec.n_theta {
            let w = wr * grid.theta_weights[i] * dphi;
            let start = j * na + i * spec.n_phi;
            let s: C64 = samples[start..start + spec.n_phi].iter().sum();
            acc += s * w;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::eval_ylm;
    use rand::{Rng, SeedableRng};

    fn random_field(grid: &Arc<SphericalGrid>, seed: u64) -> ScalarField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coef = (0..grid.n_r() * grid.n_h())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ScalarField::from_coef(grid, coef).unwrap()
    }

    #[test]
    fn grid_construction_and_errors() {
        let g = make_grid(0, 2, 1.0).unwrap();
        assert_eq!(g.r_nodes.len(), 2);
        assert_eq!(g.n_h(), 1);
        assert!(make_grid(2, 1, 1.0).is_err());
        assert!(make_grid(2, 4, 0.0).is_err());
        assert!(GridSpec::ball(4, 4, 1.0).with_angular(3, 9).build().is_err());
        let g = make_grid(3, 7, 2.5).unwrap();
        let v: f64 = (0..7).map(|j| g.volume_weight(j)).sum();
        assert!((v / (2.5f64.powi(3) / 3.0) - 1.0).abs() < 1e-12);
        assert!(g.r_nodes.windows(2).all(|w| w[0] < w[1]) && g.r_nodes[0] > 0.0);
    }

    #[test]
    fn volume_quadratures() {
        let g = make_grid(2, 6, 1.7).unwrap();
        let one = analyze_scalar(&g, &g.sample_scalar(|_| C64::new(1.0, 0.0))).unwrap();
        let vol = 4.0 * PI * 1.7f64.powi(3) / 3.0;
        assert!((integrate_volume(&one).re / vol - 1.0).abs() < 1e-12);
        let g = make_grid(0, 48, 8.0).unwrap();
        let f = analyze_scalar(&g, &g.sample_scalar(|x| {
            C64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0)
        }))
        .unwrap();
        let exact = PI.powf(1.5);
        assert!((integrate_volume(&f).re / exact - 1.0).abs() < 1e-10);
        // |Y_00|² integrates to R³/3.
        let g = make_grid(2, 4, 1.3).unwrap();
        let y = ScalarField::from_profile(&g, HarmonicIndex::new(0, 0).unwrap(), |_| C64::new(1.0, 0.0));
        let y2 = analyze_scalar(&g, &synthesize_scalar(&y).iter().map(|v| v * v.conj()).collect::<Vec<_>>()).unwrap();
        assert!((integrate_volume(&y2).re - 1.3f64.powi(3) / 3.0).abs() < 1e-13);
        // Orthogonality of Y_11 and Y_10 on a shell.
        let a = ScalarField::from_profile(&g, HarmonicIndex::new(1, 1).unwrap(), |_| C64::new(1.0, 0.0));
        let b = ScalarField::from_profile(&g, HarmonicIndex::new(1, 0).unwrap(), |_| C64::new(1.0, 0.0));
        assert!(integrate_product(&b, &a).unwrap().norm() < 1e-15);
    }

    #[test]
    fn radial_power_quadrature_exact() {
        let n = 9;
        let g = make_grid(1, n, 1.4).unwrap();
        for p in 0..n - 1 {
            let f = ScalarField::from_profile(&g, HarmonicIndex::new(0, 0).unwrap(), |r| C64::new(r.powi(2 * p as i32), 0.0));
            let exact = (4.0 * PI).sqrt() * 1.4f64.powi(2 * p as i32 + 3) / (2 * p + 3) as f64;
            assert!((integrate_volume(&f).re / exact - 1.0).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn scalar_transform_examples() {
        let g = make_grid(4, 3, 1.0).unwrap();
        let idx = HarmonicIndex::new(2, 1).unwrap();
        let samples = g.sample_scalar(|x| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            eval_ylm(idx, (x[2] / r).acos(), x[1].atan2(x[0])).unwrap()
        });
        let f = analyze_scalar(&g, &samples).unwrap();
        for j in 0..3 {
            for h in 0..g.n_h() {
                let expect = if h == 7 { 1.0 } else { 0.0 };
                assert!((f.at(j, h) - expect).norm() < 1e-13);
            }
        }
        let cos = analyze_scalar(&g, &g.sample_scalar(|x| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            C64::new(x[2] / r, 0.0)
        }))
        .unwrap();
        assert!((cos.at(1, 2).re - (4.0 * PI / 3.0).sqrt()).abs() < 1e-13);
        assert!(analyze_scalar(&g, &samples[1..]).is_err());
    }

    #[test]
    fn scalar_round_trip_and_parseval() {
        let g = make_grid(7, 5, 2.0).unwrap();
        let f = random_field(&g, 3);
        let samples = synthesize_scalar(&f);
        let back = analyze_scalar(&g, &samples).unwrap();
        let err = f.coef.iter().zip(&back.coef).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11);
        let direct = integrate_samples(&g, &samples.iter().map(|v| v.norm_sqr().into()).collect::<Vec<C64>>());
        assert!((direct.re / f.norm().powi(2) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn vector_transform_examples() {
        let g = make_grid(4, 4, 1.0).unwrap();
        let z = analyze_vector(&g, &g.sample_vector(|_| [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)])).unwrap();
        let nh = g.n_h();
        let block = 4 * nh;
        for c in 0..3 {
            for j in 0..4 {
                for h in 0..nh {
                    let v = z.coef[c * block + j * nh + h];
                    if h == 2 && c < 2 {
                        // ẑ = cos θ r̂ - sin θ θ̂: R = √(4π/3), S = √2·√(4π/3)... up to sign
                        assert!(v.norm() > 0.1);
                    } else {
                        assert!(v.norm() < 1e-13, "c={c} h={h}: {v}");
                    }
                }
            }
        }
        let c = (4.0 * PI / 3.0).sqrt();
        assert!((z.coef[2].re - c).abs() < 1e-13);
        assert!((z.coef[block + 2].re - c * 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn vector_round_trip_keeps_channels() {
        let g = make_grid(6, 4, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let coef = (0..3 * 4 * g.n_h())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut v = VectorField::from_coef(&g, coef).unwrap();
        v.clear_monopole_tangential();
        let back = analyze_vector(&g, &synthesize_vector(&v)).unwrap();
        let err = v.coef.iter().zip(&back.coef).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}
