//! Special functions shared by every other module.
//!
//! Conventions: complex orthonormal spherical harmonics with the Condon–Shortley
//! phase, `Y_lm(θ, φ) = P̄_lm(cos θ) e^{imφ}` where `P̄_lm` carries the factor
//! `(-1)^m √((2l+1)/4π · (l-m)!/(l+m)!)`. Consequently
//! `Y_{l,-m} = (-1)^m conj(Y_lm)`.
//!
//! Vector harmonics are built from derivative relations:
//!
//! * `Y_{l,l-1,m} = (l Y r̂ + Ψ) / √(l(2l+1))`, i.e. `r^{l-1} Y_{l,l-1,m} = ∇(r^l Y_lm)/√(l(2l+1))`
//! * `Y_{l,l,m}   = L Y_lm / √(l(l+1))` with `L = -r × ∇`
//! * `Y_{l,l+1,m} = (-(l+1) Y r̂ + Ψ) / √((l+1)(2l+1))`, proportional to `∇(r^{-l-1} Y_lm)`
//!
//! where `Ψ = r∇Y_lm` is the surface gradient on the unit sphere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Degree/order pair `(l, m)` with `|m| ≤ l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub l: usize,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::Domain(format!("|m| > l for (l={l}, m={m})")));
        }
        Ok(Self { l, m })
    }

    /// Flat index `h = l(l+1) + m`.
    #[inline]
    pub fn flat(self) -> usize {
        ((self.l * (self.l + 1)) as i64 + self.m) as usize
    }

    pub fn from_flat(h: usize) -> Self {
        let l = (h as f64).sqrt() as usize;
        let l = if (l + 1) * (l + 1) <= h { l + 1 } else { l };
        Self {
            l,
            m: h as i64 - (l * (l + 1)) as i64,
        }
    }

    /// Number of harmonics with degree ≤ `l_max`.
    #[inline]
    pub fn count(l_max: usize) -> usize {
        (l_max + 1) * (l_max + 1)
    }
}

/// Vector harmonic `Y_{l,lp,m}` with `lp ∈ {l-1, l, l+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VectorHarmonicIndex {
    pub l: usize,
    pub lp: usize,
    pub m: i64,
}

impl VectorHarmonicIndex {
    pub fn new(l: usize, lp: usize, m: i64) -> Result<Self> {
        HarmonicIndex::new(l, m)?;
        if l == 0 && lp != 1 {
            return Err(Error::Domain(format!("l=0 only admits lp=1, got lp={lp}")));
        }
        if lp + 1 < l || lp > l + 1 {
            return Err(Error::Domain(format!("lp={lp} not in {{l-1, l, l+1}} for l={l}")));
        }
        Ok(Self { l, lp, m })
    }
}

/// `n!!` as a float (`(-1)!! = 0!! = 1`).
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Offset of `(l, m ≥ 0)` in a triangular table.
#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalized associated Legendre values `P̄_lm(cos θ)` and their θ-derivatives
/// for `0 ≤ m ≤ l ≤ l_max`, in triangular order.
pub(crate) fn legendre_table(l_max: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let x = theta.cos();
    let s = theta.sin();
    let n = tri(l_max + 1, 0);
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    p[0] = 0.5 / PI.sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        p[tri(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
    }
    for m in 0..l_max {
        p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[tri(m, m)];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    // dP̄_lm/dθ = ½[√((l-m)(l+m+1)) P̄_{l,m+1} - √((l+m)(l-m+1)) P̄_{l,m-1}],
    // with P̄_{l,-1} = -P̄_{l,1}.
    for l in 0..=l_max {
        let lf = l as f64;
        for m in 0..=l {
            let mf = m as f64;
            let up = if m < l { p[tri(l, m + 1)] } else { 0.0 };
            let v = if m == 0 {
                (lf * (lf + 1.0)).sqrt() * up
            } else {
                0.5 * (((lf - mf) * (lf + mf + 1.0)).sqrt() * up
                    - ((lf + mf) * (lf - mf + 1.0)).sqrt() * p[tri(l, m - 1)])
            };
            dp[tri(l, m)] = v;
        }
    }
    (p, dp)
}

/// `(P̄, dP̄/dθ)` for signed `m`, using `P̄_{l,-m} = (-1)^m P̄_{l,m}`.
#[inline]
pub(crate) fn signed_legendre(p: &[f64], dp: &[f64], l: usize, m: i64) -> (f64, f64) {
    let ma = m.unsigned_abs() as usize;
    let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
    (sign * p[tri(l, ma)], sign * dp[tri(l, ma)])
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta={theta} outside [0, π]")));
    }
    Ok(())
}

/// Spherical harmonic `Y_lm(θ, φ)`.
pub fn eval_ylm(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<Complex64> {
    HarmonicIndex::new(idx.l, idx.m)?;
    check_theta(theta)?;
    let (p, dp) = legendre_table(idx.l, theta);
    let (v, _) = signed_legendre(&p, &dp, idx.l, idx.m);
    Ok(Complex64::from_polar(v, idx.m as f64 * phi))
}

/// Legendre polynomial `P_l(x)` by three-term recurrence.
pub fn eval_legendre(l: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("|x| > 1 for x={x}")));
    }
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return Ok(1.0);
    }
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    Ok(p1)
}

/// Local spherical unit vectors `(r̂, θ̂, φ̂)` in Cartesian components.
pub fn spherical_basis(theta: f64, phi: f64) -> [[f64; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        [st * cp, st * sp, ct],
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0],
    ]
}

/// Channel amplitudes `(Y r̂, Ψ·θ̂, Ψ·φ̂)` of a harmonic, with `Ψ = r∇Y`.
/// The φ-component carries `i m Y / sin θ`; the poles are approached from inside.
pub(crate) fn harmonic_and_surface_gradient(
    l: usize,
    m: i64,
    theta: f64,
    phi: f64,
) -> (Complex64, Complex64, Complex64) {
    let t = theta.clamp(1e-10, PI - 1e-10);
    let (p, dp) = legendre_table(l, t);
    let (v, dv) = signed_legendre(&p, &dp, l, m);
    let e = Complex64::from_polar(1.0, m as f64 * phi);
    let y = e * v;
    let g_theta = e * dv;
    let g_phi = Complex64::new(0.0, m as f64) * y / t.sin();
    (y, g_theta, g_phi)
}

/// Vector spherical harmonic in Cartesian components.
pub fn eval_vector_harmonic(idx: VectorHarmonicIndex, theta: f64, phi: f64) -> Result<[Complex64; 3]> {
    let idx = VectorHarmonicIndex::new(idx.l, idx.lp, idx.m)?;
    check_theta(theta)?;
    let l = idx.l;
    let lf = l as f64;
    let (y, gt, gp) = harmonic_and_surface_gradient(l, idx.m, theta, phi);
    let basis = spherical_basis(theta.clamp(1e-10, PI - 1e-10), phi);
    // Coefficients on (r̂, θ̂, φ̂).
    let (cr, ct, cp) = if idx.lp + 1 == l {
        let n = (lf * (2.0 * lf + 1.0)).sqrt();
        (y * lf / n, gt / n, gp / n)
    } else if idx.lp == l {
        // L Y = -r̂ × Ψ = Ψ_φ θ̂ - Ψ_θ φ̂.
        let n = (lf * (lf + 1.0)).sqrt();
        (Complex64::new(0.0, 0.0), gp / n, -gt / n)
    } else {
        let n = ((lf + 1.0) * (2.0 * lf + 1.0)).sqrt();
        (-y * (lf + 1.0) / n, gt / n, gp / n)
    };
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = cr * basis[0][k] + ct * basis[1][k] + cp * basis[2][k];
    }
    Ok(out)
}

/// Regular spherical Bessel function `j_l(x)`.
///
/// Power series below the crossover `x ≈ l` (and for `x < 1`); above it, Miller's
/// downward recurrence normalized through `Σ (2k+1) j_k² = 1`.
pub fn spherical_bessel_j(l: usize, x: f64) -> f64 {
    assert!(x >= 0.0, "spherical_bessel_j requires x ≥ 0");
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 || x < l as f64 {
        return bessel_series(l, x);
    }
    bessel_miller(l, x)
}

fn bessel_series(l: usize, x: f64) -> f64 {
    let lead = (l as f64 * x.ln() - double_factorial(2 * l as i64 + 1).ln()).exp();
    let q = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..500 {
        let nf = n as f64;
        term *= q / (nf * (2.0 * (l as f64 + nf) + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn bessel_miller(l: usize, x: f64) -> f64 {
    let start = l.max(x as usize) + 30 + (x.sqrt() * 4.0) as usize;
    let mut jp1 = 0.0;
    let mut j = 1e-30;
    let mut target = 0.0;
    let mut norm = 0.0;
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for k in (0..=start).rev() {
        if k == l {
            target = j;
        }
        norm += (2 * k + 1) as f64 * j * j;
        if k == 1 {
            j1 = j;
        }
        if k == 0 {
            j0 = j;
            break;
        }
        let jm1 = (2 * k + 1) as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e100 {
            j *= 1e-100;
            jp1 *= 1e-100;
            target *= 1e-100;
            j1 *= 1e-100;
            norm *= 1e-200;
        }
    }
    let mut v = target / norm.sqrt();
    // Fix the overall sign against whichever closed form is better conditioned.
    let true_j0 = x.sin() / x;
    let true_j1 = x.sin() / (x * x) - x.cos() / x;
    let sign = if true_j0.abs() > true_j1.abs() {
        (true_j0 * j0).signum()
    } else {
        (true_j1 * j1).signum()
    };
    v *= sign;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_legendre(l: usize, x: f64) -> f64 {
        // P_l(cos θ) = (1/π) ∫_0^π (cos θ + i sin θ cos φ)^l dφ, trapezoid exact for n > l.
        let s = (1.0 - x * x).sqrt();
        let n = 2 * l + 8;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            acc += Complex64::new(x, s * phi.cos()).powu(l as u32);
        }
        acc.re / n as f64
    }

    #[test]
    fn flat_index_round_trip() {
        for l in 0..10 {
            for m in -(l as i64)..=(l as i64) {
                let idx = HarmonicIndex::new(l, m).unwrap();
                assert_eq!(idx.flat() as i64, (l * (l + 1)) as i64 + m);
                assert_eq!(HarmonicIndex::from_flat(idx.flat()), idx);
            }
        }
        assert!(HarmonicIndex::new(1, 2).is_err());
    }

    #[test]
    fn ylm_reference_values() {
        let y00 = eval_ylm(HarmonicIndex::new(0, 0).unwrap(), 0.7, 1.1).unwrap();
        assert!((y00.re - 0.2820947918).abs() < 1e-10);
        let y10 = eval_ylm(HarmonicIndex::new(1, 0).unwrap(), 0.0, 0.0).unwrap();
        assert!((y10.re - 0.4886025119).abs() < 1e-10);
        // Closed form -√(3/8π) sin θ e^{iφ}.
        let y11 = eval_ylm(HarmonicIndex::new(1, 1).unwrap(), PI / 2.0, 0.0).unwrap();
        assert!((y11.re + (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-12);
        assert!((y11.re + 0.3454941495).abs() < 1e-10);
        assert!(eval_ylm(HarmonicIndex { l: 1, m: 3 }, 0.1, 0.0).is_err());
        assert!(eval_ylm(HarmonicIndex { l: 1, m: 0 }, 4.0, 0.0).is_err());
    }

    #[test]
    fn ylm_conjugation_symmetry() {
        for l in 0..8usize {
            for m in 1..=(l as i64) {
                let a = eval_ylm(HarmonicIndex::new(l, m).unwrap(), 0.9, 2.3).unwrap();
                let b = eval_ylm(HarmonicIndex::new(l, -m).unwrap(), 0.9, 2.3).unwrap();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((b - a.conj() * sign).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn legendre_values_and_independent_route() {
        assert_eq!(eval_legendre(0, 0.3).unwrap(), 1.0);
        assert!((eval_legendre(1, 0.3).unwrap() - 0.3).abs() < 1e-16);
        assert!((eval_legendre(2, 0.5).unwrap() + 0.125).abs() < 1e-16);
        assert!(eval_legendre(2, 1.5).is_err());
        for l in 0..=64 {
            for &x in &[-0.93, -0.4, 0.0, 0.17, 0.5, 0.88, 1.0] {
                let a = eval_legendre(l, x).unwrap();
                let b = laplace_legendre(l, x);
                assert!((a - b).abs() < 1e-13, "l={l} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn addition_theorem() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (t1, p1): (f64, f64) = (rng.gen::<f64>() * PI, rng.gen::<f64>() * 2.0 * PI);
            let (t2, p2): (f64, f64) = (rng.gen::<f64>() * PI, rng.gen::<f64>() * 2.0 * PI);
            let cosg = t1.cos() * t2.cos() + t1.sin() * t2.sin() * (p1 - p2).cos();
            for l in 0..=16usize {
                let mut s = Complex64::new(0.0, 0.0);
                for m in -(l as i64)..=(l as i64) {
                    let idx = HarmonicIndex::new(l, m).unwrap();
                    s += eval_ylm(idx, t1, p1).unwrap().conj() * eval_ylm(idx, t2, p2).unwrap();
                }
                let rhs = (2 * l + 1) as f64 / (4.0 * PI) * eval_legendre(l, cosg.clamp(-1.0, 1.0)).unwrap();
                assert!((s.re - rhs).abs() < 1e-12 && s.im.abs() < 1e-12, "l={l}");
            }
        }
    }

    #[test]
    fn bessel_reference_values() {
        assert_eq!(spherical_bessel_j(0, 0.0), 1.0);
        assert_eq!(spherical_bessel_j(2, 0.0), 0.0);
        assert!((spherical_bessel_j(1, 2.0) - 0.4353977749).abs() < 1e-10);
    }

    #[test]
    fn bessel_matches_closed_forms() {
        let mut x: f64 = 1e-3;
        while x <= 50.0 {
            let (s, c) = x.sin_cos();
            let j0 = s / x;
            let j1 = s / (x * x) - c / x;
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            assert!((spherical_bessel_j(0, x) - j0).abs() < 1e-12, "j0 at {x}");
            assert!((spherical_bessel_j(1, x) - j1).abs() < 1e-12, "j1 at {x}");
            // The closed form of j2 itself cancels badly for small x.
            if x > 0.1 {
                assert!((spherical_bessel_j(2, x) - j2).abs() < 1e-12, "j2 at {x}");
            }
            x += 0.0137;
        }
    }

    #[test]
    fn bessel_small_argument_behaviour() {
        for l in 0..10usize {
            let x: f64 = 1e-4;
            let lead = x.powi(l as i32) / double_factorial(2 * l as i64 + 1);
            assert!((spherical_bessel_j(l, x) / lead - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn vector_harmonic_examples() {
        let idx = VectorHarmonicIndex::new(1, 0, 0).unwrap();
        for &(t, p) in &[(0.3, 0.1), (1.2, 4.0), (2.9, 2.2)] {
            let v = eval_vector_harmonic(idx, t, p).unwrap();
            let c = 1.0 / (4.0 * PI).sqrt();
            assert!(v[0].norm() < 1e-13 && v[1].norm() < 1e-13);
            assert!((v[2].re - c).abs() < 1e-13 && v[2].im.abs() < 1e-13);
        }
        assert!(VectorHarmonicIndex::new(2, 4, 0).is_err());
    }

    #[test]
    fn vector_harmonics_orthonormal_and_tangential() {
        let l_max = 4;
        let (xs, ws) = crate::quadrature::gauss_legendre(l_max + 3);
        let nphi = 2 * l_max + 6;
        let mut list = Vec::new();
        for l in 1..=3usize {
            for lp in [l - 1, l, l + 1] {
                for m in -(l as i64)..=(l as i64) {
                    list.push(VectorHarmonicIndex::new(l, lp, m).unwrap());
                }
            }
        }
        let n = list.len();
        let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &x) in xs.iter().enumerate() {
            let theta = x.acos();
            for k in 0..nphi {
                let phi = 2.0 * PI * k as f64 / nphi as f64;
                let w = ws[i] * 2.0 * PI / nphi as f64;
                let vals: Vec<_> = list.iter().map(|&v| eval_vector_harmonic(v, theta, phi).unwrap()).collect();
                let rhat = spherical_basis(theta, phi)[0];
                for (a, va) in vals.iter().enumerate() {
                    if list[a].lp == list[a].l {
                        let dot: Complex64 = (0..3).map(|c| va[c] * rhat[c]).sum();
                        assert!(dot.norm() < 1e-13);
                    }
                    for (b, vb) in vals.iter().enumerate() {
                        let dot: Complex64 = (0..3).map(|c| va[c].conj() * vb[c]).sum();
                        gram[a * n + b] += dot * w;
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * n + b] - expect).norm() < 1e-12, "{:?} {:?}", list[a], list[b]);
            }
        }
    }
}
