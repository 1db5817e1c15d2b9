//! Differential and integral operators on spectral fields.
//!
//! Channel formulas (λ = √(l(l+1)), primes are radial derivatives):
//!
//! | operator | result |
//! |---|---|
//! | `∇(fY)` | `R = f'`, `S = λf/r` |
//! | `div V` | `R' + 2R/r − λS/r` |
//! | `curl V` | `R ← λT/r`, `S ← T' + T/r`, `T ← λR/r − S' − S/r` |
//! | `L(fY)`, `L = −r×∇` | `T = λf` |
//! | `N(fY) = curl L(fY)` | `R = l(l+1)f/r`, `S = λ(f' + f/r)` |
//! | `M(fY) = −r×L(fY)` | `S = −λ r f` |
//!
//! Radial derivatives use barycentric differentiation on the Gauss nodes; this is
//! spectrally accurate for smooth profiles and is the accuracy bottleneck of the
//! whole toolkit. Division by `r` is pointwise, so regular fields stay exact.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{analyze_scalar, analyze_vector, check_grids, synthesize_scalar, synthesize_vector, Channel, ScalarField, VectorField, C64};

/// Default relative tolerance for gauge checks and identity residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Decay threshold for the compact-support assumption at the outer radius.
pub const SUPPORT_LEAK_TOL: f64 = 1e-12;

fn lambda(l: usize) -> f64 {
    ((l * (l + 1)) as f64).sqrt()
}

/// Applies `op(r, l, value)` at every `(node, harmonic)`.
fn pointwise(f: &ScalarField, op: impl Fn(f64, usize, C64) -> C64) -> ScalarField {
    let degrees = f.grid.degrees();
    let r = &f.grid.r_nodes;
    f.map_coef(|j, h, c| op(r[j], degrees[h], c))
}

fn combine(a: &ScalarField, b: &ScalarField, op: impl Fn(f64, usize, C64, C64) -> C64) -> ScalarField {
    let degrees = a.grid.degrees();
    let nh = a.grid.n_h();
    let r = &a.grid.r_nodes;
    let coef = a
        .coef
        .iter()
        .zip(&b.coef)
        .enumerate()
        .map(|(p, (x, y))| op(r[p / nh], degrees[p % nh], *x, *y))
        .collect();
    ScalarField { grid: a.grid.clone(), coef }
}

fn vector(r: ScalarField, s: ScalarField, t: ScalarField) -> VectorField {
    VectorField::from_channels(r, s, t).expect("channels share a grid")
}

/// `∇f`.
pub fn gradient(f: &ScalarField) -> VectorField {
    let r = f.d_dr();
    let s = pointwise(f, |r, l, c| c * (lambda(l) / r));
    vector(r, s, ScalarField::zeros(&f.grid))
}

/// `∇·V`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let (rc, sc, _) = v.channels();
    let dr = rc.d_dr();
    let a = combine(&dr, &rc, |r, _, d, x| d + x * (2.0 / r));
    combine(&a, &sc, |r, l, x, s| x - s * (lambda(l) / r))
}

/// `∇×V`.
pub fn curl(v: &VectorField) -> VectorField {
    let (rc, sc, tc) = v.channels();
    let r_out = pointwise(&tc, |r, l, t| t * (lambda(l) / r));
    let dt = tc.d_dr();
    let s_out = combine(&dt, &tc, |r, _, d, t| d + t / r);
    let ds = sc.d_dr();
    let a = combine(&rc, &ds, |r, l, x, d| x * (lambda(l) / r) - d);
    let t_out = combine(&a, &sc, |r, _, x, s| x - s / r);
    vector(r_out, s_out, t_out)
}

/// `L f` with `L = −r×∇`.
pub fn apply_l(f: &ScalarField) -> VectorField {
    let t = pointwise(f, |_, l, c| c * lambda(l));
    vector(ScalarField::zeros(&f.grid), ScalarField::zeros(&f.grid), t)
}

/// `N f = ∇×(L f)`.
pub fn apply_n(f: &ScalarField) -> VectorField {
    let r = pointwise(f, |r, l, c| c * ((l * (l + 1)) as f64 / r));
    let df = f.d_dr();
    let s = combine(&df, f, |r, l, d, c| (d + c / r) * lambda(l));
    vector(r, s, ScalarField::zeros(&f.grid))
}

/// `M f = −r×(L f)`.
pub fn apply_m(f: &ScalarField) -> VectorField {
    let s = pointwise(f, |r, l, c| c * (-lambda(l) * r));
    vector(ScalarField::zeros(&f.grid), s, ScalarField::zeros(&f.grid))
}

/// Scalar Laplacian `f'' + 2f'/r − l(l+1)f/r²`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let d1 = f.d_dr();
    let d2 = d1.d_dr();
    let a = combine(&d2, &d1, |r, _, dd, d| dd + d * (2.0 / r));
    combine(&a, f, |r, l, x, c| x - c * ((l * (l + 1)) as f64 / (r * r)))
}

/// Angular Laplacian `L² = L·L`, eigenvalue `−l(l+1)`.
pub fn angular_laplacian(f: &ScalarField) -> ScalarField {
    pointwise(f, |_, l, c| c * -((l * (l + 1)) as f64))
}

/// Euler operator `r·∇ = r ∂_r`.
pub fn radial_euler(f: &ScalarField) -> ScalarField {
    pointwise(&f.d_dr(), |r, _, c| c * r)
}

/// Multiplication by `r^p`.
pub fn multiply_r_power(f: &ScalarField, p: i32) -> ScalarField {
    pointwise(f, |r, _, c| c * r.powi(p))
}

/// `r·V`.
pub fn dot_r(v: &VectorField) -> ScalarField {
    multiply_r_power(&v.channel(Channel::R), 1)
}

/// `r×V`.
pub fn cross_r(v: &VectorField) -> VectorField {
    let (_, s, t) = v.channels();
    vector(
        ScalarField::zeros(&v.grid),
        multiply_r_power(&t, 1),
        multiply_r_power(&s, 1).scale(Complex64::new(-1.0, 0.0)),
    )
}

/// The vector field `r f` (position vector times a scalar).
pub fn times_position(f: &ScalarField) -> VectorField {
    vector(multiply_r_power(f, 1), ScalarField::zeros(&f.grid), ScalarField::zeros(&f.grid))
}

/// Cartesian components of a vector field, each re-analyzed as a scalar field.
///
/// Angular degree rises by one; exact when the channels are band-limited below `l_max`.
pub fn cartesian_components(v: &VectorField) -> [ScalarField; 3] {
    let samples = synthesize_vector(v);
    let comp = |c: usize| {
        let s: Vec<C64> = samples.iter().map(|x| x[c]).collect();
        analyze_scalar(&v.grid, &s).expect("layout matches grid")
    };
    [comp(0), comp(1), comp(2)]
}

/// Vector field with the given Cartesian components.
pub fn from_cartesian(parts: &[ScalarField; 3]) -> Result<VectorField> {
    check_grids(&parts[0].grid, &parts[1].grid)?;
    check_grids(&parts[0].grid, &parts[2].grid)?;
    let s: Vec<_> = parts.iter().map(synthesize_scalar).collect();
    let samples: Vec<[C64; 3]> = (0..s[0].len()).map(|p| [s[0][p], s[1][p], s[2][p]]).collect();
    analyze_vector(&parts[0].grid, &samples)
}

/// Single Cartesian component `V_i`.
pub fn component(v: &VectorField, i: usize) -> ScalarField {
    let samples = synthesize_vector(v);
    let s: Vec<C64> = samples.iter().map(|x| x[i]).collect();
    analyze_scalar(&v.grid, &s).expect("layout matches grid")
}

/// Multiplication by the Cartesian coordinate `x_i`.
pub fn multiply_coordinate(f: &ScalarField, i: usize) -> ScalarField {
    let grid = &f.grid;
    let mut s = synthesize_scalar(f);
    for (p, v) in s.iter_mut().enumerate() {
        *v *= grid.point(p).3[i];
    }
    analyze_scalar(grid, &s).expect("layout matches grid")
}

/// Vector Laplacian applied to each Cartesian component.
pub fn vector_laplacian(v: &VectorField) -> VectorField {
    let [a, b, c] = cartesian_components(v);
    from_cartesian(&[laplacian(&a), laplacian(&b), laplacian(&c)]).expect("same grid")
}

/// `(r·∇)` applied to each Cartesian component.
pub fn vector_radial_euler(v: &VectorField) -> VectorField {
    let [a, b, c] = cartesian_components(v);
    from_cartesian(&[radial_euler(&a), radial_euler(&b), radial_euler(&c)]).expect("same grid")
}

/// `L·V = Σ_i L_i V_i`, evaluated componentwise.
pub fn dot_l(v: &VectorField) -> ScalarField {
    let parts = cartesian_components(v);
    let mut acc = ScalarField::zeros(&v.grid);
    for (i, p) in parts.iter().enumerate() {
        acc = acc.add(&component(&apply_l(p), i)).expect("same grid");
    }
    acc
}

fn warn_leak(f: &ScalarField, what: &str) -> f64 {
    let leak = f.support_leak();
    if leak > SUPPORT_LEAK_TOL {
        log::warn!("{what}: field not negligible at r_max (edge/peak = {leak:.2e}); compact support assumed");
    }
    leak
}

/// Free-space inverse Laplacian of a field treated as zero outside the grid.
///
/// Per harmonic, `g(r) = −1/(2l+1) [r^{−l−1} ∫_0^r s^{l+2} f ds + r^l ∫_r^R s^{1−l} f ds]`.
pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    warn_leak(f, "inverse_laplacian");
    let grid = &f.grid;
    let n = grid.n_r();
    let nh = grid.n_h();
    let mut out = ScalarField::zeros(grid);
    for h in 0..nh {
        let l = crate::harmonics::HarmonicIndex::from_flat(h).l;
        let green = grid.green(l);
        let prof = f.profile(h);
        let pref = -1.0 / (2 * l + 1) as f64;
        for j in 0..n {
            let r = grid.r_nodes[j];
            let mut a = C64::new(0.0, 0.0);
            let mut b = C64::new(0.0, 0.0);
            for k in 0..n {
                a += prof[k] * green.inner[j * n + k];
                b += prof[k] * green.outer[j * n + k];
            }
            out.coef[j * nh + h] = (a * r.powi(-(l as i32) - 1) + b * r.powi(l as i32)) * pref;
        }
    }
    out
}

/// Value of the inverse Laplacian at radius `r ≥ r_max`, per harmonic.
pub fn inverse_laplacian_exterior(f: &ScalarField, r: f64) -> Vec<C64> {
    let grid = &f.grid;
    let n = grid.n_r();
    (0..grid.n_h())
        .map(|h| {
            let l = crate::harmonics::HarmonicIndex::from_flat(h).l;
            let green = grid.green(l);
            let prof = f.profile(h);
            let a: C64 = (0..n).map(|k| prof[k] * green.total[k]).sum();
            a * (-1.0 / (2 * l + 1) as f64) * r.powi(-(l as i32) - 1)
        })
        .collect()
}

/// Inverse of the angular Laplacian: divides by `−l(l+1)` for `l ≥ 1`.
///
/// The l = 0 radial profile must be negligible: its norm is compared against
/// `tol · max(‖f‖, reference)`. The integral-kernel form
/// `∮ dω′/4π ln(1 − r̂·r̂′)` has exactly these eigenvalues (unit overall
/// normalization; additive constants in the kernel only touch l = 0).
pub fn inverse_l2(f: &ScalarField, tol: f64, reference: f64) -> Result<ScalarField> {
    let mono = f.monopole_norm();
    let limit = tol * f.norm().max(reference);
    if mono > limit {
        return Err(Error::GaugeViolation {
            norm: mono,
            limit,
            context: String::new(),
        });
    }
    Ok(pointwise(f, |_, l, c| if l == 0 { C64::new(0.0, 0.0) } else { c / -((l * (l + 1)) as f64) }))
}

/// Closed-form `√(4π/3)`, the (1,0) coefficient of `cos θ`; handy for building `z = r cos θ`.
pub fn z_coefficient() -> f64 {
    (4.0 * PI / 3.0).sqrt()
}
