//! Seeded random test fields that are smooth and regular at the origin.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{ScalarField, SphericalGrid, VectorField, C64};
use crate::harmonics::HarmonicIndex;
use crate::operators::from_cartesian;

/// Radial envelope multiplying `r^l · poly(r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// No envelope; profiles are polynomials of degree `l + 2·degree`.
    Polynomial { degree: usize },
    /// Gaussian `e^{−r²/w²}` times a quadratic in `r²`; negligible at the edge when `w ≪ r_max`.
    Gaussian { width: f64 },
}

/// Deterministic generator for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random scalar field with `l ≤ band`; coefficients satisfy `f_{l,−m} = (−1)^m f̄_{lm}` when `real`.
pub fn random_scalar(grid: &Arc<SphericalGrid>, band: usize, envelope: Envelope, real: bool, rng: &mut ChaCha8Rng) -> ScalarField {
    let band = band.min(grid.l_max());
    let nh = grid.n_h();
    let mut f = ScalarField::zeros(grid);
    let r_scale = grid.spec.r_max;
    let npoly = match envelope {
        Envelope::Polynomial { degree } => degree + 1,
        Envelope::Gaussian { .. } => 2,
    };
    for l in 0..=band {
        let lo = if real { 0 } else { -(l as i64) };
        for m in lo..=l as i64 {
            let poly: Vec<C64> = (0..npoly)
                .map(|_| {
                    let im = if real && m == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) };
                    C64::new(rng.gen_range(-1.0..1.0), im)
                })
                .collect();
            let h = HarmonicIndex { l, m }.flat();
            let hn = HarmonicIndex { l, m: -m }.flat();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..grid.n_r() {
                let r = grid.r_nodes[j];
                let x = r / r_scale;
                let mut acc = C64::new(0.0, 0.0);
                for c in poly.iter().rev() {
                    acc = acc * (x * x) + c;
                }
                let env = match envelope {
                    Envelope::Polynomial { .. } => x.powi(l as i32),
                    Envelope::Gaussian { width } => r.powi(l as i32) * (-(r / width).powi(2)).exp(),
                };
                let v = acc * env;
                f.coef[j * nh + h] = v;
                if real && m > 0 {
                    f.coef[j * nh + hn] = v.conj() * sign;
                }
            }
        }
    }
    f
}

/// Random vector field whose Cartesian components are random scalars with `l ≤ band`.
pub fn random_vector(grid: &Arc<SphericalGrid>, band: usize, envelope: Envelope, real: bool, rng: &mut ChaCha8Rng) -> VectorField {
    let parts = [
        random_scalar(grid, band, envelope, real, rng),
        random_scalar(grid, band, envelope, real, rng),
        random_scalar(grid, band, envelope, real, rng),
    ];
    let mut v = from_cartesian(&parts).expect("same grid");
    v.clear_monopole_tangential();
    v
}
