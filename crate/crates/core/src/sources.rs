//! Analytic current densities used as multipole test sources.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{analyze_vector, GridSpec, SphericalGrid, VectorField, C64};
use crate::operators::SUPPORT_LEAK_TOL;

/// Built-in current densities. Lengths are in grid units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// `J = ẑ A e^{−|r−c|²/σ²}`.
    GaussianDipole { sigma: f64, amplitude: f64, center: [f64; 3] },
    /// Azimuthal ring current `J_φ = A (ρ/R) e^{−((ρ−R)² + z²)/w²}`.
    MagneticLoop { radius: f64, width: f64, amplitude: f64, center: [f64; 3] },
    /// Poloidal winding on the torus of radii `(R, a)`: `J = curl(A ρ g(d) φ̂)` with
    /// `d² = (ρ−R)² + z²` and the even shell profile `g = (e^{−(d−a)²/w²} + e^{−(d+a)²/w²})/2`.
    ToroidalSolenoid {
        radius: f64,
        #[serde(default)]
        minor: f64,
        width: f64,
        amplitude: f64,
        center: [f64; 3],
    },
}

impl SourceSpec {
    pub fn gaussian_dipole(sigma: f64) -> Self {
        SourceSpec::GaussianDipole {
            sigma,
            amplitude: 1.0,
            center: [0.0; 3],
        }
    }

    pub fn magnetic_loop(radius: f64, width: f64) -> Self {
        SourceSpec::MagneticLoop {
            radius,
            width,
            amplitude: 1.0,
            center: [0.0; 3],
        }
    }

    pub fn toroidal_solenoid(radius: f64, minor: f64, width: f64) -> Self {
        SourceSpec::ToroidalSolenoid {
            radius,
            minor,
            width,
            amplitude: 1.0,
            center: [0.0; 3],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceSpec::GaussianDipole { .. } => "gaussian_dipole",
            SourceSpec::MagneticLoop { .. } => "magnetic_loop",
            SourceSpec::ToroidalSolenoid { .. } => "toroidal_solenoid",
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            SourceSpec::GaussianDipole { sigma, .. } => positive("sigma", *sigma),
            SourceSpec::MagneticLoop { radius, width, .. } => {
                positive("radius", *radius)?;
                positive("width", *width)
            }
            SourceSpec::ToroidalSolenoid { radius, minor, width, .. } => {
                positive("radius", *radius)?;
                positive("width", *width)?;
                if !(*minor >= 0.0 && *minor < *radius) {
                    return Err(Error::Config(format!("minor radius must lie in [0, {radius}), got {minor}")));
                }
                Ok(())
            }
        }
    }

    /// Radius of a centred ball that holds the source to below `1e-12` of its peak.
    pub fn support_radius(&self) -> f64 {
        let norm = |c: &[f64; 3]| dot(*c, *c).sqrt();
        match self {
            SourceSpec::GaussianDipole { sigma, center, .. } => norm(center) + 6.0 * sigma,
            SourceSpec::MagneticLoop { radius, width, center, .. } => norm(center) + radius + 6.0 * width,
            SourceSpec::ToroidalSolenoid {
                radius,
                minor,
                width,
                center,
                ..
            } => norm(center) + radius + minor + 6.0 * width,
        }
    }

    /// Current density at a Cartesian point.
    pub fn current(&self, x: [f64; 3]) -> [f64; 3] {
        match *self {
            SourceSpec::GaussianDipole { sigma, amplitude, center } => {
                let d = sub(x, center);
                [0.0, 0.0, amplitude * (-dot(d, d) / (sigma * sigma)).exp()]
            }
            SourceSpec::MagneticLoop {
                radius,
                width,
                amplitude,
                center,
            } => {
                let [dx, dy, z] = sub(x, center);
                let rho = dx.hypot(dy);
                let g = amplitude / radius * (-((rho - radius).powi(2) + z * z) / (width * width)).exp();
                // J_φ φ̂ with φ̂ = (−y, x)/ρ, and J_φ/ρ = A g / R.
                [-dy * g, dx * g, 0.0]
            }
            SourceSpec::ToroidalSolenoid {
                radius,
                minor,
                width,
                amplitude,
                center,
            } => {
                let [dx, dy, z] = sub(x, center);
                let rho = dx.hypot(dy);
                let w2 = width * width;
                let d = (rho - radius).hypot(z);
                let (ep, em) = ((-(d - minor).powi(2) / w2).exp(), (-(d + minor).powi(2) / w2).exp());
                let g = 0.5 * amplitude * (ep + em);
                // g'(d)/d, finite as d → 0 because g is even in d.
                let gd = if d > 1e-12 {
                    -amplitude / w2 * ((d - minor) * ep + (d + minor) * em) / d
                } else {
                    -amplitude / w2 * (1.0 - 2.0 * minor * minor / w2) * (-minor * minor / w2).exp() * 2.0
                };
                let gz = gd * z;
                let grho = gd * (rho - radius);
                // J_ρ = −∂_z(ρg) = −ρ g_z, J_z = (1/ρ)∂_ρ(ρ²g) = 2g + ρ g_ρ.
                [-gz * dx, -gz * dy, 2.0 * g + rho * grho]
            }
        }
    }

    /// Spectral field on `grid`, sampled on an oversampled angular grid.
    pub fn build(&self, grid: &Arc<SphericalGrid>) -> Result<VectorField> {
        self.validate()?;
        let l = grid.l_max();
        let over = GridSpec {
            n_theta: grid.spec.n_theta.max(2 * l + 24),
            n_phi: grid.spec.n_phi.max(4 * l + 48),
            ..grid.spec.clone()
        }
        .build()?;
        let samples = over.sample_vector(|x| {
            let j = self.current(x);
            [C64::new(j[0], 0.0), C64::new(j[1], 0.0), C64::new(j[2], 0.0)]
        });
        let peak = samples.iter().flat_map(|s| s.iter()).fold(0.0_f64, |m, c| m.max(c.norm()));
        let n_ang = over.n_angular();
        let edge = samples[(over.n_r() - 1) * n_ang..].iter().flat_map(|s| s.iter()).fold(0.0_f64, |m, c| m.max(c.norm()));
        if peak > 0.0 && edge > SUPPORT_LEAK_TOL * peak {
            return Err(Error::Config(format!(
                "{} source is not contained in r ≤ {}: edge/peak = {:.2e}",
                self.name(),
                grid.spec.r_max,
                edge / peak
            )));
        }
        let field = analyze_vector(&over, &samples)?;
        VectorField::from_coef(grid, field.coef)
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Builds a source field.
pub fn make_source(spec: &SourceSpec, grid: &Arc<SphericalGrid>) -> Result<VectorField> {
    spec.build(grid)
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |c: &[f64; 3]| format!("{},{},{}", c[0], c[1], c[2]);
        match self {
            SourceSpec::GaussianDipole { sigma, amplitude, center } => {
                write!(f, "builtin:gaussian_dipole?sigma={sigma}&amplitude={amplitude}&center={}", c(center))
            }
            SourceSpec::MagneticLoop {
                radius,
                width,
                amplitude,
                center,
            } => write!(f, "builtin:magnetic_loop?radius={radius}&width={width}&amplitude={amplitude}&center={}", c(center)),
            SourceSpec::ToroidalSolenoid {
                radius,
                minor,
                width,
                amplitude,
                center,
            } => write!(
                f,
                "builtin:toroidal_solenoid?radius={radius}&minor={minor}&width={width}&amplitude={amplitude}&center={}",
                c(center)
            ),
        }
    }
}

/// Parses `builtin:<kind>?key=value&...`; unspecified parameters take defaults.
impl FromStr for SourceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("builtin:")
            .ok_or_else(|| Error::Config(format!("not a builtin source: {s}")))?;
        let (kind, query) = body.split_once('?').unwrap_or((body, ""));
        let mut spec = match kind {
            "gaussian_dipole" => SourceSpec::gaussian_dipole(1.0),
            "magnetic_loop" => SourceSpec::magnetic_loop(1.5, 0.35),
            "toroidal_solenoid" => SourceSpec::toroidal_solenoid(1.5, 0.0, 0.35),
            other => return Err(Error::Config(format!("unknown builtin source '{other}'"))),
        };
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed parameter '{pair}'")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Config(format!("bad number '{v}' for {key}")));
            let set_center = |c: &mut [f64; 3]| -> Result<()> {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Config(format!("center needs 3 components, got '{value}'")));
                }
                for (i, p) in parts.iter().enumerate() {
                    c[i] = num(p)?;
                }
                Ok(())
            };
            match (&mut spec, key) {
                (SourceSpec::GaussianDipole { sigma, .. }, "sigma") => *sigma = num(value)?,
                (SourceSpec::GaussianDipole { amplitude, .. }, "amplitude")
                | (SourceSpec::MagneticLoop { amplitude, .. }, "amplitude")
                | (SourceSpec::ToroidalSolenoid { amplitude, .. }, "amplitude") => *amplitude = num(value)?,
                (SourceSpec::GaussianDipole { center, .. }, "center")
                | (SourceSpec::MagneticLoop { center, .. }, "center")
                | (SourceSpec::ToroidalSolenoid { center, .. }, "center") => set_center(center)?,
                (SourceSpec::MagneticLoop { radius, .. }, "radius") | (SourceSpec::ToroidalSolenoid { radius, .. }, "radius") => {
                    *radius = num(value)?
                }
                (SourceSpec::ToroidalSolenoid { minor, .. }, "minor") => *minor = num(value)?,
                (SourceSpec::MagneticLoop { width, .. }, "width") | (SourceSpec::ToroidalSolenoid { width, .. }, "width") => {
                    *width = num(value)?
                }
                _ => return Err(Error::Config(format!("unknown parameter '{key}' for {kind}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}
