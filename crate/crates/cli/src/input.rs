use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use vecscal_core::io::read_field;
use vecscal_core::sources::{make_source, SourceSpec};
use vecscal_core::{GridSpec, VectorField};

/// Grid used for `builtin:` pseudo-inputs.
#[derive(Debug, Clone, Args, Serialize)]
pub struct BuiltinGrid {
    /// Band limit of the grid for builtin sources
    #[arg(long, default_value_t = 8)]
    pub grid_lmax: usize,
    /// Radial nodes of the grid for builtin sources
    #[arg(long, default_value_t = 64)]
    pub grid_nr: usize,
    /// Outer radius for builtin sources [default: source support radius]
    #[arg(long)]
    pub grid_rmax: Option<f64>,
}

/// Reads a vector field from a vsf-1 file or builds a `builtin:` source.
pub fn load_vector(input: &str, grid: &BuiltinGrid) -> Result<VectorField> {
    if input.starts_with("builtin:") {
        let spec: SourceSpec = input.parse()?;
        build_source(&spec, grid)
    } else {
        read_field(Path::new(input))
            .and_then(|f| f.into_vector())
            .with_context(|| format!("reading {input}"))
    }
}

pub fn build_source(spec: &SourceSpec, grid: &BuiltinGrid) -> Result<VectorField> {
    let r_max = grid.grid_rmax.unwrap_or_else(|| spec.support_radius());
    let g = GridSpec::ball(grid.grid_lmax, grid.grid_nr, r_max).build()?;
    Ok(make_source(spec, &g)?)
}
