//! Two-column `x y` data files for external plotting.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fiber::fiber_energy;
use crate::functionals::compute_masses;
use crate::grid::{fmt17, RadialField};
use crate::params::ModelParams;
use crate::solvers::ConcentrationRow;

pub const FIBER_SAMPLES: usize = 241;

pub fn write_xy(path: &Path, points: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for (x, y) in points {
        writeln!(out, "{} {}", fmt17(x), fmt17(y)).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// `r u(r)`, one row per node.
pub fn profile_dat(path: &Path, u: &RadialField) -> Result<()> {
    write_xy(path, u.grid().nodes().iter().copied().zip(u.values().iter().copied()))
}

/// `s I_mu(s * u)` on `FIBER_SAMPLES` points of `[-range, range]`.
pub fn fiber_points(u: &RadialField, params: &ModelParams, range: f64) -> Vec<(f64, f64)> {
    let m = compute_masses(u, params);
    (0..FIBER_SAMPLES)
        .map(|i| -range + 2.0 * range * i as f64 / (FIBER_SAMPLES - 1) as f64)
        .map(|s| (s, fiber_energy(&m, s, params)))
        .collect()
}

pub fn fiber_dat(path: &Path, u: &RadialField, params: &ModelParams, range: f64) -> Result<()> {
    write_xy(path, fiber_points(u, params, range))
}

/// `delta dist_l2`, in table order.
pub fn concentration_dat(path: &Path, rows: &[ConcentrationRow]) -> Result<()> {
    write_xy(path, rows.iter().map(|r| (r.delta, r.dist_l2)))
}
