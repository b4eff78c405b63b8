//! Mass-critical studies: the fiber trichotomy around `a_*` and the
//! concentration of ground states as `a` decreases to `a_*`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiber::fiber_energy;
use crate::functionals::compute_masses;
use crate::grid::{integrate_radial, resample, GridConfig, RadialField, RadialGrid};
use crate::params::{critical_exponent, ModelParams};
use crate::solvers::ground::{normalized_ground_state, GroundStateOptions};
use crate::solvers::qp::{a_star, critical_profile, critical_seed};

/// Relative size of `A_quad - A_p / p_*` below which the leading fiber
/// coefficient counts as zero.
pub const DEGENERATE_TOLERANCE: f64 = 1e-3;
/// Fiber positions sampled by the scan: `[-S, S]` in `2 S / step` steps.
pub const SCAN_S_RANGE: f64 = 10.0;
const SCAN_SAMPLES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberClass {
    /// `inf_s I(s * w_a) = 0`, approached as `s -> -inf`.
    BoundedBelow,
    /// Leading coefficient zero: the equality case of the sharp inequality.
    Degenerate,
    /// `I(s * w_a) -> -inf` as `s -> +inf`.
    UnboundedBelow,
}

impl FiberClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            FiberClass::BoundedBelow => "bounded-below",
            FiberClass::Degenerate => "degenerate",
            FiberClass::UnboundedBelow => "unbounded-below",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub a: f64,
    pub classification: FiberClass,
    pub inf_fiber_energy: f64,
    /// `(A_quad - A_p / p_*) / A_quad`.
    pub coefficient: f64,
}

/// Classifies the fiber of `w_a = (a/a_*)^{1/2} Q_{p_*}^{1/2}` for each mass.
pub fn critical_fiber_scan(dim: usize, masses: &[f64], grid: &GridConfig) -> Result<Vec<ScanRow>> {
    let p = critical_exponent(dim);
    let qp = critical_profile(dim, grid)?;
    let base = ModelParams::new(dim, p, 1.0).with_mu(0.0);
    base.validate()?;
    masses
        .par_iter()
        .map(|&a| {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config(format!("scan mass must be positive, got {a}")));
            }
            let params = base.with_mass(a);
            let m = compute_masses(&critical_seed(&qp, a), &params);
            let coefficient = (m.a_quad - m.a_p / p) / m.a_quad;
            let inf = (0..SCAN_SAMPLES)
                .map(|i| -SCAN_S_RANGE + 2.0 * SCAN_S_RANGE * i as f64 / (SCAN_SAMPLES - 1) as f64)
                .map(|s| fiber_energy(&m, s, &params))
                .fold(f64::INFINITY, f64::min);
            let classification = if coefficient.abs() <= DEGENERATE_TOLERANCE {
                FiberClass::Degenerate
            } else if coefficient > 0.0 {
                FiberClass::BoundedBelow
            } else {
                FiberClass::UnboundedBelow
            };
            Ok(ScanRow {
                a,
                classification,
                inf_fiber_energy: inf,
                coefficient,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub delta: f64,
    pub a_n: f64,
    pub eps_n: f64,
    pub w_l1: f64,
    pub dist_l1: f64,
    pub dist_l2: f64,
    pub converged: bool,
}

/// `(N a_* / 4)^{1/(2+N)}`.
pub fn default_rescaling_constant(dim: usize) -> Result<f64> {
    let n = dim as f64;
    Ok((n * a_star(dim)? / 4.0).powf(1.0 / (2.0 + n)))
}

/// Nodes of the comparison grid for `w_n` against `Q_{p_*}`.
pub const COMPARISON_NODES: usize = 8001;

/// Ground states at `a_n = a_*(1 + delta)` and the distance of the rescaled
/// densities `w_n(x) = (c eps_n)^N u_n^2(c eps_n x)`,
/// `eps_n = A_quad(u_n)^{-1/(2+N)}`, to `Q_{p_*}`. Rows are sorted by
/// decreasing `delta`.
pub fn concentration_study(
    dim: usize,
    offsets: &[f64],
    options: &GroundStateOptions,
    constant: Option<f64>,
) -> Result<Vec<ConcentrationRow>> {
    let p = critical_exponent(dim);
    let a_star_value = a_star(dim)?;
    let c = match constant {
        Some(c) if c.is_finite() && c > 0.0 => c,
        Some(c) => return Err(Error::Config(format!("rescaling constant must be positive, got {c}"))),
        None => default_rescaling_constant(dim)?,
    };
    if let Some(d) = offsets.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::Config(format!("mass offsets must be positive, got {d}")));
    }
    let mut deltas = offsets.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let support = critical_profile(dim, &GridConfig::new(GridConfig::default().r_max, 3))?.support_radius;

    deltas
        .iter()
        .map(|&delta| {
            let a_n = a_star_value * (1.0 + delta);
            let params = ModelParams::new(dim, p, a_n).with_mu(0.0);
            let report = normalized_ground_state(&params, options)?;
            let u = &report.profile;
            let m = compute_masses(u, &params);
            let n = dim as f64;
            let eps = m.a_quad.powf(-1.0 / (2.0 + n));
            let k = c * eps;
            let w_grid = Arc::new(u.grid().scaled(1.0 / k)?);
            let w = RadialField::new(w_grid, u.values().iter().map(|v| k.powf(n) * v * v).collect())?;
            let w_l1 = integrate_radial(&w);

            let r_common = w.grid().r_max().max(support * 1.05);
            let common: Arc<RadialGrid> = GridConfig::new(r_common, COMPARISON_NODES).build(dim)?;
            let q = critical_profile(dim, &GridConfig::new(r_common, COMPARISON_NODES))?.profile;
            let w_common = resample(&w, &common);
            let diff = q.values().iter().zip(w_common.values());
            let abs = RadialField::new(common.clone(), diff.clone().map(|(a, b)| (a - b).abs()).collect())?;
            let sq = RadialField::new(common, diff.map(|(a, b)| (a - b) * (a - b)).collect())?;
            Ok(ConcentrationRow {
                delta,
                a_n,
                eps_n: eps,
                w_l1,
                dist_l1: integrate_radial(&abs),
                dist_l2: integrate_radial(&sq).sqrt(),
                converged: report.converged,
            })
        })
        .collect()
}
