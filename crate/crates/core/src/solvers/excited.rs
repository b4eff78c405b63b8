//! Radial solutions with a prescribed number of nodes by two-parameter
//! shooting on the Euler-Lagrange equation
//! `(1 + 2u^2)(u'' + (N-1)u'/r) + 2u(u')^2 = lambda u - |u|^{p-2} u`.
//!
//! The equation is integrated in `rho = sqrt(lambda) r`, where the linear
//! decay rate is one. At fixed `lambda` the initial height `u(0)` is bisected
//! between shots that turn back after at most `k` zeros and shots that cross
//! zero a `(k+1)`-th time; the outer iteration matches the mass in `lambda`.

use crate::error::{Error, Result};
use crate::functionals::{abs_pow, el_residual};
use std::sync::Arc;

use crate::grid::{surface_area, GridConfig, RadialField, RadialGrid};
use crate::ode::{integrate, Flow, Tolerances};
use crate::params::ModelParams;
use crate::solvers::report::{SolveReport, NODE_DEAD_BAND, SHOOTING_SURROGATE};

/// Largest node count accepted.
pub const MAX_NODES: usize = 6;
/// Upper end of the multiplier search.
pub const LAMBDA_MAX: f64 = 1e12;
const LAMBDA_MIN: f64 = 1e-6;
const RHO_LIMIT: f64 = 1e4;
const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `|u|` has an interior minimum away from zero after at most `k` zeros.
    Under,
    /// A `(k+1)`-th zero.
    Over,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Rising,
    Falling,
}

/// Trajectory samples `(rho, v, v', mass integral)`.
type Track = Vec<[f64; 4]>;

struct Shooter {
    dim: usize,
    p: f64,
    k: usize,
    /// `1 / lambda`
    kappa: f64,
    tol: Tolerances,
}

struct ShotResult {
    shot: Shot,
    /// End of the decaying part: the turning point of an undershoot.
    rho_cut: f64,
    /// `int_{|x| < rho_cut} v^2` in `rho` units.
    mass: f64,
}

impl Shooter {
    fn rhs(&self, b: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
        let n = self.dim as f64;
        let omega = surface_area(self.dim);
        let (p, kappa) = (self.p, self.kappa);
        move |rho, y| {
            let (v, dv) = (y[0], y[1]);
            let d2 = if rho == 0.0 {
                (b - kappa * abs_pow(b, p - 2.0) * b) / (n * (1.0 + 2.0 * b * b))
            } else {
                (v - kappa * abs_pow(v, p - 2.0) * v - 2.0 * v * dv * dv) / (1.0 + 2.0 * v * v) - (n - 1.0) * dv / rho
            };
            [dv, d2, omega * rho.powi(self.dim as i32 - 1) * v * v]
        }
    }

    fn shoot(&self, b: f64, mut track: Option<&mut Track>) -> Result<ShotResult> {
        let mut zeros = 0;
        let mut sign = 1.0;
        let d2_origin = self.rhs(b)(0.0, &[b, 0.0, 0.0])[1];
        let mut phase = if d2_origin > 0.0 { Phase::Rising } else { Phase::Falling };
        let mut prev = [0.0, b, 0.0, 0.0];
        let mut result = None;
        if let Some(t) = track.as_deref_mut() {
            t.clear();
            t.push(prev);
        }
        let ceiling = 1e6 * b.max(1.0);
        integrate(self.rhs(b), 0.0, [b, 0.0, 0.0], &[RHO_LIMIT], self.tol, |rho, y, _| {
            let now = [rho, y[0], y[1], y[2]];
            if let Some(t) = track.as_deref_mut() {
                t.push(now);
            }
            if !(y[0].abs() < ceiling) {
                result = Some(ShotResult {
                    shot: Shot::Over,
                    rho_cut: rho,
                    mass: y[2],
                });
                return Flow::Stop;
            }
            // w is the current lobe oriented to be positive
            let a = (prev[0], sign * prev[1], sign * prev[2]);
            let c = (rho, sign * y[0], sign * y[1]);
            let flow = match phase {
                Phase::Rising => {
                    if c.2 <= 0.0 {
                        phase = Phase::Falling;
                    }
                    if c.1 <= 0.0 {
                        // crossed before turning (only possible for a degenerate lobe)
                        zeros += 1;
                        sign = -sign;
                        phase = Phase::Rising;
                    }
                    Flow::Continue
                }
                Phase::Falling => match bottom_of_lobe(a, c) {
                    None => Flow::Continue,
                    Some((t_min, w_min)) if w_min > 0.0 => {
                        result = Some(ShotResult {
                            shot: Shot::Under,
                            rho_cut: t_min,
                            mass: prev[3],
                        });
                        Flow::Stop
                    }
                    Some(_) => {
                        zeros += 1;
                        if zeros > self.k {
                            result = Some(ShotResult {
                                shot: Shot::Over,
                                rho_cut: rho,
                                mass: y[2],
                            });
                            Flow::Stop
                        } else {
                            sign = -sign;
                            phase = if sign * y[1] > 0.0 {
                                Phase::Rising
                            } else {
                                Phase::Falling
                            };
                            Flow::Continue
                        }
                    }
                },
            };
            prev = now;
            flow
        })?;
        result
            .ok_or_else(|| Error::ShootingBracket(format!("shot from u(0) = {b} unresolved before rho = {RHO_LIMIT}")))
    }

    /// Height separating at-most-`k`-zero undershoots from overshoots, as the
    /// bracket `(under, over)` narrowed to adjacent doubles.
    fn bisect(&self) -> Result<(f64, f64)> {
        let equilibrium = self.kappa.powf(-1.0 / (self.p - 2.0));
        let mut lo = equilibrium * (1.0 + 1e-9);
        if self.shoot(lo, None)?.shot != Shot::Under {
            return Err(Error::ShootingBracket(format!(
                "shot just above the equilibrium height {equilibrium} does not undershoot"
            )));
        }
        let mut hi = 2.0 * lo;
        let mut found = false;
        for _ in 0..200 {
            if self.shoot(hi, None)?.shot == Shot::Over {
                found = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if !found {
            return Err(Error::ShootingBracket(format!(
                "no overshoot with {} zeros found",
                self.k + 1
            )));
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.shoot(mid, None)?.shot {
                Shot::Under => lo = mid,
                Shot::Over => hi = mid,
            }
        }
        Ok((lo, hi))
    }
}

/// Minimum of the cubic Hermite reconstruction of a falling step that turns
/// upward or touches zero.
fn bottom_of_lobe(a: (f64, f64, f64), b: (f64, f64, f64)) -> Option<(f64, f64)> {
    let (t0, w0, d0) = a;
    let (t1, w1, d1) = b;
    if w1 > 0.0 && d1 <= 0.0 {
        return None;
    }
    let h = t1 - t0;
    let mut best = (t1, w1);
    for i in 1..=64 {
        let x = i as f64 / 64.0;
        let w = hermite(w0, h * d0, w1, h * d1, x);
        if w < best.1 {
            best = (t0 + x * h, w);
        }
    }
    Some(best)
}

fn hermite(w0: f64, m0: f64, w1: f64, m1: f64, x: f64) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    (2.0 * x3 - 3.0 * x2 + 1.0) * w0 + (x3 - 2.0 * x2 + x) * m0 + (-2.0 * x3 + 3.0 * x2) * w1 + (x3 - x2) * m1
}

/// Shot matched at one multiplier.
struct Matched {
    lambda: f64,
    height: f64,
    rho_cut: f64,
    mass: f64,
}

fn mass_at(params: &ModelParams, k: usize, lambda: f64) -> Result<Matched> {
    let shooter = Shooter {
        dim: params.dim,
        p: params.p,
        k,
        kappa: 1.0 / lambda,
        tol: Tolerances::default(),
    };
    let (lo, _) = shooter.bisect()?;
    let shot = shooter.shoot(lo, None)?;
    Ok(Matched {
        lambda,
        height: lo,
        rho_cut: shot.rho_cut,
        mass: shot.mass * lambda.powf(-0.5 * params.dim as f64),
    })
}

/// `lambda` with mass `a`: secant on `(ln lambda, ln mass)`, falling back to
/// a bracket from a logarithmic scan and bisection.
fn match_mass(params: &ModelParams, k: usize) -> Result<Matched> {
    let target = params.a.ln();
    let f = |m: &Matched| m.mass.ln() - target;

    let mut m0 = mass_at(params, k, 1.0)?;
    let mut m1 = mass_at(params, k, 10.0)?;
    for _ in 0..60 {
        let (f0, f1) = (f(&m0), f(&m1));
        if f1.abs() <= MASS_TOLERANCE {
            return Ok(m1);
        }
        if f1 == f0 {
            break;
        }
        let (x0, x1) = (m0.lambda.ln(), m1.lambda.ln());
        let step = (-f1 * (x1 - x0) / (f1 - f0)).clamp(-5.0, 5.0);
        let x2 = (x1 + step).clamp(LAMBDA_MIN.ln(), LAMBDA_MAX.ln());
        if x2 == x1 {
            break;
        }
        let Ok(m2) = mass_at(params, k, x2.exp()) else {
            break;
        };
        m0 = m1;
        m1 = m2;
    }

    // logarithmic scan for a sign change, then bisection in ln lambda
    let mut prev: Option<Matched> = None;
    let mut x = LAMBDA_MIN.ln();
    let step = 10f64.ln();
    while x <= LAMBDA_MAX.ln() + 1e-9 {
        if let Ok(m) = mass_at(params, k, x.exp()) {
            if let Some(p) = prev.take() {
                if f(&p).signum() != f(&m).signum() {
                    return bisect_mass(params, k, p, m, &f);
                }
            }
            prev = Some(m);
        }
        x += step;
    }
    Err(Error::MassNotMatched {
        target: params.a,
        lambda_max: LAMBDA_MAX,
        reason: format!("no sign change of mass - a found for {k} nodes"),
    })
}

fn bisect_mass(
    params: &ModelParams,
    k: usize,
    mut lo: Matched,
    mut hi: Matched,
    f: &dyn Fn(&Matched) -> f64,
) -> Result<Matched> {
    for _ in 0..200 {
        let x = 0.5 * (lo.lambda.ln() + hi.lambda.ln());
        let m = mass_at(params, k, x.exp())?;
        if f(&m).abs() <= MASS_TOLERANCE || (hi.lambda / lo.lambda).ln().abs() < 1e-15 {
            return Ok(m);
        }
        if f(&m).signum() == f(&lo).signum() {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(lo)
}

/// Radial solution of mass `params.a` with exactly `k` nodes, sampled on
/// `grid.nodes` points of `[0, min(R, grid.r_max)]`, where `R` is the radius
/// where the shot turns. The report carries the shooting multiplier.
pub fn excited_state(params: &ModelParams, k: usize, grid: &GridConfig) -> Result<SolveReport> {
    let params = params.normalized().with_mu(0.0);
    params.validate()?;
    params.validate_excited()?;
    if k > MAX_NODES {
        return Err(Error::Config(format!("node count {k} exceeds {MAX_NODES}")));
    }
    let matched = match_mass(&params, k)?;
    let shooter = Shooter {
        dim: params.dim,
        p: params.p,
        k,
        kappa: 1.0 / matched.lambda,
        tol: Tolerances::default(),
    };
    let mut track = Track::new();
    shooter.shoot(matched.height, Some(&mut track))?;

    let scale = matched.lambda.sqrt();
    let rho_end = matched.rho_cut.min(grid.r_max * scale);
    let rhs = shooter.rhs(matched.height);
    let rho_nodes = curvature_nodes(&track, rho_end, grid.nodes.max(3), |rho, t| {
        rhs(rho, &[t[1], t[2], t[3]])[1]
    });
    let out = Arc::new(RadialGrid::from_nodes(
        params.dim,
        rho_nodes.iter().map(|rho| rho / scale).collect(),
    )?);
    let values = sample_track(&track, out.nodes(), scale);
    let profile = RadialField::new(out, values)?;

    let mut report = SolveReport::evaluate(profile, &params, NODE_DEAD_BAND)?;
    report.lambda = matched.lambda;
    report.el_residual = el_residual(&report.profile, matched.lambda, &params);
    report.label = Some(SHOOTING_SURROGATE);
    report.iterations_total = 0;
    let mass_ok = ((matched.mass - params.a) / params.a).abs() <= 1e-9;
    report.converged = mass_ok
        && report.node_count == k
        && report.pohozaev_residual <= 1e-6
        && report.el_residual <= 1e-3
        && report.lambda > 0.0;
    Ok(report)
}

/// `count` nodes on `[0, rho_end]` with density proportional to
/// `alpha + |v''|^{1/2}`, `alpha` being the mean of `|v''|^{1/2}`: half the
/// nodes follow the curvature, which concentrates them in the thin layers
/// where the profile changes sign. The widths are then smoothed so that the
/// grading stays gentle enough for three-point differences.
fn curvature_nodes(track: &Track, rho_end: f64, count: usize, second: impl Fn(f64, &[f64; 4]) -> f64) -> Vec<f64> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(track.len());
    for t in track {
        if t[0] >= rho_end {
            break;
        }
        pts.push((t[0], second(t[0], t).abs().sqrt()));
    }
    let last = pts.last().map_or(0.0, |p| p.1);
    pts.push((rho_end, last));
    let mut raw = vec![0.0; pts.len()];
    for i in 1..pts.len() {
        raw[i] = raw[i - 1] + 0.5 * (pts[i].1 + pts[i - 1].1) * (pts[i].0 - pts[i - 1].0);
    }
    let alpha = (raw[raw.len() - 1] / rho_end).max(f64::MIN_POSITIVE);
    let arc: Vec<f64> = raw.iter().zip(&pts).map(|(c, p)| c + alpha * p.0).collect();
    let total = arc[arc.len() - 1];
    let mut nodes = Vec::with_capacity(count);
    let mut j = 0;
    for i in 0..count {
        let target = total * i as f64 / (count - 1) as f64;
        while j + 2 < arc.len() && arc[j + 1] < target {
            j += 1;
        }
        let span = arc[j + 1] - arc[j];
        let x = if span > 0.0 {
            ((target - arc[j]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        nodes.push(pts[j].0 + x * (pts[j + 1].0 - pts[j].0));
    }
    nodes[0] = 0.0;
    nodes[count - 1] = rho_end;
    nodes.dedup();
    let passes = nodes.len() / 40;
    smooth_spacing(&mut nodes, passes);
    nodes
}

/// Three-point averaging of the cell widths, repeated `passes` times, with
/// the endpoints held fixed.
fn smooth_spacing(nodes: &mut [f64], passes: usize) {
    let n = nodes.len();
    let end = nodes[n - 1];
    let mut h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    let m = h.len();
    let mut next = h.clone();
    for _ in 0..passes {
        for i in 0..m {
            let left = h[i.saturating_sub(1)];
            let right = h[(i + 1).min(m - 1)];
            next[i] = 0.25 * (left + 2.0 * h[i] + right);
        }
        std::mem::swap(&mut h, &mut next);
    }
    let total: f64 = h.iter().sum();
    let mut r = 0.0;
    for i in 1..n {
        r += h[i - 1] * end / total;
        nodes[i] = r;
    }
    nodes[n - 1] = end;
}

/// Cubic Hermite interpolation of the trajectory at `r * scale`.
fn sample_track(track: &Track, r: &[f64], scale: f64) -> Vec<f64> {
    let mut j = 0;
    r.iter()
        .map(|&ri| {
            let rho = ri * scale;
            while j + 2 < track.len() && track[j + 1][0] < rho {
                j += 1;
            }
            let (a, b) = (track[j], track[j + 1]);
            let h = b[0] - a[0];
            if h <= 0.0 {
                return a[1];
            }
            let x = ((rho - a[0]) / h).clamp(0.0, 1.0);
            hermite(a[1], h * a[2], b[1], h * b[2], x)
        })
        .collect()
}
