//! Free-boundary ground state `Q_p` of `-Δw + 1 = w^{p/2-1}` and the
//! threshold mass `a_* = ||Q_{4+4/N}||_1`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::functionals::SharpGn;
use crate::grid::{surface_area, GridConfig, RadialField};
use crate::ode::{integrate, Flow, Tolerances};
use crate::params::{critical_exponent, exponent_ceiling};

/// Compactly supported profile `Q_p` on a grid.
#[derive(Debug, Clone)]
pub struct QpProfile {
    pub profile: RadialField,
    /// `Q_p'` from the integrator, zero beyond the support.
    pub derivative: RadialField,
    pub support_radius: f64,
    pub beta: f64,
    pub l1_norm: f64,
    pub p: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `w` reaches zero with `w' < 0`.
    Overshoot,
    /// `w'` returns to zero with `w > 0`.
    Undershoot,
}

struct Shooter {
    dim: usize,
    q: f64,
    r_limit: f64,
    tol: Tolerances,
}

impl Shooter {
    fn rhs(&self, beta: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
        let n = self.dim as f64;
        let omega = surface_area(self.dim);
        move |r, y| {
            let w = y[0].max(0.0);
            let source = 1.0 - w.powf(self.q);
            let w2 = if r == 0.0 {
                (1.0 - beta.powf(self.q)) / n
            } else {
                source - (n - 1.0) * y[1] / r
            };
            [y[1], w2, omega * r.powi(self.dim as i32 - 1) * y[0]]
        }
    }

    fn classify(&self, beta: f64) -> Result<Shot> {
        let mut shot = None;
        let mut prev = (0.0, beta, 0.0);
        integrate(
            self.rhs(beta),
            0.0,
            [beta, 0.0, 0.0],
            &[self.r_limit],
            self.tol,
            |t, y, _| {
                let now = (t, y[0], y[1]);
                match bottom_of_step(prev, now) {
                    Some((_, w_min)) => {
                        shot = Some(if w_min <= 0.0 {
                            Shot::Overshoot
                        } else {
                            Shot::Undershoot
                        });
                        Flow::Stop
                    }
                    None => {
                        prev = now;
                        Flow::Continue
                    }
                }
            },
        )?;
        shot.ok_or_else(|| {
            Error::ShootingBracket(format!(
                "trajectory from beta = {beta} neither turned nor crossed zero before r = {}",
                self.r_limit
            ))
        })
    }
}

/// If the step `(t0, w0, w0') -> (t1, w1, w1')` touches zero or turns upward,
/// the point and value of the minimum of its cubic Hermite reconstruction.
fn bottom_of_step(a: (f64, f64, f64), b: (f64, f64, f64)) -> Option<(f64, f64)> {
    let (t0, w0, d0) = a;
    let (t1, w1, d1) = b;
    if w1 > 0.0 && d1 <= 0.0 {
        return None;
    }
    let h = t1 - t0;
    let (m0, m1) = (h * d0, h * d1);
    let eval = |x: f64| {
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * w0 + (x3 - 2.0 * x2 + x) * m0 + (-2.0 * x3 + 3.0 * x2) * w1 + (x3 - x2) * m1
    };
    // derivative: qa x^2 + qb x + qc
    let qa = 6.0 * w0 + 3.0 * m0 - 6.0 * w1 + 3.0 * m1;
    let qb = -6.0 * w0 - 4.0 * m0 + 6.0 * w1 - 2.0 * m1;
    let qc = m0;
    let mut best = (1.0, eval(1.0));
    let mut consider = |x: f64| {
        if (0.0..=1.0).contains(&x) {
            let v = eval(x);
            if v < best.1 {
                best = (x, v);
            }
        }
    };
    if qa.abs() < 1e-300 {
        if qb != 0.0 {
            consider(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (qb + qb.signum() * sq);
            consider(q / qa);
            if q != 0.0 {
                consider(qc / q);
            }
        }
    }
    Some((t0 + best.0 * h, best.1))
}

/// Upper bound of the initial-height search.
pub const BETA_MAX: f64 = 1e3;

/// `Q_p` on the grid of `grid_config`, with the bisection bracket seeded at
/// `(1.001, 2)`.
pub fn shoot_qp(p: f64, dim: usize, grid_config: &GridConfig) -> Result<QpProfile> {
    shoot_qp_from(p, dim, grid_config, (1.0 + 1e-3, 2.0))
}

/// [`shoot_qp`] from a caller-chosen initial bracket `(lo, hi)`; the bracket
/// is widened until it contains the transition.
pub fn shoot_qp_from(p: f64, dim: usize, grid_config: &GridConfig, initial: (f64, f64)) -> Result<QpProfile> {
    if !(p > 2.0 && p < exponent_ceiling(dim)) {
        return Err(Error::ShootingBracket(format!(
            "p = {p} outside (2, {}) for N = {dim}",
            exponent_ceiling(dim)
        )));
    }
    let grid = grid_config.build(dim)?;
    let shooter = Shooter {
        dim,
        q: 0.5 * p - 1.0,
        r_limit: grid.r_max(),
        tol: Tolerances {
            rtol: 1e-13,
            atol: 1e-15,
            ..Tolerances::default()
        },
    };

    let (mut lo, mut hi) = initial;
    if !(lo > 1.0 && hi > lo) {
        return Err(Error::ShootingBracket(format!("invalid initial bracket ({lo}, {hi})")));
    }
    while shooter.classify(lo)? != Shot::Undershoot {
        lo = 1.0 + 0.5 * (lo - 1.0);
        if lo - 1.0 < 1e-12 {
            return Err(Error::ShootingBracket("no undershoot above beta = 1".into()));
        }
    }
    while shooter.classify(hi)? != Shot::Overshoot {
        lo = hi;
        hi *= 2.0;
        if hi > BETA_MAX {
            return Err(Error::ShootingBracket(format!("no overshoot for beta <= {BETA_MAX}")));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shooter.classify(mid)? {
            Shot::Undershoot => lo = mid,
            Shot::Overshoot => hi = mid,
        }
    }
    let beta = lo;

    // final pass on the undershoot side, pinned where w' returns to zero
    let nodes = grid.nodes();
    let mut w = vec![0.0; nodes.len()];
    let mut dw = vec![0.0; nodes.len()];
    w[0] = beta;
    let mut prev = (0.0, [beta, 0.0, 0.0]);
    let mut node = 1;
    let mut turn = None;
    integrate(
        shooter.rhs(beta),
        0.0,
        [beta, 0.0, 0.0],
        &nodes[1..],
        shooter.tol,
        |r, y, at_node| {
            if let Some((r_min, _)) = bottom_of_step((prev.0, prev.1[0], prev.1[1]), (r, y[0], y[1])) {
                turn = Some((prev, (r, *y), r_min));
                return Flow::Stop;
            }
            if at_node {
                w[node] = y[0];
                dw[node] = y[1];
                node += 1;
            }
            prev = (r, *y);
            Flow::Continue
        },
    )?;
    let Some(((r0, y0), (r1, y1), support_radius)) = turn else {
        return Err(Error::ShootingBracket(format!(
            "support radius exceeds R_max = {}",
            grid.r_max()
        )));
    };
    let frac = ((support_radius - r0) / (r1 - r0)).clamp(0.0, 1.0);
    let l1_norm = y0[2] + frac * (y1[2] - y0[2]);
    for i in node..nodes.len() {
        w[i] = 0.0;
        dw[i] = 0.0;
    }
    Ok(QpProfile {
        profile: RadialField::new(grid.clone(), w)?,
        derivative: RadialField::new(grid, dw)?,
        support_radius,
        beta,
        l1_norm,
        p,
        dim,
    })
}

impl QpProfile {
    /// `Q_p^{1/2}`, the optimizer of the Gagliardo-Nirenberg-type inequality.
    pub fn sqrt_profile(&self) -> RadialField {
        let values = self.profile.values().iter().map(|w| w.max(0.0).sqrt()).collect();
        RadialField::new(self.profile.grid().clone(), values).expect("finite profile")
    }

    /// Largest relative residual of `w'' + (N-1)w'/r - 1 + w^{p/2-1}` over
    /// interior nodes at least three cells away from the origin and the free
    /// boundary, with fourth-order differences for `w''`.
    pub fn residual(&self) -> f64 {
        let r = self.profile.grid().nodes();
        let w = self.profile.values();
        let dw = self.derivative.values();
        let n = self.dim as f64;
        let q = 0.5 * self.p - 1.0;
        let scale = self.beta.powf(q).max(1.0);
        let mut worst = 0.0_f64;
        for i in 3..r.len() - 3 {
            if r[i + 3] >= self.support_radius {
                break;
            }
            let h = r[i + 1] - r[i];
            let d2 = (-w[i - 2] + 16.0 * w[i - 1] - 30.0 * w[i] + 16.0 * w[i + 1] - w[i + 2]) / (12.0 * h * h);
            let res = d2 + (n - 1.0) * dw[i] / r[i] - 1.0 + w[i].powf(q);
            worst = worst.max(res.abs() / scale);
        }
        worst
    }
}

fn a_star_cache() -> &'static Mutex<HashMap<usize, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `a_* = ||Q_{4+4/N}||_1` on the default grid, memoized per `N`.
pub fn a_star(dim: usize) -> Result<f64> {
    if let Some(v) = a_star_cache().lock().expect("a_* cache").get(&dim) {
        return Ok(*v);
    }
    let value = shoot_qp(critical_exponent(dim), dim, &GridConfig::default())?.l1_norm;
    a_star_cache().lock().expect("a_* cache").insert(dim, value);
    Ok(value)
}

/// `Q_{p_*}` on the given grid.
pub fn critical_profile(dim: usize, grid_config: &GridConfig) -> Result<QpProfile> {
    shoot_qp(critical_exponent(dim), dim, grid_config)
}

/// `w_a = (a/a_*)^{1/2} Q_{p_*}^{1/2}`, rescaled so that its grid mass is `a`.
pub fn critical_seed(qp: &QpProfile, a: f64) -> RadialField {
    let u = qp.sqrt_profile();
    let grid_mass = u.mass();
    u.scaled_by((a / grid_mass).sqrt())
}

/// Sharp Gagliardo-Nirenberg prefactor measured on `Q_p^{1/2}`.
pub fn sharp_gn(p: f64, dim: usize, grid_config: &GridConfig) -> Result<SharpGn> {
    SharpGn::from_optimizer(&shoot_qp(p, dim, grid_config)?.sqrt_profile(), p)
}
