//! The mass-preserving dilation `s * u(r) = e^{Ns/2} u(e^s r)` and the
//! Pohozaev projection along it.
//!
//! All fiber arithmetic is done on [`FiberMasses`]: every mass transforms by a
//! pure exponential in `s`, so no field is resampled while root finding.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functionals::{compute_masses, fiber_rates, gamma_exponent, EnergyWeights, FiberMasses};
use crate::grid::{resample, RadialField};
use crate::params::ModelParams;

/// `|s|` up to which the root bracket is expanded.
pub const FIBER_S_LIMIT: f64 = 50.0;
const MAX_NEWTON: usize = 60;

/// Root `s_mu(u)` of the fiber derivative and the fiber-maximal energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSolveResult {
    pub s_star: f64,
    pub energy_at_star: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// `s * u` sampled on the grid `r e^{-s}`, where it is exact.
pub fn dilate(u: &RadialField, s: f64) -> Result<RadialField> {
    let dim = u.grid().dim() as f64;
    let grid = Arc::new(u.grid().scaled((-s).exp())?);
    let amp = (0.5 * dim * s).exp();
    RadialField::new(grid, u.values().iter().map(|v| amp * v).collect())
}

/// `s * u`, resampled onto the grid of `u` for `|s| <= 1` and left on the
/// rescaled grid otherwise.
pub fn scale_field(u: &RadialField, s: f64) -> Result<RadialField> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    let exact = dilate(u, s)?;
    if s.abs() > 1.0 {
        Ok(exact)
    } else {
        Ok(resample(&exact, u.grid()))
    }
}

/// `I_mu(s * u)` from the masses of `u`.
pub fn fiber_energy(m: &FiberMasses, s: f64, params: &ModelParams) -> f64 {
    EnergyWeights::on_fiber(params, s).apply(m)
}

/// `d/ds I_mu(s * u)` from the masses of `u`.
pub fn fiber_q(m: &FiberMasses, s: f64, params: &ModelParams) -> f64 {
    fiber_q_terms(m, s, params).iter().sum()
}

fn fiber_q_terms(m: &FiberMasses, s: f64, params: &ModelParams) -> [f64; 4] {
    let n = params.dim as f64;
    let (kt, kg, kq, kp) = fiber_rates(params);
    let gt = gamma_exponent(params.theta, params.dim);
    let gp = gamma_exponent(params.p, params.dim);
    let pert = if params.mu == 0.0 {
        0.0
    } else {
        (1.0 + gt) * params.mu * (kt * s).exp() * m.a_theta
    };
    [
        pert,
        (kg * s).exp() * m.a_grad,
        (2.0 + n) * (kq * s).exp() * m.a_quad,
        -gp * (kp * s).exp() * m.a_p,
    ]
}

/// `|fiber_q| / sum |terms|` at `s`.
pub fn fiber_q_relative(m: &FiberMasses, s: f64, params: &ModelParams) -> f64 {
    let t = fiber_q_terms(m, s, params);
    let scale: f64 = t.iter().map(|x| x.abs()).sum();
    if scale == 0.0 {
        0.0
    } else {
        t.iter().sum::<f64>().abs() / scale
    }
}

/// `e^{-p gamma_p s} fiber_q(s)` in logarithmic form: the positive terms carry
/// decay rates `d_k >= 0`, and the root solves
/// `ln sum_k c_k e^{-d_k s} = ln rhs`.
struct LogFiber {
    log_coef: Vec<f64>,
    decay: Vec<f64>,
    log_rhs: f64,
}

impl LogFiber {
    fn new(m: &FiberMasses, params: &ModelParams) -> Result<Self> {
        let n = params.dim as f64;
        let (kt, kg, kq, kp) = fiber_rates(params);
        let gt = gamma_exponent(params.theta, params.dim);
        let gp = gamma_exponent(params.p, params.dim);
        let mut positive = vec![(kg, m.a_grad), (kq, (2.0 + n) * m.a_quad)];
        if params.mu != 0.0 {
            positive.push((kt, (1.0 + gt) * params.mu * m.a_theta));
        }
        let tol = 1e-12 * kp;
        let mut rhs = gp * m.a_p;
        let mut log_coef = Vec::new();
        let mut decay = Vec::new();
        for (rate, c) in positive {
            if c == 0.0 {
                continue;
            }
            let d = kp - rate;
            if d.abs() <= tol {
                rhs -= c;
            } else if d < 0.0 {
                return Err(Error::NoFiberRoot {
                    limit: FIBER_S_LIMIT,
                    reason: format!(
                        "p = {} is below the mass-critical exponent {}; the fiber has no unique maximum",
                        params.p,
                        params.critical_exponent()
                    ),
                });
            } else {
                log_coef.push(c.ln());
                decay.push(d);
            }
        }
        if m.a_p == 0.0 && log_coef.is_empty() {
            return Err(Error::NoFiberRoot {
                limit: FIBER_S_LIMIT,
                reason: "zero field".into(),
            });
        }
        if rhs <= 0.0 {
            return Err(Error::NoFiberRoot {
                limit: FIBER_S_LIMIT,
                reason: if m.a_p == 0.0 {
                    "A_p = 0, fiber energy is increasing".into()
                } else {
                    "field outside O (A_quad >= N/(4(N+1)) A_p): the fiber energy grows without bound".into()
                },
            });
        }
        if log_coef.is_empty() {
            return Err(Error::NoFiberRoot {
                limit: FIBER_S_LIMIT,
                reason: "no gradient terms with lower growth rate (mu = 0 and A_grad = 0)".into(),
            });
        }
        Ok(Self {
            log_coef,
            decay,
            log_rhs: rhs.ln(),
        })
    }

    /// `(phi, phi')` with `phi` strictly decreasing.
    fn eval(&self, s: f64) -> (f64, f64) {
        let exps: Vec<f64> = self.log_coef.iter().zip(&self.decay).map(|(c, d)| c - d * s).collect();
        let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut dsum = 0.0;
        for (e, d) in exps.iter().zip(&self.decay) {
            let w = (e - top).exp();
            sum += w;
            dsum -= d * w;
        }
        (top + sum.ln() - self.log_rhs, dsum / sum)
    }
}

/// Unique root of `fiber_q` by bracket expansion and safeguarded Newton.
pub fn solve_s_mu(m: &FiberMasses, params: &ModelParams) -> Result<FiberSolveResult> {
    let f = LogFiber::new(m, params)?;
    let (phi0, _) = f.eval(0.0);
    let mut iterations = 0;
    let (mut lo, mut hi) = if phi0 == 0.0 {
        (0.0, 0.0)
    } else {
        let dir = if phi0 > 0.0 { 1.0 } else { -1.0 };
        let mut inner = 0.0;
        let mut step = 1.0_f64;
        loop {
            let outer = (dir * step).clamp(-FIBER_S_LIMIT, FIBER_S_LIMIT);
            iterations += 1;
            let (phi, _) = f.eval(outer);
            if phi == 0.0 || phi.signum() != phi0.signum() {
                break if dir > 0.0 { (inner, outer) } else { (outer, inner) };
            }
            if outer.abs() >= FIBER_S_LIMIT {
                return Err(Error::NoFiberRoot {
                    limit: FIBER_S_LIMIT,
                    reason: "no sign change of the fiber derivative".into(),
                });
            }
            inner = outer;
            step *= 2.0;
        }
    };
    let bracket = (lo, hi);

    let mut s = 0.5 * (lo + hi);
    if lo != hi {
        let (phi_lo, _) = f.eval(lo);
        if phi_lo == 0.0 {
            s = lo;
        } else {
            for _ in 0..MAX_NEWTON + 200 {
                iterations += 1;
                let (phi, dphi) = f.eval(s);
                if phi == 0.0 {
                    break;
                }
                if phi > 0.0 {
                    lo = s;
                } else {
                    hi = s;
                }
                let newton = s - phi / dphi;
                let next = if newton > lo && newton < hi && iterations <= MAX_NEWTON {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
                let done = (next - s).abs() <= 4.0 * f64::EPSILON * s.abs().max(1.0)
                    || hi - lo <= 4.0 * f64::EPSILON * s.abs().max(1.0);
                s = next;
                if done {
                    break;
                }
            }
        }
    }
    Ok(FiberSolveResult {
        s_star: s,
        energy_at_star: fiber_energy(m, s, params),
        iterations,
        bracket,
    })
}

/// `K_mu(u) = I_mu(s_mu(u) * u)`.
pub fn fiber_max_energy(u: &RadialField, params: &ModelParams) -> Result<f64> {
    solve_s_mu(&compute_masses(u, params), params).map(|r| r.energy_at_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{energy_i_mu, pohozaev_q_mu};
    use crate::grid::RadialGrid;

    fn field(dim: usize) -> RadialField {
        let g = Arc::new(RadialGrid::uniform(dim, 20.0, 4001).unwrap());
        RadialField::from_fn(g, |r| 0.8 * (-r * r / 2.0).exp() * (1.0 + 0.3 * r * r)).unwrap()
    }

    #[test]
    fn fiber_at_origin_matches_functionals() {
        let params = ModelParams::new(2, 7.0, 1.0).with_mu(0.3);
        let m = compute_masses(&field(2), &params);
        assert!((fiber_energy(&m, 0.0, &params) - energy_i_mu(&m, &params)).abs() < 1e-14);
        assert!((fiber_q(&m, 0.0, &params) - pohozaev_q_mu(&m, &params)).abs() < 1e-14);
    }

    #[test]
    fn fiber_q_is_the_s_derivative() {
        let params = ModelParams::new(3, 6.0, 1.0).with_mu(0.5);
        let m = compute_masses(&field(3), &params);
        for s in [-1.0, -0.2, 0.0, 0.4, 1.3] {
            let h = 1e-5;
            let fd = (fiber_energy(&m, s + h, &params) - fiber_energy(&m, s - h, &params)) / (2.0 * h);
            assert!((fd - fiber_q(&m, s, &params)).abs() < 1e-8 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn limits_along_the_fiber() {
        let params = ModelParams::new(2, 7.0, 1.0);
        let m = compute_masses(&field(2), &params);
        let low = fiber_energy(&m, -30.0, &params);
        assert!(low > 0.0 && low < 1e-20);
        assert!(fiber_energy(&m, 10.0, &params) < -1e10);
    }

    #[test]
    fn root_is_found_and_signs_agree() {
        let params = ModelParams::new(2, 7.0, 1.0).with_mu(0.1);
        let m = compute_masses(&field(2), &params);
        let res = solve_s_mu(&m, &params).unwrap();
        assert!(fiber_q_relative(&m, res.s_star, &params) < 1e-10);
        assert!(res.energy_at_star > 0.0);
        assert_eq!(res.s_star < 0.0, pohozaev_q_mu(&m, &params) < 0.0);
        assert!(res.bracket.0 <= res.s_star && res.s_star <= res.bracket.1);
        for ds in [-0.3, -0.01, 0.01, 0.3] {
            assert!(fiber_energy(&m, res.s_star + ds, &params) < res.energy_at_star);
        }
    }

    #[test]
    fn root_on_the_manifold_is_zero() {
        let params = ModelParams::new(3, 6.0, 1.0);
        let mut m = compute_masses(&field(3), &params);
        let t = crate::functionals::pohozaev_terms(&m, &params);
        m.a_p = (t[0] + t[1] + t[2]) / gamma_exponent(params.p, 3);
        let res = solve_s_mu(&m, &params).unwrap();
        assert!(res.s_star.abs() < 1e-10);
    }

    #[test]
    fn dilation_is_exact_on_masses() {
        let params = ModelParams::new(3, 6.0, 1.0).with_mu(0.5);
        let u = field(3);
        let m = compute_masses(&u, &params);
        let (kt, kg, kq, kp) = fiber_rates(&params);
        for s in [-1.5, 0.7, 2.0] {
            let ms = compute_masses(&dilate(&u, s).unwrap(), &params);
            assert!((ms.mass / m.mass - 1.0).abs() < 1e-12);
            assert!((ms.a_grad / (m.a_grad * (kg * s).exp()) - 1.0).abs() < 1e-12);
            assert!((ms.a_quad / (m.a_quad * (kq * s).exp()) - 1.0).abs() < 1e-12);
            assert!((ms.a_p / (m.a_p * (kp * s).exp()) - 1.0).abs() < 1e-12);
            assert!((ms.a_theta / (m.a_theta * (kt * s).exp()) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_field_group_property() {
        let u = field(2);
        let a = scale_field(&scale_field(&u, 0.3).unwrap(), 0.4).unwrap();
        let b = scale_field(&u, 0.7).unwrap();
        let err = a
            .values()
            .iter()
            .zip(b.values())
            .fold(0.0_f64, |e, (x, y)| e.max((x - y).abs()));
        assert!(err < 1e-6, "{err}");
        assert_eq!(scale_field(&u, 0.0).unwrap(), u);
    }

    #[test]
    fn critical_field_outside_o_has_no_root() {
        let params = ModelParams::new(1, 8.0, 1.0);
        let m = FiberMasses {
            a_theta: 0.0,
            a_grad: 1.0,
            a_quad: 1.0,
            a_p: 4.0,
            mass: 1.0,
        };
        let err = solve_s_mu(&m, &params).unwrap_err();
        assert!(err.to_string().contains("outside O"), "{err}");
        let inside = FiberMasses { a_p: 16.0, ..m };
        assert!(solve_s_mu(&inside, &params).is_ok());
    }
}
