//! Adaptive Dormand-Prince 5(4) integrator for small autonomous-in-structure
//! systems `y' = f(t, y)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Result of an integration run.
#[derive(Debug, Clone, Copy)]
pub struct Outcome<const D: usize> {
    pub t: f64,
    pub y: [f64; D],
    pub steps: usize,
    pub stopped: bool,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order minus embedded 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `t0` to the last entry of `stops`, landing exactly on each
/// stop. `observe(t, y, at_stop)` runs after every accepted step.
pub fn integrate<const D: usize>(
    f: impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y0: [f64; D],
    stops: &[f64],
    tol: Tolerances,
    mut observe: impl FnMut(f64, &[f64; D], bool) -> Flow,
) -> Result<Outcome<D>> {
    let mut t = t0;
    let mut y = y0;
    let Some(&t_end) = stops.last() else {
        return Ok(Outcome {
            t,
            y,
            steps: 0,
            stopped: false,
        });
    };
    let span = t_end - t0;
    let mut h = (span * 1e-3).max(1e-8).min(span);
    let mut k = [[0.0; D]; 7];
    k[0] = f(t, &y);
    let mut steps = 0;
    let mut next_stop = 0;

    while next_stop < stops.len() {
        if steps >= tol.max_steps {
            return Err(Error::Integrator(format!("step budget exhausted at t = {t}")));
        }
        let target = stops[next_stop];
        let mut hit = false;
        if t + h >= target {
            h = target - t;
            hit = true;
        }
        if h <= 0.0 {
            next_stop += 1;
            continue;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for d in 0..D {
                        ys[d] += h * a * kj[d];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = A[6][j];
            for d in 0..D {
                y_new[d] += h * b * kj[d];
            }
        }
        let mut err = 0.0;
        for d in 0..D {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[d];
            }
            let sc = tol.atol + tol.rtol * y[d].abs().max(y_new[d].abs());
            err += (h * e / sc).powi(2);
        }
        let err = (err / D as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            if h < 1e-300 {
                return Err(Error::Integrator(format!("non-finite state near t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            steps += 1;
            t = if hit { target } else { t + h };
            y = y_new;
            k[0] = k[6];
            if hit {
                next_stop += 1;
            }
            if observe(t, &y, hit) == Flow::Stop {
                return Ok(Outcome {
                    t,
                    y,
                    steps,
                    stopped: true,
                });
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }
    }
    Ok(Outcome {
        t,
        y,
        steps,
        stopped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let stops: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let mut max_err = 0.0_f64;
        integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            &stops,
            Tolerances::default(),
            |t, y, at_stop| {
                if at_stop {
                    max_err = max_err.max((y[0] - t.cos()).abs());
                }
                Flow::Continue
            },
        )
        .unwrap();
        assert!(max_err < 1e-10, "{max_err}");
    }

    #[test]
    fn observer_can_stop() {
        let out = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            &[10.0],
            Tolerances::default(),
            |_, y, _| if y[0] < 0.5 { Flow::Stop } else { Flow::Continue },
        )
        .unwrap();
        assert!(out.stopped && out.t < 1.0);
    }
}
