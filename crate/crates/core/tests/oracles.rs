//! Library values against oracles that share no code with the library.

use std::f64::consts::PI;

use qnls::grid::{surface_area, GridConfig};
use qnls::params::critical_exponent;
use qnls::solvers::{a_star, excited_state, normalized_ground_state, shoot_qp, GroundStateOptions};
use qnls::ModelParams;

/// For `N = 1`, `p = 8` the first integral `(w')^2 = 2w - w^4/2` gives
/// `||Q||_1 = 2 int_0^beta w dw / sqrt(2w - w^4/2)`; with `v = w^{3/2}` this is
/// `(4 sqrt 2 / 3) int_0^2 dv / sqrt(4 - v^2) = 2 sqrt(2) pi / 3`.
const A_STAR_1: f64 = 2.0 * std::f64::consts::SQRT_2 * PI / 3.0;

/// Fixed-step RK4 shooting for `w'' + (N-1) w'/r = 1 - w^{p/2-1}`, bisecting
/// on `w(0)` between undershoot (`w'` returns to zero) and overshoot (`w`
/// crosses zero). Returns `(beta, ||Q||_1)`.
fn rk4_qp(dim: usize, p: f64) -> (f64, f64) {
    let n = dim as f64;
    let q = 0.5 * p - 1.0;
    let h = 2e-4;
    let shoot = |beta: f64| -> (bool, f64) {
        let f = |r: f64, y: [f64; 3]| -> [f64; 3] {
            let w = y[0].max(0.0);
            [
                y[1],
                1.0 - w.powf(q) - (n - 1.0) * y[1] / r,
                r.powi(dim as i32 - 1) * y[0],
            ]
        };
        let r0 = 1e-6;
        let c = (1.0 - beta.powf(q)) / n;
        let mut y = [beta + 0.5 * c * r0 * r0, c * r0, 0.0];
        let mut r = r0;
        loop {
            let k1 = f(r, y);
            let k2 = f(r + 0.5 * h, std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = f(r + 0.5 * h, std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = f(r + h, std::array::from_fn(|i| y[i] + h * k3[i]));
            let next: [f64; 3] = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
            r += h;
            if next[0] <= 0.0 {
                return (true, y[2]);
            }
            if next[1] >= 0.0 {
                return (false, next[2]);
            }
            y = next;
        }
    };
    let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
    while !shoot(hi).0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid).0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi), surface_area(dim) * shoot(hi).1)
}

#[test]
fn threshold_mass_in_one_dimension_is_closed_form() {
    let a = a_star(1).unwrap();
    assert!((a - A_STAR_1).abs() <= 1e-7 * A_STAR_1, "{a} vs {A_STAR_1}");
}

#[test]
fn rk4_oracle_reproduces_closed_form() {
    let (beta, mass) = rk4_qp(1, 8.0);
    assert!((beta - 4f64.powf(1.0 / 3.0)).abs() < 1e-6);
    assert!((mass - A_STAR_1).abs() < 1e-3 * A_STAR_1);
}

#[test]
fn threshold_mass_matches_rk4_oracle() {
    for dim in 2..=3 {
        let p = critical_exponent(dim);
        let (beta, mass) = rk4_qp(dim, p);
        let q = shoot_qp(p, dim, &GridConfig::default()).unwrap();
        assert!(
            (q.beta - beta).abs() <= 1e-5 * beta,
            "N={dim}: beta {} vs {beta}",
            q.beta
        );
        let a = a_star(dim).unwrap();
        assert!((a - mass).abs() <= 1e-3 * mass, "N={dim}: a_* {a} vs {mass}");
    }
}

#[test]
fn supercritical_qp_heights_match_rk4_oracle() {
    for (dim, p) in [(1, 10.0), (2, 7.0), (3, 6.0)] {
        let (beta, _) = rk4_qp(dim, p);
        let q = shoot_qp(p, dim, &GridConfig::default()).unwrap();
        assert!(
            (q.beta - beta).abs() <= 1e-5 * beta,
            "(N,p)=({dim},{p}): {} vs {beta}",
            q.beta
        );
    }
}

/// Frozen from the k = 0 shooting solver, which shares no code with the
/// descent solver beyond the functionals.
const ENERGY_2_7_1: f64 = 8751.487;

#[test]
fn ground_energy_matches_frozen_shooting_value() {
    let params = ModelParams::new(2, 7.0, 1.0);
    let shot = excited_state(&params, 0, &GridConfig::new(40.0, 16001)).unwrap();
    assert!(
        (shot.energy - ENERGY_2_7_1).abs() <= 1e-6 * ENERGY_2_7_1,
        "{}",
        shot.energy
    );
    let ground = normalized_ground_state(&params, &GroundStateOptions::default()).unwrap();
    assert!(
        (ground.energy - ENERGY_2_7_1).abs() <= 1e-5 * ENERGY_2_7_1,
        "{}",
        ground.energy
    );
}
