use proptest::prelude::*;

use qnls::functionals::{energy_i_mu, manifold_energy_identity, pohozaev_q_mu};
use qnls::grid::GridConfig;
use qnls::params::critical_exponent;
use qnls::solvers::{a_star, normalized_ground_state, ContinuationSchedule, GroundStateOptions};
use qnls::{compute_masses, fiber_energy, solve_s_mu, FiberMasses, ModelParams, RadialField};

fn field(dim: usize, amp: f64, width: f64, shift: f64) -> RadialField {
    let grid = GridConfig::new(12.0, 801).build(dim).unwrap();
    RadialField::from_fn(grid, |r| {
        amp * (-(r / width).powi(2)).exp() + 0.3 * amp * (-(r - shift).powi(2)).exp()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_grows_with_mu(amp in 0.2..3.0f64, width in 0.3..2.0f64, shift in 0.0..4.0f64, mu1 in 0.0..1.0f64, dmu in 0.0..1.0f64) {
        let params = ModelParams::new(2, 7.0, 1.0);
        let m = compute_masses(&field(2, amp, width, shift), &params.with_mu(mu1));
        let low = energy_i_mu(&m, &params.with_mu(mu1));
        let high = energy_i_mu(&m, &params.with_mu(mu1 + dmu));
        prop_assert!(high >= low);
    }

    #[test]
    fn manifold_identity_holds(amp in 0.2..3.0f64, width in 0.3..2.0f64, shift in 0.0..4.0f64, mu in 0.0..1.0f64) {
        for (dim, p) in [(2usize, 7.0), (3, 6.0)] {
            let params = ModelParams::new(dim, p, 1.0).with_mu(mu);
            let m = compute_masses(&field(dim, amp, width, shift), &params);
            let pg = p * qnls::functionals::gamma_exponent(p, dim);
            let lhs = energy_i_mu(&m, &params) - pohozaev_q_mu(&m, &params) / pg;
            let rhs = manifold_energy_identity(&m, &params);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (m.a_p + m.a_grad + m.a_quad + m.a_theta));
        }
    }

    #[test]
    fn fiber_root_is_the_maximum(a_theta in 0.0..10.0f64, a_grad in 0.01..10.0f64, a_quad in 0.01..10.0f64, a_p in 0.01..10.0f64, mu in 0.0..1.0f64) {
        let params = ModelParams::new(3, 6.0, 1.0).with_mu(mu);
        let m = FiberMasses { a_theta, a_grad, a_quad, a_p, mass: 1.0 };
        let root = solve_s_mu(&m, &params).unwrap();
        for ds in [-0.5, -1e-3, 1e-3, 0.5] {
            prop_assert!(fiber_energy(&m, root.s_star + ds, &params) <= root.energy_at_star);
        }
    }
}

#[test]
fn ground_energy_is_stable_under_seed_and_schedule() {
    let params = ModelParams::new(2, 7.0, 1.0);
    let base = normalized_ground_state(&params, &GroundStateOptions::default()).unwrap();
    let grid = GridConfig::default().build(2).unwrap();
    let seeded = GroundStateOptions {
        seed: Some(RadialField::from_fn(grid, |r| (1.0 + r).powi(-4)).unwrap()),
        ..Default::default()
    };
    let from_seed = normalized_ground_state(&params, &seeded).unwrap();
    let refined = GroundStateOptions {
        schedule: ContinuationSchedule::default().refined(),
        ..Default::default()
    };
    let from_schedule = normalized_ground_state(&params, &refined).unwrap();
    for other in [&from_seed, &from_schedule] {
        assert!(other.converged);
        assert!((other.energy - base.energy).abs() <= 1e-3 * base.energy);
    }
}

#[test]
fn stage_energies_do_not_increase() {
    let report = normalized_ground_state(&ModelParams::new(3, 6.0, 1.0), &GroundStateOptions::default()).unwrap();
    let e = &report.stage_energies;
    assert!(e.len() >= 2);
    for w in e.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{e:?}");
    }
}

#[test]
fn critical_ground_state_exists_above_threshold() {
    let a = 1.1 * a_star(1).unwrap();
    let report = normalized_ground_state(
        &ModelParams::new(1, critical_exponent(1), a),
        &GroundStateOptions::default(),
    )
    .unwrap();
    assert!(report.converged && report.lambda > 0.0);
    assert!((report.mass - a).abs() <= 1e-10 * a);
}

#[test]
fn critical_ground_state_rejects_subthreshold_mass() {
    let a = 0.95 * a_star(1).unwrap();
    let err = normalized_ground_state(&ModelParams::new(1, 8.0, a), &GroundStateOptions::default()).unwrap_err();
    assert!(err.to_string().contains("(H3)"));
}
