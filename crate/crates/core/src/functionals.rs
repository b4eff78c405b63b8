//! Scalar functionals of radial fields and their variational derivatives.
//!
//! Every functional here is assembled from five integrals ([`FiberMasses`]).
//! Gradient integrals use cell differences `(u_{i+1} - u_i)/h` against the
//! exact shell volume of each cell, which keeps the discrete energy free of
//! odd-even null modes; nodal integrals use the grid weights.

use crate::error::{Error, Result};
use crate::grid::{radial_derivative, radial_laplacian, RadialField};
use crate::params::ModelParams;

/// Regularization of `|u'|^{theta-2}` near `u' = 0`.
pub const THETA_REGULARIZATION: f64 = 1e-14;

/// `gamma_q = N (q - 2) / (2 q)`.
pub fn gamma_exponent(q: f64, dim: usize) -> f64 {
    dim as f64 * (q - 2.0) / (2.0 * q)
}

/// The five integrals `int |u'|^theta`, `int |u'|^2`, `int u^2 |u'|^2`,
/// `int |u|^p` and `int u^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct FiberMasses {
    pub a_theta: f64,
    pub a_grad: f64,
    pub a_quad: f64,
    pub a_p: f64,
    pub mass: f64,
}

impl FiberMasses {
    /// Masses of `c u` given those of `u`.
    pub fn amplitude_scaled(&self, c: f64, params: &ModelParams) -> Self {
        let c = c.abs();
        Self {
            a_theta: self.a_theta * c.powf(params.theta),
            a_grad: self.a_grad * c * c,
            a_quad: self.a_quad * c.powi(4),
            a_p: self.a_p * c.powf(params.p),
            mass: self.mass * c * c,
        }
    }
}

/// `|x|^q`, flushed to zero below `1e-30` where it is negligible for every
/// exponent used here; keeps subnormal arithmetic out of the hot loops.
pub fn abs_pow(x: f64, q: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-30 {
        0.0
    } else {
        ax.powf(q)
    }
}

fn theta_density(d: f64, theta: f64) -> f64 {
    (d * d + THETA_REGULARIZATION).powf(0.5 * theta) - THETA_REGULARIZATION.powf(0.5 * theta)
}

pub fn compute_masses(u: &RadialField, params: &ModelParams) -> FiberMasses {
    let grid = u.grid();
    let r = grid.nodes();
    let v = u.values();
    let vol = grid.cell_volumes();
    let w = grid.weights();
    let theta = params.theta;

    let mut m = FiberMasses::default();
    for c in 0..vol.len() {
        let d = (v[c + 1] - v[c]) / (r[c + 1] - r[c]);
        let d2 = d * d;
        let quad = 0.5 * (v[c] * v[c] + v[c + 1] * v[c + 1]);
        m.a_grad += vol[c] * d2;
        m.a_quad += vol[c] * quad * d2;
        if theta.is_finite() {
            m.a_theta += vol[c] * theta_density(d, theta);
        }
    }
    for (wi, ui) in w.iter().zip(v) {
        m.a_p += wi * abs_pow(*ui, params.p);
        m.mass += wi * ui * ui;
    }
    m
}

/// Coefficients `(c_theta, c_grad, c_quad, c_p)` of a functional
/// `c_theta A_theta + c_grad A_grad + c_quad A_quad + c_p A_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWeights {
    pub theta: f64,
    pub grad: f64,
    pub quad: f64,
    pub p: f64,
}

impl EnergyWeights {
    /// Weights of `I_mu`.
    pub fn energy(params: &ModelParams) -> Self {
        Self::on_fiber(params, 0.0)
    }

    /// Weights of `s |-> I_mu(s * u)` expressed through the masses of `u`.
    pub fn on_fiber(params: &ModelParams, s: f64) -> Self {
        let (kt, kg, kq, kp) = fiber_rates(params);
        Self {
            theta: if params.mu == 0.0 {
                0.0
            } else {
                params.mu / params.theta * (kt * s).exp()
            },
            grad: 0.5 * (kg * s).exp(),
            quad: (kq * s).exp(),
            p: -(kp * s).exp() / params.p,
        }
    }

    pub fn apply(&self, m: &FiberMasses) -> f64 {
        let t = if self.theta == 0.0 { 0.0 } else { self.theta * m.a_theta };
        t + self.grad * m.a_grad + self.quad * m.a_quad + self.p * m.a_p
    }
}

/// Growth rates of the masses along the fiber `s * u`:
/// `(theta (1 + gamma_theta), 2, 2 + N, p gamma_p)`.
pub fn fiber_rates(params: &ModelParams) -> (f64, f64, f64, f64) {
    let n = params.dim as f64;
    let gt = gamma_exponent(params.theta, params.dim);
    let gp = gamma_exponent(params.p, params.dim);
    (params.theta * (1.0 + gt), 2.0, 2.0 + n, params.p * gp)
}

/// `I(u) = A_grad/2 + A_quad - A_p/p`.
pub fn energy_i(m: &FiberMasses, params: &ModelParams) -> f64 {
    0.5 * m.a_grad + m.a_quad - m.a_p / params.p
}

/// `I_mu(u) = (mu/theta) A_theta + I(u)`.
pub fn energy_i_mu(m: &FiberMasses, params: &ModelParams) -> f64 {
    let pert = if params.mu == 0.0 {
        0.0
    } else {
        params.mu / params.theta * m.a_theta
    };
    pert + energy_i(m, params)
}

/// `Q_mu(u) = (1 + gamma_theta) mu A_theta + A_grad + (2 + N) A_quad - gamma_p A_p`.
pub fn pohozaev_q_mu(m: &FiberMasses, params: &ModelParams) -> f64 {
    pohozaev_terms(m, params).iter().sum()
}

/// The four signed terms of `Q_mu`.
pub fn pohozaev_terms(m: &FiberMasses, params: &ModelParams) -> [f64; 4] {
    let n = params.dim as f64;
    let gt = gamma_exponent(params.theta, params.dim);
    let gp = gamma_exponent(params.p, params.dim);
    let pert = if params.mu == 0.0 {
        0.0
    } else {
        (1.0 + gt) * params.mu * m.a_theta
    };
    [pert, m.a_grad, (2.0 + n) * m.a_quad, -gp * m.a_p]
}

/// `|Q_mu| / sum |terms|`, zero for the zero field.
pub fn pohozaev_relative(m: &FiberMasses, params: &ModelParams) -> f64 {
    let terms = pohozaev_terms(m, params);
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if scale == 0.0 {
        0.0
    } else {
        terms.iter().sum::<f64>().abs() / scale
    }
}

/// Right-hand side of `I_mu - Q_mu/(p gamma_p)` written in the positive
/// masses.
pub fn manifold_energy_identity(m: &FiberMasses, params: &ModelParams) -> f64 {
    let n = params.dim as f64;
    let th = params.theta;
    let gt = gamma_exponent(th, params.dim);
    let pg = params.p * gamma_exponent(params.p, params.dim);
    let pert = if params.mu == 0.0 {
        0.0
    } else {
        (pg - th - th * gt) / (th * pg) * params.mu * m.a_theta
    };
    pert + (pg - 2.0) / (2.0 * pg) * m.a_grad + (pg - 2.0 - n) / pg * m.a_quad
}

/// Lagrange multiplier from testing the Euler-Lagrange equation with `u`:
/// `lambda = (A_p - mu A_theta - A_grad - 4 A_quad) / M`.
pub fn lagrange_lambda(m: &FiberMasses, params: &ModelParams) -> Result<f64> {
    if m.mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let pert = if params.mu == 0.0 { 0.0 } else { params.mu * m.a_theta };
    Ok((m.a_p - pert - m.a_grad - 4.0 * m.a_quad) / m.mass)
}

/// Terms of the multiplier balance `lambda gamma_p M = c_t mu A_theta +
/// c_g A_grad + c_q A_quad`, with `lambda M` expanded into its masses. The
/// first four entries are the left side, the last three the right.
fn multiplier_balance_terms(m: &FiberMasses, params: &ModelParams) -> Result<[f64; 7]> {
    if m.mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let n = params.dim as f64;
    let p = params.p;
    let th = params.theta;
    let gp = gamma_exponent(p, params.dim);
    let mu_theta = if params.mu == 0.0 { 0.0 } else { params.mu * m.a_theta };
    Ok([
        gp * m.a_p,
        -gp * mu_theta,
        -gp * m.a_grad,
        -4.0 * gp * m.a_quad,
        -(1.0 - n * (p - th) / (p * th)) * mu_theta,
        -(2.0 * n - (n - 2.0) * p) / (2.0 * p) * m.a_grad,
        -(4.0 * n - (n - 2.0) * p) / p * m.a_quad,
    ])
}

/// Residual of the multiplier balance; vanishes on `Q_mu = 0`.
pub fn multiplier_balance(m: &FiberMasses, params: &ModelParams) -> Result<f64> {
    Ok(multiplier_balance_terms(m, params)?.iter().sum())
}

/// [`multiplier_balance`] divided by the sum of the magnitudes of its terms.
pub fn multiplier_balance_relative(m: &FiberMasses, params: &ModelParams) -> Result<f64> {
    let terms = multiplier_balance_terms(m, params)?;
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    Ok(if scale == 0.0 {
        0.0
    } else {
        terms.iter().sum::<f64>().abs() / scale
    })
}

/// Membership in the mass-critical open set `A_quad < N/(4(N+1)) A_p`.
pub fn critical_set_membership(m: &FiberMasses, dim: usize) -> bool {
    let n = dim as f64;
    m.a_quad < n / (4.0 * (n + 1.0)) * m.a_p
}

/// Raw partial derivatives `dE/du_i` of the discrete functional with the
/// given weights.
pub fn energy_partials(u: &RadialField, params: &ModelParams, weights: &EnergyWeights) -> Vec<f64> {
    let grid = u.grid();
    let r = grid.nodes();
    let v = u.values();
    let vol = grid.cell_volumes();
    let w = grid.weights();
    let theta = params.theta;
    let mut g = vec![0.0; v.len()];

    for c in 0..vol.len() {
        let h = r[c + 1] - r[c];
        let d = (v[c + 1] - v[c]) / h;
        let d2 = d * d;
        let quad = 0.5 * (v[c] * v[c] + v[c + 1] * v[c + 1]);
        let mut flux = weights.grad * 2.0 * d + weights.quad * 2.0 * quad * d;
        if weights.theta != 0.0 {
            flux += weights.theta * theta * (d2 + THETA_REGULARIZATION).powf(0.5 * theta - 1.0) * d;
        }
        let flux = vol[c] * flux / h;
        g[c] -= flux;
        g[c + 1] += flux;
        let reaction = vol[c] * weights.quad * d2;
        g[c] += reaction * v[c];
        g[c + 1] += reaction * v[c + 1];
    }
    let p = params.p;
    for ((gi, wi), ui) in g.iter_mut().zip(w).zip(v) {
        *gi += weights.p * p * wi * abs_pow(*ui, p - 2.0) * ui;
    }
    g
}

/// Tridiagonal Hessian `(diag, off)` of the weighted discrete energy whose
/// gradient is [`energy_partials`].
pub fn energy_hessian(u: &RadialField, params: &ModelParams, weights: &EnergyWeights) -> (Vec<f64>, Vec<f64>) {
    let grid = u.grid();
    let r = grid.nodes();
    let v = u.values();
    let vol = grid.cell_volumes();
    let w = grid.weights();
    let theta = params.theta;
    let mut diag = vec![0.0; v.len()];
    let mut off = vec![0.0; vol.len()];

    for c in 0..vol.len() {
        let h = r[c + 1] - r[c];
        let (a, b) = (v[c], v[c + 1]);
        let d = (b - a) / h;
        let quad = 0.5 * (a * a + b * b);
        let mut f_dd = 2.0 * weights.grad + 2.0 * weights.quad * quad;
        if weights.theta != 0.0 {
            let base = d * d + THETA_REGULARIZATION;
            f_dd += weights.theta
                * theta
                * (base.powf(0.5 * theta - 1.0) + (theta - 2.0) * d * d * base.powf(0.5 * theta - 2.0));
        }
        let f_dq = 2.0 * weights.quad * d;
        let f_q = weights.quad * d * d;
        diag[c] += vol[c] * (f_dd / (h * h) - 2.0 * f_dq * a / h + f_q);
        diag[c + 1] += vol[c] * (f_dd / (h * h) + 2.0 * f_dq * b / h + f_q);
        off[c] = vol[c] * (-f_dd / (h * h) + f_dq * (a - b) / h);
    }
    let p = params.p;
    for ((di, wi), ui) in diag.iter_mut().zip(w).zip(v) {
        *di += weights.p * p * (p - 1.0) * wi * abs_pow(*ui, p - 2.0);
    }
    (diag, off)
}

/// Variational derivative of `I_mu` in the L^2 pairing:
/// `<g, phi> = d/dt I_mu(u + t phi)` at `t = 0`.
pub fn functional_gradient(u: &RadialField, params: &ModelParams) -> RadialField {
    let partials = energy_partials(u, params, &EnergyWeights::energy(params));
    let values = partials.iter().zip(u.grid().weights()).map(|(g, w)| g / w).collect();
    RadialField::new(u.grid().clone(), values).expect("gradient of a finite field is finite")
}

/// Relative L^2 residual of
/// `(1 + 2u^2)(u'' + (N-1)u'/r) + 2u(u')^2 - lambda u + |u|^{p-2} u`,
/// normalized by the largest of its four terms.
pub fn el_residual(u: &RadialField, lambda: f64, params: &ModelParams) -> f64 {
    let lap = radial_laplacian(u);
    let du = radial_derivative(u);
    let w = u.grid().weights();
    let n = u.len();
    let mut sums = [0.0_f64; 5];
    for i in 0..n - 1 {
        let ui = u.values()[i];
        let t = [
            (1.0 + 2.0 * ui * ui) * lap.values()[i],
            2.0 * ui * du.values()[i] * du.values()[i],
            -lambda * ui,
            abs_pow(ui, params.p - 2.0) * ui,
        ];
        let total: f64 = t.iter().sum();
        for k in 0..4 {
            sums[k] += w[i] * t[k] * t[k];
        }
        sums[4] += w[i] * total * total;
    }
    let largest = sums[..4].iter().cloned().fold(0.0_f64, f64::max);
    if largest == 0.0 {
        0.0
    } else {
        (sums[4] / largest).sqrt()
    }
}

/// Exponents `(alpha, beta)` of the Gagliardo-Nirenberg-type inequality
/// `int |u|^p <= K (int u^2)^alpha (4 int u^2 |u'|^2)^beta`.
pub fn gn_exponents(p: f64, dim: usize) -> (f64, f64) {
    let n = dim as f64;
    (
        (4.0 * n - p * (n - 2.0)) / (2.0 * (n + 2.0)),
        n * (p - 2.0) / (2.0 * (n + 2.0)),
    )
}

/// Sharp prefactor of the Gagliardo-Nirenberg-type inequality, measured on
/// the optimizer `u = Q_p^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpGn {
    pub p: f64,
    pub dim: usize,
    pub constant: f64,
}

impl SharpGn {
    /// `sqrt_optimizer` must be `Q_p^{1/2}` sampled on a grid.
    pub fn from_optimizer(sqrt_optimizer: &RadialField, p: f64) -> Result<Self> {
        let dim = sqrt_optimizer.grid().dim();
        let params = ModelParams::new(dim, p, 1.0);
        let m = compute_masses(sqrt_optimizer, &params);
        if m.mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let (alpha, beta) = gn_exponents(p, dim);
        Ok(Self {
            p,
            dim,
            constant: m.a_p / (m.mass.powf(alpha) * (4.0 * m.a_quad).powf(beta)),
        })
    }

    pub fn ratio(&self, m: &FiberMasses) -> f64 {
        let (alpha, beta) = gn_exponents(self.p, self.dim);
        m.a_p / (self.constant * m.mass.powf(alpha) * (4.0 * m.a_quad).powf(beta))
    }
}

/// Ratio of `int |u|^p` to the sharp Gagliardo-Nirenberg bound; at most
/// `1` up to discretization error, `1` at the optimizer.
pub fn gn_functional_check(u: &RadialField, params: &ModelParams, sharp: &SharpGn) -> Result<f64> {
    let m = compute_masses(u, params);
    if m.mass <= 0.0 || m.a_quad <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(sharp.ratio(&m))
}
