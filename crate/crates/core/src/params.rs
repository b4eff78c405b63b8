use serde::{Deserialize, Serialize};

use crate::error::{Error, Hypothesis, Result};

/// Exponent regime of `p` relative to the mass-critical `4 + 4/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Mass-critical exponent `p_* = 4 + 4/N`.
pub fn critical_exponent(dim: usize) -> f64 {
    4.0 + 4.0 / dim as f64
}

/// Upper exponent bound `2 * 2^* = 4N/(N-2)` (infinite for `N <= 2`).
pub fn exponent_ceiling(dim: usize) -> f64 {
    if dim <= 2 {
        f64::INFINITY
    } else {
        4.0 * dim as f64 / (dim as f64 - 2.0)
    }
}

/// Open interval of admissible perturbation exponents `theta`, or `None` for
/// `N = 1` where no perturbation is used.
pub fn theta_window(dim: usize) -> Option<(f64, f64)> {
    let n = dim as f64;
    match dim {
        1 => None,
        2 => Some((2.0, 3.0)),
        _ => Some((4.0 * n / (n + 2.0), ((4.0 * n + 4.0) / (n + 2.0)).min(n))),
    }
}

/// Midpoint of the admissible `theta` window (2.5 for `N = 2`, 2.7 for `N = 3`).
pub fn default_theta(dim: usize) -> f64 {
    match theta_window(dim) {
        Some((lo, hi)) => 0.5 * (lo + hi),
        None => 2.5,
    }
}

/// Model parameters `(N, p, a, theta, mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: f64,
    pub a: f64,
    #[serde(default = "nan")]
    pub theta: f64,
    #[serde(default)]
    pub mu: f64,
}

fn nan() -> f64 {
    f64::NAN
}

impl ModelParams {
    /// Parameters with the default `theta` for `N` and `mu = 0`.
    pub fn new(dim: usize, p: f64, a: f64) -> Self {
        Self {
            dim,
            p,
            a,
            theta: default_theta(dim),
            mu: 0.0,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_mass(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    /// Fills a missing `theta` with the window midpoint.
    pub fn normalized(mut self) -> Self {
        if !self.theta.is_finite() {
            self.theta = default_theta(self.dim);
        }
        self
    }

    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim)
    }

    pub fn regime(&self) -> Regime {
        let pc = self.critical_exponent();
        if (self.p - pc).abs() <= 1e-12 * pc {
            Regime::Critical
        } else if self.p > pc {
            Regime::Supercritical
        } else {
            Regime::Subcritical
        }
    }

    /// Structural admissibility: dimension, exponent range, mass, and the
    /// `theta`/`mu` window.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParams {
                field: "N",
                hypothesis: Hypothesis::ExponentRange,
                message: "dimension must be positive".into(),
            });
        }
        let ceiling = exponent_ceiling(self.dim);
        if !(self.p.is_finite() && self.p > 2.0 && self.p < ceiling) {
            let hypothesis = if self.dim == 3 {
                Hypothesis::H2
            } else {
                Hypothesis::ExponentRange
            };
            return Err(Error::InvalidParams {
                field: "p",
                hypothesis,
                message: format!(
                    "requires 2 < p < 2*2^* = {ceiling} for N = {} (got p = {})",
                    self.dim, self.p
                ),
            });
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParams {
                field: "a",
                hypothesis: Hypothesis::H1,
                message: format!("prescribed mass must be positive (got {})", self.a),
            });
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidParams {
                field: "mu",
                hypothesis: Hypothesis::Perturbation,
                message: format!("mu must lie in [0, 1] (got {})", self.mu),
            });
        }
        match theta_window(self.dim) {
            None => {
                if self.mu != 0.0 {
                    return Err(Error::InvalidParams {
                        field: "mu",
                        hypothesis: Hypothesis::Perturbation,
                        message: "N = 1 is treated unperturbed; mu must be 0".into(),
                    });
                }
            }
            Some((lo, hi)) => {
                if !(self.theta > lo && self.theta < hi) {
                    return Err(Error::InvalidParams {
                        field: "theta",
                        hypothesis: Hypothesis::ThetaWindow,
                        message: format!("requires {lo} < theta < {hi} for N = {} (got {})", self.dim, self.theta),
                    });
                }
            }
        }
        Ok(())
    }

    /// Hypotheses for the ground-state existence statements: (H1)/(H2) in the
    /// supercritical regime, (H3)/(H4) at `p = p_*` given the threshold `a_*`.
    pub fn validate_ground_state(&self, a_star: Option<f64>) -> Result<()> {
        self.validate()?;
        match self.regime() {
            Regime::Subcritical => Err(Error::InvalidParams {
                field: "p",
                hypothesis: if self.dim <= 2 { Hypothesis::H1 } else { Hypothesis::H2 },
                message: format!("requires p >= 4 + 4/N = {} (got {})", self.critical_exponent(), self.p),
            }),
            Regime::Supercritical => {
                if self.dim >= 4 {
                    Err(Error::InvalidParams {
                        field: "N",
                        hypothesis: Hypothesis::H2,
                        message: "supercritical runs are limited to N <= 3".into(),
                    })
                } else {
                    Ok(())
                }
            }
            Regime::Critical => {
                let Some(a_star) = a_star else {
                    return Ok(());
                };
                if self.dim <= 3 {
                    if self.a > a_star {
                        Ok(())
                    } else {
                        Err(Error::InvalidParams {
                            field: "a",
                            hypothesis: Hypothesis::H3,
                            message: format!("requires a > a_* = {a_star} (got {})", self.a),
                        })
                    }
                } else {
                    let n = self.dim as f64;
                    let upper = ((n - 2.0) / (n - 2.0 - 4.0 / n)).powf(n / 2.0) * a_star;
                    if self.a > a_star && self.a < upper {
                        Ok(())
                    } else {
                        Err(Error::InvalidParams {
                            field: "a",
                            hypothesis: Hypothesis::H4,
                            message: format!("requires a_* = {a_star} < a < {upper} (got {})", self.a),
                        })
                    }
                }
            }
        }
    }

    /// Hypotheses for the excited-state ladder: (H1)' or (H2).
    pub fn validate_excited(&self) -> Result<()> {
        self.validate()?;
        let supercritical = self.regime() == Regime::Supercritical;
        match self.dim {
            2 if supercritical => Ok(()),
            3 if supercritical => Ok(()),
            3 => Err(Error::InvalidParams {
                field: "p",
                hypothesis: Hypothesis::H2,
                message: format!("requires 4 + 4/N < p < 12 (got {})", self.p),
            }),
            _ => Err(Error::InvalidParams {
                field: if self.dim == 2 { "p" } else { "N" },
                hypothesis: Hypothesis::H1Prime,
                message: format!(
                    "excited states require N = 2 with p > 4 + 4/N, or N = 3 (got N = {}, p = {})",
                    self.dim, self.p
                ),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_windows() {
        assert_eq!(theta_window(2), Some((2.0, 3.0)));
        let (lo, hi) = theta_window(3).unwrap();
        assert!((lo - 2.4).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
        assert!((default_theta(2) - 2.5).abs() < 1e-15);
        assert!((default_theta(3) - 2.7).abs() < 1e-15);
    }

    #[test]
    fn regimes() {
        assert_eq!(ModelParams::new(1, 8.0, 1.0).regime(), Regime::Critical);
        assert_eq!(ModelParams::new(2, 7.0, 1.0).regime(), Regime::Supercritical);
        assert_eq!(ModelParams::new(3, 5.0, 1.0).regime(), Regime::Subcritical);
    }

    #[test]
    fn validation_names_the_hypothesis() {
        let err = ModelParams::new(3, 13.0, 1.0).validate().unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParams {
                field: "p",
                hypothesis: Hypothesis::H2,
                ..
            }
        ));
        assert!(err.to_string().contains("12"));

        let err = ModelParams::new(2, 7.0, 1.0).with_theta(3.5).validate().unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParams {
                hypothesis: Hypothesis::ThetaWindow,
                ..
            }
        ));
        assert!(ModelParams::new(1, 9.0, 1.0).with_mu(0.1).validate().is_err());
        assert!(ModelParams::new(2, 7.0, 1.0).with_mu(0.5).validate().is_ok());

        let crit = ModelParams::new(1, 8.0, 1.0);
        assert!(matches!(
            crit.validate_ground_state(Some(2.0)).unwrap_err(),
            Error::InvalidParams {
                hypothesis: Hypothesis::H3,
                ..
            }
        ));
        assert!(crit.with_mass(2.5).validate_ground_state(Some(2.0)).is_ok());
        assert!(ModelParams::new(1, 9.0, 1.0).validate_excited().is_err());
        assert!(ModelParams::new(2, 7.0, 1.0).validate_excited().is_ok());
    }
}
