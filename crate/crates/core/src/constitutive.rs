//! Material laws: double-well potential, heat capacity, conductivity,
//! viscosity and the energy/entropy densities built from them.
//!
//! With `c_V(θ) = θ^δ` and `κ(θ) = 1 + θ^β` every antiderivative has a
//! closed form:
//!
//! | quantity | law | anchor |
//! |---|---|---|
//! | `Q`  | `θ^{δ+1}/(δ+1)`        | `Q(0) = 0` |
//! | `Λ`  | `(θ^δ − 1)/δ`          | `Λ(1) = 0` |
//! | `κ̂`  | `θ + θ^{β+1}/(β+1)`    | `κ̂(0) = 0` |
//! | `h`  | `log θ + (θ^β − 1)/β`  | `h(1) = 0` |

use crate::error::{Error, Result};

/// Physical constants of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    /// Interface thickness parameter ε.
    pub epsilon: f64,
    /// Conductivity exponent, `κ = 1 + θ^β`.
    pub beta: f64,
    /// Specific-heat exponent, `c_V = θ^δ`.
    pub delta: f64,
    /// Viscosity law `ν(θ) = nu0 + nu1 / (1 + θ)`.
    pub nu0: f64,
    pub nu1: f64,
    /// Linear stabilization constant of the Cahn-Hilliard step.
    pub stab: f64,
    /// Picard tolerance on `||θ^{k+1} − θ^k||_∞`.
    pub picard_tol: f64,
    pub picard_max_iters: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            epsilon: 1.0,
            beta: 2.0,
            delta: 0.75,
            nu0: 0.05,
            nu1: 0.1,
            stab: 2.0,
            picard_tol: 1e-10,
            picard_max_iters: 100,
        }
    }
}

impl Params {
    /// Checks the admissible ranges; the message names the violated bound.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("epsilon", self.epsilon),
            ("beta", self.beta),
            ("delta", self.delta),
            ("nu0", self.nu0),
            ("nu1", self.nu1),
            ("stab", self.stab),
            ("picard_tol", self.picard_tol),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
        }
        if self.beta < 2.0 {
            return Err(Error::InvalidParams(format!(
                "beta = {} violates beta >= 2",
                self.beta
            )));
        }
        if !(self.delta > 0.5 && self.delta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "delta = {} violates 1/2 < delta < 1",
                self.delta
            )));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if self.nu0 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "nu0 = {} must be positive (lower viscosity bound)",
                self.nu0
            )));
        }
        if self.nu1 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "nu1 = {} must be nonnegative",
                self.nu1
            )));
        }
        if self.stab < 0.0 {
            return Err(Error::InvalidParams(format!(
                "stab = {} must be nonnegative",
                self.stab
            )));
        }
        if self.picard_tol <= 0.0 || self.picard_max_iters == 0 {
            return Err(Error::InvalidParams(
                "Picard tolerance and iteration cap must be positive".into(),
            ));
        }
        let p = self.p_beta_delta();
        if p <= 3.0 {
            return Err(Error::InvalidParams(format!(
                "p_beta_delta = {p} violates p_beta_delta > 3"
            )));
        }
        Ok(())
    }

    /// `β + (2/3)(δ + 1)`.
    pub fn p_beta_delta(&self) -> f64 {
        self.beta + 2.0 / 3.0 * (self.delta + 1.0)
    }

    pub fn nu_lo(&self) -> f64 {
        self.nu0
    }

    pub fn nu_hi(&self) -> f64 {
        self.nu0 + self.nu1
    }

    // Unchecked pointwise laws; callers guarantee θ > 0.

    pub fn cv(&self, theta: f64) -> f64 {
        theta.powf(self.delta)
    }

    pub fn kappa(&self, theta: f64) -> f64 {
        1.0 + theta.powf(self.beta)
    }

    pub fn q(&self, theta: f64) -> f64 {
        theta.powf(self.delta + 1.0) / (self.delta + 1.0)
    }

    /// Inverse of [`Params::q`]; `None` for nonpositive `q`.
    pub fn theta_from_q(&self, q: f64) -> Option<f64> {
        (q > 0.0).then(|| ((self.delta + 1.0) * q).powf(1.0 / (self.delta + 1.0)))
    }

    pub fn lambda(&self, theta: f64) -> f64 {
        (theta.powf(self.delta) - 1.0) / self.delta
    }

    pub fn khat(&self, theta: f64) -> f64 {
        theta + theta.powf(self.beta + 1.0) / (self.beta + 1.0)
    }

    pub fn h(&self, theta: f64) -> f64 {
        theta.ln() + (theta.powf(self.beta) - 1.0) / self.beta
    }

    pub fn nu(&self, theta: f64) -> f64 {
        self.nu0 + self.nu1 / (1.0 + theta)
    }
}

/// `F`, `F'`, `F''` of the double well `F(φ) = (φ² − 1)²/4`.
pub fn double_well(phi: f64) -> (f64, f64, f64) {
    let s = phi * phi - 1.0;
    (0.25 * s * s, phi * s, 3.0 * phi * phi - 1.0)
}

/// Temperature-dependent coefficients at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatLaws {
    pub cv: f64,
    pub kappa: f64,
    pub q: f64,
    pub lambda: f64,
    pub khat: f64,
    pub h: f64,
}

pub(crate) fn require_positive(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature { value: theta })
    }
}

pub fn heat_laws(theta: f64, p: &Params) -> Result<HeatLaws> {
    require_positive(theta)?;
    Ok(HeatLaws {
        cv: p.cv(theta),
        kappa: p.kappa(theta),
        q: p.q(theta),
        lambda: p.lambda(theta),
        khat: p.khat(theta),
        h: p.h(theta),
    })
}

pub fn viscosity(theta: f64, p: &Params) -> Result<f64> {
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::NegativeTemperature { value: theta });
    }
    Ok(p.nu(theta))
}

/// `e = F(φ)/ε + (ε/2)|∇φ|² + Q(θ)`.
pub fn internal_energy_density(phi: f64, grad_phi: (f64, f64), theta: f64, p: &Params) -> Result<f64> {
    require_positive(theta)?;
    let (f, _, _) = double_well(phi);
    let g2 = grad_phi.0 * grad_phi.0 + grad_phi.1 * grad_phi.1;
    Ok(f / p.epsilon + 0.5 * p.epsilon * g2 + p.q(theta))
}

/// `s = Λ(θ) + φ`.
pub fn entropy_density(phi: f64, theta: f64, p: &Params) -> Result<f64> {
    require_positive(theta)?;
    Ok(p.lambda(theta) + phi)
}
