//! Incompressible momentum step with temperature-dependent viscosity and
//! capillary stress.
//!
//! The viscous stress is `S = ν(θ) Du`. Its divergence is split into the
//! constant-coefficient part `(ν̄/2) Δu`, treated implicitly with a diagonal
//! Fourier solve, and the explicit remainder `div((ν(θ) − ν̄) Du)`, where
//! `ν̄` is the spatial mean of `ν(θ)`. Convection and capillarity are
//! explicit and dealiased. The Leray projection enforces `div u = 0` and
//! its scalar potential, divided by `dt`, is the pressure.

use num_complex::Complex64;

use crate::cahn_hilliard::{check_dt, check_temperature};
use crate::constitutive::Params;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, TensorField, VectorField};

#[derive(Clone, Debug)]
pub struct NsStepReport {
    pub u_new: VectorField,
    pub p_new: ScalarField,
    /// `||div u_new||_{L^2}`.
    pub div_norm: f64,
    /// Change of the mean velocity over the step.
    pub momentum_drift: [f64; 2],
}

/// `−ε div(∇φ ⊗ ∇φ)` with the tensor assembled from dealiased products.
pub fn capillary_force(phi: &ScalarField, g: &Grid, p: &Params) -> Result<VectorField> {
    let grad = g.gradient(phi)?;
    let t = TensorField {
        xx: g.dealiased_product(&grad.x, &grad.x)?,
        xy: g.dealiased_product(&grad.x, &grad.y)?,
        yy: g.dealiased_product(&grad.y, &grad.y)?,
    };
    Ok(g.tensor_divergence(&t)?.scale(-p.epsilon))
}

fn viscosity_field(theta: &ScalarField, p: &Params) -> ScalarField {
    theta.map(|t| p.nu(t))
}

/// `S = ν(θ) Du`, pointwise.
pub fn viscous_stress(
    u: &VectorField,
    theta: &ScalarField,
    g: &Grid,
    p: &Params,
) -> Result<TensorField> {
    g.check(theta)?;
    check_temperature(theta)?;
    let du = g.symmetric_gradient(u)?;
    Ok(du.scale_by(&viscosity_field(theta, p)))
}

/// Pointwise `S : ∇u`; equals `ν(θ)|Du|²` because `S` is symmetric.
pub fn viscous_dissipation(
    u: &VectorField,
    theta: &ScalarField,
    g: &Grid,
    p: &Params,
) -> Result<ScalarField> {
    let s = viscous_stress(u, theta, g, p)?;
    let grad = g.velocity_gradient(u)?;
    let mut out = s.xx.mul(&grad.xx);
    let rest = s
        .xy
        .mul(&grad.xy)
        .add(&s.xy.mul(&grad.yx))
        .add(&s.yy.mul(&grad.yy));
    for (o, r) in out.values_mut().iter_mut().zip(rest.values()) {
        *o += r;
    }
    Ok(out)
}

/// Dealiased `(u·∇)u`.
pub fn convection(u: &VectorField, g: &Grid) -> Result<VectorField> {
    Ok(VectorField::new(g.advect(u, &u.x)?, g.advect(u, &u.y)?))
}

/// Everything on the right of the momentum equation except `(ν̄/2)Δu` and
/// the pressure. Returns the forcing and `ν̄`.
pub(crate) fn explicit_forcing(
    u: &VectorField,
    phi: &ScalarField,
    theta: &ScalarField,
    g: &Grid,
    p: &Params,
) -> Result<(VectorField, f64)> {
    let nu = viscosity_field(theta, p);
    let nu_bar = g.mean(&nu);
    let du = g.symmetric_gradient(u)?;
    let remainder = du.scale_by(&nu.map(|n| n - nu_bar));
    let visc = g.tensor_divergence(&remainder)?;
    let cap = capillary_force(phi, g, p)?;
    let conv = convection(u, g)?;
    Ok((visc.add(&cap).sub(&conv), nu_bar))
}

/// Pressure consistent with `u`: the gradient part of the full forcing.
pub fn pressure(
    u: &VectorField,
    phi: &ScalarField,
    theta: &ScalarField,
    g: &Grid,
    p: &Params,
) -> Result<ScalarField> {
    check_temperature(theta)?;
    let (forcing, _) = explicit_forcing(u, phi, theta, g, p)?;
    Ok(g.leray_decompose(&forcing)?.1)
}

pub fn ns_step(
    u: &VectorField,
    phi: &ScalarField,
    theta: &ScalarField,
    dt: f64,
    g: &Grid,
    p: &Params,
) -> Result<NsStepReport> {
    ns_step_forced(u, phi, theta, dt, g, p, None)
}

pub(crate) fn ns_step_forced(
    u: &VectorField,
    phi: &ScalarField,
    theta: &ScalarField,
    dt: f64,
    g: &Grid,
    p: &Params,
    forcing: Option<&VectorField>,
) -> Result<NsStepReport> {
    check_dt(dt)?;
    g.check_vector(u)?;
    g.check(phi)?;
    g.check(theta)?;
    if !u.is_finite() {
        return Err(Error::NonFinite("u"));
    }
    if !phi.is_finite() {
        return Err(Error::NonFinite("phi"));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    check_temperature(theta)?;

    let (mut f, nu_bar) = explicit_forcing(u, phi, theta, g, p)?;
    if let Some(extra) = forcing {
        g.check_vector(extra)?;
        f = f.add(extra);
    }
    let predicted = u.add(&f.scale(dt));
    let (projected, psi) = g.leray_decompose(&predicted)?;

    let half_nu = 0.5 * nu_bar;
    let solve = |field: &ScalarField| {
        let s = g.forward(field);
        let mut out = vec![Complex64::new(0.0, 0.0); s.len()];
        g.for_each_mode(|idx, kx, ky| {
            out[idx] = s[idx] / (1.0 + dt * half_nu * (kx * kx + ky * ky));
        });
        g.inverse(out)
    };
    let u_new = VectorField::new(solve(&projected.x), solve(&projected.y));
    if !u_new.is_finite() {
        return Err(Error::NonFinite("u_new"));
    }
    let p_new = psi.scale(1.0 / dt);
    let div_norm = g.l2_norm(&g.divergence(&u_new)?);
    let momentum_drift = [
        g.mean(&u_new.x) - g.mean(&u.x),
        g.mean(&u_new.y) - g.mean(&u.y),
    ];
    Ok(NsStepReport {
        u_new,
        p_new,
        div_norm,
        momentum_drift,
    })
}
