//! Internal energy balance in the conservative variable `q = Q(θ)`.
//!
//! ```text
//! q_t + u·∇q + θ Dφ/Dt − Δκ̂(θ) = ν(θ)|Du|² + |∇μ|²
//! ```
//!
//! Advection, the latent coupling and the dissipation sources are explicit.
//! Diffusion is backward Euler in Kirchhoff form, `div(κ∇θ) = Δκ̂(θ)`,
//! solved by a Picard iteration in which every pass inverts the constant
//! coefficient operator `1 − dt λ Δ` diagonally in Fourier space:
//!
//! ```text
//! (1 − dt λ Δ) q^{k+1} = R + dt Δ(κ̂(θ^k) − λ q^k)
//! ```
//!
//! Any fixed point is the backward Euler solution. The pass contracts as long
//! as `κ(θ)/c_V(θ) < 2λ`, so `λ` is kept at the running maximum of that ratio.
//! When that ratio varies widely the plain pass crawls, so the iterates are
//! Anderson mixed.

use num_complex::Complex64;

use crate::cahn_hilliard::{check_dt, check_temperature};
use crate::constitutive::Params;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::navier_stokes::viscous_dissipation;

#[derive(Clone, Debug)]
pub struct HeatStepReport {
    pub theta_new: ScalarField,
    pub theta_min: f64,
    pub theta_max: f64,
    pub picard_iters: usize,
    /// `∫Q(θ_new) − ∫Q(θ) − dt ∫(explicit terms)`; round-off sized.
    pub q_drift: f64,
}

/// `ν(θ)|Du|² + |∇μ|²`, pointwise and nonnegative.
pub fn dissipation_sources(
    u: &VectorField,
    mu: &ScalarField,
    theta: &ScalarField,
    g: &Grid,
    p: &Params,
) -> Result<ScalarField> {
    g.check(mu)?;
    g.check(theta)?;
    check_temperature(theta)?;
    let visc = viscous_dissipation(u, theta, g, p)?;
    let chem = g.dealiased_grad_sq(mu)?;
    Ok(visc.add(&chem))
}

/// Signed temperature for a possibly nonpositive `q`, used in error reports.
fn signed_theta(q: f64, p: &Params) -> f64 {
    let t = ((p.delta + 1.0) * q.abs()).powf(1.0 / (p.delta + 1.0));
    if q > 0.0 {
        t
    } else {
        -t
    }
}

fn max_diffusivity(theta: &ScalarField, p: &Params) -> f64 {
    theta
        .values()
        .iter()
        .map(|&t| p.kappa(t) / p.cv(t))
        .fold(0.0, f64::max)
}

const ANDERSON_DEPTH: usize = 5;

/// Anderson mixing for the Picard map `x ↦ G(x)`: the next iterate is the
/// combination of past images whose residual `G(x) − x` has least L2 norm.
struct Anderson {
    depth: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    // differences of residuals and of images
    df: Vec<Vec<f64>>,
    dg: Vec<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Anderson {
            depth,
            prev: None,
            df: Vec::new(),
            dg: Vec::new(),
        }
    }

    fn clear(&mut self) {
        self.prev = None;
        self.df.clear();
        self.dg.clear();
    }

    #[allow(clippy::needless_range_loop)]
    fn extrapolate(&mut self, x: &[f64], gx: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = gx.iter().zip(x).map(|(a, b)| a - b).collect();
        if let Some((f_prev, g_prev)) = self.prev.take() {
            self.df.push(f.iter().zip(&f_prev).map(|(a, b)| a - b).collect());
            self.dg.push(gx.iter().zip(&g_prev).map(|(a, b)| a - b).collect());
            if self.df.len() > self.depth {
                self.df.remove(0);
                self.dg.remove(0);
            }
        }
        self.prev = Some((f.clone(), gx.to_vec()));
        let m = self.df.len();
        if m == 0 {
            return gx.to_vec();
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut a = vec![vec![0.0; m + 1]; m];
        for i in 0..m {
            for j in 0..m {
                a[i][j] = dot(&self.df[i], &self.df[j]);
            }
            a[i][m] = dot(&self.df[i], &f);
        }
        // Tikhonov shift keeps the normal equations solvable
        let trace: f64 = (0..m).map(|i| a[i][i]).sum();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 1e-12 * trace.max(f64::MIN_POSITIVE);
        }
        let gamma = match solve_small(a) {
            Some(gm) => gm,
            None => {
                self.clear();
                return gx.to_vec();
            }
        };
        let mut out = gx.to_vec();
        for (c, d) in gamma.iter().zip(&self.dg) {
            for (o, v) in out.iter_mut().zip(d) {
                *o -= c * v;
            }
        }
        out
    }
}

/// Gaussian elimination on an augmented `m × (m+1)` system.
#[allow(clippy::needless_range_loop)]
fn solve_small(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        a.swap(col, piv);
        if a[col][col] == 0.0 || !a[col][col].is_finite() {
            return None;
        }
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..=m {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[allow(clippy::too_many_arguments)]
pub fn heat_step(
    theta: &ScalarField,
    u: &VectorField,
    phi_old: &ScalarField,
    phi_new: &ScalarField,
    mu: &ScalarField,
    dt: f64,
    g: &Grid,
    p: &Params,
) -> Result<HeatStepReport> {
    heat_step_forced(theta, u, phi_old, phi_new, mu, dt, g, p, None)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn heat_step_forced(
    theta: &ScalarField,
    u: &VectorField,
    phi_old: &ScalarField,
    phi_new: &ScalarField,
    mu: &ScalarField,
    dt: f64,
    g: &Grid,
    p: &Params,
    forcing: Option<&ScalarField>,
) -> Result<HeatStepReport> {
    check_dt(dt)?;
    for f in [theta, phi_old, phi_new, mu] {
        g.check(f)?;
    }
    g.check_vector(u)?;
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    if !(u.is_finite() && phi_old.is_finite() && phi_new.is_finite() && mu.is_finite()) {
        return Err(Error::NonFinite("heat step input"));
    }
    check_temperature(theta)?;

    let q_old = theta.map(|t| p.q(t));
    let advection = g.advect(u, &q_old)?;
    let convective = g.advect(u, phi_old)?;
    let material_dphi = phi_new.sub(phi_old).scale(1.0 / dt).add(&convective);
    let latent = theta.mul(&material_dphi);
    let sources = dissipation_sources(u, mu, theta, g, p)?;

    let mut explicit = sources.sub(&latent).sub(&advection);
    if let Some(f) = forcing {
        g.check(f)?;
        explicit = explicit.add(f);
    }
    let rhs = q_old.add(&explicit.scale(dt));
    let rhs_hat = g.forward(&rhs);

    let mut lambda = max_diffusivity(theta, p);
    let mut q_iter = q_old.clone();
    let mut theta_iter = theta.clone();
    let mut history = Anderson::new(ANDERSON_DEPTH);
    let mut update = f64::INFINITY;
    let mut iters = 0;
    while iters < p.picard_max_iters {
        iters += 1;
        let lagged = theta_iter.zip_map(&q_iter, |t, q| p.khat(t) - lambda * q);
        let lagged_hat = g.forward(&lagged);
        let mut next = vec![Complex64::new(0.0, 0.0); rhs_hat.len()];
        g.for_each_mode(|idx, kx, ky| {
            let k2 = kx * kx + ky * ky;
            next[idx] = (rhs_hat[idx] - lagged_hat[idx] * (dt * k2)) / (1.0 + dt * lambda * k2);
        });
        let q_next = g.inverse(next);
        if !q_next.is_finite() {
            return Err(Error::NonFinite("q"));
        }
        let q_min = q_next.min();
        if q_min <= 0.0 {
            return Err(Error::Positivity {
                theta_min: signed_theta(q_min, p),
                dt,
            });
        }
        let theta_next = q_next.map(|q| p.theta_from_q(q).unwrap_or(f64::NAN));
        update = theta_next.sub(&theta_iter).max_abs();
        if update <= p.picard_tol {
            theta_iter = theta_next;
            break;
        }
        let widened = lambda.max(max_diffusivity(&theta_next, p));
        if widened > lambda {
            // the map changed, old differences no longer describe it
            lambda = widened;
            history.clear();
        }
        let mixed = history.extrapolate(q_iter.values(), q_next.values());
        let accept = mixed.iter().all(|&q| q > 0.0 && q.is_finite());
        if accept {
            q_iter = ScalarField::from_values(g, mixed)?;
            theta_iter = q_iter.map(|q| p.theta_from_q(q).unwrap_or(f64::NAN));
            lambda = lambda.max(max_diffusivity(&theta_iter, p));
        } else {
            history.clear();
            q_iter = q_next;
            theta_iter = theta_next;
        }
    }
    if update > p.picard_tol {
        return Err(Error::PicardNotConverged {
            iterations: iters,
            update,
        });
    }

    let q_new = theta_iter.map(|t| p.q(t));
    let q_drift = g.integrate(&q_new) - g.integrate(&q_old) - dt * g.integrate(&explicit);
    Ok(HeatStepReport {
        theta_min: theta_iter.min(),
        theta_max: theta_iter.max(),
        theta_new: theta_iter,
        picard_iters: iters,
        q_drift,
    })
}
