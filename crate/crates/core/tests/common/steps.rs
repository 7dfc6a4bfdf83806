//! Brute-force versions of the three single-equation steps, assembled from
//! dense operator matrices and dense solves.

#![allow(dead_code)]

use thermoflow::constitutive::Params;
use thermoflow::grid::{Grid, ScalarField, VectorField};

use super::*;

pub struct Ops {
    pub n: usize,
    pub dx: Mat,
    pub dy: Mat,
    pub lap: Mat,
    pub lap_pinv: Mat,
    pub trunc: Mat,
}

impl Ops {
    pub fn new(g: &Grid) -> Self {
        let d = Dense::new(g);
        Ops {
            n: d.len(),
            dx: d.dx(),
            dy: d.dy(),
            lap: d.lap(),
            lap_pinv: d.lap_pinv(),
            trunc: d.trunc(),
        }
    }

    pub fn p(&self, v: &[f64]) -> Vec<f64> {
        matvec(&self.trunc, v)
    }

    /// `P[Σ (P a)(P b)]`
    pub fn products(&self, pairs: &[(&[f64], &[f64])]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for (a, b) in pairs {
            acc = add(&acc, &hadamard(&self.p(a), &self.p(b)));
        }
        self.p(&acc)
    }

    pub fn advect(&self, ux: &[f64], uy: &[f64], f: &[f64]) -> Vec<f64> {
        let fx = matvec(&self.dx, f);
        let fy = matvec(&self.dy, f);
        self.products(&[(ux, &fx), (uy, &fy)])
    }

    pub fn mean(&self, v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / self.n as f64
    }
}

pub fn vals(f: &ScalarField) -> Vec<f64> {
    f.values().to_vec()
}

/// `(φ', μ')`
pub fn ch_oracle(
    o: &Ops,
    phi: &[f64],
    u: &VectorField,
    theta: &[f64],
    dt: f64,
    p: &Params,
) -> (Vec<f64>, Vec<f64>) {
    let (eps, s) = (p.epsilon, p.stab);
    let cube = |f: &[f64]| -> Vec<f64> {
        let pf = o.p(f);
        let c: Vec<f64> = pf.iter().map(|v| v * v * v).collect();
        sub(&o.p(&c), f)
    };
    let explicit = sub(&scale(&cube(phi), 1.0 / eps), theta);
    let transport = o.advect(u.x.values(), u.y.values(), phi);
    let id = identity(o.n);
    let lap2 = matmul(&o.lap, &o.lap);
    let a = lincomb(&[(1.0, &id), (dt * eps, &lap2), (-dt * s, &o.lap)]);
    let rhs = add(
        &sub(phi, &scale(&matvec(&o.lap, phi), dt * s)),
        &sub(&scale(&matvec(&o.lap, &explicit), dt), &scale(&transport, dt)),
    );
    let mut next = solve(&a, &rhs);
    // the mean is carried over unchanged
    let shift = o.mean(phi) - o.mean(&next);
    next.iter_mut().for_each(|v| *v += shift);
    let mu = add(
        &sub(&scale(&cube(&next), 1.0 / eps), &scale(&matvec(&o.lap, &next), eps)),
        &scale(theta, -1.0),
    );
    (next, mu)
}

/// `(u', p')`
pub fn ns_oracle(
    o: &Ops,
    u: &VectorField,
    phi: &[f64],
    theta: &[f64],
    dt: f64,
    p: &Params,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (ux, uy) = (u.x.values(), u.y.values());
    let nu: Vec<f64> = theta.iter().map(|&t| p.nu0 + p.nu1 / (1.0 + t)).collect();
    let nu_bar = o.mean(&nu);
    let dnu: Vec<f64> = nu.iter().map(|v| v - nu_bar).collect();
    let dxx = matvec(&o.dx, ux);
    let dyy = matvec(&o.dy, uy);
    let dxy = scale(&add(&matvec(&o.dy, ux), &matvec(&o.dx, uy)), 0.5);
    let (rxx, rxy, ryy) = (hadamard(&dnu, &dxx), hadamard(&dnu, &dxy), hadamard(&dnu, &dyy));
    let visc_x = add(&matvec(&o.dx, &rxx), &matvec(&o.dy, &rxy));
    let visc_y = add(&matvec(&o.dx, &rxy), &matvec(&o.dy, &ryy));

    let gx = matvec(&o.dx, phi);
    let gy = matvec(&o.dy, phi);
    let txx = o.products(&[(&gx, &gx)]);
    let txy = o.products(&[(&gx, &gy)]);
    let tyy = o.products(&[(&gy, &gy)]);
    let cap_x = scale(&add(&matvec(&o.dx, &txx), &matvec(&o.dy, &txy)), -p.epsilon);
    let cap_y = scale(&add(&matvec(&o.dx, &txy), &matvec(&o.dy, &tyy)), -p.epsilon);

    let conv_x = o.advect(ux, uy, ux);
    let conv_y = o.advect(ux, uy, uy);
    let fx = sub(&add(&visc_x, &cap_x), &conv_x);
    let fy = sub(&add(&visc_y, &cap_y), &conv_y);
    let px = add(ux, &scale(&fx, dt));
    let py = add(uy, &scale(&fy, dt));

    let div = add(&matvec(&o.dx, &px), &matvec(&o.dy, &py));
    let psi = matvec(&o.lap_pinv, &div);
    let vx = sub(&px, &matvec(&o.dx, &psi));
    let vy = sub(&py, &matvec(&o.dy, &psi));
    let a = lincomb(&[(1.0, &identity(o.n)), (-dt * 0.5 * nu_bar, &o.lap)]);
    (solve(&a, &vx), solve(&a, &vy), scale(&psi, 1.0 / dt))
}

/// Backward Euler heat step solved by Newton's method on
/// `Q(θ) − dt Δκ̂(θ) = R`.
#[allow(clippy::too_many_arguments)]
pub fn heat_oracle(
    o: &Ops,
    theta: &[f64],
    u: &VectorField,
    phi_old: &[f64],
    phi_new: &[f64],
    mu: &[f64],
    dt: f64,
    p: &Params,
) -> Vec<f64> {
    let (ux, uy) = (u.x.values(), u.y.values());
    let (d, b) = (p.delta, p.beta);
    let q = |t: f64| t.powf(d + 1.0) / (d + 1.0);
    let cv = |t: f64| t.powf(d);
    let kappa = |t: f64| 1.0 + t.powf(b);
    let khat = |t: f64| t + t.powf(b + 1.0) / (b + 1.0);

    let q_old: Vec<f64> = theta.iter().map(|&t| q(t)).collect();
    let adv = o.advect(ux, uy, &q_old);
    let dphi = add(&scale(&sub(phi_new, phi_old), 1.0 / dt), &o.advect(ux, uy, phi_old));
    let latent = hadamard(theta, &dphi);

    let gxx = matvec(&o.dx, ux);
    let gxy = matvec(&o.dy, ux);
    let gyx = matvec(&o.dx, uy);
    let gyy = matvec(&o.dy, uy);
    let visc: Vec<f64> = (0..o.n)
        .map(|k| {
            let nu = p.nu0 + p.nu1 / (1.0 + theta[k]);
            let sxy = 0.5 * (gxy[k] + gyx[k]);
            nu * (gxx[k] * gxx[k] + sxy * gxy[k] + sxy * gyx[k] + gyy[k] * gyy[k])
        })
        .collect();
    let pm = o.p(mu);
    let mx = matvec(&o.dx, &pm);
    let my = matvec(&o.dy, &pm);
    let chem = add(&hadamard(&mx, &mx), &hadamard(&my, &my));

    let explicit = sub(&sub(&add(&visc, &chem), &latent), &adv);
    let rhs = add(&q_old, &scale(&explicit, dt));

    let mut t = theta.to_vec();
    for _ in 0..50 {
        let kh: Vec<f64> = t.iter().map(|&v| khat(v)).collect();
        let lk = matvec(&o.lap, &kh);
        let resid: Vec<f64> = (0..o.n).map(|k| q(t[k]) - dt * lk[k] - rhs[k]).collect();
        let mut jac = o.lap.clone();
        for (r, row) in jac.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v *= -dt * kappa(t[c]);
                if r == c {
                    *v += cv(t[r]);
                }
            }
        }
        let step = solve(&jac, &resid);
        t = sub(&t, &step);
        if step.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-15 {
            break;
        }
    }
    t
}
