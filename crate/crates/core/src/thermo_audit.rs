//! Thermodynamic audit: conserved and monotone quantities, the a-priori norm
//! monitors, and residuals of the weak energy balance and entropy inequality.
//!
//! All space integrals use the rectangle rule. Time integrals over a
//! trajectory use the stored snapshots: the a-priori monitors take a left
//! Riemann sum, the weak-form residuals the trapezoid rule. The `∂_t ξ` term
//! uses the exact increment of `T(t)` over each slab, so constant-in-time
//! data telescopes against the initial-data term.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cahn_hilliard::check_temperature;
use crate::constitutive::{double_well, Params};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, TensorField, VectorField};
use crate::sim::{State, Trajectory};

/// One row of per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub dt: f64,
    pub mean_phi: f64,
    /// `∫|u|²/2`
    pub kinetic: f64,
    /// `(ε/2)∫|∇φ|²`
    pub grad_energy: f64,
    /// `(1/ε)∫F(φ)`
    pub potential: f64,
    /// `∫Q(θ)`
    pub thermal: f64,
    pub total_energy: f64,
    /// `∫(Λ(θ) + φ)`
    pub entropy: f64,
    pub entropy_production: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub umax: f64,
    /// `||div u||_{L²}`
    pub div_norm: f64,
}

impl DiagRecord {
    pub const HEADER: [&'static str; 14] = [
        "t",
        "dt",
        "mean_phi",
        "kinetic",
        "grad_energy",
        "potential",
        "thermal",
        "total_energy",
        "entropy",
        "entropy_production",
        "theta_min",
        "theta_max",
        "umax",
        "div_norm",
    ];

    pub fn values(&self) -> [f64; 14] {
        [
            self.t,
            self.dt,
            self.mean_phi,
            self.kinetic,
            self.grad_energy,
            self.potential,
            self.thermal,
            self.total_energy,
            self.entropy,
            self.entropy_production,
            self.theta_min,
            self.theta_max,
            self.umax,
            self.div_norm,
        ]
    }

    pub fn from_values(v: [f64; 14]) -> Self {
        DiagRecord {
            t: v[0],
            dt: v[1],
            mean_phi: v[2],
            kinetic: v[3],
            grad_energy: v[4],
            potential: v[5],
            thermal: v[6],
            total_energy: v[7],
            entropy: v[8],
            entropy_production: v[9],
            theta_min: v[10],
            theta_max: v[11],
            umax: v[12],
            div_norm: v[13],
        }
    }
}

/// Which contraction of the velocity gradient enters the viscous entropy
/// production: `|Du|²` as in the strong form, or `|∇u|²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ViscousContraction {
    #[default]
    Symmetric,
    Full,
}

/// Pointwise entropy production with both viscous contractions.
#[derive(Clone, Debug)]
pub struct EntropyProduction {
    /// `ν|Du|²/θ + |∇μ|²/θ + κ|∇θ|²/θ²`
    pub symmetric: ScalarField,
    /// Same with `ν|∇u|²/θ` in the viscous slot.
    pub full: ScalarField,
}

impl EntropyProduction {
    pub fn get(&self, c: ViscousContraction) -> &ScalarField {
        match c {
            ViscousContraction::Symmetric => &self.symmetric,
            ViscousContraction::Full => &self.full,
        }
    }
}

#[allow(clippy::needless_range_loop)]
pub fn entropy_production_density(state: &State, g: &Grid, p: &Params) -> Result<EntropyProduction> {
    state.check(g)?;
    check_temperature(&state.theta)?;
    let grad_u = g.velocity_gradient(&state.u)?;
    let du_sq = grad_u.symmetric().norm_sq();
    let full_sq = grad_u.norm_sq();
    let mu_sq = g.dealiased_grad_sq(&state.mu)?;
    let theta_sq = g.gradient(&state.theta)?.norm_sq();
    let mut symmetric = ScalarField::zeros(g);
    let mut full = ScalarField::zeros(g);
    let th = state.theta.values();
    for k in 0..g.len() {
        let t = th[k];
        let nu = p.nu(t);
        let common = mu_sq.values()[k] / t + p.kappa(t) * theta_sq.values()[k] / (t * t);
        symmetric.values_mut()[k] = nu * du_sq.values()[k] / t + common;
        full.values_mut()[k] = nu * full_sq.values()[k] / t + common;
    }
    Ok(EntropyProduction { symmetric, full })
}

pub fn diagnostics(state: &State, g: &Grid, p: &Params) -> Result<DiagRecord> {
    state.check(g)?;
    check_temperature(&state.theta)?;
    let eps = p.epsilon;
    let kinetic = 0.5 * g.integrate(&state.u.norm_sq());
    let grad_energy = 0.5 * eps * g.integrate(&g.gradient(&state.phi)?.norm_sq());
    let potential = g.integrate(&state.phi.map(|v| double_well(v).0)) / eps;
    let thermal = g.integrate(&state.theta.map(|t| p.q(t)));
    let entropy = g.integrate(&state.theta.zip_map(&state.phi, |t, f| p.lambda(t) + f));
    let production = entropy_production_density(state, g, p)?;
    Ok(DiagRecord {
        t: state.t,
        dt: 0.0,
        mean_phi: g.mean(&state.phi),
        kinetic,
        grad_energy,
        potential,
        thermal,
        total_energy: kinetic + grad_energy + potential + thermal,
        entropy,
        entropy_production: g.integrate(&production.symmetric),
        theta_min: state.theta.min(),
        theta_max: state.theta.max(),
        umax: state.u.max_norm(),
        div_norm: g.l2_norm(&g.divergence(&state.u)?),
    })
}

/// Monitored a-priori norms over a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    /// `sup_t ∫Q(θ)`
    pub q_linf_l1: f64,
    /// `sup_t ||u||_{L²}`
    pub u_linf_l2: f64,
    /// `sup_t ∫F(φ)`
    pub f_linf_l1: f64,
    /// `sup_t ||φ||_{H¹}`
    pub phi_linf_h1: f64,
    /// `sup_t ||θ||_{L^{δ+1}}`
    pub theta_linf_ldelta1: f64,
    /// `||θ^{-1/2} Du||_{L²(0,T;L²)}`
    pub invsqrt_theta_du_l2: f64,
    /// `||θ^{-1/2} ∇μ||_{L²(0,T;L²)}`
    pub invsqrt_theta_gradmu_l2: f64,
    /// `∫∫ κ(θ)|∇θ|²/θ²`
    pub kappa_over_theta2_gradtheta2_l1: f64,
    pub gradtheta_l2: f64,
    pub gradlogtheta_l2: f64,
    /// `||∇θ^{β/2}||_{L²(0,T;L²)}`
    pub gradthetabeta2_l2: f64,
    /// `||θ||_{L^β(0,T;L^{3β})}`
    pub theta_lbeta_l3beta: f64,
    pub du_l2: f64,
    pub gradmu_l2: f64,
    /// `||μ||_{L²(0,T;H¹)}`
    pub mu_l2h1: f64,
    /// `||θ||_{L^p}` in space-time, `p = β + (2/3)(δ+1)`
    pub theta_lp: f64,
}

impl BoundReport {
    pub fn entries(&self) -> [(&'static str, f64); 16] {
        [
            ("Q_Linf_L1", self.q_linf_l1),
            ("u_Linf_L2", self.u_linf_l2),
            ("F_Linf_L1", self.f_linf_l1),
            ("phi_Linf_H1", self.phi_linf_h1),
            ("theta_Linf_Ldelta1", self.theta_linf_ldelta1),
            ("invsqrt_theta_Du_L2", self.invsqrt_theta_du_l2),
            ("invsqrt_theta_gradmu_L2", self.invsqrt_theta_gradmu_l2),
            ("kappa_over_theta2_gradtheta2_L1", self.kappa_over_theta2_gradtheta2_l1),
            ("gradtheta_L2", self.gradtheta_l2),
            ("gradlogtheta_L2", self.gradlogtheta_l2),
            ("gradthetabeta2_L2", self.gradthetabeta2_l2),
            ("theta_Lbeta_L3beta", self.theta_lbeta_l3beta),
            ("Du_L2", self.du_l2),
            ("gradmu_L2", self.gradmu_l2),
            ("mu_L2H1", self.mu_l2h1),
            ("theta_Lp", self.theta_lp),
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.entries().iter().all(|(_, v)| v.is_finite())
    }
}

/// Left-Riemann weights over the snapshot times. A single snapshot stands
/// for one slab of width equal to its recorded step.
pub(crate) fn riemann_weights(traj: &Trajectory) -> Vec<f64> {
    let snaps = traj.snapshots();
    if snaps.len() == 1 {
        return vec![snaps[0].record.dt];
    }
    let mut w: Vec<f64> = snaps.windows(2).map(|s| s[1].state.t - s[0].state.t).collect();
    w.push(0.0);
    w
}

pub fn apriori_monitor(traj: &Trajectory, p: &Params) -> Result<BoundReport> {
    let g = traj.grid();
    let snaps = traj.snapshots();
    if snaps.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let weights = riemann_weights(traj);
    let beta = p.beta;
    let mut sup = [0.0f64; 5];
    let mut acc = [0.0f64; 11];
    for (snap, &w) in snaps.iter().zip(&weights) {
        let s = &snap.state;
        s.check(g)?;
        check_temperature(&s.theta)?;
        let th = &s.theta;
        let grad_phi_sq = g.gradient(&s.phi)?.norm_sq();
        let grad_theta_sq = g.gradient(th)?.norm_sq();
        let grad_mu = g.gradient(&s.mu)?;
        let grad_mu_sq = grad_mu.norm_sq();
        let du_sq = g.symmetric_gradient(&s.u)?.norm_sq();

        sup[0] = sup[0].max(g.integrate(&th.map(|t| p.q(t))));
        sup[1] = sup[1].max(g.l2_norm_vector(&s.u));
        sup[2] = sup[2].max(g.integrate(&s.phi.map(|v| double_well(v).0)));
        sup[3] = sup[3].max((g.integrate(&s.phi.map(|v| v * v)) + g.integrate(&grad_phi_sq)).sqrt());
        sup[4] = sup[4].max(g.integrate(&th.map(|t| t.powf(p.delta + 1.0))).powf(1.0 / (p.delta + 1.0)));

        let integrals = [
            g.integrate(&du_sq.zip_map(th, |d, t| d / t)),
            g.integrate(&grad_mu_sq.zip_map(th, |m, t| m / t)),
            g.integrate(&grad_theta_sq.zip_map(th, |q, t| p.kappa(t) * q / (t * t))),
            g.integrate(&grad_theta_sq),
            g.integrate(&grad_theta_sq.zip_map(th, |q, t| q / (t * t))),
            // |∇θ^{β/2}|² = (β/2)² θ^{β−2} |∇θ|²
            g.integrate(&grad_theta_sq.zip_map(th, |q, t| 0.25 * beta * beta * t.powf(beta - 2.0) * q)),
            // ||θ||_{L^{3β}}^β
            g.integrate(&th.map(|t| t.powf(3.0 * beta))).powf(1.0 / 3.0),
            g.integrate(&du_sq),
            g.integrate(&grad_mu_sq),
            g.integrate(&s.mu.map(|v| v * v)) + g.integrate(&grad_mu_sq),
            g.integrate(&th.map(|t| t.powf(p.p_beta_delta()))),
        ];
        for (a, v) in acc.iter_mut().zip(integrals) {
            *a += w * v;
        }
    }
    let report = BoundReport {
        q_linf_l1: sup[0],
        u_linf_l2: sup[1],
        f_linf_l1: sup[2],
        phi_linf_h1: sup[3],
        theta_linf_ldelta1: sup[4],
        invsqrt_theta_du_l2: acc[0].sqrt(),
        invsqrt_theta_gradmu_l2: acc[1].sqrt(),
        kappa_over_theta2_gradtheta2_l1: acc[2],
        gradtheta_l2: acc[3].sqrt(),
        gradlogtheta_l2: acc[4].sqrt(),
        gradthetabeta2_l2: acc[5].sqrt(),
        theta_lbeta_l3beta: acc[6].powf(1.0 / beta),
        du_l2: acc[7].sqrt(),
        gradmu_l2: acc[8].sqrt(),
        mu_l2h1: acc[9].sqrt(),
        theta_lp: acc[10].powf(1.0 / p.p_beta_delta()),
    };
    if !report.all_finite() {
        return Err(Error::NonFinite("a-priori monitor"));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Mode {
    kx: f64,
    ky: f64,
    a: f64,
    b: f64,
}

/// Space-time test function `ξ(t, x) = T(t) X(x)`.
///
/// `T(t) = (1 + cos(π (t − t0)/(t1 − t0)))/2` falls smoothly from 1 to 0
/// with a flat end at `t1`. `X` is a trigonometric polynomial, or its
/// square when a nonnegative function is needed.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    t_start: f64,
    t_final: f64,
    constant: f64,
    modes: Vec<Mode>,
    squared: bool,
}

/// `X` and its derivatives on the grid.
#[derive(Clone, Debug)]
pub struct SpatialFactor {
    pub value: ScalarField,
    pub grad: VectorField,
    pub lap: ScalarField,
    pub hess: TensorField,
}

impl TestFunction {
    pub fn zero(t_start: f64, t_final: f64) -> Self {
        TestFunction {
            t_start,
            t_final,
            constant: 0.0,
            modes: Vec::new(),
            squared: false,
        }
    }

    /// Seeded random polynomial with modes `|m| ≤ 2` on the grid's box.
    /// With `nonnegative` the polynomial is squared.
    pub fn random(seed: u64, g: &Grid, t_start: f64, t_final: f64, nonnegative: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ax, ay) = (2.0 * PI / g.lx(), 2.0 * PI / g.ly());
        let mut modes = Vec::new();
        for mx in 0..=2i32 {
            for my in -2..=2i32 {
                if mx == 0 && my <= 0 {
                    continue;
                }
                modes.push(Mode {
                    kx: ax * mx as f64,
                    ky: ay * my as f64,
                    a: rng.gen_range(-0.5..0.5),
                    b: rng.gen_range(-0.5..0.5),
                });
            }
        }
        TestFunction {
            t_start,
            t_final,
            constant: 1.0 + rng.gen_range(0.0..0.5),
            modes,
            squared: nonnegative,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.squared || (self.modes.is_empty() && self.constant >= 0.0)
    }

    pub fn time_factor(&self, t: f64) -> f64 {
        let s = ((t - self.t_start) / (self.t_final - self.t_start)).clamp(0.0, 1.0);
        0.5 * (1.0 + (PI * s).cos())
    }

    pub fn time_derivative(&self, t: f64) -> f64 {
        let span = self.t_final - self.t_start;
        let s = ((t - self.t_start) / span).clamp(0.0, 1.0);
        -0.5 * PI / span * (PI * s).sin()
    }

    fn poly(&self, x: f64, y: f64) -> (f64, [f64; 2], [f64; 3]) {
        let mut v = self.constant;
        let mut gr = [0.0; 2];
        let mut h = [0.0; 3];
        for m in &self.modes {
            let arg = m.kx * x + m.ky * y;
            let (s, c) = arg.sin_cos();
            let val = m.a * c + m.b * s;
            let d = -m.a * s + m.b * c;
            v += val;
            gr[0] += m.kx * d;
            gr[1] += m.ky * d;
            h[0] -= m.kx * m.kx * val;
            h[1] -= m.kx * m.ky * val;
            h[2] -= m.ky * m.ky * val;
        }
        (v, gr, h)
    }

    pub fn spatial(&self, g: &Grid) -> SpatialFactor {
        let n = g.len();
        let mut out: [Vec<f64>; 6] = Default::default();
        for o in out.iter_mut() {
            o.reserve(n);
        }
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let (x, y) = g.point(i, j);
                let (v, gr, h) = self.poly(x, y);
                let (v, gr, h) = if self.squared {
                    (
                        v * v,
                        [2.0 * v * gr[0], 2.0 * v * gr[1]],
                        [
                            2.0 * (gr[0] * gr[0] + v * h[0]),
                            2.0 * (gr[0] * gr[1] + v * h[1]),
                            2.0 * (gr[1] * gr[1] + v * h[2]),
                        ],
                    )
                } else {
                    (v, gr, h)
                };
                out[0].push(v);
                out[1].push(gr[0]);
                out[2].push(gr[1]);
                out[3].push(h[0]);
                out[4].push(h[1]);
                out[5].push(h[2]);
            }
        }
        let [v, gx, gy, hxx, hxy, hyy] = out.map(|o| ScalarField::from_values(g, o).expect("grid-sized"));
        SpatialFactor {
            lap: hxx.add(&hyy),
            value: v,
            grad: VectorField::new(gx, gy),
            hess: TensorField {
                xx: hxx,
                xy: hxy,
                yy: hyy,
            },
        }
    }

    fn check_support(&self, traj: &Trajectory) -> Result<()> {
        let snaps = traj.snapshots();
        let first = snaps.first().ok_or(Error::EmptyTrajectory)?.state.t;
        let last = snaps.last().ok_or(Error::EmptyTrajectory)?.state.t;
        let scale = 1e-12 * last.abs().max(1.0);
        if (self.t_final - last).abs() > scale {
            return Err(Error::InvalidTestFunction(format!(
                "test function vanishes at t = {}, trajectory ends at {last}",
                self.t_final
            )));
        }
        if (self.t_start - first).abs() > scale || self.t_final <= self.t_start {
            return Err(Error::InvalidTestFunction(format!(
                "test function starts at t = {}, trajectory starts at {first}",
                self.t_start
            )));
        }
        Ok(())
    }
}

/// Space-time quadrature of `∫∫ a ∂_tξ + ∫∫ b ξ + ∫ a(t0) ξ(t0)` where the
/// snapshot integrals `a_n = ∫ a X`, `b_n = ∫ b X` are supplied.
fn space_time_sum(traj: &Trajectory, xi: &TestFunction, a: &[f64], b: &[f64]) -> f64 {
    let snaps = traj.snapshots();
    let mut total = xi.time_factor(snaps[0].state.t) * a[0];
    for n in 0..snaps.len() - 1 {
        let (t0, t1) = (snaps[n].state.t, snaps[n + 1].state.t);
        let (x0, x1) = (xi.time_factor(t0), xi.time_factor(t1));
        // ∫ a ∂_tξ over the slab, telescoping for constant a
        total += (x1 - x0) * 0.5 * (a[n] + a[n + 1]);
        total += 0.5 * (t1 - t0) * (x0 * b[n] + x1 * b[n + 1]);
    }
    total
}

/// Residual of the weak total energy balance for one test function.
pub fn weak_energy_residual(traj: &Trajectory, xi: &TestFunction, g: &Grid, p: &Params) -> Result<f64> {
    xi.check_support(traj)?;
    let x = xi.spatial(g);
    let eps = p.epsilon;
    let mut a = Vec::with_capacity(traj.snapshots().len());
    let mut b = Vec::with_capacity(traj.snapshots().len());
    for snap in traj.snapshots() {
        let s = &snap.state;
        s.check(g)?;
        check_temperature(&s.theta)?;
        let grad_phi = g.gradient(&s.phi)?;
        let grad_mu = g.gradient(&s.mu)?;
        let hess_phi = g.hessian(&s.phi)?;
        let stress = crate::navier_stokes::viscous_stress(&s.u, &s.theta, g, p)?;
        let su = stress.apply(&s.u);
        let n = g.len();
        let mut energy = Vec::with_capacity(n);
        let mut flux = Vec::with_capacity(n);
        for k in 0..n {
            let (ux, uy) = (s.u.x.values()[k], s.u.y.values()[k]);
            let phi = s.phi.values()[k];
            let th = s.theta.values()[k];
            let mu = s.mu.values()[k];
            let (px, py) = (grad_phi.x.values()[k], grad_phi.y.values()[k]);
            let (mx, my) = (grad_mu.x.values()[k], grad_mu.y.values()[k]);
            let (xx, xy) = (x.grad.x.values()[k], x.grad.y.values()[k]);
            let (hxx, hxy, hyy) = (x.hess.xx.values()[k], x.hess.xy.values()[k], x.hess.yy.values()[k]);
            let (fxx, fxy, fyy) = (
                hess_phi.xx.values()[k],
                hess_phi.xy.values()[k],
                hess_phi.yy.values()[k],
            );
            let lap_x = x.lap.values()[k];
            let xv = x.value.values()[k];

            let e = double_well(phi).0 / eps + 0.5 * eps * (px * px + py * py) + p.q(th);
            let total = 0.5 * (ux * ux + uy * uy) + e;
            let u_dot_gx = ux * xx + uy * xy;
            let u_dot_gphi = ux * px + uy * py;
            let f = total * u_dot_gx
                + p.khat(th) * lap_x
                + s.p.values()[k] * u_dot_gx
                - (su.x.values()[k] * xx + su.y.values()[k] * xy)
                + 0.5 * mu * mu * lap_x
                + eps * u_dot_gphi * (px * xx + py * xy)
                // (∇μ ⊗ ∇ξ) : ∇∇φ
                + eps * (mx * xx * fxx + mx * xy * fxy + my * xx * fxy + my * xy * fyy)
                // (∇μ ⊗ ∇φ) : ∇∇ξ
                + eps * (mx * px * hxx + mx * py * hxy + my * px * hxy + my * py * hyy);
            energy.push(total * xv);
            flux.push(f);
        }
        a.push(g.dx() * g.dy() * energy.iter().sum::<f64>());
        b.push(g.dx() * g.dy() * flux.iter().sum::<f64>());
    }
    Ok(space_time_sum(traj, xi, &a, &b))
}

/// Outcome of the weak entropy inequality check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakEntropyCheck {
    /// Left side minus right side of the weak entropy inequality.
    pub value: f64,
    /// `10 dt ||ξ||_∞ |Ω|` with `dt` the largest snapshot spacing or recorded step.
    pub tolerance: f64,
}

impl WeakEntropyCheck {
    pub fn satisfied(&self) -> bool {
        self.value <= self.tolerance
    }
}

pub fn weak_entropy_check(
    traj: &Trajectory,
    xi: &TestFunction,
    g: &Grid,
    p: &Params,
    contraction: ViscousContraction,
) -> Result<WeakEntropyCheck> {
    if !xi.is_nonnegative() {
        return Err(Error::InvalidTestFunction(
            "entropy inequality needs a nonnegative test function".into(),
        ));
    }
    xi.check_support(traj)?;
    let x = xi.spatial(g);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for snap in traj.snapshots() {
        let s = &snap.state;
        let prod = entropy_production_density(s, g, p)?;
        let prod = prod.get(contraction);
        let entropy = s.theta.zip_map(&s.phi, |t, f| p.lambda(t) + f);
        let transport = s.u.dot(&x.grad);
        let h = s.theta.map(|t| p.h(t));
        a.push(g.integrate(&entropy.mul(&x.value)));
        let integrand = entropy
            .mul(&transport)
            .add(&h.mul(&x.lap))
            .add(&prod.mul(&x.value));
        b.push(g.integrate(&integrand));
    }
    // the quadrature only sees the snapshots, so sparse output widens its step
    let snaps = traj.snapshots();
    let gap = snaps.windows(2).map(|w| w[1].state.t - w[0].state.t).fold(0.0, f64::max);
    let dt_max = snaps.iter().map(|s| s.record.dt).fold(gap, f64::max);
    let tolerance = 10.0 * dt_max * x.value.max_abs() * g.area();
    Ok(WeakEntropyCheck {
        value: space_time_sum(traj, xi, &a, &b),
        tolerance,
    })
}

/// Weak-form checks of a whole trajectory with seeded test functions.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditSummary {
    pub bounds: BoundReport,
    /// `(seed, residual)` of the weak energy balance.
    pub energy_residuals: Vec<(u64, f64)>,
    /// `(seed, check)` of the weak entropy inequality.
    pub entropy_checks: Vec<(u64, WeakEntropyCheck)>,
}

impl AuditSummary {
    pub fn entropy_satisfied(&self) -> bool {
        self.entropy_checks.iter().all(|(_, c)| c.satisfied())
    }
}

/// Runs the a-priori monitor and the weak checks with test functions
/// seeded `seed, seed + 1, ...`. Needs at least two snapshots.
pub fn audit(traj: &Trajectory, seed: u64, energy_tests: usize, entropy_tests: usize) -> Result<AuditSummary> {
    let snaps = traj.snapshots();
    if snaps.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    let (g, p) = (traj.grid(), traj.params());
    let (t0, t1) = (snaps[0].state.t, snaps[snaps.len() - 1].state.t);
    let mut energy_residuals = Vec::with_capacity(energy_tests);
    for s in (0..energy_tests as u64).map(|k| seed + k) {
        let xi = TestFunction::random(s, g, t0, t1, false);
        energy_residuals.push((s, weak_energy_residual(traj, &xi, g, p)?));
    }
    let mut entropy_checks = Vec::with_capacity(entropy_tests);
    for s in (0..entropy_tests as u64).map(|k| seed + k) {
        let xi = TestFunction::random(s, g, t0, t1, true);
        entropy_checks.push((s, weak_entropy_check(traj, &xi, g, p, ViscousContraction::Symmetric)?));
    }
    Ok(AuditSummary {
        bounds: apriori_monitor(traj, p)?,
        energy_residuals,
        entropy_checks,
    })
}

impl State {
    pub(crate) fn check(&self, g: &Grid) -> Result<()> {
        g.check_vector(&self.u)?;
        for f in [&self.phi, &self.mu, &self.theta, &self.p] {
            g.check(f)?;
        }
        Ok(())
    }
}
