//! Manufactured-solution checks for the three single-equation steppers.
//!
//! Each exact solution is `A(t) ψ(x, y)` on top of fixed coefficient
//! fields, with `A(t) = a e^{−t}` and `ψ = g(x̃) h(ỹ)` separable in the
//! box-scaled coordinates `x̃ = 2πx/lx`, `ỹ = 2πy/ly`. The forcing is the
//! residual of the continuous equation, assembled pointwise from closed-form
//! derivatives, and is evaluated at the end of each step.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::cahn_hilliard::ch_step_forced;
use crate::constitutive::Params;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::heat::heat_step_forced;
use crate::navier_stokes::ns_step_forced;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    Ch,
    Ns,
    Heat,
}

impl Equation {
    pub const ALL: [Equation; 3] = [Equation::Ch, Equation::Ns, Equation::Heat];

    pub fn name(self) -> &'static str {
        match self {
            Equation::Ch => "ch",
            Equation::Ns => "ns",
            Equation::Heat => "heat",
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownEquation(pub String);

impl fmt::Display for UnknownEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown equation '{}' (expected ch, ns or heat)", self.0)
    }
}

impl std::error::Error for UnknownEquation {}

impl FromStr for Equation {
    type Err = UnknownEquation;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ch" => Ok(Equation::Ch),
            "ns" => Ok(Equation::Ns),
            "heat" => Ok(Equation::Heat),
            other => Err(UnknownEquation(other.to_string())),
        }
    }
}

/// One-dimensional trigonometric profile `Σ c_m sin(m s + phase)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    terms: Vec<(f64, f64)>,
    phase: f64,
}

impl Profile {
    pub fn sine(terms: Vec<(f64, f64)>) -> Self {
        Profile { terms, phase: 0.0 }
    }

    pub fn cosine(terms: Vec<(f64, f64)>) -> Self {
        Profile {
            terms,
            phase: FRAC_PI_2,
        }
    }

    /// Geometrically decaying sine series `Σ_{m=1}^{count} r^m sin(m s)`,
    /// which needs about `count` modes to resolve.
    pub fn geometric(r: f64, count: usize) -> Self {
        Profile::sine((1..=count).map(|m| (m as f64, r.powi(m as i32))).collect())
    }

    /// Value and first four derivatives at `s`, for the scaled argument
    /// `k s` with `d/dx = k d/ds`.
    fn derivatives(&self, s: f64, k: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        for &(m, c) in &self.terms {
            let w = m * k;
            let mut scale = c;
            for (order, o) in out.iter_mut().enumerate() {
                *o += scale * (m * s + self.phase + order as f64 * FRAC_PI_2).sin();
                scale *= w;
            }
        }
        out
    }
}

/// `ψ(x, y) = g(x̃) h(ỹ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Separable {
    pub g: Profile,
    pub h: Profile,
}

/// `ψ` and its partial derivatives at a point: `d[i][j] = ∂x^i ∂y^j ψ`.
struct Jet {
    d: [[f64; 5]; 5],
}

impl Jet {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }
}

impl Separable {
    fn jet(&self, g: &Grid, x: f64, y: f64) -> Jet {
        let (ax, ay) = (2.0 * PI / g.lx(), 2.0 * PI / g.ly());
        let gx = self.g.derivatives(ax * x, ax);
        let hy = self.h.derivatives(ay * y, ay);
        let mut d = [[0.0; 5]; 5];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i + j <= 4 {
                    *v = gx[i] * hy[j];
                }
            }
        }
        Jet { d }
    }
}

/// Knobs for one MMS convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct MmsSetup {
    /// Amplitude `a` of the exact solution; zero gives the trivial solution.
    pub amplitude: f64,
    pub t_final: f64,
    /// Step at level 0.
    pub dt0: f64,
    /// Grid size at level 0.
    pub n0: usize,
    /// Refine the step with the level; when false only the grid is refined.
    pub refine_dt: bool,
    pub shape: Separable,
    pub params: Params,
}

impl Default for MmsSetup {
    fn default() -> Self {
        MmsSetup {
            amplitude: 0.4,
            t_final: 0.2,
            dt0: 0.02,
            n0: 16,
            refine_dt: true,
            shape: Separable {
                g: Profile::sine(vec![(1.0, 1.0), (2.0, 0.3)]),
                h: Profile::cosine(vec![(1.0, 1.0), (2.0, -0.25)]),
            },
            params: Params::default(),
        }
    }
}

impl MmsSetup {
    /// Grid-only refinement with a fixed tiny step and a profile needing
    /// many modes, so the error falls spectrally with the grid.
    pub fn spatial() -> Self {
        MmsSetup {
            amplitude: 0.2,
            t_final: 2e-4,
            dt0: 2e-5,
            n0: 8,
            refine_dt: false,
            shape: Separable {
                g: Profile::geometric(0.3, 24),
                h: Profile::cosine(vec![(1.0, 1.0)]),
            },
            params: Params::default(),
        }
    }
}

pub fn mms_error(equation: Equation, level: u32) -> Result<f64> {
    mms_error_with(equation, level, &MmsSetup::default())
}

pub fn mms_error_with(equation: Equation, level: u32, setup: &MmsSetup) -> Result<f64> {
    if level > 4 {
        return Err(Error::InvalidLevel(level));
    }
    let n = setup.n0 << level;
    let g = Grid::square(n)?;
    let dt = if setup.refine_dt {
        setup.dt0 / (1u32 << level) as f64
    } else {
        setup.dt0
    };
    let steps = (setup.t_final / dt).round().max(1.0) as usize;
    let dt = setup.t_final / steps as f64;
    let case = Case { g: &g, s: setup };
    match equation {
        Equation::Ch => case.ch(dt, steps),
        Equation::Ns => case.ns(dt, steps),
        Equation::Heat => case.heat(dt, steps),
    }
}

struct Case<'a> {
    g: &'a Grid,
    s: &'a MmsSetup,
}

impl Case<'_> {
    fn amp(&self, t: f64) -> f64 {
        self.s.amplitude * (-t).exp()
    }

    fn scaled(&self) -> (f64, f64) {
        (2.0 * PI / self.g.lx(), 2.0 * PI / self.g.ly())
    }

    fn field(&self, f: impl Fn(f64, f64, &Jet) -> f64) -> ScalarField {
        ScalarField::from_fn(self.g, |x, y| f(x, y, &self.s.shape.jet(self.g, x, y)))
    }

    /// `φ = A ψ` convected by `u = (sin ỹ, 0)` at `θ = 1 + 0.2 cos ỹ`.
    fn ch(&self, dt: f64, steps: usize) -> Result<f64> {
        let (g, p) = (self.g, &self.s.params);
        let (_, ay) = self.scaled();
        let eps = p.epsilon;
        let u = VectorField::from_fn(g, |_, y| ((ay * y).sin(), 0.0));
        let theta = ScalarField::from_fn(g, |_, y| 1.0 + 0.2 * (ay * y).cos());
        let exact = |t: f64| self.field(|_, _, j| self.amp(t) * j.at(0, 0));
        let forcing = |t: f64| {
            let a = self.amp(t);
            self.field(|_, y, j| {
                let phi = a * j.at(0, 0);
                let (px, py) = (a * j.at(1, 0), a * j.at(0, 1));
                let lap = a * (j.at(2, 0) + j.at(0, 2));
                let bih = a * (j.at(4, 0) + 2.0 * j.at(2, 2) + j.at(0, 4));
                let lap_cube = 3.0 * phi * phi * lap + 6.0 * phi * (px * px + py * py);
                let lap_theta = -0.2 * ay * ay * (ay * y).cos();
                let lap_mu = -eps * bih + (lap_cube - lap) / eps - lap_theta;
                -phi + (ay * y).sin() * px - lap_mu
            })
        };
        let mut phi = exact(0.0);
        for k in 1..=steps {
            let f = forcing(k as f64 * dt);
            phi = ch_step_forced(&phi, &u, &theta, dt, g, p, Some(&f))?.phi_new;
        }
        Ok(g.l2_norm(&phi.sub(&exact(steps as f64 * dt))))
    }

    /// `u = A ∇⊥ψ` against fixed `φ = 0.3 cos x̃ cos ỹ`, `θ = 1 + 0.2 cos ỹ`.
    fn ns(&self, dt: f64, steps: usize) -> Result<f64> {
        let (g, p) = (self.g, &self.s.params);
        let (ax, ay) = self.scaled();
        let eps = p.epsilon;
        let b = 0.3;
        let phi = ScalarField::from_fn(g, |x, y| b * (ax * x).cos() * (ay * y).cos());
        let theta = ScalarField::from_fn(g, |_, y| 1.0 + 0.2 * (ay * y).cos());
        let exact = |t: f64| {
            let a = self.amp(t);
            let ux = self.field(|_, _, j| a * j.at(0, 1));
            let uy = self.field(|_, _, j| -a * j.at(1, 0));
            VectorField::new(ux, uy)
        };
        let forcing = |t: f64| {
            let a = self.amp(t);
            let fx = |x: f64, y: f64, j: &Jet| -> [f64; 2] {
                // velocity and its derivatives
                let u = [a * j.at(0, 1), -a * j.at(1, 0)];
                let ux = [a * j.at(1, 1), -a * j.at(2, 0)];
                let uy = [a * j.at(0, 2), -a * j.at(1, 1)];
                let lap = [a * (j.at(2, 1) + j.at(0, 3)), -a * (j.at(3, 0) + j.at(1, 2))];
                let du_xy = 0.5 * (uy[0] + ux[1]);
                let du_yy = uy[1];
                let th = 1.0 + 0.2 * (ay * y).cos();
                let th_y = -0.2 * ay * (ay * y).sin();
                let nu = p.nu(th);
                let nu_y = -p.nu1 / ((1.0 + th) * (1.0 + th)) * th_y;
                let visc = [0.5 * nu * lap[0] + nu_y * du_xy, 0.5 * nu * lap[1] + nu_y * du_yy];
                let conv = [u[0] * ux[0] + u[1] * uy[0], u[0] * ux[1] + u[1] * uy[1]];
                // −ε div(∇φ⊗∇φ) = −ε(Δφ ∇φ + H∇φ)
                let (cx, sx) = ((ax * x).cos(), (ax * x).sin());
                let (cy, sy) = ((ay * y).cos(), (ay * y).sin());
                let f = b * cx * cy;
                let (fx_, fy_) = (-b * ax * sx * cy, -b * ay * cx * sy);
                let (fxx, fyy, fxy) = (-ax * ax * f, -ay * ay * f, b * ax * ay * sx * sy);
                let lap_f = fxx + fyy;
                let cap = [
                    -eps * (lap_f * fx_ + fxx * fx_ + fxy * fy_),
                    -eps * (lap_f * fy_ + fxy * fx_ + fyy * fy_),
                ];
                [
                    -u[0] + conv[0] - visc[0] - cap[0],
                    -u[1] + conv[1] - visc[1] - cap[1],
                ]
            };
            VectorField::new(
                self.field(|x, y, j| fx(x, y, j)[0]),
                self.field(|x, y, j| fx(x, y, j)[1]),
            )
        };
        let mut u = exact(0.0);
        for k in 1..=steps {
            let f = forcing(k as f64 * dt);
            u = ns_step_forced(&u, &phi, &theta, dt, g, p, Some(&f))?.u_new;
        }
        Ok(g.l2_norm_vector(&u.sub(&exact(steps as f64 * dt))))
    }

    /// `θ = 1 + A ψ` under fixed `u = (sin ỹ, 0.5 sin x̃)`,
    /// `φ = 0.3 cos x̃ cos ỹ` and `μ = 0.2 sin ỹ`.
    fn heat(&self, dt: f64, steps: usize) -> Result<f64> {
        let (g, p) = (self.g, &self.s.params);
        let (ax, ay) = self.scaled();
        let b = 0.3;
        let u = VectorField::from_fn(g, |x, y| ((ay * y).sin(), 0.5 * (ax * x).sin()));
        let phi = ScalarField::from_fn(g, |x, y| b * (ax * x).cos() * (ay * y).cos());
        let mu = ScalarField::from_fn(g, |_, y| 0.2 * (ay * y).sin());
        let exact = |t: f64| self.field(|_, _, j| 1.0 + self.amp(t) * j.at(0, 0));
        let forcing = |t: f64| {
            let a = self.amp(t);
            self.field(|x, y, j| {
                let th = 1.0 + a * j.at(0, 0);
                let (tx, ty) = (a * j.at(1, 0), a * j.at(0, 1));
                let lap = a * (j.at(2, 0) + j.at(0, 2));
                let (ux, uy) = ((ay * y).sin(), 0.5 * (ax * x).sin());
                let (cx, sx) = ((ax * x).cos(), (ax * x).sin());
                let (cy, sy) = ((ay * y).cos(), (ay * y).sin());
                let u_grad_phi = ux * (-b * ax * sx * cy) + uy * (-b * ay * cx * sy);
                let cv = p.cv(th);
                let dkappa = p.beta * th.powf(p.beta - 1.0);
                let lap_khat = p.kappa(th) * lap + dkappa * (tx * tx + ty * ty);
                let du_xy = 0.5 * (ay * (ay * y).cos() + 0.5 * ax * cx);
                let visc = p.nu(th) * 2.0 * du_xy * du_xy;
                let chem = (0.2 * ay * cy).powi(2);
                cv * (-a * j.at(0, 0)) + cv * (ux * tx + uy * ty) + th * u_grad_phi
                    - lap_khat
                    - visc
                    - chem
            })
        };
        let mut theta = exact(0.0);
        for k in 1..=steps {
            let f = forcing(k as f64 * dt);
            theta = heat_step_forced(&theta, &u, &phi, &phi, &mu, dt, g, p, Some(&f))?.theta_new;
        }
        Ok(g.l2_norm(&theta.sub(&exact(steps as f64 * dt))))
    }
}
