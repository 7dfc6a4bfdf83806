//! Initial data, the split time step and the driver loop.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cahn_hilliard::{ch_step, chemical_potential, check_dt};
use crate::config::{Config, Scenario};
use crate::constitutive::Params;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::heat::heat_step;
use crate::navier_stokes::{ns_step, pressure};
use crate::thermo_audit::{apriori_monitor, diagnostics, BoundReport, DiagRecord};

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: VectorField,
    pub phi: ScalarField,
    pub mu: ScalarField,
    pub theta: ScalarField,
    pub p: ScalarField,
}

impl State {
    /// Fills in `μ` and `p` from `(u, φ, θ)`.
    pub fn assemble(
        t: f64,
        u: VectorField,
        phi: ScalarField,
        theta: ScalarField,
        g: &Grid,
        p: &Params,
    ) -> Result<State> {
        g.check_vector(&u)?;
        g.check(&phi)?;
        g.check(&theta)?;
        let mu = chemical_potential(&phi, &theta, g, p)?;
        let pr = pressure(&u, &phi, &theta, g, p)?;
        Ok(State {
            t,
            u,
            phi,
            mu,
            theta,
            p: pr,
        })
    }

    /// Uniform quiescent state.
    pub fn uniform(g: &Grid, p: &Params, phi: f64, theta: f64) -> Result<State> {
        State::assemble(
            0.0,
            VectorField::zeros(g),
            ScalarField::constant(g, phi),
            ScalarField::constant(g, theta),
            g,
            p,
        )
    }
}

/// Seeded band-limited noise with unit max-norm. Modes are capped at
/// `|m| ≤ 4` and inside the dealiasing band.
pub fn seeded_noise(g: &Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mx_max = 4.min(g.nx() as i32 / 3);
    let my_max = 4.min(g.ny() as i32 / 3);
    let (ax, ay) = (2.0 * PI / g.lx(), 2.0 * PI / g.ly());
    let mut modes = Vec::new();
    for mx in 0..=mx_max {
        for my in -my_max..=my_max {
            if mx == 0 && my <= 0 {
                continue;
            }
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            modes.push((ax * mx as f64, ay * my as f64, a, b));
        }
    }
    let field = ScalarField::from_fn(g, |x, y| {
        modes
            .iter()
            .map(|&(kx, ky, a, b)| {
                let (s, c) = (kx * x + ky * y).sin_cos();
                a * c + b * s
            })
            .sum()
    });
    let peak = field.max_abs();
    if peak > 0.0 {
        field.scale(1.0 / peak)
    } else {
        field
    }
}

/// Fields of the Cahn-Hilliard manufactured solution at amplitude `a`:
/// `φ = m0 + a cos(x̃) sin(ỹ)` under the shear `u = (sin ỹ, 0)` and
/// `θ = θ0 (1 + 0.2 cos ỹ)`, with `x̃, ỹ` the box-scaled coordinates.
pub(crate) fn manufactured_fields(
    g: &Grid,
    m0: f64,
    a: f64,
    theta0: f64,
) -> (VectorField, ScalarField, ScalarField) {
    let (ax, ay) = (2.0 * PI / g.lx(), 2.0 * PI / g.ly());
    let u = VectorField::from_fn(g, |_, y| ((ay * y).sin(), 0.0));
    let phi = ScalarField::from_fn(g, |x, y| m0 + a * (ax * x).cos() * (ay * y).sin());
    let theta = ScalarField::from_fn(g, |_, y| theta0 * (1.0 + 0.2 * (ay * y).cos()));
    (u, phi, theta)
}

pub fn init_state(cfg: &Config, g: &Grid, p: &Params) -> Result<State> {
    let ic = &cfg.initial;
    if !(ic.theta0 > 0.0) {
        return Err(Error::NonPositiveTemperature { value: ic.theta0 });
    }
    let (ax, ay) = (2.0 * PI / g.lx(), 2.0 * PI / g.ly());
    let theta = ScalarField::constant(g, ic.theta0);
    let (u, phi, theta) = match ic.scenario {
        Scenario::Spinodal => {
            let noise = seeded_noise(g, ic.seed);
            let phi = noise.map(|n| ic.m0 + ic.amplitude * n);
            (VectorField::zeros(g), phi, theta)
        }
        Scenario::Bubble => {
            let (cx, cy) = (0.5 * g.lx(), 0.5 * g.ly());
            let width = std::f64::consts::SQRT_2 * p.epsilon.sqrt();
            let r = ic.radius;
            let phi = ScalarField::from_fn(g, |x, y| {
                if r <= 0.0 {
                    return -1.0;
                }
                let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                ((r - d) / width).tanh()
            });
            (VectorField::zeros(g), phi, theta)
        }
        Scenario::Shear => {
            let u = VectorField::from_fn(g, |x, y| {
                (
                    (ax * x).sin() * (ay * y).cos(),
                    -(ax / ay) * (ax * x).cos() * (ay * y).sin(),
                )
            });
            let noise = seeded_noise(g, ic.seed);
            let phi = ScalarField::from_fn(g, |_, y| ic.m0 + 0.5 * (ay * y).cos())
                .add(&noise.scale(ic.amplitude));
            (u, phi, theta)
        }
        Scenario::Manufactured => manufactured_fields(g, ic.m0, ic.amplitude, ic.theta0),
    };
    State::assemble(0.0, u, phi, theta, g, p)
}

/// Time-step control for [`step_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    /// How many times a step may be halved after a positivity failure.
    pub max_halvings: u32,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl: 0.25,
            max_halvings: 5,
        }
    }
}

pub fn cfl_limit(state: &State, g: &Grid, cfl: f64) -> f64 {
    cfl * g.dx().min(g.dy()) / state.u.max_norm().max(1.0)
}

/// One Lie-split step CH → NS → heat, without retries.
fn composite(state: &State, dt: f64, g: &Grid, p: &Params) -> Result<State> {
    let ch = ch_step(&state.phi, &state.u, &state.theta, dt, g, p)?;
    let ns = ns_step(&state.u, &ch.phi_new, &state.theta, dt, g, p)?;
    let heat = heat_step(
        &state.theta,
        &ns.u_new,
        &state.phi,
        &ch.phi_new,
        &ch.mu_new,
        dt,
        g,
        p,
    )?;
    let mu = chemical_potential(&ch.phi_new, &heat.theta_new, g, p)?;
    Ok(State {
        t: state.t + dt,
        u: ns.u_new,
        phi: ch.phi_new,
        mu,
        theta: heat.theta_new,
        p: ns.p_new,
    })
}

pub fn step(state: &State, dt: f64, g: &Grid, p: &Params) -> Result<State> {
    step_with(state, dt, g, p, &StepControl::default())
}

/// [`step`] with explicit control. A positivity failure restarts the whole
/// step as `2^k` substeps of `dt/2^k`, for `k` up to `max_halvings`.
pub fn step_with(state: &State, dt: f64, g: &Grid, p: &Params, ctl: &StepControl) -> Result<State> {
    check_dt(dt)?;
    let limit = cfl_limit(state, g, ctl.cfl);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    retry_halving(state, dt, ctl.max_halvings, |s, h| composite(s, h, g, p))
}

/// Advances `state` by `dt` with `advance`, and on a positivity failure
/// restarts from `state` with `2^k` equal substeps, `k ≤ max_halvings`.
/// Other errors propagate at once; if every level fails the last positivity
/// error is returned.
pub fn retry_halving(
    state: &State,
    dt: f64,
    max_halvings: u32,
    mut advance: impl FnMut(&State, f64) -> Result<State>,
) -> Result<State> {
    check_dt(dt)?;
    let mut last = None;
    for level in 0..=max_halvings {
        let n = 1usize << level;
        let h = dt / n as f64;
        let mut s = state.clone();
        let mut failed = None;
        for _ in 0..n {
            match advance(&s, h) {
                Ok(next) => s = next,
                Err(e) if e.is_positivity() => {
                    failed = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match failed {
            None => {
                s.t = state.t + dt;
                return Ok(s);
            }
            Some(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// A stored state with its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub state: State,
    pub record: DiagRecord,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid,
    params: Params,
    fingerprint: String,
    snapshots: Vec<Snapshot>,
    diagnostics: Vec<DiagRecord>,
    bounds: Option<BoundReport>,
}

impl Trajectory {
    pub fn new(grid: Grid, params: Params, fingerprint: impl Into<String>) -> Self {
        Trajectory {
            grid,
            params,
            fingerprint: fingerprint.into(),
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            bounds: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// One record per step, including the initial state.
    pub fn diagnostics(&self) -> &[DiagRecord] {
        &self.diagnostics
    }

    pub fn bounds(&self) -> Option<&BoundReport> {
        self.bounds.as_ref()
    }

    pub fn last_state(&self) -> Option<&State> {
        self.snapshots.last().map(|s| &s.state)
    }

    /// Appends a snapshot; times must increase strictly.
    pub fn push_snapshot(&mut self, state: State, record: DiagRecord) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if !(state.t > last.state.t) {
                return Err(Error::InvalidTimeStep(state.t - last.state.t));
            }
        }
        self.snapshots.push(Snapshot { state, record });
        Ok(())
    }

    pub fn push_record(&mut self, record: DiagRecord) {
        self.diagnostics.push(record);
    }

    /// Computes and stores the a-priori bound report.
    pub fn finish(&mut self) -> Result<&BoundReport> {
        let report = apriori_monitor(self, &self.params)?;
        Ok(self.bounds.insert(report))
    }
}

/// Stepping schedule for [`simulate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub dt: f64,
    pub t_final: f64,
    pub snap_every: usize,
    pub control: StepControl,
}

impl Schedule {
    pub fn from_config(cfg: &Config) -> Self {
        Schedule {
            dt: cfg.time.dt,
            t_final: cfg.time.t_final,
            snap_every: cfg.output.snap_every,
            control: StepControl {
                cfl: cfg.time.cfl,
                ..StepControl::default()
            },
        }
    }

    /// Number of steps; the last one is shortened to land on `t_final`.
    pub fn steps(&self) -> usize {
        if self.t_final <= 0.0 {
            return 0;
        }
        (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// Steps `state0` over `sched`, recording diagnostics every step and
/// snapshots every `snap_every` steps and at the end.
pub fn simulate(
    state0: State,
    g: &Grid,
    p: &Params,
    sched: &Schedule,
    fingerprint: &str,
) -> Result<Trajectory> {
    check_dt(sched.dt)?;
    let mut traj = Trajectory::new(g.clone(), *p, fingerprint);
    let mut record = diagnostics(&state0, g, p)?;
    record.dt = sched.dt;
    traj.push_record(record);
    traj.push_snapshot(state0.clone(), record)?;

    let n = sched.steps();
    let t0 = state0.t;
    let mut state = state0;
    for k in 1..=n {
        let t_next = (t0 + k as f64 * sched.dt).min(t0 + sched.t_final);
        let dt = t_next - state.t;
        let mut next = step_with(&state, dt, g, p, &sched.control)?;
        next.t = t_next;
        let mut rec = diagnostics(&next, g, p)?;
        rec.dt = dt;
        traj.push_record(rec);
        if k % sched.snap_every.max(1) == 0 || k == n {
            traj.push_snapshot(next.clone(), rec)?;
        }
        state = next;
    }
    traj.finish()?;
    Ok(traj)
}

pub fn run(cfg: &Config) -> Result<Trajectory> {
    let g = cfg.build_grid()?;
    let p = cfg.params();
    p.validate()?;
    let state0 = init_state(cfg, &g, &p)?;
    simulate(state0, &g, &p, &Schedule::from_config(cfg), &cfg.fingerprint())
}
