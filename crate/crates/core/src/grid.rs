//! Periodic 2D grid, field containers and Fourier pseudo-spectral operators.
//!
//! Fields are stored row-major with `x` varying fastest: the value at cell
//! `(i, j)` lives at `j * nx + i` and sits at `(i * dx, j * dy)`.
//!
//! Wavenumbers follow the standard FFT ordering. The Nyquist mode
//! (`i == nx / 2`) differentiates to zero in every operator, so the
//! discrete gradient and divergence stay exact adjoints and
//! `divergence(gradient(f)) == laplacian(f)` holds mode by mode.
//!
//! Products are dealiased with the 2/3 rule: modes with `|m| > n / 3` are
//! removed from every factor before multiplication and from the result.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub(crate) type Spectrum = Vec<Complex64>;

/// Scalar field sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(g: &Grid) -> Self {
        Self::constant(g, 0.0)
    }

    pub fn constant(g: &Grid, c: f64) -> Self {
        ScalarField {
            nx: g.nx,
            ny: g.ny,
            values: vec![c; g.len()],
        }
    }

    /// Samples `f(x, y)` at the cell corners.
    pub fn from_fn(g: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(g.len());
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = g.point(i, j);
                values.push(f(x, y));
            }
        }
        ScalarField {
            nx: g.nx,
            ny: g.ny,
            values,
        }
    }

    pub fn from_values(g: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.len() {
            return Err(Error::SizeMismatch {
                expected: g.len(),
                found: values.len(),
            });
        }
        Ok(ScalarField {
            nx: g.nx,
            ny: g.ny,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields of the same shape.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }
}

/// Two-component vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zeros(g: &Grid) -> Self {
        VectorField {
            x: ScalarField::zeros(g),
            y: ScalarField::zeros(g),
        }
    }

    pub fn new(x: ScalarField, y: ScalarField) -> Self {
        VectorField { x, y }
    }

    pub fn from_fn(g: &Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        VectorField {
            x: ScalarField::from_fn(g, |x, y| f(x, y).0),
            y: ScalarField::from_fn(g, |x, y| f(x, y).1),
        }
    }

    /// Pointwise `|v|^2`.
    pub fn norm_sq(&self) -> ScalarField {
        self.x.zip_map(&self.y, |a, b| a * a + b * b)
    }

    pub fn max_norm(&self) -> f64 {
        self.norm_sq().max().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(&self, s: f64) -> Self {
        VectorField::new(self.x.scale(s), self.y.scale(s))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        VectorField::new(self.x.add(&other.x), self.y.add(&other.y))
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        VectorField::new(self.x.sub(&other.x), self.y.sub(&other.y))
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let xx = self.x.mul(&other.x);
        let yy = self.y.mul(&other.y);
        xx.add(&yy)
    }
}

/// Symmetric 2x2 tensor per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl TensorField {
    /// Pointwise Frobenius contraction `A : B`.
    pub fn contract(&self, other: &TensorField) -> ScalarField {
        let mut out = self.xx.mul(&other.xx);
        let off = self.xy.mul(&other.xy);
        let yy = self.yy.mul(&other.yy);
        for ((o, a), b) in out.values_mut().iter_mut().zip(off.values()).zip(yy.values()) {
            *o += 2.0 * a + b;
        }
        out
    }

    /// Pointwise `|A|^2`.
    pub fn norm_sq(&self) -> ScalarField {
        self.contract(self)
    }

    /// Pointwise `A v`.
    pub fn apply(&self, v: &VectorField) -> VectorField {
        VectorField::new(
            self.xx.mul(&v.x).add(&self.xy.mul(&v.y)),
            self.xy.mul(&v.x).add(&self.yy.mul(&v.y)),
        )
    }

    pub fn scale_by(&self, s: &ScalarField) -> Self {
        TensorField {
            xx: self.xx.mul(s),
            xy: self.xy.mul(s),
            yy: self.yy.mul(s),
        }
    }
}

/// Full (not necessarily symmetric) velocity gradient `G[a][b] = d_b u_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGradient {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yx: ScalarField,
    pub yy: ScalarField,
}

impl VelocityGradient {
    pub fn symmetric(&self) -> TensorField {
        TensorField {
            xx: self.xx.clone(),
            xy: self.xy.zip_map(&self.yx, |a, b| 0.5 * (a + b)),
            yy: self.yy.clone(),
        }
    }

    /// Pointwise `|grad u|^2`.
    pub fn norm_sq(&self) -> ScalarField {
        let mut out = self.xx.map(|v| v * v);
        for (((o, a), b), c) in out
            .values_mut()
            .iter_mut()
            .zip(self.xy.values())
            .zip(self.yx.values())
            .zip(self.yy.values())
        {
            *o += a * a + b * b + c * c;
        }
        out
    }
}

/// Periodic rectangular lattice with its FFT plans.
#[derive(Clone)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    dx: f64,
    dy: f64,
    kx: Vec<f64>,
    ky: Vec<f64>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }
}

/// Signed mode number of FFT index `i` for a transform of length `n`.
/// The Nyquist index maps to `+n/2`.
pub fn mode_number(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n / 2 {
                0.0
            } else {
                2.0 * PI * mode_number(i, n) as f64 / l
            }
        })
        .collect()
}

fn dealias_mask(n: usize) -> Vec<bool> {
    let cutoff = (n / 3) as i64;
    (0..n).map(|i| mode_number(i, n).abs() <= cutoff).collect()
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and at least 4"
                )));
            }
        }
        for (name, l) in [("lx", lx), ("ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            nx,
            ny,
            lx,
            ly,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
            kx: wavenumbers(nx, lx),
            ky: wavenumbers(ny, ly),
            keep_x: dealias_mask(nx),
            keep_y: dealias_mask(ny),
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        })
    }

    /// Square `n x n` grid on `[0, 2 pi)^2`.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, 2.0 * PI, 2.0 * PI)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Derivative wavenumbers along x (Nyquist entry is zero).
    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx, j as f64 * self.dy)
    }

    pub fn check(&self, f: &ScalarField) -> Result<()> {
        if f.shape() != (self.nx, self.ny) {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                found: f.len(),
            });
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &VectorField) -> Result<()> {
        self.check(&v.x)?;
        self.check(&v.y)
    }

    /// Rectangle-rule integral over the domain.
    pub fn integrate(&self, f: &ScalarField) -> f64 {
        self.dx * self.dy * f.values().iter().sum::<f64>()
    }

    pub fn mean(&self, f: &ScalarField) -> f64 {
        f.values().iter().sum::<f64>() / f.len() as f64
    }

    pub fn l2_norm(&self, f: &ScalarField) -> f64 {
        (self.dx * self.dy * f.values().iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn l2_norm_vector(&self, v: &VectorField) -> f64 {
        self.integrate(&v.norm_sq()).sqrt()
    }

    /// `||f||^2_{L^2}` evaluated from the Fourier coefficients.
    pub fn spectral_l2_sq(&self, f: &ScalarField) -> f64 {
        let s = self.forward(f);
        let n = self.len() as f64;
        self.dx * self.dy * s.iter().map(|c| c.norm_sqr()).sum::<f64>() / n
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (fx, fy) = if inverse {
            (&self.inv_x, &self.inv_y)
        } else {
            (&self.fwd_x, &self.fwd_y)
        };
        // rows are contiguous; columns are made contiguous by transposing
        fx.process(data);
        let (nx, ny) = (self.nx, self.ny);
        let mut cols = vec![Complex64::new(0.0, 0.0); nx * ny];
        transpose::transpose(data, &mut cols, nx, ny);
        fy.process(&mut cols);
        transpose::transpose(&cols, data, ny, nx);
    }

    pub(crate) fn forward(&self, f: &ScalarField) -> Spectrum {
        let mut data: Spectrum = f
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.transform(&mut data, false);
        data
    }

    pub(crate) fn inverse(&self, mut s: Spectrum) -> ScalarField {
        self.transform(&mut s, true);
        let scale = 1.0 / self.len() as f64;
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            values: s.iter().map(|c| c.re * scale).collect(),
        }
    }

    /// Index of the mode `−k` for the mode at `idx`.
    fn mirror(&self, idx: usize) -> usize {
        let (i, j) = (idx % self.nx, idx / self.nx);
        ((self.ny - j) % self.ny) * self.nx + (self.nx - i) % self.nx
    }

    /// Spectra of two real fields from one complex transform of `a + ib`.
    pub(crate) fn forward_pair(&self, a: &ScalarField, b: &ScalarField) -> (Spectrum, Spectrum) {
        let mut z: Spectrum = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.transform(&mut z, false);
        let mut sa = Vec::with_capacity(z.len());
        let mut sb = Vec::with_capacity(z.len());
        for (idx, &zk) in z.iter().enumerate() {
            let zm = z[self.mirror(idx)].conj();
            sa.push((zk + zm) * 0.5);
            sb.push(Complex64::new(0.0, -0.5) * (zk - zm));
        }
        (sa, sb)
    }

    /// Inverse of two Hermitian spectra through one transform of `A + iB`.
    pub(crate) fn inverse_pair(&self, a: Spectrum, b: &[Complex64]) -> (ScalarField, ScalarField) {
        let mut z = a;
        for (zk, bk) in z.iter_mut().zip(b) {
            *zk += Complex64::new(0.0, 1.0) * bk;
        }
        self.transform(&mut z, true);
        let scale = 1.0 / self.len() as f64;
        let field = |values| ScalarField {
            nx: self.nx,
            ny: self.ny,
            values,
        };
        (
            field(z.iter().map(|c| c.re * scale).collect()),
            field(z.iter().map(|c| c.im * scale).collect()),
        )
    }

    /// Multiplies every Fourier coefficient by `symbol(kx, ky)`.
    pub(crate) fn apply_symbol(
        &self,
        s: &[Complex64],
        symbol: impl Fn(f64, f64) -> Complex64,
    ) -> Spectrum {
        let mut out = Vec::with_capacity(s.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(s[j * self.nx + i] * symbol(self.kx[i], self.ky[j]));
            }
        }
        out
    }

    /// Visits every mode with its index and derivative wavenumbers.
    pub(crate) fn for_each_mode(&self, mut f: impl FnMut(usize, f64, f64)) {
        for j in 0..self.ny {
            for i in 0..self.nx {
                f(j * self.nx + i, self.kx[i], self.ky[j]);
            }
        }
    }

    pub(crate) fn truncate(&self, s: &mut [Complex64]) {
        for j in 0..self.ny {
            for i in 0..self.nx {
                if !(self.keep_x[i] && self.keep_y[j]) {
                    s[j * self.nx + i] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Whether the 2/3-rule filter keeps mode `(i, j)`.
    pub fn keeps_mode(&self, i: usize, j: usize) -> bool {
        self.keep_x[i] && self.keep_y[j]
    }

    pub fn gradient(&self, f: &ScalarField) -> Result<VectorField> {
        self.check(f)?;
        Ok(self.gradient_of(&self.forward(f)))
    }

    pub(crate) fn gradient_of(&self, s: &[Complex64]) -> VectorField {
        let gx = self.apply_symbol(s, |kx, _| Complex64::new(0.0, kx));
        let gy = self.apply_symbol(s, |_, ky| Complex64::new(0.0, ky));
        let (x, y) = self.inverse_pair(gx, &gy);
        VectorField::new(x, y)
    }

    pub fn divergence(&self, v: &VectorField) -> Result<ScalarField> {
        self.check_vector(v)?;
        let (sx, sy) = self.forward_pair(&v.x, &v.y);
        Ok(self.inverse(self.divergence_of(&sx, &sy)))
    }

    pub(crate) fn divergence_of(&self, sx: &[Complex64], sy: &[Complex64]) -> Spectrum {
        let mut out = vec![Complex64::new(0.0, 0.0); sx.len()];
        self.for_each_mode(|idx, kx, ky| {
            out[idx] = Complex64::new(0.0, kx) * sx[idx] + Complex64::new(0.0, ky) * sy[idx];
        });
        out
    }

    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let s = self.forward(f);
        Ok(self.inverse(self.apply_symbol(&s, |kx, ky| {
            Complex64::new(-(kx * kx + ky * ky), 0.0)
        })))
    }

    /// `Delta^2 f`, applied with the direct symbol `|k|^4`.
    pub fn biharmonic(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let s = self.forward(f);
        Ok(self.inverse(self.apply_symbol(&s, |kx, ky| {
            let k2 = kx * kx + ky * ky;
            Complex64::new(k2 * k2, 0.0)
        })))
    }

    /// Second derivatives `(f_xx, f_xy, f_yy)`.
    pub fn hessian(&self, f: &ScalarField) -> Result<TensorField> {
        self.check(f)?;
        let s = self.forward(f);
        let (xx, yy) = self.inverse_pair(
            self.apply_symbol(&s, |kx, _| Complex64::new(-kx * kx, 0.0)),
            &self.apply_symbol(&s, |_, ky| Complex64::new(-ky * ky, 0.0)),
        );
        Ok(TensorField {
            xx,
            xy: self.inverse(self.apply_symbol(&s, |kx, ky| Complex64::new(-kx * ky, 0.0))),
            yy,
        })
    }

    pub fn velocity_gradient(&self, u: &VectorField) -> Result<VelocityGradient> {
        self.check_vector(u)?;
        let (sx, sy) = self.forward_pair(&u.x, &u.y);
        let (gx, gy) = (self.gradient_of(&sx), self.gradient_of(&sy));
        Ok(VelocityGradient {
            xx: gx.x,
            xy: gx.y,
            yx: gy.x,
            yy: gy.y,
        })
    }

    /// `Du = (grad u + grad u^T) / 2`.
    pub fn symmetric_gradient(&self, u: &VectorField) -> Result<TensorField> {
        Ok(self.velocity_gradient(u)?.symmetric())
    }

    /// Row-wise divergence of a symmetric tensor field.
    pub fn tensor_divergence(&self, t: &TensorField) -> Result<VectorField> {
        for f in [&t.xx, &t.xy, &t.yy] {
            self.check(f)?;
        }
        let (sxx, syy) = self.forward_pair(&t.xx, &t.yy);
        let sxy = self.forward(&t.xy);
        let (x, y) = self.inverse_pair(self.divergence_of(&sxx, &sxy), &self.divergence_of(&sxy, &syy));
        Ok(VectorField::new(x, y))
    }

    /// Helmholtz-Leray projection onto discretely divergence-free fields.
    pub fn leray_project(&self, v: &VectorField) -> Result<VectorField> {
        Ok(self.leray_decompose(v)?.0)
    }

    /// Splits `v = P v + grad(psi)`, returning `(P v, psi)` with `psi` mean-free.
    pub fn leray_decompose(&self, v: &VectorField) -> Result<(VectorField, ScalarField)> {
        self.check_vector(v)?;
        let (mut sx, mut sy) = self.forward_pair(&v.x, &v.y);
        let mut psi = vec![Complex64::new(0.0, 0.0); sx.len()];
        self.for_each_mode(|idx, kx, ky| {
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                return;
            }
            let kdotv = sx[idx] * kx + sy[idx] * ky;
            // grad(psi) has coefficients i k psi = k (k.v) / |k|^2
            psi[idx] = Complex64::new(0.0, -1.0) * kdotv / k2;
            sx[idx] -= kdotv * (kx / k2);
            sy[idx] -= kdotv * (ky / k2);
        });
        let (x, y) = self.inverse_pair(sx, &sy);
        Ok((VectorField::new(x, y), self.inverse(psi)))
    }

    /// 2/3-rule truncation of a single field.
    pub fn dealias(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let mut s = self.forward(f);
        self.truncate(&mut s);
        Ok(self.inverse(s))
    }

    /// Dealiased `sum_k a_k b_k`: every factor and the result are truncated.
    pub fn dealiased_sum_of_products(
        &self,
        pairs: &[(&ScalarField, &ScalarField)],
    ) -> Result<ScalarField> {
        let mut acc = ScalarField::zeros(self);
        for (a, b) in pairs {
            self.check(a)?;
            self.check(b)?;
            let (mut sa, mut sb) = self.forward_pair(a, b);
            self.truncate(&mut sa);
            self.truncate(&mut sb);
            let (a, b) = self.inverse_pair(sa, &sb);
            for ((o, x), y) in acc.values_mut().iter_mut().zip(a.values()).zip(b.values()) {
                *o += x * y;
            }
        }
        self.dealias(&acc)
    }

    pub fn dealiased_product(&self, a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
        self.dealiased_sum_of_products(&[(a, b)])
    }

    /// Dealiased advection `u . grad f`.
    pub fn advect(&self, u: &VectorField, f: &ScalarField) -> Result<ScalarField> {
        self.check_vector(u)?;
        let gf = self.gradient(f)?;
        self.dealiased_sum_of_products(&[(&u.x, &gf.x), (&u.y, &gf.y)])
    }

    /// Pointwise `|grad f|^2` of the truncated field; stays nonnegative.
    pub fn dealiased_grad_sq(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let mut s = self.forward(f);
        self.truncate(&mut s);
        Ok(self.gradient_of(&s).norm_sq())
    }
}
