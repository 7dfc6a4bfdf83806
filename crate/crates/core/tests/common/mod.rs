//! Dense reference operators built from explicit DFT sums.
//!
//! Every spectral operator is the real matrix `M[a][b] = (1/N) Σ_k σ(k)
//! exp(i k·(x_a − x_b))`. The derivative wavenumber at each Nyquist index is
//! zero and the 2/3-rule keeps `|m| ≤ n/3`, matching the documented
//! conventions of the grid.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermoflow::grid::{Grid, ScalarField, VectorField};

pub type Mat = Vec<Vec<f64>>;

pub struct Dense {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

fn signed(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Dense {
    pub fn new(g: &Grid) -> Self {
        Dense {
            nx: g.nx(),
            ny: g.ny(),
            lx: g.lx(),
            ly: g.ly(),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    fn wavenumber(i: usize, n: usize, l: f64) -> f64 {
        if i == n / 2 {
            0.0
        } else {
            2.0 * PI * signed(i, n) as f64 / l
        }
    }

    /// Real operator with complex symbol `σ(kx, ky, mx, my)`.
    pub fn operator(&self, symbol: impl Fn(f64, f64, i64, i64) -> (f64, f64)) -> Mat {
        let n = self.len();
        let (dx, dy) = (self.lx / self.nx as f64, self.ly / self.ny as f64);
        // phase of mode (p, q) at separation (di, dj)
        let mut table = vec![vec![0.0; n]; n];
        for q in 0..self.ny {
            for p in 0..self.nx {
                let kx = Self::wavenumber(p, self.nx, self.lx);
                let ky = Self::wavenumber(q, self.ny, self.ly);
                let sym = symbol(kx, ky, signed(p, self.nx), signed(q, self.ny));
                // true wavenumbers carry the exponentials, including Nyquist
                let ex = 2.0 * PI * p as f64 / self.lx;
                let ey = 2.0 * PI * q as f64 / self.ly;
                for dj in 0..self.ny {
                    for di in 0..self.nx {
                        let arg = ex * di as f64 * dx + ey * dj as f64 * dy;
                        let (s, c) = arg.sin_cos();
                        // real part of σ e^{i arg}
                        table[q * self.nx + p][dj * self.nx + di] = sym.0 * c - sym.1 * s;
                    }
                }
            }
        }
        let mut m = vec![vec![0.0; n]; n];
        for (a, row) in m.iter_mut().enumerate() {
            let (ia, ja) = (a % self.nx, a / self.nx);
            for (b, v) in row.iter_mut().enumerate() {
                let (ib, jb) = (b % self.nx, b / self.nx);
                let di = (ia + self.nx - ib) % self.nx;
                let dj = (ja + self.ny - jb) % self.ny;
                let sep = dj * self.nx + di;
                *v = table.iter().map(|t| t[sep]).sum::<f64>() / n as f64;
            }
        }
        m
    }

    pub fn dx(&self) -> Mat {
        self.operator(|kx, _, _, _| (0.0, kx))
    }

    pub fn dy(&self) -> Mat {
        self.operator(|_, ky, _, _| (0.0, ky))
    }

    pub fn lap(&self) -> Mat {
        self.operator(|kx, ky, _, _| (-(kx * kx + ky * ky), 0.0))
    }

    /// Pseudo-inverse of the Laplacian, zero on its kernel.
    pub fn lap_pinv(&self) -> Mat {
        self.operator(|kx, ky, _, _| {
            let k2 = kx * kx + ky * ky;
            (if k2 == 0.0 { 0.0 } else { -1.0 / k2 }, 0.0)
        })
    }

    pub fn trunc(&self) -> Mat {
        let (cx, cy) = ((self.nx / 3) as i64, (self.ny / 3) as i64);
        self.operator(move |_, _, mx, my| (if mx.abs() <= cx && my.abs() <= cy { 1.0 } else { 0.0 }, 0.0))
    }
}

pub fn matvec(m: &Mat, v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = b[0].len();
    a.iter()
        .map(|row| (0..n).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
        .collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn lincomb(terms: &[(f64, &Mat)]) -> Mat {
    let n = terms[0].1.len();
    let mut out = vec![vec![0.0; n]; n];
    for (c, m) in terms {
        for (o, r) in out.iter_mut().zip(m.iter()) {
            for (x, y) in o.iter_mut().zip(r) {
                *x += c * y;
            }
        }
    }
    out
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| {
        let mut row = r.clone();
        row.push(v);
        row
    }).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

pub fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `max|a − b| / max(1, max|b|)`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

pub fn random_field(g: &Grid, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ScalarField {
    let v = (0..g.len()).map(|_| rng.gen_range(lo..hi)).collect();
    ScalarField::from_values(g, v).unwrap()
}

pub fn random_vector(g: &Grid, rng: &mut ChaCha8Rng, amp: f64) -> VectorField {
    VectorField::new(random_field(g, rng, -amp, amp), random_field(g, rng, -amp, amp))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub mod steps;
