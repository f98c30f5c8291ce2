//! Independent reference norms for band-limited trigonometric fields.
//!
//! A field is a finite sum `Σ a cos(ξ x + μ y + φ)` with every `ξ ≥ 0`, so
//! all derivatives and `∂_x^{-1}` are known in closed form and the
//! trapezoid rule integrates products of such sums exactly. The oracles
//! below use only pointwise evaluation plus quadrature, or a naive
//! double-sum DFT; no FFT is involved.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::rngs::StdRng;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub xi: f64,
    pub mu: f64,
    pub amp: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Box2 {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Box2 {
    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.lx + self.lx * i as f64 / self.nx as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        -0.5 * self.ly + self.ly * i as f64 / self.ny as f64
    }

    fn cell(&self) -> f64 {
        self.lx * self.ly / (self.nx * self.ny) as f64
    }
}

/// Random smooth field with x-wavenumber indices in `1..=nx/4` (plus an
/// x-independent part when `with_mean`) and y indices in `-ny/4..=ny/4`.
pub fn random_modes(rng: &mut StdRng, b: &Box2, with_mean: bool) -> Vec<Mode> {
    let jmax = (b.nx / 4) as i64;
    let mmax = (b.ny / 4) as i64;
    let jmin = if with_mean { 0 } else { 1 };
    let mut modes = Vec::new();
    for j in jmin..=jmax {
        for m in -mmax..=mmax {
            if j == 0 && m < 0 {
                continue;
            }
            let decay = (-((j * j + m * m) as f64) / 12.0).exp();
            modes.push(Mode {
                xi: TAU * j as f64 / b.lx,
                mu: TAU * m as f64 / b.ly,
                amp: decay * rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..TAU),
            });
        }
    }
    modes
}

/// `∂_x^p ∂_y^q f` at `(x, y)`; `p = -1` is the zero-mean antiderivative.
pub fn eval(modes: &[Mode], x: f64, y: f64, p: i32, q: i32) -> f64 {
    modes
        .iter()
        .map(|m| {
            if p < 0 && m.xi == 0.0 {
                return 0.0;
            }
            let scale = m.xi.powi(p) * m.mu.powi(q);
            if scale == 0.0 {
                return 0.0;
            }
            m.amp * scale * (m.xi * x + m.mu * y + m.phase + (p + q) as f64 * FRAC_PI_2).cos()
        })
        .sum()
}

pub fn sample(modes: &[Mode], b: &Box2) -> Vec<f64> {
    let mut v = Vec::with_capacity(b.nx * b.ny);
    for iy in 0..b.ny {
        for ix in 0..b.nx {
            v.push(eval(modes, b.x(ix), b.y(iy), 0, 0));
        }
    }
    v
}

fn quad_sq_2d(modes: &[Mode], b: &Box2, p: i32, q: i32) -> f64 {
    let mut s = 0.0;
    for iy in 0..b.ny {
        for ix in 0..b.nx {
            let v = eval(modes, b.x(ix), b.y(iy), p, q);
            s += v * v;
        }
    }
    s * b.cell()
}

fn quad_sq_row(modes: &[Mode], b: &Box2, iy: usize, p: i32) -> f64 {
    let y = b.y(iy);
    let h = b.lx / b.nx as f64;
    (0..b.nx).map(|ix| eval(modes, b.x(ix), y, p, 0).powi(2)).sum::<f64>() * h
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `‖f(·, y_iy)‖_{H^k_x}` from `Σ_i C(k,i) ‖∂_x^i f‖²`.
pub fn quad_hk_row(modes: &[Mode], b: &Box2, iy: usize, k: u32) -> f64 {
    (0..=k)
        .map(|i| binomial(k, i) * quad_sq_row(modes, b, iy, i as i32))
        .sum::<f64>()
        .sqrt()
}

/// `‖f‖_{H^s}` for integer `s`, expanding `(1 + ξ² + μ²)^s` multinomially.
pub fn quad_hs(modes: &[Mode], b: &Box2, s: u32) -> f64 {
    let mut total = 0.0;
    for a in 0..=s {
        for c in 0..=(s - a) {
            // ‖∂_x^a ∂_y^c f‖² carries ξ^{2a} μ^{2c}
            let coef = binomial(s, a) * binomial(s - a, c);
            total += coef * quad_sq_2d(modes, b, a as i32, c as i32);
        }
    }
    total.sqrt()
}

/// `‖f‖_{H^s_{-1}}` for integer `s`: the weight `(1 + 1/ξ)²` (all `ξ > 0`)
/// is absorbed into the amplitudes.
pub fn quad_hs_minus1(modes: &[Mode], b: &Box2, s: u32) -> f64 {
    let lifted: Vec<Mode> = modes
        .iter()
        .map(|m| Mode {
            amp: m.amp * (1.0 + 1.0 / m.xi),
            ..*m
        })
        .collect();
    quad_hs(&lifted, b, s)
}

/// `‖f‖ + ‖f_x‖ + ‖f_xx‖ + ‖∂_x^{-1} f_y‖ + ‖f_y‖`.
pub fn quad_w1(modes: &[Mode], b: &Box2) -> f64 {
    [(0, 0), (1, 0), (2, 0), (-1, 1), (0, 1)]
        .iter()
        .map(|&(p, q)| quad_sq_2d(modes, b, p, q).sqrt())
        .sum()
}

fn signed(j: usize, n: usize) -> f64 {
    if 2 * j <= n {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

/// `Σ_{j,m} weight(ξ_j, μ_m) |ĉ_{jm}|²` with `ĉ` from a direct double-sum DFT.
pub fn dft_weighted_2d(values: &[f64], b: &Box2, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let (nx, ny) = (b.nx, b.ny);
    // Separable direct DFT: rows first, then columns.
    let mut rows = vec![(0.0, 0.0); nx * ny];
    for iy in 0..ny {
        for j in 0..nx {
            let (mut re, mut im) = (0.0, 0.0);
            for ix in 0..nx {
                let ang = -TAU * (j * ix % nx) as f64 / nx as f64;
                let v = values[iy * nx + ix];
                re += v * ang.cos();
                im += v * ang.sin();
            }
            rows[iy * nx + j] = (re, im);
        }
    }
    let mut total = 0.0;
    for m in 0..ny {
        for j in 0..nx {
            let (mut re, mut im) = (0.0, 0.0);
            for iy in 0..ny {
                let ang = -TAU * (m * iy % ny) as f64 / ny as f64;
                let (a, c) = rows[iy * nx + j];
                re += a * ang.cos() - c * ang.sin();
                im += a * ang.sin() + c * ang.cos();
            }
            let xi = TAU * signed(j, nx) / b.lx;
            let mu = TAU * signed(m, ny) / b.ly;
            total += weight(xi, mu) * (re * re + im * im);
        }
    }
    let size = (nx * ny) as f64;
    b.lx * b.ly / (size * size) * total
}

pub fn dft_hs(values: &[f64], b: &Box2, s: f64) -> f64 {
    dft_weighted_2d(values, b, |xi, mu| (1.0 + xi * xi + mu * mu).powf(s)).sqrt()
}

pub fn dft_hs_minus1(values: &[f64], b: &Box2, s: f64) -> f64 {
    dft_weighted_2d(values, b, |xi, mu| {
        if xi == 0.0 {
            0.0
        } else {
            (1.0 + 1.0 / xi.abs()).powi(2) * (1.0 + xi * xi + mu * mu).powf(s)
        }
    })
    .sqrt()
}

/// Relative agreement `|a - b| ≤ tol · max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
