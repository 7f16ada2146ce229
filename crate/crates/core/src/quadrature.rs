//! Spectral quadrature on the circle and Gauss–Legendre rules.
//!
//! Integrals `∫ f(θ) dθ/2π` of periodic analytic integrands are evaluated by
//! the uniform-grid trapezoid rule, whose error decays geometrically in the
//! number of points. [`refine`] doubles the grid until successive results
//! stagnate.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest grid ever used.
pub const MIN_POINTS: usize = 64;
/// Doubling stops once the grid would exceed this many points.
pub const MAX_POINTS: usize = 1 << 20;
/// Successive grids agreeing to this (scaled) tolerance count as converged.
pub const STAGNATION_TOL: f64 = 1e-14;
/// Hitting the cap with a change above this is an error.
pub const FAILURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub min_points: usize,
    pub max_points: usize,
    pub stagnation_tol: f64,
    pub failure_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            min_points: MIN_POINTS,
            max_points: MAX_POINTS,
            stagnation_tol: STAGNATION_TOL,
            failure_tol: FAILURE_TOL,
        }
    }
}

impl QuadratureConfig {
    pub fn with_max_points(mut self, max_points: usize) -> Self {
        self.max_points = max_points;
        self
    }

    /// Starting grid size for a problem whose integrands carry frequencies up
    /// to `bandwidth`.
    pub fn start_points(&self, bandwidth: usize) -> usize {
        self.min_points.max(8 * bandwidth)
    }
}

/// The uniform grid `θ_j = 2πj/M` with a cached table of `e^{iθ_j}`.
#[derive(Debug, Clone)]
pub struct CircleGrid {
    unit: Vec<Complex64>,
}

impl CircleGrid {
    pub fn new(points: usize) -> Self {
        assert!(points > 0, "grid needs at least one point");
        let unit = (0..points)
            .map(|j| {
                let (s, c) = (TAU * j as f64 / points as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        CircleGrid { unit }
    }

    pub fn points(&self) -> usize {
        self.unit.len()
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.points() as f64
    }

    /// `e^{iθ_j}`.
    pub fn unit(&self, j: usize) -> Complex64 {
        self.unit[j]
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points()).map(|j| self.angle(j))
    }

    /// `(1/M) Σ_j f_j e^{-inθ_j}` for `n = 0..=n_max`.
    ///
    /// The phase `e^{-inθ_j}` is read from the table at index `nj mod M`, so
    /// no error accumulates with `n`.
    pub fn fourier_coeffs(&self, samples: &[f64], n_max: usize) -> Vec<Complex64> {
        let m = self.points();
        assert_eq!(samples.len(), m);
        (0..=n_max)
            .map(|n| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut idx = 0usize;
                let step = n % m;
                for &f in samples {
                    acc += self.unit[idx].conj() * f;
                    idx += step;
                    if idx >= m {
                        idx -= m;
                    }
                }
                acc / m as f64
            })
            .collect()
    }

    /// `(1/M) Σ_j f(θ_j)`.
    pub fn mean<F: FnMut(usize) -> Complex64>(&self, mut f: F) -> Complex64 {
        let sum: Complex64 = (0..self.points()).map(&mut f).sum();
        sum / self.points() as f64
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub points: usize,
    pub change: f64,
}

/// Doubles the grid, starting at `start` points, until `eval` stagnates.
///
/// The change between successive grids is measured as the largest absolute
/// difference scaled by `max(1, max |value|)`.
pub fn refine<F>(cfg: &QuadratureConfig, start: usize, mut eval: F) -> Result<Converged<Vec<Complex64>>>
where
    F: FnMut(&CircleGrid) -> Result<Vec<Complex64>>,
{
    let mut points = start.max(cfg.min_points).max(1);
    if points > cfg.max_points {
        return Err(Error::QuadratureNonConvergence {
            points,
            change: f64::INFINITY,
        });
    }
    let mut prev = eval(&CircleGrid::new(points))?;
    let mut change = f64::INFINITY;
    loop {
        let next = points * 2;
        if next > cfg.max_points {
            return if change <= cfg.failure_tol {
                Ok(Converged {
                    value: prev,
                    points,
                    change,
                })
            } else {
                Err(Error::QuadratureNonConvergence { points, change })
            };
        }
        let cur = eval(&CircleGrid::new(next))?;
        let scale = cur.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
        change = prev
            .iter()
            .zip(&cur)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0_f64, f64::max)
            / scale;
        points = next;
        prev = cur;
        if change < cfg.stagnation_tol {
            return Ok(Converged {
                value: prev,
                points,
                change,
            });
        }
    }
}

/// Scalar convenience wrapper around [`refine`].
pub fn refine_scalar<F>(cfg: &QuadratureConfig, start: usize, mut eval: F) -> Result<Converged<Complex64>>
where
    F: FnMut(&CircleGrid) -> Result<Complex64>,
{
    let c = refine(cfg, start, |g| eval(g).map(|v| vec![v]))?;
    Ok(Converged {
        value: c.value[0],
        points: c.points,
        change: c.change,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
