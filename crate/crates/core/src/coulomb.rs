//! `D_n` as a Coulomb gas integral over the `(n+1)`-torus:
//! `D_n = ((n+1)!)^{-1} ∫ |Π_{k<j} (z_k − z_j)|² Π_j w(θ_j) dθ_j/2π`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbol::LaurentSymbol;

pub const EXACT_MAX_N: usize = 2;
pub const EXACT_GRID: usize = 512;
/// Relative change allowed between the `M` and `2M` grids.
pub const EXACT_DOUBLING_TOL: f64 = 1e-8;
pub const MC_MAX_N: usize = 8;
pub const MC_MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoulombEstimate {
    pub n: usize,
    pub value: f64,
    pub std_err: f64,
    /// Integrand evaluations: `M^{n+1}` grid nodes or Monte Carlo draws.
    pub samples: u64,
    pub method: Method,
    pub seed: Option<u64>,
}

/// `Σ_{k<j} log |e^{iθ_k} − e^{iθ_j}|²`; `-∞` for coincident angles.
pub fn log_vandermonde_sq(angles: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (j, &b) in angles.iter().enumerate() {
        for &a in &angles[..j] {
            let s = (0.5 * (a - b)).sin();
            acc += (4.0 * s * s).ln();
        }
    }
    acc
}

/// `Π_{k<j} |e^{iθ_k} − e^{iθ_j}|²`.
pub fn vandermonde_sq(angles: &[f64]) -> f64 {
    log_vandermonde_sq(angles).exp()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Uniform-grid quadrature of the Coulomb integral for `n ≤ 2`, at `M = 512`
/// and `M = 1024`.
///
/// On the grid the integrand vanishes on repeated nodes and is symmetric, so
/// the `(n+1)!` orderings collapse onto one sum over strictly increasing
/// index tuples.
pub fn exact_dn(s: &LaurentSymbol, n: usize) -> Result<CoulombEstimate> {
    exact_dn_with(s, n, EXACT_GRID)
}

pub fn exact_dn_with(s: &LaurentSymbol, n: usize, grid: usize) -> Result<CoulombEstimate> {
    if n > EXACT_MAX_N {
        return Err(Error::OutOfRange {
            what: "n",
            detail: format!("exact Coulomb quadrature supports n ≤ {EXACT_MAX_N}, got {n}"),
        });
    }
    let coarse = grid_sum(s, n, grid);
    let fine = grid_sum(s, n, 2 * grid);
    let change = (fine - coarse).abs() / fine.abs();
    if !(change <= EXACT_DOUBLING_TOL) {
        return Err(Error::QuadratureNonConvergence {
            points: 2 * grid,
            change,
        });
    }
    Ok(CoulombEstimate {
        n,
        value: fine,
        std_err: 0.0,
        samples: (2 * grid as u64).pow(n as u32 + 1),
        method: Method::ExactQuadrature,
        seed: None,
    })
}

fn grid_sum(s: &LaurentSymbol, n: usize, m: usize) -> f64 {
    let w: Vec<f64> = (0..m).map(|j| s.weight(TAU * j as f64 / m as f64)).collect();
    // |e^{iθ_a} − e^{iθ_b}|² depends only on a − b.
    let gap: Vec<f64> = (0..m).map(|d| 4.0 * (PI * d as f64 / m as f64).sin().powi(2)).collect();
    let scale = (m as f64).powi(n as i32 + 1);
    let total: f64 = match n {
        0 => w.iter().sum(),
        1 => (0..m)
            .into_par_iter()
            .map(|a| (a + 1..m).map(|b| gap[b - a] * w[b]).sum::<f64>() * w[a])
            .collect::<Vec<_>>()
            .iter()
            .sum(),
        _ => (0..m)
            .into_par_iter()
            .map(|a| {
                let mut row = 0.0;
                for b in a + 1..m {
                    let ab = gap[b - a] * w[b];
                    let inner: f64 = (b + 1..m).map(|c| gap[c - a] * gap[c - b] * w[c]).sum();
                    row += ab * inner;
                }
                row * w[a]
            })
            .collect::<Vec<_>>()
            .iter()
            .sum(),
    };
    total / scale
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&self, other: &Welford) -> Welford {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        Welford {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Monte Carlo estimate of `D_n` from uniform angle tuples.
///
/// Worker `i` draws from `ChaCha8Rng` seeded with `seed` on stream `i`; the
/// first `samples % workers` workers take one extra draw. Partial statistics
/// are merged in worker order, so the result depends only on
/// `(seed, samples, workers)`.
pub fn mc_dn(s: &LaurentSymbol, n: usize, samples: u64, seed: u64, workers: usize) -> Result<CoulombEstimate> {
    if !(1..=MC_MAX_N).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            detail: format!("Monte Carlo supports 1 ≤ n ≤ {MC_MAX_N}, got {n}"),
        });
    }
    if samples < MC_MIN_SAMPLES {
        return Err(Error::OutOfRange {
            what: "samples",
            detail: format!("need at least {MC_MIN_SAMPLES} samples, got {samples}"),
        });
    }
    if workers == 0 {
        return Err(Error::OutOfRange {
            what: "workers",
            detail: "need at least one worker".into(),
        });
    }
    let log_fact = ln_factorial(n + 1);
    let per = samples / workers as u64;
    let extra = samples % workers as u64;
    let partials: Vec<Welford> = (0..workers)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let count = per + u64::from((i as u64) < extra);
            let mut acc = Welford::default();
            let mut angles = vec![0.0; n + 1];
            for _ in 0..count {
                for a in angles.iter_mut() {
                    *a = rng.random::<f64>() * TAU;
                }
                let log_l: f64 = angles.iter().map(|&t| s.log_weight(t)).sum();
                acc.push((log_vandermonde_sq(&angles) + log_l - log_fact).exp());
            }
            acc
        })
        .collect();
    let total = partials.iter().fold(Welford::default(), |a, b| a.merge(b));
    Ok(CoulombEstimate {
        n,
        value: total.mean,
        std_err: (total.variance() / total.count as f64).sqrt(),
        samples,
        method: Method::MonteCarlo,
        seed: Some(seed),
    })
}
