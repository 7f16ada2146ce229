//! Real Laurent-polynomial log-weights `L(θ) = Σ_{|k|≤K} L̂_k e^{ikθ}` and the
//! Toeplitz moments of `w = e^L`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{refine, QuadratureConfig};

/// Largest tolerated departure from `L̂_{-k} = conj(L̂_k)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A real log-weight with finitely many Fourier coefficients.
///
/// Only `L̂_0..L̂_K` are stored; negative indices follow from Hermitian
/// symmetry, so `L` is real by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentSymbol {
    coeffs: Vec<Complex64>,
}

impl LaurentSymbol {
    /// `L ≡ 0`.
    pub fn zero() -> Self {
        LaurentSymbol {
            coeffs: vec![Complex64::new(0.0, 0.0)],
        }
    }

    /// Builds a symbol from a finite map `k → L̂_k`.
    ///
    /// A coefficient whose mirror `-k` is absent implies it by conjugation.
    /// When both are present they are symmetrized, and the input is rejected
    /// if that moves any coefficient by more than [`SYMMETRY_TOL`].
    pub fn new(coeffs: &BTreeMap<i64, Complex64>) -> Result<Self> {
        let bandwidth = coeffs.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = vec![Complex64::new(0.0, 0.0); bandwidth + 1];
        for k in 0..=bandwidth as i64 {
            let pos = coeffs.get(&k).copied();
            let neg = coeffs.get(&-k).copied();
            let (a, b) = match (pos, neg) {
                (None, None) => continue,
                (Some(a), None) => (a, a.conj()),
                (None, Some(b)) => (b.conj(), b),
                (Some(a), Some(b)) => (a, b),
            };
            let sym = (a + b.conj()) * 0.5;
            let deviation = (sym - a).norm().max((sym.conj() - b).norm());
            if deviation > SYMMETRY_TOL {
                return Err(Error::NonReal { k, deviation });
            }
            out[k as usize] = if k == 0 { Complex64::new(sym.re, 0.0) } else { sym };
        }
        Ok(LaurentSymbol { coeffs: out })
    }

    /// Builds a symbol from `L̂_0, L̂_1, …, L̂_K`.
    pub fn from_nonnegative(coeffs: Vec<Complex64>) -> Result<Self> {
        let map = coeffs
            .into_iter()
            .enumerate()
            .map(|(k, c)| (k as i64, c))
            .collect::<BTreeMap<_, _>>();
        Self::new(&map)
    }

    /// Real coefficients `L̂_k = L̂_{-k}`, i.e. `L = a_0 + 2 Σ a_k cos kθ`.
    pub fn from_real(coeffs: &[f64]) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect()
        };
        LaurentSymbol { coeffs }
    }

    /// The bandwidth `K`.
    pub fn bandwidth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        match self.coeffs.get(k.unsigned_abs() as usize) {
            Some(&c) if k >= 0 => c,
            Some(&c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `L̂_k` for `k = 0..=K`.
    pub fn nonnegative(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `L̂_0`, the mean of `L`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn log_weight(&self, theta: f64) -> f64 {
        let k_max = self.bandwidth() as i64;
        let sum: Complex64 = (-k_max..=k_max)
            .map(|k| {
                let (s, c) = (k as f64 * theta).sin_cos();
                self.coeff(k) * Complex64::new(c, s)
            })
            .sum();
        debug_assert!(
            sum.im.abs() < 1e-13 * (1.0 + sum.re.abs()),
            "imaginary residue {} in a real log-weight",
            sum.im
        );
        sum.re
    }

    pub fn weight(&self, theta: f64) -> f64 {
        self.log_weight(theta).exp()
    }

    /// Moments `c_0..c_{n_max}` of `e^L dθ/2π` with default quadrature.
    pub fn moments(&self, n_max: usize) -> Result<MomentSequence> {
        self.moments_with(n_max, &QuadratureConfig::default())
    }

    pub fn moments_with(&self, n_max: usize, cfg: &QuadratureConfig) -> Result<MomentSequence> {
        let start = cfg.start_points(n_max + self.bandwidth());
        let conv = refine(cfg, start, |grid| {
            let w: Vec<f64> = grid.angles().map(|t| self.weight(t)).collect();
            Ok(grid.fourier_coeffs(&w, n_max))
        })?;
        let mut c = conv.value;
        c[0].im = 0.0;
        Ok(MomentSequence {
            coeffs: c,
            quadrature_points: Some(conv.points),
        })
    }

    /// The Golinskii–Ibragimov truncation `L_(N)`: coefficients with `|k| ≤ N`.
    pub fn gi_truncate(&self, n: usize) -> Self {
        LaurentSymbol {
            coeffs: self.coeffs.iter().take(n + 1).copied().collect(),
        }
    }

    /// `(L̂_0, Σ_{k≥1} k |L̂_k|²)`.
    pub fn target_sum(&self) -> (f64, f64) {
        let h_half = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .fold(0.0, |acc, (k, c)| acc + k as f64 * c.norm_sqr());
        (self.mean(), h_half)
    }

    /// `tL`.
    pub fn scaled(&self, t: f64) -> Self {
        LaurentSymbol {
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }

    /// Same symbol with `L̂_0` replaced.
    pub fn with_mean(&self, mean: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = Complex64::new(mean, 0.0);
        LaurentSymbol { coeffs }
    }

    /// Parses the symbol file format: one `k re im` line per coefficient with
    /// `k ≥ 0`; blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad(format!("expected `k re im`, found {} fields", fields.len())));
            }
            let k: i64 = fields[0]
                .parse()
                .map_err(|_| bad(format!("invalid index `{}`", fields[0])))?;
            if k < 0 {
                return Err(bad(format!("negative index {k}; only k >= 0 is stored")));
            }
            let re: f64 = fields[1]
                .parse()
                .map_err(|_| bad(format!("invalid real part `{}`", fields[1])))?;
            let im: f64 = fields[2]
                .parse()
                .map_err(|_| bad(format!("invalid imaginary part `{}`", fields[2])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(bad("non-finite coefficient".into()));
            }
            if map.insert(k, Complex64::new(re, im)).is_some() {
                return Err(bad(format!("duplicate index {k}")));
            }
        }
        Self::new(&map).map_err(|e| match e {
            Error::NonReal { k, deviation } => Error::Parse {
                line: 0,
                msg: format!("L_{k} must be real (imaginary part {deviation:e})"),
            },
            other => other,
        })
    }

    /// Inverse of [`LaurentSymbol::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{k} {:.16e} {:.16e}", c.re, c.im);
        }
        out
    }
}

/// Toeplitz moments `c_n = ∫ e^{-inθ} dμ` for `0 ≤ n ≤ N`; negative indices
/// are conjugates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    coeffs: Vec<Complex64>,
    quadrature_points: Option<usize>,
}

impl MomentSequence {
    /// Wraps `c_0..c_N`. `c_0` must be real and every entry finite; positivity
    /// is checked where it matters (recursion, factorization).
    pub fn from_nonnegative(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidMoments("empty moment sequence".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidMoments("non-finite moment".into()));
        }
        if coeffs[0].im.abs() > SYMMETRY_TOL * (1.0 + coeffs[0].re.abs()) {
            return Err(Error::InvalidMoments(format!("c_0 = {} is not real", coeffs[0])));
        }
        let mut coeffs = coeffs;
        coeffs[0].im = 0.0;
        Ok(MomentSequence {
            coeffs,
            quadrature_points: None,
        })
    }

    /// Largest index `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c_k` for `|k| ≤ N`.
    ///
    /// # Panics
    /// If `|k| > N`.
    pub fn get(&self, k: i64) -> Complex64 {
        let c = self.coeffs[k.unsigned_abs() as usize];
        if k >= 0 {
            c
        } else {
            c.conj()
        }
    }

    pub fn c0(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn nonnegative(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Grid size at which quadrature converged, if these came from a symbol.
    pub fn quadrature_points(&self) -> Option<usize> {
        self.quadrature_points
    }

    /// Moments of `μ / c_0`.
    pub fn normalized(&self) -> MomentSequence {
        let c0 = self.c0();
        MomentSequence {
            coeffs: self.coeffs.iter().map(|c| c / c0).collect(),
            quadrature_points: self.quadrature_points,
        }
    }

    pub fn truncated(&self, order: usize) -> MomentSequence {
        MomentSequence {
            coeffs: self.coeffs.iter().take(order + 1).copied().collect(),
            quadrature_points: self.quadrature_points,
        }
    }

    pub(crate) fn require_order(&self, need: usize) -> Result<()> {
        if self.order() < need {
            Err(Error::OrderTooSmall {
                have: self.order(),
                need,
            })
        } else {
            Ok(())
        }
    }

    /// CSV with a schema line, the grid size and columns `n,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema=1\n");
        if let Some(m) = self.quadrature_points {
            let _ = writeln!(out, "# grid_points={m}");
        }
        out.push_str("n,re,im\n");
        for (n, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{n},{},{}", crate::report::fmt_f64(c.re), crate::report::fmt_f64(c.im));
        }
        out
    }

    /// Reads the format written by [`MomentSequence::to_csv`]. Rows must list
    /// `n = 0, 1, 2, …` in order.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut points = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(rest) = line.strip_prefix("# grid_points=") {
                points = Some(rest.trim().parse().map_err(|_| bad("invalid grid_points".into()))?);
                continue;
            }
            if line.is_empty() || line.starts_with('#') || line.starts_with("n,") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad(format!("expected `n,re,im`, found {} fields", fields.len())));
            }
            let n: usize = fields[0].parse().map_err(|_| bad(format!("invalid index `{}`", fields[0])))?;
            if n != coeffs.len() {
                return Err(bad(format!("expected index {}, found {n}", coeffs.len())));
            }
            let re: f64 = fields[1].parse().map_err(|_| bad(format!("invalid number `{}`", fields[1])))?;
            let im: f64 = fields[2].parse().map_err(|_| bad(format!("invalid number `{}`", fields[2])))?;
            coeffs.push(Complex64::new(re, im));
        }
        let mut m = Self::from_nonnegative(coeffs).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        m.quadrature_points = points;
        Ok(m)
    }
}
