//! The Szegő function `D(z) = exp(L̂_0/2 + Σ_{k≥1} L̂_k z^k)` and the checks
//! built on it.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opuc::RecursionState;
use crate::poly::horner;
use crate::quadrature::{refine_scalar, CircleGrid, GaussLegendre, QuadratureConfig};
use crate::symbol::LaurentSymbol;

/// `|α_n|` below this is treated as rounding noise.
pub const ALPHA_FLOOR: f64 = 1e-13;
/// Minimum number of usable points for [`decay_fit`].
pub const MIN_FIT_POINTS: usize = 8;
/// Radius up to which the series is trusted for a finite-bandwidth symbol.
pub const FINITE_RADIUS: f64 = 2.0;

pub const DISK_RADIAL_NODES: usize = 64;
pub const DISK_ANGLES: usize = 256;
pub const COMPACT_RADII: usize = 16;
pub const COMPACT_ANGLES: usize = 64;
pub const COMPACT_MAX_RADIUS: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SzegoSeries {
    /// `D(0) = exp(L̂_0/2)`.
    pub d0: f64,
    /// `L̂_1, …, L̂_K`.
    pub log_series: Vec<Complex64>,
    pub radius: f64,
}

pub fn build_szego(s: &LaurentSymbol) -> SzegoSeries {
    SzegoSeries {
        d0: (0.5 * s.mean()).exp(),
        log_series: s.nonnegative()[1..].to_vec(),
        radius: FINITE_RADIUS,
    }
}

impl SzegoSeries {
    pub fn bandwidth(&self) -> usize {
        self.log_series.len()
    }

    /// `κ_∞ = D(0)^{-1}`.
    pub fn kappa_inf(&self) -> f64 {
        self.d0.recip()
    }

    /// `Σ_{k≥1} L̂_k z^k`.
    pub fn log_ratio(&self, z: Complex64) -> Complex64 {
        z * horner(&self.log_series, z)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.log_ratio(z).exp() * self.d0
    }

    /// `(log D)'(z) = Σ k L̂_k z^{k-1}`.
    pub fn eval_dlog(&self, z: Complex64) -> Complex64 {
        let d: Vec<Complex64> = self
            .log_series
            .iter()
            .enumerate()
            .map(|(i, c)| c * (i + 1) as f64)
            .collect();
        horner(&d, z)
    }

    /// Taylor coefficients of `D` through `z^{j_max}`.
    pub fn coeffs(&self, j_max: usize) -> Vec<Complex64> {
        series_exp(&self.log_series, j_max)
            .into_iter()
            .map(|c| c * self.d0)
            .collect()
    }

    /// Taylor coefficients of `1/D` through `z^{j_max}`.
    pub fn inverse_coeffs(&self, j_max: usize) -> Vec<Complex64> {
        let neg: Vec<Complex64> = self.log_series.iter().map(|c| -c).collect();
        series_exp(&neg, j_max)
            .into_iter()
            .map(|c| c / self.d0)
            .collect()
    }

    /// `Σ k |L̂_k|² r^{2k}`.
    pub fn disk_target(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.log_series
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c.norm_sqr() * r2.powi(i as i32 + 1))
            .sum()
    }
}

/// Coefficients `e_0..e_{m_max}` of `exp(Σ_{k≥1} g_k z^k)`, with `g[k-1] = g_k`:
/// `e_0 = 1`, `m e_m = Σ_{k=1}^{m} k g_k e_{m-k}`.
pub fn series_exp(g: &[Complex64], m_max: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); m_max + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for m in 1..=m_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=m.min(g.len()) {
            acc += g[k - 1] * k as f64 * e[m - k];
        }
        e[m] = acc / m as f64;
    }
    e
}

/// `α_n = −κ_∞ ∫ conj(Φ_{n+1}) D^{-1} dμ` with `dμ = e^L dθ/2π`, for a
/// state of degree `n + 1` built from the moments of `s`.
pub fn alpha_from_d(next: &RecursionState, d: &SzegoSeries, s: &LaurentSymbol, cfg: &QuadratureConfig) -> Result<Complex64> {
    let phi = next.phi();
    let start = cfg.start_points(next.degree() + s.bandwidth());
    let integral = refine_scalar(cfg, start, |grid| {
        Ok(grid.mean(|j| {
            let z = grid.unit(j);
            phi.eval(z).conj() * s.weight(grid.angle(j)) / d.eval(z)
        }))
    })?;
    Ok(-integral.value * d.kappa_inf())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// `−slope` of `log |α_n|` against `n`.
    pub a_half: f64,
    /// `exp(intercept)`.
    pub c: f64,
    pub r2: f64,
    pub points: usize,
}

/// Least-squares line through `(n, log |α_n|)` over the leading run of
/// coefficients above [`ALPHA_FLOOR`].
pub fn decay_fit(alphas: &[Complex64]) -> Result<DecayFit> {
    let usable = alphas.iter().take_while(|a| a.norm() > ALPHA_FLOOR).count();
    if usable < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            usable,
            required: MIN_FIT_POINTS,
        });
    }
    let ys: Vec<f64> = alphas[..usable].iter().map(|a| a.norm().ln()).collect();
    let (slope, intercept, r2) = linear_fit(&ys);
    Ok(DecayFit {
        a_half: -slope,
        c: intercept.exp(),
        r2,
        points: usable,
    })
}

/// `(slope, intercept, r²)` of `y_i` against `i`.
pub fn linear_fit(ys: &[f64]) -> (f64, f64, f64) {
    let n = ys.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = (0..ys.len()).map(|i| (i as f64 - x_mean).powi(2)).sum();
    let sxy: f64 = ys.iter().enumerate().map(|(i, y)| (i as f64 - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (y - intercept - slope * i as f64).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r2)
}

/// `(1/π) ∫_{|z|≤r} |(log D)'|² d²z` by Gauss–Legendre in the radius and a
/// uniform angular grid.
pub fn disk_integral_check(d: &SzegoSeries, r: f64) -> f64 {
    let gl = GaussLegendre::new(DISK_RADIAL_NODES);
    let grid = CircleGrid::new(DISK_ANGLES);
    gl.on_interval(0.0, r)
        .map(|(rho, w)| {
            let ring = grid.mean(|j| Complex64::new(d.eval_dlog(grid.unit(j) * rho).norm_sqr(), 0.0));
            2.0 * w * rho * ring.re
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiStarDeviation {
    pub n: usize,
    /// `max |φ_n^*(z) − D(z)^{-1}|` over the compact grid.
    pub max_dev: f64,
    /// `|κ_n − D(0)^{-1}|`.
    pub at_origin: f64,
}

/// Points `r e^{iθ}` with `r = 1.05 (i+1)/16`, 64 angles, plus the origin.
pub fn compact_grid() -> Vec<Complex64> {
    let circle = CircleGrid::new(COMPACT_ANGLES);
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for i in 0..COMPACT_RADII {
        let r = COMPACT_MAX_RADIUS * (i + 1) as f64 / COMPACT_RADII as f64;
        pts.extend((0..COMPACT_ANGLES).map(|j| circle.unit(j) * r));
    }
    pts
}

/// Deviation of `φ_n^*` from `D^{-1}` for each state, on [`compact_grid`].
pub fn phi_star_convergence(states: &[RecursionState], d: &SzegoSeries) -> Vec<PhiStarDeviation> {
    let grid = compact_grid();
    let d_inv: Vec<Complex64> = grid.iter().map(|&z| d.eval(z).inv()).collect();
    states
        .iter()
        .map(|s| {
            let star = s.orthonormal_star();
            let max_dev = grid
                .iter()
                .zip(&d_inv)
                .map(|(&z, &di)| (horner(&star, z) - di).norm())
                .fold(0.0, f64::max);
            PhiStarDeviation {
                n: s.degree(),
                max_dev,
                at_origin: (s.kappa() - d.kappa_inf()).abs(),
            }
        })
        .collect()
}

/// `∫ |D φ_n^* − 1|² dθ/2π`.
pub fn l2_defect(state: &RecursionState, d: &SzegoSeries, cfg: &QuadratureConfig) -> Result<f64> {
    let star = state.orthonormal_star();
    let start = cfg.start_points(state.degree() + d.bandwidth());
    let v = refine_scalar(cfg, start, |grid| {
        Ok(grid.mean(|j| {
            let z = grid.unit(j);
            Complex64::new((d.eval(z) * horner(&star, z) - 1.0).norm_sqr(), 0.0)
        }))
    })?;
    Ok(v.value.re)
}

/// `log c_0 + Σ_j log(1 − |α_j|²) − L̂_0`, which tends to 0 by Szegő's theorem.
pub fn szego_defect(state: &RecursionState, s: &LaurentSymbol) -> f64 {
    let log_f = state.c0().ln() + state.alphas().iter().map(|a| (-a.norm_sqr()).ln_1p()).sum::<f64>();
    log_f - s.mean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opuc::{run_sequence, run_to};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cosine() -> LaurentSymbol {
        LaurentSymbol::from_real(&[0.0, 0.5])
    }

    #[test]
    fn construction() {
        let d = build_szego(&LaurentSymbol::zero());
        assert_eq!(d.d0, 1.0);
        assert!((d.eval(c(0.3, 0.9)) - 1.0).norm() < 1e-16);
        let d = build_szego(&cosine());
        assert_eq!(d.d0, 1.0);
        assert!((d.eval(c(1.0, 0.0)).re - 1.648_721_270_7).abs() < 1e-10);
        let d = build_szego(&LaurentSymbol::from_real(&[0.4]));
        assert!((d.d0 - 0.2f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn boundary_modulus_is_weight() {
        for s in [cosine(), LaurentSymbol::from_real(&[0.3, 0.2, 0.1])] {
            let d = build_szego(&s);
            let grid = CircleGrid::new(512);
            for j in 0..512 {
                let w = s.weight(grid.angle(j));
                assert!((d.eval(grid.unit(j)).norm_sqr() - w).abs() <= 1e-10 * w);
            }
        }
    }

    #[test]
    fn inverse_series() {
        let d = build_szego(&LaurentSymbol::zero());
        assert_eq!(d.inverse_coeffs(3), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let inv = build_szego(&cosine()).inverse_coeffs(10);
        let mut fact = 1.0;
        for (j, v) in inv.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            assert!((v - c((-0.5f64).powi(j as i32) / fact, 0.0)).norm() < 1e-16);
        }
        let s = LaurentSymbol::from_nonnegative(vec![c(0.1, 0.0), c(0.2, -0.1), c(0.05, 0.3)]).unwrap();
        let d = build_szego(&s);
        let (a, b) = (d.coeffs(30), d.inverse_coeffs(30));
        for m in 0..=30 {
            let conv: Complex64 = (0..=m).map(|j| a[j] * b[m - j]).sum();
            let expect = if m == 0 { 1.0 } else { 0.0 };
            assert!((conv - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn series_exp_matches_pointwise_exp() {
        let g = vec![c(0.2, 0.1), c(-0.1, 0.05)];
        let e = series_exp(&g, 60);
        let z = c(0.4, -0.3);
        let direct = (z * horner(&g, z)).exp();
        assert!((horner(&e, z) - direct).norm() < 1e-15);
    }

    #[test]
    fn alpha_routes_agree() {
        let cfg = QuadratureConfig::default();
        let s = LaurentSymbol::zero();
        let m = s.moments(4).unwrap();
        let d = build_szego(&s);
        for n in 0..4 {
            let a = alpha_from_d(&run_to(&m, n + 1).unwrap(), &d, &s, &cfg).unwrap();
            assert!(a.norm() < 1e-14);
        }
        for s in [cosine(), LaurentSymbol::from_nonnegative(vec![c(0.3, 0.0), c(0.2, 0.1), c(0.0, -0.1)]).unwrap()] {
            let m = s.moments(12).unwrap();
            let d = build_szego(&s);
            let state = run_to(&m, 12).unwrap();
            for n in 0..12 {
                let a = alpha_from_d(&run_to(&m, n + 1).unwrap(), &d, &s, &cfg).unwrap();
                assert!((a - state.alphas()[n]).norm() < 1e-10, "n={n}: {a} vs {}", state.alphas()[n]);
            }
        }
        let m = cosine().moments(1).unwrap();
        let a0 = alpha_from_d(&run_to(&m, 1).unwrap(), &build_szego(&cosine()), &cosine(), &cfg).unwrap();
        assert!((a0.re - 0.446_390).abs() < 1e-6);
    }

    #[test]
    fn decay_fit_geometric_and_errors() {
        let alphas: Vec<Complex64> = (0..12).map(|n| c(0.5 * 4f64.powi(-n), 0.0)).collect();
        let f = decay_fit(&alphas).unwrap();
        assert!((f.a_half - 4f64.ln()).abs() < 1e-12);
        assert!((f.c - 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert_eq!(f.points, 12);
        let tiny = vec![c(1e-14, 0.0); 20];
        assert!(matches!(decay_fit(&tiny), Err(Error::InsufficientData { usable: 0, required: 8 })));
    }

    #[test]
    fn decay_fit_cosine() {
        let m = cosine().moments(30).unwrap();
        let f = decay_fit(run_to(&m, 30).unwrap().alphas()).unwrap();
        assert!(f.a_half > 0.0);
        assert!(f.r2 > 0.99, "r2 = {}", f.r2);
    }

    #[test]
    fn disk_integral() {
        assert_eq!(disk_integral_check(&build_szego(&LaurentSymbol::zero()), 0.9), 0.0);
        let d = build_szego(&cosine());
        assert!((disk_integral_check(&d, 0.5) - 0.0625).abs() < 1e-14);
        let d = build_szego(&LaurentSymbol::from_real(&[0.0, 0.2, 0.1]));
        let expect = 1.0 * 0.04 * 0.64 + 2.0 * 0.01 * 0.4096;
        assert!((disk_integral_check(&d, 0.8) - expect).abs() < 1e-14);
        assert!((expect - 0.033_792).abs() < 1e-15);
        let s = LaurentSymbol::from_nonnegative(vec![c(0.0, 0.0), c(0.3, -0.2), c(0.1, 0.1), c(0.0, 0.05)]).unwrap();
        let d = build_szego(&s);
        for r in [0.3, 0.6, 0.9] {
            let t = d.disk_target(r);
            assert!((disk_integral_check(&d, r) - t).abs() <= 1e-8 * t);
        }
    }

    #[test]
    fn phi_star_limits() {
        let s = LaurentSymbol::zero();
        let states = run_sequence(&s.moments(6).unwrap(), 6).unwrap();
        for dev in phi_star_convergence(&states, &build_szego(&s)) {
            assert!(dev.max_dev < 1e-14 && dev.at_origin < 1e-14);
        }
        let s = cosine();
        let states = run_sequence(&s.moments(12).unwrap(), 12).unwrap();
        let devs = phi_star_convergence(&states, &build_szego(&s));
        for w in devs.windows(2) {
            assert!(w[1].max_dev < w[0].max_dev);
        }
        assert!(devs[12].max_dev < 1e-8);
        assert!(devs[12].at_origin <= devs[12].max_dev);
    }

    #[test]
    fn compact_grid_shape() {
        let g = compact_grid();
        assert_eq!(g.len(), 1 + 16 * 64);
        let rmax = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((rmax - 1.05).abs() < 1e-15);
        assert!((g[1].arg()).abs() < 1e-15 && (g[2].arg() - 2.0 * PI / 64.0).abs() < 1e-14);
    }

    #[test]
    fn l2_defect_and_szego_theorem() {
        let cfg = QuadratureConfig::default();
        let s = LaurentSymbol::from_real(&[0.3, 0.2, 0.1]);
        let m = s.moments(25).unwrap();
        let states = run_sequence(&m, 25).unwrap();
        let d = build_szego(&s);
        let defects: Vec<f64> = states.iter().map(|st| l2_defect(st, &d, &cfg).unwrap()).collect();
        for w in defects[2..].windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(defects[25] < 1e-20);
        assert!(szego_defect(&states[25], &s).abs() < 1e-8);
        assert!(szego_defect(&states[0], &s).abs() > 1e-3);
    }
}
