//! End-to-end experiments: the strong Szegő limit, Bernstein–Szegő and
//! Golinskii–Ibragimov approximations, and the Feynman–Hellman identities.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cdkernel::{kernel_diag_boundary, kernel_sum, normalization_check, KernelEval, OrthonormalFamily};
use crate::error::{Error, Result};
use crate::opuc::{run_sequence, run_to, states_from_alphas, zeros_in_disk};
use crate::poly::{horner, radial_derivative_sq};
use crate::quadrature::{refine, refine_scalar, CircleGrid, GaussLegendre, QuadratureConfig};
use crate::report::{fmt_f64, CSV_SCHEMA};
use crate::symbol::{LaurentSymbol, MomentSequence};
use crate::szego_fn::{alpha_from_d, build_szego, disk_integral_check, szego_defect};
use crate::toeplitz::{log_det_direct, log_det_product, DeterminantLedger, ToeplitzMatrix};

pub const DEFAULT_NMAX: usize = 40;
pub const MAX_REPORT_NMAX: usize = 60;
/// Extra Verblunsky coefficients used for `G_n` and `F` beyond `n_max`.
pub const G_EXTRA: usize = 20;
/// Error window for the exponential-convergence fit.
pub const FIT_WINDOW: (usize, usize) = (2, 15);
/// Floor applied to absolute errors before taking logs in the fit.
pub const ERROR_FLOOR: f64 = 1e-16;

pub const ROUTE_TOL: f64 = 1e-10;
pub const LIMIT_TOL: f64 = 1e-8;
pub const G_BOUND_TOL: f64 = 1e-8;
pub const ALPHA_ROUTE_TOL: f64 = 1e-8;
pub const ALPHA_ROUTE_FLOOR: f64 = 1e-11;
pub const DISK_TOL: f64 = 1e-8;
pub const CD_TOL: f64 = 1e-11;
pub const DIAG_TOL: f64 = 1e-10;
pub const NORMALIZATION_TOL: f64 = 1e-9;
pub const BS_TOL: f64 = 1e-10;
/// Verblunsky coefficients of `dμ^{(N)}` checked past `N`.
pub const BS_EXTRA: usize = 10;
pub const FH_DEFAULT_H: f64 = 1e-3;
pub const FH_T_NODES: usize = 16;

/// A named symbol from the built-in test suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSymbol {
    pub id: &'static str,
    pub symbol: LaurentSymbol,
    /// Closed-form moments `a^{|k|}`, when known.
    pub geometric: Option<f64>,
}

impl SuiteSymbol {
    /// Moments `c_0..c_order`, exact where a closed form exists.
    pub fn moments(&self, order: usize, cfg: &QuadratureConfig) -> Result<MomentSequence> {
        match self.geometric {
            Some(a) => Ok(geometric_moments(a, order)),
            None => self.symbol.moments_with(order, cfg),
        }
    }
}

/// `c_k = a^{|k|}`, the moments of `(1 − a²)/|1 − a e^{iθ}|²`.
pub fn geometric_moments(a: f64, order: usize) -> MomentSequence {
    MomentSequence::from_nonnegative((0..=order).map(|k| Complex64::new(a.powi(k as i32), 0.0)).collect())
        .expect("finite real moments")
}

/// `log w` for the geometric moments: `L̂_0 = log(1 − a²)`, `L̂_k = a^k/k`,
/// truncated at `k_max`.
pub fn geometric_symbol(a: f64, k_max: usize) -> LaurentSymbol {
    let mut coeffs = vec![(1.0 - a * a).ln()];
    coeffs.extend((1..=k_max).map(|k| a.powi(k as i32) / k as f64));
    LaurentSymbol::from_real(&coeffs)
}

pub fn suite() -> Vec<SuiteSymbol> {
    vec![
        SuiteSymbol {
            id: "zero",
            symbol: LaurentSymbol::zero(),
            geometric: None,
        },
        SuiteSymbol {
            id: "cos",
            symbol: LaurentSymbol::from_real(&[0.0, 0.5]),
            geometric: None,
        },
        SuiteSymbol {
            id: "two-cos",
            symbol: LaurentSymbol::from_real(&[0.0, 0.2, 0.1]),
            geometric: None,
        },
        SuiteSymbol {
            id: "shifted",
            symbol: LaurentSymbol::from_real(&[0.3, 0.2, 0.1]),
            geometric: None,
        },
        SuiteSymbol {
            id: "bs-half",
            symbol: geometric_symbol(0.5, 60),
            geometric: Some(0.5),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub log_dn_direct: f64,
    pub log_dn_product: f64,
    /// `log D_n − (n+1) L̂_0` on the Cholesky route.
    pub log_dn_minus_mean: f64,
    pub target: f64,
    /// `|log D_n − (n+1) L̂_0 − target|`, Cholesky route.
    pub abs_err: f64,
    pub abs_err_product: f64,
    pub g_n: f64,
    /// `(n+1)(log ‖Φ_{n+1}‖² − L̂_0)`.
    pub tail_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub symbol_id: String,
    pub mean: f64,
    pub target: f64,
    pub exp_target: f64,
    pub alphas_used: usize,
    pub quadrature_points: Option<usize>,
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `log max(abs_err, 1e-16)` against `n` over [`FIT_WINDOW`].
    pub error_slope: Option<f64>,
}

impl ConvergenceReport {
    pub fn g_nondecreasing(&self, tol: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].g_n >= w[0].g_n - tol)
    }

    pub fn g_bounded(&self, rel: f64) -> bool {
        self.rows.iter().all(|r| r.g_n <= self.exp_target * (1.0 + rel))
    }

    pub fn max_route_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.log_dn_direct - r.log_dn_product).abs() / r.log_dn_direct.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{CSV_SCHEMA}\n# symbol={}\n# mean={}\n# target={}\n# alphas_used={}\n# quadrature_points={}\n",
            self.symbol_id,
            fmt_f64(self.mean),
            fmt_f64(self.target),
            self.alphas_used,
            self.quadrature_points.map_or("exact".to_string(), |p| p.to_string())
        );
        out.push_str("n,log_Dn_direct,log_Dn_product,log_Dn_minus_mean,target,abs_err,abs_err_product,G_n,tail_defect\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                fmt_f64(r.log_dn_direct),
                fmt_f64(r.log_dn_product),
                fmt_f64(r.log_dn_minus_mean),
                fmt_f64(r.target),
                fmt_f64(r.abs_err),
                fmt_f64(r.abs_err_product),
                fmt_f64(r.g_n),
                fmt_f64(r.tail_defect)
            );
        }
        out
    }
}

/// Convergence of `log D_n − (n+1) L̂_0` to `Σ k |L̂_k|²` for the moments of
/// `s`, computed from the symbol by quadrature.
pub fn strong_szego_report(id: &str, s: &LaurentSymbol, n_max: usize, cfg: &QuadratureConfig) -> Result<ConvergenceReport> {
    let m = s.moments_with(n_max + G_EXTRA, cfg)?;
    strong_szego_report_from(id, s, &m, n_max)
}

/// As [`strong_szego_report`] with the moments supplied; `m` needs order
/// `n_max + 1` at least, and every coefficient past that feeds `G_n`.
pub fn strong_szego_report_from(id: &str, s: &LaurentSymbol, m: &MomentSequence, n_max: usize) -> Result<ConvergenceReport> {
    if n_max > MAX_REPORT_NMAX {
        return Err(Error::OutOfRange {
            what: "nmax",
            detail: format!("reports support n_max ≤ {MAX_REPORT_NMAX}, got {n_max}"),
        });
    }
    m.require_order(n_max + 1)?;
    let (mean, target) = s.target_sum();
    let states = run_sequence(m, m.order())?;
    let ledger = DeterminantLedger::from_state(states.last().expect("non-empty"), n_max)?;
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let direct = log_det_direct(&ToeplitzMatrix::assemble(m, n)?)?;
        let product = log_det_product(&states[n]);
        let shift = (n + 1) as f64 * mean;
        rows.push(ConvergenceRow {
            n,
            log_dn_direct: direct,
            log_dn_product: product,
            log_dn_minus_mean: direct - shift,
            target,
            abs_err: (direct - shift - target).abs(),
            abs_err_product: (product - shift - target).abs(),
            g_n: ledger.rows[n].g_n,
            tail_defect: (n + 1) as f64 * (states[n + 1].norm_sq().ln() - mean),
        });
    }
    let (lo, hi) = FIT_WINDOW;
    let hi = hi.min(n_max);
    let error_slope = (hi >= lo + 2).then(|| {
        let ys: Vec<f64> = rows[lo..=hi].iter().map(|r| r.abs_err.max(ERROR_FLOOR).ln()).collect();
        crate::szego_fn::linear_fit(&ys).0
    });
    Ok(ConvergenceReport {
        symbol_id: id.to_string(),
        mean,
        target,
        exp_target: target.exp(),
        alphas_used: ledger.alphas_used,
        quadrature_points: m.quadrature_points(),
        rows,
        error_slope,
    })
}

/// The Bernstein–Szegő approximant `dμ^{(N)} = dθ/(2π |φ_N|²)` of the
/// normalized measure and its checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsApproxBundle {
    pub n_bs: usize,
    pub grid_points: usize,
    /// `w^{(N)}(θ_j)` on the converged grid.
    pub weights: Vec<f64>,
    pub moments: Vec<Complex64>,
    pub alphas: Vec<Complex64>,
    pub mass: f64,
    /// `max_{j≤N} |c_j(μ^{(N)}) − c_j(μ)/c_0(μ)|`.
    pub moment_dev: f64,
    /// `max_{j<N} |α_j(μ^{(N)}) − α_j(μ)|`.
    pub alpha_dev: f64,
    /// `max_{N≤j<N+10} |α_j(μ^{(N)})|`.
    pub alpha_tail: f64,
}

impl BsApproxBundle {
    pub fn passes(&self, tol: f64) -> bool {
        self.moment_dev <= tol && self.alpha_dev <= tol && self.alpha_tail <= tol && (self.mass - 1.0).abs() <= tol
    }
}

pub fn bs_approximation(m: &MomentSequence, n_bs: usize, cfg: &QuadratureConfig) -> Result<BsApproxBundle> {
    let normalized = m.normalized();
    let target = run_to(&normalized, n_bs)?;
    let phi = target.orthonormal();
    let order = n_bs + BS_EXTRA;
    let conv = refine(cfg, cfg.start_points(order), |grid| {
        let w: Vec<f64> = (0..grid.points()).map(|j| horner(&phi, grid.unit(j)).norm_sqr().recip()).collect();
        Ok(grid.fourier_coeffs(&w, order))
    })?;
    let grid = CircleGrid::new(conv.points);
    let weights: Vec<f64> = (0..grid.points()).map(|j| horner(&phi, grid.unit(j)).norm_sqr().recip()).collect();
    let mut moments = conv.value;
    moments[0].im = 0.0;
    let bs = MomentSequence::from_nonnegative(moments.clone())?;
    let alphas = run_to(&bs, order)?.alphas().to_vec();
    let moment_dev = (0..=n_bs.min(m.order()))
        .map(|j| (moments[j] - normalized.nonnegative()[j]).norm())
        .fold(0.0, f64::max);
    let alpha_dev = (0..n_bs)
        .map(|j| (alphas[j] - target.alphas()[j]).norm())
        .fold(0.0, f64::max);
    let alpha_tail = alphas[n_bs..].iter().map(|a| a.norm()).fold(0.0, f64::max);
    Ok(BsApproxBundle {
        n_bs,
        grid_points: conv.points,
        weights,
        mass: moments[0].re,
        moments,
        alphas,
        moment_dev,
        alpha_dev,
        alpha_tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiBoundRow {
    pub n: usize,
    pub g_full: f64,
    /// `G_n` of the Bernstein–Szegő approximant: `α_j` kept for `j < N`.
    pub g_bs: f64,
    /// `G_n` of the Golinskii–Ibragimov truncation `L_(N)`.
    pub g_gi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiBoundReport {
    pub n_trunc: usize,
    pub target_full: f64,
    pub target_gi: f64,
    pub rows: Vec<GiBoundRow>,
    /// `exp(target) − G_n` for the full symbol.
    pub gaps: Vec<f64>,
    pub monotone: bool,
    pub bounded: bool,
}

/// `G_n` for `s` and its two truncations at `N`.
pub fn gi_bound_check(s: &LaurentSymbol, n_trunc: usize, n_max: usize, cfg: &QuadratureConfig) -> Result<GiBoundReport> {
    let order = n_max + G_EXTRA;
    let full = run_to(&s.moments_with(order, cfg)?, order)?;
    let gi_symbol = s.gi_truncate(n_trunc);
    let gi = run_to(&gi_symbol.moments_with(order, cfg)?, order)?;
    let mut bs_alphas = vec![Complex64::new(0.0, 0.0); order];
    let keep = n_trunc.min(order);
    bs_alphas[..keep].copy_from_slice(&full.alphas()[..keep]);
    let bs = states_from_alphas(&bs_alphas, 1.0)?.pop().expect("non-empty");
    let l_full = DeterminantLedger::from_state(&full, n_max)?;
    let l_gi = DeterminantLedger::from_state(&gi, n_max)?;
    let l_bs = DeterminantLedger::from_state(&bs, n_max)?;
    let target_full = s.target_sum().1.exp();
    let target_gi = gi_symbol.target_sum().1.exp();
    let rows: Vec<GiBoundRow> = (0..=n_max)
        .map(|n| GiBoundRow {
            n,
            g_full: l_full.rows[n].g_n,
            g_bs: l_bs.rows[n].g_n,
            g_gi: l_gi.rows[n].g_n,
        })
        .collect();
    let monotone = l_full.g_nondecreasing(1e-12) && l_gi.g_nondecreasing(1e-12) && l_bs.g_nondecreasing(1e-12);
    let bounded = rows.iter().all(|r| {
        r.g_full <= target_full * (1.0 + G_BOUND_TOL) && r.g_gi <= target_gi * (1.0 + G_BOUND_TOL) && r.g_bs <= r.g_full * (1.0 + 1e-12)
    });
    Ok(GiBoundReport {
        n_trunc,
        target_full,
        target_gi,
        gaps: rows.iter().map(|r| target_full - r.g_full).collect(),
        rows,
        monotone,
        bounded,
    })
}

/// Deformation used by the Feynman–Hellman checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `w_t = exp(tL − c_t)` with `c_t = log ∫ e^{tL} dθ/2π`.
    #[default]
    Normalized,
    /// `w_t = exp(tL)`.
    Unnormalized,
}

/// One evaluation of the family at `t`.
struct FamilyPoint {
    moments: MomentSequence,
    /// `c_t` (zero for the unnormalized family).
    c_t: f64,
    /// `ċ_t = ∫ L e^{tL} / ∫ e^{tL}` (zero for the unnormalized family).
    c_dot: f64,
}

fn family_point(s: &LaurentSymbol, t: f64, order: usize, family: Family, cfg: &QuadratureConfig) -> Result<FamilyPoint> {
    let st = s.scaled(t);
    let raw = st.moments_with(order, cfg)?;
    match family {
        Family::Unnormalized => Ok(FamilyPoint {
            moments: raw,
            c_t: 0.0,
            c_dot: 0.0,
        }),
        Family::Normalized => {
            let lw = refine_scalar(cfg, cfg.start_points(s.bandwidth()), |grid| {
                Ok(grid.mean(|j| {
                    let th = grid.angle(j);
                    Complex64::new(s.log_weight(th) * st.weight(th), 0.0)
                }))
            })?;
            Ok(FamilyPoint {
                c_t: raw.c0().ln(),
                c_dot: lw.value.re / raw.c0(),
                moments: raw.normalized(),
            })
        }
    }
}

/// `log ‖Φ_n‖²` in the family at `t`.
fn log_norm(s: &LaurentSymbol, n: usize, t: f64, family: Family, cfg: &QuadratureConfig) -> Result<f64> {
    let p = family_point(s, t, n, family, cfg)?;
    Ok(run_to(&p.moments, n)?.norm_sq().ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FhCheck {
    pub n: usize,
    pub t: f64,
    pub h: f64,
    pub family: Family,
    /// `∫ |φ_n|² (d/dt log w_t) dμ_t`.
    pub analytic: f64,
    /// Central difference of `log ‖Φ_n‖²` with step `h`.
    pub finite_diff: f64,
    /// Same with step `h/2`.
    pub finite_diff_half: f64,
    pub gap: f64,
    pub gap_half: f64,
    /// `gap / gap_half`, close to 4 for an `O(h²)` difference.
    pub ratio: f64,
}

pub fn feynman_hellman_check(
    s: &LaurentSymbol,
    n: usize,
    t: f64,
    h: f64,
    family: Family,
    cfg: &QuadratureConfig,
) -> Result<FhCheck> {
    if !(t > 0.0 && t < 1.0) || !(h > 0.0) {
        return Err(Error::OutOfRange {
            what: "t/h",
            detail: format!("need 0 < t < 1 and h > 0, got t = {t}, h = {h}"),
        });
    }
    let p = family_point(s, t, n, family, cfg)?;
    let phi = run_to(&p.moments, n)?.orthonormal();
    let analytic = refine_scalar(cfg, cfg.start_points(n + s.bandwidth()), |grid| {
        Ok(grid.mean(|j| {
            let th = grid.angle(j);
            let l = s.log_weight(th);
            let w = (t * l - p.c_t).exp();
            Complex64::new(horner(&phi, grid.unit(j)).norm_sqr() * (l - p.c_dot) * w, 0.0)
        }))
    })?
    .value
    .re;
    let fd = |step: f64| -> Result<f64> {
        Ok((log_norm(s, n, t + step, family, cfg)? - log_norm(s, n, t - step, family, cfg)?) / (2.0 * step))
    };
    let finite_diff = fd(h)?;
    let finite_diff_half = fd(0.5 * h)?;
    let gap = (analytic - finite_diff).abs();
    let gap_half = (analytic - finite_diff_half).abs();
    Ok(FhCheck {
        n,
        t,
        h,
        family,
        analytic,
        finite_diff,
        finite_diff_half,
        gap,
        gap_half,
        ratio: gap / gap_half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratedIdentity {
    pub n: usize,
    /// `(n+1) log ‖Φ_{n+1}‖²` at `t = 1` in the normalized family.
    pub boundary_term: f64,
    /// `∫_0^1 dt ∫ (d/dt log w_t) ∂_r|φ_{n+1}^*|² dμ_t`.
    pub double_integral: f64,
    pub rhs: f64,
    /// `log D_n(w_1)` by Cholesky.
    pub log_dn: f64,
    pub residual: f64,
    /// `∫ L Re(Σ k L̂_k e^{ikθ}) dθ/2π`.
    pub limit_value: f64,
    /// `limit_value − Σ k |L̂_k|²`.
    pub limit_residual: f64,
}

/// The integrated Feynman–Hellman identity for `w_t = exp(tL − c_t)`, with a
/// 16-node Gauss–Legendre rule in `t`.
pub fn integrated_identity_check(s: &LaurentSymbol, n: usize, cfg: &QuadratureConfig) -> Result<IntegratedIdentity> {
    let gl = GaussLegendre::new(FH_T_NODES);
    let nodes: Vec<(f64, f64)> = gl.on_interval(0.0, 1.0).collect();
    let pieces: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|&(t, wt)| {
            let p = family_point(s, t, n + 1, Family::Normalized, cfg)?;
            let star = run_to(&p.moments, n + 1)?.orthonormal_star();
            let inner = refine_scalar(cfg, cfg.start_points(n + 1 + s.bandwidth()), |grid| {
                Ok(grid.mean(|j| {
                    let th = grid.angle(j);
                    let l = s.log_weight(th);
                    let w = (t * l - p.c_t).exp();
                    Complex64::new((l - p.c_dot) * radial_derivative_sq(&star, th) * w, 0.0)
                }))
            })?;
            Ok(wt * inner.value.re)
        })
        .collect();
    let mut double_integral = 0.0;
    for p in pieces {
        double_integral += p?;
    }
    let end = family_point(s, 1.0, n + 1, Family::Normalized, cfg)?;
    let boundary_term = (n + 1) as f64 * run_to(&end.moments, n + 1)?.norm_sq().ln();
    let rhs = boundary_term - double_integral;
    let log_dn = log_det_direct(&ToeplitzMatrix::assemble(&end.moments, n)?)?;
    let limit_value = limit_form(s, cfg)?;
    Ok(IntegratedIdentity {
        n,
        boundary_term,
        double_integral,
        rhs,
        log_dn,
        residual: rhs - log_dn,
        limit_value,
        limit_residual: limit_value - s.target_sum().1,
    })
}

/// `∫ L(θ) Re(Σ_{k≥1} k L̂_k e^{ikθ}) dθ/2π` by quadrature.
pub fn limit_form(s: &LaurentSymbol, cfg: &QuadratureConfig) -> Result<f64> {
    let d = build_szego(s);
    let v = refine_scalar(cfg, cfg.start_points(2 * s.bandwidth()), |grid| {
        Ok(grid.mean(|j| {
            let z = grid.unit(j);
            // z (log D)'(z) = Σ k L̂_k z^k
            Complex64::new(s.log_weight(grid.angle(j)) * (z * d.eval_dlog(z)).re, 0.0)
        }))
    })?;
    Ok(v.value.re)
}

/// Outcome of one named invariant suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckOutcome { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Everything `verify` reports for one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub symbol: Option<String>,
    pub n_max: usize,
    pub moment_order: usize,
    pub quadrature_points: Option<usize>,
    pub tolerances: Tolerances,
    pub convergence: Option<ConvergenceReport>,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub route: f64,
    pub limit: f64,
    pub g_bound: f64,
    pub alpha_route: f64,
    pub disk: f64,
    pub cd: f64,
    pub diag: f64,
    pub normalization: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    route: ROUTE_TOL,
    limit: LIMIT_TOL,
    g_bound: G_BOUND_TOL,
    alpha_route: ALPHA_ROUTE_TOL,
    disk: DISK_TOL,
    cd: CD_TOL,
    diag: DIAG_TOL,
    normalization: NORMALIZATION_TOL,
};

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = match &self.convergence {
            Some(c) => c.to_csv(),
            None => format!("{CSV_SCHEMA}\n"),
        };
        for c in &self.checks {
            let _ = writeln!(out, "# {}", c.line());
        }
        out
    }
}

/// Runs every invariant suite on the given moments. With a symbol, the
/// limit, `G_n` bound, α-route and disk-integral suites run too.
pub fn run_checks(symbol: Option<&LaurentSymbol>, m: &MomentSequence, n_max: usize, cfg: &QuadratureConfig) -> VerifyReport {
    let mut checks = Vec::new();
    let mut convergence = None;
    let n_max = n_max.min(m.order().saturating_sub(1));
    let report = |checks: Vec<CheckOutcome>, convergence| VerifyReport {
        schema: 1,
        symbol: symbol.map(|s| s.to_text()),
        n_max,
        moment_order: m.order(),
        quadrature_points: m.quadrature_points(),
        tolerances: TOLERANCES,
        convergence,
        checks,
    };

    let states = match run_sequence(m, m.order()) {
        Ok(states) => states,
        Err(e) => {
            checks.push(CheckOutcome::new("positivity", false, e.to_string()));
            return report(checks, None);
        }
    };
    let cholesky = (0..=n_max).try_for_each(|n| log_det_direct(&ToeplitzMatrix::assemble(m, n)?).map(|_| ()));
    checks.push(match cholesky {
        Ok(()) => CheckOutcome::new(
            "positivity",
            true,
            format!("c_0 = {}, max |α_n| = {:.3e}", fmt_f64(m.c0()), max_alpha(&states)),
        ),
        Err(e) => {
            checks.push(CheckOutcome::new("positivity", false, e.to_string()));
            return report(checks, None);
        }
    });

    let gap = (0..=n_max)
        .map(|n| {
            let d = log_det_direct(&ToeplitzMatrix::assemble(m, n).expect("order checked")).expect("checked above");
            (d - log_det_product(&states[n])).abs() / d.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    checks.push(CheckOutcome::new(
        "route-agreement",
        gap <= ROUTE_TOL,
        format!("max relative gap {gap:.3e} for n ≤ {n_max}"),
    ));

    checks.push(monotonicity(&states, n_max));
    checks.push(cd_identities(m, n_max.min(20)));

    if let Some(s) = symbol {
        match strong_szego_report_from("input", s, m, n_max) {
            Ok(rep) => {
                let last = rep.rows.last().expect("non-empty");
                checks.push(CheckOutcome::new(
                    "strong-szego-limit",
                    last.abs_err <= LIMIT_TOL,
                    format!(
                        "target {}, |error| {:.3e} at n = {}",
                        fmt_f64(rep.target),
                        last.abs_err,
                        last.n
                    ),
                ));
                checks.push(CheckOutcome::new(
                    "g-bound",
                    rep.g_nondecreasing(1e-12) && rep.g_bounded(G_BOUND_TOL),
                    format!("G_{} = {}, bound {}", last.n, fmt_f64(last.g_n), fmt_f64(rep.exp_target)),
                ));
                convergence = Some(rep);
            }
            Err(e) => checks.push(CheckOutcome::new("strong-szego-limit", false, e.to_string())),
        }
        let last = states.last().expect("non-empty");
        let defect = szego_defect(last, s);
        checks.push(CheckOutcome::new(
            "szego-theorem",
            defect.abs() <= LIMIT_TOL,
            format!("log F − L̂_0 = {defect:.3e}"),
        ));
        checks.push(alpha_routes(s, &states, n_max.min(20), cfg));
        checks.push(disk_identity(s));
    }
    report(checks, convergence)
}

fn max_alpha(states: &[crate::opuc::RecursionState]) -> f64 {
    states
        .last()
        .map(|s| s.alphas().iter().map(|a| a.norm()).fold(0.0, f64::max))
        .unwrap_or(0.0)
}

fn monotonicity(states: &[crate::opuc::RecursionState], n_max: usize) -> CheckOutcome {
    let last = states.last().expect("non-empty");
    let norms_ok = states.windows(2).all(|w| w[1].norm_sq() <= w[0].norm_sq());
    let ledger = DeterminantLedger::from_state(last, n_max);
    let (ratio_ok, g_ok) = match &ledger {
        Ok(l) => (l.ratios_nonincreasing(1e-14), l.g_nondecreasing(1e-12)),
        Err(_) => (false, false),
    };
    let alpha_ok = last.alphas().iter().all(|a| a.norm() < 1.0);
    let mut max_zero: f64 = 0.0;
    let mut zeros_ok = true;
    for s in &states[1..=n_max.min(states.len() - 1)] {
        match zeros_in_disk(s.phi()) {
            Ok(z) => {
                max_zero = max_zero.max(z.max_modulus);
                zeros_ok &= z.ok;
            }
            Err(_) => zeros_ok = false,
        }
    }
    CheckOutcome::new(
        "monotonicity",
        norms_ok && ratio_ok && g_ok && alpha_ok && zeros_ok,
        format!(
            "norms {}, ratios {}, G_n {}, |α| < 1 {}, max zero modulus {:.6}",
            ok(norms_ok),
            ok(ratio_ok),
            ok(g_ok),
            ok(alpha_ok),
            max_zero
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "violated"
    }
}

/// Per-degree diagnostics of the Christoffel–Darboux identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdRow {
    pub n: usize,
    /// Largest relative spread between the sum and both closed forms over
    /// [`CD_PAIRS`] seeded pairs in `|z|, |ζ| < 0.98`.
    pub closed_form_spread: f64,
    /// Largest deviation of the diagonal boundary formula from the sum on a
    /// 128-point grid, relative to `max(1, K_n)`.
    pub diagonal_dev: f64,
    /// `∫ ∂_r |φ_{n+1}^*|² dμ`.
    pub normalization: f64,
}

pub const CD_PAIRS: usize = 100;
pub const CD_SEED: u64 = 0x5eed;

pub fn cd_rows(m: &MomentSequence, n_max: usize) -> Result<Vec<CdRow>> {
    let fam = OrthonormalFamily::from_moments(m, n_max + 1)?;
    let grid = CircleGrid::new(128);
    let mut rng = ChaCha8Rng::seed_from_u64(CD_SEED);
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut spread: f64 = 0.0;
        for _ in 0..CD_PAIRS {
            let z = random_disk_point(&mut rng);
            let zeta = random_disk_point(&mut rng);
            spread = spread.max(KernelEval::evaluate(&fam, n, z, zeta)?.max_rel_spread());
        }
        let mut diag: f64 = 0.0;
        for j in 0..grid.points() {
            let u = grid.unit(j);
            let sum = kernel_sum(&fam, n, u, u)?.re;
            let closed = kernel_diag_boundary(&fam, n, grid.angle(j))?;
            diag = diag.max((sum - closed).abs() / sum.abs().max(1.0));
        }
        rows.push(CdRow {
            n,
            closed_form_spread: spread,
            diagonal_dev: diag,
            normalization: normalization_check(&fam, m, n)?,
        });
    }
    Ok(rows)
}

fn random_disk_point(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random::<f64>().sqrt() * 0.98, rng.random::<f64>() * std::f64::consts::TAU)
}

/// The closed forms, the diagonal identity, and the vanishing of
/// `∫ ∂_r |φ_{n+1}^*|² dμ`, for `n ≤ n_max`.
pub fn cd_identities(m: &MomentSequence, n_max: usize) -> CheckOutcome {
    let rows = match cd_rows(m, n_max) {
        Ok(rows) => rows,
        Err(e) => return CheckOutcome::new("cd-identities", false, e.to_string()),
    };
    let spread = rows.iter().map(|r| r.closed_form_spread).fold(0.0, f64::max);
    let diag = rows.iter().map(|r| r.diagonal_dev).fold(0.0, f64::max);
    let norm = rows.iter().map(|r| r.normalization.abs()).fold(0.0, f64::max);
    CheckOutcome::new(
        "cd-identities",
        spread <= CD_TOL && diag <= DIAG_TOL && norm <= NORMALIZATION_TOL,
        format!("closed-form spread {spread:.3e}, diagonal {diag:.3e}, max |∫∂_r|φ*|² dμ| {norm:.3e}"),
    )
}

fn alpha_routes(s: &LaurentSymbol, states: &[crate::opuc::RecursionState], n_max: usize, cfg: &QuadratureConfig) -> CheckOutcome {
    let d = build_szego(s);
    let levinson = states.last().expect("non-empty").alphas();
    let mut worst: f64 = 0.0;
    for n in 0..=n_max.min(levinson.len().saturating_sub(1)) {
        if levinson[n].norm() <= ALPHA_ROUTE_FLOOR {
            break;
        }
        match alpha_from_d(&states[n + 1], &d, s, cfg) {
            Ok(a) => worst = worst.max((a - levinson[n]).norm()),
            Err(e) => return CheckOutcome::new("alpha-routes", false, e.to_string()),
        }
    }
    CheckOutcome::new(
        "alpha-routes",
        worst <= ALPHA_ROUTE_TOL,
        format!("max |α_n(Levinson) − α_n(D)| = {worst:.3e}"),
    )
}

fn disk_identity(s: &LaurentSymbol) -> CheckOutcome {
    let d = build_szego(s);
    let worst = [0.3, 0.6, 0.9]
        .iter()
        .map(|&r| {
            let t = d.disk_target(r);
            (disk_integral_check(&d, r) - t).abs() / t.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    let worst = if d.disk_target(0.9) == 0.0 { disk_integral_check(&d, 0.9).abs() } else { worst };
    CheckOutcome::new(
        "disk-integral",
        worst <= DISK_TOL,
        format!("max relative deviation {worst:.3e} at r ∈ {{0.3, 0.6, 0.9}}"),
    )
}
