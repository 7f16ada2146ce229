//! Toeplitz matrices, their log-determinants, and the `F`/`G` functionals.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opuc::{run_to, RecursionState};
use crate::report::{fmt_f64, CSV_SCHEMA};
use crate::symbol::MomentSequence;

/// Linear-scale determinants are only materialized below this log size.
pub const MAX_LINEAR_LOG: f64 = 700.0;

/// `T_{n+1}` with entries `T_{ij} = c_{j-i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix {
    moments: Vec<Complex64>,
}

impl ToeplitzMatrix {
    /// The `(n+1)×(n+1)` section built from `c_{-n}..c_n`.
    pub fn assemble(m: &MomentSequence, n: usize) -> Result<Self> {
        m.require_order(n)?;
        Ok(ToeplitzMatrix {
            moments: m.nonnegative()[..=n].to_vec(),
        })
    }

    /// Matrix dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.moments.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if j >= i {
            self.moments[j - i]
        } else {
            self.moments[i - j].conj()
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// `log D_n` from a Cholesky factorization `T = L L^*`; `D_n` itself is
    /// never formed.
    pub fn log_det(&self) -> Result<f64> {
        let d = self.dim();
        let mut l = vec![Complex64::new(0.0, 0.0); d * d];
        let mut log_det = 0.0;
        for j in 0..d {
            let mut pivot = self.entry(j, j).re;
            for k in 0..j {
                pivot -= l[j * d + k].norm_sqr();
            }
            if !(pivot > 0.0) {
                return Err(Error::NotPositiveDefinite { row: j, pivot });
            }
            let diag = pivot.sqrt();
            l[j * d + j] = Complex64::new(diag, 0.0);
            log_det += 2.0 * diag.ln();
            for i in j + 1..d {
                let mut s = self.entry(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / diag;
            }
        }
        Ok(log_det)
    }
}

/// `log D_n` via Cholesky of `T_{n+1}`.
pub fn log_det_direct(t: &ToeplitzMatrix) -> Result<f64> {
    t.log_det()
}

/// `log D_n = Σ_{j≤n} log ‖Φ_j‖² = (n+1) log c_0 + Σ_{j<n} (n−j) log(1−|α_j|²)`
/// for a state of degree `n`.
pub fn log_det_product(state: &RecursionState) -> f64 {
    let n = state.degree();
    let alphas = state.alphas();
    (n + 1) as f64 * state.c0().ln()
        + alphas
            .iter()
            .enumerate()
            .map(|(j, a)| (n - j) as f64 * (-a.norm_sqr()).ln_1p())
            .sum::<f64>()
}

/// `D_n` in linear scale, if representable.
pub fn linear(log_dn: f64) -> Option<f64> {
    (log_dn.abs() < MAX_LINEAR_LOG).then(|| log_dn.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerRow {
    pub n: usize,
    /// `log D_n` of the moments as given.
    pub log_dn: f64,
    /// `D_{n+1}/D_n = c_0 Π_{j≤n} (1 − |α_j|²)`.
    pub ratio: f64,
    /// `G_n = D_n/F^{n+1}` for the normalized measure.
    pub g_n: f64,
    /// `c_0 Π_{j<n} (1 − |α_j|²) = ‖Φ_n‖²`, the running estimate of `F`.
    pub f_running: f64,
}

/// Per-`n` determinant functionals, computed in log space from one run of the
/// recursion. The measure is normalized up front; `log_c0` is kept aside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminantLedger {
    pub log_c0: f64,
    /// Number of Verblunsky coefficients behind `G_n` and `F`.
    pub alphas_used: usize,
    /// `log F = log c_0 + Σ_j log(1 − |α_j|²)` over all available `α_j`.
    pub log_f: f64,
    pub rows: Vec<LedgerRow>,
}

impl DeterminantLedger {
    /// Rows `n = 0..=n_max`, using every α in `state` for the `F` and `G`
    /// products. Needs `state.degree() > n_max`.
    pub fn from_state(state: &RecursionState, n_max: usize) -> Result<Self> {
        let alphas = state.alphas();
        if alphas.len() <= n_max {
            return Err(Error::OrderTooSmall {
                have: alphas.len(),
                need: n_max + 1,
            });
        }
        let logs: Vec<f64> = alphas.iter().map(|a| (-a.norm_sqr()).ln_1p()).collect();
        let log_c0 = state.c0().ln();
        let mut rows = Vec::with_capacity(n_max + 1);
        let mut log_norm = log_c0; // log ‖Φ_n‖²
        let mut log_dn = log_c0;
        for n in 0..=n_max {
            if n > 0 {
                log_norm += logs[n - 1];
                log_dn += log_norm;
            }
            let log_g: f64 = -logs
                .iter()
                .enumerate()
                .map(|(j, l)| (n.min(j) + 1) as f64 * l)
                .sum::<f64>();
            rows.push(LedgerRow {
                n,
                log_dn,
                ratio: (log_norm + logs[n]).exp(),
                g_n: log_g.exp(),
                f_running: log_norm.exp(),
            });
        }
        Ok(DeterminantLedger {
            log_c0,
            alphas_used: alphas.len(),
            log_f: log_c0 + logs.iter().sum::<f64>(),
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_SCHEMA}\n# log_c0={}\nn,log_Dn,ratio,G_n,F_running\n", fmt_f64(self.log_c0));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                fmt_f64(r.log_dn),
                fmt_f64(r.ratio),
                fmt_f64(r.g_n),
                fmt_f64(r.f_running)
            );
        }
        out
    }

    /// `D_{n+1}/D_n` is nonincreasing.
    pub fn ratios_nonincreasing(&self, tol: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].ratio <= w[0].ratio * (1.0 + tol))
    }

    /// `G_{n+1} ≥ G_n − tol`.
    pub fn g_nondecreasing(&self, tol: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].g_n >= w[0].g_n - tol)
    }
}

/// Ledger for `n = 0..=n_max`, running the recursion through every moment.
pub fn ledger(m: &MomentSequence, n_max: usize) -> Result<DeterminantLedger> {
    let state = run_to(m, m.order())?;
    DeterminantLedger::from_state(&state, n_max)
}
