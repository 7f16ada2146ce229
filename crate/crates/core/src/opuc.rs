//! The Szegő recursion: monic orthogonal polynomials `Φ_n`, their reversals
//! `Φ_n^*`, norms and Verblunsky coefficients `α_n`.
//!
//! All inner products go through [`inner_product`], the bilinear form
//! `⟨z^a, z^b⟩_μ = c_{a-b}` extended by (conjugate-)linearity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{reverse_conj, MonicPoly};
use crate::symbol::MomentSequence;

/// Allowed disagreement between `α_n` and `-conj(Φ_{n+1}(0))`.
pub const ALPHA_CONSISTENCY_TOL: f64 = 1e-10;
/// The constant term of the inverse-recursion bracket must vanish to this.
pub const INVERSE_CONSTANT_TOL: f64 = 1e-11;

/// `⟨p, q⟩_μ = ∫ conj(p) q dμ = Σ_{a,b} conj(p_a) q_b c_{a-b}`.
///
/// # Panics
/// If either degree exceeds the moment order.
pub fn inner_product(m: &MomentSequence, p: &[Complex64], q: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, pa) in p.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (b, qb) in q.iter().enumerate() {
            row += qb * m.get(a as i64 - b as i64);
        }
        acc += pa.conj() * row;
    }
    acc
}

fn one_minus_sq(alpha: Complex64) -> f64 {
    let r = alpha.norm();
    (1.0 - r) * (1.0 + r)
}

/// `(Φ_n, Φ_n^*, ‖Φ_n‖², α_0..α_{n-1})` for one degree `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionState {
    n: usize,
    phi: MonicPoly,
    phi_star: Vec<Complex64>,
    norm_sq: f64,
    alphas: Vec<Complex64>,
    c0: f64,
}

impl RecursionState {
    /// `Φ_0 = Φ_0^* = 1`, `‖Φ_0‖² = c_0`.
    pub fn init(m: &MomentSequence) -> Result<Self> {
        let c0 = m.c0();
        if !(c0 > 0.0) {
            return Err(Error::NonPositiveMass { c0 });
        }
        Ok(RecursionState {
            n: 0,
            phi: MonicPoly::one(),
            phi_star: vec![Complex64::new(1.0, 0.0)],
            norm_sq: c0,
            alphas: Vec::new(),
            c0,
        })
    }

    /// One step of the recursion, `Φ_{n+1} = zΦ_n − conj(α_n) Φ_n^*`.
    ///
    /// `conj(α_n) = ⟨Φ_n^*, zΦ_n⟩ / ‖Φ_n‖²`, which is the orthogonality of
    /// `Φ_{n+1}` to `Φ_n^*`.
    pub fn step(&self, m: &MomentSequence) -> Result<Self> {
        let n = self.n;
        m.require_order(n + 1)?;
        let zero = Complex64::new(0.0, 0.0);

        let mut z_phi = Vec::with_capacity(n + 2);
        z_phi.push(zero);
        z_phi.extend_from_slice(self.phi.coeffs());
        let mut star = self.phi_star.clone();
        star.push(zero);

        let alpha_bar = inner_product(m, &star, &z_phi) / self.norm_sq;
        let alpha = alpha_bar.conj();
        let modulus = alpha.norm();
        if !(modulus < 1.0) {
            return Err(Error::IndefiniteMoments { index: n, modulus });
        }

        let mut phi: Vec<Complex64> = z_phi.iter().zip(&star).map(|(&zp, &s)| zp - alpha_bar * s).collect();
        phi[n + 1] = Complex64::new(1.0, 0.0);
        let mut phi_star: Vec<Complex64> = star.iter().zip(&z_phi).map(|(&s, &zp)| s - alpha * zp).collect();
        phi_star[0] = Complex64::new(1.0, 0.0);

        let deviation = (alpha + phi[0].conj()).norm();
        if deviation > ALPHA_CONSISTENCY_TOL {
            return Err(Error::InconsistentAlpha { index: n, deviation });
        }

        let norm_sq = self.norm_sq * one_minus_sq(alpha);
        if !(norm_sq > 0.0) {
            return Err(Error::IndefiniteMoments { index: n, modulus });
        }
        let mut alphas = self.alphas.clone();
        alphas.push(alpha);
        Ok(RecursionState {
            n: n + 1,
            phi: MonicPoly::new(phi)?,
            phi_star,
            norm_sq,
            alphas,
            c0: self.c0,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `Φ_n`.
    pub fn phi(&self) -> &MonicPoly {
        &self.phi
    }

    /// Coefficients of `Φ_n^*`.
    pub fn phi_star(&self) -> &[Complex64] {
        &self.phi_star
    }

    /// `‖Φ_n‖²`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `α_0..α_{n-1}`.
    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `κ_n = ‖Φ_n‖^{-1}`, the leading coefficient of `φ_n`.
    pub fn kappa(&self) -> f64 {
        self.norm_sq.sqrt().recip()
    }

    /// `ρ_j = (1 − |α_j|²)^{1/2}`.
    pub fn rho(&self, j: usize) -> f64 {
        one_minus_sq(self.alphas[j]).sqrt()
    }

    /// `c_0 Π_{j<n} (1 − |α_j|²)`, the norm predicted from the α's alone.
    pub fn norm_sq_from_alphas(&self) -> f64 {
        self.c0 * self.alphas.iter().map(|&a| one_minus_sq(a)).product::<f64>()
    }

    /// Coefficients of the orthonormal polynomial `φ_n = Φ_n / ‖Φ_n‖`.
    pub fn orthonormal(&self) -> Vec<Complex64> {
        let k = self.kappa();
        self.phi.coeffs().iter().map(|c| c * k).collect()
    }

    /// Coefficients of `φ_n^*`.
    pub fn orthonormal_star(&self) -> Vec<Complex64> {
        let k = self.kappa();
        self.phi_star.iter().map(|c| c * k).collect()
    }
}

/// Degree-zero state for the moments `m`.
pub fn init_state(m: &MomentSequence) -> Result<RecursionState> {
    RecursionState::init(m)
}

/// Runs the recursion to degree `n`.
pub fn run_to(m: &MomentSequence, n: usize) -> Result<RecursionState> {
    m.require_order(n)?;
    let mut state = RecursionState::init(m)?;
    for _ in 0..n {
        state = state.step(m)?;
    }
    Ok(state)
}

/// States of degrees `0..=n`.
pub fn run_sequence(m: &MomentSequence, n: usize) -> Result<Vec<RecursionState>> {
    m.require_order(n)?;
    let mut states = Vec::with_capacity(n + 1);
    states.push(RecursionState::init(m)?);
    for _ in 0..n {
        let next = states.last().expect("non-empty").step(m)?;
        states.push(next);
    }
    Ok(states)
}

/// Inverse recursion:
/// `Φ_n = ρ_n^{-2} [Φ_{n+1} + conj(α_n) Φ_{n+1}^*] / z`,
/// `Φ_n^* = ρ_n^{-2} [Φ_{n+1}^* + α_n Φ_{n+1}]`.
///
/// Fails if the bracket has a constant term, i.e. `α_n` does not belong to
/// `Φ_{n+1}`.
pub fn inverse_step(
    phi_next: &MonicPoly,
    phi_next_star: &[Complex64],
    alpha: Complex64,
) -> Result<(MonicPoly, Vec<Complex64>)> {
    let modulus = alpha.norm();
    if !(modulus < 1.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            detail: format!("|alpha| = {modulus} must be < 1"),
        });
    }
    let deg = phi_next.degree();
    if deg == 0 || phi_next_star.len() != deg + 1 {
        return Err(Error::OutOfRange {
            what: "degree",
            detail: format!("need degree >= 1 with matching reversal, got {deg}"),
        });
    }
    let scale = one_minus_sq(alpha).recip();
    let p = phi_next.coeffs();
    let bracket: Vec<Complex64> = p.iter().zip(phi_next_star).map(|(&a, &s)| a + alpha.conj() * s).collect();
    let residual = bracket[0].norm();
    if residual > INVERSE_CONSTANT_TOL {
        return Err(Error::InconsistentInverse { residual });
    }
    let mut phi: Vec<Complex64> = bracket[1..].iter().map(|c| c * scale).collect();
    phi[deg - 1] = Complex64::new(1.0, 0.0);
    let mut star: Vec<Complex64> = phi_next_star
        .iter()
        .zip(p)
        .map(|(&s, &a)| (s + alpha * a) * scale)
        .collect();
    let top = star.pop().expect("degree >= 1").norm();
    if top > INVERSE_CONSTANT_TOL {
        return Err(Error::InconsistentInverse { residual: top });
    }
    Ok((MonicPoly::new(phi)?, star))
}

/// Outcome of the zero-location check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCheck {
    pub max_modulus: f64,
    /// All zeros strictly inside the unit disk.
    pub ok: bool,
}

/// Largest root modulus of `p`; `ok` iff every root lies in the open disk.
pub fn zeros_in_disk(p: &MonicPoly) -> Result<ZeroCheck> {
    if p.degree() == 0 {
        return Err(Error::OutOfRange {
            what: "degree",
            detail: "zero location needs degree >= 1".into(),
        });
    }
    let max_modulus = p.roots().iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    Ok(ZeroCheck {
        max_modulus,
        ok: max_modulus < 1.0,
    })
}

/// Rebuilds `Φ_0..Φ_n` from Verblunsky coefficients alone (no moments).
pub fn states_from_alphas(alphas: &[Complex64], c0: f64) -> Result<Vec<RecursionState>> {
    if !(c0 > 0.0) {
        return Err(Error::NonPositiveMass { c0 });
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut states = vec![RecursionState {
        n: 0,
        phi: MonicPoly::one(),
        phi_star: vec![Complex64::new(1.0, 0.0)],
        norm_sq: c0,
        alphas: Vec::new(),
        c0,
    }];
    for (n, &alpha) in alphas.iter().enumerate() {
        let modulus = alpha.norm();
        if !(modulus < 1.0) {
            return Err(Error::IndefiniteMoments { index: n, modulus });
        }
        let prev = states.last().expect("non-empty");
        let mut z_phi = vec![zero];
        z_phi.extend_from_slice(prev.phi.coeffs());
        let mut star = prev.phi_star.clone();
        star.push(zero);
        let mut phi: Vec<Complex64> = z_phi.iter().zip(&star).map(|(&zp, &s)| zp - alpha.conj() * s).collect();
        phi[n + 1] = Complex64::new(1.0, 0.0);
        let phi_star = reverse_conj(&phi);
        let mut hist = prev.alphas.clone();
        hist.push(alpha);
        states.push(RecursionState {
            n: n + 1,
            phi: MonicPoly::new(phi)?,
            phi_star,
            norm_sq: prev.norm_sq * one_minus_sq(alpha),
            alphas: hist,
            c0,
        });
    }
    Ok(states)
}
