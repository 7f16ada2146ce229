//! Complex polynomials stored as ascending coefficient lists.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Σ a_k z^k` by Horner's rule.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// `(p(z), p'(z))`.
pub fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    coeffs.iter().rev().fold((zero, zero), |(p, dp), &a| (p * z + a, dp * z + p))
}

/// `z^n conj(p(1/z̄))` for a polynomial of formal degree `n = len - 1`:
/// reverse and conjugate the coefficients.
pub fn reverse_conj(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().rev().map(|c| c.conj()).collect()
}

/// `∂_r |p(re^{iθ})|²` at `r = 1`, i.e. `2 Re[conj(p(e^{iθ})) e^{iθ} p'(e^{iθ})]`.
pub fn radial_derivative_sq(coeffs: &[Complex64], theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let z = Complex64::new(c, s);
    let (p, dp) = horner_with_derivative(coeffs, z);
    2.0 * (p.conj() * z * dp).re
}

/// A monic polynomial `z^n + lower order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonicPoly {
    coeffs: Vec<Complex64>,
}

impl MonicPoly {
    /// Takes ascending coefficients; the last must be exactly 1.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.last() {
            Some(&c) if c == Complex64::new(1.0, 0.0) => Ok(MonicPoly { coeffs }),
            _ => Err(Error::OutOfRange {
                what: "leading coefficient",
                detail: "monic polynomial needs leading coefficient exactly 1".into(),
            }),
        }
    }

    pub fn one() -> Self {
        MonicPoly::monomial(0)
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        MonicPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.coeffs, z)
    }

    /// Coefficients of `p^*(z) = z^n conj(p(1/z̄))`.
    pub fn reversed(&self) -> Vec<Complex64> {
        reverse_conj(&self.coeffs)
    }

    /// All roots, via eigenvalues of the companion matrix.
    ///
    /// Roots at the origin are split off exactly before the eigenproblem.
    pub fn roots(&self) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let trivial = self.coeffs.iter().take_while(|&&c| c == zero).count();
        let reduced = &self.coeffs[trivial..];
        let mut roots = vec![zero; trivial];
        let n = reduced.len() - 1;
        if n == 0 {
            return roots;
        }
        // Companion matrix: ones on the subdiagonal, -a_k in the last column.
        let companion = DMatrix::from_fn(n, n, |i, j| {
            if j == n - 1 {
                -reduced[i]
            } else if i == j + 1 {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        });
        let schur = Schur::new(companion);
        let (_, t) = schur.unpack();
        roots.extend((0..n).map(|i| t[(i, i)]));
        roots
    }
}
