//! Christoffel–Darboux kernels `K_n(z, ζ) = Σ_{j≤n} conj(φ_j(ζ)) φ_j(z)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opuc::{inner_product, run_sequence, RecursionState};
use crate::poly::{horner, radial_derivative_sq};
use crate::symbol::MomentSequence;

/// Below this `|1 − ζ̄z|` the closed forms are refused.
pub const SINGULAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CdVariant {
    /// Closed form through `φ_{n+1}` and `φ_{n+1}^*`.
    NextDegree,
    /// Closed form through `φ_n` and `φ_n^*`, with the extra `z ζ̄` factor.
    SameDegree,
}

/// Coefficients of `φ_j` and `φ_j^*` for `j = 0..=degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalFamily {
    phi: Vec<Vec<Complex64>>,
    star: Vec<Vec<Complex64>>,
}

impl OrthonormalFamily {
    pub fn from_states(states: &[RecursionState]) -> Self {
        OrthonormalFamily {
            phi: states.iter().map(|s| s.orthonormal()).collect(),
            star: states.iter().map(|s| s.orthonormal_star()).collect(),
        }
    }

    /// `φ_0..φ_degree` for the moments `m`.
    pub fn from_moments(m: &MomentSequence, degree: usize) -> Result<Self> {
        Ok(Self::from_states(&run_sequence(m, degree)?))
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi(&self, j: usize) -> &[Complex64] {
        &self.phi[j]
    }

    pub fn phi_star(&self, j: usize) -> &[Complex64] {
        &self.star[j]
    }

    fn require(&self, degree: usize) -> Result<()> {
        if degree > self.degree() {
            return Err(Error::OrderTooSmall {
                have: self.degree(),
                need: degree,
            });
        }
        Ok(())
    }
}

/// The defining sum.
pub fn kernel_sum(fam: &OrthonormalFamily, n: usize, z: Complex64, zeta: Complex64) -> Result<Complex64> {
    fam.require(n)?;
    Ok((0..=n)
        .map(|j| horner(fam.phi(j), zeta).conj() * horner(fam.phi(j), z))
        .sum())
}

/// `conj(φ_k^*(ζ)) φ_k^*(z) − conj(φ_k(ζ)) φ_k(z)`.
pub fn bilinear_next(fam: &OrthonormalFamily, k: usize, z: Complex64, zeta: Complex64) -> Complex64 {
    let (p, s) = (fam.phi(k), fam.phi_star(k));
    horner(s, zeta).conj() * horner(s, z) - horner(p, zeta).conj() * horner(p, z)
}

/// `conj(φ_n^*(ζ)) φ_n^*(z) − z ζ̄ conj(φ_n(ζ)) φ_n(z)`.
pub fn bilinear_same(fam: &OrthonormalFamily, n: usize, z: Complex64, zeta: Complex64) -> Complex64 {
    let (p, s) = (fam.phi(n), fam.phi_star(n));
    horner(s, zeta).conj() * horner(s, z) - z * zeta.conj() * horner(p, zeta).conj() * horner(p, z)
}

/// Closed-form kernel. Fails with [`Error::NearSingular`] when
/// `|1 − ζ̄z| ≤ 1e-6`; use [`kernel_sum`] there.
pub fn kernel_cd(
    fam: &OrthonormalFamily,
    n: usize,
    z: Complex64,
    zeta: Complex64,
    variant: CdVariant,
) -> Result<Complex64> {
    let denom = 1.0 - zeta.conj() * z;
    if denom.norm() <= SINGULAR_TOL {
        return Err(Error::NearSingular(denom.norm()));
    }
    let num = match variant {
        CdVariant::NextDegree => {
            fam.require(n + 1)?;
            bilinear_next(fam, n + 1, z, zeta)
        }
        CdVariant::SameDegree => {
            fam.require(n)?;
            bilinear_same(fam, n, z, zeta)
        }
    };
    Ok(num / denom)
}

/// `−∂_r |φ_{n+1}^*(re^{iθ})|²|_{r=1} + (n+1) |φ_{n+1}^*(e^{iθ})|²`.
pub fn kernel_diag_boundary(fam: &OrthonormalFamily, n: usize, theta: f64) -> Result<f64> {
    fam.require(n + 1)?;
    let star = fam.phi_star(n + 1);
    let z = Complex64::from_polar(1.0, theta);
    Ok(-radial_derivative_sq(star, theta) + (n + 1) as f64 * horner(star, z).norm_sqr())
}

/// `∫ ∂_r |φ_{n+1}^*(re^{iθ})|²|_{r=1} dμ(θ)`.
///
/// On the circle `∂_r |p|² = 2 Re[conj(p) z p']`, so the integral is the
/// exact moment form `2 Re ⟨p, z p'⟩_μ`. The value is 0 for every
/// measure: integrating the diagonal identity against `μ` leaves
/// `n + 1 = −∫∂_r|φ_{n+1}^*|² dμ + (n + 1)`.
pub fn normalization_check(fam: &OrthonormalFamily, m: &MomentSequence, n: usize) -> Result<f64> {
    fam.require(n + 1)?;
    m.require_order(n + 1)?;
    let p = fam.phi_star(n + 1);
    let zdp: Vec<Complex64> = p.iter().enumerate().map(|(k, c)| c * k as f64).collect();
    Ok(2.0 * inner_product(m, p, &zdp).re)
}

/// The three kernel evaluations at one point pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub n: usize,
    pub z: Complex64,
    pub zeta: Complex64,
    pub value_sum: Complex64,
    pub value_next: Complex64,
    pub value_same: Complex64,
}

impl KernelEval {
    pub fn evaluate(fam: &OrthonormalFamily, n: usize, z: Complex64, zeta: Complex64) -> Result<Self> {
        Ok(KernelEval {
            n,
            z,
            zeta,
            value_sum: kernel_sum(fam, n, z, zeta)?,
            value_next: kernel_cd(fam, n, z, zeta, CdVariant::NextDegree)?,
            value_same: kernel_cd(fam, n, z, zeta, CdVariant::SameDegree)?,
        })
    }

    /// Largest pairwise difference relative to `|K_n|`.
    pub fn max_rel_spread(&self) -> f64 {
        let v = [self.value_sum, self.value_next, self.value_same];
        let scale = self.value_sum.norm().max(f64::MIN_POSITIVE);
        let d = (v[0] - v[1]).norm().max((v[0] - v[2]).norm()).max((v[1] - v[2]).norm());
        d / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::CircleGrid;
    use crate::symbol::LaurentSymbol;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn family(s: &LaurentSymbol, degree: usize) -> (OrthonormalFamily, MomentSequence) {
        let m = s.moments(degree).unwrap();
        (OrthonormalFamily::from_moments(&m, degree).unwrap(), m)
    }

    fn geometric(order: usize) -> MomentSequence {
        MomentSequence::from_nonnegative((0..=order).map(|k| c(0.5f64.powi(k as i32), 0.0)).collect()).unwrap()
    }

    fn random_disk_point(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::from_polar(rng.random::<f64>().sqrt() * 0.98, rng.random::<f64>() * TAU)
    }

    #[test]
    fn lebesgue_examples() {
        let (fam, _) = family(&LaurentSymbol::zero(), 6);
        let z = c(0.3, -0.4);
        let zeta = c(-0.5, 0.2);
        let w = zeta.conj() * z;
        let geo: Complex64 = (0..=5).map(|j| w.powi(j)).sum();
        assert!((kernel_sum(&fam, 5, z, zeta).unwrap() - geo).norm() < 1e-15);
        let closed = (1.0 - w.powi(6)) / (1.0 - w);
        assert!((kernel_cd(&fam, 5, z, zeta, CdVariant::SameDegree).unwrap() - closed).norm() < 1e-15);
        let u = Complex64::from_polar(1.0, 0.7);
        assert!((kernel_sum(&fam, 5, u, u).unwrap() - 6.0).norm() < 1e-14);
        for j in 0..8 {
            assert!((kernel_diag_boundary(&fam, 5, j as f64).unwrap() - 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn origin_and_singularity() {
        let (fam, _) = family(&LaurentSymbol::from_real(&[0.0, 0.5]), 5);
        let zero = c(0.0, 0.0);
        let expect: f64 = (0..=4).map(|j| fam.phi(j)[0].norm_sqr()).sum();
        assert!((kernel_sum(&fam, 4, zero, zero).unwrap().re - expect).abs() < 1e-15);
        let u = Complex64::from_polar(1.0, 1.1);
        assert!(matches!(
            kernel_cd(&fam, 3, u, u, CdVariant::NextDegree),
            Err(Error::NearSingular(_))
        ));
    }

    #[test]
    fn closed_forms_match_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in [
            LaurentSymbol::zero(),
            LaurentSymbol::from_real(&[0.0, 0.5]),
            LaurentSymbol::from_real(&[0.3, 0.2, 0.1]),
            LaurentSymbol::from_nonnegative(vec![c(0.0, 0.0), c(0.2, 0.3), c(-0.1, 0.05)]).unwrap(),
        ] {
            let (fam, _) = family(&s, 21);
            for _ in 0..50 {
                let (z, zeta) = (random_disk_point(&mut rng), random_disk_point(&mut rng));
                let n = rng.random_range(0..=20);
                let e = KernelEval::evaluate(&fam, n, z, zeta).unwrap();
                assert!(e.max_rel_spread() < 1e-11, "spread {}", e.max_rel_spread());
                assert!((bilinear_next(&fam, n + 1, z, zeta) - bilinear_same(&fam, n, z, zeta)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn hermitian_and_positive() {
        let (fam, _) = family(&LaurentSymbol::from_real(&[0.3, 0.2, 0.1]), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let (z, zeta) = (random_disk_point(&mut rng), random_disk_point(&mut rng));
            assert_eq!(kernel_sum(&fam, 10, z, zeta).unwrap(), kernel_sum(&fam, 10, zeta, z).unwrap().conj());
            assert!(kernel_sum(&fam, 10, z, z).unwrap().re >= 0.0);
        }
    }

    #[test]
    fn diagonal_boundary_identity() {
        let grid = CircleGrid::new(128);
        for s in [LaurentSymbol::from_real(&[0.0, 0.5]), LaurentSymbol::from_real(&[0.0, 0.2, 0.1])] {
            let (fam, _) = family(&s, 16);
            for n in [0, 4, 15] {
                for j in 0..128 {
                    let u = grid.unit(j);
                    let sum = kernel_sum(&fam, n, u, u).unwrap().re;
                    assert!((kernel_diag_boundary(&fam, n, grid.angle(j)).unwrap() - sum).abs() < 1e-10);
                }
            }
        }
        let fam = OrthonormalFamily::from_moments(&geometric(1), 1).unwrap();
        assert!((kernel_sum(&fam, 0, c(1.0, 0.0), c(1.0, 0.0)).unwrap().re - 1.0).abs() < 1e-15);
        assert!((kernel_diag_boundary(&fam, 0, 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reproducing_property() {
        let s = LaurentSymbol::from_real(&[0.3, 0.2, 0.1]);
        let (fam, _) = family(&s, 8);
        let grid = CircleGrid::new(256);
        let w: Vec<f64> = grid.angles().map(|t| s.weight(t)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p: Vec<Complex64> = (0..=8).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let z = c(0.4, 0.25);
        let integral = grid.mean(|j| kernel_sum(&fam, 8, z, grid.unit(j)).unwrap() * horner(&p, grid.unit(j)) * w[j]);
        assert!((integral - horner(&p, z)).norm() < 1e-9);
    }

    #[test]
    fn normalization_integral_vanishes() {
        let (fam, m) = family(&LaurentSymbol::zero(), 6);
        assert!(normalization_check(&fam, &m, 5).unwrap().abs() < 1e-15);
        let (fam, m) = family(&LaurentSymbol::from_real(&[0.0, 0.5]), 11);
        for n in 0..=10 {
            assert!(normalization_check(&fam, &m, n).unwrap().abs() < 1e-12);
        }
        // φ_1^* = (1 − z/2)/ρ_0 with ρ_0² = 3/4: ∂_r|φ_1^*|² = (1/2 − cos θ)/ρ_0²,
        // whose μ-average is (1/2 − Re c_1)/ρ_0² = 0.
        let m = geometric(4);
        let fam = OrthonormalFamily::from_moments(&m, 4).unwrap();
        assert!(normalization_check(&fam, &m, 0).unwrap().abs() < 1e-15);
        assert!(normalization_check(&fam, &m, 3).unwrap().abs() < 1e-14);
    }
}
