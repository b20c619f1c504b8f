//! Spectral coordinates: ζ(ξ) = ξ₂/(2ξ₁) − iπξ₁, its inverse, the area density, the primed shift
//! ζ′ = ζ − t₂/3 and the phase S₀(a; ζ′) with its derivatives.

use crate::{KpError, Result, C64};
use std::f64::consts::PI;

/// Default for the unquantified regime constant: |a| > 1 counts as asymptotic.
pub const REGIME_THRESHOLD_DEFAULT: f64 = 1.0;

pub fn zeta_from_xi(xi1: f64, xi2: f64) -> Result<C64> {
    if xi1 == 0.0 {
        return Err(KpError::SingularCoordinate("ξ₁ = 0"));
    }
    Ok(C64::new(xi2 / (2.0 * xi1), -PI * xi1))
}

/// Result of ζ ↦ ξ; `on_real_axis` flags ζ_I = 0, where the map collapses to ξ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiPoint {
    pub xi1: f64,
    pub xi2: f64,
    pub on_real_axis: bool,
}

pub fn xi_from_zeta(zeta: C64) -> XiPoint {
    XiPoint {
        xi1: -zeta.im / PI,
        xi2: -2.0 * zeta.re * zeta.im / PI,
        on_real_axis: zeta.im == 0.0,
    }
}

/// Density of dζ_R dζ_I with respect to dξ₁dξ₂: |∂(ζ_R, ζ_I)/∂(ξ₁, ξ₂)| = π/(2|ξ₁|).
pub fn area_weight(xi1: f64) -> Result<f64> {
    if xi1 == 0.0 {
        return Err(KpError::SingularCoordinate("ξ₁ = 0"));
    }
    Ok(PI / (2.0 * xi1.abs()))
}

/// S₀(a; ζ′) = −(1/π)(aζ′_I + ζ′_I³ − 3ζ′_Iζ′_R²).
pub fn phase_s0(a: f64, zp: C64) -> f64 {
    let (r, i) = (zp.re, zp.im);
    -(a * i + i * i * i - 3.0 * i * r * r) / PI
}

/// The same phase in ξ′ variables: aξ′₁ + π²ξ′₁³ − (3/4)ξ′₂²/ξ′₁.
pub fn phase_s0_xi(a: f64, xi1: f64, xi2: f64) -> Result<f64> {
    if xi1 == 0.0 {
        return Err(KpError::SingularCoordinate("ξ′₁ = 0"));
    }
    Ok(a * xi1 + PI * PI * xi1 * xi1 * xi1 - 0.75 * xi2 * xi2 / xi1)
}

/// (∂_{ζ′_R}S₀, ∂_{ζ′_I}S₀).
pub fn grad_s0(a: f64, zp: C64) -> (f64, f64) {
    let (r, i) = (zp.re, zp.im);
    (6.0 / PI * r * i, (-a + 3.0 * (r * r - i * i)) / PI)
}

/// Second derivatives (∂²_RR, ∂²_RI, ∂²_II) of S₀.
pub fn hessian_s0(zp: C64) -> (f64, f64, f64) {
    (6.0 / PI * zp.im, 6.0 / PI * zp.re, -6.0 / PI * zp.im)
}

/// ζ′ together with the shift t₂/3 that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub zeta_prime: C64,
    pub shift: f64,
}

impl PhasePoint {
    pub fn unshift(&self) -> C64 {
        self.zeta_prime + self.shift
    }
}

pub fn primed_shift(zeta: C64, t2: f64) -> PhasePoint {
    let shift = t2 / 3.0;
    PhasePoint { zeta_prime: zeta - shift, shift }
}

/// Spectral parameter off the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    pub lambda: C64,
    pub half_plane: i8,
}

impl SpectralParam {
    pub fn new(lambda: C64) -> Result<Self> {
        if lambda.im == 0.0 || !lambda.im.is_finite() || !lambda.re.is_finite() {
            return Err(KpError::RealAxisUndefined);
        }
        Ok(Self { lambda, half_plane: if lambda.im > 0.0 { 1 } else { -1 } })
    }

    /// λ = ζ(ξ) for a lattice point with ξ₁ ≠ 0.
    pub fn from_xi(xi1: f64, xi2: f64) -> Result<Self> {
        Self::new(zeta_from_xi(xi1, xi2)?)
    }

    /// ξ(λ) = (−λ_I/π, −2λ_Rλ_I/π); satisfies 2πiξ₁ = λ̄ − λ and 2πiξ₂ = λ̄² − λ².
    pub fn xi(&self) -> (f64, f64) {
        let p = xi_from_zeta(self.lambda);
        (p.xi1, p.xi2)
    }

    pub fn conj(&self) -> Self {
        Self { lambda: self.lambda.conj(), half_plane: -self.half_plane }
    }

    pub fn sign(&self) -> f64 {
        self.half_plane as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn zeta_examples() {
        assert!(close(zeta_from_xi(1.0, 0.0).unwrap(), C64::new(0.0, -PI), 0.0));
        assert!(close(zeta_from_xi(1.0, 2.0).unwrap(), C64::new(1.0, -PI), 0.0));
        assert!(close(zeta_from_xi(-1.0, 0.0).unwrap(), C64::new(0.0, PI), 1e-300));
        assert!(matches!(zeta_from_xi(0.0, 1.0), Err(KpError::SingularCoordinate(_))));
    }

    #[test]
    fn xi_examples() {
        let p = xi_from_zeta(C64::new(0.0, -PI));
        assert_eq!((p.xi1, p.xi2), (1.0, 0.0));
        let p = xi_from_zeta(C64::new(1.0, -PI));
        assert_eq!((p.xi1, p.xi2), (1.0, 2.0));
        let p = xi_from_zeta(C64::new(5.0, 0.0));
        assert!(p.on_real_axis && p.xi1 == 0.0 && p.xi2 == 0.0);
    }

    #[test]
    fn area_weight_examples() {
        assert!((area_weight(1.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((area_weight(-2.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((area_weight(1.0 / PI).unwrap() - PI * PI / 2.0).abs() < 1e-13);
        assert!(area_weight(0.0).is_err());
    }

    #[test]
    fn area_weight_matches_jacobian() {
        // central-difference Jacobian of (ξ₁, ξ₂) ↦ (ζ_R, ζ_I)
        for &(x1, x2) in &[(0.7, -0.3), (-1.3, 2.0), (0.05, 0.4)] {
            let h = 1e-6;
            let z = |a: f64, b: f64| zeta_from_xi(a, b).unwrap();
            let d1 = (z(x1 + h, x2) - z(x1 - h, x2)) / (2.0 * h);
            let d2 = (z(x1, x2 + h) - z(x1, x2 - h)) / (2.0 * h);
            let det = (d1.re * d2.im - d1.im * d2.re).abs();
            let w = area_weight(x1).unwrap();
            assert!((det - w).abs() < 1e-6 * w, "{det} vs {w}");
        }
    }

    #[test]
    fn phase_examples() {
        assert!((phase_s0(-3.0, C64::new(0.0, 1.0)) - 2.0 / PI).abs() < 1e-15);
        assert!((phase_s0(-3.0, C64::new(0.0, -1.0)) + 2.0 / PI).abs() < 1e-15);
        assert_eq!(phase_s0(0.7, C64::new(2.5, 0.0)), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let g = grad_s0(-3.0, C64::new(0.0, 1.0));
        assert!(g.0.abs() < 1e-15 && g.1.abs() < 1e-15);
        let g = grad_s0(3.0, C64::new(1.0, 0.0));
        assert!(g.0.abs() < 1e-15 && g.1.abs() < 1e-15);
        let g = grad_s0(-3.0, C64::new(1.0, 1.0));
        assert!((g.0 - 6.0 / PI).abs() < 1e-15 && (g.1 - 3.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn primed_shift_examples() {
        let p = primed_shift(C64::new(1.0, 1.0), 3.0);
        assert!(close(p.zeta_prime, C64::new(0.0, 1.0), 1e-15));
        let z = C64::new(0.3, -0.8);
        assert_eq!(primed_shift(z, 0.0).zeta_prime, z);
        assert!(close(primed_shift(z, 1.7).unshift(), z, 1e-15));
    }

    #[test]
    fn spectral_param_identities() {
        let p = SpectralParam::new(C64::new(0.4, -1.3)).unwrap();
        let (x1, x2) = p.xi();
        let l = p.lambda;
        let i2pi = C64::new(0.0, crate::TAU);
        assert!(close(i2pi * x1, l.conj() - l, 1e-14));
        assert!(close(i2pi * x2, l.conj() * l.conj() - l * l, 1e-14));
        assert!(SpectralParam::new(C64::new(1.0, 0.0)).is_err());
    }
}
