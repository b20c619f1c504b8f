//! Real-argument Airy function, Fresnel integrals, closed forms for cubic-phase integrals and a
//! brute-force windowed quadrature used to check them.

mod airy;
mod fresnel;

pub use airy::{
    airy, airy_asymptotic, airy_neg_leading, airy_neg_next_order, airy_series, airy_with_switch, AiryEval,
    AiryMethod, Z_SWITCH,
};
pub use fresnel::fresnel;

use crate::quad::gl;
use crate::{KpError, Result, C64};
use std::f64::consts::PI;

/// sup_z |Ai(z)|(1+|z|)^{1/4}, measured on a dense sweep of [−400, 400] and frozen.
pub const AIRY_BOUND: f64 = 0.6429;

/// ∫ e^{2πit(4π²ξ³ + cξ)} dξ = 2π Ai(2πtc/κ)/κ with κ = (24π³t)^{1/3}.
pub fn cubic_phase_integral(t: f64, c: f64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(KpError::InvalidArgument(format!("cubic_phase_integral needs t > 0, got {t}")));
    }
    let kappa = (24.0 * PI.powi(3) * t).cbrt();
    Ok(C64::new(2.0 * PI * airy(2.0 * PI * t * c / kappa).value / kappa, 0.0))
}

/// Fourier transform of ζ ↦ e^{−2it(aζ + ζ³)} evaluated at −η:
/// (2π/(6t)^{1/3}) Ai((2t)^{2/3} 3^{−1/3} (a − πη/t)).
pub fn airy_propagator(t: f64, a: f64, eta: f64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(KpError::InvalidArgument(format!("airy_propagator needs t > 0, got {t}")));
    }
    let z = (2.0 * t).powf(2.0 / 3.0) / 3f64.cbrt() * (a - PI * eta / t);
    Ok(C64::new(2.0 * PI / (6.0 * t).cbrt() * airy(z).value, 0.0))
}

/// Leading term of ∫ g(σ) e^{i t q σ²} dσ around σ = 0: g(0) e^{iπ sgn(q)/4} (π/(t|q|))^{1/2}.
pub fn stationary_phase_leading(amplitude_at_point: C64, second_deriv: f64, t: f64) -> Result<C64> {
    if second_deriv == 0.0 || !second_deriv.is_finite() {
        return Err(KpError::DegenerateStationaryPoint);
    }
    if !(t > 0.0) {
        return Err(KpError::InvalidArgument(format!("stationary_phase_leading needs t > 0, got {t}")));
    }
    let phase = C64::from_polar(1.0, PI / 4.0 * second_deriv.signum());
    Ok(amplitude_at_point * phase * (PI / (t * second_deriv.abs())).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    pub value: C64,
    pub error_estimate: f64,
}

/// Smooth cut-off: 1 on |x| ≤ cut − ramp, cosine ramp to 0 at |x| = cut.
pub fn cosine_taper(x: f64, cut: f64, ramp: f64) -> f64 {
    let d = x.abs() - (cut - ramp);
    if d <= 0.0 {
        1.0
    } else if d >= ramp {
        0.0
    } else {
        0.5 * (1.0 + (PI * d / ramp).cos())
    }
}

/// ∫_{−Ξ}^{Ξ} taper·f with panels no wider than two local oscillations (16 nodes each).
/// `local_freq(x)` bounds |φ′(x)| in rad per unit length.
pub fn windowed_integral(f: &dyn Fn(f64) -> C64, local_freq: &dyn Fn(f64) -> f64, cut: f64, ramp: f64) -> C64 {
    let rule = gl(16);
    let mut acc = C64::new(0.0, 0.0);
    let mut a = -cut;
    while a < cut {
        let w = local_freq(a).abs().max(local_freq((a + 0.25).min(cut)).abs());
        let width = (4.0 * PI / w.max(1e-3)).min(0.25).min(cut - a);
        let b = a + width;
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for &(x, wt) in rule {
            let s = mid + half * x;
            acc += f(s) * (wt * half * cosine_taper(s, cut, ramp));
        }
        a = b;
    }
    acc
}

/// Windowed integral at Ξ and 2Ξ; the difference is the error estimate.
pub fn windowed_oracle(f: &dyn Fn(f64) -> C64, local_freq: &dyn Fn(f64) -> f64, cut: f64) -> OracleResult {
    let v1 = windowed_integral(f, local_freq, cut, 0.5 * cut);
    let v2 = windowed_integral(f, local_freq, 2.0 * cut, cut);
    OracleResult { value: v2, error_estimate: (v2 - v1).norm() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn airy_by_quadrature(z: f64) -> f64 {
        let f = move |s: f64| C64::from_polar(1.0, s * s * s / 3.0 + z * s) / (2.0 * PI);
        let fr = move |s: f64| s * s + z.abs();
        windowed_oracle(&f, &fr, 12.0).value.re
    }

    #[test]
    fn ai0_matches_gamma_closed_form() {
        let want = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
        assert!((airy(0.0).value - want).abs() < 1e-15);
        assert!((airy_by_quadrature(0.0) - want).abs() < 1e-6);
    }

    #[test]
    fn airy_matches_defining_integral() {
        for z in [-10.0, -5.0, -1.0, 0.0, 1.0, 3.0] {
            let q = airy_by_quadrature(z);
            assert!((airy(z).value - q).abs() < 1e-6, "z={z}: {} vs {q}", airy(z).value);
        }
    }

    #[test]
    fn negative_axis_envelope() {
        for x in [50.0, 200.0, 800.0] {
            let v = airy(-x).value;
            let lead = airy_neg_leading(x);
            assert!((v - lead).abs() < 2.0 * x.powf(-1.75), "x={x}");
        }
    }

    #[test]
    fn airy_bound_holds() {
        let mut worst = 0f64;
        for i in 0..=80_000 {
            let z = -400.0 + i as f64 * 0.01;
            worst = worst.max(airy(z).value.abs() * (1.0 + z.abs()).powf(0.25));
        }
        assert!(worst <= AIRY_BOUND, "{worst}");
        assert!(worst > 0.99 * AIRY_BOUND, "{worst}");
    }

    #[test]
    fn switch_continuity() {
        for z in [Z_SWITCH, -Z_SWITCH] {
            let lo = airy_with_switch(z, z.abs() + 1e-9).value;
            let hi = airy_with_switch(z, z.abs() - 1e-9).value;
            assert!((lo - hi).abs() < 1e-9);
        }
    }

    #[test]
    fn cubic_phase_against_oracle() {
        for t in [1.0, 4.0] {
            for c in [-3.0, 0.0, 3.0] {
                let f = move |x: f64| C64::from_polar(1.0, 2.0 * PI * t * (4.0 * PI * PI * x.powi(3) + c * x));
                let fr = move |x: f64| 2.0 * PI * t * (12.0 * PI * PI * x * x + c.abs());
                let o = windowed_oracle(&f, &fr, 2.0);
                let v = cubic_phase_integral(t, c).unwrap();
                assert!((v - o.value).norm() <= 1e-5 * v.norm().max(1e-3), "t={t} c={c}: {v} vs {}", o.value);
            }
        }
    }

    #[test]
    fn cubic_phase_examples() {
        let v = cubic_phase_integral(1.0, 0.0).unwrap().re;
        let want = 2.0 * PI * 0.35502805388781723926 / (24.0 * PI.powi(3)).cbrt();
        assert!((v - want).abs() < 1e-15);
        let r = cubic_phase_integral(8.0, 0.0).unwrap().re / v;
        assert!((r - 0.5).abs() < 1e-14);
        assert!(cubic_phase_integral(1.0, 20.0).unwrap().norm() < 1e-14);
        assert!(cubic_phase_integral(0.0, 1.0).is_err());
    }

    #[test]
    fn propagator_against_oracle() {
        for &(t, a, eta) in &[(2.0, -1.0, 0.0), (1.0, 0.5, 0.3), (3.0, -2.0, -0.4)] {
            let f = move |z: f64| C64::from_polar(1.0, -2.0 * t * (a * z + z.powi(3)) + 2.0 * PI * z * eta);
            let fr = move |z: f64| 2.0 * t * (3.0 * z * z + a.abs()) + 2.0 * PI * eta.abs();
            let o = windowed_oracle(&f, &fr, 6.0);
            let v = airy_propagator(t, a, eta).unwrap();
            assert!((v - o.value).norm() <= 1e-5 * v.norm(), "{v} vs {}", o.value);
        }
    }

    #[test]
    fn propagator_scaling_and_decay() {
        // same Airy argument at t and 8t: a − πη/t scaled by 1/4
        let v1 = airy_propagator(1.0, 0.4, 0.0).unwrap().re;
        let v8 = airy_propagator(8.0, 0.1, 0.0).unwrap().re;
        assert!((v8 / v1 - 0.5).abs() < 1e-13);
        assert!(airy_propagator(4.0, 10.0, 0.0).unwrap().norm() < 1e-30);
    }

    #[test]
    fn stationary_phase_gaussian() {
        // ∫ e^{−σ²} e^{−iπtμσ²} dσ = (π/(1 + iπtμ))^{1/2}
        let (t, mu) = (200.0, 0.7);
        let exact = (C64::new(PI, 0.0) / C64::new(1.0, PI * t * mu)).sqrt();
        let lead = stationary_phase_leading(C64::new(1.0, 0.0), -PI * mu, t).unwrap();
        let rel = (lead - exact).norm() / exact.norm();
        assert!(rel < 2.0 / (PI * t * mu), "{rel}");
        let flipped = stationary_phase_leading(C64::new(1.0, 0.0), PI * mu, t).unwrap();
        assert!((flipped - lead.conj()).norm() < 1e-15);
        assert_eq!(stationary_phase_leading(C64::new(0.0, 0.0), 1.0, 1.0).unwrap(), C64::new(0.0, 0.0));
        assert!(matches!(stationary_phase_leading(C64::new(1.0, 0.0), 0.0, 1.0), Err(KpError::DegenerateStationaryPoint)));
    }
}
