//! Long-time behaviour of u₁: cone coordinates, stationary points of S₀, the leading-order
//! formula, direct oscillatory evaluation of u₁ with an optional cutoff split, and power-law fits.

use crate::filon::{chirp_hat_integrals, outer_rate, outer_rule_with};
use crate::forward::ScatteringGrid;
use crate::spectral::{phase_s0, REGIME_THRESHOLD_DEFAULT};
use crate::{KpError, Result, C64, TAU};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Neg,
    Pos,
    NearZero,
}

/// Moving-cone coordinates of a space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeFrame {
    pub t1: f64,
    pub t2: f64,
    pub t: f64,
    pub a: f64,
    pub r: f64,
    pub regime: Regime,
    pub threshold: f64,
}

impl ConeFrame {
    /// The point with cone data (a, t₂) at time t: x = (t(a − t₂²/3), t·t₂, −t).
    pub fn position(a: f64, t2: f64, t: f64) -> [f64; 3] {
        [t * (a - t2 * t2 / 3.0), t * t2, -t]
    }

    /// μ = t₂/3 = −x₂/(3x₃), the real part of the stationary points in ζ.
    pub fn mu(&self) -> f64 {
        self.t2 / 3.0
    }
}

pub fn cone_frame(x: [f64; 3], threshold: f64) -> Result<ConeFrame> {
    if !(x[2] < 0.0) {
        return Err(KpError::InvalidCone(x[2]));
    }
    let t = -x[2];
    let (t1, t2) = (x[0] / t, x[1] / t);
    let a = t1 + t2 * t2 / 3.0;
    let r = (a.abs() / 3.0).sqrt();
    let regime = if a < -threshold {
        Regime::Neg
    } else if a > threshold {
        Regime::Pos
    } else {
        Regime::NearZero
    };
    Ok(ConeFrame { t1, t2, t, a, r, regime, threshold })
}

/// Zeros of ∇S₀(a; ·): ±ir for a < 0, ±r for a > 0.
pub fn stationary_points(a: f64) -> Result<[C64; 2]> {
    if a == 0.0 {
        return Err(KpError::DegeneratePhase);
    }
    let r = (a.abs() / 3.0).sqrt();
    Ok(if a < 0.0 { [C64::new(0.0, r), C64::new(0.0, -r)] } else { [C64::new(r, 0.0), C64::new(-r, 0.0)] })
}

/// Φ(t, r) = 2πt·S₀(a; ir) with a = −3r².
pub fn leading_phase(t: f64, r: f64) -> f64 {
    TAU * t * phase_s0(-3.0 * r * r, C64::new(0.0, r))
}

/// (2i e^{iΦ}/3t)·s_c(μ + ir) − (2i e^{−iΦ}/3t)·s_c(μ − ir) in the NEG regime, 0 in the POS regime.
pub fn leading_order(grid: &ScatteringGrid, x: [f64; 3], threshold: f64) -> Result<C64> {
    let f = cone_frame(x, threshold)?;
    match f.regime {
        Regime::NearZero => Err(KpError::OutsideAsymptoticRegime { a: f.a, threshold }),
        Regime::Pos => Ok(C64::new(0.0, 0.0)),
        Regime::Neg => {
            let phi = leading_phase(f.t, f.r);
            let sp = grid.eval_lambda(C64::new(f.mu(), f.r));
            let sm = grid.eval_lambda(C64::new(f.mu(), -f.r));
            let c = C64::new(0.0, 2.0 / (3.0 * f.t));
            Ok(c * C64::from_polar(1.0, phi) * sp - c * C64::from_polar(1.0, -phi) * sm)
        }
    }
}

/// Smooth plateau function: 1 on |s| ≤ ½, 0 on |s| ≥ 1.
pub fn psi(s: f64) -> f64 {
    let a = s.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let sigma = 2.0 * (a - 0.5);
        let p = (-1.0 / (1.0 - sigma)).exp();
        let q = (-1.0 / sigma).exp();
        p / (p + q)
    }
}

/// Cutoff χ around the stationary points, in primed coordinates ζ′ = ζ − t₂/3.
/// NEG: ψ_{r,r}(ζ′_I)·ψ(16ζ′_R/r); POS: ψ_{r,r}(ζ′_R)·ψ(16ζ′_I/r), with
/// ψ_{r,w}(s) = ψ(16(s − w)/r) + ψ(16(s + w)/r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub r: f64,
    pub regime: Regime,
    /// The 16 of ψ(16 s/r); larger values shrink the support.
    pub sharpness: f64,
    pub enabled: bool,
}

impl CutoffSpec {
    pub fn new(frame: &ConeFrame) -> Result<Self> {
        if frame.regime == Regime::NearZero {
            return Err(KpError::OutsideAsymptoticRegime { a: frame.a, threshold: frame.threshold });
        }
        Ok(Self { r: frame.r, regime: frame.regime, sharpness: 16.0, enabled: true })
    }

    /// χ ≡ 0.
    pub fn disabled(frame: &ConeFrame) -> Self {
        Self { r: frame.r, regime: frame.regime, sharpness: 16.0, enabled: false }
    }

    fn bump(&self, s: f64, w: f64) -> f64 {
        let k = self.sharpness / self.r;
        if w == 0.0 {
            psi(k * s)
        } else {
            psi(k * (s - w)) + psi(k * (s + w))
        }
    }

    pub fn chi(&self, zp: C64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        match self.regime {
            Regime::Neg => self.bump(zp.im, self.r) * self.bump(zp.re, 0.0),
            Regime::Pos => self.bump(zp.re, self.r) * self.bump(zp.im, 0.0),
            Regime::NearZero => 0.0,
        }
    }

    /// Half-width of each support window.
    fn half_width(&self) -> f64 {
        self.r / self.sharpness
    }

    /// Support windows of χ along ζ′_I and ζ′_R.
    fn windows(&self) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        let h = self.half_width();
        let (r, c) = (self.r, 0.0);
        let pair = vec![(-r - h, -r + h), (r - h, r + h)];
        let single = vec![(c - h, c + h)];
        match self.regime {
            Regime::Neg => (pair, single),
            _ => (single, pair),
        }
    }
}

/// Amplitude of u₁ in ξ variables: −2πi·sgn(ξ₁)·s_c(ξ).
fn amplitude(grid: &ScatteringGrid, xi1: f64, xi2: f64) -> C64 {
    C64::new(0.0, -TAU * xi1.signum()) * grid.eval(xi1, xi2)
}

/// ∬ A(ξ) e^{iΘ(ξ;x)} dξ split as (∬χA e^{iΘ}, ∬(1−χ)A e^{iΘ}); `points_per_oscillation` sets the
/// outer resolution (8 is the base rule).
fn u1_quadrature(grid: &ScatteringGrid, x: [f64; 3], t2: f64, points_per_oscillation: f64, cutoff: Option<&CutoffSpec>) -> (C64, C64) {
    let lat = grid.xi_lattice;
    let [n1, _] = lat.count;
    let (e1, e2) = (0.5 * lat.length[0], 0.5 * lat.length[1]);
    let pos: Vec<f64> = (n1 / 2..n1).map(|i| lat.coord(0, i)).collect();
    let nodes2 = lat.coords(1);
    let t = -x[2];
    let gamma = TAU * x[1];
    let factor = points_per_oscillation / 8.0;
    let rate = |s: f64| factor * outer_rate(s, x, e1.max(e2), pos[0]);
    let active = cutoff.filter(|c| c.enabled);
    let (zi_windows, zr_windows) = active.map(|c| c.windows()).unwrap_or_default();
    // ζ′_I = −πξ₁: ξ₁-windows, refined so the plateau transitions are resolved
    let mut extra = Vec::new();
    let mut s_windows = Vec::new();
    for &(lo, hi) in &zi_windows {
        let (a, b) = ((lo / PI).abs(), (hi / PI).abs());
        let (a, b) = (a.min(b), a.max(b));
        if lo <= 0.0 && hi >= 0.0 {
            s_windows.push((0.0, b));
            extra.extend((1..=8).map(|k| b * k as f64 / 8.0));
        } else {
            s_windows.push((a, b));
            extra.extend((0..=8).map(|k| a + (b - a) * k as f64 / 8.0));
        }
    }
    let outer = outer_rule_with(&pos, e1, &rate, &extra);
    let (mut u_chi, mut u_rest) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let mut nodes = Vec::new();
    let mut g = Vec::new();
    for sigma in [-1.0, 1.0] {
        for &(s, w) in &outer {
            let xi1 = sigma * s;
            let beta = 1.5 * PI * t / xi1;
            let scale = C64::from_polar(w, TAU * (xi1 * x[0] + t * PI * PI * xi1 * xi1 * xi1));
            let in_window = s_windows.iter().any(|&(a, b)| s >= a && s <= b);
            nodes.clear();
            nodes.extend_from_slice(&nodes2);
            if in_window {
                // ζ′_R = ξ₂/(2ξ₁) − t₂/3 ⇒ ξ₂ = 2ξ₁(ζ′_R + t₂/3)
                for &(lo, hi) in &zr_windows {
                    let (p, q) = (2.0 * xi1 * (lo + t2 / 3.0), 2.0 * xi1 * (hi + t2 / 3.0));
                    let (p, q) = (p.min(q).max(-e2), p.max(q).min(e2));
                    if q > p {
                        nodes.extend((0..=64).map(|k| p + (q - p) * k as f64 / 64.0));
                    }
                }
                nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
                nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
            }
            g.clear();
            g.resize(nodes.len(), C64::new(0.0, 0.0));
            chirp_hat_integrals(beta, gamma, &nodes, -e2, e2, scale, &mut g);
            for (v, gj) in nodes.iter().zip(&g) {
                let amp = amplitude(grid, xi1, *v) * gj;
                if in_window {
                    let zeta = crate::spectral::zeta_from_xi(xi1, *v).expect("ξ₁ ≠ 0");
                    let chi = active.map(|c| c.chi(zeta - t2 / 3.0)).unwrap_or(0.0);
                    u_chi += amp * chi;
                    u_rest += amp * (1.0 - chi);
                } else {
                    u_rest += amp;
                }
            }
        }
    }
    (u_chi, u_rest)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U1Direct {
    pub value: C64,
    pub error_estimate: f64,
}

/// u₁(x) by direct oscillatory quadrature of the interpolated s_c, at `resolution` and twice that
/// many points per oscillation; the difference is the error estimate.
pub fn u1_direct(grid: &ScatteringGrid, x: [f64; 3], resolution: usize) -> Result<U1Direct> {
    let t = -x[2];
    if !(t >= 1.0) {
        return Err(KpError::InvalidArgument(format!("u1_direct needs t >= 1, got {t}")));
    }
    let t2 = x[1] / t;
    let ppo = resolution.max(8) as f64;
    let (_, coarse) = u1_quadrature(grid, x, t2, ppo, None);
    let (_, fine) = u1_quadrature(grid, x, t2, 2.0 * ppo, None);
    let diff = (fine - coarse).norm();
    if diff > 0.1 * fine.norm() && diff > 1e-300 {
        return Err(KpError::ResolutionInsufficient { diff, value: fine.norm() });
    }
    Ok(U1Direct { value: fine, error_estimate: diff })
}

/// (u₁,₁, u₁,₂) = (∬χ·…, ∬(1 − χ)·…) on a common rule, so the sum is u₁ to roundoff.
pub fn u1_split(grid: &ScatteringGrid, x: [f64; 3], cutoff: &CutoffSpec, resolution: usize) -> Result<(C64, C64)> {
    let f = cone_frame(x, REGIME_THRESHOLD_DEFAULT.min(cutoff.r * cutoff.r * 3.0 * 0.999))?;
    if cutoff.regime == Regime::NearZero {
        return Err(KpError::OutsideAsymptoticRegime { a: f.a, threshold: f.threshold });
    }
    Ok(u1_quadrature(grid, x, f.t2, 2.0 * resolution.max(8) as f64, Some(cutoff)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub dropped: usize,
}

/// Least-squares slope of log|v| against log t.
pub fn decay_fit(samples: &[(f64, f64)]) -> Result<DecayFit> {
    let kept: Vec<(f64, f64)> =
        samples.iter().copied().filter(|&(t, v)| t > 0.0 && v.abs() > 0.0 && v.is_finite()).collect();
    let dropped = samples.len() - kept.len();
    if kept.len() < 4 {
        return Err(KpError::InsufficientData(format!("{} usable samples, need 4", kept.len())));
    }
    let tmin = kept.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let tmax = kept.iter().map(|s| s.0).fold(0.0, f64::max);
    if tmax < 4.0 * tmin {
        return Err(KpError::InsufficientData(format!("t spans only [{tmin}, {tmax}]")));
    }
    let n = kept.len() as f64;
    let xs: Vec<f64> = kept.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|s| s.1.abs().ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit { samples: kept, slope, intercept, residual, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyFit {
    pub omega: f64,
    pub amplitude: f64,
    /// Fraction of the signal variance explained by A cos ωt + B sin ωt + C.
    pub explained: f64,
}

/// Best ω in [lo, hi] for y ≈ A cos ωt + B sin ωt + C: grid search followed by golden-section
/// refinement of the least-squares residual.
pub fn fit_frequency(samples: &[(f64, f64)], lo: f64, hi: f64) -> Result<FrequencyFit> {
    if samples.len() < 5 || !(hi > lo) {
        return Err(KpError::InsufficientData(format!("{} samples for a frequency fit", samples.len())));
    }
    let total: f64 = {
        let m = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
        samples.iter().map(|s| (s.1 - m).powi(2)).sum()
    };
    let score = |w: f64| -> (f64, f64) {
        // normal equations for (A, B, C)
        let mut m = [[0.0; 3]; 3];
        let mut r = [0.0; 3];
        for &(t, y) in samples {
            let b = [(w * t).cos(), (w * t).sin(), 1.0];
            for i in 0..3 {
                r[i] += b[i] * y;
                for j in 0..3 {
                    m[i][j] += b[i] * b[j];
                }
            }
        }
        let c = solve3(m, r);
        let res: f64 = samples
            .iter()
            .map(|&(t, y)| (y - c[0] * (w * t).cos() - c[1] * (w * t).sin() - c[2]).powi(2))
            .sum();
        (res, c[0].hypot(c[1]))
    };
    let n = 2000;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n {
        let w = lo + (hi - lo) * k as f64 / n as f64;
        let (res, _) = score(w);
        if res < best.0 {
            best = (res, w);
        }
    }
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if score(c).0 < score(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let omega = 0.5 * (a + b);
    let (res, amplitude) = score(omega);
    Ok(FrequencyFit { omega, amplitude, explained: if total > 0.0 { 1.0 - res / total } else { 0.0 } })
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for i in 0..3 {
        let p = (i..3).max_by(|&a, &b| m[a][i].abs().partial_cmp(&m[b][i].abs()).unwrap()).unwrap();
        m.swap(i, p);
        r.swap(i, p);
        if m[i][i].abs() < 1e-300 {
            continue;
        }
        for k in i + 1..3 {
            let f = m[k][i] / m[i][i];
            for j in i..3 {
                m[k][j] -= f * m[i][j];
            }
            r[k] -= f * r[i];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = if m[i][i].abs() < 1e-300 { 0.0 } else { (r[i] - s) / m[i][i] };
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice2D;
    use crate::spectral::grad_s0;

    #[test]
    fn cone_frame_examples() {
        let f = cone_frame([-3.0, 0.0, -1.0], 1.0).unwrap();
        assert_eq!((f.t, f.t1, f.t2, f.a, f.r, f.regime), (1.0, -3.0, 0.0, -3.0, 1.0, Regime::Neg));
        let f = cone_frame([3.0, 0.0, -1.0], 1.0).unwrap();
        assert_eq!((f.a, f.r, f.regime), (3.0, 1.0, Regime::Pos));
        assert_eq!(cone_frame([0.5, 0.0, -1.0], 1.0).unwrap().regime, Regime::NearZero);
        assert!(matches!(cone_frame([1.0, 0.0, 0.0], 1.0), Err(KpError::InvalidCone(_))));
        for x in [[-3.0, 0.0, -1.0], [2.0, -1.5, -4.0], [-7.0, 3.0, -2.5]] {
            let f = cone_frame(x, 1.0).unwrap();
            let alt = (x[1] * x[1] - 3.0 * x[0] * x[2]) / (3.0 * x[2] * x[2]);
            assert!((f.a - alt).abs() < 1e-12);
            let p = ConeFrame::position(f.a, f.t2, f.t);
            assert!((0..3).all(|i| (p[i] - x[i]).abs() < 1e-12));
        }
    }

    #[test]
    fn stationary_points_zero_the_gradient() {
        assert_eq!(stationary_points(-3.0).unwrap(), [C64::new(0.0, 1.0), C64::new(0.0, -1.0)]);
        assert_eq!(stationary_points(3.0).unwrap(), [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        assert!(matches!(stationary_points(0.0), Err(KpError::DegeneratePhase)));
        for a in [-5.0, -3.0, 0.7, 12.0] {
            for z in stationary_points(a).unwrap() {
                let (gr, gi) = grad_s0(a, z);
                assert!(gr.abs() < 1e-12 && gi.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_constant_is_four_t_r_cubed() {
        for (t, r) in [(1.0, 1.0), (3.0, 0.5), (10.0, 2.0)] {
            assert!((leading_phase(t, r) - 4.0 * t * r * r * r).abs() < 1e-12 * t * r * r * r);
        }
    }

    fn symmetric_grid() -> ScatteringGrid {
        let lat = Lattice2D::square(4.0, 16).unwrap();
        let vals = (0..lat.len())
            .map(|k| {
                let (a, b) = lat.point(k);
                let g = (-(a * a + b * b)).exp();
                C64::new(0.0, -a.signum() * 0.01 * g) + C64::new(0.003 * a * b * g + 0.002 * g, 0.0)
            })
            .collect();
        ScatteringGrid::new(lat, vals).unwrap()
    }

    #[test]
    fn leading_order_properties() {
        let g = symmetric_grid();
        assert!(g.reality_violation < 1e-15);
        let x = ConeFrame::position(-3.0, 0.4, 10.0);
        let v = leading_order(&g, x, 1.0).unwrap();
        assert!(v.norm() > 0.0 && v.im.abs() < 1e-10 * v.norm());
        assert_eq!(leading_order(&g, ConeFrame::position(3.0, 0.0, 10.0), 1.0).unwrap(), C64::new(0.0, 0.0));
        assert!(leading_order(&g, ConeFrame::position(0.5, 0.0, 10.0), 1.0).is_err());
        let z = ScatteringGrid::zeros(g.xi_lattice);
        assert_eq!(leading_order(&z, x, 1.0).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn psi_shape() {
        assert_eq!(psi(0.3), 1.0);
        assert_eq!(psi(-0.5), 1.0);
        assert_eq!(psi(1.0), 0.0);
        assert!((psi(0.75) - 0.5).abs() < 1e-15);
        for k in 0..1000 {
            let s = 0.5 + k as f64 / 1000.0;
            let v = psi(s);
            assert!((0.0..=1.0).contains(&v));
        }
        // value and slope continuous at the joins
        for j in [0.5, 1.0] {
            let h = 1e-6;
            assert!((psi(j - h) - psi(j + h)).abs() < 1e-10);
            let dl = (psi(j) - psi(j - h)) / h;
            let dr = (psi(j + h) - psi(j)) / h;
            assert!((dl - dr).abs() < 1e-10);
        }
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let f = cone_frame(ConeFrame::position(-3.0, 0.0, 5.0), 1.0).unwrap();
        let c = CutoffSpec::new(&f).unwrap();
        assert_eq!(c.chi(C64::new(0.0, 1.0)), 1.0);
        assert_eq!(c.chi(C64::new(0.0, -1.0)), 1.0);
        assert_eq!(c.chi(C64::new(0.0, 0.0)), 0.0);
        assert_eq!(c.chi(C64::new(0.2, 1.0)), 0.0);
        assert_eq!(CutoffSpec::disabled(&f).chi(C64::new(0.0, 1.0)), 0.0);
    }

    #[test]
    fn u1_direct_zero_and_split_partition() {
        let g = symmetric_grid();
        let x = ConeFrame::position(-3.0, 0.3, 4.0);
        let z = u1_direct(&ScatteringGrid::zeros(g.xi_lattice), x, 8).unwrap();
        assert_eq!(z.value, C64::new(0.0, 0.0));
        assert!(u1_direct(&g, [0.0, 0.0, -0.5], 8).is_err());
        let d = u1_direct(&g, x, 8).unwrap();
        let f = cone_frame(x, 1.0).unwrap();
        let c = CutoffSpec::new(&f).unwrap();
        let (a, b) = u1_split(&g, x, &c, 8).unwrap();
        assert!(a.norm() > 0.0);
        assert!(((a + b) - d.value).norm() < 1e-8 * d.value.norm(), "{} vs {}", a + b, d.value);
        let (a0, b0) = u1_split(&g, x, &CutoffSpec::disabled(&f), 8).unwrap();
        assert_eq!(a0, C64::new(0.0, 0.0));
        assert!((b0 - d.value).norm() < 1e-8 * d.value.norm());
    }

    #[test]
    fn decay_fit_examples() {
        let ts = [10.0, 20.0, 40.0, 80.0];
        let f = decay_fit(&ts.map(|t| (t, 3.0 / t))).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-6);
        let f = decay_fit(&ts.map(|t| (t, 0.5 * t.powf(-4.0 / 3.0)))).unwrap();
        assert!((f.slope + 4.0 / 3.0).abs() < 1e-9);
        let f = decay_fit(&ts.map(|t| (t, 2.0))).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(decay_fit(&[(10.0, 1.0), (20.0, 0.0), (40.0, 1.0), (80.0, 1.0)]).is_err());
        assert!(decay_fit(&[(10.0, 1.0), (12.0, 1.0), (14.0, 1.0), (16.0, 1.0)]).is_err());
    }

    #[test]
    fn frequency_fit_recovers_known_signal() {
        let s: Vec<(f64, f64)> = (0..41)
            .map(|k| {
                let t = 10.0 + 0.25 * k as f64;
                (t, 0.7 * (4.0 * t + 0.3).cos() + 0.01)
            })
            .collect();
        let f = fit_frequency(&s, 1.0, 8.0).unwrap();
        assert!((f.omega - 4.0).abs() < 1e-8, "{}", f.omega);
        assert!((f.amplitude - 0.7).abs() < 1e-8);
        assert!(f.explained > 0.999_999);
    }
}
