//! Pseudo-spectral reference solver for KPII, written in evolution form
//!
//! u_{x₃} = ¼u_{x₁x₁x₁} + ¾∂_{x₁}(u²) + ¾∂_{x₁}^{−1}u_{x₂x₂},
//!
//! on a periodic lattice, integrated toward negative x₃ (t = −x₃) with ETDRK4.
//! The ξ₁ = 0 modes are projected out at ingestion and stay zero.

use crate::forward::InitialData;
use crate::lattice::{ComplexField2D, FftPlan2D, Lattice2D, Space};
use crate::{KpError, Result, C64, TAU};
use rayon::prelude::*;
use std::f64::consts::PI;

const CONTOUR_POINTS: usize = 32;

/// iΩ(ξ) with Ω = −2π³ξ₁³ + 3πξ₂²/(2ξ₁), so that the linear flow is ∂_{x₃}û = iΩû.
pub fn dispersion_symbol(xi1: f64, xi2: f64) -> Result<C64> {
    if xi1 == 0.0 {
        return Err(KpError::SingularCoordinate("ξ₁ = 0 mode is excluded by the zero-mass constraint"));
    }
    Ok(C64::new(0.0, -2.0 * PI.powi(3) * xi1.powi(3) + 1.5 * PI * xi2 * xi2 / xi1))
}

/// Modes carried by the state: ξ₁ ≠ 0 and neither index at Nyquist.
fn admissible(lat: &Lattice2D, i: usize, j: usize) -> bool {
    lat.mode(0, i) != 0 && !lat.is_nyquist(0, i) && !lat.is_nyquist(1, j)
}

/// 2/3 rule: |k| ≤ N/3 on both axes.
fn retained(lat: &Lattice2D, i: usize, j: usize) -> bool {
    3 * lat.mode(0, i).unsigned_abs() as usize <= lat.count[0] && 3 * lat.mode(1, j).unsigned_abs() as usize <= lat.count[1]
}

fn symbol_table(lat: &Lattice2D) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); lat.len()];
    for i in 0..lat.count[0] {
        for j in 0..lat.count[1] {
            if admissible(lat, i, j) {
                out[lat.index(i, j)] = dispersion_symbol(lat.frequency(0, i), lat.frequency(1, j)).expect("ξ₁ ≠ 0");
            }
        }
    }
    out
}

/// ¾·2πiξ₁ on retained admissible modes, zero elsewhere.
fn nonlinear_multiplier(lat: &Lattice2D) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); lat.len()];
    for i in 0..lat.count[0] {
        for j in 0..lat.count[1] {
            if admissible(lat, i, j) && retained(lat, i, j) {
                out[lat.index(i, j)] = C64::new(0.0, 0.75 * TAU * lat.frequency(0, i));
            }
        }
    }
    out
}

/// Result of the ingestion projection.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: ComplexField2D,
    /// Largest x₁-mean removed from an x₂ line.
    pub removed_mean: f64,
    /// Largest Nyquist-mode amplitude removed (continuous-FT units).
    pub removed_nyquist: f64,
}

/// Subtracts the x₁-mean of every x₂ line and drops the Nyquist modes.
pub fn zero_mass_projection(u: &ComplexField2D) -> Result<Projection> {
    let mut s = u.to_spectral()?;
    let lat = u.lattice;
    let mut removed_mean = 0.0f64;
    let mut removed_nyquist = 0.0f64;
    for i in 0..lat.count[0] {
        for j in 0..lat.count[1] {
            if admissible(&lat, i, j) {
                continue;
            }
            let k = lat.index(i, j);
            if lat.mode(0, i) == 0 && !lat.is_nyquist(1, j) {
                removed_mean = removed_mean.max(s.data[k].norm());
            } else {
                removed_nyquist = removed_nyquist.max(s.data[k].norm());
            }
            s.data[k] = C64::new(0.0, 0.0);
        }
    }
    // Per-line mean is the ξ₁ = 0 column divided by L₁; report it in physical units.
    Ok(Projection { field: s.to_physical()?, removed_mean: removed_mean / lat.length[0], removed_nyquist })
}

/// ¾∂_{x₁}(u²), spectral derivative with 2/3-rule dealiasing; ξ₁ = 0 modes are dropped.
pub fn nonlinear_term(u: &ComplexField2D) -> Result<ComplexField2D> {
    if u.space != Space::Physical {
        return Err(KpError::ShapeMismatch("nonlinear_term expects a physical field".into()));
    }
    let lat = u.lattice;
    let plan = FftPlan2D::new(lat);
    let mult = nonlinear_multiplier(&lat);
    let mut w: Vec<C64> = u.data.iter().map(|z| z * z).collect();
    plan.forward(&mut w);
    for (z, m) in w.iter_mut().zip(&mult) {
        *z *= m;
    }
    plan.inverse(&mut w);
    ComplexField2D::from_data(lat, Space::Physical, w)
}

/// Exact linear flow from x₃ = 0 to `x3_target`. Inadmissible modes (ξ₁ = 0, Nyquist) are removed.
pub fn linear_evolve(u0: &ComplexField2D, x3_target: f64) -> Result<ComplexField2D> {
    let lat = u0.lattice;
    let mut s = u0.to_spectral()?;
    let sym = symbol_table(&lat);
    for i in 0..lat.count[0] {
        for j in 0..lat.count[1] {
            let k = lat.index(i, j);
            s.data[k] = if admissible(&lat, i, j) { s.data[k] * (sym[k] * x3_target).exp() } else { C64::new(0.0, 0.0) };
        }
    }
    s.to_physical()
}

/// Largest |Ω| over the admissible modes.
pub fn max_frequency(lat: &Lattice2D) -> f64 {
    symbol_table(lat).iter().fold(0.0, |m, z| m.max(z.im.abs()))
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Step size in t = −x₃ (positive).
    pub dt: f64,
    pub nonlinear: bool,
    /// Require dt·max|Ω| < `cfl_limit` over the admissible modes.
    pub enforce_linear_cfl: bool,
    pub cfl_limit: f64,
    pub blowup_factor: f64,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self { dt, nonlinear: true, enforce_linear_cfl: true, cfl_limit: 0.5, blowup_factor: 10.0 }
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// ETDRK4 integrates the linear part exactly, so the bound only matters for the explicit part.
    pub fn stiff(mut self) -> Self {
        self.enforce_linear_cfl = false;
        self
    }
}

/// ETDRK4 coefficients for a fixed signed step h (Kassam–Trefethen contour means).
struct EtdCoeffs {
    h: f64,
    e: Vec<C64>,
    e2: Vec<C64>,
    q: Vec<C64>,
    f1: Vec<C64>,
    f2: Vec<C64>,
    f3: Vec<C64>,
}

impl EtdCoeffs {
    fn new(symbol: &[C64], h: f64) -> Self {
        let roots: Vec<C64> = (0..CONTOUR_POINTS)
            .map(|j| C64::from_polar(1.0, TAU * (j as f64 + 0.5) / CONTOUR_POINTS as f64))
            .collect();
        let m = CONTOUR_POINTS as f64;
        let rows: Vec<[C64; 6]> = symbol
            .par_iter()
            .map(|&l| {
                let lh = l * h;
                let (mut q, mut f1, mut f2, mut f3) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for r in &roots {
                    let z = lh + r;
                    let ez = z.exp();
                    let ez2 = (z * 0.5).exp();
                    let z3 = z * z * z;
                    q += (ez2 - 1.0) / z;
                    f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                    f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                    f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
                }
                [lh.exp(), (lh * 0.5).exp(), q * h / m, f1 * h / m, f2 * h / m, f3 * h / m]
            })
            .collect();
        let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
        Self { h, e: col(0), e2: col(1), q: col(2), f1: col(3), f2: col(4), f3: col(5) }
    }
}

/// Snapshot of an evolution.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    /// Real-valued u at `x3` (imaginary parts cleared after the check).
    pub field: ComplexField2D,
    pub x3: f64,
    pub dt: f64,
    pub steps: usize,
    /// (x₃, lattice L² norm) after each step, starting with the projected datum.
    pub l2_history: Vec<(f64, f64)>,
    /// Largest |û| on the ξ₁ = 0 column seen during the run.
    pub zero_mode_max: f64,
    /// Largest |Im u| seen before clearing, relative to max|u|.
    pub max_imag: f64,
    pub projection_removed_mean: f64,
    /// Largest |û| dropped outside the dealiased band at ingestion.
    pub truncation_removed: f64,
}

impl EvolutionState {
    pub fn l2_drift(&self) -> f64 {
        let l0 = self.l2_history[0].1;
        if l0 == 0.0 {
            return 0.0;
        }
        self.l2_history.iter().fold(0.0, |m, &(_, l)| m.max((l - l0).abs() / l0))
    }

    /// Largest |u| within `fraction` of the box edges, relative to max|u|.
    pub fn boundary_strip_ratio(&self, fraction: f64) -> f64 {
        boundary_strip_ratio(&self.field, fraction)
    }
}

pub fn boundary_strip_ratio(u: &ComplexField2D, fraction: f64) -> f64 {
    let lat = u.lattice;
    let w1 = ((lat.count[0] as f64 * fraction).ceil() as usize).max(1);
    let w2 = ((lat.count[1] as f64 * fraction).ceil() as usize).max(1);
    let mut edge = 0.0f64;
    for i in 0..lat.count[0] {
        for j in 0..lat.count[1] {
            if i < w1 || i >= lat.count[0] - w1 || j < w2 || j >= lat.count[1] - w2 {
                edge = edge.max(u.get(i, j).norm());
            }
        }
    }
    let top = u.max_abs();
    if top == 0.0 {
        0.0
    } else {
        edge / top
    }
}

/// Stepping engine holding the spectral state.
pub struct Evolver {
    lat: Lattice2D,
    plan: FftPlan2D,
    symbol: Vec<C64>,
    mult: Vec<C64>,
    coeffs: EtdCoeffs,
    opts: EvolveOptions,
    v: Vec<C64>,
    x3: f64,
    steps: usize,
    initial_max: f64,
    l2_history: Vec<(f64, f64)>,
    zero_mode_max: f64,
    max_imag: f64,
    removed_mean: f64,
    removed_high: f64,
}

impl Evolver {
    pub fn new(u0: &InitialData, opts: EvolveOptions) -> Result<Self> {
        if !(opts.dt > 0.0) || !opts.dt.is_finite() {
            return Err(KpError::InvalidArgument(format!("time step must be positive, got {}", opts.dt)));
        }
        let lat = u0.lattice();
        let symbol = symbol_table(&lat);
        let omega = symbol.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
        if opts.enforce_linear_cfl && opts.dt * omega >= opts.cfl_limit {
            return Err(KpError::CflViolation(opts.dt * omega));
        }
        let proj = zero_mass_projection(&u0.field)?;
        let plan = FftPlan2D::new(lat);
        let mut v = proj.field.data.clone();
        plan.forward(&mut v);
        // Galerkin truncation to the dealiased band keeps the L² norm an exact invariant of the semi-discrete flow.
        let mut removed_high = 0.0f64;
        for i in 0..lat.count[0] {
            for j in 0..lat.count[1] {
                let k = lat.index(i, j);
                if !retained(&lat, i, j) {
                    removed_high = removed_high.max(v[k].norm());
                    v[k] = C64::new(0.0, 0.0);
                } else if !admissible(&lat, i, j) {
                    v[k] = C64::new(0.0, 0.0);
                }
            }
        }
        let mut u = v.clone();
        plan.inverse(&mut u);
        let start = ComplexField2D::from_data(lat, Space::Physical, u)?;
        let initial_max = start.max_abs();
        let l2 = start.l2_norm();
        Ok(Self {
            lat,
            mult: nonlinear_multiplier(&lat),
            coeffs: EtdCoeffs::new(&symbol, -opts.dt),
            symbol,
            plan,
            opts,
            v,
            x3: 0.0,
            steps: 0,
            initial_max,
            l2_history: vec![(0.0, l2)],
            zero_mode_max: 0.0,
            max_imag: 0.0,
            removed_mean: proj.removed_mean,
            removed_high,
        })
    }

    pub fn x3(&self) -> f64 {
        self.x3
    }

    pub fn lattice(&self) -> Lattice2D {
        self.lat
    }

    fn nonlinear(&self, v: &[C64], max_imag: &mut f64) -> Vec<C64> {
        let mut u = v.to_vec();
        self.plan.inverse(&mut u);
        let im = u.par_iter().map(|z| z.im.abs()).reduce(|| 0.0, f64::max);
        *max_imag = max_imag.max(im);
        u.par_iter_mut().for_each(|z| *z = C64::new(z.re * z.re, 0.0));
        self.plan.forward(&mut u);
        u.par_iter_mut().zip(&self.mult).for_each(|(z, m)| *z *= m);
        u
    }

    fn step_with(&mut self, c: &EtdCoeffs) {
        let n = self.v.len();
        if !self.opts.nonlinear {
            self.v.par_iter_mut().zip(&c.e).for_each(|(z, e)| *z *= e);
            return;
        }
        let mut imag = 0.0;
        let nv = self.nonlinear(&self.v, &mut imag);
        let a: Vec<C64> = (0..n).into_par_iter().map(|k| c.e2[k] * self.v[k] + c.q[k] * nv[k]).collect();
        let na = self.nonlinear(&a, &mut imag);
        let b: Vec<C64> = (0..n).into_par_iter().map(|k| c.e2[k] * self.v[k] + c.q[k] * na[k]).collect();
        let nb = self.nonlinear(&b, &mut imag);
        let cc: Vec<C64> = (0..n).into_par_iter().map(|k| c.e2[k] * a[k] + c.q[k] * (2.0 * nb[k] - nv[k])).collect();
        let nc = self.nonlinear(&cc, &mut imag);
        self.v.par_iter_mut().enumerate().for_each(|(k, z)| {
            *z = c.e[k] * *z + nv[k] * c.f1[k] + 2.0 * (na[k] + nb[k]) * c.f2[k] + nc[k] * c.f3[k];
        });
        let scale = self.initial_max.max(f64::MIN_POSITIVE);
        self.max_imag = self.max_imag.max(imag / scale);
    }

    fn record(&mut self) -> Result<()> {
        let lat = self.lat;
        let l2 = (self.v.iter().map(|z| z.norm_sqr()).sum::<f64>() / (lat.length[0] * lat.length[1])).sqrt();
        self.l2_history.push((self.x3, l2));
        for i in 0..lat.count[0] {
            if lat.mode(0, i) == 0 {
                for j in 0..lat.count[1] {
                    self.zero_mode_max = self.zero_mode_max.max(self.v[lat.index(i, j)].norm());
                }
            }
        }
        if self.initial_max > 0.0 && self.opts.blowup_factor.is_finite() {
            let mut u = self.v.clone();
            self.plan.inverse(&mut u);
            let current = u.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
            if !current.is_finite() || current > self.opts.blowup_factor * self.initial_max {
                return Err(KpError::BlowUp { initial: self.initial_max, current });
            }
        }
        Ok(())
    }

    /// Steps from the current x₃ down to `x3_target` (≤ current), shortening the final step if needed.
    pub fn advance_to(&mut self, x3_target: f64) -> Result<()> {
        if x3_target > self.x3 {
            return Err(KpError::InvalidArgument(format!("evolution runs toward negative x₃: {} > {}", x3_target, self.x3)));
        }
        let span = self.x3 - x3_target;
        let full = (span / self.opts.dt * (1.0 + 1e-12)).floor() as usize;
        let coeffs = std::mem::replace(&mut self.coeffs, EtdCoeffs::new(&[], 0.0));
        let mut res = Ok(());
        for _ in 0..full {
            self.step_with(&coeffs);
            self.x3 += coeffs.h;
            self.steps += 1;
            res = self.record();
            if res.is_err() {
                break;
            }
        }
        self.coeffs = coeffs;
        res?;
        let rest = self.x3 - x3_target;
        if rest > 1e-12 * self.opts.dt.max(span) {
            let c = EtdCoeffs::new(&self.symbol, -rest);
            self.step_with(&c);
            self.steps += 1;
            self.record()?;
        }
        self.x3 = x3_target;
        Ok(())
    }

    pub fn state(&self) -> Result<EvolutionState> {
        let mut u = self.v.clone();
        self.plan.inverse(&mut u);
        let scale = self.initial_max.max(f64::MIN_POSITIVE);
        let imag = u.iter().fold(0.0, |m: f64, z| m.max(z.im.abs())) / scale;
        for z in &mut u {
            z.im = 0.0;
        }
        Ok(EvolutionState {
            field: ComplexField2D::from_data(self.lat, Space::Physical, u)?,
            x3: self.x3,
            dt: self.opts.dt,
            steps: self.steps,
            l2_history: self.l2_history.clone(),
            zero_mode_max: self.zero_mode_max,
            max_imag: self.max_imag.max(imag),
            projection_removed_mean: self.removed_mean,
            truncation_removed: self.removed_high,
        })
    }

    /// Trigonometric interpolation of u at an arbitrary point of the periodic box.
    pub fn value_at(&self, x1: f64, x2: f64) -> f64 {
        let lat = self.lat;
        let e1: Vec<C64> = (0..lat.count[0]).map(|i| C64::from_polar(1.0, TAU * lat.frequency(0, i) * x1)).collect();
        let e2: Vec<C64> = (0..lat.count[1]).map(|j| C64::from_polar(1.0, TAU * lat.frequency(1, j) * x2)).collect();
        let n2 = lat.count[1];
        let acc: C64 = (0..lat.count[0])
            .into_par_iter()
            .map(|i| self.v[i * n2..(i + 1) * n2].iter().zip(&e2).map(|(a, b)| a * b).sum::<C64>() * e1[i])
            .collect::<Vec<_>>()
            .iter()
            .sum();
        acc.re / (lat.length[0] * lat.length[1])
    }
}

/// Evolves `u0` from x₃ = 0 to `x3_target` < 0.
pub fn evolve(u0: &InitialData, x3_target: f64, opts: EvolveOptions) -> Result<EvolutionState> {
    let mut ev = Evolver::new(u0, opts)?;
    ev.advance_to(x3_target)?;
    ev.state()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dipole(lat: Lattice2D, eps: f64) -> InitialData {
        InitialData::new(ComplexField2D::from_real_fn(lat, |a, b| eps * a * (-PI * (a * a + b * b) / 4.0).exp())).unwrap()
    }

    #[test]
    fn symbol_examples() {
        let s = dispersion_symbol(1.0, 0.0).unwrap();
        assert!((s - C64::new(0.0, -2.0 * PI.powi(3))).norm() < 1e-12);
        for &(a, b) in &[(0.3, 0.7), (-1.2, 0.4), (2.0, -3.0)] {
            let p = dispersion_symbol(a, b).unwrap();
            let m = dispersion_symbol(-a, -b).unwrap();
            assert!((p + m).norm() < 1e-12);
            // propagator over x₃ = −t equals e^{2πit(π²ξ₁³ − ¾ξ₂²/ξ₁)}
            let t = 1.7;
            let want = C64::from_polar(1.0, TAU * t * (PI * PI * a * a * a - 0.75 * b * b / a));
            assert!(((p * -t).exp() - want).norm() < 1e-12);
        }
        assert!(dispersion_symbol(0.0, 1.0).is_err());
    }

    #[test]
    fn nonlinear_term_examples() {
        let lat = Lattice2D::new(8.0, 4.0, 32, 16).unwrap();
        let c = nonlinear_term(&ComplexField2D::from_real_fn(lat, |_, _| 0.3)).unwrap();
        assert!(c.max_abs() < 1e-15);
        let u = ComplexField2D::from_real_fn(lat, |a, _| (TAU * a / 8.0).cos());
        let n = nonlinear_term(&u).unwrap();
        let want = ComplexField2D::from_real_fn(lat, |a, _| -0.75 * (TAU / 4.0) * 0.5 * (2.0 * TAU * a / 8.0).sin());
        let err = n.data.iter().zip(&want.data).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        assert!(err < 1e-12, "{err}");
        // top-third energy is exactly zero
        let rough = ComplexField2D::from_real_fn(lat, |a, b| (3.0 * a + b).sin() * (a * b).cos() + a.cos());
        let s = nonlinear_term(&rough).unwrap().to_spectral().unwrap();
        for i in 0..32 {
            for j in 0..16 {
                if !retained(&lat, i, j) {
                    assert!(s.get(i, j).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn linear_evolve_is_unitary_and_exact() {
        let lat = Lattice2D::square(16.0, 32).unwrap();
        let zero = linear_evolve(&ComplexField2D::zeros(lat, Space::Physical), -3.0).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let u0 = zero_mass_projection(&dipole(lat, 1.0).field).unwrap().field;
        let u = linear_evolve(&u0, -2.5).unwrap();
        assert!((u.l2_norm() - u0.l2_norm()).abs() < 1e-12 * u0.l2_norm());
        // single mode
        let (k1, k2) = (3.0 / 16.0, -2.0 / 16.0);
        let m = ComplexField2D::from_fn(lat, |a, b| C64::from_polar(1.0, TAU * (k1 * a + k2 * b)));
        let r = linear_evolve(&m, -0.8).unwrap();
        let rot = (dispersion_symbol(k1, k2).unwrap() * -0.8).exp();
        let err = r.data.iter().zip(&m.data).fold(0.0f64, |e, (x, y)| e.max((x - y * rot).norm()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let lat = Lattice2D::square(8.0, 16).unwrap();
        let s = evolve(&InitialData::zero(lat), -1.0, EvolveOptions::new(0.1).stiff()).unwrap();
        assert_eq!(s.field.max_abs(), 0.0);
        assert_eq!(s.steps, 10);
    }

    #[test]
    fn cfl_bound_is_enforced() {
        let lat = Lattice2D::square(8.0, 32).unwrap();
        let dt = 0.6 / max_frequency(&lat);
        match Evolver::new(&dipole(lat, 0.01), EvolveOptions::new(dt)) {
            Err(KpError::CflViolation(v)) => assert!((v - 0.6).abs() < 1e-12),
            other => panic!("expected CFL violation, got {:?}", other.err()),
        }
        assert!(Evolver::new(&dipole(lat, 0.01), EvolveOptions::new(0.4 / max_frequency(&lat))).is_ok());
    }

    #[test]
    fn linear_mode_matches_propagator() {
        let lat = Lattice2D::square(16.0, 32).unwrap();
        let u0 = dipole(lat, 0.01);
        let mut ev = Evolver::new(&u0, EvolveOptions::new(0.15).linear().stiff()).unwrap();
        let start = ev.state().unwrap().field;
        ev.advance_to(-2.0).unwrap();
        let s = ev.state().unwrap();
        let exact = linear_evolve(&start, -2.0).unwrap();
        let err = s.field.data.iter().zip(&exact.data).fold(0.0f64, |e, (x, y)| e.max((x - y).norm()));
        assert!(err < 1e-10 * u0.field.max_abs(), "{err}");
        assert_eq!(s.steps, 14);
    }

    #[test]
    fn fourth_order_step_halving() {
        let lat = Lattice2D::square(16.0, 32).unwrap();
        let u0 = dipole(lat, 2.0);
        let run = |dt: f64| evolve(&u0, -0.4, EvolveOptions::new(dt).stiff()).unwrap().field;
        let a = run(0.1);
        let b = run(0.05);
        let c = run(0.025);
        let d1 = a.data.iter().zip(&b.data).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        let d2 = b.data.iter().zip(&c.data).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        let ratio = d1 / d2;
        assert!((ratio - 16.0).abs() < 0.3 * 16.0, "ratio {ratio}");
    }

    #[test]
    fn small_data_invariants() {
        let lat = Lattice2D::square(16.0, 32).unwrap();
        let u0 = dipole(lat, 0.01);
        let s = evolve(&u0, -2.0, EvolveOptions::new(0.05).stiff()).unwrap();
        assert!(s.l2_drift() < 1e-6, "{}", s.l2_drift());
        assert_eq!(s.zero_mode_max, 0.0);
        assert!(s.max_imag < 1e-12);
        let lin = linear_evolve(&u0.field, -2.0).unwrap();
        let diff = s.field.data.iter().zip(&lin.data).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let norm = lin.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // nonlinear correction is O(ε₀)
        assert!(diff / norm < 0.05 && diff / norm > 1e-6, "{}", diff / norm);
    }

    #[test]
    fn point_value_interpolates_lattice() {
        let lat = Lattice2D::square(16.0, 32).unwrap();
        let ev = Evolver::new(&dipole(lat, 0.01), EvolveOptions::new(0.1).stiff()).unwrap();
        let st = ev.state().unwrap();
        let (x1, x2) = lat.point(lat.index(13, 20));
        assert!((ev.value_at(x1, x2) - st.field.get(13, 20).re).abs() < 1e-15);
    }
}
