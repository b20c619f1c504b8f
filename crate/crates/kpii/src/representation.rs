//! The x′/ξ″ representation of 𝒞T1: the kernel 𝔪₀, the amplitude ℱ, the ξ″ integral against
//! e^{2πit𝔖♯}, and a cross-check against the spectral quadrature of 𝒞T1.

use crate::asymptotics::cone_frame;
use crate::forward::{forward_sweep, ForwardSweep, InitialData};
use crate::inverse::{apply_c, apply_t, InverseSolver};
use crate::lattice::{ComplexField2D, Lattice2D};
use crate::quad::gl;
use crate::spectral::{phase_s0, REGIME_THRESHOLD_DEFAULT};
use crate::{KpError, Result, C64, TAU};
use rayon::prelude::*;
use std::f64::consts::PI;

/// 𝔪₀ on the physical lattice with its construction data.
#[derive(Debug, Clone)]
pub struct KernelField {
    pub mfrak0: ComplexField2D,
    /// M(ξ) = (m₀(·; ζ̄(ξ)) − 1)^(ξ) on the spectral lattice.
    pub diagonal: Vec<C64>,
    pub xi_lattice: Lattice2D,
    pub solve_tol: f64,
    pub max_iterations: usize,
    /// ‖𝔪₀ − 1‖_∞ / ε₀.
    pub k_ratio: f64,
}

impl KernelField {
    pub fn deviation(&self) -> f64 {
        self.mfrak0.data.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max)
    }
}

/// Solves m₀ at every lattice ξ and assembles 𝔪₀ = 1 + M^∨.
pub fn build_mfrak0(u0: &InitialData, xi_lattice: Lattice2D, tol: f64) -> Result<KernelField> {
    let sweep = forward_sweep(u0, xi_lattice, tol)?;
    kernel_from_sweep(u0, &sweep, tol)
}

/// 𝔪₀ from an existing forward sweep. Since ζ̄(ξ) = ζ(−ξ), M at node k is the reflected node's
/// transform sampled at −ξ_{refl k} = ξ_k.
pub fn kernel_from_sweep(u0: &InitialData, sweep: &ForwardSweep, tol: f64) -> Result<KernelField> {
    let xl = sweep.grid.xi_lattice;
    let diagonal: Vec<C64> = (0..xl.len()).map(|k| sweep.m0_hat_reflected[xl.reflect(k)]).collect();
    let plat = u0.lattice();
    let nodes: Vec<(f64, f64)> = (0..xl.len()).map(|k| xl.point(k)).collect();
    let area = xl.cell_area();
    let data: Vec<C64> = (0..plat.len())
        .into_par_iter()
        .map(|p| {
            let (y1, y2) = plat.point(p);
            let s: C64 = nodes
                .iter()
                .zip(&diagonal)
                .map(|(&(a, b), m)| m * C64::from_polar(1.0, TAU * (y1 * a + y2 * b)))
                .sum();
            C64::new(1.0, 0.0) + s * area
        })
        .collect();
    let mfrak0 = ComplexField2D::from_data(plat, crate::lattice::Space::Physical, data)?;
    let mut k = KernelField { mfrak0, diagonal, xi_lattice: xl, solve_tol: tol, max_iterations: sweep.max_iterations, k_ratio: 0.0 };
    k.k_ratio = if u0.epsilon0 > 0.0 { k.deviation() / u0.epsilon0 } else { 0.0 };
    Ok(k)
}

/// ℱ = (−1)·sgn(c)·θ(−c(ξ″ − κ)(ξ″ + κ))·e^{4π²c(ξ″ − κ)(ξ″ + κ)} with c = x′₂ + 3tλ′_R, κ = λ′_I/2π
/// and θ(0) = 0.
pub fn amplitude_f(t: f64, lambda_prime: C64, x2p: f64, xi1pp: f64) -> f64 {
    let c = x2p + 3.0 * t * lambda_prime.re;
    let kappa = lambda_prime.im / TAU;
    let q = c * (xi1pp - kappa) * (xi1pp + kappa);
    if q < 0.0 {
        -c.signum() * (4.0 * PI * PI * q).exp()
    } else {
        0.0
    }
}

/// 𝔖♯ = 4π²ξ″³ + (a − 3λ′_R² − (x′₁ + 2λ′_R x′₂)/t)ξ″.
pub fn phase_sharp(a: f64, t: f64, x1p: f64, x2p: f64, lambda_r: f64, xi: f64) -> f64 {
    4.0 * PI * PI * xi * xi * xi + (a - 3.0 * lambda_r * lambda_r - (x1p + 2.0 * lambda_r * x2p) / t) * xi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationOptions {
    /// Smallest truncation radius of the ξ″ integral where the weight decays slowly.
    pub xi_min: f64,
    /// Hard cap on the truncation radius.
    pub xi_cap: f64,
    /// The tail beyond the truncation radius X is taken from two integration-by-parts terms once
    /// |ψ′(X)|·X exceeds this (ψ is the complex exponent).
    pub tail_threshold: f64,
    /// Gauss–Legendre nodes per panel; panels are at most two oscillations wide.
    pub panel_nodes: usize,
    /// Relative refinement difference above which the inner integral is declared non-convergent.
    pub refine_tol: f64,
}

impl Default for RepresentationOptions {
    fn default() -> Self {
        Self { xi_min: 0.5, xi_cap: 64.0, tail_threshold: 2000.0, panel_nodes: 16, refine_tol: 1e-6 }
    }
}

/// Quadrature of ∫ e^{2πit(4π²ξ³ + b₀ξ)}ℱ dξ for one x′₂ row: nodes with b-independent weights,
/// plus the tail endpoints (if any) that need the integration-by-parts correction.
struct RowRule {
    nodes: Vec<(f64, C64)>,
    tails: Vec<f64>,
    c: f64,
    kappa2: f64,
}

fn row_rule(t: f64, c: f64, kappa: f64, b_max: f64, opts: &RepresentationOptions, refine: usize) -> RowRule {
    let k = kappa.abs();
    let mut intervals = Vec::new();
    let mut tails = Vec::new();
    let gauss = 4.0 * PI * PI * c.abs();
    if c > 0.0 {
        intervals.push((-k, k));
    } else if c < 0.0 {
        let reach = (k * k + 40.0 / gauss).sqrt();
        // beyond every stationary point of the cubic phase, then out until the tail expansion holds
        let mut edge = opts.xi_min.max(1.5 * k).max((2.0 * b_max / (12.0 * PI * PI)).sqrt());
        let slope = |x: f64| {
            let osc = TAU * t * (12.0 * PI * PI * x * x - b_max).max(0.0);
            osc.hypot(2.0 * gauss * x)
        };
        while edge < reach && edge < opts.xi_cap && slope(edge) * edge < opts.tail_threshold {
            edge *= 1.25;
        }
        let edge = edge.min(opts.xi_cap);
        if edge < reach {
            tails.push(edge);
            tails.push(-edge);
        } 
        let edge = edge.min(reach).max(k);
        intervals.push((-edge, -k));
        intervals.push((k, edge));
    }
    let rule = gl(opts.panel_nodes);
    let mut nodes = Vec::new();
    let rate = |x: f64| TAU * t * (12.0 * PI * PI * x * x + b_max) + 2.0 * gauss * x.abs();
    for (lo, hi) in intervals {
        let mut a = lo;
        while a < hi {
            let far = a.abs().max((a + 0.25).min(hi).abs());
            let r = rate(far).max(1.0);
            let cap = 0.25 * far.max(1.0);
            let width = (2.0 * TAU / r / refine as f64).min(cap).min(hi - a);
            let b = if hi - (a + width) < 1e-3 * width { hi } else { a + width };
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for &(x, w) in rule {
                let xi = mid + half * x;
                let g = amplitude_weight(c, k * k, xi);
                let ph = TAU * t * 4.0 * PI * PI * xi * xi * xi;
                nodes.push((xi, C64::from_polar(w * half * g, ph)));
            }
            a = b;
        }
    }
    RowRule { nodes, tails, c, kappa2: k * k }
}

/// ℱ written with κ² for the node loops.
fn amplitude_weight(c: f64, kappa2: f64, xi: f64) -> f64 {
    let q = c * (xi * xi - kappa2);
    if q < 0.0 {
        -c.signum() * (4.0 * PI * PI * q).exp()
    } else {
        0.0
    }
}

impl RowRule {
    /// ∫ e^{2πit(4π²ξ³ + bξ)}ℱ dξ for every b = b₀ − x₁/t, x₁ = x1_start + i·dx1.
    fn evaluate(&self, t: f64, b0: f64, x1_start: f64, dx1: f64, count: usize, out: &mut [C64]) {
        for z in out.iter_mut().take(count) {
            *z = C64::new(0.0, 0.0);
        }
        for &(xi, w) in &self.nodes {
            // e^{2πi(t b₀ − x₁)ξ} along the row by recurrence
            let mut e = w * C64::from_polar(1.0, TAU * (t * b0 - x1_start) * xi);
            let step = C64::from_polar(1.0, -TAU * dx1 * xi);
            for z in out.iter_mut().take(count) {
                *z += e;
                e *= step;
            }
        }
        if self.tails.is_empty() {
            return;
        }
        for (i, z) in out.iter_mut().take(count).enumerate() {
            let b = b0 - (x1_start + i as f64 * dx1) / t;
            for &edge in &self.tails {
                *z += self.tail(t, b, edge);
            }
        }
    }

    /// ∫ from `edge` to ±∞ of e^{ψ}, ψ = iφ + log|ℱ|, by two integration-by-parts terms:
    /// −e^{ψ}(1/ψ′ + ψ″/ψ′³) at the edge, oriented outward.
    fn tail(&self, t: f64, b: f64, edge: f64) -> C64 {
        let g = amplitude_weight(self.c, self.kappa2, edge);
        let i = C64::new(0.0, 1.0);
        let gauss = 4.0 * PI * PI * self.c;
        let phi = TAU * t * (4.0 * PI * PI * edge.powi(3) + b * edge);
        let d1 = i * TAU * t * (12.0 * PI * PI * edge * edge + b) + 2.0 * gauss * edge;
        let d2 = i * TAU * t * 24.0 * PI * PI * edge + 2.0 * gauss;
        let value = -C64::from_polar(g, phi) * (1.0 / d1 - d2 / (d1 * d1 * d1));
        if edge > 0.0 {
            value
        } else {
            -value
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ct1Value {
    pub value: C64,
    /// Difference to the same sum with panels half as wide.
    pub refinement: f64,
}

/// e^{iπtS₀(a;λ′)}·∬[u₀𝔪₀](x′₁ − (2t₂/3)x′₂, x′₂)e^{iλ′_I(x′₁+2λ′_R x′₂)}∫e^{2πit𝔖♯}ℱ dξ″ dx′.
///
/// The x′ integral runs over y = (x′₁ − (2t₂/3)x′₂, x′₂): lattice nodes in y₁, and in y₂ Gauss panels
/// graded towards x′₂ = −3tλ′_R, where the ξ″ integral jumps and (for small t) blows up like
/// |x′₂ + 3tλ′_R|^{−1/2}. u₀𝔪₀ is interpolated in y₂ by its lattice Fourier series.
/// `dx1_variant` replaces u₀𝔪₀ by its spectral x₁-derivative.
pub fn ct1_representation(
    u0: &InitialData,
    kernel: &KernelField,
    x: [f64; 3],
    lambda_prime: C64,
    dx1_variant: bool,
    opts: &RepresentationOptions,
) -> Result<Ct1Value> {
    let frame = cone_frame(x, REGIME_THRESHOLD_DEFAULT)?;
    if lambda_prime.im == 0.0 {
        return Err(KpError::RealAxisUndefined);
    }
    let mut f = u0.field.mul_pointwise(&kernel.mfrak0)?;
    if dx1_variant {
        f = f.derivative(1, 0)?;
    }
    let (t, t2, a) = (frame.t, frame.t2, frame.a);
    let (lr, li) = (lambda_prime.re, lambda_prime.im);
    let lat = f.lattice;
    let [n1, n2] = lat.count;
    let (h1, h2) = (lat.spacing(0), lat.spacing(1));
    let fmax = f.max_abs();
    if fmax == 0.0 {
        return Ok(Ct1Value { value: C64::new(0.0, 0.0), refinement: 0.0 });
    }
    let columns = ColumnSeries::new(&f);
    let live: Vec<usize> = (0..n1).filter(|&i| (0..n2).any(|j| f.get(i, j).norm() > 1e-17 * fmax)).collect();
    let y1s = lat.coords(0);
    let x1_extent = y1s.iter().fold(0.0f64, |m, y| m.max(y.abs())) * (1.0 + 2.0 * t2.abs() / 3.0);
    let b_max = a.abs() + 3.0 * lr * lr + (x1_extent + 2.0 * lr.abs() * 0.5 * lat.length[1]) / t;
    let kappa = li / TAU;
    let rule = graded_rule(-0.5 * lat.length[1], 0.5 * lat.length[1], h2, -3.0 * t * lr);
    let rows: Vec<(C64, C64)> = rule
        .par_iter()
        .map(|&(y2, wy)| {
            let col = columns.row(y2);
            if live.iter().all(|&i| col[i].norm() < 1e-17 * fmax) {
                return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            }
            let c = y2 + 3.0 * t * lr;
            let b0 = a - 3.0 * lr * lr - 2.0 * lr * y2 / t;
            let x1_start = y1s[0] + 2.0 * t2 / 3.0 * y2;
            let mut acc = [C64::new(0.0, 0.0); 2];
            let mut inner = vec![C64::new(0.0, 0.0); n1];
            for (slot, refine) in [(0usize, 1usize), (1, 2)] {
                let rr = row_rule(t, c, kappa, b_max, opts, refine);
                rr.evaluate(t, b0, x1_start, h1, n1, &mut inner);
                for &i in &live {
                    let x1p = x1_start + i as f64 * h1;
                    let lin = C64::from_polar(1.0, li * (x1p + 2.0 * lr * y2));
                    acc[slot] += col[i] * lin * inner[i];
                }
            }
            (acc[0] * wy, acc[1] * wy)
        })
        .collect();
    let (mut coarse, mut fine) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for (c, f) in rows {
        coarse += c;
        fine += f;
    }
    let pre = C64::from_polar(h1, PI * t * phase_s0(a, lambda_prime));
    let (coarse, fine) = (coarse * pre, fine * pre);
    let refinement = (fine - coarse).norm();
    if refinement > opts.refine_tol * fine.norm().max(1e-3 * u0.epsilon0) {
        return Err(KpError::InnerIntegralNonConvergent(format!(
            "panel halving changed the value by {refinement:.3e} (value {:.3e})",
            fine.norm()
        )));
    }
    Ok(Ct1Value { value: fine, refinement })
}

/// Trigonometric interpolation of a lattice field along its second axis.
struct ColumnSeries {
    coeffs: Vec<Vec<C64>>,
    origin: f64,
    period: f64,
    modes: Vec<f64>,
}

impl ColumnSeries {
    fn new(f: &ComplexField2D) -> Self {
        let lat = f.lattice;
        let n = lat.count[1];
        let modes: Vec<f64> = (0..n).map(|m| if m < n / 2 { m as f64 } else { m as f64 - n as f64 }).collect();
        let coeffs = (0..lat.count[0])
            .map(|i| {
                modes
                    .iter()
                    .map(|&m| {
                        let s: C64 = (0..n).map(|j| f.get(i, j) * C64::from_polar(1.0, -TAU * m * j as f64 / n as f64)).sum();
                        // the Nyquist mode is split evenly between ±n/2
                        if m == -(n as f64) / 2.0 { s / (2.0 * n as f64) } else { s / n as f64 }
                    })
                    .collect()
            })
            .collect();
        Self { coeffs, origin: lat.coord(1, 0), period: lat.length[1], modes }
    }

    /// f(y₁_i, y₂) for every i.
    fn row(&self, y2: f64) -> Vec<C64> {
        let u = (y2 - self.origin) / self.period;
        let e: Vec<C64> = self.modes.iter().map(|&m| C64::from_polar(1.0, TAU * m * u)).collect();
        let nyq = self.modes.len() / 2;
        self.coeffs
            .iter()
            .map(|c| {
                let mut s: C64 = c.iter().zip(&e).map(|(a, b)| a * b).sum();
                if self.modes.len() % 2 == 0 {
                    s += c[nyq] * C64::from_polar(1.0, -TAU * self.modes[nyq] * u);
                }
                s
            })
            .collect()
    }
}

/// 8-point Gauss panels of width ≤ h on [lo, hi], geometrically graded on both sides of `sing`.
fn graded_rule(lo: f64, hi: f64, h: f64, sing: f64) -> Vec<(f64, f64)> {
    let mut breaks: Vec<f64> = Vec::new();
    let n = ((hi - lo) / h).round().max(1.0) as usize;
    for k in 0..=n {
        breaks.push(lo + (hi - lo) * k as f64 / n as f64);
    }
    if sing > lo && sing < hi {
        breaks.push(sing);
        for k in 1..=30 {
            let d = h * 0.5f64.powi(k);
            for p in [sing - d, sing + d] {
                if p > lo && p < hi {
                    breaks.push(p);
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        crate::quad::push_panel(w[0], w[1], 8, &mut out);
    }
    out
}

/// 𝒞T1 at (x, λ′ + t₂/3) by the spectral quadrature of the inverse problem.
pub fn ct1_direct(solver: &InverseSolver, x: [f64; 3], lambda_prime: C64) -> Result<C64> {
    let frame = cone_frame(x, REGIME_THRESHOLD_DEFAULT)?;
    let w = solver.weights(x)?;
    let lat = solver.lattice();
    let one = vec![C64::new(1.0, 0.0); lat.len()];
    let t1 = apply_t(&solver.grid, &one, &w, true);
    apply_c(lat, &t1, lambda_prime + frame.t2 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    pub representation: C64,
    pub direct: C64,
    pub discrepancy: f64,
}

/// |rep − direct| / max(|direct|, 10⁻³ε₀).
pub fn ct1_crosscheck(
    solver: &InverseSolver,
    u0: &InitialData,
    kernel: &KernelField,
    x: [f64; 3],
    lambda_prime: C64,
    opts: &RepresentationOptions,
) -> Result<CrossCheck> {
    let rep = ct1_representation(u0, kernel, x, lambda_prime, false, opts)?.value;
    let direct = ct1_direct(solver, x, lambda_prime)?;
    let floor = (1e-3 * u0.epsilon0).max(f64::MIN_POSITIVE);
    let discrepancy = if rep == direct { 0.0 } else { (rep - direct).norm() / direct.norm().max(floor) };
    Ok(CrossCheck { representation: rep, direct, discrepancy })
}
