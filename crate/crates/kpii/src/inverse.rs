//! Inverse side: the operators T and 𝒞 on a spectral lattice, the Neumann solve of m = 1 + 𝒞Tm
//! at a space-time point, and the reconstruction u = u₁ + u₂,₀ + u₂,₁.
//!
//! Integrals over the ζ-plane are carried out in ξ variables. With p_λ(ξ) = −4πiξ₁(ζ(ξ) − λ) the
//! Cauchy kernel becomes −(1/π)·dA(ζ)/(ζ − λ) = 2πi·sgn(ξ₁)/p_λ(ξ) dξ, so the cell averages of
//! 1/p_λ from the forward side also regularise 𝒞.

use crate::filon::{phase_weights, point_phases};
use crate::forward::{cell_average_inv_p, p_lambda, ScatteringGrid};
use crate::lattice::Lattice2D;
use crate::{KpError, Result, C64, TAU};
use rayon::prelude::*;
use std::f64::consts::PI;

const BLOCK: i64 = 2;

/// How e^{iΘ(ξ_k; x)} is represented inside lattice sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// Point samples; adequate while the phase is resolved by the lattice (small |x|, t).
    Point,
    /// Hat-averaged weights from product integration (see [`crate::filon`]).
    Hat,
}

#[derive(Debug, Clone, Copy)]
pub struct InverseOptions {
    pub tol: f64,
    pub n_max: usize,
    pub phase_mode: PhaseMode,
    /// Base step of the centred x₁-difference.
    pub dx1_step: f64,
    pub dx1_tol: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { tol: 1e-12, n_max: 100, phase_mode: PhaseMode::Hat, dx1_step: 0.02, dx1_tol: 1e-4 }
    }
}

/// (λ̄ − λ)x₁ + (λ̄² − λ²)x₂ + (λ̄³ − λ³)x₃, purely imaginary.
pub fn t_exponent(lambda: C64, x: [f64; 3]) -> C64 {
    let lb = lambda.conj();
    (lb - lambda) * x[0] + (lb * lb - lambda * lambda) * x[1] + (lb * lb * lb - lambda * lambda * lambda) * x[2]
}

/// 2πi·sgn(ξ₁)·[1/p_λ] over the lattice cells, with exact cell averages in a block of cells around
/// each root of p_λ; multiplied by the cell area this is one row of the 𝒞 quadrature.
pub fn cauchy_row(lat: Lattice2D, lambda: C64) -> Vec<C64> {
    let [n1, n2] = lat.count;
    let (d1, d2) = (lat.spacing(0), lat.spacing(1));
    let mut row: Vec<C64> = (0..lat.len())
        .map(|k| {
            let (a, b) = lat.point(k);
            let p = p_lambda(lambda, a, b);
            if p == C64::new(0.0, 0.0) {
                C64::new(0.0, 0.0)
            } else {
                p.inv()
            }
        })
        .collect();
    let roots = [(0.0, 0.0), (-lambda.im / PI, -2.0 * lambda.re * lambda.im / PI)];
    let mut done: Vec<usize> = Vec::new();
    // cells whose centre lies within (BLOCK + ½) cells of a root; symmetric under ξ ↦ −ξ
    let reach = BLOCK as f64 + 0.5;
    for (r1, r2) in roots {
        let c1 = ((r1 + 0.5 * lat.length[0]) / d1 - 0.5).round() as i64;
        let c2 = ((r2 + 0.5 * lat.length[1]) / d2 - 0.5).round() as i64;
        for i in c1 - BLOCK - 1..=c1 + BLOCK + 1 {
            for j in c2 - BLOCK - 1..=c2 + BLOCK + 1 {
                if i < 0 || j < 0 || i >= n1 as i64 || j >= n2 as i64 {
                    continue;
                }
                let k = lat.index(i as usize, j as usize);
                let (a, b) = lat.point(k);
                if (a - r1).abs() >= reach * d1 || (b - r2).abs() >= reach * d2 || done.contains(&k) {
                    continue;
                }
                row[k] = cell_average_inv_p(lambda, a, b, d1, d2);
                done.push(k);
            }
        }
    }
    let area = lat.cell_area();
    for (k, z) in row.iter_mut().enumerate() {
        let s = lat.point(k).0.signum();
        *z *= C64::new(0.0, TAU * s * area);
    }
    row
}

/// 𝒞φ(λ) = −(1/π)∬ φ(ζ)/(ζ − λ) dA(ζ) for φ sampled on the ξ-lattice.
pub fn apply_c(lat: Lattice2D, phi: &[C64], lambda_eval: C64) -> Result<C64> {
    if phi.len() != lat.len() {
        return Err(KpError::ShapeMismatch("apply_C: φ does not match the lattice".into()));
    }
    Ok(cauchy_row(lat, lambda_eval).iter().zip(phi).map(|(w, f)| w * f).sum())
}

/// The x-independent matrix of 𝒞 restricted to lattice nodes.
#[derive(Debug, Clone)]
pub struct CauchyMatrix {
    pub lattice: Lattice2D,
    pub data: Vec<C64>,
}

impl CauchyMatrix {
    pub fn new(lat: Lattice2D) -> Result<Self> {
        let rows: Vec<Vec<C64>> = (0..lat.len())
            .into_par_iter()
            .map(|i| {
                let (a, b) = lat.point(i);
                let lambda = crate::spectral::zeta_from_xi(a, b).expect("cell-centred lattice avoids ξ₁ = 0");
                cauchy_row(lat, lambda)
            })
            .collect();
        Ok(Self { lattice: lat, data: rows.concat() })
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.lattice.len();
        self.data.par_chunks(n).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

/// (Tφ)_k = s_k·E_k·φ(refl k) (or φ_k when `conj_flip` is false).
pub fn apply_t(grid: &ScatteringGrid, phi: &[C64], weights: &[C64], conj_flip: bool) -> Vec<C64> {
    let lat = grid.xi_lattice;
    (0..lat.len())
        .map(|k| {
            let src = if conj_flip { lat.reflect(k) } else { k };
            grid.values[k] * weights[k] * phi[src]
        })
        .collect()
}

/// T with point phases e^{exponent(λ_k, x)}, as written in the operator's definition.
pub fn apply_t_point(grid: &ScatteringGrid, phi: &[C64], x: [f64; 3], conj_flip: bool) -> Vec<C64> {
    apply_t(grid, phi, &point_phases(grid.xi_lattice, x), conj_flip)
}

#[derive(Debug, Clone)]
pub struct EigenfunctionBatch {
    pub position: [f64; 3],
    pub lattice: Lattice2D,
    pub values: Vec<C64>,
    pub order: usize,
    pub residual: f64,
    /// Norm of each Neumann term (𝒞T)ⁿ1, n ≥ 1.
    pub term_norms: Vec<f64>,
}

impl EigenfunctionBatch {
    pub fn max_deviation(&self) -> f64 {
        self.values.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionValue {
    pub u1: C64,
    pub u20: C64,
    pub u21: C64,
    pub total: C64,
    pub imag_residue: f64,
}

impl ReconstructionValue {
    fn new(u1: C64, u20: C64, u21: C64) -> Self {
        let total = u1 + u20 + u21;
        Self { u1, u20, u21, total, imag_residue: total.im.abs() }
    }
}

/// Derivative estimate with its Richardson error.
#[derive(Debug, Clone)]
pub struct Dx1Result {
    pub values: Vec<C64>,
    pub coarse: Vec<C64>,
    pub fine: Vec<C64>,
    pub error_estimate: f64,
}

/// Centred differences with steps h and h/2 combined by Richardson extrapolation.
pub fn richardson_dx1(f: &mut dyn FnMut(f64) -> Result<Vec<C64>>, x1: f64, h: f64, tol: f64) -> Result<Dx1Result> {
    let fp = f(x1 + h)?;
    let fm = f(x1 - h)?;
    let gp = f(x1 + 0.5 * h)?;
    let gm = f(x1 - 0.5 * h)?;
    let coarse: Vec<C64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let fine: Vec<C64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / h).collect();
    let values: Vec<C64> = coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    let error_estimate = coarse.iter().zip(&fine).map(|(c, f)| (f - c).norm() / 3.0).fold(0.0, f64::max);
    if error_estimate > 10.0 * tol {
        return Err(KpError::StepTooLarge(error_estimate));
    }
    Ok(Dx1Result { values, coarse, fine, error_estimate })
}

/// Scattering grid plus the precomputed 𝒞 matrix: everything needed to evaluate m and u at any x.
pub struct InverseSolver {
    pub grid: ScatteringGrid,
    pub cauchy: CauchyMatrix,
    pub options: InverseOptions,
    /// Cubic resampling of `grid` used for the linear term only (see [`Self::with_u1_resampling`]).
    pub u1_grid: Option<ScatteringGrid>,
}

impl InverseSolver {
    pub fn new(grid: ScatteringGrid, options: InverseOptions) -> Result<Self> {
        let cauchy = CauchyMatrix::new(grid.xi_lattice)?;
        Ok(Self { grid, cauchy, options, u1_grid: None })
    }

    /// Evaluates u₁ on the grid resampled `factor`× finer by [`ScatteringGrid::refined`], so the
    /// linear term sees a cubic rather than bilinear extension of s_c. The Neumann corrections
    /// stay on the base lattice.
    pub fn with_u1_resampling(mut self, factor: usize) -> Result<Self> {
        self.u1_grid = if factor > 1 { Some(self.grid.refined(factor)?) } else { None };
        Ok(self)
    }

    pub fn lattice(&self) -> Lattice2D {
        self.grid.xi_lattice
    }

    pub fn weights(&self, x: [f64; 3]) -> Result<Vec<C64>> {
        match self.options.phase_mode {
            PhaseMode::Point => Ok(point_phases(self.lattice(), x)),
            PhaseMode::Hat => phase_weights(self.lattice(), x),
        }
    }

    /// Neumann iteration m ← 1 + 𝒞(Tm) with precomputed phase weights.
    pub fn neumann_with(&self, x: [f64; 3], weights: &[C64]) -> Result<EigenfunctionBatch> {
        let lat = self.lattice();
        let one = C64::new(1.0, 0.0);
        let mut m = vec![one; lat.len()];
        let mut term_norms = Vec::new();
        if self.grid.max_abs() == 0.0 {
            return Ok(EigenfunctionBatch { position: x, lattice: lat, values: m, order: 0, residual: 0.0, term_norms });
        }
        let mut prev = f64::INFINITY;
        let mut bad = 0;
        for n in 1..=self.options.n_max {
            let tm = apply_t(&self.grid, &m, weights, true);
            let cm = self.cauchy.apply(&tm);
            let mut diff: f64 = 0.0;
            for (mm, c) in m.iter_mut().zip(&cm) {
                let next = one + c;
                diff = diff.max((next - *mm).norm());
                *mm = next;
            }
            term_norms.push(diff);
            if diff >= prev {
                bad += 1;
                if bad >= 2 {
                    return Err(KpError::NoContraction { ratio: diff / prev, iterations: n });
                }
            } else {
                bad = 0;
            }
            prev = diff;
            if diff < self.options.tol {
                return Ok(EigenfunctionBatch { position: x, lattice: lat, values: m, order: n, residual: diff, term_norms });
            }
        }
        Err(KpError::MaxIterExceeded { max_iter: self.options.n_max, residual: prev })
    }

    pub fn neumann_m(&self, x: [f64; 3]) -> Result<EigenfunctionBatch> {
        let w = self.weights(x)?;
        self.neumann_with(x, &w)
    }

    /// ∂_{x₁}m at every lattice node by Richardson-extrapolated centred differences.
    pub fn dx1_m(&self, x: [f64; 3]) -> Result<Dx1Result> {
        if self.grid.max_abs() == 0.0 {
            let z = vec![C64::new(0.0, 0.0); self.lattice().len()];
            return Ok(Dx1Result { values: z.clone(), coarse: z.clone(), fine: z, error_estimate: 0.0 });
        }
        let mut f = |x1: f64| -> Result<Vec<C64>> { Ok(self.neumann_m([x1, x[1], x[2]])?.values) };
        richardson_dx1(&mut f, x[0], self.options.dx1_step, self.options.dx1_tol * self.grid.max_abs().max(1e-300))
    }

    /// u₁, u₂,₀, u₂,₁ at x.
    pub fn reconstruct_u(&self, x: [f64; 3]) -> Result<ReconstructionValue> {
        let w = self.weights(x)?;
        let m = self.neumann_with(x, &w)?;
        let dm = self.dx1_m(x)?;
        let mut r = self.combine(&w, &m.values, &dm.values);
        if self.u1_grid.is_some() {
            r = ReconstructionValue::new(self.reconstruct_u1(x)?, r.u20, r.u21);
        }
        Ok(r)
    }

    /// Only the linear term u₁ (no Neumann solve).
    pub fn reconstruct_u1(&self, x: [f64; 3]) -> Result<C64> {
        let grid = self.u1_grid.as_ref().unwrap_or(&self.grid);
        let lat = grid.xi_lattice;
        let w = match self.options.phase_mode {
            PhaseMode::Point => point_phases(lat, x),
            PhaseMode::Hat => phase_weights(lat, x)?,
        };
        let area = lat.cell_area();
        Ok((0..lat.len()).map(|k| C64::new(0.0, -TAU * lat.point(k).0.signum()) * grid.values[k] * w[k] * area).sum())
    }

    fn combine(&self, w: &[C64], m: &[C64], dm: &[C64]) -> ReconstructionValue {
        let lat = self.lattice();
        let area = lat.cell_area();
        let (mut u1, mut u20, mut u21) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for k in 0..lat.len() {
            let xi1 = lat.point(k).0;
            let r = lat.reflect(k);
            let base = self.grid.values[k] * w[k] * area;
            let lin = C64::new(0.0, -TAU * xi1.signum()) * base;
            u1 += lin;
            u20 += lin * (m[r] - 1.0);
            u21 -= base * dm[r] / xi1.abs();
        }
        ReconstructionValue::new(u1, u20, u21)
    }
}
