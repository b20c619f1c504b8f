//! Forward transform: the eigenfunction m₀ from (m − 1)^ = −(u₀m)^/p_λ and the scattering data
//! s_c(λ) = sgn(λ_I)/(2πi)·(u₀m₀)^(ξ(λ)).

use crate::lattice::{ComplexField2D, FftPlan2D, Lattice2D, Space};
use crate::quad::gl;
use crate::spectral::SpectralParam;
use crate::{KpError, Result, C64, TAU};
use rayon::prelude::*;
use std::f64::consts::PI;

pub const TOL_DEFAULT: f64 = 1e-10;
pub const MAX_ITER_DEFAULT: usize = 60;

/// Half-width (in cells) of the block around each root of p_λ that gets exact cell averages.
const SINGULAR_BLOCK: i64 = 2;

/// Real initial datum with its measured size.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub field: ComplexField2D,
    pub epsilon0: f64,
    /// (p, q) for which the weighted norm was evaluated and found finite.
    pub regularity: Option<(u32, u32)>,
}

impl InitialData {
    pub fn new(field: ComplexField2D) -> Result<Self> {
        if field.space != Space::Physical {
            return Err(KpError::InvalidArgument("initial data must be a physical field".into()));
        }
        let scale = field.max_abs().max(f64::MIN_POSITIVE);
        if field.max_imag() > 1e-14 * scale.max(1.0) {
            return Err(KpError::InvalidArgument(format!("initial data not real (max |Im| = {:e})", field.max_imag())));
        }
        let mut field = field;
        for z in &mut field.data {
            z.im = 0.0;
        }
        let epsilon0 = field.max_abs().max(field.l1_norm());
        Ok(Self { field, epsilon0, regularity: None })
    }

    /// ε·e^{−π(x₁²+x₂²)}, whose transform is ε·e^{−π|ξ|²}.
    pub fn gaussian(lattice: Lattice2D, eps: f64) -> Self {
        Self::new(ComplexField2D::from_real_fn(lattice, |a, b| eps * (-PI * (a * a + b * b)).exp())).expect("real")
    }

    pub fn zero(lattice: Lattice2D) -> Self {
        Self::new(ComplexField2D::zeros(lattice, Space::Physical)).expect("real")
    }

    /// Evaluates the 𝔐^{p,q} norm and records (p, q) if it is finite.
    pub fn with_regularity(mut self, p: u32, q: u32) -> Result<Self> {
        let n = weighted_norm(&self, p, q)?;
        if !n.is_finite() {
            return Err(KpError::InvalidArgument(format!("weighted norm ({p},{q}) is not finite")));
        }
        self.regularity = Some((p, q));
        Ok(self)
    }

    pub fn lattice(&self) -> Lattice2D {
        self.field.lattice
    }
}

/// p_λ(ξ₁, ξ₂) = (2πiξ₁ + λ)² − (2πiξ₂ + λ²).
pub fn p_lambda(lambda: C64, xi1: f64, xi2: f64) -> C64 {
    let a = C64::new(0.0, TAU * xi1) + lambda;
    a * a - (C64::new(0.0, TAU * xi2) + lambda * lambda)
}

/// The two zeros of p_λ: the origin and ξ(λ).
pub fn green_roots(lambda: &SpectralParam) -> [(f64, f64); 2] {
    [(0.0, 0.0), lambda.xi()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    /// 1/p_λ, or zero when singular.
    pub value: C64,
    pub p: C64,
    pub singular: bool,
}

/// 1/p_λ(ξ) with a singularity flag for |p_λ| below a floor relative to the local scale.
pub fn green_symbol(lambda: &SpectralParam, xi1: f64, xi2: f64) -> GreenValue {
    let l = lambda.lambda;
    let p = p_lambda(l, xi1, xi2);
    let scale = 1.0 + l.norm_sqr() + (TAU * xi1).powi(2) + TAU * xi2.abs();
    if p.norm() < 1e-12 * scale {
        GreenValue { value: C64::new(0.0, 0.0), p, singular: true }
    } else {
        GreenValue { value: p.inv(), p, singular: false }
    }
}

/// Mean of 1/p_λ over [c₁ ± d₁/2] × [c₂ ± d₂/2]. Exact in ξ₂ (p is affine in ξ₂, giving a
/// complex logarithm), Gauss–Legendre in ξ₁ split at the root abscissae.
pub fn cell_average_inv_p(lambda: C64, c1: f64, c2: f64, d1: f64, d2: f64) -> C64 {
    let (a, b) = (c1 - 0.5 * d1, c1 + 0.5 * d1);
    let (lo2, hi2) = (c2 - 0.5 * d2, c2 + 0.5 * d2);
    let mut breaks = vec![a];
    let mut roots = [0.0, -lambda.im / PI];
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for r in roots {
        if r > a + 1e-9 * d1 && r < b - 1e-9 * d1 && r > *breaks.last().unwrap() {
            breaks.push(r);
        }
    }
    breaks.push(b);
    let rule = gl(16);
    let mut acc = C64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for &(x, wt) in rule {
            let s = mid + half * x;
            let q = C64::new(0.0, TAU * s) + lambda;
            let big_a = q * q - lambda * lambda;
            // ∫ dξ₂ / (A − 2πiξ₂) = −(1/2πi) log((A − 2πi hi)/(A − 2πi lo))
            let num = big_a - C64::new(0.0, TAU * hi2);
            let den = big_a - C64::new(0.0, TAU * lo2);
            let v = -(num / den).ln() / C64::new(0.0, TAU);
            acc += v * (wt * half);
        }
    }
    acc / (d1 * d2)
}

/// The multiplier −1/p_λ at the FFT frequencies of a physical lattice. Cells in a 5×5 block
/// around each root carry the exact cell average; Nyquist modes are zero.
#[derive(Debug, Clone)]
pub struct GreenMultiplier {
    pub lattice: Lattice2D,
    pub lambda: SpectralParam,
    pub data: Vec<C64>,
    /// Storage indices whose value came from a cell average.
    pub averaged: Vec<usize>,
}

impl GreenMultiplier {
    pub fn new(lattice: Lattice2D, lambda: SpectralParam) -> Self {
        let [n1, n2] = lattice.count;
        let (d1, d2) = (1.0 / lattice.length[0], 1.0 / lattice.length[1]);
        let mut data = vec![C64::new(0.0, 0.0); lattice.len()];
        for i in 0..n1 {
            for j in 0..n2 {
                if lattice.is_nyquist(0, i) || lattice.is_nyquist(1, j) {
                    continue;
                }
                let g = green_symbol(&lambda, lattice.frequency(0, i), lattice.frequency(1, j));
                data[lattice.index(i, j)] = -g.value;
            }
        }
        let mut averaged = Vec::new();
        let half = [(n1 / 2) as i64, (n2 / 2) as i64];
        for (r1, r2) in green_roots(&lambda) {
            let (k1, k2) = ((r1 / d1).round() as i64, (r2 / d2).round() as i64);
            for m1 in k1 - SINGULAR_BLOCK..=k1 + SINGULAR_BLOCK {
                for m2 in k2 - SINGULAR_BLOCK..=k2 + SINGULAR_BLOCK {
                    if m1 <= -half[0] || m1 >= half[0] || m2 <= -half[1] || m2 >= half[1] {
                        continue;
                    }
                    let i = m1.rem_euclid(n1 as i64) as usize;
                    let j = m2.rem_euclid(n2 as i64) as usize;
                    let k = lattice.index(i, j);
                    if averaged.contains(&k) {
                        continue;
                    }
                    data[k] = -cell_average_inv_p(lambda.lambda, m1 as f64 * d1, m2 as f64 * d2, d1, d2);
                    averaged.push(k);
                }
            }
        }
        Self { lattice, lambda, data, averaged }
    }

    /// Applies the multiplier to physical samples (in place), using `plan` for the transforms.
    pub fn apply_in_place(&self, plan: &FftPlan2D, data: &mut [C64]) {
        plan.forward(data);
        for (z, g) in data.iter_mut().zip(&self.data) {
            *z *= g;
        }
        plan.inverse(data);
    }

    /// Σ|−1/p_λ|·(1/L₁L₂): the lattice L¹ norm of the multiplier, which bounds
    /// ‖apply_green(φ)‖_∞ by this value times ‖φ̂‖_∞.
    pub fn l1_bound(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum::<f64>() / (self.lattice.length[0] * self.lattice.length[1])
    }
}

/// Inverse transform of (−1/p_λ)·φ̂.
pub fn apply_green(lambda: &SpectralParam, phi: &ComplexField2D) -> Result<ComplexField2D> {
    if phi.space != Space::Physical {
        return Err(KpError::ShapeMismatch("apply_green expects a physical field".into()));
    }
    let g = GreenMultiplier::new(phi.lattice, *lambda);
    let plan = FftPlan2D::new(phi.lattice);
    let mut data = phi.data.clone();
    g.apply_in_place(&plan, &mut data);
    ComplexField2D::from_data(phi.lattice, Space::Physical, data)
}

#[derive(Debug, Clone)]
pub struct M0Solution {
    pub m: ComplexField2D,
    pub iterations: usize,
    /// Largest observed ratio of successive update norms.
    pub contraction: f64,
    pub residual: f64,
}

/// Picard iteration m ← 1 + G(u₀m) to `tol` in the sup norm.
pub fn solve_m0(u0: &InitialData, lambda: &SpectralParam, tol: f64, max_iter: usize) -> Result<M0Solution> {
    let lat = u0.lattice();
    let g = GreenMultiplier::new(lat, *lambda);
    let plan = FftPlan2D::new(lat);
    solve_m0_with(u0, &g, &plan, tol, max_iter)
}

pub fn solve_m0_with(
    u0: &InitialData,
    g: &GreenMultiplier,
    plan: &FftPlan2D,
    tol: f64,
    max_iter: usize,
) -> Result<M0Solution> {
    let lat = u0.lattice();
    let one = C64::new(1.0, 0.0);
    let mut m = vec![one; lat.len()];
    let mut buf = vec![C64::new(0.0, 0.0); lat.len()];
    let mut prev = f64::INFINITY;
    let mut contraction: f64 = 0.0;
    let mut bad = 0;
    for it in 1..=max_iter {
        for ((b, u), mm) in buf.iter_mut().zip(&u0.field.data).zip(&m) {
            *b = u * mm;
        }
        g.apply_in_place(plan, &mut buf);
        let mut diff: f64 = 0.0;
        for (mm, b) in m.iter_mut().zip(&buf) {
            let next = one + b;
            diff = diff.max((next - *mm).norm());
            *mm = next;
        }
        if prev.is_finite() && prev > 0.0 {
            let ratio = diff / prev;
            contraction = contraction.max(ratio);
            if ratio >= 1.0 {
                bad += 1;
                if bad >= 2 {
                    return Err(KpError::NoContraction { ratio, iterations: it });
                }
            } else {
                bad = 0;
            }
        }
        prev = diff;
        if diff < tol {
            let field = ComplexField2D::from_data(lat, Space::Physical, m)?;
            return Ok(M0Solution { m: field, iterations: it, contraction, residual: diff });
        }
    }
    Err(KpError::MaxIterExceeded { max_iter, residual: prev })
}

/// s_c(λ) = sgn(λ_I)/(2πi) Σ u₀m₀ e^{−2πix·ξ(λ)} h₁h₂.
pub fn scattering_value(u0: &InitialData, m0: &ComplexField2D, lambda: &SpectralParam) -> Result<C64> {
    if u0.field.lattice != m0.lattice {
        return Err(KpError::ShapeMismatch("m0 and u0 lattices differ".into()));
    }
    let prod = u0.field.mul_pointwise(m0)?;
    let (xi1, xi2) = lambda.xi();
    Ok(prod.fourier_at(xi1, xi2) * lambda.sign() / C64::new(0.0, TAU))
}

/// s_c sampled on a cell-centred ξ-lattice (which never contains ξ₁ = 0). Values carry the
/// sgn(λ_I) factor; nodes with ξ₁ > 0 belong to λ_I < 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringGrid {
    pub xi_lattice: Lattice2D,
    pub values: Vec<C64>,
    /// max |s_c(λ) − conj(s_c(λ̄))| over the lattice.
    pub reality_violation: f64,
}

impl ScatteringGrid {
    pub fn new(xi_lattice: Lattice2D, values: Vec<C64>) -> Result<Self> {
        if values.len() != xi_lattice.len() {
            return Err(KpError::ShapeMismatch(format!("{} values for {} nodes", values.len(), xi_lattice.len())));
        }
        let reality_violation = (0..values.len())
            .map(|k| (values[k] - values[xi_lattice.reflect(k)].conj()).norm())
            .fold(0.0, f64::max);
        Ok(Self { xi_lattice, values, reality_violation })
    }

    pub fn zeros(xi_lattice: Lattice2D) -> Self {
        Self::new(xi_lattice, vec![C64::new(0.0, 0.0); xi_lattice.len()]).expect("sizes match")
    }

    /// Rows with ξ₁ < 0 (λ_I > 0), in ξ₁-ascending order.
    pub fn samples_minus(&self) -> &[C64] {
        &self.values[..self.values.len() / 2]
    }

    /// Rows with ξ₁ > 0 (λ_I < 0).
    pub fn samples_plus(&self) -> &[C64] {
        &self.values[self.values.len() / 2..]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest |s_c| on the outermost ring of the lattice, relative to max |s_c|.
    pub fn boundary_ratio(&self) -> f64 {
        let [n1, n2] = self.xi_lattice.count;
        let mut b: f64 = 0.0;
        for i in 0..n1 {
            for j in 0..n2 {
                if i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1 {
                    b = b.max(self.values[self.xi_lattice.index(i, j)].norm());
                }
            }
        }
        b / self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Clamped bilinear evaluation inside the half-plane of `xi1`; zero outside the lattice box.
    /// Interpolation never crosses ξ₁ = 0.
    pub fn eval(&self, xi1: f64, xi2: f64) -> C64 {
        let lat = self.xi_lattice;
        let (l1, l2) = (0.5 * lat.length[0], 0.5 * lat.length[1]);
        if xi1 == 0.0 || xi1.abs() > l1 || xi2.abs() > l2 {
            return C64::new(0.0, 0.0);
        }
        let [n1, n2] = lat.count;
        let (lo1, hi1) = if xi1 < 0.0 { (0, n1 / 2 - 1) } else { (n1 / 2, n1 - 1) };
        let (w1, i0, i1) = bracket(lat, 0, xi1, lo1, hi1);
        let (w2, j0, j1) = bracket(lat, 1, xi2, 0, n2 - 1);
        let v = |i: usize, j: usize| self.values[lat.index(i, j)];
        v(i0, j0) * ((1.0 - w1) * (1.0 - w2)) + v(i1, j0) * (w1 * (1.0 - w2)) + v(i0, j1) * ((1.0 - w1) * w2)
            + v(i1, j1) * (w1 * w2)
    }

    /// Resamples onto the cell-centred lattice with `factor`× more nodes per axis by tensor
    /// four-point Lagrange interpolation inside each half-plane (one-sided stencils at the edges).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let lat = self.xi_lattice;
        if factor == 1 {
            return Ok(self.clone());
        }
        if factor == 0 || lat.count[0] < 8 || lat.count[1] < 4 {
            return Err(KpError::InvalidArgument(format!("cannot refine a {}x{} grid by {factor}", lat.count[0], lat.count[1])));
        }
        let fine = Lattice2D::new(lat.length[0], lat.length[1], factor * lat.count[0], factor * lat.count[1])?;
        let [n1, n2] = lat.count;
        let c1 = lat.coords(0);
        let c2 = lat.coords(1);
        let st2: Vec<(usize, [f64; 4])> = (0..fine.count[1]).map(|j| lagrange4(&c2, 0, n2, fine.coord(1, j))).collect();
        let mut values = vec![C64::new(0.0, 0.0); fine.len()];
        for i in 0..fine.count[0] {
            let x1 = fine.coord(0, i);
            let (lo, hi) = if x1 < 0.0 { (0, n1 / 2) } else { (n1 / 2, n1) };
            let (s1, w1) = lagrange4(&c1, lo, hi, x1);
            for (j, &(s2, w2)) in st2.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (a, wa) in w1.iter().enumerate() {
                    for (b, wb) in w2.iter().enumerate() {
                        acc += self.values[lat.index(s1 + a, s2 + b)] * (wa * wb);
                    }
                }
                values[fine.index(i, j)] = acc;
            }
        }
        Self::new(fine, values)
    }

    /// s_c at a spectral parameter, via ξ(λ).
    pub fn eval_lambda(&self, lambda: C64) -> C64 {
        let p = crate::spectral::xi_from_zeta(lambda);
        if p.on_real_axis {
            return C64::new(0.0, 0.0);
        }
        self.eval(p.xi1, p.xi2)
    }
}

/// Start index and weights of the four-node Lagrange stencil for `x` among `nodes[lo..hi]`.
fn lagrange4(nodes: &[f64], lo: usize, hi: usize, x: f64) -> (usize, [f64; 4]) {
    let below = nodes[lo..hi].partition_point(|&c| c <= x);
    let start = (lo + below).saturating_sub(2).clamp(lo, hi - 4);
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (x - nodes[start + b]) / (nodes[start + a] - nodes[start + b]);
            }
        }
    }
    (start, w)
}

/// Bracketing nodes and weight along one axis, clamped to [lo, hi].
fn bracket(lat: Lattice2D, axis: usize, x: f64, lo: usize, hi: usize) -> (f64, usize, usize) {
    let h = lat.spacing(axis);
    let f = (x + 0.5 * lat.length[axis]) / h - 0.5;
    if f <= lo as f64 {
        return (0.0, lo, lo);
    }
    if f >= hi as f64 {
        return (0.0, hi, hi);
    }
    let i0 = f.floor() as usize;
    (f - i0 as f64, i0, (i0 + 1).min(hi))
}

/// Everything produced by one sweep of the forward transform over a ξ-lattice.
#[derive(Debug, Clone)]
pub struct ForwardSweep {
    pub grid: ScatteringGrid,
    /// (m₀(·; λ_k) − 1)^ evaluated at −ξ_k, per node k.
    pub m0_hat_reflected: Vec<C64>,
    pub max_iterations: usize,
    pub max_contraction: f64,
    pub max_m0_deviation: f64,
}

pub fn forward_sweep(u0: &InitialData, xi_lattice: Lattice2D, tol: f64) -> Result<ForwardSweep> {
    let lat = u0.lattice();
    let plan = FftPlan2D::new(lat);
    let per_node: Vec<Result<(C64, C64, usize, f64, f64)>> = (0..xi_lattice.len())
        .into_par_iter()
        .map(|k| {
            let (xi1, xi2) = xi_lattice.point(k);
            let lambda = SpectralParam::from_xi(xi1, xi2)?;
            let g = GreenMultiplier::new(lat, lambda);
            let sol = solve_m0_with(u0, &g, &plan, tol, MAX_ITER_DEFAULT)?;
            let s = scattering_value(u0, &sol.m, &lambda)?;
            let mut dev = sol.m.clone();
            let mut dmax: f64 = 0.0;
            for z in &mut dev.data {
                *z -= 1.0;
                dmax = dmax.max(z.norm());
            }
            let mh = dev.fourier_at(-xi1, -xi2);
            Ok((s, mh, sol.iterations, sol.contraction, dmax))
        })
        .collect();
    let mut values = Vec::with_capacity(per_node.len());
    let mut mh = Vec::with_capacity(per_node.len());
    let (mut it, mut con, mut dev) = (0, 0.0f64, 0.0f64);
    for r in per_node {
        let (s, m, i, c, d) = r?;
        values.push(s);
        mh.push(m);
        it = it.max(i);
        con = con.max(c);
        dev = dev.max(d);
    }
    Ok(ForwardSweep {
        grid: ScatteringGrid::new(xi_lattice, values)?,
        m0_hat_reflected: mh,
        max_iterations: it,
        max_contraction: con,
        max_m0_deviation: dev,
    })
}

pub fn build_scattering_grid(u0: &InitialData, xi_lattice: Lattice2D, tol: f64) -> Result<ScatteringGrid> {
    Ok(forward_sweep(u0, xi_lattice, tol)?.grid)
}

/// Linearised data sgn(λ_I)·û₀(ξ)/(2πi) = −sgn(ξ₁)·û₀(ξ)/(2πi).
pub fn born_grid(u0: &InitialData, xi_lattice: Lattice2D) -> ScatteringGrid {
    let values = (0..xi_lattice.len())
        .map(|k| {
            let (xi1, xi2) = xi_lattice.point(k);
            -xi1.signum() * u0.field.fourier_at(xi1, xi2) / C64::new(0.0, TAU)
        })
        .collect();
    ScatteringGrid::new(xi_lattice, values).expect("sizes match")
}

/// Σ_{|l|≤q} max(‖∂ˡ(w^p u₀)‖_∞, ‖∂ˡ(w^p u₀)‖_{L¹}) with w = 1 + |x₁| + |x₂| and spectral derivatives.
pub fn weighted_norm(u0: &InitialData, p: u32, q: u32) -> Result<f64> {
    let lat = u0.lattice();
    let weighted = ComplexField2D::from_fn(lat, |a, b| {
        let k = lat.cell_of(0, a) * lat.count[1] + lat.cell_of(1, b);
        u0.field.data[k] * (1.0 + a.abs() + b.abs()).powi(p as i32)
    });
    let mut total = 0.0;
    for l1 in 0..=q {
        for l2 in 0..=(q - l1) {
            let f = if l1 == 0 && l2 == 0 { weighted.clone() } else { weighted.derivative(l1, l2)? };
            total += f.max_abs().max(f.l1_norm());
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> Lattice2D {
        Lattice2D::square(8.0, 32).unwrap()
    }

    #[test]
    fn green_symbol_examples() {
        let l = SpectralParam::new(C64::new(0.0, 1.0)).unwrap();
        assert!(green_symbol(&l, 0.0, 0.0).singular);
        assert!(green_symbol(&l, -1.0 / PI, 0.0).singular);
        let g = green_symbol(&l, 1.0, 0.0);
        assert!(!g.singular);
        let want = 1.0 - (TAU + 1.0).powi(2);
        assert!((g.p - C64::new(want, 0.0)).norm() < 1e-12);
        assert!((want + 52.0448).abs() < 1e-4);
    }

    #[test]
    fn roots_are_zeros_of_p() {
        for l in [C64::new(0.3, 0.7), C64::new(-1.2, -0.4), C64::new(2.0, 0.1)] {
            let sp = SpectralParam::new(l).unwrap();
            for (a, b) in green_roots(&sp) {
                assert!(p_lambda(l, a, b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cell_average_matches_brute_force() {
        // a regular cell: the average should match a fine tensor Gauss rule
        let l = C64::new(0.4, 0.9);
        let (c1, c2, d) = (0.6, -0.3, 0.2);
        let avg = cell_average_inv_p(l, c1, c2, d, d);
        let mut acc = C64::new(0.0, 0.0);
        for &(x, wx) in gl(32) {
            for &(y, wy) in gl(32) {
                acc += p_lambda(l, c1 + 0.5 * d * x, c2 + 0.5 * d * y).inv() * (wx * wy * 0.25);
            }
        }
        assert!((avg - acc).norm() < 1e-10 * acc.norm(), "{avg} vs {acc}");
    }

    #[test]
    fn cell_average_is_finite_on_roots() {
        let l = C64::new(0.0, 1.0);
        let v = cell_average_inv_p(l, 0.0, 0.0, 0.125, 0.125);
        let w = cell_average_inv_p(l, -1.0 / PI, 0.0, 0.125, 0.125);
        assert!(v.is_finite() && w.is_finite());
        // refining the cell around a simple zero grows the average only logarithmically-or-slower
        let v2 = cell_average_inv_p(l, 0.0, 0.0, 0.0625, 0.0625);
        assert!(v2.norm() < 4.0 * v.norm());
    }

    #[test]
    fn apply_green_zero_and_single_mode() {
        let l = SpectralParam::new(C64::new(0.2, 0.8)).unwrap();
        let lt = lat();
        let z = apply_green(&l, &ComplexField2D::zeros(lt, Space::Physical)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let (k1, k2) = (3.0, -5.0);
        let f = ComplexField2D::from_fn(lt, |a, b| C64::from_polar(1.0, TAU * (a * k1 + b * k2) / 8.0));
        let g = apply_green(&l, &f).unwrap();
        let mult = -p_lambda(l.lambda, k1 / 8.0, k2 / 8.0).inv();
        for (a, b) in g.data.iter().zip(&f.data) {
            assert!((a - b * mult).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_potential_gives_unit_eigenfunction() {
        let u0 = InitialData::zero(lat());
        let l = SpectralParam::new(C64::new(0.1, -0.5)).unwrap();
        let s = solve_m0(&u0, &l, 1e-12, 10).unwrap();
        assert!(s.m.data.iter().all(|z| *z == C64::new(1.0, 0.0)));
        assert_eq!(scattering_value(&u0, &s.m, &l).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn first_iterate_is_born_term() {
        let eps = 0.01;
        let u0 = InitialData::gaussian(lat(), eps);
        let l = SpectralParam::new(C64::new(0.3, 0.6)).unwrap();
        let born = apply_green(&l, &u0.field).unwrap();
        let s = solve_m0(&u0, &l, 1e-13, 60).unwrap();
        let mut d: f64 = 0.0;
        for (m, b) in s.m.data.iter().zip(&born.data) {
            d = d.max((m - 1.0 - b).norm());
        }
        assert!(d < 10.0 * eps * eps, "{d}");
        assert!(s.contraction < 0.2);
    }

    #[test]
    fn born_scattering_value_example() {
        let eps = 1e-6;
        let u0 = InitialData::gaussian(Lattice2D::square(8.0, 64).unwrap(), eps);
        let l = SpectralParam::new(C64::new(0.0, -PI)).unwrap();
        let m = solve_m0(&u0, &l, 1e-14, 60).unwrap();
        let s = scattering_value(&u0, &m.m, &l).unwrap();
        let want = C64::new(0.0, eps * (-PI).exp() / TAU);
        assert!((s - want).norm() < 1e-4 * want.norm(), "{s} vs {want}");
        let sc = scattering_value(&u0, &solve_m0(&u0, &l.conj(), 1e-14, 60).unwrap().m, &l.conj()).unwrap();
        assert!((sc - s.conj()).norm() < 1e-12 * s.norm());
    }

    #[test]
    fn non_contracting_data_is_rejected() {
        let u0 = InitialData::gaussian(lat(), 200.0);
        let l = SpectralParam::new(C64::new(0.0, 0.2)).unwrap();
        assert!(matches!(
            solve_m0(&u0, &l, 1e-10, 60),
            Err(KpError::NoContraction { .. }) | Err(KpError::MaxIterExceeded { .. })
        ));
    }

    #[test]
    fn grid_eval_reproduces_nodes_and_stays_in_half_plane() {
        let xl = Lattice2D::square(4.0, 8).unwrap();
        let vals: Vec<C64> = (0..xl.len()).map(|k| {
            let (a, b) = xl.point(k);
            C64::new(a, b * b)
        }).collect();
        let g = ScatteringGrid::new(xl, vals.clone()).unwrap();
        for k in 0..xl.len() {
            let (a, b) = xl.point(k);
            assert!((g.eval(a, b) - vals[k]).norm() < 1e-14);
        }
        // between ξ₁ = 0 and the innermost column the value is held constant
        let (a, b) = xl.point(xl.index(4, 3));
        assert_eq!(g.eval(0.5 * a, b), vals[xl.index(4, 3)]);
        assert_eq!(g.eval(3.0, 0.0), C64::new(0.0, 0.0));
        // bilinear in the interior: exact for functions linear in ξ₁
        assert!((g.eval(0.8, 0.25).re - 0.8).abs() < 1e-14);
    }

    #[test]
    fn weighted_norm_basics() {
        let u0 = InitialData::gaussian(lat(), 0.01);
        assert!((weighted_norm(&u0, 0, 0).unwrap() - u0.epsilon0).abs() < 1e-15);
        let u2 = InitialData::gaussian(lat(), 0.02);
        let r = weighted_norm(&u2, 1, 2).unwrap() / weighted_norm(&u0, 1, 2).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        assert_eq!(weighted_norm(&InitialData::zero(lat()), 2, 2).unwrap(), 0.0);
        assert!(u0.with_regularity(1, 1).unwrap().regularity == Some((1, 1)));
    }

    #[test]
    fn initial_data_rejects_complex_samples() {
        let f = ComplexField2D::from_fn(lat(), |_, _| C64::new(0.0, 1e-3));
        assert!(InitialData::new(f).is_err());
    }

    #[test]
    fn refinement_is_exact_for_cubics_within_a_half_plane() {
        let lat = Lattice2D::square(4.0, 16).unwrap();
        let f = |a: f64, b: f64| {
            let s = a.signum();
            C64::new(s * (0.3 * a * a * a - a * b * b + 0.5), b * b * b - 2.0 * a * b + s)
        };
        let vals = (0..lat.len()).map(|k| {
            let (a, b) = lat.point(k);
            f(a, b)
        });
        let g = ScatteringGrid::new(lat, vals.collect()).unwrap();
        let r = g.refined(3).unwrap();
        assert_eq!(r.xi_lattice.count, [48, 48]);
        for k in 0..r.xi_lattice.len() {
            let (a, b) = r.xi_lattice.point(k);
            assert!((r.values[k] - f(a, b)).norm() < 1e-12, "({a}, {b})");
        }
        assert_eq!(g.refined(1).unwrap(), g);
        assert!(ScatteringGrid::zeros(Lattice2D::square(4.0, 4).unwrap()).refined(2).is_err());
    }
}
