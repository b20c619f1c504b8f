//! Cell-centred periodic lattices, complex fields and the continuous Fourier transform contract
//! f̂(ξ) = ∬ f(x) e^{−2πi x·ξ} dx, approximated by the FFT with the cell-centre phase shift.

use crate::{KpError, Result, C64, TAU};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Uniform cell-centred lattice on [−L₁/2, L₁/2) × [−L₂/2, L₂/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice2D {
    pub length: [f64; 2],
    pub count: [usize; 2],
}

impl Lattice2D {
    pub fn new(length_1: f64, length_2: f64, count_1: usize, count_2: usize) -> Result<Self> {
        for (l, n) in [(length_1, count_1), (length_2, count_2)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(KpError::InvalidLattice(format!("length {l} must be positive")));
            }
            if n < 4 || n % 2 != 0 {
                return Err(KpError::InvalidLattice(format!("count {n} must be even and >= 4")));
            }
        }
        Ok(Self { length: [length_1, length_2], count: [count_1, count_2] })
    }

    /// Square lattice helper.
    pub fn square(length: f64, count: usize) -> Result<Self> {
        Self::new(length, length, count, count)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.length[axis] / self.count[axis] as f64
    }

    /// Cell area h₁h₂.
    pub fn cell_area(&self) -> f64 {
        self.spacing(0) * self.spacing(1)
    }

    pub fn len(&self) -> usize {
        self.count[0] * self.count[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell-centre coordinate −L/2 + (i + ½)h.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -0.5 * self.length[axis] + (i as f64 + 0.5) * self.spacing(axis)
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        (0..self.count[axis]).map(|i| self.coord(axis, i)).collect()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.count[1] + j
    }

    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k / self.count[1], k % self.count[1]);
        (self.coord(0, i), self.coord(1, j))
    }

    /// Point reflection x ↦ −x, exact on a cell-centred lattice.
    pub fn reflect(&self, k: usize) -> usize {
        let (i, j) = (k / self.count[1], k % self.count[1]);
        self.index(self.count[0] - 1 - i, self.count[1] - 1 - j)
    }

    /// Index of the cell containing `x` along `axis`, clamped to the lattice.
    pub fn cell_of(&self, axis: usize, x: f64) -> usize {
        let f = (x + 0.5 * self.length[axis]) / self.spacing(axis);
        (f.floor().max(0.0) as usize).min(self.count[axis] - 1)
    }

    /// FFT mode number for storage index `i` (standard FFT ordering, Nyquist as −N/2).
    pub fn mode(&self, axis: usize, i: usize) -> i64 {
        let n = self.count[axis] as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Frequency k/L of storage index `i`.
    pub fn frequency(&self, axis: usize, i: usize) -> f64 {
        self.mode(axis, i) as f64 / self.length[axis]
    }

    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.count[axis] / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Physical,
    Spectral,
}

/// Complex samples on a lattice. Spectral fields live at the FFT frequencies of the same lattice,
/// stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub lattice: Lattice2D,
    pub space: Space,
    pub data: Vec<C64>,
}

impl ComplexField2D {
    pub fn zeros(lattice: Lattice2D, space: Space) -> Self {
        Self { lattice, space, data: vec![C64::new(0.0, 0.0); lattice.len()] }
    }

    pub fn from_data(lattice: Lattice2D, space: Space, data: Vec<C64>) -> Result<Self> {
        if data.len() != lattice.len() {
            return Err(KpError::ShapeMismatch(format!(
                "{} samples for a {}x{} lattice",
                data.len(),
                lattice.count[0],
                lattice.count[1]
            )));
        }
        Ok(Self { lattice, space, data })
    }

    /// Samples `f(x₁, x₂)` at the physical cell centres.
    pub fn from_fn(lattice: Lattice2D, f: impl Fn(f64, f64) -> C64) -> Self {
        let data = (0..lattice.len())
            .map(|k| {
                let (x1, x2) = lattice.point(k);
                f(x1, x2)
            })
            .collect();
        Self { lattice, space: Space::Physical, data }
    }

    pub fn from_real_fn(lattice: Lattice2D, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(lattice, |a, b| C64::new(f(a, b), 0.0))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[self.lattice.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Lattice L¹ norm Σ|f| h₁h₂ (physical fields).
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum::<f64>() * self.lattice.cell_area()
    }

    /// Lattice L² norm (Σ|f|² h₁h₂)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.lattice.cell_area()).sqrt()
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn scale(&mut self, s: C64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice || self.space != other.space {
            return Err(KpError::ShapeMismatch("pointwise product of incompatible fields".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Self { lattice: self.lattice, space: self.space, data })
    }

    /// Continuous-FT approximation at the FFT frequencies.
    pub fn to_spectral(&self) -> Result<Self> {
        if self.space != Space::Physical {
            return Err(KpError::ShapeMismatch("to_spectral of a spectral field".into()));
        }
        let plan = FftPlan2D::new(self.lattice);
        let mut data = self.data.clone();
        plan.forward(&mut data);
        Ok(Self { lattice: self.lattice, space: Space::Spectral, data })
    }

    pub fn to_physical(&self) -> Result<Self> {
        if self.space != Space::Spectral {
            return Err(KpError::ShapeMismatch("to_physical of a physical field".into()));
        }
        let plan = FftPlan2D::new(self.lattice);
        let mut data = self.data.clone();
        plan.inverse(&mut data);
        Ok(Self { lattice: self.lattice, space: Space::Physical, data })
    }

    /// Spectral derivative ∂^{l₁}_{x₁}∂^{l₂}_{x₂} of a physical field (Nyquist modes dropped).
    pub fn derivative(&self, l1: u32, l2: u32) -> Result<Self> {
        let mut s = self.to_spectral()?;
        let lat = self.lattice;
        for i in 0..lat.count[0] {
            for j in 0..lat.count[1] {
                let k = lat.index(i, j);
                let nyq = (l1 > 0 && lat.is_nyquist(0, i)) || (l2 > 0 && lat.is_nyquist(1, j));
                if nyq {
                    s.data[k] = C64::new(0.0, 0.0);
                    continue;
                }
                let f = C64::new(0.0, TAU * lat.frequency(0, i)).powu(l1)
                    * C64::new(0.0, TAU * lat.frequency(1, j)).powu(l2);
                s.data[k] *= f;
            }
        }
        s.to_physical()
    }

    /// Direct (non-uniform) evaluation of the continuous FT at an arbitrary ξ:
    /// Σ f(x_j) e^{−2πi x_j·ξ} h₁h₂. Separable, O(N₁N₂).
    pub fn fourier_at(&self, xi1: f64, xi2: f64) -> C64 {
        let lat = self.lattice;
        let e1: Vec<C64> = (0..lat.count[0]).map(|i| C64::from_polar(1.0, -TAU * lat.coord(0, i) * xi1)).collect();
        let e2: Vec<C64> = (0..lat.count[1]).map(|j| C64::from_polar(1.0, -TAU * lat.coord(1, j) * xi2)).collect();
        let mut acc = C64::new(0.0, 0.0);
        for (i, a) in e1.iter().enumerate() {
            let row = &self.data[i * lat.count[1]..(i + 1) * lat.count[1]];
            let s: C64 = row.iter().zip(&e2).map(|(f, b)| f * b).sum();
            acc += s * a;
        }
        acc * lat.cell_area()
    }
}

/// 2D FFT plan implementing the continuous-FT scaling and cell-centre phase shift.
pub struct FftPlan2D {
    lattice: Lattice2D,
    f1: Arc<dyn Fft<f64>>,
    f2: Arc<dyn Fft<f64>>,
    i1: Arc<dyn Fft<f64>>,
    i2: Arc<dyn Fft<f64>>,
    shift: Vec<C64>,
}

impl FftPlan2D {
    pub fn new(lattice: Lattice2D) -> Self {
        let mut planner = FftPlanner::new();
        let [n1, n2] = lattice.count;
        let f1 = planner.plan_fft_forward(n1);
        let f2 = planner.plan_fft_forward(n2);
        let i1 = planner.plan_fft_inverse(n1);
        let i2 = planner.plan_fft_inverse(n2);
        let x01 = lattice.coord(0, 0);
        let x02 = lattice.coord(1, 0);
        let mut shift = Vec::with_capacity(lattice.len());
        for i in 0..n1 {
            for j in 0..n2 {
                let ph = -TAU * (x01 * lattice.frequency(0, i) + x02 * lattice.frequency(1, j));
                shift.push(C64::from_polar(1.0, ph));
            }
        }
        Self { lattice, f1, f2, i1, i2, shift }
    }

    pub fn lattice(&self) -> Lattice2D {
        self.lattice
    }

    fn transform(&self, data: &mut [C64], a: &Arc<dyn Fft<f64>>, b: &Arc<dyn Fft<f64>>) {
        let [n1, n2] = self.lattice.count;
        batched(data, n2, b);
        let mut t = vec![C64::new(0.0, 0.0); n1 * n2];
        transpose(data, &mut t, n1, n2);
        batched(&mut t, n1, a);
        transpose(&t, data, n2, n1);
    }

    /// Physical samples → continuous-FT samples at the FFT frequencies.
    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, &self.f1, &self.f2);
        let area = self.lattice.cell_area();
        for (z, s) in data.iter_mut().zip(&self.shift) {
            *z *= s * area;
        }
    }

    /// Continuous-FT samples → physical samples.
    pub fn inverse(&self, data: &mut [C64]) {
        let norm = 1.0 / (self.lattice.length[0] * self.lattice.length[1]);
        for (z, s) in data.iter_mut().zip(&self.shift) {
            *z *= s.conj() * norm;
        }
        self.transform(data, &self.i1, &self.i2);
    }
}

/// Runs `fft` over consecutive rows of length `n`, in parallel chunks of rows.
fn batched(data: &mut [C64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    let rows = data.len() / n;
    let per = rows.div_ceil(rayon::current_num_threads().max(1)).max(8);
    data.par_chunks_mut(per * n).for_each(|chunk| fft.process(chunk));
}

/// `dst[j*rows + i] = src[i*cols + j]`.
fn transpose(src: &[C64], dst: &mut [C64], rows: usize, cols: usize) {
    dst.par_chunks_mut(rows).enumerate().for_each(|(j, out)| {
        for (i, z) in out.iter_mut().enumerate() {
            *z = src[i * cols + j];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lattice_validation() {
        assert!(Lattice2D::new(1.0, 1.0, 3, 4).is_err());
        assert!(Lattice2D::new(1.0, 1.0, 2, 4).is_err());
        assert!(Lattice2D::new(0.0, 1.0, 4, 4).is_err());
        let l = Lattice2D::new(8.0, 4.0, 16, 8).unwrap();
        assert_eq!(l.spacing(0), 0.5);
        assert_eq!(l.coord(0, 0), -3.75);
        assert_eq!(l.coord(1, 7), 1.75);
    }

    #[test]
    fn reflection_is_point_symmetry() {
        let l = Lattice2D::new(4.0, 4.0, 8, 8).unwrap();
        for k in 0..l.len() {
            let (a, b) = l.point(k);
            let (c, d) = l.point(l.reflect(k));
            assert_eq!((a, b), (-c, -d));
        }
    }

    #[test]
    fn gaussian_transform_is_self_reciprocal() {
        let l = Lattice2D::square(8.0, 64).unwrap();
        let f = ComplexField2D::from_real_fn(l, |x, y| (-PI * (x * x + y * y)).exp());
        let s = f.to_spectral().unwrap();
        for i in 0..64 {
            for j in 0..64 {
                let (a, b) = (l.frequency(0, i), l.frequency(1, j));
                let want = (-PI * (a * a + b * b)).exp();
                assert!((s.get(i, j) - want).norm() < 1e-12, "{i} {j}");
            }
        }
        let direct = f.fourier_at(0.3, -0.7);
        assert!((direct.re - (-PI * 0.58f64).exp()).abs() < 1e-12 && direct.im.abs() < 1e-12);
    }

    #[test]
    fn shifted_gaussian_phase() {
        let l = Lattice2D::square(8.0, 64).unwrap();
        let f = ComplexField2D::from_real_fn(l, |x, y| (-PI * ((x - 0.5) * (x - 0.5) + y * y)).exp());
        let s = f.to_spectral().unwrap();
        let (i, j) = (3, 5);
        let (a, b) = (l.frequency(0, i), l.frequency(1, j));
        let want = C64::from_polar((-PI * (a * a + b * b)).exp(), -TAU * 0.5 * a);
        assert!((s.get(i, j) - want).norm() < 1e-12);
    }

    #[test]
    fn derivative_of_mode() {
        let l = Lattice2D::new(4.0, 2.0, 16, 8).unwrap();
        let f = ComplexField2D::from_real_fn(l, |x, _| (TAU * x / 4.0).sin());
        let d = f.derivative(1, 0).unwrap();
        for k in 0..l.len() {
            let (x, _) = l.point(k);
            assert!((d.data[k].re - TAU / 4.0 * (TAU * x / 4.0).cos()).abs() < 1e-12);
        }
    }
}
