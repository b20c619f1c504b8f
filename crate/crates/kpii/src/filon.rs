//! Product integration of lattice data against the KPII phase
//! Θ(ξ; x) = 2π(ξ₁x₁ + ξ₂x₂) + 2πt(π²ξ₁³ − ¾ξ₂²/ξ₁), t = −x₃.
//!
//! Lattice samples are extended by clamped bilinear hats within each half-plane ξ₁ ≷ 0. The ξ₂
//! direction is integrated exactly against the chirp e^{i(γv − βv²)} (Fresnel moments); the ξ₁
//! direction uses Gauss–Legendre panels sized to the local oscillation rate, graded toward ξ₁ = 0.

use crate::lattice::Lattice2D;
use crate::oscillatory::fresnel;
use crate::quad::gl;
use crate::{Result, C64, TAU};
use std::f64::consts::PI;

/// Below this value of |β|h² a panel is integrated by Gauss–Legendre instead of Fresnel moments.
const FRESNEL_SWITCH: f64 = 0.05;
/// Number of dyadic panels between ξ₁ = 0 and the innermost node.
const GRADING_LEVELS: usize = 40;

/// Θ at a point.
pub fn phase(xi1: f64, xi2: f64, x: [f64; 3]) -> f64 {
    let t = -x[2];
    TAU * (xi1 * x[0] + xi2 * x[1]) + TAU * t * (PI * PI * xi1 * xi1 * xi1 - 0.75 * xi2 * xi2 / xi1)
}

/// (∫_a^b e^{iφ}, ∫_a^b (v − a) e^{iφ}) for φ(v) = γv − βv².
pub fn chirp_moments(beta: f64, gamma: f64, a: f64, b: f64) -> (C64, C64) {
    let h = b - a;
    if h <= 0.0 {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    let phi = |v: f64| gamma * v - beta * v * v;
    if beta.abs() * h * h < FRESNEL_SWITCH {
        let variation = (gamma.abs() + 2.0 * beta.abs() * a.abs().max(b.abs())) * h;
        let pieces = ((variation / 8.0).ceil() as usize).max(1);
        let rule = gl(16);
        let (mut i0, mut i1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let step = h / pieces as f64;
        for p in 0..pieces {
            let lo = a + p as f64 * step;
            let (mid, half) = (lo + 0.5 * step, 0.5 * step);
            for &(x, w) in rule {
                let v = mid + half * x;
                let e = C64::from_polar(w * half, phi(v));
                i0 += e;
                i1 += e * (v - a);
            }
        }
        return (i0, i1);
    }
    let v0 = gamma / (2.0 * beta);
    let scale = (2.0 * beta.abs() / PI).sqrt();
    let fa = fresnel(scale * (a - v0));
    let fb = fresnel(scale * (b - v0));
    let d = fb - fa;
    let pref = C64::from_polar((PI / (2.0 * beta.abs())).sqrt(), beta * v0 * v0);
    let i0 = pref * C64::new(d.re, -beta.signum() * d.im);
    let ea = C64::from_polar(1.0, phi(a));
    let eb = C64::from_polar(1.0, phi(b));
    // ∫(v − a)e^{iφ} = [φ′(a)·I₀ + i(e^{iφ(b)} − e^{iφ(a)})]/(2β), φ′(a) = γ − 2βa
    let i1 = ((gamma - 2.0 * beta * a) * i0 + C64::new(0.0, 1.0) * (eb - ea)) / (2.0 * beta);
    (i0, i1)
}

/// ∫ c_j(v) e^{i(γv − βv²)} dv over [lo, hi] for the clamped hats c_j on sorted `nodes`
/// (c_0 ≡ 1 on [lo, nodes₀], c_last ≡ 1 on [nodes_last, hi]). Accumulates `scale`·value into `out`.
pub fn chirp_hat_integrals(beta: f64, gamma: f64, nodes: &[f64], lo: f64, hi: f64, scale: C64, out: &mut [C64]) {
    let n = nodes.len();
    debug_assert_eq!(out.len(), n);
    let (i0, _) = chirp_moments(beta, gamma, lo, nodes[0]);
    out[0] += scale * i0;
    for j in 0..n - 1 {
        let (a, b) = (nodes[j], nodes[j + 1]);
        let (i0, j1) = chirp_moments(beta, gamma, a, b);
        let right = j1 / (b - a);
        out[j] += scale * (i0 - right);
        out[j + 1] += scale * right;
    }
    let (i0, _) = chirp_moments(beta, gamma, nodes[n - 1], hi);
    out[n - 1] += scale * i0;
}

/// Outer quadrature in s = |ξ₁| over (0, edge]: breakpoints at the hat nodes, dyadic grading
/// below the innermost node, panels no wider than two local oscillations of `rate`.
pub fn outer_rule(nodes: &[f64], edge: f64, rate: &dyn Fn(f64) -> f64) -> Vec<(f64, f64)> {
    outer_rule_with(nodes, edge, rate, &[])
}

/// [`outer_rule`] with additional breakpoints inside (0, edge).
pub fn outer_rule_with(nodes: &[f64], edge: f64, rate: &dyn Fn(f64) -> f64, extra: &[f64]) -> Vec<(f64, f64)> {
    let mut breaks = Vec::with_capacity(GRADING_LEVELS + nodes.len() + extra.len() + 1);
    for k in (1..=GRADING_LEVELS).rev() {
        breaks.push(nodes[0] * 0.5f64.powi(k as i32));
    }
    breaks.extend_from_slice(nodes);
    if edge > *nodes.last().unwrap() {
        breaks.push(edge);
    }
    let first = breaks[0];
    breaks.extend(extra.iter().copied().filter(|&e| e > first && e < edge));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let rule = gl(16);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut lo = a;
        while lo < b {
            let r = rate(lo).max(rate(b.min(lo + 0.25 * (b - a).max(1e-300)))).max(1e-12);
            let width = (2.0 * TAU / r).min(b - lo);
            let hi = if b - (lo + width) < 1e-3 * width { b } else { lo + width };
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for &(x, wt) in rule {
                out.push((mid + half * x, wt * half));
            }
            lo = hi;
        }
    }
    out
}

/// Bound on the ξ₁-oscillation rate of the ξ₂-integrated phase at s = |ξ₁|.
pub fn outer_rate(s: f64, x: [f64; 3], v_max: f64, inner_node: f64) -> f64 {
    let t = -x[2];
    let mut r = TAU * x[0].abs() + 6.0 * PI.powi(3) * t.abs() * s * s;
    if t != 0.0 {
        r += TAU * x[1] * x[1] / (3.0 * t.abs());
        let sc = s.max(inner_node);
        r += 1.5 * PI * t.abs() * v_max * v_max / (sc * sc);
    }
    r
}

/// Clamped hat values at s for sorted positive `nodes`: up to two (index, weight) pairs.
pub fn hat_values(nodes: &[f64], s: f64) -> [(usize, f64); 2] {
    let n = nodes.len();
    if s <= nodes[0] {
        return [(0, 1.0), (0, 0.0)];
    }
    if s >= nodes[n - 1] {
        return [(n - 1, 1.0), (n - 1, 0.0)];
    }
    let i = match nodes.binary_search_by(|p| p.partial_cmp(&s).unwrap()) {
        Ok(i) => return [(i, 1.0), (i, 0.0)],
        Err(i) => i - 1,
    };
    let w = (s - nodes[i]) / (nodes[i + 1] - nodes[i]);
    [(i, 1.0 - w), (i + 1, w)]
}

/// F_k = ∬ B_k(ξ) e^{iΘ(ξ; x)} dξ for every node of a cell-centred spectral lattice, with B_k the
/// clamped bilinear hat of node k inside its half-plane. Returned in lattice order.
pub fn hat_phase_integrals(lat: Lattice2D, x: [f64; 3]) -> Result<Vec<C64>> {
    let n1 = lat.count[0];
    let (e1, e2) = (0.5 * lat.length[0], 0.5 * lat.length[1]);
    let pos: Vec<f64> = (n1 / 2..n1).map(|i| lat.coord(0, i)).collect();
    let vmax = e2.max(e1);
    let rate = |s: f64| outer_rate(s, x, vmax, pos[0]);
    let outer = outer_rule(&pos, e1, &rate);
    Ok(hat_phase_integrals_on(lat, x, &outer))
}

/// [`hat_phase_integrals`] with an explicit outer rule over s = |ξ₁|.
pub fn hat_phase_integrals_on(lat: Lattice2D, x: [f64; 3], outer: &[(f64, f64)]) -> Vec<C64> {
    let [n1, n2] = lat.count;
    let e2 = 0.5 * lat.length[1];
    let pos: Vec<f64> = (n1 / 2..n1).map(|i| lat.coord(0, i)).collect();
    let nodes2 = lat.coords(1);
    let t = -x[2];
    let gamma = TAU * x[1];
    let mut f = vec![C64::new(0.0, 0.0); lat.len()];
    let mut inner = vec![C64::new(0.0, 0.0); n2];
    for sigma in [-1.0, 1.0] {
        for &(s, w) in outer {
            let xi1 = sigma * s;
            let beta = 1.5 * PI * t / xi1;
            let psi = TAU * (xi1 * x[0] + t * PI * PI * xi1 * xi1 * xi1);
            inner.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            chirp_hat_integrals(beta, gamma, &nodes2, -e2, e2, C64::from_polar(w, psi), &mut inner);
            for (ih, hv) in hat_values(&pos, s) {
                if hv == 0.0 {
                    continue;
                }
                let row = if sigma > 0.0 { n1 / 2 + ih } else { n1 / 2 - 1 - ih };
                let dst = &mut f[row * n2..(row + 1) * n2];
                for (d, g) in dst.iter_mut().zip(&inner) {
                    *d += g * hv;
                }
            }
        }
    }
    f
}

/// E_k(x) = F_k / (cell area): the averaged phase factor that replaces e^{iΘ(ξ_k)} in lattice sums.
pub fn phase_weights(lat: Lattice2D, x: [f64; 3]) -> Result<Vec<C64>> {
    let area = lat.cell_area();
    let mut f = hat_phase_integrals(lat, x)?;
    for z in &mut f {
        *z /= area;
    }
    Ok(f)
}

/// Plain point samples e^{iΘ(ξ_k)}; accurate only while Θ is resolved by the lattice.
pub fn point_phases(lat: Lattice2D, x: [f64; 3]) -> Vec<C64> {
    (0..lat.len())
        .map(|k| {
            let (a, b) = lat.point(k);
            C64::from_polar(1.0, phase(a, b, x))
        })
        .collect()
}
