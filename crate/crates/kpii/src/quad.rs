//! Cached Gauss–Legendre rules and small composite-quadrature helpers.

use crate::C64;
use gauss_quad::legendre::GaussLegendre;
use std::sync::OnceLock;

/// Largest single-panel degree kept in the cache; longer panels are split.
pub const MAX_DEGREE: usize = 64;

static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();

/// Nodes and weights on [−1, 1] for `n` in 2..=64.
pub fn gl(n: usize) -> &'static [(f64, f64)] {
    let rules = RULES.get_or_init(|| {
        (0..=MAX_DEGREE)
            .map(|n| {
                if n < 2 {
                    Vec::new()
                } else {
                    let mut v = GaussLegendre::new(n)
                        .expect("degree >= 2")
                        .into_node_weight_pairs();
                    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    v
                }
            })
            .collect()
    });
    &rules[n.clamp(2, MAX_DEGREE)]
}

/// Appends the nodes and weights of an `n`-point rule mapped to [a, b].
pub fn push_panel(a: f64, b: f64, n: usize, out: &mut Vec<(f64, f64)>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for &(x, w) in gl(n) {
        out.push((mid + half * x, half * w));
    }
}

/// Composite rule on [a, b]: `points` total nodes spread over panels of at most 64 nodes.
pub fn push_composite(a: f64, b: f64, points: usize, out: &mut Vec<(f64, f64)>) {
    if b <= a {
        return;
    }
    let points = points.max(4);
    let panels = points.div_ceil(32).max(1);
    let per = points.div_ceil(panels).clamp(4, MAX_DEGREE);
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        push_panel(a + p as f64 * h, a + (p + 1) as f64 * h, per, out);
    }
}

/// Real integral of `f` over [a, b] with an `n`-point rule.
pub fn integrate(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gl(n).iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Complex integral of `f` over [a, b] with an `n`-point rule.
pub fn integrate_c(a: f64, b: f64, n: usize, f: impl Fn(f64) -> C64) -> C64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gl(n).iter().map(|&(x, w)| f(mid + half * x) * w).sum::<C64>() * half
}

/// Complex integral along the straight segment z0 → z1 in the complex plane.
pub fn integrate_segment(z0: C64, z1: C64, n: usize, f: impl Fn(C64) -> C64) -> C64 {
    let half = (z1 - z0) * 0.5;
    let mid = (z0 + z1) * 0.5;
    gl(n).iter().map(|&(x, w)| f(mid + half * x) * w).sum::<C64>() * half
}

/// Neumaier-compensated summation of complex terms; keeps parallel-free reductions reproducible.
#[derive(Default, Clone, Copy, Debug)]
pub struct KahanC {
    sum: C64,
    comp: C64,
}

impl KahanC {
    pub fn add(&mut self, v: C64) {
        let (re, cre) = two_sum(self.sum.re, v.re);
        let (im, cim) = two_sum(self.sum.im, v.im);
        self.sum = C64::new(re, im);
        self.comp += C64::new(cre, cim);
    }
    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [2, 5, 16, 64] {
            let deg = 2 * n as i32 - 1;
            let v = integrate(0.0, 1.0, n, |x| x.powi(deg));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn composite_gaussian() {
        let mut nodes = Vec::new();
        push_composite(-8.0, 8.0, 200, &mut nodes);
        let v: f64 = nodes.iter().map(|&(x, w)| w * (-std::f64::consts::PI * x * x).exp()).sum();
        assert!((v - 1.0).abs() < 1e-14);
    }
}
