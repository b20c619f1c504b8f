//! Ai on the real line: Maclaurin pair summed in double-double for |z| ≤ 6, optimally
//! truncated asymptotic expansions beyond.

use std::f64::consts::PI;

pub const Z_SWITCH: f64 = 6.0;

// Ai(0) = 3^{-2/3}/Γ(2/3) and −Ai′(0) = 3^{-1/3}/Γ(1/3) as (hi, lo) pairs.
const C1: Dd = Dd { hi: 0.3550280538878172, lo: 2.05233632436212e-17 };
const C2: Dd = Dd { hi: 0.2588194037928068, lo: -2.522243111610832e-17 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AiryMethod {
    Series,
    AsymptoticNeg,
    AsymptoticPos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryEval {
    pub argument: f64,
    pub value: f64,
    pub method: AiryMethod,
    pub error_estimate: f64,
}

pub fn airy(z: f64) -> AiryEval {
    airy_with_switch(z, Z_SWITCH)
}

/// Same as [`airy`] with an explicit branch switch; used to exercise the continuity check.
pub fn airy_with_switch(z: f64, z_switch: f64) -> AiryEval {
    if z.abs() <= z_switch {
        let (value, err) = airy_series(z);
        AiryEval { argument: z, value, method: AiryMethod::Series, error_estimate: err }
    } else {
        let (value, err) = airy_asymptotic(z);
        let method = if z < 0.0 { AiryMethod::AsymptoticNeg } else { AiryMethod::AsymptoticPos };
        AiryEval { argument: z, value, method, error_estimate: err }
    }
}

/// Maclaurin pair Ai = c₁f − c₂g, accumulated in double-double to survive the cancellation
/// for positive z.
pub fn airy_series(z: f64) -> (f64, f64) {
    let z3 = Dd::from(z).mul(Dd::from(z)).mul(Dd::from(z));
    let mut f = Dd::from(1.0);
    let mut g = Dd::from(z);
    let mut tf = Dd::from(1.0);
    let mut tg = Dd::from(z);
    let mut k = 1.0;
    let mut mag = 1.0 + z.abs();
    loop {
        tf = tf.mul(z3).div_f64((3.0 * k - 1.0) * (3.0 * k));
        tg = tg.mul(z3).div_f64((3.0 * k) * (3.0 * k + 1.0));
        f = f.add(tf);
        g = g.add(tg);
        mag = mag.max(tf.hi.abs()).max(tg.hi.abs());
        if tf.hi.abs() < 1e-34 * f.hi.abs().max(1.0) && tg.hi.abs() < 1e-34 * g.hi.abs().max(1.0) {
            break;
        }
        k += 1.0;
        if k > 400.0 {
            break;
        }
    }
    let v = C1.mul(f).sub(C2.mul(g));
    let value = v.hi + v.lo;
    (value, 4.0 * f64::EPSILON * value.abs() + 1e-31 * mag)
}

fn u_coeffs(n: usize) -> Vec<f64> {
    let mut u = vec![1.0; n];
    for k in 1..n {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
    }
    u
}

/// Asymptotic expansions for |z| large, truncated before the smallest term.
pub fn airy_asymptotic(z: f64) -> (f64, f64) {
    let x = z.abs();
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let u = u_coeffs(80);
    let terms: Vec<f64> = (0..80).map(|k| u[k] / zeta.powi(k as i32)).collect();
    let mut kmin = 1;
    for k in 1..terms.len() {
        if terms[k] < terms[kmin] {
            kmin = k;
        }
        if terms[k] > terms[k - 1] || terms[k] < 1e-18 {
            break;
        }
    }
    if z > 0.0 {
        let pref = (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25));
        let s: f64 = (0..kmin).map(|k| if k % 2 == 0 { terms[k] } else { -terms[k] }).sum();
        (pref * s, pref * terms[kmin])
    } else {
        let (mut p, mut q) = (0.0, 0.0);
        for k in 0..kmin {
            let sgn = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += sgn * terms[k];
            } else {
                q += sgn * terms[k];
            }
        }
        let th = zeta + PI / 4.0;
        let pref = 1.0 / (PI.sqrt() * x.powf(0.25));
        (pref * (th.sin() * p - th.cos() * q), pref * terms[kmin])
    }
}

/// Leading oscillatory envelope (1/√π) x^{−1/4} cos((2/3)x^{3/2} − π/4) of Ai(−x).
pub fn airy_neg_leading(x: f64) -> f64 {
    x.powf(-0.25) / PI.sqrt() * (2.0 / 3.0 * x.powf(1.5) - PI / 4.0).cos()
}

/// Next-order term of the same expansion: (1/√π) x^{−1/4} (5/72)ζ^{−1} sin(ζ − π/4), ζ = (2/3)x^{3/2}.
pub fn airy_neg_next_order(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    x.powf(-0.25) / PI.sqrt() * (5.0 / 72.0) / zeta * (zeta - PI / 4.0).sin()
}

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
    fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = q1 * d;
        let pe = q1.mul_add(d, -p);
        let r = ((self.hi - p) - pe + self.lo) / d;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }
}
