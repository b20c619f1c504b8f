//! The acceptance suite: criteria 1–11 as measurements with pass/fail verdicts.
//!
//! Each criterion runs independently and never panics; a numeric failure inside a criterion is
//! reported as FAIL with the error text. Forward sweeps shared between criteria are computed once
//! per [`Suite`].

use crate::asymptotics::{decay_fit, fit_frequency, leading_order, u1_direct, ConeFrame};
use crate::direct::{linear_evolve, EvolveOptions, Evolver};
use crate::forward::{born_grid, forward_sweep, ForwardSweep, InitialData, ScatteringGrid};
use crate::inverse::{InverseOptions, InverseSolver};
use crate::lattice::{ComplexField2D, Lattice2D};
use crate::oscillatory::{
    airy, airy_neg_leading, airy_neg_next_order, airy_propagator, airy_series, airy_with_switch, cubic_phase_integral,
    windowed_oracle, AIRY_BOUND, Z_SWITCH,
};
use crate::representation::{ct1_crosscheck, kernel_from_sweep, RepresentationOptions};
use crate::spectral::{grad_s0, phase_s0, phase_s0_xi, xi_from_zeta, zeta_from_xi};
use crate::{KpError, Result, C64};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

/// Criteria that fail at every resolution tried; see the README for the analysis.
pub const KNOWN_UNMET: &[u32] = &[6];

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "coordinate and phase self-consistency"),
    (2, "scattering reality"),
    (3, "Born quadratic scaling"),
    (4, "round-trip reconstruction at x3 = 0"),
    (5, "Airy suite"),
    (6, "representation cross-check of CT1"),
    (7, "NEG-regime decay and frequency"),
    (8, "POS-regime decay"),
    (9, "perturbative decay of u20, u21"),
    (10, "eigenfunction decay"),
    (11, "direct solver and end-to-end comparison"),
];

/// The end-to-end comparison of criterion 11: a zero-mass dipole evolved by the direct solver
/// and reconstructed on a sequence of spectral lattices.
#[derive(Debug, Clone)]
pub struct EndToEndScale {
    /// Peak of the dipole and its Gaussian width.
    pub amplitude: f64,
    pub width: f64,
    pub physical: Lattice2D,
    /// Side of the square spectral box.
    pub spectral_length: f64,
    /// Spectral lattice counts, coarse to fine.
    pub counts: Vec<usize>,
    /// u₁ is evaluated on the scattering grid cubically resampled to this many nodes per axis.
    pub u1_nodes: usize,
    /// Which of `counts` the leading-order check uses.
    pub leading_count: usize,
    pub direct: Lattice2D,
    /// Larger box at the same spacing; the reference must not move when the box grows.
    pub direct_check: Lattice2D,
    pub dt: f64,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SuiteScale {
    pub label: &'static str,
    pub physical: Lattice2D,
    pub spectral: Lattice2D,
    /// Coarser spectral lattice for the refinement half of criterion 6.
    pub spectral_coarse: Lattice2D,
    pub epsilon: f64,
    pub born_epsilons: [f64; 3],
    pub times: Vec<f64>,
    pub resolution: usize,
    /// Frequency fit window: `frequency_samples` points spaced `frequency_step` from the first time.
    pub frequency_samples: usize,
    pub frequency_step: f64,
    pub round_trip_points: usize,
    pub ct1_times: [f64; 3],
    pub airy_switch: f64,
    pub sweep_tol: f64,
    pub end_to_end: EndToEndScale,
}

fn dipole_end_to_end(direct: Lattice2D, direct_check: Lattice2D, counts: Vec<usize>, times: Vec<f64>) -> EndToEndScale {
    EndToEndScale {
        amplitude: 0.002,
        width: 2.5,
        physical: Lattice2D::square(16.0, 64).expect("valid"),
        spectral_length: 2.0,
        counts,
        u1_nodes: 256,
        leading_count: 32,
        direct,
        direct_check,
        dt: 0.25,
        times,
    }
}

impl SuiteScale {
    /// 64² physical lattice of side 8, 32² spectral lattice over [−2, 2]², ε₀ = 0.01, t ≤ 80.
    pub fn desk() -> Self {
        Self {
            label: "desk",
            physical: Lattice2D::square(8.0, 64).expect("valid"),
            spectral: Lattice2D::square(4.0, 32).expect("valid"),
            spectral_coarse: Lattice2D::square(4.0, 16).expect("valid"),
            epsilon: 0.01,
            born_epsilons: [1e-2, 5e-3, 2.5e-3],
            times: vec![10.0, 20.0, 40.0, 80.0],
            resolution: 8,
            frequency_samples: 31,
            frequency_step: 0.25,
            round_trip_points: 9,
            ct1_times: [1.0, 2.0, 4.0],
            airy_switch: Z_SWITCH,
            sweep_tol: 1e-12,
            end_to_end: dipole_end_to_end(
                Lattice2D::new(512.0, 1024.0, 1024, 2048).expect("valid"),
                Lattice2D::new(1024.0, 1024.0, 2048, 2048).expect("valid"),
                vec![16, 32, 64],
                vec![10.0, 20.0],
            ),
        }
    }

    /// Halved lattices, a smaller direct box and earlier comparison times; used by `selftest`.
    pub fn reduced() -> Self {
        Self {
            label: "reduced",
            physical: Lattice2D::square(8.0, 32).expect("valid"),
            spectral: Lattice2D::square(4.0, 16).expect("valid"),
            spectral_coarse: Lattice2D::square(4.0, 8).expect("valid"),
            frequency_samples: 21,
            round_trip_points: 5,
            end_to_end: dipole_end_to_end(
                Lattice2D::new(256.0, 512.0, 512, 1024).expect("valid"),
                Lattice2D::new(512.0, 512.0, 1024, 1024).expect("valid"),
                vec![16, 32],
                vec![5.0, 10.0],
            ),
            ..Self::desk()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn known_unmet(&self) -> bool {
        KNOWN_UNMET.contains(&self.id)
    }

    /// `PASS criterion 3 (Born quadratic scaling): slope=2.000 [12.3 s]`
    pub fn line(&self) -> String {
        format!(
            "{} criterion {} ({}): {} [{:.1} s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

type Verdict = Result<(bool, String)>;

pub struct Suite {
    pub scale: SuiteScale,
    desk_sweep: OnceLock<std::result::Result<ForwardSweep, String>>,
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

fn dipole(lat: Lattice2D, amplitude: f64, width: f64) -> Result<InitialData> {
    let c = (2.0 * PI).sqrt() * 0.5f64.exp() / width;
    InitialData::new(ComplexField2D::from_real_fn(lat, |a, b| {
        amplitude * c * a * (-PI * (a * a + b * b) / (width * width)).exp()
    }))
}

impl Suite {
    pub fn new(scale: SuiteScale) -> Self {
        Self { scale, desk_sweep: OnceLock::new() }
    }

    fn datum(&self) -> InitialData {
        InitialData::gaussian(self.scale.physical, self.scale.epsilon)
    }

    fn sweep(&self) -> Result<&ForwardSweep> {
        self.desk_sweep
            .get_or_init(|| forward_sweep(&self.datum(), self.scale.spectral, self.scale.sweep_tol).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| KpError::InvalidArgument(format!("forward sweep failed: {e}")))
    }

    fn solver(&self) -> Result<InverseSolver> {
        InverseSolver::new(self.sweep()?.grid.clone(), InverseOptions::default())
    }

    pub fn run(&self, id: u32) -> CriterionResult {
        let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown criterion");
        let start = Instant::now();
        let verdict = match id {
            1 => self.coordinates(),
            2 => self.reality(),
            3 => self.born_scaling(),
            4 => self.round_trip(),
            5 => self.airy_suite(),
            6 => self.representation(),
            7 => self.neg_decay(),
            8 => self.pos_decay(),
            9 => self.perturbative_decay(),
            10 => self.eigenfunction_decay(),
            11 => self.direct_solver(),
            _ => Err(KpError::InvalidArgument(format!("no criterion {id}"))),
        };
        let (pass, detail) = verdict.unwrap_or_else(|e| (false, format!("error {}: {e}", e.kind())));
        CriterionResult { id, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
    }

    /// Runs `ids` in order, handing each result to `report` as soon as it is available.
    pub fn run_all(&self, ids: &[u32], mut report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
        ids.iter()
            .map(|&id| {
                let r = self.run(id);
                report(&r);
                r
            })
            .collect()
    }

    fn coordinates(&self) -> Verdict {
        let pts = [(0.7, -1.3), (-0.25, 0.4), (1.9, 1.9), (-1.6, -0.05), (0.01, 0.8), (-0.03, -1.7)];
        let mut round = 0f64;
        let mut forms = 0f64;
        for &(a, b) in &pts {
            let z = zeta_from_xi(a, b)?;
            let p = xi_from_zeta(z);
            round = round.max((p.xi1 - a).abs().max((p.xi2 - b).abs()) / a.hypot(b));
            for s in [-3.0, -0.4, 2.0] {
                let v = phase_s0_xi(s, a, b)?;
                forms = forms.max((phase_s0(s, z) - v).abs() / v.abs().max(1.0));
            }
        }
        let h = 1e-5;
        let mut fd = 0f64;
        let mut stat = 0f64;
        for s in [-3.0, -0.4, 2.0] {
            for z in [C64::new(0.3, -0.7), C64::new(-1.1, 0.2), C64::new(0.05, 1.4)] {
                let (gr, gi) = grad_s0(s, z);
                let dr = (phase_s0(s, z + h) - phase_s0(s, z - h)) / (2.0 * h);
                let di = (phase_s0(s, z + C64::new(0.0, h)) - phase_s0(s, z - C64::new(0.0, h))) / (2.0 * h);
                fd = fd.max((gr - dr).abs()).max((gi - di).abs());
            }
            for z in crate::asymptotics::stationary_points(s)? {
                let (gr, gi) = grad_s0(s, z);
                stat = stat.max(gr.abs()).max(gi.abs());
            }
        }
        let pass = round < 1e-14 && forms < 1e-12 && fd < 1e-6 && stat < 1e-12;
        Ok((pass, format!("round_trip={round:.1e} s0_forms={forms:.1e} grad_fd={fd:.1e} stationary_grad={stat:.1e}")))
    }

    fn reality(&self) -> Verdict {
        let g = &self.sweep()?.grid;
        Ok((g.reality_violation < 1e-8, format!("max|s_c(λ) − conj s_c(λ̄)|={:.2e} max|s_c|={:.3e}", g.reality_violation, g.max_abs())))
    }

    fn born_scaling(&self) -> Verdict {
        let mut logs = Vec::new();
        let mut detail = String::new();
        for &e in &self.scale.born_epsilons {
            let u0 = InitialData::gaussian(self.scale.physical, e);
            let g = forward_sweep(&u0, self.scale.spectral, self.scale.sweep_tol)?.grid;
            let b = born_grid(&u0, self.scale.spectral);
            let d = max_diff(&g.values, &b.values);
            detail.push_str(&format!("eps={e:.1e}:{d:.3e} "));
            logs.push((e.ln(), d.ln()));
        }
        let n = logs.len() as f64;
        let (mx, my) = (logs.iter().map(|p| p.0).sum::<f64>() / n, logs.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        Ok(((slope - 2.0).abs() <= 0.1, format!("{detail}slope={slope:.4}")))
    }

    fn round_trip(&self) -> Verdict {
        let solver = self.solver()?;
        let eps = self.scale.epsilon;
        let k = self.scale.round_trip_points;
        let (mut worst, mut worst_linear) = (0f64, 0f64);
        for i in 0..k {
            for j in 0..k {
                let x = [-2.0 + 4.0 * i as f64 / (k - 1) as f64, -2.0 + 4.0 * j as f64 / (k - 1) as f64, 0.0];
                let u = solver.reconstruct_u(x)?;
                let want = eps * (-PI * (x[0] * x[0] + x[1] * x[1])).exp();
                worst = worst.max((u.total.re - want).abs());
                worst_linear = worst_linear.max((u.u1.re - want).abs());
            }
        }
        let rel = worst / eps;
        Ok((
            rel <= 0.05,
            format!(
                "rel_Linf={rel:.4} (u1 alone {:.4}, nonlinear part {:.1e}) spectral_boundary_ratio={:.2e}",
                worst_linear / eps,
                (worst - worst_linear).abs() / eps,
                solver.grid.boundary_ratio()
            ),
        ))
    }

    fn airy_suite(&self) -> Verdict {
        let want = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
        let ai0 = (airy(0.0).value - want).abs().max((airy_series(0.0).0 - want).abs());

        let mut bound = 0f64;
        for i in 0..=80_000 {
            let z = -400.0 + i as f64 * 0.01;
            bound = bound.max(airy(z).value.abs() * (1.0 + z.abs()).powf(0.25));
        }

        // |Ai(−x) − leading| against the magnitude coefficient of the next-order term
        let c1 = 5.0 / 72.0 * 1.5 / PI.sqrt();
        let mut envelope = 0f64;
        for x in [10.0f64, 20.0] {
            let diff = (airy(-x).value - airy_neg_leading(x)).abs();
            let rest = (airy(-x).value - airy_neg_leading(x) - airy_neg_next_order(x)).abs();
            envelope = envelope.max(diff / (c1 * x.powf(-1.75)));
            if rest > diff {
                return Ok((false, format!("next-order term does not improve the envelope at x={x}")));
            }
        }

        let s = self.scale.airy_switch;
        let mut switch = 0f64;
        for z in [s, -s] {
            let lo = airy_with_switch(z, z.abs() + 1e-9).value;
            let hi = airy_with_switch(z, z.abs() - 1e-9).value;
            switch = switch.max((lo - hi).abs());
        }

        let mut prop = 0f64;
        for &(t, a, eta) in &[(2.0, -1.0, 0.0), (1.0, 0.5, 0.3), (3.0, -2.0, -0.4)] {
            let f = move |z: f64| C64::from_polar(1.0, -2.0 * t * (a * z + z.powi(3)) + 2.0 * PI * z * eta);
            let fr = move |z: f64| 2.0 * t * (3.0 * z * z + a.abs()) + 2.0 * PI * eta.abs();
            let o = windowed_oracle(&f, &fr, 6.0);
            let v = airy_propagator(t, a, eta)?;
            prop = prop.max((v - o.value).norm() / v.norm());
        }

        let mut cubic = 0f64;
        for t in [1.0, 4.0] {
            for c in [-3.0, 0.0, 3.0] {
                let f = move |x: f64| C64::from_polar(1.0, 2.0 * PI * t * (4.0 * PI * PI * x.powi(3) + c * x));
                let fr = move |x: f64| 2.0 * PI * t * (12.0 * PI * PI * x * x + c.abs());
                let o = windowed_oracle(&f, &fr, 2.0);
                let v = cubic_phase_integral(t, c)?;
                cubic = cubic.max((v - o.value).norm() / v.norm().max(1e-3));
            }
        }
        let pass = ai0 < 1e-9 && bound <= AIRY_BOUND && envelope <= 2.0 && switch < 1e-9 && prop <= 1e-5 && cubic <= 1e-5;
        Ok((
            pass,
            format!(
                "ai0={ai0:.1e} bound={bound:.4}/{AIRY_BOUND} envelope/next_order={envelope:.3} switch={switch:.1e} propagator={prop:.1e} cubic={cubic:.1e}"
            ),
        ))
    }

    fn representation(&self) -> Verdict {
        let u0 = self.datum();
        let opts = RepresentationOptions::default();
        let lambdas = [C64::new(0.3, 0.4), C64::new(-0.2, 0.5), C64::new(0.1, -0.6)];
        let worst_on = |sweep: &ForwardSweep| -> Result<f64> {
            let solver = InverseSolver::new(sweep.grid.clone(), InverseOptions::default())?;
            let kernel = kernel_from_sweep(&u0, sweep, self.scale.sweep_tol)?;
            let mut worst = 0f64;
            for &t in &self.scale.ct1_times {
                for &lp in &lambdas {
                    let x = ConeFrame::position(-3.0, 0.0, t);
                    worst = worst.max(ct1_crosscheck(&solver, &u0, &kernel, x, lp, &opts)?.discrepancy);
                }
            }
            Ok(worst)
        };
        let coarse = worst_on(&forward_sweep(&u0, self.scale.spectral_coarse, self.scale.sweep_tol)?)?;
        let fine = worst_on(self.sweep()?)?;
        Ok((fine < 1e-3 && fine < coarse, format!("max discrepancy coarse={coarse:.3e} fine={fine:.3e}")))
    }

    fn neg_decay(&self) -> Verdict {
        let g = &self.sweep()?.grid;
        let res = self.scale.resolution;
        let mut samples = Vec::new();
        for &t in &self.scale.times {
            let x = ConeFrame::position(-3.0, 0.0, t);
            let d = u1_direct(g, x, res)?.value;
            samples.push((t, (d - leading_order(g, x, 1.0)?).norm()));
        }
        let fit = decay_fit(&samples)?;
        let t0 = self.scale.times[0];
        let mut osc = Vec::new();
        for k in 0..self.scale.frequency_samples {
            let t = t0 + self.scale.frequency_step * k as f64;
            osc.push((t, u1_direct(g, ConeFrame::position(-3.0, 0.0, t), res)?.value.re * t));
        }
        let f = fit_frequency(&osc, 1.0, 8.0)?;
        // a = −3 gives r = 1 and 2π d/dt[t S₀(a; ir)] = 4r³
        let expected = 4.0;
        let rel = (f.omega - expected).abs() / expected;
        Ok((
            fit.slope <= -1.15 && rel <= 0.02,
            format!("slope={:.3} omega={:.5} (4r³={expected}, rel {rel:.1e}, explained {:.4})", fit.slope, f.omega, f.explained),
        ))
    }

    fn pos_decay(&self) -> Verdict {
        let g = &self.sweep()?.grid;
        let mut samples = Vec::new();
        let mut scaled = Vec::new();
        for &t in &self.scale.times {
            let v = u1_direct(g, ConeFrame::position(3.0, 0.0, t), self.scale.resolution)?.value.norm();
            samples.push((t, v));
            scaled.push(v * t.powf(4.0 / 3.0));
        }
        let fit = decay_fit(&samples)?;
        // bounded: the t^{4/3}-scaled column never exceeds twice its first entry
        let growth = scaled.iter().fold(0.0f64, |m, &v| m.max(v)) / scaled[0];
        let col: Vec<String> = scaled.iter().map(|v| format!("{v:.3e}")).collect();
        Ok((fit.slope <= -1.15 && growth <= 2.0, format!("slope={:.3} |u1|t^(4/3)=[{}] growth={growth:.3}", fit.slope, col.join(", "))))
    }

    fn perturbative_decay(&self) -> Verdict {
        let solver = self.solver()?;
        let eps0 = self.datum().epsilon0;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for &t in &self.scale.times {
            let u = solver.reconstruct_u(ConeFrame::position(-3.0, 0.0, t))?;
            a.push((t, u.u20.norm()));
            b.push((t, u.u21.norm()));
        }
        let (fa, fb) = (decay_fit(&a)?, decay_fit(&b)?);
        let cap = 10.0 * eps0 * eps0;
        let pass = fa.slope <= -1.0 && fb.slope <= -1.0 && a[0].1 <= cap && b[0].1 <= cap;
        Ok((
            pass,
            format!(
                "u20 slope={:.3} |u20(t0)|={:.2e}; u21 slope={:.3} |u21(t0)|={:.2e}; 10·eps0²={cap:.2e}",
                fa.slope, a[0].1, fb.slope, b[0].1
            ),
        ))
    }

    fn eigenfunction_decay(&self) -> Verdict {
        let solver = self.solver()?;
        let mut samples = Vec::new();
        for &t in &self.scale.times {
            samples.push((t, solver.neumann_m(ConeFrame::position(-3.0, 0.0, t))?.max_deviation()));
        }
        let fit = decay_fit(&samples)?;
        let col: Vec<String> = samples.iter().map(|s| format!("{:.3e}", s.1)).collect();
        Ok((fit.slope <= -0.4, format!("slope={:.3} max|m−1|=[{}]", fit.slope, col.join(", "))))
    }

    fn direct_solver(&self) -> Verdict {
        let e2e = &self.scale.end_to_end;
        let mut notes = Vec::new();

        // (a) fourth order: a strongly nonlinear dipole on a small box
        let small = Lattice2D::square(16.0, 32)?;
        let strong = dipole(small, 4.0 / ((2.0 * PI).sqrt() * 0.5f64.exp()), 2.0)?;
        let run = |dt: f64| -> Result<Vec<C64>> {
            let mut ev = Evolver::new(&strong, EvolveOptions::new(dt).stiff())?;
            ev.advance_to(-0.4)?;
            Ok(ev.state()?.field.data)
        };
        let (s1, s2, s3) = (run(0.1)?, run(0.05)?, run(0.025)?);
        let ratio = max_diff(&s1, &s2) / max_diff(&s2, &s3);
        let order_ok = (ratio - 16.0).abs() <= 0.3 * 16.0;
        notes.push(format!("halving_ratio={ratio:.2}"));

        // (b) linear mode against the exact propagator
        let u0 = dipole(e2e.physical, e2e.amplitude, e2e.width)?;
        let mut lin = Evolver::new(&u0, EvolveOptions::new(e2e.dt).linear().stiff())?;
        let start = lin.state()?.field;
        let t_last = *e2e.times.last().expect("times");
        lin.advance_to(-t_last)?;
        let exact = linear_evolve(&start, -t_last)?;
        let lin_err = max_diff(&lin.state()?.field.data, &exact.data) / u0.field.max_abs();
        let lin_ok = lin_err < 1e-10;
        notes.push(format!("linear_err={lin_err:.1e}"));

        // (c, d) reference runs on the large box and on the check box
        let reference = |lat: Lattice2D| -> Result<(Vec<f64>, f64, f64)> {
            let mut ev = Evolver::new(&dipole(lat, e2e.amplitude, e2e.width)?, EvolveOptions::new(e2e.dt).stiff())?;
            let mut vals = Vec::new();
            for &t in &e2e.times {
                ev.advance_to(-t)?;
                let x = ConeFrame::position(-3.0, 0.0, t);
                vals.push(ev.value_at(x[0], x[1]));
            }
            let st = ev.state()?;
            Ok((vals, st.l2_drift(), st.boundary_strip_ratio(0.05)))
        };
        let (direct, drift, strip) = reference(e2e.direct)?;
        let (check, _, _) = reference(e2e.direct_check)?;
        let box_change = direct.iter().zip(&check).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let drift_ok = drift < 1e-6;
        notes.push(format!("l2_drift={drift:.1e}"));
        notes.push(format!("strip_ratio={strip:.1e}{}", if strip < 1e-4 { "" } else { " (containment flag)" }));

        let ist_u0 = dipole(e2e.physical, e2e.amplitude, e2e.width)?;
        let mut errors = Vec::new();
        let mut lead_grid: Option<ScatteringGrid> = None;
        for &n in &e2e.counts {
            let grid = forward_sweep(&ist_u0, Lattice2D::square(e2e.spectral_length, n)?, self.scale.sweep_tol)?.grid;
            let solver = InverseSolver::new(grid.clone(), InverseOptions::default())?.with_u1_resampling(e2e.u1_nodes / n)?;
            let mut sq = 0.0;
            for (k, &t) in e2e.times.iter().enumerate() {
                let u = solver.reconstruct_u(ConeFrame::position(-3.0, 0.0, t))?;
                sq += (u.total.re - direct[k]).powi(2);
            }
            errors.push(sq.sqrt());
            if n == e2e.leading_count {
                lead_grid = Some(grid);
            }
        }
        let refine_ok = errors.windows(2).all(|w| w[1] < w[0]);
        let finest = *errors.last().expect("counts");
        // the reference must be stable well below the finest comparison error
        let box_ok = box_change < 0.1 * finest;
        let errs: Vec<String> = e2e.counts.iter().zip(&errors).map(|(n, e)| format!("{n}:{e:.2e}")).collect();
        notes.push(format!("ist_err=[{}]", errs.join(", ")));
        notes.push(format!("box_change={box_change:.1e}"));

        let lg = lead_grid.ok_or_else(|| KpError::InvalidArgument("leading_count not among counts".into()))?;
        let mut scaled = Vec::new();
        for (k, &t) in e2e.times.iter().enumerate() {
            let x = ConeFrame::position(-3.0, 0.0, t);
            scaled.push((direct[k] - leading_order(&lg, x, 1.0)?.re).abs() * t);
        }
        let lead_ok = scaled.windows(2).all(|w| w[1] < w[0]);
        let sc: Vec<String> = scaled.iter().map(|v| format!("{v:.2e}")).collect();
        notes.push(format!("|u_direct−u_lead|·t=[{}]", sc.join(", ")));

        let pass = order_ok && lin_ok && drift_ok && refine_ok && box_ok && lead_ok;
        Ok((pass, notes.join(" ")))
    }
}

/// Runs every criterion at `scale`.
pub fn run_suite(scale: SuiteScale, report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let ids: Vec<u32> = CRITERIA.iter().map(|c| c.0).collect();
    Suite::new(scale).run_all(&ids, report)
}
