//! The stages behind the CLI commands. Each stage reads an [`ExperimentConfig`], writes its files
//! into an output directory and returns a summary; nothing here prints unless `verbose` is set.
//!
//! Files written (all relative to the output directory):
//!
//! | stage       | files                                                               |
//! |-------------|---------------------------------------------------------------------|
//! | forward     | `scattering.kpsc`                                                   |
//! | evolve      | `evolved.kpgrid`, `evolve.dat`                                      |
//! | reconstruct | `reconstruct.dat`                                                   |
//! | asymptote   | `asymptote.dat`                                                     |
//! | compare     | `compare.csv`, `residual_direct_ist.dat`, `residual_direct_leading.dat` |

use crate::asymptotics::{cone_frame, decay_fit, leading_order, u1_direct};
use crate::config::ExperimentConfig;
use crate::direct::{EvolveOptions, Evolver};
use crate::forward::{forward_sweep, ScatteringGrid};
use crate::inverse::{InverseOptions, InverseSolver};
use crate::io::{load_scattering, save_grid, save_scattering, write_plot};
use crate::lattice::Lattice2D;
use crate::{KpError, Result};
use std::path::{Path, PathBuf};

pub const SCATTERING_FILE: &str = "scattering.kpsc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Pipeline {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub verbose: bool,
}

#[derive(Debug, Clone)]
pub struct ForwardSummary {
    pub path: PathBuf,
    pub reality_violation: f64,
    pub sup_u0: f64,
    pub max_s: f64,
    pub max_iterations: usize,
    pub max_contraction: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveSummary {
    pub path: PathBuf,
    pub steps: usize,
    pub l2_drift: f64,
    pub projection_removed_mean: f64,
    pub strip_ratio: f64,
    /// (t, u at the ray point).
    pub samples: Vec<(f64, f64)>,
}

/// One (t, x) row of the three-way comparison. A missing value carries its reason in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub x: [f64; 3],
    pub u_direct: Option<f64>,
    pub u_reconstructed: Option<f64>,
    pub u_leading: Option<f64>,
    pub failures: Vec<String>,
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some((a? - b?).abs())
}

impl ComparisonRow {
    pub fn residual_direct_reconstructed(&self) -> Option<f64> {
        diff(self.u_direct, self.u_reconstructed)
    }

    pub fn residual_direct_leading(&self) -> Option<f64> {
        diff(self.u_direct, self.u_leading)
    }

    pub fn residual_reconstructed_leading(&self) -> Option<f64> {
        diff(self.u_reconstructed, self.u_leading)
    }

    /// |u_direct|·t^{4/3}, the bounded column of the POS regime.
    pub fn direct_scaled(&self) -> Option<f64> {
        Some(self.u_direct?.abs() * self.t.powf(4.0 / 3.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub config_hash: u64,
    pub physical: Lattice2D,
    pub spectral: Lattice2D,
    pub direct: Lattice2D,
    pub a: f64,
    pub t2: f64,
    pub version: &'static str,
    pub rows: Vec<ComparisonRow>,
}

const CSV_COLUMNS: [&str; 12] = [
    "t",
    "x1",
    "x2",
    "x3",
    "u_direct",
    "u_reconstructed",
    "u_leading",
    "res_direct_reconstructed",
    "res_direct_leading",
    "res_reconstructed_leading",
    "u_direct_scaled",
    "failure",
];

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.12e}")).unwrap_or_default()
}

impl ComparisonReport {
    /// Slope of a residual column against t, if at least four rows carry it.
    pub fn slope(&self, column: fn(&ComparisonRow) -> Option<f64>) -> Option<f64> {
        let s: Vec<(f64, f64)> = self.rows.iter().filter_map(|r| Some((r.t, column(r)?))).collect();
        decay_fit(&s).ok().map(|f| f.slope)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# kpii {} config_hash={:016x} physical={}x{}/{}x{} spectral={}x{}/{}x{} direct={}x{}/{}x{} ray_a={} ray_t2={}\n",
            self.version,
            self.config_hash,
            self.physical.count[0],
            self.physical.count[1],
            self.physical.length[0],
            self.physical.length[1],
            self.spectral.count[0],
            self.spectral.count[1],
            self.spectral.length[0],
            self.spectral.length[1],
            self.direct.count[0],
            self.direct.count[1],
            self.direct.length[0],
            self.direct.length[1],
            self.a,
            self.t2
        );
        let fmt_slope = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "none".into());
        s.push_str(&format!(
            "# slope_res_direct_reconstructed={} slope_res_direct_leading={} slope_u_direct_scaled={}\n",
            fmt_slope(self.slope(ComparisonRow::residual_direct_reconstructed)),
            fmt_slope(self.slope(ComparisonRow::residual_direct_leading)),
            fmt_slope(self.slope(ComparisonRow::direct_scaled)),
        ));
        s.push_str(&CSV_COLUMNS.join(","));
        s.push('\n');
        for r in &self.rows {
            let fields = [
                format!("{:.12e}", r.t),
                format!("{:.12e}", r.x[0]),
                format!("{:.12e}", r.x[1]),
                format!("{:.12e}", r.x[2]),
                cell(r.u_direct),
                cell(r.u_reconstructed),
                cell(r.u_leading),
                cell(r.residual_direct_reconstructed()),
                cell(r.residual_direct_leading()),
                cell(r.residual_reconstructed_leading()),
                cell(r.direct_scaled()),
                r.failures.join(";"),
            ];
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }
}

fn tag(stage: &str, e: &KpError) -> String {
    format!("{stage}:{}", e.kind())
}

impl Pipeline {
    pub fn new(config: ExperimentConfig, out: impl Into<PathBuf>) -> Result<Self> {
        let out = out.into();
        std::fs::create_dir_all(&out)?;
        Ok(Self { config, out, verbose: false })
    }

    fn note(&self, msg: &str) {
        if self.verbose {
            eprintln!("kpii: {msg}");
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn compute_scattering(&self) -> Result<(ScatteringGrid, ForwardSummary)> {
        let c = &self.config;
        let u0 = c.datum()?;
        self.note(&format!("forward sweep over {} spectral nodes", c.spectral.len()));
        let sweep = forward_sweep(&u0, c.spectral, c.forward_tol)?;
        let path = self.path(SCATTERING_FILE);
        save_scattering(&path, &sweep.grid)?;
        let summary = ForwardSummary {
            path,
            reality_violation: sweep.grid.reality_violation,
            sup_u0: u0.field.max_abs(),
            max_s: sweep.grid.max_abs(),
            max_iterations: sweep.max_iterations,
            max_contraction: sweep.max_contraction,
        };
        Ok((sweep.grid, summary))
    }

    pub fn run_forward(&self) -> Result<ForwardSummary> {
        Ok(self.compute_scattering()?.1)
    }

    /// Reads `scattering.kpsc` from the output directory if it matches the configured spectral
    /// lattice, otherwise runs the forward stage.
    pub fn scattering(&self) -> Result<ScatteringGrid> {
        let path = self.path(SCATTERING_FILE);
        if path.exists() {
            let g = load_scattering(&path)?;
            if g.xi_lattice == self.config.spectral {
                self.note(&format!("using {}", path.display()));
                return Ok(g);
            }
            self.note("stored scattering data is on a different lattice; recomputing");
        }
        Ok(self.compute_scattering()?.0)
    }

    /// Direct evolution to each configured time; `u` at the ray point per time, final field saved.
    pub fn run_evolve(&self) -> Result<EvolveSummary> {
        let c = &self.config;
        let u0 = c.datum_on(c.direct_lattice())?;
        let mut ev = Evolver::new(&u0, EvolveOptions::new(c.direct.dt).stiff())?;
        let mut samples = Vec::new();
        let mut rows = Vec::new();
        for &t in &c.times {
            self.note(&format!("evolving to t = {t}"));
            ev.advance_to(-t)?;
            let x = c.ray_point(t);
            let u = ev.value_at(x[0], x[1]);
            let drift = ev.state()?.l2_drift();
            samples.push((t, u));
            rows.push(vec![t, u, drift]);
        }
        let st = ev.state()?;
        let path = self.path("evolved.kpgrid");
        save_grid(&path, &st.field)?;
        write_plot(&self.path("evolve.dat"), &["t", "u_direct", "l2_drift"], &rows)?;
        Ok(EvolveSummary {
            path,
            steps: st.steps,
            l2_drift: st.l2_drift(),
            projection_removed_mean: st.projection_removed_mean,
            strip_ratio: st.boundary_strip_ratio(0.05),
            samples,
        })
    }

    fn solver(&self) -> Result<InverseSolver> {
        let opts = InverseOptions { tol: self.config.neumann_tol, ..InverseOptions::default() };
        InverseSolver::new(self.scattering()?, opts)
    }

    /// IST reconstruction at the ray points; rows (t, u₁, u₂,₀, u₂,₁, u, imaginary residue).
    pub fn run_reconstruct(&self) -> Result<Vec<Vec<f64>>> {
        let solver = self.solver()?;
        let mut rows = Vec::new();
        for &t in &self.config.times {
            self.note(&format!("reconstructing at t = {t}"));
            let u = solver.reconstruct_u(self.config.ray_point(t))?;
            rows.push(vec![t, u.u1.re, u.u20.re, u.u21.re, u.total.re, u.imag_residue]);
        }
        write_plot(&self.path("reconstruct.dat"), &["t", "u1", "u20", "u21", "u", "imag_residue"], &rows)?;
        Ok(rows)
    }

    /// Leading-order formula against direct oscillatory u₁; rows (t, u_leading, u1_direct, |diff|).
    pub fn run_asymptote(&self) -> Result<Vec<Vec<f64>>> {
        let c = &self.config;
        let grid = self.scattering()?;
        let mut rows = Vec::new();
        for &t in &c.times {
            let x = c.ray_point(t);
            let lead = leading_order(&grid, x, c.regime_threshold)?.re;
            let d = u1_direct(&grid, x, c.resolution)?.value.re;
            rows.push(vec![t, lead, d, (d - lead).abs()]);
        }
        write_plot(&self.path("asymptote.dat"), &["t", "u_leading", "u1_direct", "residual"], &rows)?;
        Ok(rows)
    }

    /// Direct, IST and leading-order values at every ray point. Stage failures are tagged on the
    /// affected rows and the run continues; only I/O failures abort.
    pub fn run_compare(&self) -> Result<ComparisonReport> {
        let c = &self.config;
        let mut rows: Vec<ComparisonRow> = c
            .times
            .iter()
            .map(|&t| ComparisonRow { t, x: c.ray_point(t), u_direct: None, u_reconstructed: None, u_leading: None, failures: Vec::new() })
            .collect();

        match c.datum_on(c.direct_lattice()).and_then(|u0| Evolver::new(&u0, EvolveOptions::new(c.direct.dt).stiff())) {
            Ok(mut ev) => {
                let mut broken: Option<String> = None;
                for r in rows.iter_mut() {
                    if let Some(b) = &broken {
                        r.failures.push(b.clone());
                        continue;
                    }
                    self.note(&format!("direct solver to t = {}", r.t));
                    match ev.advance_to(-r.t) {
                        Ok(()) => r.u_direct = Some(ev.value_at(r.x[0], r.x[1])),
                        Err(e) => {
                            let t = tag("direct", &e);
                            r.failures.push(t.clone());
                            broken = Some(t);
                        }
                    }
                }
            }
            Err(e) => rows.iter_mut().for_each(|r| r.failures.push(tag("direct", &e))),
        }

        match self.solver() {
            Ok(solver) => {
                for r in rows.iter_mut() {
                    self.note(&format!("reconstruction at t = {}", r.t));
                    match solver.reconstruct_u(r.x) {
                        Ok(u) => r.u_reconstructed = Some(u.total.re),
                        Err(e) => r.failures.push(tag("reconstruct", &e)),
                    }
                    match cone_frame(r.x, c.regime_threshold).and_then(|_| leading_order(&solver.grid, r.x, c.regime_threshold)) {
                        Ok(v) => r.u_leading = Some(v.re),
                        Err(e) => r.failures.push(tag("leading", &e)),
                    }
                }
            }
            Err(KpError::Io(e)) => return Err(KpError::Io(e)),
            Err(e) => rows.iter_mut().for_each(|r| {
                r.failures.push(tag("reconstruct", &e));
                r.failures.push(tag("leading", &e));
            }),
        }

        let report = ComparisonReport {
            config_hash: c.hash(),
            physical: c.physical,
            spectral: c.spectral,
            direct: c.direct_lattice(),
            a: c.a,
            t2: c.t2,
            version: VERSION,
            rows,
        };
        std::fs::write(self.path("compare.csv"), report.to_csv())?;
        let two_col = |f: fn(&ComparisonRow) -> Option<f64>| -> Vec<Vec<f64>> {
            report.rows.iter().filter_map(|r| Some(vec![r.t, f(r)?])).collect()
        };
        write_plot(
            &self.path("residual_direct_ist.dat"),
            &["t", "abs_u_direct_minus_u_reconstructed"],
            &two_col(ComparisonRow::residual_direct_reconstructed),
        )?;
        write_plot(
            &self.path("residual_direct_leading.dat"),
            &["t", "abs_u_direct_minus_u_leading"],
            &two_col(ComparisonRow::residual_direct_leading),
        )?;
        Ok(report)
    }
}

/// Writes and reads back a small grid file in `dir`; `Err` means the directory is unusable.
pub fn io_probe(dir: &Path) -> Result<()> {
    use crate::lattice::ComplexField2D;
    let lat = Lattice2D::square(4.0, 8)?;
    let f = ComplexField2D::from_real_fn(lat, |a, b| a - 2.0 * b);
    let p = dir.join(".kpii-io-probe.kpgrid");
    save_grid(&p, &f)?;
    let back = crate::io::load_grid(&p);
    let _ = std::fs::remove_file(&p);
    if back? != f {
        return Err(KpError::Format("grid file did not round-trip".into()));
    }
    Ok(())
}
