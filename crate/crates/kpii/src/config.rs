//! Experiment configuration: flat `key = value` text with sections.
//!
//! ```text
//! [datum]
//! profile = gaussian        # gaussian | dipole | file
//! amplitude = 0.01
//! width = 1.0
//! path = u0.kpgrid          # profile = file only
//!
//! [lattice]
//! physical_n = 64
//! physical_length = 8
//! spectral_n = 32
//! spectral_length = 4
//!
//! [ray]
//! a = -3
//! t2 = 0
//! times = 10, 20, 40, 80
//!
//! [asymptotics]
//! regime_threshold = 0.1
//! resolution = 8
//!
//! [direct]
//! length1 = 512
//! length2 = 512
//! n1 = 1024
//! n2 = 1024
//! dt = 0.25
//!
//! [tolerances]
//! forward = 1e-12
//! neumann = 1e-12
//!
//! [run]
//! threads = 0
//! ```

use crate::forward::InitialData;
use crate::io::load_grid;
use crate::lattice::{ComplexField2D, Lattice2D};
use crate::{KpError, Result};
use ini::Ini;
use std::f64::consts::PI;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

const AMPLITUDE_GUARD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// amplitude·e^{−π|x|²/w²}
    Gaussian,
    /// Zero-mass datum amplitude·c·x₁e^{−π|x|²/w²}, normalised so that its maximum is `amplitude`.
    Dipole,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatumSpec {
    pub profile: Profile,
    pub amplitude: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectSpec {
    pub length: [f64; 2],
    pub count: [usize; 2],
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datum: DatumSpec,
    pub physical: Lattice2D,
    pub spectral: Lattice2D,
    pub a: f64,
    pub t2: f64,
    pub times: Vec<f64>,
    pub regime_threshold: f64,
    pub resolution: usize,
    pub direct: DirectSpec,
    pub forward_tol: f64,
    pub neumann_tol: f64,
    /// 0 means "use the default pool".
    pub threads: usize,
    /// Non-fatal notes produced while reading (e.g. the small-data guard).
    pub warnings: Vec<String>,
    canonical: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_str("").expect("defaults are valid")
    }
}

fn bad(section: &str, key: &str, msg: impl std::fmt::Display) -> KpError {
    KpError::Config(format!("[{section}] {key}: {msg}"))
}

struct Reader<'a> {
    ini: &'a Ini,
    canonical: String,
}

impl Reader<'_> {
    fn raw(&mut self, section: &str, key: &str, default: &str) -> String {
        let v = self
            .ini
            .section(Some(section))
            .and_then(|p| p.get(key))
            .map(|s| s.split('#').next().unwrap_or("").trim().to_string())
            .unwrap_or_else(|| default.to_string());
        self.canonical.push_str(&format!("{section}.{key}={v}\n"));
        v
    }

    fn f64(&mut self, section: &str, key: &str, default: f64) -> Result<f64> {
        let v = self.raw(section, key, &default.to_string());
        let x: f64 = v.parse().map_err(|_| bad(section, key, format!("not a number: {v:?}")))?;
        if !x.is_finite() {
            return Err(bad(section, key, "must be finite"));
        }
        Ok(x)
    }

    fn usize(&mut self, section: &str, key: &str, default: usize) -> Result<usize> {
        let v = self.raw(section, key, &default.to_string());
        v.parse().map_err(|_| bad(section, key, format!("not a non-negative integer: {v:?}")))
    }
}

impl ExperimentConfig {
    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| KpError::Config(e.to_string()))?;
        let known = ["datum", "lattice", "ray", "asymptotics", "direct", "tolerances", "run"];
        for (sec, _) in ini.iter() {
            if let Some(s) = sec {
                if !known.contains(&s) {
                    return Err(KpError::Config(format!("unknown section [{s}]")));
                }
                if ini.section_all(Some(s)).count() > 1 {
                    return Err(KpError::Config(format!("section [{s}] appears more than once")));
                }
            }
        }
        let mut r = Reader { ini: &ini, canonical: String::new() };
        let mut warnings = Vec::new();

        let profile = match r.raw("datum", "profile", "gaussian").as_str() {
            "gaussian" => Profile::Gaussian,
            "dipole" => Profile::Dipole,
            "file" => {
                let p = r.raw("datum", "path", "");
                if p.is_empty() {
                    return Err(bad("datum", "path", "required for profile = file"));
                }
                Profile::File(PathBuf::from(p))
            }
            other => return Err(bad("datum", "profile", format!("unknown profile {other:?}"))),
        };
        let amplitude = r.f64("datum", "amplitude", 0.01)?;
        let width = r.f64("datum", "width", 1.0)?;
        if width <= 0.0 {
            return Err(bad("datum", "width", "must be positive"));
        }
        if amplitude.abs() > AMPLITUDE_GUARD {
            warnings.push(format!("amplitude {amplitude} exceeds the small-data guard {AMPLITUDE_GUARD}"));
        }

        let lat = |n: usize, l: f64, s: &str| Lattice2D::square(l, n).map_err(|e| bad("lattice", s, e));
        let pn = r.usize("lattice", "physical_n", 64)?;
        let pl = r.f64("lattice", "physical_length", 8.0)?;
        let physical = lat(pn, pl, "physical_n")?;
        let sn = r.usize("lattice", "spectral_n", 32)?;
        let sl = r.f64("lattice", "spectral_length", 4.0)?;
        let spectral = lat(sn, sl, "spectral_n")?;

        let a = r.f64("ray", "a", -3.0)?;
        let t2 = r.f64("ray", "t2", 0.0)?;
        let times_raw = r.raw("ray", "times", "10, 20, 40, 80");
        let times = times_raw
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad("ray", "times", format!("not a number: {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if times.is_empty() || times.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(bad("ray", "times", "all times must be positive"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("ray", "times", "must be strictly increasing"));
        }

        let regime_threshold = r.f64("asymptotics", "regime_threshold", 0.1)?;
        let resolution = r.usize("asymptotics", "resolution", 8)?;
        if resolution < 2 {
            return Err(bad("asymptotics", "resolution", "must be at least 2"));
        }

        let d1 = r.f64("direct", "length1", 512.0)?;
        let d2 = r.f64("direct", "length2", 512.0)?;
        let m1 = r.usize("direct", "n1", 1024)?;
        let m2 = r.usize("direct", "n2", 1024)?;
        Lattice2D::new(d1, d2, m1, m2).map_err(|e| bad("direct", "n1", e))?;
        let dt = r.f64("direct", "dt", 0.25)?;
        if dt <= 0.0 {
            return Err(bad("direct", "dt", "must be positive"));
        }

        let forward_tol = r.f64("tolerances", "forward", 1e-12)?;
        let neumann_tol = r.f64("tolerances", "neumann", 1e-12)?;
        let threads = r.usize("run", "threads", 0)?;
        let canonical = r.canonical;

        Ok(Self {
            datum: DatumSpec { profile, amplitude, width },
            physical,
            spectral,
            a,
            t2,
            times,
            regime_threshold,
            resolution,
            direct: DirectSpec { length: [d1, d2], count: [m1, m2], dt },
            forward_tol,
            neumann_tol,
            threads,
            warnings,
            canonical,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| KpError::Config(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    /// Every key with its effective value, one `section.key=value` per line.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    /// FNV-1a of the canonical form; identical settings give identical hashes.
    pub fn hash(&self) -> u64 {
        let mut h = fnv::FnvHasher::default();
        h.write(self.canonical.as_bytes());
        h.finish()
    }

    /// Cone point at time t on the configured ray.
    pub fn ray_point(&self, t: f64) -> [f64; 3] {
        [t * (self.a - self.t2 * self.t2 / 3.0), t * self.t2, -t]
    }

    pub fn direct_lattice(&self) -> Lattice2D {
        Lattice2D::new(self.direct.length[0], self.direct.length[1], self.direct.count[0], self.direct.count[1])
            .expect("validated in from_str")
    }

    /// The datum sampled on `lattice` (builtin profiles) or read from disk.
    pub fn datum_on(&self, lattice: Lattice2D) -> Result<InitialData> {
        let DatumSpec { amplitude: eps, width: w, .. } = self.datum;
        let field = match &self.datum.profile {
            Profile::Gaussian => ComplexField2D::from_real_fn(lattice, |a, b| eps * (-PI * (a * a + b * b) / (w * w)).exp()),
            Profile::Dipole => {
                let c = (2.0 * PI).sqrt() * 0.5f64.exp() / w;
                ComplexField2D::from_real_fn(lattice, |a, b| eps * c * a * (-PI * (a * a + b * b) / (w * w)).exp())
            }
            Profile::File(p) => {
                let f = load_grid(p)?;
                if f.lattice != lattice {
                    return Err(KpError::ShapeMismatch(format!(
                        "{} holds a {}x{} lattice of size {}x{}, expected {}x{} of size {}x{}",
                        p.display(),
                        f.lattice.count[0],
                        f.lattice.count[1],
                        f.lattice.length[0],
                        f.lattice.length[1],
                        lattice.count[0],
                        lattice.count[1],
                        lattice.length[0],
                        lattice.length[1]
                    )));
                }
                f
            }
        };
        InitialData::new(field)
    }

    pub fn datum(&self) -> Result<InitialData> {
        self.datum_on(self.physical)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_desk_scale() {
        let c = ExperimentConfig::default();
        assert_eq!(c.physical.count, [64, 64]);
        assert_eq!(c.physical.length, [8.0, 8.0]);
        assert_eq!(c.spectral.count, [32, 32]);
        assert_eq!(c.times, vec![10.0, 20.0, 40.0, 80.0]);
        assert_eq!(c.a, -3.0);
        assert!(c.warnings.is_empty());
        assert_eq!(c.ray_point(10.0), [-30.0, 0.0, -10.0]);
    }

    #[test]
    fn parses_sections_and_comments() {
        let c = ExperimentConfig::from_str(
            "[datum]\nprofile = dipole # zero mass\namplitude = 0.002\nwidth = 2.5\n[ray]\na = 3\nt2 = 0.5\ntimes = 1, 2.5\n",
        )
        .unwrap();
        assert_eq!(c.datum.profile, Profile::Dipole);
        assert_eq!(c.datum.width, 2.5);
        assert_eq!(c.times, vec![1.0, 2.5]);
        let x = c.ray_point(2.0);
        assert!((x[0] - 2.0 * (3.0 - 0.25 / 3.0)).abs() < 1e-15 && x[1] == 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "[ray]\ntimes = 10, 5\n",
            "[ray]\ntimes = 0, 5\n",
            "[lattice]\nphysical_n = 63\n",
            "[datum]\nprofile = square\n",
            "[datum]\nprofile = file\n",
            "[bogus]\nx = 1\n",
            "[direct]\ndt = -1\n",
            "[datum]\namplitude = abc\n",
            "[ray]\na = -3\n[ray]\na = 2\n",
        ] {
            let e = ExperimentConfig::from_str(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
    }

    #[test]
    fn amplitude_guard_warns() {
        let c = ExperimentConfig::from_str("[datum]\namplitude = 0.2\n").unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn hash_tracks_settings() {
        let a = ExperimentConfig::from_str("[ray]\na = -3\n").unwrap();
        let b = ExperimentConfig::default();
        let c = ExperimentConfig::from_str("[ray]\na = -2\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn dipole_has_zero_line_means_and_unit_peak() {
        let c = ExperimentConfig::from_str("[datum]\nprofile = dipole\namplitude = 0.01\nwidth = 1\n").unwrap();
        let u = c.datum().unwrap();
        let lat = u.lattice();
        for j in 0..lat.count[1] {
            let s: f64 = (0..lat.count[0]).map(|i| u.field.get(i, j).re).sum();
            assert!(s.abs() < 1e-15);
        }
        // the continuous peak falls between nodes
        let peak = u.field.max_abs();
        assert!(peak <= 0.01 && peak > 0.97 * 0.01, "{peak}");
    }
}
