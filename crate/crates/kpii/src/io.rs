//! Binary grid and scattering-data files (little-endian).
//!
//! Grid: `KPGRID1\0`, u32 version, u32 N₁, u32 N₂, f64 L₁, f64 L₂, u8 space tag, then N₁N₂
//! complex128 samples row-major. Scattering: `KPSC1\0\0\0`, the same header, then the ξ₁ < 0 rows
//! followed by the ξ₁ > 0 rows.

use crate::forward::ScatteringGrid;
use crate::lattice::{ComplexField2D, Lattice2D, Space};
use crate::{KpError, Result, C64};
use std::path::Path;

pub const GRID_MAGIC: &[u8; 8] = b"KPGRID1\0";
pub const SCATTERING_MAGIC: &[u8; 8] = b"KPSC1\0\0\0";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 * 3 + 8 * 2 + 1;

fn space_tag(space: Space) -> u8 {
    match space {
        Space::Physical => 0,
        Space::Spectral => 1,
    }
}

fn encode(magic: &[u8; 8], lattice: Lattice2D, space: Space, data: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * data.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(lattice.count[0] as u32).to_le_bytes());
    out.extend_from_slice(&(lattice.count[1] as u32).to_le_bytes());
    out.extend_from_slice(&lattice.length[0].to_le_bytes());
    out.extend_from_slice(&lattice.length[1].to_le_bytes());
    out.push(space_tag(space));
    for z in data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn decode(magic: &[u8; 8], bytes: &[u8]) -> Result<(Lattice2D, Space, Vec<C64>)> {
    if bytes.len() < HEADER_LEN {
        return Err(KpError::Format(format!("truncated header: {} bytes", bytes.len())));
    }
    if &bytes[..8] != magic {
        return Err(KpError::Format(format!("bad magic {:?}", &bytes[..8])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(8);
    if version != FORMAT_VERSION {
        return Err(KpError::Format(format!("unsupported version {version}")));
    }
    let (n1, n2) = (u32_at(12) as usize, u32_at(16) as usize);
    let (l1, l2) = (f64_at(20), f64_at(28));
    let space = match bytes[36] {
        0 => Space::Physical,
        1 => Space::Spectral,
        t => return Err(KpError::Format(format!("unknown space tag {t}"))),
    };
    let lattice = Lattice2D::new(l1, l2, n1, n2).map_err(|e| KpError::Format(format!("bad lattice header: {e}")))?;
    let expected = HEADER_LEN + 16 * n1 * n2;
    if bytes.len() != expected {
        return Err(KpError::Format(format!("payload length {} does not match {}x{} lattice ({} bytes)", bytes.len(), n1, n2, expected)));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| C64::new(f64::from_le_bytes(c[..8].try_into().expect("8")), f64::from_le_bytes(c[8..].try_into().expect("8"))))
        .collect();
    Ok((lattice, space, data))
}

pub fn encode_grid(field: &ComplexField2D) -> Vec<u8> {
    encode(GRID_MAGIC, field.lattice, field.space, &field.data)
}

pub fn decode_grid(bytes: &[u8]) -> Result<ComplexField2D> {
    let (lattice, space, data) = decode(GRID_MAGIC, bytes)?;
    ComplexField2D::from_data(lattice, space, data)
}

pub fn encode_scattering(grid: &ScatteringGrid) -> Vec<u8> {
    encode(SCATTERING_MAGIC, grid.xi_lattice, Space::Spectral, &grid.values)
}

pub fn decode_scattering(bytes: &[u8]) -> Result<ScatteringGrid> {
    let (lattice, space, data) = decode(SCATTERING_MAGIC, bytes)?;
    if space != Space::Spectral {
        return Err(KpError::Format("scattering file must carry the spectral tag".into()));
    }
    ScatteringGrid::new(lattice, data)
}

pub fn save_grid(path: &Path, field: &ComplexField2D) -> Result<()> {
    Ok(std::fs::write(path, encode_grid(field))?)
}

pub fn load_grid(path: &Path) -> Result<ComplexField2D> {
    decode_grid(&std::fs::read(path)?)
}

pub fn save_scattering(path: &Path, grid: &ScatteringGrid) -> Result<()> {
    Ok(std::fs::write(path, encode_scattering(grid))?)
}

pub fn load_scattering(path: &Path) -> Result<ScatteringGrid> {
    decode_scattering(&std::fs::read(path)?)
}

/// Whitespace-separated columns under a one-line `# name name ...` header.
pub fn plot_text(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# {}\n", columns.join(" "));
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_plot(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    Ok(std::fs::write(path, plot_text(columns, rows))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexField2D {
        let lat = Lattice2D::new(8.0, 4.0, 8, 4).unwrap();
        ComplexField2D::from_fn(lat, |a, b| C64::new(a * b, a - b))
    }

    #[test]
    fn grid_header_layout() {
        let b = encode_grid(&sample());
        assert_eq!(&b[..8], b"KPGRID1\0");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 8);
        assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(b[20..28].try_into().unwrap()), 8.0);
        assert_eq!(f64::from_le_bytes(b[28..36].try_into().unwrap()), 4.0);
        assert_eq!(b[36], 0);
        assert_eq!(b.len(), 37 + 16 * 32);
        // first sample is the cell centre (−3.5, −1.5)
        assert_eq!(f64::from_le_bytes(b[37..45].try_into().unwrap()), 5.25);
        assert_eq!(f64::from_le_bytes(b[45..53].try_into().unwrap()), -2.0);
    }

    #[test]
    fn round_trip_and_errors() {
        let f = sample();
        let b = encode_grid(&f);
        assert_eq!(decode_grid(&b).unwrap(), f);
        assert!(matches!(decode_grid(&b[..b.len() - 3]), Err(KpError::Format(_))));
        assert!(matches!(decode_grid(&b[..20]), Err(KpError::Format(_))));
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode_grid(&bad).is_err());
        let mut v2 = b.clone();
        v2[8] = 2;
        assert!(decode_grid(&v2).is_err());
        assert!(decode_scattering(&b).is_err());
    }

    #[test]
    fn scattering_round_trip() {
        let lat = Lattice2D::square(4.0, 8).unwrap();
        let vals: Vec<C64> = (0..64).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
        let g = ScatteringGrid::new(lat, vals).unwrap();
        let b = encode_scattering(&g);
        assert_eq!(&b[..8], b"KPSC1\0\0\0");
        assert_eq!(b[36], 1);
        let back = decode_scattering(&b).unwrap();
        assert_eq!(back.values, g.values);
        assert_eq!(back.samples_minus(), g.samples_minus());
    }

    #[test]
    fn plot_format() {
        let s = plot_text(&["t", "u"], &[vec![1.0, 2.5], vec![2.0, -1.0]]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# t u");
        assert_eq!(lines[1].split_whitespace().count(), 2);
    }
}
