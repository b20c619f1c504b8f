use kpii::forward::{build_scattering_grid, InitialData};
use kpii::io::{load_grid, load_scattering, save_grid, save_scattering, write_plot};
use kpii::lattice::{ComplexField2D, Lattice2D};
use kpii::KpError;
use std::path::PathBuf;

fn dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("kpii-files-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn scattering_file_round_trip_on_disk() {
    let d = dir("sc");
    let u0 = InitialData::gaussian(Lattice2D::square(8.0, 16).unwrap(), 0.01);
    let g = build_scattering_grid(&u0, Lattice2D::square(4.0, 8).unwrap(), 1e-12).unwrap();
    let p = d.join("s.kpsc");
    save_scattering(&p, &g).unwrap();
    let back = load_scattering(&p).unwrap();
    assert_eq!(back, g);
    // a grid loader must refuse a scattering file
    assert!(matches!(load_grid(&p), Err(KpError::Format(_))));
    std::fs::remove_dir_all(d).unwrap();
}

#[test]
fn truncated_and_missing_files() {
    let d = dir("trunc");
    let f = ComplexField2D::from_real_fn(Lattice2D::square(4.0, 8).unwrap(), |a, b| a * b);
    let p = d.join("g.kpgrid");
    save_grid(&p, &f).unwrap();
    let bytes = std::fs::read(&p).unwrap();
    std::fs::write(&p, &bytes[..bytes.len() - 16]).unwrap();
    let e = load_grid(&p).unwrap_err();
    assert!(matches!(e, KpError::Format(_)));
    assert_eq!(e.exit_code(), 4);
    let e = load_grid(&d.join("absent.kpgrid")).unwrap_err();
    assert!(matches!(e, KpError::Io(_)));
    assert_eq!(e.exit_code(), 4);
    std::fs::remove_dir_all(d).unwrap();
}

#[test]
fn plot_files_have_one_header_line() {
    let d = dir("plot");
    let p = d.join("r.dat");
    write_plot(&p, &["t", "residual"], &[vec![10.0, 1e-5], vec![20.0, 4e-6]]).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "# t residual");
    for l in &lines[1..] {
        let cols: Vec<f64> = l.split_whitespace().map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 2);
    }
    std::fs::remove_dir_all(d).unwrap();
}
