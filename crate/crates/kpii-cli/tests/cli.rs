use std::path::PathBuf;
use std::process::{Command, Output};

const TINY: &str = "[lattice]\nphysical_n = 16\nphysical_length = 8\nspectral_n = 8\nspectral_length = 4\n\
[direct]\nlength1 = 32\nlength2 = 32\nn1 = 32\nn2 = 32\ndt = 0.5\n\
[ray]\ntimes = 2, 4, 8, 16\n";

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("kpii-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn kpii(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpii")).args(args).env_remove("KPII_THREADS").output().unwrap()
}

fn error_line(o: &Output) -> String {
    let err = String::from_utf8_lossy(&o.stderr);
    err.lines().find(|l| l.starts_with("error kind=")).unwrap_or_else(|| panic!("no error line in {err:?}")).to_string()
}

fn config(dir: &PathBuf, text: &str) -> String {
    let p = dir.join("run.ini");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn config_errors_exit_2() {
    let d = scratch("cfg");
    let bad = config(&d, "[ray]\ntimes = 5, 1\n");
    let o = kpii(&["--config", &bad, "--out", d.to_str().unwrap(), "forward"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).starts_with("error kind=Config code=2 msg="));
    let o = kpii(&["--config", d.join("missing.ini").to_str().unwrap(), "forward"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kpii(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).starts_with("error kind=Usage code=2"));
}

#[test]
fn io_errors_exit_4() {
    let d = scratch("io");
    let cfg = config(&d, &format!("{TINY}[datum]\nprofile = file\npath = {}\n", d.join("nope.kpgrid").display()));
    let o = kpii(&["--config", &cfg, "--out", d.to_str().unwrap(), "forward"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(error_line(&o).starts_with("error kind=Io code=4"));
    // the output directory cannot be created under a regular file
    let blocker = d.join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = kpii(&["--out", blocker.join("sub").to_str().unwrap(), "forward"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn numeric_errors_exit_3() {
    let d = scratch("num");
    // a dt far beyond what the first-order check allows on this box trips nothing (stiff mode),
    // but a huge datum makes the forward Neumann series diverge
    let cfg = config(&d, &format!("{TINY}[datum]\namplitude = 40\n"));
    let o = kpii(&["--config", &cfg, "--out", d.to_str().unwrap(), "forward"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(error_line(&o).contains("code=3"));
}

#[test]
fn stages_write_their_files_and_compare_is_deterministic() {
    let d = scratch("stages");
    let cfg = config(&d, TINY);
    let out = d.join("out");
    let o = out.to_str().unwrap();
    for cmd in ["forward", "evolve", "reconstruct", "asymptote", "compare"] {
        let r = kpii(&["--config", &cfg, "--out", o, "--threads", "1", cmd]);
        assert_eq!(r.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&r.stderr));
        assert!(String::from_utf8_lossy(&r.stdout).starts_with(cmd));
    }
    for f in ["scattering.kpsc", "evolved.kpgrid", "evolve.dat", "reconstruct.dat", "asymptote.dat", "compare.csv",
              "residual_direct_ist.dat", "residual_direct_leading.dat"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let first = std::fs::read(out.join("compare.csv")).unwrap();
    let r = kpii(&["--config", &cfg, "--out", o, "--threads", "1", "compare"]);
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(first, std::fs::read(out.join("compare.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# kpii "));
    assert!(text.contains("config_hash="));
}

#[test]
fn threads_from_environment() {
    let d = scratch("env");
    let cfg = config(&d, TINY);
    let o = Command::new(env!("CARGO_BIN_EXE_kpii"))
        .args(["--config", &cfg, "--out", d.to_str().unwrap(), "forward"])
        .env("KPII_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_kpii")).args(["forward"]).env("KPII_THREADS", "two").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_subset() {
    let d = scratch("self");
    let o = kpii(&["--out", d.to_str().unwrap(), "selftest", "--only", "1,5"]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("PASS io:"));
    assert!(out.contains("PASS criterion 1 "));
    assert!(out.contains("PASS criterion 5 "));
}
