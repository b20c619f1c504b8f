use clap::{Parser, Subcommand};
use kpii::acceptance::{Suite, SuiteScale, CRITERIA, KNOWN_UNMET};
use kpii::config::ExperimentConfig;
use kpii::pipeline::{io_probe, Pipeline};
use kpii::KpError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kpii", version, about = "Inverse scattering lab for small-data KPII")]
struct Cli {
    /// Experiment configuration (INI-style sections); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "kpii-out")]
    out: PathBuf,
    /// Worker threads; 0 or unset uses the config value, then the rayon default.
    #[arg(long, global = true, env = "KPII_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering data s_c on the spectral lattice -> scattering.kpsc
    Forward,
    /// Direct pseudo-spectral evolution along the configured times -> evolved.kpgrid, evolve.dat
    Evolve,
    /// IST reconstruction at the ray points -> reconstruct.dat
    Reconstruct,
    /// Leading-order formula against direct u1 -> asymptote.dat
    Asymptote,
    /// Direct vs IST vs leading order -> compare.csv and residual plot files
    Compare,
    /// Acceptance suite at reduced resolution
    Selftest {
        /// Run at desk scale instead.
        #[arg(long)]
        desk: bool,
        /// Treat the known-unmet criteria as failures too.
        #[arg(long)]
        strict: bool,
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

/// One line on stderr: `error kind=<Kind> code=<exit code> msg="<text>"`.
fn fail(kind: &str, code: u8, msg: impl std::fmt::Display) -> ExitCode {
    let msg = msg.to_string().replace('"', "'").replace('\n', " ");
    eprintln!("error kind={kind} code={code} msg=\"{msg}\"");
    ExitCode::from(code)
}

fn fail_kp(e: &KpError) -> ExitCode {
    fail(e.kind(), e.exit_code() as u8, e)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("Usage", 2, e.to_string().lines().next().unwrap_or("bad arguments")),
    };

    let config = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail_kp(&e),
        },
        None => ExperimentConfig::default(),
    };
    for w in &config.warnings {
        eprintln!("warning: {w}");
    }

    let threads = cli.threads.filter(|&n| n > 0).unwrap_or(config.threads);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return fail("Threads", 2, e);
        }
    }

    if let Command::Selftest { desk, strict, only } = &cli.command {
        return selftest(&cli, *desk, *strict, only);
    }

    let mut pipeline = match Pipeline::new(config, &cli.out) {
        Ok(p) => p,
        Err(e) => return fail_kp(&e),
    };
    pipeline.verbose = cli.verbose;
    match run(&pipeline, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail_kp(&e),
    }
}

fn run(p: &Pipeline, command: &Command) -> kpii::Result<()> {
    let hash = p.config.hash();
    match command {
        Command::Forward => {
            let s = p.run_forward()?;
            println!(
                "forward file={} reality_violation={:.3e} sup_u0={:.6e} max_s={:.6e} max_iterations={} max_contraction={:.3e}",
                s.path.display(),
                s.reality_violation,
                s.sup_u0,
                s.max_s,
                s.max_iterations,
                s.max_contraction
            );
        }
        Command::Evolve => {
            let s = p.run_evolve()?;
            for (t, u) in &s.samples {
                println!("evolve t={t} u_direct={u:.12e}");
            }
            println!(
                "evolve file={} steps={} l2_drift={:.3e} removed_mean={:.3e} strip_ratio={:.3e}{}",
                s.path.display(),
                s.steps,
                s.l2_drift,
                s.projection_removed_mean,
                s.strip_ratio,
                if s.strip_ratio < 1e-4 { "" } else { " containment=flagged" }
            );
        }
        Command::Reconstruct => {
            for r in p.run_reconstruct()? {
                println!("reconstruct t={} u1={:.12e} u20={:.3e} u21={:.3e} u={:.12e} imag={:.1e}", r[0], r[1], r[2], r[3], r[4], r[5]);
            }
        }
        Command::Asymptote => {
            for r in p.run_asymptote()? {
                println!("asymptote t={} u_leading={:.12e} u1_direct={:.12e} residual={:.3e}", r[0], r[1], r[2], r[3]);
            }
        }
        Command::Compare => {
            let r = p.run_compare()?;
            let failed = r.rows.iter().filter(|r| !r.failures.is_empty()).count();
            println!(
                "compare file={} config_hash={hash:016x} rows={} failed_rows={failed}",
                p.path("compare.csv").display(),
                r.rows.len()
            );
        }
        Command::Selftest { .. } => unreachable!("handled before the pipeline is built"),
    }
    Ok(())
}

fn selftest(cli: &Cli, desk: bool, strict: bool, only: &[u32]) -> ExitCode {
    let probe_dir = cli.out.clone();
    let io_ok = std::fs::create_dir_all(&probe_dir).map_err(KpError::from).and_then(|_| io_probe(&probe_dir));
    match &io_ok {
        Ok(()) => println!("PASS io: grid file round trip in {}", probe_dir.display()),
        Err(e) => eprintln!("warning: skipping I/O checks, {} is not writable ({e})", probe_dir.display()),
    }

    let scale = if desk { SuiteScale::desk() } else { SuiteScale::reduced() };
    println!("selftest scale={}", scale.label);
    let ids: Vec<u32> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    let results = Suite::new(scale).run_all(&ids, |r| {
        let known = if r.pass || !r.known_unmet() { "" } else { " [known unmet]" };
        println!("{}{known}", r.line());
    });
    let passed = results.iter().filter(|r| r.pass).count();
    let blocking: Vec<u32> = results.iter().filter(|r| !r.pass && (strict || !r.known_unmet())).map(|r| r.id).collect();
    let known: Vec<u32> = results.iter().filter(|r| !r.pass && r.known_unmet()).map(|r| r.id).collect();
    println!("selftest passed={passed} failed={} known_unmet={known:?} (documented: {KNOWN_UNMET:?})", results.len() - passed);
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        fail("AcceptanceFailure", 3, format!("criteria {blocking:?} failed"))
    }
}
