//! Command-line front end: `run`, `verify` and `dump-operator`.

pub mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use trcomm::dense::{adjoint_report, DEFAULT_MAX_DIMS};
use trcomm::io::{fmt17, write_signals_csv, SnapshotWriter};
use trcomm::propagator::{BoundaryMonitor, Tee};
use trcomm::schemes::{solve, NoisyChannel, StopReason};
use trcomm::{build_scene, run_identity_suite, CommunicationChannel, Recorder, Tier, VerifyOptions};

pub use config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_VERIFY_FAILED: u8 = 3;

/// Boundary-ring energy share above which a run prints a reflection warning.
pub const BOUNDARY_WARNING_RATIO: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "trcomm", version, about = "Time-reversal communication experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the base signal of a configured scene.
    Run {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory; falls back to `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `scene.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the operator identity suite.
    Verify {
        #[arg(long, default_value = "tiny")]
        tier: Tier,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace the reversal sign mask, e.g. `1,1,1`.
        #[arg(long, hide = true, value_parser = parse_mask)]
        corrupt_sign_mask: Option<[i8; 3]>,
    },
    /// Assemble `A` column by column and compare its weighted transpose with
    /// the assembled mirror adjoint.
    DumpOperator {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Refuse when `dim Z + dim Z-hat` exceeds this.
        #[arg(long, default_value_t = DEFAULT_MAX_DIMS)]
        max_dims: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_mask(s: &str) -> Result<[i8; 3], String> {
    let v: Vec<i8> = s
        .split(',')
        .map(|p| p.trim().parse::<i8>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c] if v.iter().all(|x| *x == 1 || *x == -1) => Ok([*a, *b, *c]),
        _ => Err("expected three comma-separated signs".into()),
    }
}

/// Dispatches a parsed command, printing to `out`. Returns the exit code.
pub fn execute<W: Write>(cli: &Cli, out: &mut W) -> u8 {
    let result = match &cli.command {
        Command::Run { config, out: dir, seed } => cmd_run(config, dir.as_deref(), *seed, out),
        Command::Verify { tier, seed, corrupt_sign_mask } => cmd_verify(*tier, *seed, *corrupt_sign_mask, out),
        Command::DumpOperator { config, out: dir, max_dims, seed } => {
            cmd_dump_operator(config, dir, *max_dims, *seed, out)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?))
}

pub fn cmd_run<W: Write>(config: &Path, out_dir: Option<&Path>, seed: Option<u64>, out: &mut W) -> anyhow::Result<u8> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.scene.seed = s;
    }
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .ok_or_else(|| anyhow!("no output directory: pass --out or set output.dir"))?;
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let built = build_scene::<f64>(&cfg.scene)?;
    let scheme = cfg.scheme.to_config();
    let noisy;
    let channel: &dyn CommunicationChannel<f64> = if cfg.scene.noise > 0.0 {
        noisy = NoisyChannel::new(&built.scene, cfg.scene.noise, cfg.scene.seed ^ 0x6e6f_6973_65)?;
        &noisy
    } else {
        &built.scene
    };
    let (r, trace) = solve(&built.pilot, channel, &scheme)?;

    if cfg.output.trace_csv {
        let mut w = create(&dir, "trace.csv")?;
        trace.write_csv(&mut w)?;
        w.flush()?;
    }

    let scene = &built.scene;
    let mut monitor = BoundaryMonitor::new(&scene.medium, &scene.grid);
    let received = if cfg.output.snapshot_every > 0 {
        let (g, n) = (&scene.grid, cfg.output.snapshot_every);
        let mut snaps = SnapshotWriter::new(create(&dir, "snapshots.bin")?, g.nx(), g.ny(), g.nt(), n)?;
        let received = scene.apply_a_with(&r, Some(&mut Tee(&mut monitor, &mut snaps as &mut dyn Recorder<f64>)))?;
        snaps.finish()?;
        received
    } else {
        scene.apply_a_with(&r, Some(&mut monitor))?
    };
    if cfg.output.signals {
        for (name, s) in [("base_signal.csv", &r), ("received.csv", &received), ("pilot.csv", &built.pilot)] {
            let mut w = create(&dir, name)?;
            write_signals_csv(&mut w, s)?;
            w.flush()?;
        }
    }

    let last = trace.last().ok_or_else(|| anyhow!("scheme produced no iterations"))?;
    writeln!(out, "scheme          {:?}", trace.scheme)?;
    writeln!(out, "lambda          {}", fmt17(trace.lambda))?;
    writeln!(out, "iterations      {}", trace.iterations())?;
    writeln!(out, "stop            {:?}", trace.stop)?;
    if built.pilot.max_abs() == 0.0 {
        writeln!(out, "zero pilot: nothing to transmit")?;
    }
    writeln!(out, "final residual  {}", fmt17(last.residual))?;
    writeln!(out, "base energy     {}", fmt17(last.base_energy))?;
    let energies = trcomm::signal::antenna_energies(&received);
    let target = energies[built.pilot_user];
    for (k, e) in energies.iter().enumerate() {
        if k == built.pilot_user {
            continue;
        }
        let ratio = if target > 0.0 { e / target } else { 0.0 };
        writeln!(out, "interference    user {} {}", k + 1, fmt17(ratio))?;
    }
    let boundary = monitor.ratio();
    if boundary > BOUNDARY_WARNING_RATIO {
        writeln!(
            out,
            "warning: energy next to the reflecting boundary reached {} of the total; enlarge the domain",
            fmt17(boundary)
        )?;
    }
    Ok(match trace.stop {
        StopReason::Tolerance | StopReason::Stationary => EXIT_OK,
        StopReason::MaxIter => EXIT_NOT_CONVERGED,
    })
}

pub fn cmd_verify<W: Write>(tier: Tier, seed: u64, mask: Option<[i8; 3]>, out: &mut W) -> anyhow::Result<u8> {
    let opts = VerifyOptions { tier, seed, sign_mask_override: mask };
    let results = run_identity_suite(&opts)?;
    for r in &results {
        writeln!(out, "{r}")?;
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    writeln!(out, "{} checks, {} failed", results.len(), failed)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

pub fn cmd_dump_operator<W: Write>(
    config: &Path,
    dir: &Path,
    max_dims: usize,
    seed: Option<u64>,
    out: &mut W,
) -> anyhow::Result<u8> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.scene.seed = s;
    }
    let built = build_scene::<f64>(&cfg.scene)?;
    let (a, report) = adjoint_report(&built.scene, max_dims)?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut w = create(dir, "operator.csv")?;
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| fmt17(a[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    let mut rep = create(dir, "adjoint_report.txt")?;
    writeln!(rep, "rows {}", report.rows)?;
    writeln!(rep, "cols {}", report.cols)?;
    writeln!(rep, "relative_discrepancy {}", fmt17(report.relative_discrepancy))?;
    rep.flush()?;
    writeln!(
        out,
        "A is {}x{}; weighted transpose vs assembled adjoint: {}",
        report.rows,
        report.cols,
        fmt17(report.relative_discrepancy)
    )?;
    Ok(EXIT_OK)
}
