//! `jspec` — batch front-end over jspec-core. Plans come from JSON files
//! (`--config plan.json`); the flags cover quick one-off queries. Every run
//! writes its artifacts plus a `manifest.json` recording the effective plan,
//! its hash, and each declared check. Exit status: 0 when all declared
//! checks pass, 1 when any fails, 2 on configuration or solver errors.

mod commands;
mod config;
mod emit;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use config::RunConfig;
use emit::Artifacts;

#[derive(Parser)]
#[command(
    name = "jspec",
    version,
    about = "Spectra, kernels, and limiting densities of periodically modulated Jacobi matrices",
    after_help = "Set JSPEC_THREADS to cap parallelism. Plans are flat JSON objects; \
                  flags override the file. All runs are deterministic: the same plan \
                  byte-reproduces every artifact."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON plan file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Builtin family name (chebyshev, hermite, laguerre, synthetic_iia, meixner)
    #[arg(long)]
    family: Option<String>,
    /// Size/depth knob; meaning per command (see the command's help)
    #[arg(long)]
    n: Option<usize>,
    /// Probe point, written like `0+1i`
    #[arg(long)]
    z: Option<String>,
    /// Output directory (default `.`)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the n×n truncation.
    ///
    /// Writes spectrum.csv with columns: index, eigenvalue. `tol` is the
    /// bisection width (default Gershgorin-scaled 1e-13).
    Spectrum(Common),
    /// Interval counting measures against the limiting density model.
    ///
    /// Needs `n_grid` and `intervals` in the plan. Writes density.csv with
    /// columns: family, case, n, rho_n, interval_lo, interval_hi, count,
    /// normalized, predicted, rel_err — plus summary.json. The declared
    /// check compares final-n relative errors against `tol` (default 0.1).
    Density(Common),
    /// Normalized log-derivative transform sweep at probe points `z`.
    ///
    /// Writes cauchy.csv with columns: n, rho_n, z_re, z_im, value_re,
    /// value_im, limit_re, limit_im, rel_err. When the family fits a
    /// density model, final-n errors are checked against `tol`
    /// (default 0.02).
    Cauchy(Common),
    /// Case classification of the one-period transfer product at the origin.
    ///
    /// Prints and writes classify.json: {"case", "epsilon", "trace0"}.
    /// `n` is the probe depth (default 100000).
    Classify(Common),
    /// Cumulative eigenvalue-ratio log-products along block index.
    ///
    /// Writes levinson.csv with columns: j, log_partial. Declared check:
    /// the partials are nondecreasing. `n` is the last block (default
    /// 100000), `m_start` the first (default 1).
    Levinson(Common),
    /// Counting-measure vs kernel-measure transform gap at `z`.
    ///
    /// Writes kernel.json. Declared checks: the gap respects the rank
    /// bound 8/|Im z|; the kernel mass equals n+1; with `shift` set, the
    /// shifted gap respects its total-variation bound. `tol` is the
    /// quadrature tolerance (default 1e-9).
    Kernel(Common),
    /// Recover the model density from its transform by boundary values.
    ///
    /// Samples `n` points per interval (default 21), extrapolating over
    /// `eps` offsets. Writes stieltjes.csv with columns: x, recovered,
    /// predicted, abs_err, singular. Declared check: abs_err <= tol
    /// (default 1e-6) on non-singular rows.
    Stieltjes(Common),
    /// Eigenvalue counts in fixed intervals across a size sweep.
    ///
    /// Needs `intervals` and `n_grid`. Writes gapcount.csv with columns:
    /// interval_lo, interval_hi, n, count. With `require_constant` set,
    /// declares one constancy check per interval.
    Gapcount(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Density(_) => "density",
            Command::Cauchy(_) => "cauchy",
            Command::Classify(_) => "classify",
            Command::Levinson(_) => "levinson",
            Command::Kernel(_) => "kernel",
            Command::Stieltjes(_) => "stieltjes",
            Command::Gapcount(_) => "gapcount",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c)
            | Command::Density(c)
            | Command::Cauchy(c)
            | Command::Classify(c)
            | Command::Levinson(c)
            | Command::Kernel(c)
            | Command::Stieltjes(c)
            | Command::Gapcount(c) => c,
        }
    }
}

fn init_threads() {
    if let Ok(val) = std::env::var("JSPEC_THREADS") {
        if let Ok(k) = val.parse::<usize>() {
            if k >= 1 {
                // Ignore failure: the pool may already exist in tests.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let common = cli.command.common();
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(
        cli.command.name(),
        common.family.as_deref(),
        common.n,
        common.z.as_deref(),
        common.out.as_deref(),
    )?;
    cfg.validate()?;
    let family = cfg.family()?;
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut art = Artifacts::new(out_dir)?;

    let outcome = match &cli.command {
        Command::Spectrum(_) => commands::spectrum(&cfg, &family, &mut art)?,
        Command::Density(_) => commands::density(&cfg, &family, &mut art)?,
        Command::Cauchy(_) => commands::cauchy(&cfg, &family, &mut art)?,
        Command::Classify(_) => commands::classify(&cfg, &family, &mut art)?,
        Command::Levinson(_) => commands::levinson(&cfg, &family, &mut art)?,
        Command::Kernel(_) => commands::kernel(&cfg, &family, &mut art)?,
        Command::Stieltjes(_) => commands::stieltjes(&cfg, &family, &mut art)?,
        Command::Gapcount(_) => commands::gapcount(&cfg, &family, &mut art)?,
    };

    for check in &outcome.checks {
        match (check.measured, check.tolerance) {
            (Some(m), Some(t)) => println!(
                "check {}: {} (measured {m:e}, tolerance {t:e})",
                check.name,
                if check.pass { "PASS" } else { "FAIL" }
            ),
            _ => println!(
                "check {}: {}",
                check.name,
                if check.pass { "PASS" } else { "FAIL" }
            ),
        }
    }
    let pass = emit::write_manifest(&mut art, cli.command.name(), &cfg, &outcome)?;
    println!("manifest: {}", art.dir().join("manifest.json").display());
    Ok(pass)
}

fn main() {
    init_threads();
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    });
}
