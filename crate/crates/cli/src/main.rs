//! `pamcat` command-line driver.
//!
//! Subcommands expose the library operations one by one (`kernels`, `sse`,
//! `moment`, `spectral`, `polaron`, `lyapunov`, `scan`, `intermittency`)
//! and `run` executes a staged configuration file, writing CSV artifacts
//! plus a manifest whose replay is byte-identical.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use pamcat_core::error::Error;
use pamcat_core::harness::csvout::g17;
use pamcat_core::harness::{self, config};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pamcat", version, about = "lattice reactant-catalyst simulation suite")]
struct Cli {
    /// Master seed for all stochastic subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory for `run`; other subcommands print to stdout.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print random-walk kernel values as CSV.
    Kernels(KernelsArgs),
    /// Standalone exclusion runs: raw occupancies or a duality summary.
    Sse(SseArgs),
    /// Annealed moment by Feynman-Kac and/or the direct solver.
    Moment(MomentArgs),
    /// Top eigenvalue of the small-system generator plus an MC slope check.
    Spectral(SpectralArgs),
    /// Polaron variational value, optionally with a time-window kernel.
    Polaron(PolaronArgs),
    /// Fit an annealed Lyapunov exponent over a time window.
    Lyapunov(LyapunovArgs),
    /// kappa-scan of kappa (lambda_p - rho) against the asymptote.
    Scan(ScanArgs),
    /// lambda_2 - lambda_1 gap scan.
    Intermittency(IntermittencyArgs),
    /// Execute a staged configuration file (or replay a manifest).
    Run(RunArgs),
}

#[derive(Args)]
struct KernelsArgs {
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    /// Semicolon-separated points, e.g. "0 0 0; 1 2 0".
    #[arg(long, default_value = "0 0 0")]
    points: String,
    /// Walk dimension (1 or 3).
    #[arg(long, default_value_t = 3)]
    dim: u32,
}

#[derive(Args)]
struct SseArgs {
    #[arg(long)]
    side: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    replicas: usize,
    /// bernoulli, single or slab.
    #[arg(long, default_value = "bernoulli")]
    init: String,
    /// summary or raw.
    #[arg(long, default_value = "summary")]
    mode: String,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    p: u32,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    side: usize,
    #[arg(long)]
    samples: usize,
    /// fk, direct or both.
    #[arg(long, default_value = "both")]
    method: String,
    /// Direct-solver sample count when method = both.
    #[arg(long)]
    direct_samples: Option<usize>,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long)]
    side: usize,
    #[arg(long)]
    particles: usize,
    #[arg(long)]
    kappa: f64,
    /// One potential value per state; random small potential if omitted.
    #[arg(long)]
    potential_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    potential_scale: f64,
    #[arg(long, default_value_t = true)]
    mc_check: bool,
    #[arg(long, default_value_t = 20_000)]
    mc_samples: usize,
}

#[derive(Args)]
struct PolaronArgs {
    #[arg(long)]
    coeff: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Upper window limit; `inf` for none.
    #[arg(long, default_value = "inf")]
    kcut: String,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long, default_value_t = 40.0)]
    rmax_mult: f64,
    /// Gaussian start widths in units of sigma_ref.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 1.0, 4.0, 16.0])]
    starts: Vec<f64>,
    /// Also print the optimizer profile as CSV `r,f` to this file.
    #[arg(long)]
    profile_out: Option<PathBuf>,
}

#[derive(Args)]
struct LyapunovArgs {
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    p: u32,
    #[arg(long)]
    t_min: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long)]
    side: usize,
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    grid_points: usize,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    p: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    kappas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    sides: Vec<usize>,
    #[arg(long)]
    t_min: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long)]
    samples: usize,
    /// Precomputed unit-coefficient polaron value (solved if omitted).
    #[arg(long)]
    p3_unit: Option<f64>,
}

#[derive(Args)]
struct IntermittencyArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    kappas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    sides: Vec<usize>,
    #[arg(long)]
    t_min: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long)]
    samples: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Staged configuration file.
    #[arg(long, conflicts_with = "replay")]
    config: Option<PathBuf>,
    /// Re-execute a manifest and verify digests.
    #[arg(long)]
    replay: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<Error>() {
                Some(Error::Numerical(_)) | Some(Error::Instability { .. }) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Kernels(a) => kernels_cmd(a),
        Command::Sse(a) => stage_to_stdout(
            "sse",
            &[
                ("side", a.side.to_string()),
                ("rho", g17(a.rho)),
                ("t", g17(a.t)),
                ("replicas", a.replicas.to_string()),
                ("init", a.init.clone()),
                ("mode", a.mode.clone()),
            ],
            cli,
        ),
        Command::Moment(a) => {
            let mut kv = vec![
                ("kappa", g17(a.kappa)),
                ("rho", g17(a.rho)),
                ("p", a.p.to_string()),
                ("t", g17(a.t)),
                ("side", a.side.to_string()),
                ("samples", a.samples.to_string()),
                ("method", a.method.clone()),
            ];
            if let Some(d) = a.direct_samples {
                kv.push(("direct_samples", d.to_string()));
            }
            stage_to_stdout("moment", &kv, cli)
        }
        Command::Spectral(a) => {
            let mut kv = vec![
                ("side", a.side.to_string()),
                ("particles", a.particles.to_string()),
                ("kappa", g17(a.kappa)),
                ("potential_scale", g17(a.potential_scale)),
                ("mc_check", a.mc_check.to_string()),
                ("mc_samples", a.mc_samples.to_string()),
            ];
            if let Some(p) = &a.potential_file {
                kv.push(("potential_file", p.display().to_string()));
            }
            stage_to_stdout("spectral", &kv, cli)
        }
        Command::Polaron(a) => polaron_cmd(a, cli),
        Command::Lyapunov(a) => stage_to_stdout(
            "lyapunov",
            &[
                ("kappa", g17(a.kappa)),
                ("rho", g17(a.rho)),
                ("p", a.p.to_string()),
                ("t_min", g17(a.t_min)),
                ("t_max", g17(a.t_max)),
                ("side", a.side.to_string()),
                ("samples", a.samples.to_string()),
                ("grid_points", a.grid_points.to_string()),
            ],
            cli,
        ),
        Command::Scan(a) => {
            let mut kv = vec![
                ("rho", g17(a.rho)),
                ("p", a.p.to_string()),
                ("kappas", join(&a.kappas)),
                ("sides", a.sides.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")),
                ("t_min", g17(a.t_min)),
                ("t_max", g17(a.t_max)),
                ("samples", a.samples.to_string()),
            ];
            if let Some(p3) = a.p3_unit {
                kv.push(("p3_unit", g17(p3)));
            }
            stage_to_stdout("scan", &kv, cli)
        }
        Command::Intermittency(a) => stage_to_stdout(
            "intermittency",
            &[
                ("rho", g17(a.rho)),
                ("kappas", join(&a.kappas)),
                ("sides", a.sides.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")),
                ("t_min", g17(a.t_min)),
                ("t_max", g17(a.t_max)),
                ("samples", a.samples.to_string()),
            ],
            cli,
        ),
        Command::Run(a) => run_cmd(a, cli),
    }
}

fn kernels_cmd(a: &KernelsArgs) -> anyhow::Result<()> {
    use pamcat_core::kernels::{kernel_value, Dimension, KernelQuery};
    let dim = match a.dim {
        1 => Dimension::One,
        3 => Dimension::Three,
        d => return Err(Error::domain(format!("dimension must be 1 or 3, got {d}")).into()),
    };
    println!("t,x1,x2,x3,value");
    for &t in &a.t {
        for point in a.points.split(';') {
            let coords: Vec<i64> = point
                .split_whitespace()
                .map(|c| c.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::domain(format!("bad point `{point}`")))?;
            let displacement = match (a.dim, coords.len()) {
                (1, 1) => coords.clone(),
                (3, 3) => coords.clone(),
                _ => {
                    return Err(Error::domain(format!(
                        "point `{point}` does not match dimension {}",
                        a.dim
                    ))
                    .into())
                }
            };
            let v = kernel_value(&KernelQuery { dimension: dim, time: t, displacement: displacement.clone() })?;
            let mut padded = displacement;
            padded.resize(3, 0);
            println!("{},{},{},{},{}", g17(t), padded[0], padded[1], padded[2], g17(v));
        }
    }
    Ok(())
}

fn polaron_cmd(a: &PolaronArgs, cli: &Cli) -> anyhow::Result<()> {
    use pamcat_core::polaron::{solve_cutoff_polaron, SolveOptions};
    let kcut: f64 = if a.kcut == "inf" { f64::INFINITY } else { a.kcut.parse().map_err(|_| Error::domain("bad kcut"))? };
    let windowed = !(a.eps == 0.0 && kcut.is_infinite());
    let defaults = if windowed { SolveOptions::windowed() } else { SolveOptions::default() };
    let opts = SolveOptions {
        grid_n: a.grid_n.unwrap_or(defaults.grid_n),
        rmax_mult: a.rmax_mult,
        starts: a.starts.clone(),
        ..defaults
    };
    let res = solve_cutoff_polaron(a.coeff, a.eps, kcut, &opts)?;
    println!("coeff,eps,kcut,value,grad_norm,iters,converged");
    println!(
        "{},{},{},{},{},{},{}",
        g17(a.coeff),
        g17(a.eps),
        g17(kcut),
        g17(res.value),
        g17(res.grad_norm),
        res.iterations,
        res.converged
    );
    if let Some(path) = &a.profile_out {
        let mut out = String::from("r,f\n");
        for (r, f) in res.profile.radii.iter().zip(&res.profile.values) {
            out.push_str(&format!("{},{}\n", g17(*r), g17(*f)));
        }
        std::fs::write(path, out)?;
    }
    let _ = cli;
    Ok(())
}

/// Run a single stage through the harness executor and print its CSV.
fn stage_to_stdout(kind: &str, kv: &[(&str, String)], cli: &Cli) -> anyhow::Result<()> {
    let mut text = format!("seed = {}\n[{kind}]\n", cli.seed);
    for (k, v) in kv {
        text.push_str(&format!("{k} = {v}\n"));
    }
    let dir = tempdir(kind)?;
    let outcome = harness::run_config_text(&text, &dir)?;
    for file in &outcome.files {
        let bytes = std::fs::read(dir.join(file))?;
        print!("{}", String::from_utf8_lossy(&bytes));
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

fn tempdir(tag: &str) -> anyhow::Result<PathBuf> {
    let dir = std::env::temp_dir().join(format!("pamcat_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run_cmd(a: &RunArgs, cli: &Cli) -> anyhow::Result<()> {
    if let Some(manifest) = &a.replay {
        let (_, mismatches) = harness::replay_manifest(manifest, &cli.out_dir)?;
        if mismatches.is_empty() {
            println!("replay ok: all artifact digests match");
            Ok(())
        } else {
            Err(Error::numerical(format!("replay mismatch in {}", mismatches.join(", "))).into())
        }
    } else if let Some(path) = &a.config {
        // validate before executing so schema errors exit with code 2
        let text = std::fs::read_to_string(path)?;
        config::parse(&text)?;
        let outcome = harness::run_config_file(path, &cli.out_dir)?;
        println!(
            "wrote {} artifact(s) and manifest.ini to {}",
            outcome.files.len(),
            cli.out_dir.display()
        );
        Ok(())
    } else {
        Err(Error::domain("run needs --config or --replay").into())
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| g17(*x)).collect::<Vec<_>>().join(",")
}
