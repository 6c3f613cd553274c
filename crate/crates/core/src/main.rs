use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use darkspin::channels::ChannelKind;
use darkspin::cli::{
    exit_code, figure::figure, in_pool, oracle_check::oracle_check, oracle_check::report_passed,
    parse_angle, sweep::sweep, AxisSpec, Dataset, Format, RunConfig, EXIT_VERIFICATION,
    WORKERS_ENV,
};
use darkspin::{Error, Result};

/// Spin squeezing and pairwise entanglement of EIT dark states.
///
/// Angles accept a `pi:` prefix meaning units of π, e.g. `--theta pi:0.5`.
/// Exit codes: 0 success, 2 configuration error, 3 capacity error,
/// 4 verification failure.
#[derive(Parser)]
#[command(name = "darkspin", version, about, long_about)]
struct Cli {
    /// TOML file with any of the parameter keys (N, n, theta, K, pair_sep,
    /// channel, p, gamma, gamma_t, tau, a, omega_m, grid, quantity, [[axis]],
    /// workers, output, format). Flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for grid evaluation; defaults to machine parallelism.
    #[arg(long, global = true, env = WORKERS_ENV, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the dataset behind a figure (fig2 .. fig15).
    Figure {
        tag: String,
        #[command(flatten)]
        params: Params,
    },
    /// Evaluate one quantity over one or two parameter axes.
    Sweep {
        /// zeta3, xi1, xi2, xi3, concurrence, s_p or retrieval.
        #[arg(long)]
        quantity: Option<String>,
        /// Axis as name=start;stop;count with name in N, n, theta, K,
        /// pair_sep, p, gamma_t. Give at most two.
        #[arg(long, value_parser = parse_axis)]
        axis: Vec<AxisSpec>,
        #[command(flatten)]
        params: Params,
    },
    /// Compare every closed form with the brute-force oracle.
    OracleCheck {
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Args, Default)]
struct Params {
    /// Number of atoms N.
    #[arg(long = "atoms", short = 'N')]
    atoms: Option<u32>,
    /// Number of excitations n.
    #[arg(long = "excitations", short = 'n')]
    excitations: Option<u32>,
    /// Mixing angle θ in [0, π).
    #[arg(long, value_parser = parse_angle_arg, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Wave-vector difference K.
    #[arg(long = "wave-vector", short = 'K', value_parser = parse_angle_arg, allow_hyphen_values = true)]
    wave_vector: Option<f64>,
    /// Site separation l of the atom pair.
    #[arg(long)]
    pair_sep: Option<u32>,
    /// Decoherence channel: adc, pdc or dpc.
    #[arg(long, value_parser = parse_channel)]
    channel: Option<ChannelKind>,
    /// Decoherence strength p in [0, 1].
    #[arg(long)]
    p: Option<f64>,
    /// Decay rate γ in 1/s.
    #[arg(long)]
    gamma: Option<f64>,
    /// Dimensionless decay γt for retrieval sweeps.
    #[arg(long)]
    gamma_t: Option<f64>,
    /// Pulse duration τ in seconds.
    #[arg(long)]
    tau: Option<f64>,
    /// Pulse half-width a in seconds (default τ/5).
    #[arg(long)]
    a: Option<f64>,
    /// Peak Rabi frequency Ω_m in 1/s.
    #[arg(long)]
    omega_m: Option<f64>,
    /// Grid resolution.
    #[arg(long)]
    grid: Option<usize>,
}

impl Params {
    fn into_config(self) -> RunConfig {
        RunConfig {
            atoms: self.atoms,
            excitations: self.excitations,
            theta: self.theta,
            wave_vector: self.wave_vector,
            pair_sep: self.pair_sep,
            channel: self.channel,
            p: self.p,
            gamma: self.gamma,
            gamma_t: self.gamma_t,
            tau: self.tau,
            a: self.a,
            omega_m: self.omega_m,
            grid: self.grid,
            ..Default::default()
        }
    }
}

fn parse_angle_arg(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn parse_axis(s: &str) -> std::result::Result<AxisSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_channel(s: &str) -> std::result::Result<ChannelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Outcome {
    Data(Dataset),
    Verification(Dataset),
}

fn run(cli: Cli) -> Result<(Outcome, RunConfig)> {
    let file = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let (tag, flags) = match cli.command {
        Command::Figure { tag, params } => (Some(tag), params.into_config()),
        Command::Sweep {
            quantity,
            axis,
            params,
        } => (
            None,
            RunConfig {
                quantity,
                axis,
                ..params.into_config()
            },
        ),
        Command::OracleCheck { params } => (Some(String::new()), params.into_config()),
    };
    let cfg = file.overlay(flags).overlay(RunConfig {
        workers: cli.workers.map(|w| w as usize),
        output: cli.output,
        format: cli.format,
        ..Default::default()
    });
    // Plumbing fields do not take part in the physics.
    let physics = RunConfig {
        workers: None,
        output: None,
        format: None,
        ..cfg.clone()
    };
    let outcome = in_pool(cfg.workers, || -> Result<Outcome> {
        match tag.as_deref() {
            Some("") => Ok(Outcome::Verification(oracle_check(&physics)?)),
            Some(t) => Ok(Outcome::Data(figure(t, &physics)?)),
            None => Ok(Outcome::Data(sweep(&physics)?)),
        }
    })??;
    Ok((outcome, cfg))
}

fn emit(ds: &Dataset, cfg: &RunConfig) -> Result<()> {
    let text = match cfg.format.unwrap_or_default() {
        Format::Csv => ds.to_csv()?,
        Format::Json => ds.to_json()? + "\n",
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(outcome, cfg)| match outcome {
        Outcome::Data(ds) => emit(&ds, &cfg).map(|_| 0),
        Outcome::Verification(ds) => {
            emit(&ds, &cfg)?;
            Ok(if report_passed(&ds) {
                0
            } else {
                EXIT_VERIFICATION
            })
        }
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
