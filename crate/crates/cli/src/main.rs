use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use abflux::squid::Hypothesis;
use abflux::verify::SuiteOptions;
use abflux_cli::commands::{self, DEFAULT_GRADIENT};
use abflux_cli::config::RawConfig;
use abflux_cli::{parse_config, CliError, ScenarioConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "abflux", version, about = "Solenoid fields, interaction energy, shielding and SQUID runs")]
struct Cli {
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Write CSV here instead of the path in the config or stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum HypothesisArg {
    Vp,
    Ie,
}

#[derive(Subcommand)]
enum Command {
    /// B and A of the solenoid along a radial line.
    Fields {
        #[arg(long, default_value_t = 41)]
        samples: usize,
        /// Line length in solenoid radii.
        #[arg(long, default_value_t = 3.0)]
        extent: f64,
    },
    /// Interaction energy by overlap integral and by A·qv.
    Energy,
    /// EMF induced in the winding by the charge moving in a straight line.
    Emf {
        #[arg(long, default_value_t = 41)]
        samples: usize,
        #[arg(long, requires = "t_end", allow_hyphen_values = true)]
        t_start: Option<f64>,
        #[arg(long, requires = "t_start", allow_hyphen_values = true)]
        t_end: Option<f64>,
    },
    /// Two-beam fringes for an enclosed flux.
    Interfere {
        /// Enclosed flux in units of h/2e.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        flux_quanta: f64,
        /// Phase gradient across the screen (rad/m).
        #[arg(long, default_value_t = DEFAULT_GRADIENT)]
        gradient: f64,
        #[arg(long, default_value_t = 2e-6)]
        half_width: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Spectrum of the charge's field pulse at the shield and the gap gate.
    Shield,
    /// Flux-locked-loop experiment under one hypothesis.
    SquidRun {
        #[arg(long, value_enum)]
        hypothesis: HypothesisArg,
    },
    /// Commutators of truncated LC-oscillator operators.
    LcCheck {
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 1e-9)]
        inductance: f64,
        #[arg(long, default_value_t = 1e-12)]
        capacitance: f64,
    },
    /// Run every verification check.
    VerifyAll {
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: Option<&PathBuf>) -> Result<ScenarioConfig, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(parse_config(&text)?)
        }
        None => Ok(ScenarioConfig::from_raw(RawConfig::default())?),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load(cli.config.as_ref()).map_err(|e| match e {
        CliError::Io(io) => CliError::Config(abflux_cli::ConfigError::Syntax(io.to_string())),
        other => other,
    })?;
    let target = cli.output.or_else(|| cfg.raw.output.path.clone());
    let mut out: Box<dyn Write> = match &target {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = match cli.command {
        Command::Fields { samples, extent } => commands::fields(&mut out, &cfg, samples, extent),
        Command::Energy => commands::energy(&mut out, &cfg),
        Command::Emf { samples, t_start, t_end } => commands::emf(&mut out, &cfg, samples, t_start.zip(t_end)),
        Command::Interfere {
            flux_quanta,
            gradient,
            half_width,
            points,
        } => commands::interfere(&mut out, &cfg, flux_quanta, gradient, half_width, points),
        Command::Shield => commands::shield(&mut out, &cfg),
        Command::SquidRun { hypothesis } => {
            let h = match hypothesis {
                HypothesisArg::Vp => Hypothesis::VectorPotential,
                HypothesisArg::Ie => Hypothesis::InteractionEnergy,
            };
            commands::squid_run(&mut out, &cfg, h)
        }
        Command::LcCheck {
            dim,
            inductance,
            capacitance,
        } => commands::lc_check(&mut out, dim, inductance, capacitance),
        Command::VerifyAll { seed } => {
            let mut opts = SuiteOptions::default();
            if let Some(seed) = seed {
                opts.seed = seed;
            }
            commands::verify_all(&mut out, &opts)
        }
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abflux: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
