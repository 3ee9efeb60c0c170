use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hcpp_energy::energy::{energy_efficiency, energy_efficiency_numeric, LinkEnvironment};
use hcpp_energy::experiment::{
    run_figure, validate_config, Axis, ExperimentConfig, ResultTable, Row, Severity, FIGURES,
};
use hcpp_energy::interference::{avg_interference_hcpp, avg_interference_ppp, mc_interference, mc_interference_ppp};
use hcpp_energy::rng::stream;
use hcpp_energy::zf::{spectral_efficiency_bound, spectral_efficiency_mc, AntennaConfig, SinrFactor};
use hcpp_energy::Error;

const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "hcpp-sim",
    version,
    about = "Hard-core cellular network interference, spectral and energy efficiency"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the data behind one figure as CSV plus a JSON sidecar.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(["2", "3", "4", "6", "7", "8", "9", "10", "11"]))]
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        /// Skip the Monte Carlo columns.
        #[arg(long)]
        analytic_only: bool,
    },
    /// Mean interference at one operating point.
    Interference {
        #[command(flatten)]
        common: Overrides,
        /// Use the PPP baseline instead of the hard-core network.
        #[arg(long)]
        ppp: bool,
    },
    /// Spectral efficiency of one antenna configuration.
    Se {
        #[command(flatten)]
        common: Overrides,
        #[arg(long, default_value_t = 8)]
        n_t: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long)]
        xi: f64,
    },
    /// Energy efficiency of one antenna configuration.
    Ee {
        #[command(flatten)]
        common: Overrides,
        #[arg(long, default_value_t = 8)]
        n_t: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long)]
        ppp: bool,
    },
    /// Check a config file and list every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Serving distance, m.
    #[arg(long)]
    x_off: Option<f64>,
    /// Hard-core distance, m.
    #[arg(long)]
    delta: Option<f64>,
    /// Parent intensity, 1/m².
    #[arg(long)]
    lambda_p: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Shadowing spread, dB.
    #[arg(long)]
    sigma_s: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    p_sta: Option<f64>,
}

impl Overrides {
    fn apply(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = load(self.config.as_ref())?;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.reps {
            cfg.replications = Some(v);
        }
        if let Some(v) = self.x_off {
            cfg.link.x_off = v;
        }
        if let Some(v) = self.delta {
            cfg.network.delta = v;
        }
        if let Some(v) = self.lambda_p {
            cfg.network.lambda_p = v;
        }
        if let Some(v) = self.alpha {
            cfg.channel.alpha = v;
        }
        if let Some(v) = self.sigma_s {
            cfg.channel.sigma_s = v;
        }
        if let Some(v) = self.theta {
            cfg.traffic.theta = v;
        }
        if let Some(v) = self.p_sta {
            cfg.energy.p_sta = v;
        }
        if cfg.replications == Some(0) {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        Ok(cfg)
    }
}

fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, Error> {
    path.map_or_else(|| Ok(ExperimentConfig::default()), |p| ExperimentConfig::load(p))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter { .. } | Error::Config(_) => EXIT_CONFIG,
        Error::Divergence(_) | Error::Domain(_) | Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

fn single_row(cfg: ExperimentConfig, axis: Axis, value_unit: &str, source: &str, row: Row) -> ResultTable {
    ResultTable {
        figure: 0,
        title: "single operating point".into(),
        axis,
        value_unit: value_unit.into(),
        analytic_source: source.into(),
        rows: vec![row],
        seed: cfg.seed,
        config: cfg,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Figure {
            id,
            config,
            seed,
            out,
            reps,
            analytic_only,
        } => {
            let id: u32 = id.parse().expect("restricted by the parser");
            debug_assert!(FIGURES.contains(&id));
            let mut cfg = load(config.as_ref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.replications = Some(r);
            }
            if analytic_only {
                cfg.monte_carlo = false;
            }
            let out = out.or_else(|| cfg.output.path.clone());
            let table = run_figure(id, &cfg)?;
            match out {
                Some(path) => {
                    let sidecar = table.write_files(&path)?;
                    eprintln!("wrote {} and {}", path.display(), sidecar.display());
                }
                None => print!("{}", table.to_csv_string()),
            }
        }
        Command::Interference { common, ppp } => {
            let cfg = common.apply()?;
            let scenario = cfg.scenario()?;
            let reps = cfg.replications.unwrap_or(10_000);
            let mut rng = stream(cfg.seed, 0);
            let (series, analytic, mc) = if ppp {
                (
                    "ppp",
                    avg_interference_ppp(&scenario)?,
                    mc_interference_ppp(&scenario, reps, &mut rng)?,
                )
            } else {
                (
                    "hcpp",
                    avg_interference_hcpp(&scenario)?,
                    mc_interference(&scenario, reps, &mut rng)?,
                )
            };
            let row = Row {
                series: series.into(),
                axis_value: scenario.x_off,
                analytic: Some(analytic),
                mc: Some(mc),
            };
            let axis = Axis {
                name: "x_off".into(),
                unit: "m".into(),
            };
            print!("{}", single_row(cfg, axis, "W", "quadrature", row).to_csv_string());
        }
        Command::Se { common, n_t, s, xi } => {
            let cfg = common.apply()?;
            let antennas = AntennaConfig::new(n_t, s)?;
            let xi = SinrFactor::new(xi)?;
            let reps = cfg.replications.unwrap_or(100_000);
            let mc = spectral_efficiency_mc(antennas, xi, reps, &mut stream(cfg.seed, 0))?;
            let row = Row {
                series: format!("N_T={n_t} S={s}"),
                axis_value: xi.value(),
                analytic: Some(spectral_efficiency_bound(antennas, xi)),
                mc: Some(mc),
            };
            let axis = Axis {
                name: "xi".into(),
                unit: "1".into(),
            };
            print!(
                "{}",
                single_row(cfg, axis, "bit/s/Hz", "jensen_bound", row).to_csv_string()
            );
        }
        Command::Ee { common, n_t, s, ppp } => {
            let cfg = common.apply()?;
            if let Some(d) = validate_config(&cfg)
                .into_iter()
                .find(|d| d.severity == Severity::Error)
            {
                return Err(d.to_error());
            }
            let antennas = AntennaConfig::new(n_t, s)?;
            let scenario = cfg.scenario()?;
            let env = if ppp {
                LinkEnvironment::ppp(&scenario)?
            } else {
                LinkEnvironment::hcpp(&scenario)?
            };
            let (traffic, energy) = (cfg.traffic()?, cfg.energy()?);
            let reps = cfg.replications.unwrap_or(200_000);
            let analytic = energy_efficiency_numeric(antennas, &traffic, &env, &energy)?;
            let mc = energy_efficiency(antennas, &traffic, &env, &energy, reps, &mut stream(cfg.seed, 0))?;
            let row = Row {
                series: format!("{} N_T={n_t}", if ppp { "ppp" } else { "hcpp" }),
                axis_value: s as f64,
                analytic: Some(analytic),
                mc: Some(mc),
            };
            let axis = Axis {
                name: "S".into(),
                unit: "antennas".into(),
            };
            print!(
                "{}",
                single_row(cfg, axis, "bit/Hz/J", "quadrature", row).to_csv_string()
            );
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let diagnostics = validate_config(&cfg);
            for d in &diagnostics {
                println!("{d}");
            }
            if let Some(d) = diagnostics.iter().find(|d| d.severity == Severity::Error) {
                return Err(d.to_error());
            }
            println!("{}: ok", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
