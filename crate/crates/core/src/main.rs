use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use swmimo::circuit::CouplingRegime;
use swmimo::config::{ScenarioConfig, SCHEMA as CONFIG_SCHEMA};
use swmimo::experiments::{self, CdfRow, CorrRow, SnrRow, SteeringRow};
use swmimo::output::{self, Plot, Scale, Series};
use swmimo::sim::Simulator;

/// Super-wideband MIMO channel simulator.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Scenario configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Monte Carlo trial count override.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Coupling regime override.
    #[arg(long, global = true, value_name = "tight|weak|decoupled")]
    regime: Option<CouplingRegime>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Also render SVG plots next to the CSV files.
    #[arg(long, global = true)]
    svg: bool,
    /// Write every Z_R, Z_T, P and Q entry on the grid to circuit_dump.csv.
    #[arg(long, global = true)]
    dump_circuit: bool,
    /// Print the CSV column contracts and the configuration keys, then exit.
    #[arg(long)]
    schema: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Strongest-eigenmode SNR per sub-channel and trial.
    Snr,
    /// Empirical CDF of the scattered received power.
    PowerCdf,
    /// Ordered equivalent steering-vector magnitudes.
    Steering,
    /// First row of the equivalent receive correlation matrix.
    CorrRow,
    /// Invariant suite with measured tolerances.
    Validate,
}

enum Failure {
    Config(swmimo::Error),
    Validation,
    Runtime(swmimo::Error),
}

impl From<swmimo::Error> for Failure {
    fn from(e: swmimo::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.schema {
        for s in output::ALL_SCHEMAS {
            println!("{s}\n");
        }
        print!("{CONFIG_SCHEMA}");
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return ExitCode::from(2);
    };
    match run(&cli, command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Validation) => ExitCode::from(2),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> swmimo::Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.fading.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.run.trials = trials;
    }
    if let Some(regime) = cli.regime {
        cfg.circuit.regime = regime;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, command: &Command) -> Result<(), Failure> {
    let cfg = load_config(cli).map_err(Failure::Config)?;
    let regime = cfg.circuit.regime;
    let regimes: Vec<CouplingRegime> = match cli.regime {
        Some(r) => vec![r],
        None => CouplingRegime::ALL.to_vec(),
    };
    let out = cli.out.as_path();
    if cli.dump_circuit {
        dump_circuit(&cfg, regime, out)?;
    }
    match command {
        Command::Snr => {
            let rows = experiments::run_snr(&cfg, regime)?;
            output::write_snr(output::create_in(out, output::SNR_SCHEMA.file)?, &rows)?;
            if cli.svg {
                write_svg(out, "snr_vs_freq.svg", &snr_plot(&rows, regime))?;
            }
            log::info!("wrote {} rows to {}", rows.len(), out.join(output::SNR_SCHEMA.file).display());
        }
        Command::PowerCdf => {
            let rows = experiments::run_power_cdf(&cfg, regime, &cfg.run.power_cdf_freqs_hz)?;
            output::write_power_cdf(output::create_in(out, output::POWER_CDF_SCHEMA.file)?, &rows)?;
            if cli.svg {
                write_svg(out, "power_cdf.svg", &cdf_plot(&rows, regime))?;
            }
        }
        Command::Steering => {
            let rows = experiments::run_steering(&cfg, &regimes, cfg.run.steering_freq_hz)?;
            output::write_steering(output::create_in(out, output::STEERING_SCHEMA.file)?, &rows)?;
            if cli.svg {
                write_svg(out, "steering_profile.svg", &steering_plot(&rows))?;
            }
        }
        Command::CorrRow => {
            let rows = experiments::run_corr_row(&cfg, &regimes, &cfg.run.corr_row_freqs_hz)?;
            output::write_corr_row(output::create_in(out, output::CORR_ROW_SCHEMA.file)?, &rows)?;
            if cli.svg {
                write_svg(out, "corr_row.svg", &corr_plot(&rows))?;
            }
        }
        Command::Validate => {
            let mut ok = true;
            for &r in &regimes {
                let report = experiments::validate(&cfg, r)?;
                println!("[{r}]");
                print!("{report}");
                ok &= report.passed();
            }
            if !ok {
                return Err(Failure::Validation);
            }
        }
    }
    Ok(())
}

fn dump_circuit(cfg: &ScenarioConfig, regime: CouplingRegime, out: &Path) -> swmimo::Result<()> {
    let sim = Simulator::new(cfg, regime)?;
    let grid = sim.grid();
    let sets = (0..grid.len())
        .into_par_iter()
        .map(|i| sim.impedances_at(grid.center(i)))
        .collect::<swmimo::Result<Vec<_>>>()?;
    output::write_circuit_dump(output::create_in(out, output::CIRCUIT_DUMP_SCHEMA.file)?, &sets)
}

fn write_svg(out: &Path, name: &str, plot: &Plot) -> swmimo::Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(name), plot.to_svg())?;
    Ok(())
}

fn snr_plot(rows: &[SnrRow], regime: CouplingRegime) -> Plot {
    let mut by_freq: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = by_freq.entry(r.freq_hz.to_bits()).or_insert((r.freq_hz, 0.0, 0));
        e.1 += r.snr_db;
        e.2 += 1;
    }
    let mut mean: Vec<(f64, f64)> = by_freq.values().map(|&(f, s, n)| (f / 1e9, s / n as f64)).collect();
    mean.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first: Vec<(f64, f64)> = rows.iter().filter(|r| r.trial == 0).map(|r| (r.freq_hz / 1e9, r.snr_db)).collect();
    Plot {
        title: format!("Strongest-mode SNR ({regime})"),
        x_label: "frequency (GHz)".into(),
        y_label: "SNR (dB)".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: vec![
            Series {
                label: "trial 0".into(),
                points: first,
            },
            Series {
                label: "mean".into(),
                points: mean,
            },
        ],
    }
}

fn cdf_plot(rows: &[CdfRow], regime: CouplingRegime) -> Plot {
    Plot {
        title: format!("Scattered received power CDF ({regime})"),
        x_label: "power (W)".into(),
        y_label: "CDF".into(),
        x_scale: Scale::Log10,
        y_scale: Scale::Linear,
        series: grouped(rows, |r| r.freq_label.clone(), |r| (r.value, r.prob)),
    }
}

fn grouped<T>(rows: &[T], key: impl Fn(&T) -> String, point: impl Fn(&T) -> (f64, f64)) -> Vec<Series> {
    let mut groups: Vec<Series> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|s| s.label == k) {
            Some(s) => s.points.push(point(r)),
            None => groups.push(Series {
                label: k,
                points: vec![point(r)],
            }),
        }
    }
    groups
}

fn steering_plot(rows: &[SteeringRow]) -> Plot {
    Plot {
        title: "Ordered steering-vector magnitudes".into(),
        x_label: "rank".into(),
        y_label: "normalized magnitude".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: grouped(rows, |r| format!("{} {}", r.regime, r.end), |r| (r.rank as f64, r.magnitude)),
    }
}

fn corr_plot(rows: &[CorrRow]) -> Plot {
    Plot {
        title: "First row of the receive correlation".into(),
        x_label: "element index".into(),
        y_label: "magnitude".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: grouped(
            rows,
            |r| format!("{} {}", r.regime, r.freq_label),
            |r| (r.element_index as f64, r.magnitude),
        ),
    }
}
