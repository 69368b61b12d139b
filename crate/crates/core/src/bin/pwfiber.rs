use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pwfiber::harness::{self, RunConfig};

#[derive(Parser)]
#[command(name = "pwfiber", version, about = "Coherent optical link simulator with Parzen-window detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Q-factor versus launch power.
    SweepPower(Common),
    /// Q-factor versus transmission reach at a fixed launch power.
    SweepReach(Common),
    /// Received test-symbol cloud at one point, as CSV.
    DumpConstellation(Common),
    /// Parzen-window decision regions at one point, as CSV rasters.
    DumpRegions {
        #[command(flatten)]
        common: Common,
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Analytic channel self-checks; exits nonzero on failure.
    ValidateChannel {
        #[command(flatten)]
        common: Common,
        /// Also run the split-step halving check (two full simulation points).
        #[arg(long)]
        convergence: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Flat TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Launch power(s) in dBm; comma separated for sweeps.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    power_dbm: Option<Vec<f64>>,
    #[arg(long)]
    spans: Option<usize>,
    /// Symbol rate in Gbaud.
    #[arg(long)]
    baud: Option<f64>,
    /// Dispersion management.
    #[arg(long, value_enum)]
    dm: Option<OnOff>,
    #[arg(long)]
    n_test: Option<usize>,
}

impl Common {
    fn resolve(&self) -> pwfiber::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(p) = &self.power_dbm {
            cfg.launch_powers_dbm = p.clone();
            if let Some(&first) = p.first() {
                cfg.reach_power_dbm = first;
            }
        }
        if let Some(n) = self.spans {
            cfg.n_spans = n;
        }
        if let Some(b) = self.baud {
            cfg.symbol_rate_gbaud = b;
        }
        if let Some(dm) = self.dm {
            cfg.dispersion_managed = matches!(dm, OnOff::On);
        }
        if let Some(n) = self.n_test {
            cfg.n_test = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn single_power(cfg: &RunConfig) -> f64 {
    cfg.launch_powers_dbm.first().copied().unwrap_or(cfg.reach_power_dbm)
}

fn run(cli: Cli) -> pwfiber::Result<bool> {
    match cli.command {
        Command::SweepPower(common) => {
            let cfg = common.resolve()?;
            let record = harness::sweep_power(&cfg)?;
            let path = harness::write_sweep(&cfg, "sweep_power", &record)?;
            print!("{}", record.to_csv_string());
            eprintln!("wrote {}", path.display());
        }
        Command::SweepReach(common) => {
            let cfg = common.resolve()?;
            let record = harness::sweep_reach(&cfg)?;
            let path = harness::write_sweep(&cfg, "sweep_reach", &record)?;
            print!("{}", record.to_csv_string());
            for s in harness::summarize(&record, &cfg) {
                match s.threshold_reach_km {
                    Some(r) => eprintln!("{}: Q = {} dB reached at {r:.1} km", s.detector.as_str(), cfg.q_threshold_db),
                    None => eprintln!("{}: no Q = {} dB crossing on the grid", s.detector.as_str(), cfg.q_threshold_db),
                }
            }
            eprintln!("wrote {}", path.display());
        }
        Command::DumpConstellation(common) => {
            let cfg = common.resolve()?;
            let power = single_power(&cfg);
            let path = cfg.out_dir.join("constellation.csv");
            harness::dump_constellation(&cfg, power, cfg.n_spans, &path)?;
            eprintln!("wrote {}", path.display());
        }
        Command::DumpRegions { common, grid } => {
            let cfg = common.resolve()?;
            let power = single_power(&cfg);
            for p in harness::dump_regions(&cfg, power, cfg.n_spans, grid, &cfg.out_dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::ValidateChannel { common, convergence } => {
            let cfg = common.resolve()?;
            let report = harness::validate_channel(&cfg, convergence)?;
            for check in &report.checks {
                println!("{}", serde_json::to_string(check)?);
            }
            println!("{}", serde_json::json!({ "verdict": if report.passed() { "pass" } else { "fail" } }));
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
