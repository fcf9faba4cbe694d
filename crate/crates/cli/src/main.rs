//! `cfmimo`: run one simulation scenario and write its CSV.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use cfmimo_core::xprun::{
    self, parse_snr_grid, ClusteringMode, ExperimentSpec, Scenario, SchedulerMode,
};
use cfmimo_core::NetworkConfig;
use clap::Parser;

#[derive(Debug, Parser)]
#[command(
    name = "cfmimo",
    version,
    about = "Cell-free massive MIMO downlink Monte Carlo simulator"
)]
struct Args {
    /// sumrate | ber | schedule | complexity | fairness
    scenario: Scenario,

    /// TOML network configuration (defaults are used for missing keys)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config file
    #[arg(long)]
    seed: Option<u64>,

    /// SNR sweep in dB as min:step:max, or a single value
    #[arg(long, allow_hyphen_values = true, default_value = xprun::DEFAULT_SNR_GRID)]
    snr: String,

    #[arg(long, default_value_t = 100)]
    realizations: usize,

    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Network used by the schedule and fairness scenarios: lsf | bsr | none
    #[arg(long, default_value = "none")]
    clustering: ClusteringMode,

    /// Scheduler applied to sumrate/ber (gr | fgr | none); for the schedule
    /// scenario, `gr` reports the greedy baseline instead of F-Gr
    #[arg(long, default_value = "none")]
    scheduler: SchedulerMode,

    /// QPSK vectors per served set, realization and SNR point (ber)
    #[arg(long, default_value_t = 64)]
    symbols: usize,

    /// Comma-separated AP counts swept by the complexity scenario
    #[arg(long, value_delimiter = ',')]
    aps: Option<Vec<usize>>,
}

fn load_config(args: &Args) -> Result<NetworkConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            NetworkConfig::from_toml_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => NetworkConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn build_spec(args: &Args) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(args.scenario, load_config(args)?);
    spec.snr_grid_db = parse_snr_grid(&args.snr)?;
    spec.realizations = args.realizations;
    spec.out_path = args.out.clone();
    spec.clustering = args.clustering;
    spec.scheduler = args.scheduler;
    spec.ber_symbols = args.symbols;
    if let Some(aps) = &args.aps {
        spec.ap_grid = aps.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn main() -> Result<()> {
    let args = Args::parse();
    let spec = build_spec(&args)?;
    let output = xprun::run(&spec)?;
    match &spec.out_path {
        Some(path) => eprintln!("wrote {} ({} scenario)", path.display(), spec.scenario),
        None => std::io::stdout().write_all(&output.to_csv()?)?,
    }
    Ok(())
}
