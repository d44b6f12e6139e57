use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use breakscope::panel::{Pollutant, Sector};
use breakscope::pipeline::{self, RunConfig};
use breakscope::simgen::{DgpSpec, InjectedBreak};
use breakscope::{Error, Result};

#[derive(Parser)]
#[command(
    name = "breakscope",
    version,
    about = "Structural break detection in emission panels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the block search and write the retained indicators.
    Detect(RunArgs),
    /// Detect and re-estimate: breaks.csv, totals.csv, plot data.
    Estimate(RunArgs),
    /// Match an existing breaks table to policy events.
    Attribute(BreakArgs),
    /// Summary tables from an existing breaks table and policy events.
    Summarize(BreakArgs),
    /// Write a synthetic panel in the input format.
    Simulate(SimArgs),
    /// False-positive rate of the search on null panels.
    Calibrate(CalArgs),
    /// Estimation plus gamma sensitivity, impulse saturation and synthetic control.
    Robustness(RunArgs),
    /// Everything: detection, estimation, attribution and summaries.
    Pipeline(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory with emissions.csv, covariates.csv, groups.csv (and optional eu_controls.csv, policies.csv).
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    emissions: Option<PathBuf>,
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long)]
    eu_controls: Option<PathBuf>,
    #[arg(long)]
    policies: Option<PathBuf>,
    /// Extra instrument-to-category table.
    #[arg(long)]
    categories: Option<PathBuf>,
    /// Repeatable; default all.
    #[arg(long)]
    pollutant: Vec<Pollutant>,
    /// Repeatable; default all.
    #[arg(long)]
    sector: Vec<Sector>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    block_size: Option<usize>,
    /// Falls back to BREAKSCOPE_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Attribution window half-width in years.
    #[arg(long)]
    window: Option<i32>,
    /// Estimate developed and developing countries separately.
    #[arg(long)]
    per_group: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also run the robustness checks.
    #[arg(long)]
    robustness: bool,
    /// Drop countries with missing cells instead of failing.
    #[arg(long)]
    drop_unbalanced: bool,
}

#[derive(Args)]
struct BreakArgs {
    /// breaks.csv from `estimate` or `pipeline`.
    #[arg(long)]
    breaks: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct DgpArgs {
    /// TOML data-generating process; flags override its keys.
    #[arg(long)]
    dgp: Option<PathBuf>,
    #[arg(long)]
    countries: Option<usize>,
    #[arg(long)]
    years: Option<usize>,
    #[arg(long)]
    first_year: Option<i32>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    dgp: DgpArgs,
    /// Injected break as COUNTRY_INDEX:YEAR:TAU; repeatable.
    #[arg(long = "break", value_parser = parse_break)]
    breaks: Vec<InjectedBreak>,
    /// Simulate all twelve series on shared countries and covariates.
    #[arg(long)]
    all_series: bool,
    #[arg(long, default_value = "simulated")]
    out: PathBuf,
}

#[derive(Args)]
struct CalArgs {
    #[command(flatten)]
    dgp: DgpArgs,
    /// Repeatable; default 0.01 and 0.001.
    #[arg(long)]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 20)]
    block_size: usize,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "calibration")]
    out: PathBuf,
}

fn parse_break(s: &str) -> std::result::Result<InjectedBreak, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [c, y, t] = parts.as_slice() else {
        return Err(format!("expected COUNTRY_INDEX:YEAR:TAU, got '{s}'"));
    };
    Ok(InjectedBreak {
        country: c.parse().map_err(|e| format!("country index: {e}"))?,
        year: y.parse().map_err(|e| format!("year: {e}"))?,
        tau: t.parse().map_err(|e| format!("tau: {e}"))?,
    })
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let (mut cfg, file_seed) = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
                let has_seed = text
                    .parse::<toml::Table>()
                    .map(|t| t.contains_key("seed"))
                    .unwrap_or(false);
                (RunConfig::from_toml_file(p)?, has_seed)
            }
            None => (RunConfig::default(), false),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = &self.$field { cfg.$field = v.clone().into(); })*};
        }
        set!(
            input_dir,
            emissions,
            covariates,
            groups,
            eu_controls,
            policies,
            categories,
            gamma,
            block_size,
            window,
            out,
            jobs
        );
        if !self.pollutant.is_empty() {
            cfg.pollutants = self.pollutant.clone();
        }
        if !self.sector.is_empty() {
            cfg.sectors = self.sector.clone();
        }
        match (self.seed, file_seed) {
            (Some(s), _) => cfg.seed = s,
            (None, false) => {
                if let Some(s) = RunConfig::seed_from_env()? {
                    cfg.seed = s;
                }
            }
            (None, true) => {}
        }
        cfg.per_group |= self.per_group;
        cfg.robustness |= self.robustness;
        cfg.drop_unbalanced |= self.drop_unbalanced;
        Ok(cfg)
    }
}

impl DgpArgs {
    fn spec(&self) -> Result<DgpSpec> {
        let mut spec = match &self.dgp {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?
            }
            None => DgpSpec::default(),
        };
        if let Some(v) = self.countries {
            spec.n_countries = v;
        }
        if let Some(v) = self.years {
            spec.n_years = v;
        }
        if let Some(v) = self.first_year {
            spec.first_year = v;
        }
        if let Some(v) = self.sigma {
            spec.sigma = v;
        }
        match self.seed {
            Some(s) => spec.seed = s,
            None if self.dgp.is_none() => {
                if let Some(s) = RunConfig::seed_from_env()? {
                    spec.seed = s;
                }
            }
            None => {}
        }
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<()> {
    let manifest = match cli.command {
        Command::Detect(a) => pipeline::run_detect(&a.config()?)?,
        Command::Estimate(a) => pipeline::run_estimate(&a.config()?)?,
        Command::Robustness(a) => pipeline::run_robustness(&a.config()?)?,
        Command::Pipeline(a) => pipeline::run_pipeline(&a.config()?)?,
        Command::Attribute(a) => pipeline::run_attribute(&a.run.config()?, &a.breaks)?,
        Command::Summarize(a) => pipeline::run_summarize(&a.run.config()?, &a.breaks)?,
        Command::Simulate(a) => {
            let mut spec = a.dgp.spec()?;
            spec.breaks.extend(a.breaks);
            pipeline::run_simulate(&spec, a.all_series, &a.out)?
        }
        Command::Calibrate(a) => {
            let gammas = if a.gamma.is_empty() { vec![0.01, 0.001] } else { a.gamma };
            let cfg = RunConfig {
                block_size: a.block_size,
                jobs: a.jobs,
                out: a.out,
                ..RunConfig::default()
            };
            pipeline::run_calibrate(&a.dgp.spec()?, &gammas, a.reps, &cfg)?
        }
    };
    for a in &manifest.artifacts {
        println!("{}  {}", a.sha256, a.path);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
