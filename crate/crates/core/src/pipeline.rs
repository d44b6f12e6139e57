//! End-to-end orchestration: load, select, estimate, attribute, summarize
//! and optionally run the robustness checks, with every file going through
//! one [`ArtifactWriter`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{
    combo_shares, dedupe_breaks, match_policies, mix_vs_single, summarize_instruments, CategoryMap, MatchedBreak,
    PolicyEvent,
};
use crate::effects::{cumulative_totals, fit_sparse_steps, plot_data, BreakEstimate, EffectsConfig, PlotData};
use crate::error::{Error, Result};
use crate::io::{self, ArtifactWriter, InputPaths, LoadOptions, Manifest, PanelInputs};
use crate::panel::{Candidate, Group, PanelDataset, Pollutant, Sector, SeriesKey};
use crate::robustness::{robustness_report, GscmConfig, RobustnessReport};
use crate::saturation::{sis_search, SelectionConfig, SelectionResult};
use crate::simgen::{calibrate_false_positives, derive_seed, simulate_panel, DgpSpec};

/// Environment variable consulted for the seed when none is configured.
pub const SEED_ENV: &str = "BREAKSCOPE_SEED";

/// Everything that determines a run. Serialized as TOML for config files;
/// command-line flags are applied on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory holding emissions.csv, covariates.csv, groups.csv and
    /// optionally eu_controls.csv and policies.csv.
    pub input_dir: Option<PathBuf>,
    pub emissions: Option<PathBuf>,
    pub covariates: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub eu_controls: Option<PathBuf>,
    pub policies: Option<PathBuf>,
    /// Extra instrument -> category rows (columns instrument, category).
    pub categories: Option<PathBuf>,
    /// Empty means all three.
    pub pollutants: Vec<Pollutant>,
    /// Empty means all four.
    pub sectors: Vec<Sector>,
    pub gamma: f64,
    pub block_size: usize,
    pub seed: u64,
    /// Attribution window half-width in years.
    pub window: i32,
    pub per_group: bool,
    pub out: PathBuf,
    /// Worker threads; 0 lets the thread pool decide.
    pub jobs: usize,
    pub robustness: bool,
    pub robustness_gammas: Vec<f64>,
    pub gscm: GscmConfig,
    pub drop_unbalanced: bool,
    pub first_year: Option<i32>,
    pub last_year: Option<i32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input_dir: None,
            emissions: None,
            covariates: None,
            groups: None,
            eu_controls: None,
            policies: None,
            categories: None,
            pollutants: Vec::new(),
            sectors: Vec::new(),
            gamma: 0.01,
            block_size: 20,
            seed: 0,
            window: 2,
            per_group: false,
            out: PathBuf::from("out"),
            jobs: 0,
            robustness: false,
            robustness_gammas: vec![0.05, 0.01, 0.001],
            gscm: GscmConfig::default(),
            drop_unbalanced: false,
            first_year: None,
            last_year: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Seed from the environment, used when neither the file nor the flags
    /// set one.
    pub fn seed_from_env() -> Result<Option<u64>> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::Input(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))),
            Err(_) => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 0 {
            return Err(Error::Input(format!(
                "window half-width must be >= 0, got {}",
                self.window
            )));
        }
        self.selection().validate()?;
        if self.robustness_gammas.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return Err(Error::Input("robustness gammas must lie in (0,1)".into()));
        }
        if let (Some(a), Some(b)) = (self.first_year, self.last_year) {
            if a > b {
                return Err(Error::Input(format!("first_year {a} is after last_year {b}")));
            }
        }
        self.input_paths().map(|_| ())
    }

    pub fn input_paths(&self) -> Result<InputPaths> {
        let base = self.input_dir.as_deref().map(InputPaths::in_dir);
        let pick = |own: &Option<PathBuf>, from_dir: Option<&PathBuf>, what: &str| -> Result<PathBuf> {
            own.clone()
                .or_else(|| from_dir.cloned())
                .ok_or_else(|| Error::Input(format!("no {what} table given (set input_dir or {what})")))
        };
        Ok(InputPaths {
            emissions: pick(&self.emissions, base.as_ref().map(|b| &b.emissions), "emissions")?,
            covariates: pick(&self.covariates, base.as_ref().map(|b| &b.covariates), "covariates")?,
            groups: pick(&self.groups, base.as_ref().map(|b| &b.groups), "groups")?,
            eu_controls: self.eu_controls.clone().or_else(|| base.and_then(|b| b.eu_controls)),
        })
    }

    pub fn policies_path(&self) -> Option<PathBuf> {
        self.policies.clone().or_else(|| {
            let p = self.input_dir.as_ref()?.join("policies.csv");
            p.exists().then_some(p)
        })
    }

    pub fn series(&self) -> Vec<SeriesKey> {
        SeriesKey::all()
            .into_iter()
            .filter(|s| self.pollutants.is_empty() || self.pollutants.contains(&s.pollutant))
            .filter(|s| self.sectors.is_empty() || self.sectors.contains(&s.sector))
            .collect()
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            gamma: self.gamma,
            block_size: self.block_size,
            seed: self.seed,
            ..SelectionConfig::default()
        }
    }

    pub fn effects(&self) -> EffectsConfig {
        EffectsConfig {
            gamma: self.gamma,
            window: self.window,
            ..EffectsConfig::default()
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        let years = match (self.first_year, self.last_year) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        LoadOptions {
            drop_unbalanced: self.drop_unbalanced,
            years,
        }
    }

    pub fn category_map(&self) -> Result<CategoryMap> {
        let mut map = CategoryMap::default();
        if let Some(p) = &self.categories {
            map.extend(io::read_category_table(p)?);
        }
        Ok(map)
    }

    /// Config echo for the manifest.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Pipeline stage, recorded in the manifest on failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Load,
    Select,
    Estimate,
    Attribute,
    Robustness,
    Write,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Select => "select",
            Stage::Estimate => "estimate",
            Stage::Attribute => "attribute",
            Stage::Robustness => "robustness",
            Stage::Write => "write",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

trait At<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> At<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Selection run on one estimation panel (the pooled panel, or one group).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelSelection {
    pub group: Option<Group>,
    pub countries: Vec<String>,
    pub selection: SelectionResult,
}

#[derive(Debug, Clone)]
pub struct SeriesOutcome {
    pub series: SeriesKey,
    pub selections: Vec<PanelSelection>,
    pub estimates: Vec<BreakEstimate>,
    pub plot: PlotData,
    pub robustness: Vec<RobustnessReport>,
}

/// Seed of one series, independent of which other series are selected.
pub fn series_seed(master: u64, series: SeriesKey) -> u64 {
    let idx = SeriesKey::all()
        .iter()
        .position(|s| *s == series)
        .expect("known series");
    derive_seed(master, idx as u64)
}

fn estimation_panels(ds: &PanelDataset, per_group: bool) -> Result<Vec<(Option<Group>, PanelDataset)>> {
    if !per_group {
        return Ok(vec![(None, ds.clone())]);
    }
    let mut out = Vec::new();
    for g in [Group::Developed, Group::Developing] {
        if ds.countries().iter().any(|c| c.group == g) {
            out.push((Some(g), ds.subset_group(g)?));
        }
    }
    Ok(out)
}

/// Selection, sparse re-estimation and (optionally) robustness for one
/// loaded series.
pub fn analyze_series(ds: &PanelDataset, cfg: &RunConfig) -> std::result::Result<SeriesOutcome, StageError> {
    let series = ds.series();
    let selection_cfg = SelectionConfig {
        seed: series_seed(cfg.seed, series),
        ..cfg.selection()
    };
    let panels = estimation_panels(ds, cfg.per_group).at(Stage::Load)?;
    let mut selections = Vec::new();
    let mut estimates = Vec::new();
    let mut plot = PlotData {
        series,
        countries: BTreeMap::new(),
    };
    let mut robustness = Vec::new();
    for (group, panel) in panels {
        let sel = sis_search(&panel, &selection_cfg).at(Stage::Select)?;
        if !sel.converged {
            warn!(
                "{series}: block search stopped after {} iterations without a fixed point",
                sel.iterations
            );
        }
        let steps: Vec<Candidate> = sel.steps().copied().collect();
        let sparse = fit_sparse_steps(&panel, &steps, &cfg.effects()).at(Stage::Estimate)?;
        let pd = plot_data(&panel, &sparse).at(Stage::Estimate)?;
        plot.countries.extend(pd.countries);
        if cfg.robustness {
            let rep = robustness_report(&panel, &sel, &sparse.estimates, &cfg.robustness_gammas, &cfg.gscm)
                .at(Stage::Robustness)?;
            robustness.push(rep);
        }
        estimates.extend(sparse.estimates);
        selections.push(PanelSelection {
            group,
            countries: panel.countries().iter().map(|c| c.iso3.clone()).collect(),
            selection: sel,
        });
    }
    estimates.sort_by(|a, b| a.country_iso.cmp(&b.country_iso).then(a.year.cmp(&b.year)));
    info!("{series}: {} breaks", estimates.len());
    Ok(SeriesOutcome {
        series,
        selections,
        estimates,
        plot,
        robustness,
    })
}

const DEDUP_NOTE: &str = "dedup: within one country and series, a break whose 99% timing interval contains or is contained in that of a larger-|effect| break is dropped";
const MATCH_NOTE: &str = "attribution: breaks with sparse-fit p >= gamma are excluded; events match on country (or EU-wide for members), sector, and year within the window";
const HORIZON_NOTE: &str =
    "cumulative reduction: break year through the last sample year; bounds use tau_hat +/- 1.96 se";

/// Attribution tables built from all estimates of a run.
#[derive(Debug, Clone)]
pub struct Attribution {
    pub matches: Vec<MatchedBreak>,
}

/// Dedup and policy matching. Breaks whose sparse-fit p-value is not below
/// gamma are left out.
pub fn attribute(estimates: &[BreakEstimate], events: &[PolicyEvent]) -> Attribution {
    let significant: Vec<BreakEstimate> = estimates.iter().filter(|e| e.significant).cloned().collect();
    let kept = dedupe_breaks(&significant);
    Attribution {
        matches: match_policies(&kept, events),
    }
}

/// Writes the attribution and summary tables: pooled, then per pollutant.
pub fn write_attribution(w: &mut ArtifactWriter, att: &Attribution) -> Result<()> {
    w.note(DEDUP_NOTE);
    w.note(MATCH_NOTE);
    w.write("attribution.csv", &io::attribution_csv(&att.matches)?)?;
    write_summaries(w, &att.matches)
}

pub fn write_summaries(w: &mut ArtifactWriter, matches: &[MatchedBreak]) -> Result<()> {
    w.write(
        "summary_instruments.csv",
        &io::summary_csv(&summarize_instruments(matches))?,
    )?;
    w.write("mix_vs_single.csv", &io::mix_csv(&mix_vs_single(matches))?)?;
    w.write("combo_shares.csv", &io::combo_csv(&combo_shares(matches))?)?;
    for p in Pollutant::ALL {
        let sub: Vec<MatchedBreak> = matches
            .iter()
            .filter(|m| m.estimate.series.pollutant == p)
            .cloned()
            .collect();
        if sub.is_empty() {
            continue;
        }
        w.write(
            &format!("summary_instruments_{}.csv", p.as_str()),
            &io::summary_csv(&summarize_instruments(&sub))?,
        )?;
        w.write(
            &format!("mix_vs_single_{}.csv", p.as_str()),
            &io::mix_csv(&mix_vs_single(&sub))?,
        )?;
    }
    Ok(())
}

/// Per-series files plus the pooled breaks and totals tables.
pub fn write_estimates(w: &mut ArtifactWriter, outcomes: &[SeriesOutcome]) -> Result<()> {
    w.note(HORIZON_NOTE);
    let mut all = Vec::new();
    for o in outcomes {
        let label = o.series.label();
        w.write(&format!("selection/{label}.json"), &io::json_bytes(&o.selections)?)?;
        w.write(&format!("plotdata/{label}.json"), &io::json_bytes(&o.plot)?)?;
        // Full break records, including the clustered SEs breaks.csv leaves out.
        w.write(&format!("estimates/{label}.json"), &io::json_bytes(&o.estimates)?)?;
        if !o.robustness.is_empty() {
            w.write(&format!("robustness/{label}.json"), &io::json_bytes(&o.robustness)?)?;
        }
        all.extend(o.estimates.iter().cloned());
    }
    w.write("breaks.csv", &io::breaks_csv(&all)?)?;
    w.write("totals.csv", &io::totals_csv(&cumulative_totals(&all))?)?;
    Ok(())
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Input(format!("cannot start {jobs} worker threads: {e}")))
}

/// Loads the inputs and checks that every selected series is present.
pub fn load_series(cfg: &RunConfig) -> std::result::Result<(PanelInputs, Vec<PanelDataset>), StageError> {
    let inputs = io::read_inputs(&cfg.input_paths().at(Stage::Config)?).at(Stage::Load)?;
    let available = inputs.series_available();
    let wanted = cfg.series();
    if wanted.is_empty() {
        return Err(StageError {
            stage: Stage::Config,
            error: Error::Input("no series selected".into()),
        });
    }
    let opts = cfg.load_options();
    let mut datasets = Vec::new();
    for s in wanted {
        if !available.contains(&s) {
            if cfg.pollutants.is_empty() && cfg.sectors.is_empty() {
                warn!("{s} not present in the inputs; skipped");
                continue;
            }
            return Err(StageError {
                stage: Stage::Config,
                error: Error::Input(format!("selected series {s} is not present in the inputs")),
            });
        }
        datasets.push(inputs.dataset(s, &opts).at(Stage::Load)?);
    }
    if datasets.is_empty() {
        return Err(StageError {
            stage: Stage::Load,
            error: Error::Input("no selected series in the inputs".into()),
        });
    }
    Ok((inputs, datasets))
}

fn pipeline_body(cfg: &RunConfig, w: &mut ArtifactWriter) -> std::result::Result<(), StageError> {
    cfg.validate().at(Stage::Config)?;
    let map = cfg.category_map().at(Stage::Config)?;
    let events = match cfg.policies_path() {
        Some(p) => io::read_policies(&p, &map).at(Stage::Load)?,
        None => Vec::new(),
    };
    let (_, datasets) = load_series(cfg)?;
    let pool = thread_pool(cfg.jobs).at(Stage::Config)?;
    let outcomes: Vec<SeriesOutcome> = pool.install(|| {
        datasets
            .par_iter()
            .map(|ds| analyze_series(ds, cfg))
            .collect::<std::result::Result<Vec<_>, StageError>>()
    })?;
    write_estimates(w, &outcomes).at(Stage::Write)?;
    let all: Vec<BreakEstimate> = outcomes.iter().flat_map(|o| o.estimates.iter().cloned()).collect();
    let att = attribute(&all, &events);
    write_attribution(w, &att).at(Stage::Write)?;
    Ok(())
}

/// Runs a stage closure against a fresh output directory and writes the
/// manifest. On failure every artifact is removed and the manifest records
/// the failing stage.
pub fn run_with_writer<F>(command: &str, out: &Path, config: serde_json::Value, body: F) -> Result<Manifest>
where
    F: FnOnce(&mut ArtifactWriter) -> std::result::Result<(), StageError>,
{
    let mut w = ArtifactWriter::new(out)?;
    match body(&mut w) {
        Ok(()) => w.finish(command, config, None),
        Err(StageError { stage, error }) => {
            w.finish(command, config, Some((stage.as_str(), &error)))?;
            Err(error)
        }
    }
}

/// The all-in-one run. The output directory is checked for writability
/// before anything is computed.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Manifest> {
    run_with_writer("pipeline", &cfg.out, cfg.echo(), |w| pipeline_body(cfg, w))
}

fn analyze_all(cfg: &RunConfig) -> std::result::Result<Vec<SeriesOutcome>, StageError> {
    cfg.validate().at(Stage::Config)?;
    let (_, datasets) = load_series(cfg)?;
    let pool = thread_pool(cfg.jobs).at(Stage::Config)?;
    pool.install(|| datasets.par_iter().map(|ds| analyze_series(ds, cfg)).collect())
}

/// Selection only: one `selection/<series>.json` per series.
pub fn run_detect(cfg: &RunConfig) -> Result<Manifest> {
    run_with_writer("detect", &cfg.out, cfg.echo(), |w| {
        for o in analyze_all(cfg)? {
            w.write(
                &format!("selection/{}.json", o.series.label()),
                &io::json_bytes(&o.selections).at(Stage::Write)?,
            )
            .at(Stage::Write)?;
        }
        Ok(())
    })
}

/// Selection and estimation: breaks, totals, plot data.
pub fn run_estimate(cfg: &RunConfig) -> Result<Manifest> {
    run_with_writer("estimate", &cfg.out, cfg.echo(), |w| {
        let outcomes = analyze_all(cfg)?;
        write_estimates(w, &outcomes).at(Stage::Write)
    })
}

/// Estimation plus the robustness reports.
pub fn run_robustness(cfg: &RunConfig) -> Result<Manifest> {
    let cfg = RunConfig {
        robustness: true,
        ..cfg.clone()
    };
    run_with_writer("robustness", &cfg.out, cfg.echo(), |w| {
        let outcomes = analyze_all(&cfg)?;
        write_estimates(w, &outcomes).at(Stage::Write)
    })
}

fn groups_path(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.groups
        .clone()
        .or_else(|| cfg.input_dir.as_ref().map(|d| d.join("groups.csv")))
        .ok_or_else(|| Error::Input("no groups table given (set input_dir or groups)".into()))
}

fn attribution_from_files(cfg: &RunConfig, breaks: &Path) -> std::result::Result<Attribution, StageError> {
    if cfg.window < 0 {
        return Err(StageError {
            stage: Stage::Config,
            error: Error::Input(format!("window half-width must be >= 0, got {}", cfg.window)),
        });
    }
    let map = cfg.category_map().at(Stage::Config)?;
    let groups = groups_path(cfg).at(Stage::Config)?;
    let estimates = io::read_breaks(breaks, &groups).at(Stage::Load)?;
    let events = match cfg.policies_path() {
        Some(p) => io::read_policies(&p, &map).at(Stage::Load)?,
        None => Vec::new(),
    };
    Ok(attribute(&estimates, &events))
}

/// Attribution of an existing breaks table: attribution.csv plus summaries.
pub fn run_attribute(cfg: &RunConfig, breaks: &Path) -> Result<Manifest> {
    run_with_writer("attribute", &cfg.out, cfg.echo(), |w| {
        let att = attribution_from_files(cfg, breaks)?;
        write_attribution(w, &att).at(Stage::Write)
    })
}

/// Summary tables only, from an existing breaks table.
pub fn run_summarize(cfg: &RunConfig, breaks: &Path) -> Result<Manifest> {
    run_with_writer("summarize", &cfg.out, cfg.echo(), |w| {
        let att = attribution_from_files(cfg, breaks)?;
        write_summaries(w, &att.matches).at(Stage::Write)
    })
}

#[derive(Serialize)]
struct TruthRow<'a> {
    series: String,
    country: usize,
    country_iso: &'a str,
    year: i32,
    tau: f64,
}

/// Writes a simulated panel in the input format, for one series or all
/// twelve (sharing countries and covariates), with the injected breaks in
/// `truth.json`.
pub fn run_simulate(spec: &DgpSpec, all_series: bool, out: &Path) -> Result<Manifest> {
    let echo = serde_json::json!({ "spec": spec, "all_series": all_series });
    run_with_writer("simulate", out, echo, |w| {
        spec.validate().at(Stage::Config)?;
        let series = if all_series {
            SeriesKey::all()
        } else {
            vec![spec.series]
        };
        let mut datasets = Vec::new();
        let mut truth = Vec::new();
        for s in series {
            let (ds, gt) = simulate_panel(&DgpSpec {
                series: s,
                ..spec.clone()
            })
            .at(Stage::Load)?;
            for (c, tau) in &gt.breaks {
                truth.push(TruthRow {
                    series: s.label(),
                    country: c.country,
                    country_iso: "",
                    year: c.year,
                    tau: *tau,
                });
            }
            datasets.push(ds);
        }
        let isos: Vec<String> = datasets[0].countries().iter().map(|c| c.iso3.clone()).collect();
        for t in truth.iter_mut() {
            t.country_iso = &isos[t.country];
        }
        for (name, bytes) in io::panel_csvs(&datasets).at(Stage::Write)? {
            w.write(name, &bytes).at(Stage::Write)?;
        }
        w.write("truth.json", &io::json_bytes(&truth).at(Stage::Write)?)
            .at(Stage::Write)
    })
}

/// False-positive calibration on null panels at each gamma.
pub fn run_calibrate(spec: &DgpSpec, gammas: &[f64], reps: usize, cfg: &RunConfig) -> Result<Manifest> {
    let echo = serde_json::json!({ "spec": spec, "gammas": gammas, "reps": reps, "block_size": cfg.block_size, "jobs": cfg.jobs });
    run_with_writer("calibrate", &cfg.out, echo, |w| {
        let pool = thread_pool(cfg.jobs).at(Stage::Config)?;
        let mut stats = Vec::new();
        for &g in gammas {
            let sel = SelectionConfig {
                gamma: g,
                block_size: cfg.block_size,
                ..SelectionConfig::default()
            };
            stats.push(
                pool.install(|| calibrate_false_positives(spec, &sel, reps))
                    .at(Stage::Select)?,
            );
        }
        w.write("calibration.json", &io::json_bytes(&stats).at(Stage::Write)?)
            .at(Stage::Write)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = RunConfig {
            gamma: 0.001,
            pollutants: vec![Pollutant::Nox],
            ..RunConfig::default()
        };
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        let partial: RunConfig = toml::from_str("seed = 5\nsectors = [\"transport\"]\n").unwrap();
        assert_eq!(partial.seed, 5);
        assert_eq!(partial.window, 2);
        assert_eq!(partial.series().len(), 3);
        assert!(toml::from_str::<RunConfig>("gama = 0.1\n").is_err());
    }

    #[test]
    fn negative_window_rejected() {
        let cfg = RunConfig {
            window: -1,
            input_dir: Some(".".into()),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn series_seeds_differ() {
        let all = SeriesKey::all();
        assert_ne!(series_seed(1, all[0]), series_seed(1, all[1]));
        assert_eq!(series_seed(1, all[3]), series_seed(1, all[3]));
    }

    #[test]
    fn echo_lists_every_field() {
        let echo = RunConfig::default().echo();
        let fields = echo.as_object().unwrap();
        assert!([
            "gamma",
            "block_size",
            "seed",
            "window",
            "per_group",
            "out",
            "jobs",
            "robustness"
        ]
        .iter()
        .all(|k| fields.contains_key(*k)));
    }
}
