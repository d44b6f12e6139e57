//! Flat-file inputs and outputs: the panel CSVs, policy events, result
//! tables, JSON reports and the run manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attribution::{Action, Category, CategoryMap, ComboShare, MatchedBreak, MixRow, PolicyEvent, SummaryRow};
use crate::effects::{BreakEstimate, PollutantTotal};
use crate::error::{Error, Result};
use crate::panel::{Country, Covariates, Group, PanelDataset, Pollutant, Sector, SeriesKey};

/// Default reference period, used whenever the data cover it.
pub const REFERENCE_YEARS: (i32, i32) = (2000, 2021);

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = reader(path)?;
    rdr.deserialize().map(|r| r.map_err(|e| Error::csv(path, e))).collect()
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Ok(true),
        "0" | "false" | "no" | "n" | "" => Ok(false),
        other => Err(Error::Input(format!("expected a boolean, got '{other}'"))),
    }
}

#[derive(Debug, Deserialize)]
struct EmissionRow {
    country_iso3: String,
    year: i32,
    sector: String,
    pollutant: String,
    emissions_t: f64,
}

#[derive(Debug, Deserialize)]
struct CovariateRow {
    country_iso3: String,
    year: i32,
    gdp_usd2015: f64,
    population: f64,
    hdd16: f64,
    cdd18: f64,
}

#[derive(Debug, Deserialize)]
struct GroupRow {
    country_iso3: String,
    group: String,
    eu_member: String,
}

#[derive(Debug, Deserialize)]
struct ControlRow {
    control_name: String,
    country_iso3: String,
    year: i32,
    value: f64,
}

/// Locations of the panel input tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPaths {
    pub emissions: PathBuf,
    pub covariates: PathBuf,
    pub groups: PathBuf,
    pub eu_controls: Option<PathBuf>,
}

impl InputPaths {
    /// The four standard file names inside `dir`; the EU control table is
    /// optional and only used if it exists.
    pub fn in_dir(dir: &Path) -> Self {
        let eu = dir.join("eu_controls.csv");
        InputPaths {
            emissions: dir.join("emissions.csv"),
            covariates: dir.join("covariates.csv"),
            groups: dir.join("groups.csv"),
            eu_controls: eu.exists().then_some(eu),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Drop countries with missing cells (with a warning) instead of failing.
    pub drop_unbalanced: bool,
    /// Explicit year range; otherwise the reference period if covered, else
    /// the observed range.
    pub years: Option<(i32, i32)>,
}

/// All input tables, parsed but not yet cut into per-series panels.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelInputs {
    pub groups: BTreeMap<String, (Group, bool)>,
    pub covariates: BTreeMap<(String, i32), Covariates>,
    pub emissions: BTreeMap<(SeriesKey, String, i32), f64>,
    pub eu_controls: BTreeMap<String, BTreeMap<(String, i32), f64>>,
}

pub fn read_inputs(paths: &InputPaths) -> Result<PanelInputs> {
    let mut groups = BTreeMap::new();
    for r in read_rows::<GroupRow>(&paths.groups)? {
        let g: Group = r.group.parse()?;
        let eu = parse_bool(&r.eu_member)?;
        if groups.insert(r.country_iso3.clone(), (g, eu)).is_some() {
            return Err(Error::Input(format!(
                "{}: duplicate country {}",
                paths.groups.display(),
                r.country_iso3
            )));
        }
    }
    let mut covariates = BTreeMap::new();
    for r in read_rows::<CovariateRow>(&paths.covariates)? {
        let c = Covariates {
            gdp: r.gdp_usd2015,
            population: r.population,
            hdd: r.hdd16,
            cdd: r.cdd18,
        };
        if covariates.insert((r.country_iso3.clone(), r.year), c).is_some() {
            return Err(Error::Input(format!(
                "{}: duplicate row for {} {}",
                paths.covariates.display(),
                r.country_iso3,
                r.year
            )));
        }
    }
    let mut emissions = BTreeMap::new();
    for r in read_rows::<EmissionRow>(&paths.emissions)? {
        let key = SeriesKey::new(r.pollutant.parse::<Pollutant>()?, r.sector.parse::<Sector>()?);
        if emissions
            .insert((key, r.country_iso3.clone(), r.year), r.emissions_t)
            .is_some()
        {
            return Err(Error::Input(format!(
                "{}: duplicate row for {} {} {}",
                paths.emissions.display(),
                key,
                r.country_iso3,
                r.year
            )));
        }
    }
    let mut eu_controls: BTreeMap<String, BTreeMap<(String, i32), f64>> = BTreeMap::new();
    if let Some(p) = &paths.eu_controls {
        for r in read_rows::<ControlRow>(p)? {
            eu_controls
                .entry(r.control_name)
                .or_default()
                .insert((r.country_iso3, r.year), r.value);
        }
    }
    Ok(PanelInputs {
        groups,
        covariates,
        emissions,
        eu_controls,
    })
}

impl PanelInputs {
    pub fn series_available(&self) -> Vec<SeriesKey> {
        let set: BTreeSet<SeriesKey> = self.emissions.keys().map(|(s, _, _)| *s).collect();
        set.into_iter().collect()
    }

    /// Balanced panel for one series.
    pub fn dataset(&self, series: SeriesKey, opts: &LoadOptions) -> Result<PanelDataset> {
        let cells: Vec<(&String, i32)> = self
            .emissions
            .keys()
            .filter(|(s, _, _)| *s == series)
            .map(|(_, c, y)| (c, *y))
            .collect();
        if cells.is_empty() {
            return Err(Error::Input(format!(
                "series {series} not present in the emissions table"
            )));
        }
        let (first, last) = opts.years.unwrap_or_else(|| {
            let lo = cells.iter().map(|c| c.1).min().expect("non-empty");
            let hi = cells.iter().map(|c| c.1).max().expect("non-empty");
            if lo <= REFERENCE_YEARS.0 && hi >= REFERENCE_YEARS.1 {
                REFERENCE_YEARS
            } else {
                (lo, hi)
            }
        });
        let isos: BTreeSet<&String> = cells.iter().map(|c| c.0).collect();
        let mut countries = Vec::new();
        let mut emissions = Vec::new();
        let mut covariates = Vec::new();
        let mut controls: BTreeMap<String, Vec<f64>> =
            self.eu_controls.keys().map(|k| (k.clone(), Vec::new())).collect();
        'country: for iso in isos {
            let &(group, eu) = self
                .groups
                .get(iso)
                .ok_or_else(|| Error::Input(format!("country {iso} has emissions but no row in the groups table")))?;
            let mut e = Vec::new();
            let mut c = Vec::new();
            for year in first..=last {
                let em = self.emissions.get(&(series, iso.clone(), year));
                let cv = self.covariates.get(&(iso.clone(), year));
                let missing = match (em, cv) {
                    (None, _) => Some("emissions"),
                    (_, None) => Some("covariates"),
                    _ => None,
                };
                if let Some(what) = missing {
                    if opts.drop_unbalanced {
                        warn!("dropping {iso} from {series}: missing {what} in {year}");
                        continue 'country;
                    }
                    return Err(Error::MissingCell {
                        what,
                        country: iso.clone(),
                        year,
                    });
                }
                e.push(*em.expect("checked"));
                c.push(*cv.expect("checked"));
            }
            countries.push(Country::new(iso.clone(), group, eu));
            emissions.extend(e);
            covariates.extend(c);
            for (name, values) in controls.iter_mut() {
                let table = &self.eu_controls[name];
                values.extend((first..=last).map(|y| table.get(&(iso.clone(), y)).copied().unwrap_or(0.0)));
            }
        }
        PanelDataset::new(series, countries, first, last, emissions, covariates, controls)
    }
}

/// Reads the panel for one series from the four tables.
pub fn load_panel(paths: &InputPaths, series: SeriesKey, opts: &LoadOptions) -> Result<PanelDataset> {
    read_inputs(paths)?.dataset(series, opts)
}

#[derive(Debug, Deserialize)]
struct PolicyRow {
    country_iso3: String,
    year: i32,
    sector: String,
    instrument: String,
    action: String,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    eu_wide: Option<String>,
}

/// Policy events; a blank category is filled from `map`.
pub fn read_policies(path: &Path, map: &CategoryMap) -> Result<Vec<PolicyEvent>> {
    if fs::metadata(path).map_err(|e| Error::io(path, e))?.len() == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for r in read_rows::<PolicyRow>(path)? {
        let category = match r.category.as_deref().map(str::trim) {
            Some(c) if !c.is_empty() => c.parse::<Category>()?,
            _ => map.category(&r.instrument)?,
        };
        out.push(PolicyEvent {
            country: r.country_iso3,
            year: r.year,
            sector: r.sector.parse()?,
            instrument: r.instrument.trim().to_string(),
            action: r.action.parse::<Action>()?,
            category,
            eu_wide: parse_bool(r.eu_wide.as_deref().unwrap_or(""))?,
        });
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct CategoryRow {
    instrument: String,
    category: String,
}

/// Instrument -> category overrides (columns `instrument, category`).
pub fn read_category_table(path: &Path) -> Result<Vec<(String, Category)>> {
    read_rows::<CategoryRow>(path)?
        .into_iter()
        .map(|r| Ok((r.instrument, r.category.parse()?)))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct BreakRow {
    series_key: String,
    country: String,
    break_year: i32,
    tau_hat: f64,
    se: f64,
    effect_pct: f64,
    ci99_lo: i32,
    ci99_hi: i32,
    window_lo: i32,
    window_hi: i32,
    cum_reduction_t: f64,
    cum_lo_t: f64,
    cum_hi_t: f64,
}

fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Input(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Input(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Input(e.to_string()))
}

const BREAK_HEADER: [&str; 13] = [
    "series_key",
    "country",
    "break_year",
    "tau_hat",
    "se",
    "effect_pct",
    "ci99_lo",
    "ci99_hi",
    "window_lo",
    "window_hi",
    "cum_reduction_t",
    "cum_lo_t",
    "cum_hi_t",
];

pub fn breaks_csv(estimates: &[BreakEstimate]) -> Result<Vec<u8>> {
    let rows: Vec<BreakRow> = estimates
        .iter()
        .map(|e| BreakRow {
            series_key: e.series.label(),
            country: e.country_iso.clone(),
            break_year: e.year,
            tau_hat: e.tau_hat,
            se: e.se,
            effect_pct: e.effect_pct,
            ci99_lo: e.ci_lo,
            ci99_hi: e.ci_hi,
            window_lo: e.window_lo,
            window_hi: e.window_hi,
            cum_reduction_t: e.cum_reduction,
            cum_lo_t: e.cum_lo,
            cum_hi_t: e.cum_hi,
        })
        .collect();
    csv_bytes(&rows, &BREAK_HEADER)
}

/// Reads a breaks table back. Group and EU membership come from the groups
/// table; fields not stored in the table (p-value, counterfactual) are left
/// empty.
pub fn read_breaks(path: &Path, groups_path: &Path) -> Result<Vec<BreakEstimate>> {
    let mut groups = BTreeMap::new();
    for r in read_rows::<GroupRow>(groups_path)? {
        groups.insert(r.country_iso3, (r.group.parse::<Group>()?, parse_bool(&r.eu_member)?));
    }
    let index: BTreeMap<&String, usize> = groups.keys().enumerate().map(|(i, k)| (k, i)).collect();
    read_rows::<BreakRow>(path)?
        .into_iter()
        .map(|r| {
            let &(group, eu_member) = groups
                .get(&r.country)
                .ok_or_else(|| Error::Input(format!("break country {} missing from the groups table", r.country)))?;
            Ok(BreakEstimate {
                series: r.series_key.parse()?,
                country: index[&r.country],
                country_iso: r.country.clone(),
                group,
                eu_member,
                year: r.break_year,
                tau_hat: r.tau_hat,
                se: r.se,
                clustered_se: None,
                p_value: f64::NAN,
                significant: true,
                effect_pct: r.effect_pct,
                ci_lo: r.ci99_lo,
                ci_hi: r.ci99_hi,
                window_lo: r.window_lo,
                window_hi: r.window_hi,
                weak_timing: false,
                counterfactual: Vec::new(),
                cum_reduction: r.cum_reduction_t,
                cum_lo: r.cum_lo_t,
                cum_hi: r.cum_hi_t,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct AttributionRow {
    series_key: String,
    country: String,
    group: &'static str,
    break_year: i32,
    effect_pct: f64,
    window_lo: i32,
    window_hi: i32,
    n_events: usize,
    instruments: String,
    categories: String,
    mix: &'static str,
    includes_pricing: bool,
}

pub fn attribution_csv(matches: &[MatchedBreak]) -> Result<Vec<u8>> {
    let rows: Vec<AttributionRow> = matches
        .iter()
        .map(|m| {
            let mut instruments: Vec<String> = m.events.iter().map(|e| e.instrument.clone()).collect();
            instruments.sort();
            instruments.dedup();
            AttributionRow {
                series_key: m.estimate.series.label(),
                country: m.estimate.country_iso.clone(),
                group: m.estimate.group.as_str(),
                break_year: m.estimate.year,
                effect_pct: m.estimate.effect_pct,
                window_lo: m.estimate.window_lo,
                window_hi: m.estimate.window_hi,
                n_events: m.events.len(),
                instruments: instruments.join(";"),
                categories: m.categories.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("+"),
                mix: m.mix.as_str(),
                includes_pricing: m.includes_pricing,
            }
        })
        .collect();
    csv_bytes(
        &rows,
        &[
            "series_key",
            "country",
            "group",
            "break_year",
            "effect_pct",
            "window_lo",
            "window_hi",
            "n_events",
            "instruments",
            "categories",
            "mix",
            "includes_pricing",
        ],
    )
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let recs: Vec<(String, usize, f64, &'static str, String, String, String)> = rows
        .iter()
        .map(|r| {
            let case = |k: usize| r.cases.get(k).map(|c| c.to_string()).unwrap_or_default();
            (
                r.instrument.clone(),
                r.frequency,
                r.mean_effect,
                r.typology.as_str(),
                case(0),
                case(1),
                case(2),
            )
        })
        .collect();
    csv_bytes(
        &recs,
        &[
            "instrument",
            "frequency",
            "mean_effect",
            "typology",
            "case1",
            "case2",
            "case3",
        ],
    )
}

pub fn mix_csv(rows: &[MixRow]) -> Result<Vec<u8>> {
    let recs: Vec<_> = rows
        .iter()
        .map(|r| {
            (
                r.instrument.clone(),
                r.n_alone,
                r.mean_alone,
                r.n_mix,
                r.mean_mix,
                r.n_mix_pricing,
                r.mean_mix_pricing,
            )
        })
        .collect();
    csv_bytes(
        &recs,
        &[
            "instrument",
            "n_alone",
            "mean_alone",
            "n_mix",
            "mean_mix",
            "n_mix_pricing",
            "mean_mix_pricing",
        ],
    )
}

pub fn combo_csv(rows: &[ComboShare]) -> Result<Vec<u8>> {
    let recs: Vec<_> = rows
        .iter()
        .map(|r| {
            (
                r.pollutant.as_str(),
                r.sector.as_str(),
                r.group.as_str(),
                r.label(),
                r.count,
                r.share,
            )
        })
        .collect();
    csv_bytes(
        &recs,
        &["pollutant", "sector", "group", "combination", "count", "share"],
    )
}

pub fn totals_csv(rows: &[PollutantTotal]) -> Result<Vec<u8>> {
    let recs: Vec<_> = rows
        .iter()
        .map(|r| (r.pollutant.as_str(), r.n_breaks, r.reduction_gt, r.lo_gt, r.hi_gt))
        .collect();
    csv_bytes(&recs, &["pollutant", "n_breaks", "reduction_gt", "lo_gt", "hi_gt"])
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// The panel tables for a set of series sharing countries, years and
/// covariates (taken from the first dataset).
pub fn panel_csvs(datasets: &[PanelDataset]) -> Result<BTreeMap<&'static str, Vec<u8>>> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::Input("no datasets to write".into()))?;
    let mut em = Vec::new();
    for ds in datasets {
        if ds.countries() != first.countries() || ds.years() != first.years() {
            return Err(Error::Input(
                "datasets written together must share countries and years".into(),
            ));
        }
        for (i, c) in ds.countries().iter().enumerate() {
            for y in ds.years() {
                em.push((
                    c.iso3.clone(),
                    y,
                    ds.series().sector.as_str(),
                    ds.series().pollutant.as_str(),
                    ds.emissions()[ds.row(i, y)],
                ));
            }
        }
    }
    let mut cov = Vec::new();
    let mut ctl = Vec::new();
    for (i, c) in first.countries().iter().enumerate() {
        for y in first.years() {
            let v = first.covariates()[first.row(i, y)];
            cov.push((c.iso3.clone(), y, v.gdp, v.population, v.hdd, v.cdd));
        }
    }
    for (name, values) in first.eu_controls() {
        for (i, c) in first.countries().iter().enumerate() {
            for y in first.years() {
                ctl.push((name.clone(), c.iso3.clone(), y, values[first.row(i, y)]));
            }
        }
    }
    let groups: Vec<_> = first
        .countries()
        .iter()
        .map(|c| (c.iso3.clone(), c.group.as_str(), u8::from(c.eu_member)))
        .collect();
    let mut out = BTreeMap::new();
    out.insert(
        "emissions.csv",
        csv_bytes(&em, &["country_iso3", "year", "sector", "pollutant", "emissions_t"])?,
    );
    out.insert(
        "covariates.csv",
        csv_bytes(
            &cov,
            &["country_iso3", "year", "gdp_usd2015", "population", "hdd16", "cdd18"],
        )?,
    );
    out.insert(
        "groups.csv",
        csv_bytes(&groups, &["country_iso3", "group", "eu_member"])?,
    );
    out.insert(
        "eu_controls.csv",
        csv_bytes(&ctl, &["control_name", "country_iso3", "year", "value"])?,
    );
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: String,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub config: serde_json::Value,
    /// Method choices that affect how outputs should be read.
    pub notes: Vec<String>,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST: &str = "manifest.json";

/// Removes the files listed by an earlier run's manifest so the directory
/// never mixes outputs of two runs. Unlisted files are left alone.
fn clear_previous(root: &Path) -> Result<()> {
    let path = root.join(MANIFEST);
    let Ok(bytes) = fs::read(&path) else { return Ok(()) };
    let Ok(old) = serde_json::from_slice::<Manifest>(&bytes) else {
        return Ok(());
    };
    for a in &old.artifacts {
        let p = root.join(&a.path);
        if p.starts_with(root) && !a.path.contains("..") {
            let _ = fs::remove_file(p);
        }
    }
    fs::remove_file(&path).map_err(|e| Error::io(&path, e))
}

/// Single writer for a run's output directory. Everything it wrote can be
/// removed again if the run fails.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    written: BTreeMap<String, ArtifactEntry>,
    notes: Vec<String>,
}

impl ArtifactWriter {
    /// Creates the directory and proves it is writable.
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let probe = root.join(".breakscope-write-test");
        fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
        fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
        clear_previous(root)?;
        Ok(ArtifactWriter {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
            notes: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.written.insert(
            name.to_string(),
            ArtifactEntry {
                path: name.to_string(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            },
        );
        Ok(())
    }

    /// Adds a line to the manifest notes (once).
    pub fn note(&mut self, text: &str) {
        if !self.notes.iter().any(|n| n == text) {
            self.notes.push(text.to_string());
        }
    }

    pub fn artifacts(&self) -> Vec<ArtifactEntry> {
        self.written.values().cloned().collect()
    }

    /// Deletes everything written so far.
    pub fn discard(&mut self) {
        for name in self.written.keys() {
            let _ = fs::remove_file(self.root.join(name));
        }
        self.written.clear();
    }

    pub fn finish(
        mut self,
        command: &str,
        config: serde_json::Value,
        failure: Option<(&str, &Error)>,
    ) -> Result<Manifest> {
        if failure.is_some() {
            self.discard();
        }
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: if failure.is_some() { "failed" } else { "ok" }.to_string(),
            failed_stage: failure.map(|(s, _)| s.to_string()),
            error: failure.map(|(_, e)| e.to_string()),
            config,
            notes: std::mem::take(&mut self.notes),
            artifacts: self.artifacts(),
        };
        let path = self.root.join(MANIFEST);
        fs::write(&path, json_bytes(&manifest)?).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{simulate_panel, DgpSpec};

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn tiny_inputs(dir: &Path, drop_cell: bool) -> InputPaths {
        let mut em = String::from("country_iso3,year,sector,pollutant,emissions_t\n");
        let mut cov = String::from("country_iso3,year,gdp_usd2015,population,hdd16,cdd18\n");
        for iso in ["BBB", "AAA"] {
            for y in 2001..=2003 {
                if !(drop_cell && iso == "BBB" && y == 2002) {
                    em.push_str(&format!("{iso},{y},transport,NOx,{}\n", 100 + y - 2000));
                }
                cov.push_str(&format!("{iso},{y},1e9,1e6,2000,100\n"));
            }
        }
        InputPaths {
            emissions: write(dir, "emissions.csv", &em),
            covariates: write(dir, "covariates.csv", &cov),
            groups: write(
                dir,
                "groups.csv",
                "country_iso3,group,eu_member\nAAA,developed,1\nBBB,developing,0\n",
            ),
            eu_controls: None,
        }
    }

    #[test]
    fn minimal_panel_has_six_rows() {
        let dir = tempfile::tempdir().unwrap();
        let paths = tiny_inputs(dir.path(), false);
        let ds = load_panel(&paths, "NOx/transport".parse().unwrap(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.n_rows(), 6);
        assert_eq!(ds.countries()[0].iso3, "AAA");
        assert!(ds.countries()[0].eu_member);
    }

    #[test]
    fn missing_cell_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let paths = tiny_inputs(dir.path(), true);
        let err = load_panel(&paths, "NOx/transport".parse().unwrap(), &LoadOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("BBB") && msg.contains("2002"), "{msg}");
        let opts = LoadOptions {
            drop_unbalanced: true,
            ..LoadOptions::default()
        };
        let ds = load_panel(&paths, "NOx/transport".parse().unwrap(), &opts).unwrap();
        assert_eq!(ds.n_countries(), 1);
    }

    #[test]
    fn absent_series_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let paths = tiny_inputs(dir.path(), false);
        assert!(load_panel(&paths, "CO/industry".parse().unwrap(), &LoadOptions::default()).is_err());
    }

    #[test]
    fn simulated_panel_round_trips() {
        let (ds, _) = simulate_panel(&DgpSpec::null(5, 6, 0.05, 3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for (name, bytes) in panel_csvs(std::slice::from_ref(&ds)).unwrap() {
            fs::write(dir.path().join(name), bytes).unwrap();
        }
        let back = load_panel(&InputPaths::in_dir(dir.path()), ds.series(), &LoadOptions::default()).unwrap();
        assert_eq!(back.countries(), ds.countries());
        for (a, b) in back.emissions().iter().zip(ds.emissions()) {
            assert_eq!(a, b);
        }
        assert_eq!(back.eu_controls(), ds.eu_controls());
    }

    #[test]
    fn empty_policy_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "policies.csv", "");
        assert!(read_policies(&p, &CategoryMap::default()).unwrap().is_empty());
        let p = write(
            dir.path(),
            "p2.csv",
            "country_iso3,year,sector,instrument,action,category,eu_wide\n",
        );
        assert!(read_policies(&p, &CategoryMap::default()).unwrap().is_empty());
    }

    #[test]
    fn policy_category_defaults_from_table() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "policies.csv",
            "country_iso3,year,sector,instrument,action,category,eu_wide\nCHL,2014,buildings,Carbon tax,adoption,,0\nEU,2005,electricity,Emission trading scheme,adoption,pricing,1\n",
        );
        let ev = read_policies(&p, &CategoryMap::default()).unwrap();
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|e| e.category == Category::Pricing));
        assert!(ev.iter().any(|e| e.eu_wide));
    }

    #[test]
    fn failed_run_leaves_only_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write("a.csv", b"x\n").unwrap();
        let err = Error::Numerical("boom".into());
        let m = w
            .finish("pipeline", serde_json::Value::Null, Some(("estimate", &err)))
            .unwrap();
        assert_eq!(m.status, "failed");
        assert!(!dir.path().join("a.csv").exists());
        assert!(dir.path().join(MANIFEST).exists());
    }
}
