//! Country-year panel data and the saturated two-way fixed-effects design.
//!
//! Rows are always ordered by (country ISO code ascending, year ascending), so
//! row `i * T + t` is country `i` in year `first_year + t`. Everything
//! downstream (selection traces, reports, hashes) depends on this ordering.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pollutant {
    #[serde(rename = "NOx")]
    Nox,
    #[serde(rename = "CO")]
    Co,
    #[serde(rename = "VOCs")]
    Vocs,
}

impl Pollutant {
    pub const ALL: [Pollutant; 3] = [Pollutant::Nox, Pollutant::Co, Pollutant::Vocs];

    pub fn as_str(self) -> &'static str {
        match self {
            Pollutant::Nox => "NOx",
            Pollutant::Co => "CO",
            Pollutant::Vocs => "VOCs",
        }
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pollutant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nox" | "no_x" => Ok(Pollutant::Nox),
            "co" => Ok(Pollutant::Co),
            "vocs" | "voc" | "nmvoc" | "nmvocs" => Ok(Pollutant::Vocs),
            other => Err(Error::Input(format!("unknown pollutant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Buildings,
    Electricity,
    Industry,
    Transport,
}

impl Sector {
    pub const ALL: [Sector; 4] = [
        Sector::Buildings,
        Sector::Electricity,
        Sector::Industry,
        Sector::Transport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Buildings => "buildings",
            Sector::Electricity => "electricity",
            Sector::Industry => "industry",
            Sector::Transport => "transport",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "buildings" | "building" | "bui" | "bui." => Ok(Sector::Buildings),
            "electricity" | "power" | "ele" | "ele." => Ok(Sector::Electricity),
            "industry" | "industrial" | "ind" | "ind." => Ok(Sector::Industry),
            "transport" | "tra" | "tra." => Ok(Sector::Transport),
            other => Err(Error::Input(format!("unknown sector '{other}'"))),
        }
    }
}

/// One (pollutant, sector) emission series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub pollutant: Pollutant,
    pub sector: Sector,
}

impl SeriesKey {
    pub fn new(pollutant: Pollutant, sector: Sector) -> Self {
        SeriesKey { pollutant, sector }
    }

    /// All twelve pollutant x sector series.
    pub fn all() -> Vec<SeriesKey> {
        Pollutant::ALL
            .iter()
            .flat_map(|&p| Sector::ALL.iter().map(move |&s| SeriesKey::new(p, s)))
            .collect()
    }

    /// File-name-safe label, e.g. `NOx_transport`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.pollutant, self.sector)
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.pollutant, self.sector)
    }
}

impl FromStr for SeriesKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, sec) = s
            .split_once(['/', '_', ':'])
            .ok_or_else(|| Error::Input(format!("series key '{s}' must look like NOx/transport")))?;
        Ok(SeriesKey::new(p.parse()?, sec.parse()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Developed,
    Developing,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Developed => "developed",
            Group::Developing => "developing",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "developed" | "industrialized" => Ok(Group::Developed),
            "developing" | "transition" => Ok(Group::Developing),
            other => Err(Error::Input(format!("unknown country group '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Country {
    pub iso3: String,
    pub group: Group,
    pub eu_member: bool,
}

impl Country {
    pub fn new(iso3: impl Into<String>, group: Group, eu_member: bool) -> Self {
        Country {
            iso3: iso3.into(),
            group,
            eu_member,
        }
    }
}

/// Per-cell covariates in levels (logged when the design is built).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariates {
    pub gdp: f64,
    pub population: f64,
    pub hdd: f64,
    pub cdd: f64,
}

/// Balanced country x year panel for one emission series.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    series: SeriesKey,
    countries: Vec<Country>,
    first_year: i32,
    last_year: i32,
    emissions: Vec<f64>,
    covariates: Vec<Covariates>,
    eu_controls: BTreeMap<String, Vec<f64>>,
}

impl PanelDataset {
    /// Validates and assembles a dataset. `emissions`, `covariates` and every
    /// control series are indexed by `i * T + t` in the given country order;
    /// countries are re-sorted by ISO code here.
    pub fn new(
        series: SeriesKey,
        countries: Vec<Country>,
        first_year: i32,
        last_year: i32,
        emissions: Vec<f64>,
        covariates: Vec<Covariates>,
        eu_controls: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self> {
        if last_year < first_year {
            return Err(Error::Input(format!("year range {first_year}..{last_year} is empty")));
        }
        if countries.is_empty() {
            return Err(Error::Input("panel has no countries".into()));
        }
        let t = (last_year - first_year + 1) as usize;
        let n = countries.len() * t;
        if emissions.len() != n || covariates.len() != n {
            return Err(Error::Input(format!(
                "panel arrays must have {n} cells (countries x years)"
            )));
        }
        for (name, v) in &eu_controls {
            if v.len() != n {
                return Err(Error::Input(format!("EU control '{name}' has wrong length")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &countries {
            if !seen.insert(c.iso3.as_str()) {
                return Err(Error::Input(format!("duplicate country {}", c.iso3)));
            }
        }

        let mut order: Vec<usize> = (0..countries.len()).collect();
        order.sort_by(|&a, &b| countries[a].iso3.cmp(&countries[b].iso3));
        let permute = |v: &[f64]| -> Vec<f64> {
            order
                .iter()
                .flat_map(|&i| v[i * t..(i + 1) * t].iter().copied())
                .collect()
        };
        let emissions = permute(&emissions);
        let covariates: Vec<Covariates> = order
            .iter()
            .flat_map(|&i| covariates[i * t..(i + 1) * t].iter().copied())
            .collect();
        let eu_controls = eu_controls.iter().map(|(k, v)| (k.clone(), permute(v))).collect();
        let countries: Vec<Country> = order.iter().map(|&i| countries[i].clone()).collect();

        let ds = PanelDataset {
            series,
            countries,
            first_year,
            last_year,
            emissions,
            covariates,
            eu_controls,
        };
        ds.validate_positive()?;
        Ok(ds)
    }

    fn validate_positive(&self) -> Result<()> {
        for (i, c) in self.countries.iter().enumerate() {
            for (t, year) in self.years().enumerate() {
                let row = i * self.n_years() + t;
                let cov = &self.covariates[row];
                let checks = [
                    ("emissions", self.emissions[row]),
                    ("gdp", cov.gdp),
                    ("population", cov.population),
                    ("hdd", cov.hdd),
                    ("cdd", cov.cdd),
                ];
                for (what, value) in checks {
                    if !(value > 0.0 && value.is_finite()) {
                        return Err(Error::NonPositive {
                            what,
                            country: c.iso3.clone(),
                            year,
                            value,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn series(&self) -> SeriesKey {
        self.series
    }

    pub fn countries(&self) -> &[Country] {
        &self.countries
    }

    pub fn n_countries(&self) -> usize {
        self.countries.len()
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.last_year
    }

    pub fn years(&self) -> std::ops::RangeInclusive<i32> {
        self.first_year..=self.last_year
    }

    pub fn n_years(&self) -> usize {
        (self.last_year - self.first_year + 1) as usize
    }

    pub fn n_rows(&self) -> usize {
        self.countries.len() * self.n_years()
    }

    pub fn row(&self, country: usize, year: i32) -> usize {
        country * self.n_years() + (year - self.first_year) as usize
    }

    pub fn country_index(&self, iso3: &str) -> Option<usize> {
        self.countries.iter().position(|c| c.iso3 == iso3)
    }

    /// Emissions in tonnes/year, row order.
    pub fn emissions(&self) -> &[f64] {
        &self.emissions
    }

    pub fn covariates(&self) -> &[Covariates] {
        &self.covariates
    }

    pub fn eu_controls(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.eu_controls
    }

    pub fn log_emissions(&self) -> DVector<f64> {
        DVector::from_iterator(self.n_rows(), self.emissions.iter().map(|e| e.ln()))
    }

    /// Emissions of one country across all years.
    pub fn country_emissions(&self, country: usize) -> &[f64] {
        let t = self.n_years();
        &self.emissions[country * t..(country + 1) * t]
    }

    /// Restricts the panel to the countries of one group.
    pub fn subset_group(&self, group: Group) -> Result<PanelDataset> {
        let keep: Vec<usize> = (0..self.n_countries())
            .filter(|&i| self.countries[i].group == group)
            .collect();
        self.subset_countries(&keep)
    }

    pub fn subset_countries(&self, keep: &[usize]) -> Result<PanelDataset> {
        let t = self.n_years();
        let pick = |v: &[f64]| -> Vec<f64> {
            keep.iter()
                .flat_map(|&i| v[i * t..(i + 1) * t].iter().copied())
                .collect()
        };
        PanelDataset::new(
            self.series,
            keep.iter().map(|&i| self.countries[i].clone()).collect(),
            self.first_year,
            self.last_year,
            pick(&self.emissions),
            keep.iter()
                .flat_map(|&i| self.covariates[i * t..(i + 1) * t].iter().copied())
                .collect(),
            self.eu_controls.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
        )
    }

    /// Same panel with the emission column replaced (row order).
    pub fn with_emissions(&self, emissions: Vec<f64>) -> Result<PanelDataset> {
        let mut ds = self.clone();
        if emissions.len() != ds.n_rows() {
            return Err(Error::Input("replacement emissions have wrong length".into()));
        }
        ds.emissions = emissions;
        ds.validate_positive()?;
        Ok(ds)
    }

    pub fn with_series(mut self, series: SeriesKey) -> Self {
        self.series = series;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    Step,
    Impulse,
}

/// A candidate break indicator for country index `country`.
///
/// A step is 1 on rows of `country` with `t >= year`; an impulse is 1 only at
/// `t == year`. Ordering is lexicographic in (country, year, kind).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Candidate {
    pub country: usize,
    pub year: i32,
    pub kind: IndicatorKind,
}

impl Candidate {
    pub fn step(country: usize, year: i32) -> Self {
        Candidate {
            country,
            year,
            kind: IndicatorKind::Step,
        }
    }

    pub fn impulse(country: usize, year: i32) -> Self {
        Candidate {
            country,
            year,
            kind: IndicatorKind::Impulse,
        }
    }

    pub fn is_step(&self) -> bool {
        self.kind == IndicatorKind::Step
    }

    /// Indicator value at a (country, year) cell.
    pub fn value(&self, country: usize, year: i32) -> f64 {
        let on = country == self.country
            && match self.kind {
                IndicatorKind::Step => year >= self.year,
                IndicatorKind::Impulse => year == self.year,
            };
        if on {
            1.0
        } else {
            0.0
        }
    }

    /// Full column over the dataset's rows.
    pub fn column(&self, ds: &PanelDataset) -> Vec<f64> {
        let mut v = vec![0.0; ds.n_rows()];
        for year in ds.years() {
            if self.value(self.country, year) != 0.0 {
                v[ds.row(self.country, year)] = 1.0;
            }
        }
        v
    }

    pub(crate) fn check(&self, ds: &PanelDataset) -> Result<()> {
        let ok_country = self.country < ds.n_countries();
        let ok_year = match self.kind {
            IndicatorKind::Step => self.year > ds.first_year() && self.year <= ds.last_year(),
            IndicatorKind::Impulse => ds.years().contains(&self.year),
        };
        if ok_country && ok_year {
            Ok(())
        } else {
            Err(Error::Input(format!("candidate {self:?} outside the panel")))
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            IndicatorKind::Step => "step",
            IndicatorKind::Impulse => "iis",
        };
        write!(f, "{k}({},{})", self.country, self.year)
    }
}

/// All step candidates: N x (T - 1), ordered by (country, year).
pub fn all_steps(ds: &PanelDataset) -> Vec<Candidate> {
    (0..ds.n_countries())
        .flat_map(|j| ((ds.first_year() + 1)..=ds.last_year()).map(move |s| Candidate::step(j, s)))
        .collect()
}

/// All impulse candidates: N x T.
pub fn all_impulses(ds: &PanelDataset) -> Vec<Candidate> {
    (0..ds.n_countries())
        .flat_map(|j| ds.years().map(move |t| Candidate::impulse(j, t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Covariate {
    LnGdp,
    LnGdpSq,
    LnPop,
    LnHdd,
    LnCdd,
}

impl Covariate {
    pub const ALL: [Covariate; 5] = [
        Covariate::LnGdp,
        Covariate::LnGdpSq,
        Covariate::LnPop,
        Covariate::LnHdd,
        Covariate::LnCdd,
    ];

    pub fn eval(self, c: &Covariates) -> f64 {
        match self {
            Covariate::LnGdp => c.gdp.ln(),
            Covariate::LnGdpSq => c.gdp.ln().powi(2),
            Covariate::LnPop => c.population.ln(),
            Covariate::LnHdd => c.hdd.ln(),
            Covariate::LnCdd => c.cdd.ln(),
        }
    }
}

/// Provenance of one design column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColumnKind {
    CountryEffect(usize),
    GroupYear { group: Group, year: i32 },
    Covariate(Covariate),
    EuControl(String),
    CountryTrend(usize),
    Indicator(Candidate),
}

impl ColumnKind {
    /// Forced columns are never eligible for elimination.
    pub fn is_forced(&self) -> bool {
        !matches!(self, ColumnKind::Indicator(_))
    }

    pub fn candidate(&self) -> Option<Candidate> {
        match self {
            ColumnKind::Indicator(c) => Some(*c),
            _ => None,
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnKind::CountryEffect(i) => write!(f, "mu({i})"),
            ColumnKind::GroupYear { group, year } => write!(f, "eta({group},{year})"),
            ColumnKind::Covariate(c) => write!(f, "{c:?}"),
            ColumnKind::EuControl(name) => write!(f, "eu({name})"),
            ColumnKind::CountryTrend(i) => write!(f, "trend({i})"),
            ColumnKind::Indicator(c) => write!(f, "{c}"),
        }
    }
}

/// Regressor matrix plus response, with per-column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub columns: Vec<ColumnKind>,
}

impl DesignMatrix {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, columns: Vec<ColumnKind>) -> Result<Self> {
        if x.nrows() != y.len() || x.ncols() != columns.len() {
            return Err(Error::Input(format!(
                "design shape mismatch: x is {}x{}, y has {}, {} column labels",
                x.nrows(),
                x.ncols(),
                y.len(),
                columns.len()
            )));
        }
        Ok(DesignMatrix { x, y, columns })
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, kind: &ColumnKind) -> Option<usize> {
        self.columns.iter().position(|c| c == kind)
    }

    pub fn n_candidates(&self) -> usize {
        self.columns.iter().filter(|c| !c.is_forced()).count()
    }

    /// Indices of forced columns.
    pub fn forced_indices(&self) -> Vec<usize> {
        (0..self.ncols()).filter(|&k| self.columns[k].is_forced()).collect()
    }
}

/// Forced regressors only: country effects, group-year effects, logged
/// covariates, EU controls on member rows, centered country trends.
pub fn forced_columns(ds: &PanelDataset) -> (Vec<ColumnKind>, Vec<Vec<f64>>) {
    let n = ds.n_rows();
    let t_len = ds.n_years();
    let mut kinds = Vec::new();
    let mut cols = Vec::new();

    for i in 0..ds.n_countries() {
        let mut v = vec![0.0; n];
        v[i * t_len..(i + 1) * t_len].fill(1.0);
        kinds.push(ColumnKind::CountryEffect(i));
        cols.push(v);
    }

    // One reference year dropped per group to avoid collinearity with the
    // country effects.
    for group in [Group::Developed, Group::Developing] {
        let members: Vec<usize> = (0..ds.n_countries())
            .filter(|&i| ds.countries()[i].group == group)
            .collect();
        if members.is_empty() {
            continue;
        }
        for year in (ds.first_year() + 1)..=ds.last_year() {
            let mut v = vec![0.0; n];
            for &i in &members {
                v[ds.row(i, year)] = 1.0;
            }
            kinds.push(ColumnKind::GroupYear { group, year });
            cols.push(v);
        }
    }

    for cov in Covariate::ALL {
        kinds.push(ColumnKind::Covariate(cov));
        cols.push(ds.covariates().iter().map(|c| cov.eval(c)).collect());
    }

    for (name, values) in ds.eu_controls() {
        let mut v = vec![0.0; n];
        let mut any = false;
        for (i, c) in ds.countries().iter().enumerate() {
            if !c.eu_member {
                continue;
            }
            for year in ds.years() {
                let r = ds.row(i, year);
                v[r] = values[r];
                any |= values[r] != 0.0;
            }
        }
        if any {
            kinds.push(ColumnKind::EuControl(name.clone()));
            cols.push(v);
        }
    }

    let center = (ds.first_year() + ds.last_year()) as f64 / 2.0;
    for i in 0..ds.n_countries() {
        let mut v = vec![0.0; n];
        for year in ds.years() {
            v[ds.row(i, year)] = year as f64 - center;
        }
        kinds.push(ColumnKind::CountryTrend(i));
        cols.push(v);
    }

    (kinds, cols)
}

/// Builds the saturated design: forced columns followed by the candidate
/// indicators in (country, year, kind) order. With `include_impulses`, every
/// impulse indicator not already listed is appended.
pub fn build_design(ds: &PanelDataset, candidates: &[Candidate], include_impulses: bool) -> Result<DesignMatrix> {
    let mut cands: Vec<Candidate> = candidates.to_vec();
    if include_impulses {
        cands.extend(all_impulses(ds));
    }
    cands.sort();
    cands.dedup();
    for c in &cands {
        c.check(ds)?;
    }

    let (mut kinds, mut cols) = forced_columns(ds);
    for c in &cands {
        kinds.push(ColumnKind::Indicator(*c));
        cols.push(c.column(ds));
    }
    let n = ds.n_rows();
    let x = DMatrix::from_fn(n, cols.len(), |r, k| cols[k][r]);
    DesignMatrix::new(x, ds.log_emissions(), kinds)
}
