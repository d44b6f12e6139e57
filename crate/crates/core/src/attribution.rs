//! Break deduplication, policy matching and the descriptive tables built on
//! the matches.
//!
//! A policy event is attributed to a break when it shares the break's country
//! and sector and its year falls inside the break's attribution window (the
//! timing interval widened by the window half-width). EU-wide events match
//! every EU member.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::effects::BreakEstimate;
use crate::error::{Error, Result};
use crate::panel::{Group, Pollutant, Sector, SeriesKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Information,
    Pricing,
    Regulation,
    Subsidy,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Information => "information",
            Category::Pricing => "pricing",
            Category::Regulation => "regulation",
            Category::Subsidy => "subsidy",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "information" => Ok(Category::Information),
            "pricing" => Ok(Category::Pricing),
            "regulation" => Ok(Category::Regulation),
            "subsidy" => Ok(Category::Subsidy),
            other => Err(Error::Input(format!("unknown policy category '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Adoption,
    Tightening,
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adoption" | "adopt" | "new" => Ok(Action::Adoption),
            "tightening" | "tighten" | "strengthening" => Ok(Action::Tightening),
            other => Err(Error::Input(format!("unknown policy action '{other}'"))),
        }
    }
}

/// Lowercased, whitespace-collapsed instrument key with `&` spelled `and`.
pub fn normalize_instrument(name: &str) -> String {
    name.replace('&', " and ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Instrument -> category table. Exact names first, then keyword rules.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryMap {
    exact: BTreeMap<String, Category>,
}

const DEFAULT_CATEGORIES: [(&str, Category); 22] = [
    ("label", Category::Information),
    ("labels", Category::Information),
    ("energy efficiency label", Category::Information),
    ("carbon tax", Category::Pricing),
    ("fuel tax", Category::Pricing),
    ("emission trading scheme", Category::Pricing),
    ("emissions trading scheme", Category::Pricing),
    ("emission trading", Category::Pricing),
    ("fossil fuel subsidy reform", Category::Pricing),
    ("ban and phase out", Category::Regulation),
    ("building code", Category::Regulation),
    ("performance standard", Category::Regulation),
    ("minimum energy performance standard", Category::Regulation),
    ("energy efficiency mandate", Category::Regulation),
    ("renewable auction", Category::Regulation),
    ("renewable expansion planning", Category::Regulation),
    ("fuel standard", Category::Regulation),
    ("adoption subsidy", Category::Subsidy),
    ("financing mechanism", Category::Subsidy),
    ("public expenditure for rail", Category::Subsidy),
    ("public expenditure", Category::Subsidy),
    ("feed-in tariff", Category::Subsidy),
];

impl Default for CategoryMap {
    fn default() -> Self {
        CategoryMap {
            exact: DEFAULT_CATEGORIES.iter().map(|(k, c)| (k.to_string(), *c)).collect(),
        }
    }
}

impl CategoryMap {
    /// Adds or replaces entries (e.g. from a user-supplied table).
    pub fn extend(&mut self, entries: impl IntoIterator<Item = (String, Category)>) {
        for (k, c) in entries {
            self.exact.insert(normalize_instrument(&k), c);
        }
    }

    pub fn category(&self, instrument: &str) -> Result<Category> {
        let key = normalize_instrument(instrument);
        if let Some(c) = self.exact.get(&key) {
            return Ok(*c);
        }
        let has = |w: &str| key.contains(w);
        let c = if has("subsidy reform") || has("tax") || has("trading") {
            Category::Pricing
        } else if has("label") || has("information") {
            Category::Information
        } else if has("ban") || has("code") || has("standard") || has("mandate") || has("auction") || has("planning") {
            Category::Regulation
        } else if has("subsid") || has("financ") || has("expenditure") || has("grant") || has("loan") {
            Category::Subsidy
        } else {
            return Err(Error::Input(format!(
                "no category for instrument '{instrument}'; add it to the category table"
            )));
        };
        Ok(c)
    }
}

/// Instruments pooled as "taxation" in the individual-vs-mix comparison.
pub fn is_taxation(instrument: &str) -> bool {
    let k = normalize_instrument(instrument);
    k.contains("tax") || k.contains("emission trading") || k.contains("emissions trading")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PolicyEvent {
    /// ISO-3 code; ignored for EU-wide events.
    pub country: String,
    pub year: i32,
    pub sector: Sector,
    pub instrument: String,
    pub action: Action,
    pub category: Category,
    pub eu_wide: bool,
}

impl PolicyEvent {
    pub fn new(
        country: &str,
        year: i32,
        sector: Sector,
        instrument: &str,
        action: Action,
        map: &CategoryMap,
        eu_wide: bool,
    ) -> Result<Self> {
        Ok(PolicyEvent {
            country: country.to_string(),
            year,
            sector,
            instrument: instrument.trim().to_string(),
            action,
            category: map.category(instrument)?,
            eu_wide,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixLabel {
    Unmatched,
    SingleType,
    MixedType,
}

impl MixLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            MixLabel::Unmatched => "unmatched",
            MixLabel::SingleType => "single-type",
            MixLabel::MixedType => "mixed-type",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedBreak {
    pub estimate: BreakEstimate,
    pub events: Vec<PolicyEvent>,
    pub categories: BTreeSet<Category>,
    pub mix: MixLabel,
    pub includes_pricing: bool,
}

impl MatchedBreak {
    pub fn is_matched(&self) -> bool {
        !self.events.is_empty()
    }

    /// Distinct normalized instrument keys among the matched events.
    pub fn instruments(&self) -> BTreeSet<String> {
        self.events
            .iter()
            .map(|e| normalize_instrument(&e.instrument))
            .collect()
    }
}

fn contains(outer: &BreakEstimate, inner: &BreakEstimate) -> bool {
    outer.ci_lo <= inner.ci_lo && inner.ci_hi <= outer.ci_hi
}

/// Within each (series, country), a break whose timing interval contains or
/// is contained in that of a break with larger |effect| is removed. Input
/// order is preserved; the operation is idempotent.
pub fn dedupe_breaks(estimates: &[BreakEstimate]) -> Vec<BreakEstimate> {
    let mut groups: BTreeMap<(SeriesKey, &str), Vec<usize>> = BTreeMap::new();
    for (i, e) in estimates.iter().enumerate() {
        groups.entry((e.series, e.country_iso.as_str())).or_default().push(i);
    }
    let mut keep = vec![false; estimates.len()];
    for idx in groups.values() {
        let mut order = idx.clone();
        order.sort_by(|&a, &b| {
            let (ea, eb) = (&estimates[a], &estimates[b]);
            eb.effect_pct
                .abs()
                .total_cmp(&ea.effect_pct.abs())
                .then(ea.year.cmp(&eb.year))
        });
        let mut kept: Vec<usize> = Vec::new();
        for i in order {
            let e = &estimates[i];
            let clash = kept
                .iter()
                .any(|&k| contains(&estimates[k], e) || contains(e, &estimates[k]));
            if !clash {
                kept.push(i);
                keep[i] = true;
            }
        }
    }
    estimates
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e.clone())
        .collect()
}

fn mix_of(events: &[PolicyEvent]) -> (BTreeSet<Category>, MixLabel, bool) {
    let categories: BTreeSet<Category> = events.iter().map(|e| e.category).collect();
    let mix = match categories.len() {
        0 => MixLabel::Unmatched,
        1 => MixLabel::SingleType,
        _ => MixLabel::MixedType,
    };
    let pricing = categories.contains(&Category::Pricing);
    (categories, mix, pricing)
}

/// Attaches every event inside each break's attribution window.
pub fn match_policies(breaks: &[BreakEstimate], events: &[PolicyEvent]) -> Vec<MatchedBreak> {
    breaks
        .iter()
        .map(|b| {
            let mut matched: Vec<PolicyEvent> = events
                .iter()
                .filter(|e| {
                    e.sector == b.series.sector
                        && e.year >= b.window_lo
                        && e.year <= b.window_hi
                        && (if e.eu_wide {
                            b.eu_member
                        } else {
                            e.country == b.country_iso
                        })
                })
                .cloned()
                .collect();
            matched.sort();
            matched.dedup();
            let (categories, mix, includes_pricing) = mix_of(&matched);
            MatchedBreak {
                estimate: b.clone(),
                events: matched,
                categories,
                mix,
                includes_pricing,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Typology {
    DevelopedDominant,
    DevelopingDominated,
    Equivalent,
}

impl Typology {
    /// Two-thirds rule on case counts (inclusive).
    pub fn from_counts(developed: usize, developing: usize) -> Typology {
        let total = developed + developing;
        if total > 0 && 3 * developed >= 2 * total {
            Typology::DevelopedDominant
        } else if total > 0 && 3 * developing >= 2 * total {
            Typology::DevelopingDominated
        } else {
            Typology::Equivalent
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Typology::DevelopedDominant => "developed-dominant",
            Typology::DevelopingDominated => "developing-dominated",
            Typology::Equivalent => "equivalent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRef {
    pub country: String,
    pub year: i32,
    pub effect_pct: f64,
    pub sector: Sector,
}

impl fmt::Display for CaseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{} ({:.1}%) in {}",
            self.country, self.year, self.effect_pct, self.sector
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instrument: String,
    /// Matched breaks in which the instrument appears.
    pub frequency: usize,
    /// Mean of exp(tau) - 1 over those breaks (a fraction, not percent).
    pub mean_effect: f64,
    pub n_developed: usize,
    pub n_developing: usize,
    pub typology: Typology,
    /// Up to three cases with the largest |effect|.
    pub cases: Vec<CaseRef>,
}

fn display_names(matches: &[MatchedBreak]) -> BTreeMap<String, String> {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    for m in matches {
        for e in &m.events {
            let key = normalize_instrument(&e.instrument);
            let entry = names.entry(key).or_insert_with(|| e.instrument.clone());
            if e.instrument < *entry {
                *entry = e.instrument.clone();
            }
        }
    }
    names
}

/// Frequency, mean effect, typology and top cases per instrument, ordered by
/// frequency (descending) then name.
pub fn summarize_instruments(matches: &[MatchedBreak]) -> Vec<SummaryRow> {
    let names = display_names(matches);
    let mut per: BTreeMap<String, Vec<&MatchedBreak>> = BTreeMap::new();
    for m in matches {
        for key in m.instruments() {
            per.entry(key).or_default().push(m);
        }
    }
    let mut rows: Vec<SummaryRow> = per
        .into_iter()
        .map(|(key, ms)| {
            let frequency = ms.len();
            let mean_effect = ms.iter().map(|m| m.estimate.effect_pct / 100.0).sum::<f64>() / frequency as f64;
            let n_developed = ms.iter().filter(|m| m.estimate.group == Group::Developed).count();
            let n_developing = frequency - n_developed;
            let mut cases: Vec<CaseRef> = ms
                .iter()
                .map(|m| CaseRef {
                    country: m.estimate.country_iso.clone(),
                    year: m.estimate.year,
                    effect_pct: m.estimate.effect_pct,
                    sector: m.estimate.series.sector,
                })
                .collect();
            cases.sort_by(|a, b| {
                b.effect_pct
                    .abs()
                    .total_cmp(&a.effect_pct.abs())
                    .then(a.country.cmp(&b.country))
                    .then(a.year.cmp(&b.year))
            });
            cases.truncate(3);
            SummaryRow {
                instrument: names[&key].clone(),
                frequency,
                mean_effect,
                n_developed,
                n_developing,
                typology: Typology::from_counts(n_developed, n_developing),
                cases,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.frequency.cmp(&a.frequency).then(a.instrument.cmp(&b.instrument)));
    rows
}

pub const TAXATION: &str = "Taxation";

/// Instrument key for the individual-vs-mix comparison: taxes and emission
/// trading pool into one "Taxation" instrument.
fn mix_key(e: &PolicyEvent) -> String {
    if is_taxation(&e.instrument) {
        normalize_instrument(TAXATION)
    } else {
        normalize_instrument(&e.instrument)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixRow {
    pub instrument: String,
    pub n_alone: usize,
    /// Mean exp(tau) - 1 where the instrument is the only one matched.
    pub mean_alone: Option<f64>,
    pub n_mix: usize,
    pub mean_mix: Option<f64>,
    /// Mixes that include a pricing instrument; absent for pricing instruments.
    pub n_mix_pricing: usize,
    pub mean_mix_pricing: Option<f64>,
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Mean effect of each instrument alone, in any mix, and in a mix with
/// pricing. Empty cells are `None`.
pub fn mix_vs_single(matches: &[MatchedBreak]) -> Vec<MixRow> {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    // (alone, mix, mix with pricing, instrument is itself pricing)
    type Cells = (Vec<f64>, Vec<f64>, Vec<f64>, bool);
    let mut cells: BTreeMap<String, Cells> = BTreeMap::new();
    for m in matches.iter().filter(|m| m.is_matched()) {
        let mut keys: BTreeMap<String, bool> = BTreeMap::new();
        for e in &m.events {
            let k = mix_key(e);
            let display = if is_taxation(&e.instrument) {
                TAXATION.to_string()
            } else {
                e.instrument.clone()
            };
            let entry = names.entry(k.clone()).or_insert_with(|| display.clone());
            if display < *entry {
                *entry = display;
            }
            *keys.entry(k).or_insert(false) |= e.category == Category::Pricing;
        }
        let effect = m.estimate.effect_pct / 100.0;
        for (k, &pricing_self) in &keys {
            let c = cells
                .entry(k.clone())
                .or_insert_with(|| (vec![], vec![], vec![], pricing_self));
            c.3 |= pricing_self;
            if keys.len() == 1 {
                c.0.push(effect);
            } else {
                c.1.push(effect);
                if keys.iter().any(|(other, &p)| other != k && p) {
                    c.2.push(effect);
                }
            }
        }
    }
    cells
        .into_iter()
        .map(|(k, (alone, mix, mix_p, is_pricing))| MixRow {
            instrument: names[&k].clone(),
            n_alone: alone.len(),
            mean_alone: mean(&alone),
            n_mix: mix.len(),
            mean_mix: mean(&mix),
            n_mix_pricing: if is_pricing { 0 } else { mix_p.len() },
            mean_mix_pricing: if is_pricing { None } else { mean(&mix_p) },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComboShare {
    pub pollutant: Pollutant,
    pub sector: Sector,
    pub group: Group,
    pub combination: Vec<Category>,
    pub count: usize,
    pub share: f64,
}

impl ComboShare {
    /// e.g. `pricing+subsidy`.
    pub fn label(&self) -> String {
        self.combination
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Share of matched breaks per category combination within each
/// (pollutant, sector, group).
pub fn combo_shares(matches: &[MatchedBreak]) -> Vec<ComboShare> {
    let mut counts: BTreeMap<(Pollutant, Sector, Group), BTreeMap<Vec<Category>, usize>> = BTreeMap::new();
    for m in matches.iter().filter(|m| m.is_matched()) {
        let key = (m.estimate.series.pollutant, m.estimate.series.sector, m.estimate.group);
        let combo: Vec<Category> = m.categories.iter().copied().collect();
        *counts.entry(key).or_default().entry(combo).or_default() += 1;
    }
    let mut out = Vec::new();
    for ((pollutant, sector, group), combos) in counts {
        let total: usize = combos.values().sum();
        for (combination, count) in combos {
            out.push(ComboShare {
                pollutant,
                sector,
                group,
                combination,
                count,
                share: count as f64 / total as f64,
            });
        }
    }
    out
}

/// Share of a (pollutant, sector, group) cell made of multi-category
/// combinations that include `category`.
pub fn combination_share_with(
    shares: &[ComboShare],
    pollutant: Pollutant,
    sector: Sector,
    group: Group,
    category: Category,
) -> f64 {
    shares
        .iter()
        .filter(|s| s.pollutant == pollutant && s.sector == sector && s.group == group)
        .filter(|s| s.combination.len() >= 2 && s.combination.contains(&category))
        .map(|s| s.share)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::effect_size;

    pub(crate) fn brk(
        iso: &str,
        group: Group,
        sector: Sector,
        year: i32,
        ci: (i32, i32),
        effect: f64,
    ) -> BreakEstimate {
        let tau = (1.0 + effect).ln();
        BreakEstimate {
            series: SeriesKey::new(Pollutant::Nox, sector),
            country: 0,
            country_iso: iso.into(),
            group,
            eu_member: false,
            year,
            tau_hat: tau,
            se: 0.05,
            clustered_se: None,
            p_value: 0.0,
            significant: true,
            effect_pct: effect_size(tau),
            ci_lo: ci.0,
            ci_hi: ci.1,
            window_lo: ci.0 - 2,
            window_hi: ci.1 + 2,
            weak_timing: false,
            counterfactual: vec![],
            cum_reduction: 0.0,
            cum_lo: 0.0,
            cum_hi: 0.0,
        }
    }

    fn ev(iso: &str, year: i32, sector: Sector, instrument: &str) -> PolicyEvent {
        PolicyEvent::new(
            iso,
            year,
            sector,
            instrument,
            Action::Adoption,
            &CategoryMap::default(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn default_categories() {
        let m = CategoryMap::default();
        assert_eq!(m.category("Label").unwrap(), Category::Information);
        assert_eq!(m.category("Carbon tax").unwrap(), Category::Pricing);
        assert_eq!(m.category("Fossil fuel subsidy reform").unwrap(), Category::Pricing);
        assert_eq!(m.category("Ban & phase out").unwrap(), Category::Regulation);
        assert_eq!(m.category("Renewable auction").unwrap(), Category::Regulation);
        assert_eq!(m.category("Financing mechanism").unwrap(), Category::Subsidy);
        assert_eq!(m.category("Adoption subsidy").unwrap(), Category::Subsidy);
        assert!(m.category("Moon shot").is_err());
    }

    #[test]
    fn containment_rule() {
        let a = brk("AAA", Group::Developed, Sector::Transport, 2010, (2008, 2012), -0.30);
        let b = brk("AAA", Group::Developed, Sector::Transport, 2010, (2009, 2011), -0.10);
        let out = dedupe_breaks(&[a.clone(), b]);
        assert_eq!(out, vec![a]);
    }

    #[test]
    fn larger_effect_survives_even_when_contained() {
        let a = brk("AAA", Group::Developed, Sector::Transport, 2010, (2008, 2012), -0.10);
        let b = brk("AAA", Group::Developed, Sector::Transport, 2010, (2009, 2011), -0.30);
        assert_eq!(dedupe_breaks(&[a, b.clone()]), vec![b]);
    }

    #[test]
    fn disjoint_intervals_both_kept() {
        let a = brk("AAA", Group::Developed, Sector::Transport, 2005, (2004, 2006), -0.30);
        let b = brk("AAA", Group::Developed, Sector::Transport, 2012, (2011, 2013), -0.10);
        assert_eq!(dedupe_breaks(&[a, b]).len(), 2);
    }

    #[test]
    fn other_countries_do_not_dedupe() {
        let a = brk("AAA", Group::Developed, Sector::Transport, 2010, (2008, 2012), -0.30);
        let b = brk("BBB", Group::Developed, Sector::Transport, 2010, (2009, 2011), -0.10);
        assert_eq!(dedupe_breaks(&[a, b]).len(), 2);
    }

    #[test]
    fn window_edges() {
        let b = brk("CHL", Group::Developing, Sector::Buildings, 2014, (2014, 2014), -0.3);
        let inside = [
            ev("CHL", 2016, Sector::Buildings, "Fuel tax"),
            ev("CHL", 2012, Sector::Buildings, "Fuel tax"),
        ];
        let outside = [
            ev("CHL", 2017, Sector::Buildings, "Fuel tax"),
            ev("CHL", 2011, Sector::Buildings, "Fuel tax"),
        ];
        for e in &inside {
            assert!(match_policies(std::slice::from_ref(&b), std::slice::from_ref(e))[0].is_matched());
        }
        for e in &outside {
            assert!(!match_policies(std::slice::from_ref(&b), std::slice::from_ref(e))[0].is_matched());
        }
        let wrong_sector = ev("CHL", 2014, Sector::Transport, "Fuel tax");
        assert!(!match_policies(&[b], &[wrong_sector])[0].is_matched());
    }

    #[test]
    fn eu_wide_events_match_members_only() {
        let mut member = brk("AUT", Group::Developed, Sector::Electricity, 2008, (2008, 2008), -0.2);
        member.eu_member = true;
        let outsider = brk("NOR", Group::Developed, Sector::Electricity, 2008, (2008, 2008), -0.2);
        let mut ets = ev("EU", 2005, Sector::Electricity, "Emission trading scheme");
        ets.eu_wide = true;
        ets.year = 2006;
        let m = match_policies(&[member, outsider], &[ets]);
        assert!(m[0].is_matched());
        assert!(!m[1].is_matched());
    }

    #[test]
    fn typology_thresholds() {
        assert_eq!(Typology::from_counts(4, 9), Typology::DevelopingDominated);
        assert_eq!(Typology::from_counts(6, 6), Typology::Equivalent);
        // 8 of 12 is exactly two thirds
        assert_eq!(Typology::from_counts(4, 8), Typology::DevelopingDominated);
        assert_eq!(Typology::from_counts(9, 3), Typology::DevelopedDominant);
        assert_eq!(Typology::from_counts(0, 0), Typology::Equivalent);
    }

    #[test]
    fn single_match_mean_is_its_effect() {
        let b = brk("ZAF", Group::Developing, Sector::Buildings, 2010, (2010, 2010), -0.468);
        let m = match_policies(&[b], &[ev("ZAF", 2010, Sector::Buildings, "Label")]);
        let rows = summarize_instruments(&m);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].mean_effect + 0.468).abs() < 1e-12);
        assert_eq!(rows[0].cases[0].to_string(), "ZAF.2010 (-46.8%) in buildings");
    }

    #[test]
    fn never_alone_has_absent_cell() {
        let b = brk("ZAF", Group::Developing, Sector::Buildings, 2010, (2010, 2010), -0.4);
        let m = match_policies(
            &[b],
            &[
                ev("ZAF", 2010, Sector::Buildings, "Label"),
                ev("ZAF", 2010, Sector::Buildings, "Adoption subsidy"),
            ],
        );
        let rows = mix_vs_single(&m);
        let label = rows.iter().find(|r| r.instrument == "Label").unwrap();
        assert_eq!(label.mean_alone, None);
        assert_eq!(label.n_mix, 1);
        assert_eq!(label.mean_mix_pricing, None);
    }

    #[test]
    fn taxes_pool_into_taxation() {
        let b = brk("SWE", Group::Developed, Sector::Buildings, 2005, (2005, 2005), -0.3);
        let m = match_policies(
            &[b],
            &[
                ev("SWE", 2005, Sector::Buildings, "Carbon tax"),
                ev("SWE", 2006, Sector::Buildings, "Fuel tax"),
            ],
        );
        let rows = mix_vs_single(&m);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].instrument, TAXATION);
        assert_eq!(rows[0].n_alone, 1);
    }

    #[test]
    fn single_category_share_is_one() {
        let bs: Vec<BreakEstimate> = (0..3)
            .map(|k| {
                brk(
                    "CHN",
                    Group::Developing,
                    Sector::Transport,
                    2005 + 5 * k,
                    (2005 + 5 * k, 2005 + 5 * k),
                    -0.2,
                )
            })
            .collect();
        let events: Vec<PolicyEvent> = (0..3)
            .map(|k| ev("CHN", 2005 + 5 * k, Sector::Transport, "Adoption subsidy"))
            .collect();
        let shares = combo_shares(&match_policies(&bs, &events));
        assert_eq!(shares.len(), 1);
        assert_eq!(shares[0].combination, vec![Category::Subsidy]);
        assert_eq!(shares[0].share, 1.0);
    }
}
