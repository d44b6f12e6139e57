//! Sparse re-estimation of retained breaks and everything derived from it:
//! effect sizes, timing intervals, counterfactual paths, cumulative
//! reductions.
//!
//! Conventions: `tau_hat` is in log-points; `effect_pct = 100 (exp(tau) - 1)`.
//! Counterfactuals scale observed emissions by `exp(-tau_hat)` from the break
//! year to the sample end, so `counterfactual - observed` is in tonnes.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::panel::{
    build_design, forced_columns, Candidate, ColumnKind, DesignMatrix, Group, PanelDataset, Pollutant, SeriesKey,
};
use crate::regress::{cluster_se, fit_ols, predict, FitResult, Projector, DEFAULT_RANK_TOL, NOISE_FLOOR_REL};
use crate::saturation::SelectionResult;

/// Normal quantile used for the cumulative-reduction bounds.
pub const Z95: f64 = 1.96;

pub const TONNES_PER_GT: f64 = 1e9;

/// Percent change implied by a log-point shift.
pub fn effect_size(tau_hat: f64) -> f64 {
    100.0 * tau_hat.exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakEstimate {
    pub series: SeriesKey,
    pub country: usize,
    pub country_iso: String,
    pub group: Group,
    pub eu_member: bool,
    pub year: i32,
    pub tau_hat: f64,
    pub se: f64,
    pub clustered_se: Option<f64>,
    pub p_value: f64,
    /// False when the break lost significance at gamma in the sparse fit.
    pub significant: bool,
    pub effect_pct: f64,
    pub ci_lo: i32,
    pub ci_hi: i32,
    pub window_lo: i32,
    pub window_hi: i32,
    /// Timing interval spans the whole sample.
    pub weak_timing: bool,
    /// Counterfactual emissions (tonnes) for years `year..=last_year`.
    pub counterfactual: Vec<f64>,
    pub cum_reduction: f64,
    pub cum_lo: f64,
    pub cum_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectsConfig {
    pub gamma: f64,
    pub ci_level: f64,
    /// Attribution window half-width in years.
    pub window: i32,
}

impl Default for EffectsConfig {
    fn default() -> Self {
        EffectsConfig {
            gamma: 0.01,
            ci_level: 0.99,
            window: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SparseFit {
    pub design: DesignMatrix,
    pub fit: FitResult,
    pub estimates: Vec<BreakEstimate>,
}

pub fn fit_sparse(ds: &PanelDataset, selection: &SelectionResult) -> Result<SparseFit> {
    let cfg = EffectsConfig {
        gamma: selection.config.gamma,
        ..EffectsConfig::default()
    };
    let steps: Vec<Candidate> = selection.steps().copied().collect();
    fit_sparse_steps(ds, &steps, &cfg)
}

/// Joint fit of the forced regressors plus exactly `steps`.
pub fn fit_sparse_steps(ds: &PanelDataset, steps: &[Candidate], cfg: &EffectsConfig) -> Result<SparseFit> {
    if steps.iter().any(|c| !c.is_step()) {
        return Err(Error::Input("sparse fit takes step indicators only".into()));
    }
    let design = build_design(ds, steps, false)?;
    let fit = fit_ols(&design)?;
    let clusters: Vec<usize> = (0..ds.n_rows()).map(|r| r / ds.n_years()).collect();
    let fit = if ds.n_countries() >= 2 {
        cluster_se(&fit, &design, &clusters)?
    } else {
        fit
    };

    let mut sorted = steps.to_vec();
    sorted.sort();
    let mut estimates = Vec::with_capacity(sorted.len());
    for &step in &sorted {
        let kind = ColumnKind::Indicator(step);
        let Some(stat) = fit.coefficient(&kind) else {
            warn!("retained break {step} is aliased in the sparse fit; no estimate produced");
            continue;
        };
        let significant = stat.p_value < cfg.gamma;
        if !significant {
            warn!(
                "retained break {step} has p = {:.4} >= gamma = {} in the sparse fit; flagged",
                stat.p_value, cfg.gamma
            );
        }
        let clustered_se = fit.clustered_std_errors.as_ref().map(|v| {
            let pos = fit
                .retained
                .iter()
                .position(|&k| fit.columns[k] == kind)
                .expect("retained");
            v[pos]
        });
        let (ci_lo, ci_hi, weak_timing) = timing_ci(ds, &sorted, step, cfg.ci_level)?;
        let country = &ds.countries()[step.country];
        let counterfactual = counterfactual(ds, step, stat.estimate);
        let (cum_reduction, cum_lo, cum_hi) = cumulative_reduction(ds, step, stat.estimate, stat.std_error);
        estimates.push(BreakEstimate {
            series: ds.series(),
            country: step.country,
            country_iso: country.iso3.clone(),
            group: country.group,
            eu_member: country.eu_member,
            year: step.year,
            tau_hat: stat.estimate,
            se: stat.std_error,
            clustered_se,
            p_value: stat.p_value,
            significant,
            effect_pct: effect_size(stat.estimate),
            ci_lo,
            ci_hi,
            window_lo: ci_lo - cfg.window,
            window_hi: ci_hi + cfg.window,
            weak_timing,
            counterfactual,
            cum_reduction,
            cum_lo,
            cum_hi,
        });
    }
    Ok(SparseFit { design, fit, estimates })
}

/// Likelihood-ratio timing interval for `target` among the retained `steps`.
///
/// Every alternative date s' in the sample is tried with the other breaks
/// held in place; s' is inside the interval when
/// `n ln(RSS(s') / RSS(s)) <= chi2_1(level)`. The result is the contiguous
/// run of accepted dates containing s, and a flag for a run covering the
/// whole sample.
pub fn timing_ci(ds: &PanelDataset, steps: &[Candidate], target: Candidate, level: f64) -> Result<(i32, i32, bool)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Input(format!("confidence level must lie in (0,1), got {level}")));
    }
    let crit = ChiSquared::new(1.0)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .inverse_cdf(level);
    let others: Vec<Candidate> = steps.iter().copied().filter(|c| *c != target).collect();
    let (_, mut cols) = forced_columns(ds);
    cols.extend(others.iter().map(|c| c.column(ds)));
    let y: Vec<f64> = ds.log_emissions().iter().copied().collect();
    let proj = Projector::new(&cols, &y, DEFAULT_RANK_TOL);
    let n = ds.n_rows() as f64;
    let y_rms = (y.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let floor = n * (NOISE_FLOOR_REL * y_rms).powi(2);
    let base = proj.base_rss();

    let y_red = proj.reduce(&y).values;
    let rss_at = |year: i32| -> Option<f64> {
        if others.iter().any(|c| c.country == target.country && c.year == year) {
            return None;
        }
        let z = proj.reduce(&Candidate::step(target.country, year).column(ds));
        let zz: f64 = z.values.iter().map(|v| v * v).sum();
        if zz <= (DEFAULT_RANK_TOL * z.scale).powi(2) {
            return Some(base);
        }
        let zy: f64 = z.values.iter().zip(&y_red).map(|(a, b)| a * b).sum();
        Some((base - zy * zy / zz).max(0.0))
    };
    let rss_s = rss_at(target.year)
        .ok_or_else(|| Error::Input(format!("{target} duplicates another retained break")))?
        .max(floor);
    let accept = |year: i32| -> bool { rss_at(year).is_some_and(|r| n * (r.max(floor) / rss_s).ln() <= crit) };

    let first = ds.first_year() + 1;
    let last = ds.last_year();
    let mut lo = target.year;
    while lo > first && accept(lo - 1) {
        lo -= 1;
    }
    let mut hi = target.year;
    while hi < last && accept(hi + 1) {
        hi += 1;
    }
    let weak = lo == first && hi == last && first < last;
    if weak {
        warn!("timing of break {target} is weakly identified: interval spans the whole sample");
    }
    Ok((lo, hi, weak))
}

/// Observed emissions scaled by `exp(-tau_hat)` from the break year on.
pub fn counterfactual(ds: &PanelDataset, step: Candidate, tau_hat: f64) -> Vec<f64> {
    let factor = (-tau_hat).exp();
    (step.year..=ds.last_year())
        .map(|year| ds.emissions()[ds.row(step.country, year)] * factor)
        .collect()
}

fn reduction(observed: &[f64], tau: f64) -> f64 {
    let f = (-tau).exp_m1();
    observed.iter().map(|o| o * f).sum()
}

/// Cumulative reduction (tonnes) from the break year through the sample end,
/// with bounds from `tau_hat -/+ 1.96 se`. Returns (point, lower, upper).
pub fn cumulative_reduction(ds: &PanelDataset, step: Candidate, tau_hat: f64, se: f64) -> (f64, f64, f64) {
    let observed: Vec<f64> = (step.year..=ds.last_year())
        .map(|year| ds.emissions()[ds.row(step.country, year)])
        .collect();
    cumulative_from_observed(&observed, tau_hat, se)
}

pub fn cumulative_from_observed(observed: &[f64], tau_hat: f64, se: f64) -> (f64, f64, f64) {
    let point = reduction(observed, tau_hat);
    let a = reduction(observed, tau_hat + Z95 * se);
    let b = reduction(observed, tau_hat - Z95 * se);
    (point, a.min(b), a.max(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollutantTotal {
    pub pollutant: Pollutant,
    pub n_breaks: usize,
    pub reduction_gt: f64,
    pub lo_gt: f64,
    pub hi_gt: f64,
}

/// Cumulative reductions summed per pollutant, in Gt.
pub fn cumulative_totals(estimates: &[BreakEstimate]) -> Vec<PollutantTotal> {
    let mut acc: BTreeMap<Pollutant, (usize, f64, f64, f64)> = BTreeMap::new();
    for e in estimates {
        let a = acc.entry(e.series.pollutant).or_default();
        a.0 += 1;
        a.1 += e.cum_reduction;
        a.2 += e.cum_lo;
        a.3 += e.cum_hi;
    }
    acc.into_iter()
        .map(|(pollutant, (n, r, lo, hi))| PollutantTotal {
            pollutant,
            n_breaks: n,
            reduction_gt: r / TONNES_PER_GT,
            lo_gt: lo / TONNES_PER_GT,
            hi_gt: hi / TONNES_PER_GT,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakMarker {
    pub year: i32,
    pub tau_hat: f64,
    pub effect_pct: f64,
    pub ci_lo: i32,
    pub ci_hi: i32,
    pub window_lo: i32,
    pub window_hi: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryPlot {
    pub group: Group,
    pub years: Vec<i32>,
    pub observed: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Observed scaled by every active break of the country removed.
    pub counterfactual: Vec<f64>,
    pub breaks: Vec<BreakMarker>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub series: SeriesKey,
    pub countries: BTreeMap<String, CountryPlot>,
}

/// Observed, fitted and counterfactual paths per country for redrawing
/// break panels.
pub fn plot_data(ds: &PanelDataset, sparse: &SparseFit) -> Result<PlotData> {
    let fitted_log = predict(&sparse.fit, &sparse.design, &[])?;
    let mut countries = BTreeMap::new();
    for (i, c) in ds.countries().iter().enumerate() {
        let own: Vec<&BreakEstimate> = sparse.estimates.iter().filter(|e| e.country == i).collect();
        let years: Vec<i32> = ds.years().collect();
        let observed = ds.country_emissions(i).to_vec();
        let fitted = years.iter().map(|&y| fitted_log[ds.row(i, y)].exp()).collect();
        let counterfactual = years
            .iter()
            .zip(&observed)
            .map(|(&y, o)| {
                let active: f64 = own.iter().filter(|e| y >= e.year).map(|e| e.tau_hat).sum();
                o * (-active).exp()
            })
            .collect();
        let breaks = own
            .iter()
            .map(|e| BreakMarker {
                year: e.year,
                tau_hat: e.tau_hat,
                effect_pct: e.effect_pct,
                ci_lo: e.ci_lo,
                ci_hi: e.ci_hi,
                window_lo: e.window_lo,
                window_hi: e.window_hi,
            })
            .collect();
        countries.insert(
            c.iso3.clone(),
            CountryPlot {
                group: c.group,
                years,
                observed,
                fitted,
                counterfactual,
                breaks,
            },
        );
    }
    Ok(PlotData {
        series: ds.series(),
        countries,
    })
}
