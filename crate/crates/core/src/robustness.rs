//! Sensitivity and validation checks on a completed break search:
//! significance-level sensitivity, stability when impulse indicators compete
//! with steps, and a generalized synthetic control cross-check of effect
//! sizes.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effects::BreakEstimate;
use crate::error::{Error, Result};
use crate::panel::{Candidate, Covariate, IndicatorKind, PanelDataset, SeriesKey};
use crate::regress::{least_squares, DEFAULT_RANK_TOL};
use crate::saturation::{sis_search, IndicatorSet, SelectionConfig, SelectionResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRun {
    pub gamma: f64,
    pub retained: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOverlap {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Presence {
    pub candidate: Candidate,
    /// One flag per run, in run order.
    pub present: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub runs: Vec<GammaRun>,
    pub overlaps: Vec<PairOverlap>,
    pub presence: Vec<Presence>,
}

impl GammaReport {
    pub fn present_at(&self, candidate: &Candidate, gamma: f64) -> Option<bool> {
        let k = self.runs.iter().position(|r| r.gamma == gamma)?;
        Some(
            self.presence
                .iter()
                .find(|p| p.candidate == *candidate)
                .is_some_and(|p| p.present[k]),
        )
    }
}

/// |A ∩ B| / |A ∪ B|, with two empty sets counted as identical.
pub fn jaccard(a: &[Candidate], b: &[Candidate]) -> f64 {
    let a: BTreeSet<_> = a.iter().collect();
    let b: BTreeSet<_> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

/// Re-runs the search at each significance level and compares retained sets.
pub fn gamma_sensitivity(ds: &PanelDataset, config: &SelectionConfig, gammas: &[f64]) -> Result<GammaReport> {
    let runs: Vec<GammaRun> = gammas
        .iter()
        .map(|&g| {
            let sel = sis_search(ds, &config.with_gamma(g))?;
            Ok(GammaRun {
                gamma: g,
                retained: sel.retained,
            })
        })
        .collect::<Result<_>>()?;
    let mut overlaps = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            overlaps.push(PairOverlap {
                gamma_a: runs[i].gamma,
                gamma_b: runs[j].gamma,
                jaccard: jaccard(&runs[i].retained, &runs[j].retained),
            });
        }
    }
    let all: BTreeSet<Candidate> = runs.iter().flat_map(|r| r.retained.iter().copied()).collect();
    let presence = all
        .into_iter()
        .map(|c| Presence {
            candidate: c,
            present: runs.iter().map(|r| r.retained.contains(&c)).collect(),
        })
        .collect();
    Ok(GammaReport {
        runs,
        overlaps,
        presence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPersistence {
    pub step: Candidate,
    /// Closest step of the same country retained with impulses competing,
    /// if one lies within one year.
    pub matched: Option<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IisReport {
    pub steps: Vec<StepPersistence>,
    pub retained_both: Vec<Candidate>,
    pub n_impulses: usize,
    pub all_persist: bool,
}

/// Saturates with steps and impulses together and checks that each step
/// from `sis` survives (same country, date within one year).
pub fn iis_stability(ds: &PanelDataset, config: &SelectionConfig, sis: &SelectionResult) -> Result<IisReport> {
    let both = sis_search(ds, &config.with_kind(IndicatorSet::Both))?;
    let steps: Vec<StepPersistence> = sis
        .steps()
        .map(|s| {
            let matched = both
                .steps()
                .filter(|c| c.country == s.country && (c.year - s.year).abs() <= 1)
                .min_by_key(|c| ((c.year - s.year).abs(), c.year))
                .copied();
            StepPersistence { step: *s, matched }
        })
        .collect();
    let n_impulses = both.impulses().count();
    Ok(IisReport {
        all_persist: steps.iter().all(|s| s.matched.is_some()),
        steps,
        retained_both: both.retained,
        n_impulses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GscmConfig {
    pub r_max: usize,
    pub min_pre_periods: usize,
    pub min_donors: usize,
    pub max_sweeps: usize,
    /// Relative objective change that counts as converged.
    pub tol: f64,
    /// Include the logged covariates and EU controls.
    pub covariates: bool,
}

impl Default for GscmConfig {
    fn default() -> Self {
        GscmConfig {
            r_max: 3,
            min_pre_periods: 5,
            min_donors: 2,
            max_sweeps: 500,
            tol: 1e-6,
            covariates: true,
        }
    }
}

/// Interactive fixed-effects fit on a balanced N×T control panel:
/// y_it = x_it'β + α_i + ξ_t + λ_i'f_t + e_it.
#[derive(Debug, Clone, PartialEq)]
pub struct IfeFit {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub xi: Vec<f64>,
    /// T×r.
    pub factors: DMatrix<f64>,
    /// N×r.
    pub loadings: DMatrix<f64>,
    pub objective: f64,
    pub sweeps: usize,
}

fn double_demean(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, t) = m.shape();
    let row: Vec<f64> = (0..n).map(|i| m.row(i).sum() / t as f64).collect();
    let col: Vec<f64> = (0..t).map(|j| m.column(j).sum() / n as f64).collect();
    let grand = m.sum() / (n * t) as f64;
    DMatrix::from_fn(n, t, |i, j| m[(i, j)] - row[i] - col[j] + grand)
}

fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    least_squares(a, b, DEFAULT_RANK_TOL)
}

/// Best rank-r approximation L F' of `e`, from the symmetric eigenproblem of
/// the smaller Gram matrix. F has orthonormal columns.
fn low_rank(e: &DMatrix<f64>, r: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, t) = e.shape();
    let mut f = DMatrix::zeros(t, r);
    let mut l = DMatrix::zeros(n, r);
    if r == 0 {
        return (f, l);
    }
    let wide = n < t;
    let gram = if wide { e * e.transpose() } else { e.transpose() * e };
    let eig = gram.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    for (k, &s) in idx.iter().take(r).enumerate() {
        let v = eig.eigenvectors.column(s);
        let mut fk: DVector<f64> = if wide { e.transpose() * v } else { v.into_owned() };
        let norm = fk.norm();
        if norm == 0.0 {
            continue;
        }
        fk /= norm;
        // Fix the sign so the largest-magnitude factor entry is positive.
        let pivot = fk
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            fk = -fk;
        }
        let lk = e * &fk;
        f.set_column(k, &fk);
        l.set_column(k, &lk);
    }
    (f, l)
}

fn covariate_part(x: &[DMatrix<f64>], beta: &[f64], shape: (usize, usize)) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(shape.0, shape.1);
    for (xk, b) in x.iter().zip(beta) {
        out += xk * *b;
    }
    out
}

/// Given the factor term, the joint minimizer over (β, α, ξ): β from the
/// two-way within transform, then the fixed effects from means.
fn update_linear(y: &DMatrix<f64>, x: &[DMatrix<f64>], lf: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (n, t) = y.shape();
    let z = y - lf;
    let beta: Vec<f64> = if x.is_empty() {
        Vec::new()
    } else {
        let zd = double_demean(&z);
        let xd: Vec<DMatrix<f64>> = x.iter().map(double_demean).collect();
        let w: Vec<Vec<f64>> = xd.iter().map(|m| m.transpose().iter().copied().collect()).collect();
        let b: Vec<f64> = zd.transpose().iter().copied().collect();
        lstsq(&w, &b)
    };
    let rem = z - covariate_part(x, &beta, (n, t));
    let xi: Vec<f64> = (0..t).map(|j| rem.column(j).sum() / n as f64).collect();
    let grand = rem.sum() / (n * t) as f64;
    let alpha: Vec<f64> = (0..n).map(|i| rem.row(i).sum() / t as f64 - grand).collect();
    Ok((beta, alpha, xi))
}

fn two_way(alpha: &[f64], xi: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(alpha.len(), xi.len(), |i, j| alpha[i] + xi[j])
}

fn with_intercept(cols: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0; cols.nrows()]];
    for k in 0..cols.ncols() {
        out.push(cols.column(k).iter().copied().collect());
    }
    out
}

/// Joint minimizer over (β, ξ, α, Λ) for fixed factors: each unit is
/// projected off [1, F], (β, ξ) solved on the stacked projections, then the
/// unit intercepts and loadings.
fn given_factors(
    y: &DMatrix<f64>,
    x: &[DMatrix<f64>],
    f: &DMatrix<f64>,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, DMatrix<f64>) {
    let (n, t) = y.shape();
    let p = x.len();
    let basis = with_intercept(f);
    let annihilate = |v: &[f64]| -> Vec<f64> {
        let c = lstsq(&basis, v);
        (0..t)
            .map(|s| v[s] - basis.iter().zip(&c).map(|(col, ck)| col[s] * ck).sum::<f64>())
            .collect()
    };
    let m_cols: Vec<Vec<f64>> = (0..t)
        .map(|s| {
            let mut e = vec![0.0; t];
            e[s] = 1.0;
            annihilate(&e)
        })
        .collect();
    let mut design = vec![Vec::with_capacity(n * t); p + t];
    let mut rhs = Vec::with_capacity(n * t);
    for i in 0..n {
        for (k, xk) in x.iter().enumerate() {
            let row: Vec<f64> = xk.row(i).iter().copied().collect();
            design[k].extend(annihilate(&row));
        }
        for (s, m) in m_cols.iter().enumerate() {
            design[p + s].extend_from_slice(m);
        }
        let yi: Vec<f64> = y.row(i).iter().copied().collect();
        rhs.extend(annihilate(&yi));
    }
    let coef = lstsq(&design, &rhs);
    let beta = coef[..p].to_vec();
    let xi = coef[p..].to_vec();
    let r = f.ncols();
    let mut alpha = vec![0.0; n];
    let mut lam = DMatrix::zeros(n, r);
    for i in 0..n {
        let w: Vec<f64> = (0..t)
            .map(|s| y[(i, s)] - xi[s] - x.iter().zip(&beta).map(|(xk, b)| xk[(i, s)] * b).sum::<f64>())
            .collect();
        let c = lstsq(&basis, &w);
        alpha[i] = c[0];
        for k in 0..r {
            lam[(i, k)] = c[k + 1];
        }
    }
    (beta, alpha, xi, lam)
}

struct Profile {
    beta: Vec<f64>,
    alpha: Vec<f64>,
    xi: Vec<f64>,
    lam: DMatrix<f64>,
    objective: f64,
}

/// Objective minimized over everything except the factors.
fn profile(y: &DMatrix<f64>, x: &[DMatrix<f64>], f: &DMatrix<f64>) -> Profile {
    let (n, t) = y.shape();
    let (beta, alpha, xi, lam) = given_factors(y, x, f);
    let e = y - covariate_part(x, &beta, (n, t)) - two_way(&alpha, &xi) - &lam * f.transpose();
    Profile {
        beta,
        alpha,
        xi,
        lam,
        objective: e.norm_squared(),
    }
}

/// Minimizer over (ξ, F) for fixed β, α and loadings, one period at a time.
fn given_loadings(
    y: &DMatrix<f64>,
    x: &[DMatrix<f64>],
    beta: &[f64],
    alpha: &[f64],
    lam: &DMatrix<f64>,
) -> (Vec<f64>, DMatrix<f64>) {
    let (n, t) = y.shape();
    let r = lam.ncols();
    let basis = with_intercept(lam);
    let mut xi = vec![0.0; t];
    let mut f = DMatrix::zeros(t, r);
    for s in 0..t {
        let w: Vec<f64> = (0..n)
            .map(|i| y[(i, s)] - alpha[i] - x.iter().zip(beta).map(|(xk, b)| xk[(i, s)] * b).sum::<f64>())
            .collect();
        let c = lstsq(&basis, &w);
        xi[s] = c[0];
        for k in 0..r {
            f[(s, k)] = c[k + 1];
        }
    }
    (xi, f)
}

/// Rewrites L F' with orthonormal F (Gram-Schmidt), each factor's
/// largest-magnitude entry positive.
fn orthonormalize(f: &DMatrix<f64>, lam: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (t, r) = f.shape();
    let mut q = DMatrix::zeros(t, r);
    let mut rmat = DMatrix::zeros(r, r);
    for k in 0..r {
        let mut v = f.column(k).into_owned();
        for j in 0..k {
            let c = q.column(j).dot(&v);
            rmat[(j, k)] = c;
            v -= q.column(j) * c;
        }
        let norm = v.norm();
        rmat[(k, k)] = norm;
        if norm > 0.0 {
            q.set_column(k, &(v / norm));
        }
    }
    let mut l = lam * rmat.transpose();
    for k in 0..r {
        let pivot = q
            .column(k)
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            q.column_mut(k).neg_mut();
            l.column_mut(k).neg_mut();
        }
    }
    (q, l)
}

/// Alternating least squares, initialized from the leading principal
/// components of the two-way demeaned residual.
pub fn fit_ife(y: &DMatrix<f64>, x: &[DMatrix<f64>], r: usize, max_sweeps: usize, tol: f64) -> Result<IfeFit> {
    let (n, t) = y.shape();
    if r >= n.min(t) {
        return Err(Error::Input(format!(
            "factor count {r} too large for a {n}x{t} control panel"
        )));
    }
    if x.iter().any(|m| m.shape() != (n, t)) {
        return Err(Error::Input("covariate matrices must match the outcome shape".into()));
    }
    let zero = DMatrix::zeros(n, t);
    let (beta0, alpha0, xi0) = update_linear(y, x, &zero)?;
    let resid0 = y - covariate_part(x, &beta0, (n, t)) - two_way(&alpha0, &xi0);
    let (f0, l0) = low_rank(&resid0, r);
    let (mut f, _) = orthonormalize(&f0, &l0);
    let mut state = profile(y, x, &f);
    let mut history = vec![state.objective];
    // Objectives below this are round-off around an exact fit.
    let floor = 1e-20 * y.norm_squared().max(f64::MIN_POSITIVE);
    let mut step = 1.0;
    for sweep in 1..=max_sweeps {
        let (_, f_next) = given_loadings(y, x, &state.beta, &state.alpha, &state.lam);
        let (f1, _) = orthonormalize(&f_next, &state.lam);
        let mut next = profile(y, x, &f1);
        let mut f_new = f1;
        // Accepted-only extrapolation along the last update.
        if r > 0 && sweep > 1 {
            let (f_ext, _) = orthonormalize(&(&f_new + (&f_new - &f) * step), &state.lam);
            let ext = profile(y, x, &f_ext);
            if ext.objective < next.objective {
                next = ext;
                f_new = f_ext;
                step = (step * 2.0).min(64.0);
            } else {
                step = 1.0;
            }
        }
        let scale = state.objective.max(floor);
        if next.objective > state.objective + 1e-9 * scale {
            return Err(Error::Numerical(format!(
                "interactive fixed-effects objective increased at sweep {sweep}: {:.6e} -> {:.6e}",
                state.objective, next.objective
            )));
        }
        let change = state.objective - next.objective;
        f = f_new;
        state = next;
        history.push(state.objective);
        if change <= tol * scale || state.objective <= floor {
            let l = state.lam.clone();
            return Ok(IfeFit {
                beta: state.beta,
                alpha: state.alpha,
                xi: state.xi,
                factors: f,
                loadings: l,
                objective: state.objective,
                sweeps: sweep,
            });
        }
    }
    let tail: Vec<String> = history.iter().rev().take(3).map(|v| format!("{v:.6e}")).collect();
    Err(Error::NonConvergence(format!(
        "factor model with r={r} did not converge in {max_sweeps} sweeps (last objectives {})",
        tail.join(", ")
    )))
}

/// Treated-unit counterfactual built on a control-panel fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticUnit {
    pub synthetic: Vec<f64>,
    pub pre_rmse: f64,
}

fn treated_base(ife: &IfeFit, y0: &[f64], x0: &[Vec<f64>]) -> Vec<f64> {
    (0..y0.len())
        .map(|t| y0[t] - ife.xi[t] - x0.iter().zip(&ife.beta).map(|(x, b)| x[t] * b).sum::<f64>())
        .collect()
}

fn fit_loading(ife: &IfeFit, base: &[f64], periods: &[usize]) -> Vec<f64> {
    let r = ife.factors.ncols();
    let mut a = vec![vec![1.0; periods.len()]];
    for k in 0..r {
        a.push(periods.iter().map(|&t| ife.factors[(t, k)]).collect());
    }
    let b: Vec<f64> = periods.iter().map(|&t| base[t]).collect();
    lstsq(&a, &b)
}

fn project(ife: &IfeFit, coef: &[f64], t: usize) -> f64 {
    coef[0]
        + (0..ife.factors.ncols())
            .map(|k| coef[k + 1] * ife.factors[(t, k)])
            .sum::<f64>()
}

/// Fits the treated unit's intercept and loadings on periods `0..t0` and
/// returns the synthetic path over all periods.
pub fn synthesize(ife: &IfeFit, y0: &[f64], x0: &[Vec<f64>], t0: usize) -> Result<SyntheticUnit> {
    let base = treated_base(ife, y0, x0);
    let pre: Vec<usize> = (0..t0).collect();
    let coef = fit_loading(ife, &base, &pre);
    let synthetic: Vec<f64> = (0..y0.len())
        .map(|t| y0[t] - base[t] + project(ife, &coef, t))
        .collect();
    let pre_rmse = (pre.iter().map(|&t| (y0[t] - synthetic[t]).powi(2)).sum::<f64>() / t0 as f64).sqrt();
    Ok(SyntheticUnit { synthetic, pre_rmse })
}

/// Leave-one-pre-period-out prediction error for the treated unit.
pub fn loo_mspe(ife: &IfeFit, y0: &[f64], x0: &[Vec<f64>], t0: usize) -> Result<f64> {
    let base = treated_base(ife, y0, x0);
    let mut sse = 0.0;
    for hold in 0..t0 {
        let train: Vec<usize> = (0..t0).filter(|&t| t != hold).collect();
        let coef = fit_loading(ife, &base, &train);
        sse += (base[hold] - project(ife, &coef, hold)).powi(2);
    }
    Ok(sse / t0 as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GscmResult {
    pub country: usize,
    pub country_iso: String,
    pub year: i32,
    pub n_donors: usize,
    pub factors: usize,
    /// Cross-validation error per candidate factor count.
    pub cv_mspe: Vec<(usize, f64)>,
    pub pre_rmse: Option<f64>,
    /// (year, observed − synthetic) in log points for each post year.
    pub att: Vec<(i32, f64)>,
    pub mean_att: Option<f64>,
    pub insufficient_pretreatment: bool,
}

fn unit_rows(ds: &PanelDataset, country: usize, covariates: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
    let t = ds.n_years();
    let r0 = ds.row(country, ds.first_year());
    let y = (0..t).map(|k| ds.emissions()[r0 + k].ln()).collect();
    let mut x = Vec::new();
    if covariates {
        for cov in Covariate::ALL {
            x.push((0..t).map(|k| cov.eval(&ds.covariates()[r0 + k])).collect());
        }
        for values in ds.eu_controls().values() {
            x.push((0..t).map(|k| values[r0 + k]).collect());
        }
    }
    (y, x)
}

/// Cross-checks one break against a synthetic control built from countries
/// without any retained break.
pub fn gscm_validate(
    ds: &PanelDataset,
    target: Candidate,
    retained_steps: &[Candidate],
    cfg: &GscmConfig,
) -> Result<GscmResult> {
    if target.kind != IndicatorKind::Step {
        return Err(Error::Input(format!("{target} is not a step indicator")));
    }
    target.check(ds)?;
    let t0 = (target.year - ds.first_year()) as usize;
    let mut out = GscmResult {
        country: target.country,
        country_iso: ds.countries()[target.country].iso3.clone(),
        year: target.year,
        n_donors: 0,
        factors: 0,
        cv_mspe: Vec::new(),
        pre_rmse: None,
        att: Vec::new(),
        mean_att: None,
        insufficient_pretreatment: t0 < cfg.min_pre_periods,
    };
    if out.insufficient_pretreatment {
        return Ok(out);
    }
    let treated: BTreeSet<usize> = retained_steps.iter().map(|c| c.country).collect();
    let donors: Vec<usize> = (0..ds.n_countries())
        .filter(|&j| j != target.country && !treated.contains(&j))
        .collect();
    out.n_donors = donors.len();
    if donors.len() < cfg.min_donors {
        return Err(Error::Input(format!(
            "synthetic control for {} {} needs at least {} donors without breaks, found {}",
            out.country_iso,
            target.year,
            cfg.min_donors,
            donors.len()
        )));
    }
    let t = ds.n_years();
    let rows: Vec<(Vec<f64>, Vec<Vec<f64>>)> = donors.iter().map(|&j| unit_rows(ds, j, cfg.covariates)).collect();
    let y = DMatrix::from_fn(donors.len(), t, |i, k| rows[i].0[k]);
    let p = rows[0].1.len();
    let x: Vec<DMatrix<f64>> = (0..p)
        .map(|c| DMatrix::from_fn(donors.len(), t, |i, k| rows[i].1[c][k]))
        .collect();
    let (y0, x0) = unit_rows(ds, target.country, cfg.covariates);

    let r_cap = cfg.r_max.min(t0.saturating_sub(2)).min(donors.len().min(t) - 1);
    let mut best: Option<(usize, f64, IfeFit)> = None;
    for r in 0..=r_cap {
        let ife = fit_ife(&y, &x, r, cfg.max_sweeps, cfg.tol)?;
        let mspe = loo_mspe(&ife, &y0, &x0, t0)?;
        out.cv_mspe.push((r, mspe));
        let better = match &best {
            None => true,
            Some((_, m, _)) => mspe < *m * (1.0 - 1e-9),
        };
        if better {
            best = Some((r, mspe, ife));
        }
    }
    let (r, _, ife) = best.expect("r = 0 is always tried");
    let unit = synthesize(&ife, &y0, &x0, t0)?;
    out.factors = r;
    out.pre_rmse = Some(unit.pre_rmse);
    out.att = (t0..t)
        .map(|k| (ds.first_year() + k as i32, y0[k] - unit.synthetic[k]))
        .collect();
    out.mean_att = Some(out.att.iter().map(|(_, a)| a).sum::<f64>() / out.att.len() as f64);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakRobustness {
    pub series: SeriesKey,
    pub country_iso: String,
    pub year: i32,
    pub tau_hat: f64,
    /// (gamma, retained at that gamma).
    pub gamma_present: Vec<(f64, bool)>,
    pub iis_match: Option<i32>,
    pub gscm: Option<GscmResult>,
    pub gscm_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub series: SeriesKey,
    pub gamma: GammaReport,
    pub iis: IisReport,
    pub breaks: Vec<BreakRobustness>,
}

/// Runs all three checks for one series. Synthetic-control failures for a
/// single break are recorded on that break rather than aborting the report.
pub fn robustness_report(
    ds: &PanelDataset,
    selection: &SelectionResult,
    estimates: &[BreakEstimate],
    gammas: &[f64],
    gscm_cfg: &GscmConfig,
) -> Result<RobustnessReport> {
    let gamma = gamma_sensitivity(ds, &selection.config, gammas)?;
    let iis = iis_stability(ds, &selection.config, selection)?;
    let steps: Vec<Candidate> = selection.steps().copied().collect();
    let breaks = estimates
        .par_iter()
        .map(|e| {
            let c = Candidate::step(e.country, e.year);
            let (gscm, gscm_error) = match gscm_validate(ds, c, &steps, gscm_cfg) {
                Ok(g) => (Some(g), None),
                Err(err) => (None, Some(err.to_string())),
            };
            BreakRobustness {
                series: e.series,
                country_iso: e.country_iso.clone(),
                year: e.year,
                tau_hat: e.tau_hat,
                gamma_present: gamma.runs.iter().map(|r| (r.gamma, r.retained.contains(&c))).collect(),
                iis_match: iis
                    .steps
                    .iter()
                    .find(|s| s.step == c)
                    .and_then(|s| s.matched.map(|m| m.year)),
                gscm,
                gscm_error,
            }
        })
        .collect();
    Ok(RobustnessReport {
        series: ds.series(),
        gamma,
        iis,
        breaks,
    })
}
