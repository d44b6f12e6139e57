//! Least-squares engine: rank-revealing QR, conventional and clustered
//! inference, Schwarz information criterion, prediction.
//!
//! Columns are equilibrated to unit norm before factorization, so the rank
//! tolerance is relative to the largest attainable pivot. Pivoting happens
//! inside priority groups: every forced column is pivoted before any
//! candidate, so an aliased pair of forced/candidate columns always drops the
//! candidate.
//!
//! Selection runs thousands of small fits against the same forced block.
//! [`Projector`] factors the forced columns once and maps the response and
//! candidates into the orthogonal complement; fits there give the same
//! candidate coefficients, residuals and (with the degrees of freedom
//! corrected for the forced rank) the same standard errors as the full fit.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::panel::{ColumnKind, DesignMatrix};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Residual standard deviation is floored at this fraction of the response's
/// root-mean-square, so exact fits produce finite, tiny t-statistics for
/// round-off coefficients instead of arbitrary ones.
pub const NOISE_FLOOR_REL: f64 = 1e-9;

struct Reflector {
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let tail = &mut x[self.offset..];
        let w: f64 = self.beta * self.v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum::<f64>();
        if w != 0.0 {
            for (t, v) in tail.iter_mut().zip(&self.v) {
                *t -= w * v;
            }
        }
    }
}

/// Householder QR with column pivoting inside priority groups.
struct PivotedQr {
    n: usize,
    reflectors: Vec<Reflector>,
    /// `r[i]` is pivot column `i` of R (length `i + 1`), in the equilibrated scale.
    r: Vec<Vec<f64>>,
    /// Original column index of each pivot.
    order: Vec<usize>,
    dropped: Vec<usize>,
    scales: Vec<f64>,
}

impl PivotedQr {
    /// `scales[k]` is the norm column `k` is measured against; `groups[k]`
    /// its pivot priority (lower first).
    fn factor(columns: &[Vec<f64>], scales: &[f64], groups: &[u8], tol: f64) -> PivotedQr {
        let n = columns.first().map_or(0, Vec::len);
        let k = columns.len();
        let mut work: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut undecided: Vec<usize> = Vec::with_capacity(k);
        let mut dropped = Vec::new();
        for (j, col) in columns.iter().enumerate() {
            let s = scales[j];
            if s > 0.0 && s.is_finite() {
                work.push(col.iter().map(|x| x / s).collect());
                undecided.push(j);
            } else {
                work.push(Vec::new());
                dropped.push(j);
            }
        }

        let mut group_ids: Vec<u8> = groups.to_vec();
        group_ids.sort_unstable();
        group_ids.dedup();

        let mut reflectors = Vec::new();
        let mut r = Vec::new();
        let mut order = Vec::new();
        let mut p = 0usize;

        for g in group_ids {
            loop {
                if p >= n {
                    break;
                }
                let mut best: Option<(usize, f64)> = None;
                for (pos, &j) in undecided.iter().enumerate() {
                    if groups[j] != g {
                        continue;
                    }
                    let nrm: f64 = work[j][p..].iter().map(|x| x * x).sum::<f64>().sqrt();
                    if best.is_none_or(|(_, b)| nrm > b) {
                        best = Some((pos, nrm));
                    }
                }
                let Some((pos, nrm)) = best else { break };
                if nrm <= tol {
                    break;
                }
                let j = undecided.remove(pos);
                let x = &work[j][p..];
                let alpha = if x[0] >= 0.0 { -nrm } else { nrm };
                let mut v = x.to_vec();
                v[0] -= alpha;
                let vtv: f64 = v.iter().map(|a| a * a).sum();
                let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
                let refl = Reflector { offset: p, v, beta };
                for &other in &undecided {
                    refl.apply(&mut work[other]);
                }
                let mut rcol = work[j][..p].to_vec();
                rcol.push(alpha);
                r.push(rcol);
                order.push(j);
                reflectors.push(refl);
                p += 1;
            }
            let (gone, keep): (Vec<usize>, Vec<usize>) = undecided.iter().partition(|&&j| groups[j] == g);
            dropped.extend(gone);
            undecided = keep;
        }
        dropped.extend(undecided);
        dropped.sort_unstable();

        PivotedQr {
            n,
            reflectors,
            r,
            order,
            dropped,
            scales: scales.to_vec(),
        }
    }

    fn rank(&self) -> usize {
        self.order.len()
    }

    fn apply_qt(&self, x: &mut [f64]) {
        for refl in &self.reflectors {
            refl.apply(x);
        }
    }

    /// Inverse of the upper-triangular R (pivot order, equilibrated scale).
    fn r_inverse(&self) -> Vec<Vec<f64>> {
        let k = self.rank();
        // rinv[i][j] for j >= i stored as rows.
        let mut rinv = vec![vec![0.0; k]; k];
        for j in 0..k {
            rinv[j][j] = 1.0 / self.r[j][j];
            for i in (0..j).rev() {
                let mut s = 0.0;
                for m in (i + 1)..=j {
                    s += self.r[m][i] * rinv[m][j];
                }
                rinv[i][j] = -s / self.r[i][i];
            }
        }
        rinv
    }

    /// Least-squares solve for an already-transformed response `z = Q^T y`.
    /// Returns coefficients in pivot order (original scale) and the RSS.
    fn solve_transformed(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let k = self.rank();
        let mut gamma = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = z[i];
            for m in (i + 1)..k {
                s -= self.r[m][i] * gamma[m];
            }
            gamma[i] = s / self.r[i][i];
        }
        let beta = (0..k).map(|i| gamma[i] / self.scales[self.order[i]]).collect();
        let rss = z[k..self.n].iter().map(|x| x * x).sum();
        (beta, rss)
    }

    /// (X^T X)^{-1} over the retained columns, pivot order, original scale.
    fn xtx_inverse(&self) -> DMatrix<f64> {
        let k = self.rank();
        let rinv = self.r_inverse();
        DMatrix::from_fn(k, k, |i, j| {
            let lo = i.max(j);
            let s: f64 = (lo..k).map(|m| rinv[i][m] * rinv[j][m]).sum();
            s / (self.scales[self.order[i]] * self.scales[self.order[j]])
        })
    }
}

fn column_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    }
}

/// Least squares by pivoted QR; aliased columns get a zero coefficient.
/// Coefficients are returned in column order.
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[f64], rank_tol: f64) -> Vec<f64> {
    if columns.is_empty() {
        return Vec::new();
    }
    let scales: Vec<f64> = columns.iter().map(|c| column_norm(c)).collect();
    let qr = PivotedQr::factor(columns, &scales, &vec![0; columns.len()], rank_tol);
    let mut z = y.to_vec();
    qr.apply_qt(&mut z);
    let (beta, _) = qr.solve_transformed(&z);
    let mut out = vec![0.0; columns.len()];
    for (i, b) in beta.into_iter().enumerate() {
        out[qr.order[i]] = b;
    }
    out
}

/// Two-sided Student-t p-value.
pub fn two_sided_p(t: f64, df: usize) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { 1.0 } else { 0.0 };
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df > 0");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Schwarz criterion n ln(RSS/n) + k ln(n).
pub fn schwarz(rss: f64, nobs: usize, k: usize) -> f64 {
    let n = nobs as f64;
    n * (rss / n).ln() + k as f64 * n.ln()
}

/// Inference core shared by full and projected fits.
struct Inference {
    coefficients: Vec<f64>,
    std_errors: Vec<f64>,
    t_stats: Vec<f64>,
    p_values: Vec<f64>,
    rss: f64,
    df: usize,
    sigma2: f64,
    ic: f64,
}

/// Turns coefficients, RSS and diag((X^T X)^{-1}) into inference statistics.
/// `k_total` counts every retained column including any projected-out block.
fn inference(
    coefficients: Vec<f64>,
    inv_diag: &[f64],
    rss: f64,
    nobs: usize,
    k_total: usize,
    y_scale: f64,
) -> Result<Inference> {
    if nobs <= k_total {
        return Err(Error::DegreesOfFreedom {
            rows: nobs,
            columns: k_total,
        });
    }
    let df = nobs - k_total;
    let floor = NOISE_FLOOR_REL * y_scale.max(f64::MIN_POSITIVE);
    let sigma2 = (rss / df as f64).max(floor * floor);
    let std_errors: Vec<f64> = inv_diag.iter().map(|d| (sigma2 * d.max(0.0)).sqrt()).collect();
    let t_stats: Vec<f64> = coefficients.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = t_stats.iter().map(|&t| two_sided_p(t, df)).collect();
    let rss_eff = rss.max(nobs as f64 * floor * floor);
    Ok(Inference {
        coefficients,
        std_errors,
        t_stats,
        p_values,
        rss,
        df,
        sigma2,
        ic: schwarz(rss_eff, nobs, k_total),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefStat {
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

/// Result of a full least-squares fit of a [`DesignMatrix`].
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Provenance of every design column, in design order.
    pub columns: Vec<ColumnKind>,
    /// Indices into `columns` of the retained (non-aliased) columns, ascending.
    pub retained: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Country-clustered standard errors, when requested via [`cluster_se`].
    pub clustered_std_errors: Option<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub nobs: usize,
    pub df: usize,
    pub sigma2: f64,
    pub information_criterion: f64,
    /// Aliased columns removed by the rank-revealing factorization.
    pub dropped: Vec<ColumnKind>,
    xtx_inv: DMatrix<f64>,
}

impl FitResult {
    fn position(&self, kind: &ColumnKind) -> Option<usize> {
        self.retained.iter().position(|&k| &self.columns[k] == kind)
    }

    pub fn coefficient(&self, kind: &ColumnKind) -> Option<CoefStat> {
        self.position(kind).map(|i| CoefStat {
            estimate: self.coefficients[i],
            std_error: self.std_errors[i],
            t_stat: self.t_stats[i],
            p_value: self.p_values[i],
        })
    }

    pub fn retained_columns(&self) -> impl Iterator<Item = &ColumnKind> {
        self.retained.iter().map(|&k| &self.columns[k])
    }

    /// (X^T X)^{-1} over retained columns, in `retained` order.
    pub fn xtx_inverse(&self) -> &DMatrix<f64> {
        &self.xtx_inv
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OlsOptions {
    pub rank_tol: f64,
}

impl Default for OlsOptions {
    fn default() -> Self {
        OlsOptions {
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

pub fn fit_ols(design: &DesignMatrix) -> Result<FitResult> {
    fit_ols_with(design, OlsOptions::default())
}

pub fn fit_ols_with(design: &DesignMatrix, opts: OlsOptions) -> Result<FitResult> {
    let n = design.nrows();
    let k = design.ncols();
    if n < 2 || k == 0 {
        return Err(Error::Input(format!(
            "least squares needs at least 2 rows and 1 column (got {n}x{k})"
        )));
    }
    let columns: Vec<Vec<f64>> = (0..k).map(|j| design.x.column(j).iter().copied().collect()).collect();
    let scales: Vec<f64> = columns.iter().map(|c| column_norm(c)).collect();
    let groups: Vec<u8> = design
        .columns
        .iter()
        .map(|c| if c.is_forced() { 0 } else { 1 })
        .collect();
    let qr = PivotedQr::factor(&columns, &scales, &groups, opts.rank_tol);
    let rank = qr.rank();

    let mut z: Vec<f64> = design.y.iter().copied().collect();
    qr.apply_qt(&mut z);
    let (beta_piv, rss) = qr.solve_transformed(&z);
    let cov_piv = qr.xtx_inverse();

    // Re-order pivots into design order.
    let mut perm: Vec<usize> = (0..rank).collect();
    perm.sort_by_key(|&i| qr.order[i]);
    let retained: Vec<usize> = perm.iter().map(|&i| qr.order[i]).collect();
    let coefficients: Vec<f64> = perm.iter().map(|&i| beta_piv[i]).collect();
    let xtx_inv = DMatrix::from_fn(rank, rank, |a, b| cov_piv[(perm[a], perm[b])]);
    let inv_diag: Vec<f64> = (0..rank).map(|i| xtx_inv[(i, i)]).collect();

    let y: Vec<f64> = design.y.iter().copied().collect();
    let inf = inference(coefficients, &inv_diag, rss, n, rank, rms(&y))?;

    let mut residuals = y;
    for (b, &col) in inf.coefficients.iter().zip(&retained) {
        for (r, x) in residuals.iter_mut().zip(design.x.column(col).iter()) {
            *r -= b * x;
        }
    }

    Ok(FitResult {
        columns: design.columns.clone(),
        retained,
        coefficients: inf.coefficients,
        std_errors: inf.std_errors,
        t_stats: inf.t_stats,
        p_values: inf.p_values,
        clustered_std_errors: None,
        residuals,
        rss: inf.rss,
        nobs: n,
        df: inf.df,
        sigma2: inf.sigma2,
        information_criterion: inf.ic,
        dropped: qr.dropped.iter().map(|&j| design.columns[j].clone()).collect(),
        xtx_inv,
    })
}

/// Attaches cluster-robust (CR1) standard errors. Point estimates and the
/// conventional standard errors are untouched.
pub fn cluster_se(fit: &FitResult, design: &DesignMatrix, cluster_ids: &[usize]) -> Result<FitResult> {
    check_alignment(fit, design)?;
    let n = fit.nobs;
    if cluster_ids.len() != n {
        return Err(Error::Input(format!(
            "{} cluster ids for {} rows",
            cluster_ids.len(),
            n
        )));
    }
    let k = fit.retained.len();
    let mut scores: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
    for (row, &g) in cluster_ids.iter().enumerate() {
        let e = fit.residuals[row];
        let s = scores.entry(g).or_insert_with(|| DVector::zeros(k));
        for (a, &col) in fit.retained.iter().enumerate() {
            s[a] += design.x[(row, col)] * e;
        }
    }
    let g = scores.len();
    if g < 2 {
        return Err(Error::Input(
            "clustered standard errors need at least 2 clusters".into(),
        ));
    }
    let mut meat = DMatrix::<f64>::zeros(k, k);
    for s in scores.values() {
        meat += s * s.transpose();
    }
    let c = (g as f64 / (g as f64 - 1.0)) * ((n as f64 - 1.0) / (n as f64 - k as f64));
    let v = &fit.xtx_inv * meat * &fit.xtx_inv * c;
    let mut out = fit.clone();
    out.clustered_std_errors = Some((0..k).map(|i| v[(i, i)].max(0.0).sqrt()).collect());
    Ok(out)
}

fn check_alignment(fit: &FitResult, design: &DesignMatrix) -> Result<()> {
    if design.columns != fit.columns || design.nrows() != fit.nobs {
        return Err(Error::Provenance("design columns do not match the fitted model".into()));
    }
    Ok(())
}

/// Fitted ln(emissions) with the listed columns contributing zero.
pub fn predict(fit: &FitResult, design: &DesignMatrix, zeroed: &[ColumnKind]) -> Result<Vec<f64>> {
    check_alignment(fit, design)?;
    for z in zeroed {
        if fit.position(z).is_none() {
            return Err(Error::Provenance(format!("column {z} is not part of the fit")));
        }
    }
    let mut out = vec![0.0; design.nrows()];
    for (b, &col) in fit.coefficients.iter().zip(&fit.retained) {
        if zeroed.contains(&fit.columns[col]) {
            continue;
        }
        for (o, x) in out.iter_mut().zip(design.x.column(col).iter()) {
            *o += b * x;
        }
    }
    Ok(out)
}

/// Forced-block factorization used to partial out forced regressors.
pub struct Projector {
    qr: PivotedQr,
    nobs: usize,
    y_scale: f64,
    y_reduced: Vec<f64>,
}

/// A fit of candidate columns after partialling out the forced block.
#[derive(Debug, Clone)]
pub struct ProjectedFit {
    /// Retained candidate positions (into the slice passed to `fit`), ascending.
    pub retained: Vec<usize>,
    /// Candidate positions dropped as aliased.
    pub dropped: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub rss: f64,
    pub df: usize,
    pub information_criterion: f64,
}

/// A candidate column mapped into the forced block's orthogonal complement.
#[derive(Debug, Clone)]
pub struct ReducedColumn {
    pub values: Vec<f64>,
    /// Norm of the column before projection.
    pub scale: f64,
}

impl Projector {
    /// Factors the forced columns and projects `y`.
    pub fn new(forced: &[Vec<f64>], y: &[f64], rank_tol: f64) -> Projector {
        let nobs = y.len();
        let scales: Vec<f64> = forced.iter().map(|c| column_norm(c)).collect();
        let groups = vec![0u8; forced.len()];
        let qr = if forced.is_empty() {
            PivotedQr {
                n: nobs,
                reflectors: Vec::new(),
                r: Vec::new(),
                order: Vec::new(),
                dropped: Vec::new(),
                scales: Vec::new(),
            }
        } else {
            PivotedQr::factor(forced, &scales, &groups, rank_tol)
        };
        let mut p = Projector {
            qr,
            nobs,
            y_scale: rms(y),
            y_reduced: Vec::new(),
        };
        p.y_reduced = p.reduce_raw(y);
        p
    }

    pub fn forced_rank(&self) -> usize {
        self.qr.rank()
    }

    pub fn forced_dropped(&self) -> &[usize] {
        &self.qr.dropped
    }

    pub fn nobs(&self) -> usize {
        self.nobs
    }

    fn reduce_raw(&self, v: &[f64]) -> Vec<f64> {
        let mut x = v.to_vec();
        self.qr.apply_qt(&mut x);
        x.split_off(self.qr.rank())
    }

    pub fn reduce(&self, v: &[f64]) -> ReducedColumn {
        ReducedColumn {
            scale: column_norm(v),
            values: self.reduce_raw(v),
        }
    }

    /// Residual sum of squares of the forced-only model.
    pub fn base_rss(&self) -> f64 {
        self.y_reduced.iter().map(|x| x * x).sum()
    }

    pub fn base_information_criterion(&self) -> f64 {
        let floor = NOISE_FLOOR_REL * self.y_scale;
        let rss = self.base_rss().max(self.nobs as f64 * floor * floor);
        schwarz(rss, self.nobs, self.forced_rank())
    }

    /// Fits the candidate columns jointly with the (projected-out) forced block.
    pub fn fit(&self, cols: &[&ReducedColumn], rank_tol: f64) -> Result<ProjectedFit> {
        let k_f = self.forced_rank();
        if cols.is_empty() {
            if self.nobs <= k_f {
                return Err(Error::DegreesOfFreedom {
                    rows: self.nobs,
                    columns: k_f,
                });
            }
            return Ok(ProjectedFit {
                retained: Vec::new(),
                dropped: Vec::new(),
                coefficients: Vec::new(),
                std_errors: Vec::new(),
                p_values: Vec::new(),
                rss: self.base_rss(),
                df: self.nobs - k_f,
                information_criterion: self.base_information_criterion(),
            });
        }
        let values: Vec<Vec<f64>> = cols.iter().map(|c| c.values.clone()).collect();
        let scales: Vec<f64> = cols.iter().map(|c| c.scale).collect();
        let groups = vec![0u8; cols.len()];
        let qr = PivotedQr::factor(&values, &scales, &groups, rank_tol);
        let rank = qr.rank();
        let mut z = self.y_reduced.clone();
        qr.apply_qt(&mut z);
        let (beta_piv, rss) = qr.solve_transformed(&z);
        let cov = qr.xtx_inverse();

        let mut perm: Vec<usize> = (0..rank).collect();
        perm.sort_by_key(|&i| qr.order[i]);
        let retained: Vec<usize> = perm.iter().map(|&i| qr.order[i]).collect();
        let coefficients: Vec<f64> = perm.iter().map(|&i| beta_piv[i]).collect();
        let inv_diag: Vec<f64> = perm.iter().map(|&i| cov[(i, i)]).collect();
        let inf = inference(coefficients, &inv_diag, rss, self.nobs, k_f + rank, self.y_scale)?;
        Ok(ProjectedFit {
            retained,
            dropped: qr.dropped.clone(),
            coefficients: inf.coefficients,
            std_errors: inf.std_errors,
            p_values: inf.p_values,
            rss: inf.rss,
            df: inf.df,
            information_criterion: inf.ic,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{Candidate, Covariate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn design(x: DMatrix<f64>, y: Vec<f64>) -> DesignMatrix {
        let cols = (0..x.ncols())
            .map(|k| {
                if k == 0 {
                    ColumnKind::CountryEffect(0)
                } else {
                    ColumnKind::Indicator(Candidate::step(0, 2000 + k as i32))
                }
            })
            .collect();
        DesignMatrix::new(x, DVector::from_vec(y), cols).unwrap()
    }

    #[test]
    fn exact_line() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let fit = fit_ols(&design(x, vec![1.0, 2.0, 3.0])).unwrap();
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(fit.coefficients[0].abs() < 1e-12);
        assert!(fit.rss < 1e-24);
        assert!(fit.std_errors.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn duplicated_column_is_dropped() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|i| 2.0 + 3.0 * a[i] + 0.01 * rng.random::<f64>()).collect();
        let x2 = DMatrix::from_fn(n, 2, |r, c| if c == 0 { 1.0 } else { a[r] });
        let x3 = DMatrix::from_fn(n, 3, |r, c| if c == 0 { 1.0 } else { a[r] });
        let f2 = fit_ols(&design(x2, y.clone())).unwrap();
        let f3 = fit_ols(&design(x3, y)).unwrap();
        assert_eq!(f3.dropped.len(), 1);
        assert!((f2.rss - f3.rss).abs() < 1e-12);
        assert!((f2.coefficients[1] - f3.coefficients[1]).abs() < 1e-10);
    }

    #[test]
    fn forced_column_wins_alias() {
        // candidate identical to a forced column: candidate must be the one dropped
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let fit = fit_ols(&design(x, vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(fit.retained, vec![0]);
        assert!(!fit.dropped[0].is_forced());
    }

    #[test]
    fn zero_df_is_an_error() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let err = fit_ols(&design(x, vec![1.0, 3.0])).unwrap_err();
        assert!(matches!(err, Error::DegreesOfFreedom { .. }));
        assert!(err.to_string().contains("block size"));
    }

    #[test]
    fn predict_checks_provenance() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let d = design(x, vec![1.0, 0.7, 0.7]);
        let fit = fit_ols(&d).unwrap();
        let absent = ColumnKind::Covariate(Covariate::LnPop);
        assert!(predict(&fit, &d, &[absent]).is_err());
        let full = predict(&fit, &d, &[]).unwrap();
        let step = d.columns[1].clone();
        let cf = predict(&fit, &d, &[step]).unwrap();
        assert!((full[0] - cf[0]).abs() < 1e-12);
        assert!((cf[1] - full[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn projected_fit_matches_full_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let forced: Vec<Vec<f64>> = (0..4)
            .map(|k| (0..n).map(|_| if k == 0 { 1.0 } else { rng.random::<f64>() }).collect())
            .collect();
        let cands: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();

        let all: Vec<&Vec<f64>> = forced.iter().chain(cands.iter()).collect();
        let x = DMatrix::from_fn(n, 7, |r, c| all[c][r]);
        let d = design(x, y.clone());
        let full = fit_ols(&d).unwrap();

        let proj = Projector::new(&forced, &y, DEFAULT_RANK_TOL);
        let reduced: Vec<ReducedColumn> = cands.iter().map(|c| proj.reduce(c)).collect();
        let refs: Vec<&ReducedColumn> = reduced.iter().collect();
        let pf = proj.fit(&refs, DEFAULT_RANK_TOL).unwrap();
        for i in 0..3 {
            assert!((pf.coefficients[i] - full.coefficients[4 + i]).abs() < 1e-10);
            assert!((pf.std_errors[i] - full.std_errors[4 + i]).abs() < 1e-10);
            assert!((pf.p_values[i] - full.p_values[4 + i]).abs() < 1e-10);
        }
        assert!((pf.rss - full.rss).abs() < 1e-10);
        assert_eq!(pf.df, full.df);
        assert!((pf.information_criterion - full.information_criterion).abs() < 1e-8);
    }
}
