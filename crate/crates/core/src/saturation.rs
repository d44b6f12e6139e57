//! Indicator saturation: block search over step (and/or impulse) indicators
//! with general-to-specific multi-path elimination.
//!
//! Stage 1 runs the elimination inside seeded random blocks of candidates,
//! always alongside the forced regressors. Stage 2 pools the block survivors
//! and runs the elimination on the union. Stage 3 repeats the union selection
//! until the retained set stops changing.

use std::collections::BTreeSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{all_impulses, all_steps, forced_columns, Candidate, PanelDataset};
use crate::regress::{ProjectedFit, Projector, ReducedColumn, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorSet {
    Step,
    Impulse,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub gamma: f64,
    pub block_size: usize,
    pub seed: u64,
    pub max_outer_iterations: usize,
    pub max_paths: usize,
    pub indicator_kind: IndicatorSet,
    pub rank_tol: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            gamma: 0.01,
            block_size: 20,
            seed: 0,
            max_outer_iterations: 10,
            max_paths: 8,
            indicator_kind: IndicatorSet::Step,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Input(format!("gamma must lie in (0,1), got {}", self.gamma)));
        }
        if self.block_size < 2 {
            return Err(Error::Input("block_size must be at least 2".into()));
        }
        if self.max_paths < 1 || self.max_outer_iterations < 1 {
            return Err(Error::Input(
                "max_paths and max_outer_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_kind(mut self, kind: IndicatorSet) -> Self {
        self.indicator_kind = kind;
        self
    }
}

/// One elimination run, as written to the selection trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub stage: String,
    pub iteration: usize,
    pub block: usize,
    pub candidates: Vec<Candidate>,
    /// p-values of the opening joint fit, aligned with `candidates`
    /// (`None` for columns dropped as aliased).
    pub p_values: Vec<Option<f64>>,
    pub survivors: Vec<Candidate>,
    pub fits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Retained indicators, sorted by (country, year, kind).
    pub retained: Vec<Candidate>,
    /// p-values of the retained indicators in the final joint fit.
    pub final_p_values: Vec<f64>,
    pub n_candidates: usize,
    pub converged: bool,
    pub iterations: usize,
    pub union_history: Vec<Vec<Candidate>>,
    pub trace: Vec<TraceRecord>,
    pub config: SelectionConfig,
}

impl SelectionResult {
    pub fn steps(&self) -> impl Iterator<Item = &Candidate> {
        self.retained.iter().filter(|c| c.is_step())
    }

    pub fn impulses(&self) -> impl Iterator<Item = &Candidate> {
        self.retained.iter().filter(|c| !c.is_step())
    }
}

/// Seeded uniform shuffle followed by consecutive chunks of `block_size`.
pub fn partition_blocks(candidates: &[Candidate], config: &SelectionConfig) -> Vec<Vec<Candidate>> {
    let mut c = candidates.to_vec();
    c.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    c.shuffle(&mut rng);
    c.chunks(config.block_size.max(1)).map(<[Candidate]>::to_vec).collect()
}

/// Forced regressors partialled out once, with every candidate column
/// pre-projected into the complement.
pub struct SelectionProblem {
    projector: Projector,
    candidates: Vec<Candidate>,
    reduced: Vec<ReducedColumn>,
    rank_tol: f64,
}

impl SelectionProblem {
    pub fn new(ds: &PanelDataset, candidates: &[Candidate], rank_tol: f64) -> Self {
        let (_, forced) = forced_columns(ds);
        let y: Vec<f64> = ds.log_emissions().iter().copied().collect();
        let projector = Projector::new(&forced, &y, rank_tol);
        let mut candidates = candidates.to_vec();
        candidates.sort();
        candidates.dedup();
        let reduced = candidates.par_iter().map(|c| projector.reduce(&c.column(ds))).collect();
        SelectionProblem {
            projector,
            candidates,
            reduced,
            rank_tol,
        }
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn nobs(&self) -> usize {
        self.projector.nobs()
    }

    pub fn forced_rank(&self) -> usize {
        self.projector.forced_rank()
    }

    fn column(&self, c: &Candidate) -> &ReducedColumn {
        let i = self
            .candidates
            .binary_search(c)
            .expect("candidate registered with the selection problem");
        &self.reduced[i]
    }

    /// Joint fit of forced block plus `set` (sorted).
    pub fn fit(&self, set: &[Candidate]) -> Result<ProjectedFit> {
        let cols: Vec<&ReducedColumn> = set.iter().map(|c| self.column(c)).collect();
        self.projector.fit(&cols, self.rank_tol)
    }
}

struct Terminal {
    set: Vec<Candidate>,
    ic: f64,
}

/// Outcome of one general-to-specific run.
#[derive(Debug, Clone)]
pub struct GetsOutcome {
    pub survivors: Vec<Candidate>,
    pub initial_p_values: Vec<Option<f64>>,
    pub fits: usize,
}

fn ic_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Deletes the least significant candidate until all have p < gamma.
fn eliminate(
    problem: &SelectionProblem,
    mut path: Vec<Candidate>,
    config: &SelectionConfig,
    fits: &mut usize,
) -> Result<Terminal> {
    loop {
        let fit = problem.fit(&path)?;
        *fits += 1;
        let kept: Vec<Candidate> = fit.retained.iter().map(|&i| path[i]).collect();
        let worst = fit
            .retained
            .iter()
            .zip(&fit.p_values)
            .filter(|(_, &p)| p >= config.gamma)
            .max_by(|a, b| a.1.total_cmp(b.1).then(path[*b.0].cmp(&path[*a.0])))
            .map(|(&i, _)| path[i]);
        match worst {
            None => {
                return Ok(Terminal {
                    set: kept,
                    ic: fit.information_criterion,
                })
            }
            Some(w) => path = kept.into_iter().filter(|c| *c != w).collect(),
        }
    }
}

/// Multi-path backward elimination over `candidates`, forced block always in.
pub fn gets_select(
    problem: &SelectionProblem,
    candidates: &[Candidate],
    config: &SelectionConfig,
) -> Result<GetsOutcome> {
    let mut set = candidates.to_vec();
    set.sort();
    set.dedup();
    if set.is_empty() {
        return Ok(GetsOutcome {
            survivors: Vec::new(),
            initial_p_values: Vec::new(),
            fits: 0,
        });
    }
    let full = problem.fit(&set)?;
    let mut fits = 1;
    let mut initial_p_values = vec![None; set.len()];
    for (&pos, &p) in full.retained.iter().zip(&full.p_values) {
        initial_p_values[pos] = Some(p);
    }

    let active: Vec<Candidate> = full.retained.iter().map(|&i| set[i]).collect();
    let mut insignificant: Vec<(Candidate, f64)> = full
        .retained
        .iter()
        .zip(&full.p_values)
        .filter(|(_, &p)| p >= config.gamma)
        .map(|(&i, &p)| (set[i], p))
        .collect();
    insignificant.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    insignificant.truncate(config.max_paths);

    let mut terminals: Vec<Terminal> = Vec::new();
    let mut push = |t: Terminal| {
        if !terminals.iter().any(|u| u.set == t.set) {
            terminals.push(t);
        }
    };
    if insignificant.is_empty() {
        push(Terminal {
            set: active.clone(),
            ic: full.information_criterion,
        });
    }
    for (start, _) in &insignificant {
        let path: Vec<Candidate> = active.iter().copied().filter(|c| c != start).collect();
        push(eliminate(problem, path, config, &mut fits)?);
    }

    // Aliased candidates were dropped by pivot order alone. For each, open a
    // path from every swap that makes it estimable, so the information
    // criterion decides between equivalent representations.
    let aliased: Vec<Candidate> = (0..set.len())
        .filter(|i| initial_p_values[*i].is_none())
        .map(|i| set[i])
        .take(config.max_paths)
        .collect();
    for d in aliased {
        for c in &active {
            let mut path: Vec<Candidate> = active.iter().copied().filter(|x| x != c).collect();
            path.push(d);
            path.sort();
            let fit = problem.fit(&path)?;
            fits += 1;
            let pos = path.binary_search(&d).expect("inserted");
            if fit.retained.contains(&pos) {
                push(eliminate(problem, path, config, &mut fits)?);
            }
        }
    }

    let best = terminals
        .into_iter()
        .reduce(|best, t| {
            let better = if ic_tie(t.ic, best.ic) {
                (t.set.len(), &t.set) < (best.set.len(), &best.set)
            } else {
                t.ic < best.ic
            };
            if better {
                t
            } else {
                best
            }
        })
        .expect("at least one path");
    Ok(GetsOutcome {
        survivors: best.set,
        initial_p_values,
        fits,
    })
}

/// Candidate list for the configured indicator kind.
pub fn candidates_for(ds: &PanelDataset, kind: IndicatorSet) -> Vec<Candidate> {
    match kind {
        IndicatorSet::Step => all_steps(ds),
        IndicatorSet::Impulse => all_impulses(ds),
        IndicatorSet::Both => {
            let mut v = all_steps(ds);
            v.extend(all_impulses(ds));
            v.sort();
            v
        }
    }
}

/// Three-stage saturation search using `config.indicator_kind`.
pub fn sis_search(ds: &PanelDataset, config: &SelectionConfig) -> Result<SelectionResult> {
    config.validate()?;
    let candidates = candidates_for(ds, config.indicator_kind);
    let problem = SelectionProblem::new(ds, &candidates, config.rank_tol);
    search_with(&problem, config)
}

/// Impulse-indicator saturation (outlier robustness check).
pub fn iis_search(ds: &PanelDataset, config: &SelectionConfig) -> Result<SelectionResult> {
    sis_search(ds, &config.with_kind(IndicatorSet::Impulse))
}

fn record(stage: &str, iteration: usize, block: usize, cands: &[Candidate], out: &GetsOutcome) -> TraceRecord {
    let mut sorted = cands.to_vec();
    sorted.sort();
    sorted.dedup();
    TraceRecord {
        stage: stage.to_string(),
        iteration,
        block,
        candidates: sorted,
        p_values: out.initial_p_values.clone(),
        survivors: out.survivors.clone(),
        fits: out.fits,
    }
}

/// Runs the search on a prepared problem (shared by replications that reuse
/// a design).
pub fn search_with(problem: &SelectionProblem, config: &SelectionConfig) -> Result<SelectionResult> {
    config.validate()?;
    let blocks = partition_blocks(problem.candidates(), config);
    let outcomes: Vec<Result<GetsOutcome>> = blocks.par_iter().map(|b| gets_select(problem, b, config)).collect();

    let mut trace = Vec::new();
    let mut union = BTreeSet::new();
    for (i, (block, out)) in blocks.iter().zip(outcomes).enumerate() {
        let out = out?;
        union.extend(out.survivors.iter().copied());
        trace.push(record("block", 0, i, block, &out));
    }

    // Unions too large for a reliable joint fit are re-blocked in (country, year) order.
    let joint_limit = (problem.nobs().saturating_sub(problem.forced_rank()) / 2).max(config.block_size);

    let mut current: Vec<Candidate> = union.into_iter().collect();
    let mut union_history = vec![current.clone()];
    let mut converged = false;
    let mut iterations = 0;
    for iteration in 1..=config.max_outer_iterations {
        iterations = iteration;
        let next: Vec<Candidate> = if current.len() > joint_limit {
            let mut pooled = BTreeSet::new();
            for (i, chunk) in current.chunks(config.block_size).enumerate() {
                let out = gets_select(problem, chunk, config)?;
                pooled.extend(out.survivors.iter().copied());
                trace.push(record("union-block", iteration, i, chunk, &out));
            }
            pooled.into_iter().collect()
        } else {
            let out = gets_select(problem, &current, config)?;
            trace.push(record("union", iteration, 0, &current, &out));
            out.survivors
        };
        let changed = next != current;
        current = next;
        union_history.push(current.clone());
        if !changed {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!(
            "selection did not converge after {} outer iterations; returning the last retained set",
            config.max_outer_iterations
        );
    }

    let final_fit = problem.fit(&current)?;
    let retained: Vec<Candidate> = final_fit.retained.iter().map(|&i| current[i]).collect();
    Ok(SelectionResult {
        retained,
        final_p_values: final_fit.p_values,
        n_candidates: problem.candidates().len(),
        converged,
        iterations,
        union_history,
        trace,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(n: usize) -> Vec<Candidate> {
        (0..n)
            .map(|i| Candidate::step(i / 21, 2001 + (i % 21) as i32))
            .collect()
    }

    #[test]
    fn block_count_for_full_panel() {
        let blocks = partition_blocks(&steps(861), &SelectionConfig::default());
        assert_eq!(blocks.len(), 861usize.div_ceil(20));
        assert_eq!(blocks.iter().filter(|b| b.len() == 20).count(), 43);
        assert_eq!(blocks.last().unwrap().len(), 1);
    }

    #[test]
    fn small_candidate_set_is_one_block() {
        let blocks = partition_blocks(&steps(5), &SelectionConfig::default());
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].len(), 5);
    }

    #[test]
    fn partition_is_deterministic_and_exhaustive() {
        let cfg = SelectionConfig::default().with_seed(42);
        let a = partition_blocks(&steps(100), &cfg);
        let b = partition_blocks(&steps(100), &cfg);
        assert_eq!(a, b);
        let mut all: Vec<Candidate> = a.into_iter().flatten().collect();
        all.sort();
        assert_eq!(all, steps(100));
        let c = partition_blocks(&steps(100), &cfg.with_seed(43));
        assert_ne!(c[0], b[0]);
    }

    #[test]
    fn config_validation() {
        assert!(SelectionConfig::default().with_gamma(0.0).validate().is_err());
        assert!(SelectionConfig::default().with_gamma(1.0).validate().is_err());
        let mut c = SelectionConfig::default();
        c.block_size = 1;
        assert!(c.validate().is_err());
        c.block_size = 2;
        c.max_paths = 0;
        assert!(c.validate().is_err());
    }
}
