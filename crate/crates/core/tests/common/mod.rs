#![allow(dead_code)]

use std::path::{Path, PathBuf};

use breakscope::attribution::{CategoryMap, MatchedBreak};
use breakscope::panel::{ColumnKind, DesignMatrix};
use breakscope::{io, pipeline};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Financing-mechanism fixture: deduped breaks matched to their events.
pub fn financing_matches() -> Vec<MatchedBreak> {
    let breaks = io::read_breaks(&fixture("fin_breaks.csv"), &fixture("fin_groups.csv")).unwrap();
    let events = io::read_policies(&fixture("fin_policies.csv"), &CategoryMap::default()).unwrap();
    pipeline::attribute(&breaks, &events).matches
}

/// Solves X'X b = X'y by LU.
pub fn normal_equations(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    xtx.lu().solve(&xty).expect("full column rank")
}

/// Generic labels for columns of a hand-made design.
pub fn labels(k: usize) -> Vec<ColumnKind> {
    (0..k).map(ColumnKind::CountryTrend).collect()
}

pub fn random_design(seed: u64, n: usize, k: usize) -> DesignMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { rng.random_range(-3.0..3.0) });
    let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y = DVector::from_fn(n, |i, _| {
        (0..k).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + rng.random_range(-0.5..0.5)
    });
    DesignMatrix::new(x, y, labels(k)).unwrap()
}

/// One-way within (entity-demeaned) slopes on a balanced n x t panel in
/// unit-major row order.
pub fn within_slopes(y: &[f64], xs: &[Vec<f64>], n: usize, t: usize) -> Vec<f64> {
    let demean = |v: &[f64]| -> Vec<f64> {
        let mut out = v.to_vec();
        for i in 0..n {
            let m = v[i * t..(i + 1) * t].iter().sum::<f64>() / t as f64;
            for x in &mut out[i * t..(i + 1) * t] {
                *x -= m;
            }
        }
        out
    };
    let yd = DVector::from_vec(demean(y));
    let cols: Vec<Vec<f64>> = xs.iter().map(|x| demean(x)).collect();
    let x = DMatrix::from_fn(n * t, xs.len(), |r, j| cols[j][r]);
    normal_equations(&x, &yd).iter().copied().collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
