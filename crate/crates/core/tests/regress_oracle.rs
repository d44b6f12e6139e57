mod common;

use breakscope::panel::{ColumnKind, DesignMatrix};
use breakscope::regress::{fit_ols, Projector, DEFAULT_RANK_TOL};
use common::{labels, normal_equations, random_design, rel_err, within_slopes};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ols_matches_normal_equations(seed in any::<u64>(), k in 1usize..=10, extra in 2usize..=40) {
        let n = (k + extra).min(50);
        let d = random_design(seed, n, k);
        let fit = fit_ols(&d).unwrap();
        let oracle = normal_equations(&d.x, &d.y);
        prop_assert_eq!(fit.retained.len(), k);
        for j in 0..k {
            prop_assert!(rel_err(fit.coefficients[j], oracle[j]) < 1e-8);
        }
        let resid = &d.y - &d.x * &oracle;
        prop_assert!(rel_err(fit.rss, resid.norm_squared()) < 1e-8);
    }

    #[test]
    fn dummies_equal_within(seed in any::<u64>(), n in 2usize..=6, t in 3usize..=8, k in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = n * t;
        let xs: Vec<Vec<f64>> = (0..k).map(|_| (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..rows)
            .map(|r| (r / t) as f64 * 0.7 + xs.iter().map(|x| 0.5 * x[r]).sum::<f64>() + rng.random_range(-0.2..0.2))
            .collect();
        prop_assume!(rows > n + k);
        let x = DMatrix::from_fn(rows, n + k, |r, j| if j < n { f64::from(u8::from(r / t == j)) } else { xs[j - n][r] });
        let cols: Vec<ColumnKind> = (0..n).map(ColumnKind::CountryEffect).chain(labels(k).into_iter().map(|c| match c {
            ColumnKind::CountryTrend(j) => ColumnKind::CountryTrend(100 + j),
            other => other,
        })).collect();
        let fit = fit_ols(&DesignMatrix::new(x, DVector::from_vec(y.clone()), cols).unwrap()).unwrap();
        let within = within_slopes(&y, &xs, n, t);
        for j in 0..k {
            prop_assert!(rel_err(fit.coefficients[n + j], within[j]) < 1e-8);
        }
    }

    #[test]
    fn partialling_out_matches_full_fit(seed in any::<u64>(), kf in 1usize..=5, kc in 1usize..=4) {
        let n = 40;
        let d = random_design(seed, n, kf + kc);
        let col = |j: usize| -> Vec<f64> { d.x.column(j).iter().copied().collect() };
        let forced: Vec<Vec<f64>> = (0..kf).map(col).collect();
        let y: Vec<f64> = d.y.iter().copied().collect();
        let proj = Projector::new(&forced, &y, DEFAULT_RANK_TOL);
        let reduced: Vec<_> = (kf..kf + kc).map(|j| proj.reduce(&col(j))).collect();
        let refs: Vec<_> = reduced.iter().collect();
        let pf = proj.fit(&refs, DEFAULT_RANK_TOL).unwrap();
        let full = fit_ols(&d).unwrap();
        prop_assert!(rel_err(pf.rss, full.rss) < 1e-8);
        for (i, &pos) in pf.retained.iter().enumerate() {
            prop_assert!(rel_err(pf.coefficients[i], full.coefficients[kf + pos]) < 1e-8);
            prop_assert!(rel_err(pf.std_errors[i], full.std_errors[kf + pos]) < 1e-8);
        }
    }
}

#[test]
fn duplicated_column_is_aliased_not_fatal() {
    let d = random_design(3, 30, 4);
    let mut x = d.x.clone().insert_column(4, 0.0);
    let dup = x.column(2).clone_owned();
    x.set_column(4, &dup);
    let fit = fit_ols(&DesignMatrix::new(x, d.y.clone(), labels(5)).unwrap()).unwrap();
    assert_eq!(fit.retained.len(), 4);
    assert_eq!(fit.dropped.len(), 1);
    let oracle = normal_equations(&d.x, &d.y);
    let fitted = fit.coefficients.iter().sum::<f64>();
    assert!(rel_err(fitted, oracle.iter().sum::<f64>()) < 1e-8);
}
