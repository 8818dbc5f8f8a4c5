use proptest::prelude::*;
use rectiso::estimator::IsotonicFit;
use rectiso::evaluate::{integrated_l1, lemma_a1_check, log_log_fit, mape, quantile, sign_test};
use rectiso::grid::QueryGrid;

fn fit_on(axes: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> IsotonicFit {
    let grid = QueryGrid::new(axes).unwrap();
    let v: Vec<f64> = (0..grid.len()).map(|g| f(&grid.point(g))).collect();
    IsotonicFit::from_bounds(grid, v.clone(), v).unwrap()
}

proptest! {
    #[test]
    fn l1_triangle_bound(shift in -2.0f64..2.0, wiggle in 0.0f64..1.0, k in 2usize..12) {
        let axis: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
        let fit = fit_on(vec![axis.clone(), axis], |x| x[0] + x[1]);
        let f = |x: &[f64]| x[0] * x[1] + shift;
        let g = |x: &[f64]| x[0] * x[1] + shift + wiggle * (x[0] - 0.5);
        let w = vec![1.0 / fit.len() as f64; fit.len()];
        let mask = vec![true; fit.len()];
        let lf = integrated_l1(&fit, f, &mask, &w).unwrap();
        let lg = integrated_l1(&fit, g, &mask, &w).unwrap();
        let gap = (0..fit.len()).map(|i| { let x = fit.grid.point(i); (f(&x) - g(&x)).abs() }).fold(0.0, f64::max);
        prop_assert!(lf <= lg + gap * w.iter().sum::<f64>() + 1e-12);
    }

    #[test]
    fn mape_scales_linearly(p in prop::collection::vec(-5.0f64..5.0, 1..40), c in 0.01f64..50.0, s in -3.0f64..3.0) {
        let o: Vec<f64> = p.iter().enumerate().map(|(i, v)| v + (i as f64).sin()).collect();
        let base = mape(&p, &o).unwrap();
        let scaled = mape(&p.iter().map(|v| c * v + s).collect::<Vec<_>>(), &o.iter().map(|v| c * v + s).collect::<Vec<_>>()).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-9 * (c * base).max(1.0));
    }

    #[test]
    fn slope_ignores_error_scale(v in prop::collection::vec(0.01f64..10.0, 3..8), c in 0.001f64..1000.0) {
        let ns: Vec<usize> = (0..v.len()).map(|k| 100 << k).collect();
        let a = log_log_fit(&ns, &v).unwrap();
        let b = log_log_fit(&ns, &v.iter().map(|x| c * x).collect::<Vec<_>>()).unwrap();
        prop_assert!((a.slope - b.slope).abs() <= 1e-9);
        prop_assert!((a.r2 - b.r2).abs() <= 1e-9);
    }

    #[test]
    fn quantile_is_an_order_statistic_interpolation(v in prop::collection::vec(-100.0f64..100.0, 1..50), p in 0.0f64..=1.0) {
        let q = quantile(&v, p);
        let below = v.iter().filter(|x| **x <= q).count() as f64;
        prop_assert!(below >= (p * (v.len() - 1) as f64).floor() + 1.0 - 1e-9);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= q && q <= hi);
    }
}

#[test]
fn sign_test_matches_binomial_sum() {
    for trials in [1usize, 5, 20, 40] {
        for wins in 0..=trials {
            let mut tail = 0.0;
            for k in wins..=trials {
                let mut c = 1.0;
                for i in 0..k {
                    c *= (trials - i) as f64 / (i + 1) as f64;
                }
                tail += c * 0.5f64.powi(trials as i32);
            }
            let want = if wins == 0 { 1.0 } else { tail };
            assert!(
                (sign_test(wins, trials - wins) - want).abs() <= 1e-10,
                "{wins}/{trials}"
            );
        }
    }
}

#[test]
fn lemma_rejects_non_isotonic_input() {
    let mut v = vec![0.0; 16];
    v[0] = 1.0;
    assert!(lemma_a1_check(&v, 3, 2).is_err());
}

#[test]
fn constant_offset_costs_the_offset() {
    let fit = fit_on(vec![vec![0.0, 0.5, 1.0]], |x| x[0] + 1.0);
    let l1 = integrated_l1(&fit, |x| x[0], &[true; 3], &[1.0 / 3.0; 3]).unwrap();
    assert!((l1 - 1.0).abs() <= 1e-12);
}
