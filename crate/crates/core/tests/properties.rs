use parlin_core::{
    compute_gram_partial, merge_gram, percent_reduction, rmse, solve_normal, summarize, GramPartial, Sample,
    TimingRecord,
};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn partial_close(p: &GramPartial, q: &GramPartial, tol: f64) -> bool {
    p.n == q.n
        && p.a.iter().zip(&q.a).all(|(x, y)| rel_close(*x, *y, tol))
        && p.b.iter().zip(&q.b).all(|(x, y)| rel_close(*x, *y, tol))
        && rel_close(p.sum_yy, q.sum_yy, tol)
}

fn samples(d: usize, max_rows: usize) -> impl Strategy<Value = Vec<Sample>> {
    prop::collection::vec(
        (prop::collection::vec(-100.0f64..100.0, d), -500.0f64..500.0).prop_map(|(f, y)| Sample::new(f, y)),
        0..max_rows,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merge_is_commutative_and_associative(
        a in samples(3, 30), b in samples(3, 30), c in samples(3, 30)
    ) {
        let (pa, pb, pc) = (
            compute_gram_partial(3, &a).unwrap(),
            compute_gram_partial(3, &b).unwrap(),
            compute_gram_partial(3, &c).unwrap(),
        );
        let ab = merge_gram(&pa, &pb).unwrap();
        prop_assert!(partial_close(&ab, &merge_gram(&pb, &pa).unwrap(), 1e-12));
        let left = merge_gram(&ab, &pc).unwrap();
        let right = merge_gram(&pa, &merge_gram(&pb, &pc).unwrap()).unwrap();
        prop_assert!(partial_close(&left, &right, 1e-12));
        prop_assert!(left.is_symmetric());
        prop_assert!(left.is_positive_semidefinite(1e-6));
    }

    #[test]
    fn distributed_solve_equals_local_solve(
        rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 40..200),
        noise in prop::collection::vec(-1.0f64..1.0, 200),
        cuts in prop::collection::vec(0.0f64..1.0, 0..7),
    ) {
        let data: Vec<Sample> = rows
            .iter()
            .zip(&noise)
            .map(|(f, e)| Sample::new(f.clone(), 3.0 + f[0] - 2.0 * f[1] + 0.5 * f[3] + e))
            .collect();
        let mut bounds: Vec<usize> = cuts.iter().map(|c| (c * data.len() as f64) as usize).collect();
        bounds.push(0);
        bounds.push(data.len());
        bounds.sort_unstable();
        let merged = bounds
            .windows(2)
            .map(|w| compute_gram_partial(4, &data[w[0]..w[1]]).unwrap())
            .fold(GramPartial::zero(4), |acc, p| merge_gram(&acc, &p).unwrap());
        let whole = compute_gram_partial(4, &data).unwrap();
        let a = solve_normal(&merged, 0.0).unwrap().coefficients;
        let b = solve_normal(&whole, 0.0).unwrap().coefficients;
        prop_assert!(a.max_relative_diff(&b) <= 1e-8, "{:?} vs {:?}", a, b);
    }

    #[test]
    fn rmse_is_nonnegative_and_zero_only_on_equality(
        pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..100)
    ) {
        let (p, o): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let r = rmse(&p, &o).unwrap();
        prop_assert!(r.rmse >= 0.0);
        prop_assert_eq!(r.rmse == 0.0, p == o);
        prop_assert!(rel_close(r.rmse, (r.sse / r.n_test as f64).sqrt(), 1e-12));
        prop_assert_eq!(rmse(&p, &p).unwrap().rmse, 0.0);
    }

    #[test]
    fn noiseless_data_recovers_true_coefficients(
        d in 1usize..=16,
        seed_rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 16), 160..240),
        theta in prop::collection::vec((0.5f64..5.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m }), 17),
    ) {
        // Mixed feature scales, like minutes/miles/scores in the flight schema.
        let scales = [1.0, 12.0, 24.0, 2500.0, 14.0, 1.0, 3.0, 60.0, 0.5, 7.0, 100.0, 1.0, 2.0, 9.0, 30.0, 0.1];
        let n = seed_rows.len().max(10 * d);
        let data: Vec<Sample> = seed_rows
            .iter()
            .take(n)
            .map(|r| {
                let f: Vec<f64> = (0..d).map(|j| scales[j] * (1.0 + r[j])).collect();
                let y = theta[0] + f.iter().zip(&theta[1..]).map(|(x, w)| x * w).sum::<f64>();
                Sample::new(f, y)
            })
            .collect();
        let fit = solve_normal(&compute_gram_partial(d, &data).unwrap(), 0.0).unwrap();
        prop_assert!(!fit.ridge_fallback);
        for (got, want) in fit.coefficients.to_theta().iter().zip(&theta[..=d]) {
            prop_assert!(rel_close(*got, *want, 1e-9), "{} vs {}", got, want);
        }
    }

    #[test]
    fn summary_mean_ignores_record_order(
        times in prop::collection::vec(0.1f64..500.0, 1..10),
        shuffle_seed in any::<u64>(),
    ) {
        let recs: Vec<TimingRecord> = times
            .iter()
            .enumerate()
            .map(|(i, t)| TimingRecord { environment_label: "E".into(), run_index: i as u32 + 1, wall_seconds: *t })
            .collect();
        let mut shuffled = recs.clone();
        let k = (shuffle_seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = summarize(&recs).unwrap().rows[0].average;
        let b = summarize(&shuffled).unwrap().rows[0].average;
        prop_assert!(rel_close(a, b, 1e-12));
    }

    #[test]
    fn percent_reduction_inverts(b in 0.01f64..1e4, p in 0.0f64..100.0) {
        let got = percent_reduction(b, b * (1.0 - p / 100.0)).unwrap();
        prop_assert!((got - p).abs() <= 1e-9);
    }
}
