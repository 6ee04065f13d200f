//! Property tests over randomly generated inputs.

use proptest::prelude::*;

use mgc::geometry::{column_ranks, pairwise_distances, row_ranks, Metric, SampleSet};
use mgc::inference::adjust_pvalues_bh;
use mgc::mat::Mat;

fn sample_strategy(n: usize, p: usize) -> impl Strategy<Value = SampleSet> {
    prop::collection::vec(prop::collection::vec(-100.0f64..100.0, p), n)
        .prop_map(|rows| SampleSet::new(Mat::from_rows(&rows)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_columns_and_rows_are_permutations(s in sample_strategy(11, 2)) {
        let d = pairwise_distances(&s, Metric::Euclidean).unwrap();
        let rc = column_ranks(&d);
        let rr = row_ranks(&d);
        for j in 0..11 {
            let mut col_seen = [false; 11];
            let mut row_seen = [false; 11];
            for i in 0..11 {
                prop_assert!(!col_seen[rc.rank(i, j) as usize]);
                col_seen[rc.rank(i, j) as usize] = true;
                prop_assert!(!row_seen[rr.rank(j, i) as usize]);
                row_seen[rr.rank(j, i) as usize] = true;
            }
            prop_assert_eq!(rc.rank(j, j), 0);
            prop_assert_eq!(rr.rank(j, j), 0);
        }
    }

    #[test]
    fn permutation_application_composes(
        s in sample_strategy(9, 1),
        seed_a in 0u64..1000,
        seed_b in 0u64..1000,
    ) {
        let d = pairwise_distances(&s, Metric::Euclidean).unwrap();
        let pi = mgc::rng::Stream::new(seed_a, &[1]).permutation(9);
        let sigma = mgc::rng::Stream::new(seed_b, &[2]).permutation(9);
        let two_step = d.apply_permutation(&pi).unwrap().apply_permutation(&sigma).unwrap();
        let composed: Vec<usize> = (0..9).map(|i| pi[sigma[i]]).collect();
        let one_step = d.apply_permutation(&composed).unwrap();
        prop_assert_eq!(two_step.values(), one_step.values());
    }

    #[test]
    fn bh_rejections_equal_adjusted_threshold_set(
        pvals in prop::collection::vec(0.0f64..=1.0, 1..60),
        q in 0.01f64..0.5,
    ) {
        let out = adjust_pvalues_bh(&pvals, q).unwrap();
        for i in 0..pvals.len() {
            prop_assert_eq!(out.reject[i], out.adjusted[i] <= q);
            prop_assert!((0.0..=1.0).contains(&out.adjusted[i]));
        }
        // Adjusted values are a monotone transform of the raw ordering.
        let mut order: Vec<usize> = (0..pvals.len()).collect();
        order.sort_by(|&a, &b| pvals[a].partial_cmp(&pvals[b]).unwrap());
        for w in order.windows(2) {
            prop_assert!(out.adjusted[w[0]] <= out.adjusted[w[1]] + 1e-15);
        }
    }
}
