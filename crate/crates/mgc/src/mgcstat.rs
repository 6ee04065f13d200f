//! The smoothed-maximum statistic over a local correlation map.
//!
//! A noise threshold is derived from the negative local correlations, the
//! scales exceeding it are reduced to their largest 8-connected region, and
//! the statistic is the maximum local correlation inside that region if it
//! is large enough (area at least 2n), otherwise the global correlation.
//! Because the threshold never falls below the global entry, a non-default
//! statistic always dominates the global one.

use crate::centering::{center, Scheme};
use crate::error::Result;
use crate::geometry::{column_ranks, row_ranks, DistanceMatrix};
use crate::localcorr::{all_local_corrs, LocalCorrMap};

/// The outcome of the scale search.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSelection {
    pub statistic: f64,
    /// Every scale in the significant region attaining the maximum;
    /// `[(n, n)]` when defaulted to the global correlation.
    pub optimal_scales: Vec<(usize, usize)>,
    /// Lexicographically smallest optimal scale.
    pub canonical_scale: (usize, usize),
    pub threshold: f64,
    /// Row-major n x n membership mask of the largest significant region.
    pub region_mask: Vec<bool>,
    pub region_area: usize,
    pub defaulted_to_global: bool,
}

/// Noise threshold for significant local correlations: 3.5 times the root
/// mean square of the negative map entries (floored at 0.01), then raised to
/// at least `2/n` and the global correlation.
pub fn threshold(map: &LocalCorrMap) -> f64 {
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for &c in map.grid().iter() {
        if c < 0.0 {
            sum_sq += c * c;
            count += 1;
        }
    }
    let tau0 = if count == 0 {
        0.0
    } else {
        sum_sq / count as f64
    };
    let tau1 = tau0.sqrt().max(0.01) * 3.5;
    tau1.max(2.0 / map.n() as f64).max(map.global())
}

/// Largest 8-connected component of `{(k,l) : corr[k][l] > tau}`.
///
/// Returns the row-major membership mask and its cell count. Size ties keep
/// the component containing the lexicographically smallest scale, which the
/// row-major scan visits first.
pub fn significant_region(map: &LocalCorrMap, tau: f64) -> (Vec<bool>, usize) {
    let n = map.n();
    let above: Vec<bool> = map.grid().iter().map(|&c| c > tau).collect();
    let mut labeled = vec![false; n * n];
    let mut best: Vec<usize> = Vec::new();
    let mut component: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();

    for start in 0..n * n {
        if !above[start] || labeled[start] {
            continue;
        }
        component.clear();
        stack.push(start);
        labeled[start] = true;
        while let Some(cell) = stack.pop() {
            component.push(cell);
            let (r, c) = (cell / n, cell % n);
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= n as i64 || nc >= n as i64 {
                        continue;
                    }
                    let idx = nr as usize * n + nc as usize;
                    if above[idx] && !labeled[idx] {
                        labeled[idx] = true;
                        stack.push(idx);
                    }
                }
            }
        }
        if component.len() > best.len() {
            best = component.clone();
        }
    }

    let mut mask = vec![false; n * n];
    for &cell in &best {
        mask[cell] = true;
    }
    (mask, best.len())
}

/// Smoothed maximum over the map.
pub fn mgc_statistic(map: &LocalCorrMap) -> ScaleSelection {
    let n = map.n();
    let tau = threshold(map);
    let (mask, area) = significant_region(map, tau);

    if area < 2 * n {
        return ScaleSelection {
            statistic: map.global(),
            optimal_scales: vec![(n, n)],
            canonical_scale: (n, n),
            threshold: tau,
            region_mask: mask,
            region_area: area,
            defaulted_to_global: true,
        };
    }

    let mut best = f64::NEG_INFINITY;
    for (idx, &inside) in mask.iter().enumerate() {
        if inside {
            let c = map.at(idx / n + 1, idx % n + 1);
            if c > best {
                best = c;
            }
        }
    }
    let mut optimal = Vec::new();
    for (idx, &inside) in mask.iter().enumerate() {
        if inside && map.at(idx / n + 1, idx % n + 1) == best {
            optimal.push((idx / n + 1, idx % n + 1));
        }
    }
    let canonical = optimal[0];
    ScaleSelection {
        statistic: best,
        optimal_scales: optimal,
        canonical_scale: canonical,
        threshold: tau,
        region_mask: mask,
        region_area: area,
        defaulted_to_global: false,
    }
}

/// Centering configuration for the local correlation map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MgcConfig {
    pub scheme_a: Scheme,
    pub scheme_b: Scheme,
}

impl MgcConfig {
    /// The default build, on unbiased centering.
    pub fn unbiased() -> Self {
        MgcConfig {
            scheme_a: Scheme::Unbiased,
            scheme_b: Scheme::Unbiased,
        }
    }

    /// The Mantel generalization: simple centering on both sides.
    pub fn mantel() -> Self {
        MgcConfig {
            scheme_a: Scheme::Simple,
            scheme_b: Scheme::Simple,
        }
    }
}

impl Default for MgcConfig {
    fn default() -> Self {
        MgcConfig::unbiased()
    }
}

/// Full statistic pipeline from two comparison matrices: center per the
/// config, rank columns of `da` and rows of `db`, build the map, and take
/// the smoothed maximum.
pub fn mgc_from_distances(
    da: &DistanceMatrix,
    db: &DistanceMatrix,
    config: &MgcConfig,
) -> Result<(ScaleSelection, LocalCorrMap)> {
    if da.n() != db.n() {
        return Err(crate::error::Error::Shape(format!(
            "sample counts differ: {} vs {}",
            da.n(),
            db.n()
        )));
    }
    let a = center(da, config.scheme_a)?;
    let b = center(db, config.scheme_b)?;
    let ra = column_ranks(da);
    let rb = row_ranks(db);
    let map = all_local_corrs(&a, &b, &ra, &rb)?;
    Ok((mgc_statistic(&map), map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pairwise_distances, Metric, SampleSet};
    use crate::mat::Mat;
    use crate::rng::Stream;
    use crate::synth::{sample_dependency, SimulationSpec};

    fn map_from(grid: Mat) -> LocalCorrMap {
        LocalCorrMap::from_grid(grid, (Scheme::Unbiased, Scheme::Unbiased)).unwrap()
    }

    fn random_samples(n: usize, p: usize, seed: u64) -> SampleSet {
        let mut s = Stream::new(seed, &[13]);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| s.standard_normal()).collect())
            .collect();
        SampleSet::new(Mat::from_rows(&rows)).unwrap()
    }

    #[test]
    fn threshold_traces_the_formula() {
        // No negative entries, n = 100, global 0.01.
        let n = 100;
        let mut grid = Mat::zeros(n, n);
        grid[(n - 1, n - 1)] = 0.01;
        let map = map_from(grid);
        assert!((threshold(&map) - 0.035).abs() < 1e-15);

        // All negative entries equal -0.1 except a 0.9 global.
        let mut grid = Mat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                grid[(i, j)] = -0.1;
            }
        }
        grid[(3, 3)] = 0.0;
        let map = map_from(grid);
        // tau0 = 0.01, sqrt = 0.1, tau1 = max(0.01, 0.1) * 3.5 = 0.35.
        assert!((threshold(&map) - 0.5).abs() < 1e-15); // 2/n = 0.5 dominates at n=4

        let mut grid = Mat::zeros(100, 100);
        for i in 0..100 {
            grid[(i, 0)] = -0.1;
        }
        let map = map_from(grid);
        assert!((threshold(&map) - 0.35).abs() < 1e-15);

        // Large global correlation dominates.
        let mut grid = Mat::zeros(100, 100);
        grid[(99, 99)] = 0.9;
        let map = map_from(grid);
        assert!((threshold(&map) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn region_empty_and_two_blocks() {
        let map = map_from(Mat::zeros(12, 12));
        let (mask, area) = significant_region(&map, 0.5);
        assert_eq!(area, 0);
        assert!(mask.iter().all(|&m| !m));

        // Disjoint blocks of sizes 6 and 4; the 6-block must win.
        let mut grid = Mat::zeros(12, 12);
        for (r, c) in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)] {
            grid[(r, c)] = 1.0;
        }
        for (r, c) in [(8, 8), (8, 9), (9, 8), (9, 9)] {
            grid[(r, c)] = 1.0;
        }
        let map = map_from(grid);
        let (mask, area) = significant_region(&map, 0.5);
        assert_eq!(area, 6);
        assert!(mask[0] && mask[1] && mask[2]);
        assert!(!mask[8 * 12 + 8]);

        // Equal-size components: keep the one holding the lexicographically
        // smallest scale.
        let mut grid = Mat::zeros(10, 10);
        for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            grid[(r, c)] = 1.0;
        }
        for (r, c) in [(6, 6), (6, 7), (7, 6), (7, 7)] {
            grid[(r, c)] = 1.0;
        }
        let map = map_from(grid);
        let (mask, area) = significant_region(&map, 0.5);
        assert_eq!(area, 4);
        assert!(mask[10 + 1] && mask[2 * 10 + 2]);
        assert!(!mask[6 * 10 + 6]);
    }

    #[test]
    fn diagonal_cells_are_eight_connected() {
        let mut grid = Mat::zeros(6, 6);
        for i in 0..6 {
            grid[(i, i)] = 1.0;
        }
        let map = map_from(grid);
        let (_, area) = significant_region(&map, 0.5);
        assert_eq!(area, 6);
    }

    #[test]
    fn single_cell_above_threshold_defaults_to_global() {
        let n = 10;
        let mut grid = Mat::zeros(n, n);
        grid[(4, 4)] = 0.9;
        grid[(n - 1, n - 1)] = 0.05;
        let map = map_from(grid);
        let sel = mgc_statistic(&map);
        assert!(sel.defaulted_to_global);
        assert_eq!(sel.canonical_scale, (n, n));
        assert!((sel.statistic - 0.05).abs() < 1e-15);
        assert_eq!(sel.optimal_scales, vec![(n, n)]);
    }

    #[test]
    fn monotone_threshold_never_grows_region() {
        let mut s = Stream::new(12, &[3]);
        let n = 20;
        let mut grid = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                grid[(i, j)] = s.uniform(-0.5, 1.0);
            }
        }
        let map = map_from(grid);
        let mut last = usize::MAX;
        for tau in [0.0, 0.2, 0.4, 0.6, 0.8] {
            let (_, area) = significant_region(&map, tau);
            assert!(area <= last);
            last = area;
        }
    }

    #[test]
    fn noiseless_linear_hits_global_scale_with_statistic_one() {
        let n = 30;
        let x = random_samples(n, 1, 77);
        let y_rows: Vec<Vec<f64>> = (0..n).map(|i| vec![2.0 * x.row(i)[0] + 1.0]).collect();
        let y = SampleSet::new(Mat::from_rows(&y_rows)).unwrap();
        let dx = pairwise_distances(&x, Metric::Euclidean).unwrap();
        let dy = pairwise_distances(&y, Metric::Euclidean).unwrap();
        let (sel, map) = mgc_from_distances(&dx, &dy, &MgcConfig::unbiased()).unwrap();
        assert!(
            (sel.statistic - 1.0).abs() < 1e-12,
            "stat {}",
            sel.statistic
        );
        assert!((map.global() - 1.0).abs() < 1e-12);
        assert_eq!(sel.canonical_scale, (n, n));
    }

    #[test]
    fn spiral_selects_a_local_scale() {
        let spec = SimulationSpec::new(8, 60, 1, 0.0, 9).unwrap();
        let pair = sample_dependency(&spec).unwrap();
        let dx = pairwise_distances(&pair.x, Metric::Euclidean).unwrap();
        let dy = pairwise_distances(&pair.y, Metric::Euclidean).unwrap();
        let (sel, _) = mgc_from_distances(&dx, &dy, &MgcConfig::unbiased()).unwrap();
        assert!(!sel.defaulted_to_global);
        assert_ne!(sel.canonical_scale, (60, 60));
    }

    #[test]
    fn identical_matrices_give_statistic_one() {
        let x = random_samples(12, 2, 3);
        let dx = pairwise_distances(&x, Metric::Euclidean).unwrap();
        let (sel, _) = mgc_from_distances(&dx, &dx, &MgcConfig::unbiased()).unwrap();
        assert!((sel.statistic - 1.0).abs() < 1e-12);
        assert_eq!(sel.canonical_scale, (12, 12));
    }

    #[test]
    fn independent_samples_statistic_centers_on_zero() {
        let trials = 500;
        let n = 100;
        let mut stats = Vec::with_capacity(trials);
        for t in 0..trials {
            let x = random_samples(n, 1, 9000 + t as u64);
            let y = random_samples(n, 1, 90_000 + t as u64);
            let dx = pairwise_distances(&x, Metric::Euclidean).unwrap();
            let dy = pairwise_distances(&y, Metric::Euclidean).unwrap();
            let (sel, _) = mgc_from_distances(&dx, &dy, &MgcConfig::unbiased()).unwrap();
            stats.push(sel.statistic);
        }
        let mean = stats.iter().sum::<f64>() / trials as f64;
        let var = stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / trials as f64;
        let se = (var / trials as f64).sqrt();
        // The smoothed maximum only fires on large regions, so the mean stays
        // within Monte-Carlo noise of the (mean-zero) global correlation.
        assert!(mean.abs() <= 4.0 * se + 1e-3, "mean {mean}, se {se}");
    }

    #[test]
    fn joint_relabeling_leaves_statistic_unchanged() {
        let x = random_samples(15, 1, 8);
        let y = random_samples(15, 1, 9);
        let dx = pairwise_distances(&x, Metric::Euclidean).unwrap();
        let dy = pairwise_distances(&y, Metric::Euclidean).unwrap();
        let (sel, _) = mgc_from_distances(&dx, &dy, &MgcConfig::unbiased()).unwrap();

        let mut s = Stream::new(5, &[50]);
        let pi = s.permutation(15);
        let (sel_p, _) = mgc_from_distances(
            &dx.apply_permutation(&pi).unwrap(),
            &dy.apply_permutation(&pi).unwrap(),
            &MgcConfig::unbiased(),
        )
        .unwrap();
        assert!((sel.statistic - sel_p.statistic).abs() < 1e-12);
    }

    #[test]
    fn rescaling_inputs_leaves_selection_unchanged() {
        let x = random_samples(20, 2, 15);
        let y = random_samples(20, 1, 16);
        let dx = pairwise_distances(&x, Metric::Euclidean).unwrap();
        let dy = pairwise_distances(&y, Metric::Euclidean).unwrap();
        let (sel, map) = mgc_from_distances(&dx, &dy, &MgcConfig::unbiased()).unwrap();

        let scaled_rows: Vec<Vec<f64>> = (0..20)
            .map(|i| x.row(i).iter().map(|v| 7.5 * v).collect())
            .collect();
        let xs = SampleSet::new(Mat::from_rows(&scaled_rows)).unwrap();
        let dxs = pairwise_distances(&xs, Metric::Euclidean).unwrap();
        let (sel_s, map_s) = mgc_from_distances(&dxs, &dy, &MgcConfig::unbiased()).unwrap();

        for k in 1..=20 {
            for l in 1..=20 {
                assert!((map.at(k, l) - map_s.at(k, l)).abs() < 1e-12);
            }
        }
        assert_eq!(sel.canonical_scale, sel_s.canonical_scale);
        assert!((sel.statistic - sel_s.statistic).abs() < 1e-12);
    }

    #[test]
    fn statistic_dominates_global_when_not_defaulted() {
        // Construct a grid whose significant region is large.
        let n = 12;
        let mut grid = Mat::zeros(n, n);
        for i in 2..8 {
            for j in 2..8 {
                grid[(i, j)] = 0.6 + 0.01 * (i + j) as f64;
            }
        }
        grid[(n - 1, n - 1)] = 0.1;
        let map = map_from(grid);
        let sel = mgc_statistic(&map);
        assert!(!sel.defaulted_to_global);
        assert!(sel.statistic >= map.global());
        assert!(sel.region_area >= 2 * n);
        assert!(sel.optimal_scales.contains(&sel.canonical_scale));
    }
}
