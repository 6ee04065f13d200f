//! Reference implementations used as oracles by the integration and
//! acceptance suites. Everything here is deliberately independent of the
//! production code paths it checks: the component oracle is union-find
//! (production uses flood fill) and the KS statistics are plain sorted
//! walks.

/// Largest-component size of a row-major boolean mask under 8-neighbor
/// connectivity, by union-find.
pub fn largest_component_union_find(mask: &[bool], rows: usize, cols: usize) -> usize {
    assert_eq!(mask.len(), rows * cols);
    let mut parent: Vec<usize> = (0..mask.len()).collect();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    fn union(parent: &mut [usize], a: usize, b: usize) {
        let ra = find(parent, a);
        let rb = find(parent, b);
        if ra != rb {
            parent[ra] = rb;
        }
    }

    for r in 0..rows {
        for c in 0..cols {
            if !mask[r * cols + c] {
                continue;
            }
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
                        continue;
                    }
                    let other = nr as usize * cols + nc as usize;
                    if mask[other] {
                        union(&mut parent, r * cols + c, other);
                    }
                }
            }
        }
    }

    let mut counts = std::collections::HashMap::new();
    let mut best = 0;
    for (idx, &member) in mask.iter().enumerate() {
        if member {
            let root = find(&mut parent, idx);
            let c = counts.entry(root).or_insert(0usize);
            *c += 1;
            best = best.max(*c);
        }
    }
    best
}

/// One-sample Kolmogorov-Smirnov distance to Uniform(0, 1).
pub fn ks_distance_to_uniform(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut ks = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        let lo = (v - i as f64 / n).abs();
        let hi = ((i + 1) as f64 / n - v).abs();
        ks = ks.max(lo).max(hi);
    }
    ks
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j, mut ks) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let d = (i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs();
        ks = ks.max(d);
    }
    ks
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}
