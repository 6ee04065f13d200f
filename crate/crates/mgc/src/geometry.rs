//! Pairwise comparison matrices and nearest-neighbor rank matrices.
//!
//! Distances (or kernel similarities) between all sample pairs are the raw
//! material for every statistic in this crate. Rank matrices record, per
//! column (or per row), how close each pair is: the diagonal self-entry gets
//! rank 0 and the remaining entries get ranks `1..n-1`, so a neighborhood of
//! size `k` is exactly the cells with rank below `k`. Ties are broken by
//! ascending index, which keeps every result reproducible on data with
//! repeated observations.

use crate::error::{Error, Result};
use crate::mat::Mat;

/// An n x p matrix of observations, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Mat,
}

impl SampleSet {
    /// Validates n >= 3, p >= 1, and finiteness of every entry.
    pub fn new(values: Mat) -> Result<Self> {
        if values.rows() < 3 {
            return Err(Error::Size(format!(
                "need at least 3 samples, got {}",
                values.rows()
            )));
        }
        if values.cols() < 1 {
            return Err(Error::Shape("samples need at least one dimension".into()));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite sample entry at row {}, column {}",
                bad / values.cols() + 1,
                bad % values.cols() + 1
            )));
        }
        Ok(SampleSet { values })
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn p(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }
}

/// Whether a comparison matrix holds distances or kernel similarities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonKind {
    Distance,
    KernelSimilarity,
}

/// Symmetric n x n pairwise comparison matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Mat,
    kind: ComparisonKind,
}

impl DistanceMatrix {
    /// Wraps a matrix that already satisfies the invariants: square,
    /// symmetric, finite, and (for distances) nonnegative with zero diagonal.
    pub fn new(values: Mat, kind: ComparisonKind) -> Result<Self> {
        if values.rows() != values.cols() {
            return Err(Error::Shape(format!(
                "comparison matrix must be square, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        let n = values.rows();
        for i in 0..n {
            for j in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Numeric(format!(
                        "non-finite comparison entry at ({i},{j})"
                    )));
                }
                if values[(j, i)] != v {
                    return Err(Error::Domain(format!(
                        "comparison matrix not symmetric at ({i},{j})"
                    )));
                }
            }
            if kind == ComparisonKind::Distance {
                if values[(i, i)] != 0.0 {
                    return Err(Error::Domain(format!("nonzero self-distance at ({i},{i})")));
                }
                if values.row(i).iter().any(|&v| v < 0.0) {
                    return Err(Error::Domain(format!("negative distance in row {i}")));
                }
            }
        }
        Ok(DistanceMatrix { values, kind })
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(values: Mat, kind: ComparisonKind) -> Self {
        DistanceMatrix { values, kind }
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn kind(&self) -> ComparisonKind {
        self.kind
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    /// Relabels samples: `out[i][j] = self[pi(i)][pi(j)]`.
    pub fn apply_permutation(&self, pi: &[usize]) -> Result<DistanceMatrix> {
        let n = self.n();
        check_permutation(pi, n)?;
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.values[(pi[i], pi[j])];
            }
        }
        Ok(DistanceMatrix {
            values: out,
            kind: self.kind,
        })
    }
}

pub(crate) fn check_permutation(pi: &[usize], n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::Argument(format!(
            "permutation length {} does not match n={n}",
            pi.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p >= n || seen[p] {
            return Err(Error::Argument("not a bijection on 0..n".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Distance metrics available for sample sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
}

/// All pairwise distances between the rows of `s`.
pub fn pairwise_distances(s: &SampleSet, metric: Metric) -> Result<DistanceMatrix> {
    let Metric::Euclidean = metric;
    let n = s.n();
    let mut values = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(s.row(i), s.row(j));
            if !d.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite distance between samples {i} and {j}"
                )));
            }
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    Ok(DistanceMatrix {
        values,
        kind: ComparisonKind::Distance,
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Gaussian kernel bandwidth: a fixed value or the median heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    MedianHeuristic,
}

/// Gaussian kernel matrix `exp(-d_ij^2 / (2 sigma^2))` over the rows of `s`.
pub fn gaussian_kernel_matrix(s: &SampleSet, bandwidth: Bandwidth) -> Result<DistanceMatrix> {
    let d = pairwise_distances(s, Metric::Euclidean)?;
    gaussian_kernel_from_distances(&d, bandwidth)
}

/// Gaussian kernel matrix derived from an existing distance matrix.
///
/// The median heuristic resolves sigma to the median of the strictly
/// positive pairwise distances; if every pairwise distance is zero the
/// bandwidth is degenerate and an error is returned.
pub fn gaussian_kernel_from_distances(
    d: &DistanceMatrix,
    bandwidth: Bandwidth,
) -> Result<DistanceMatrix> {
    if d.kind() == ComparisonKind::KernelSimilarity {
        return Err(Error::Argument(
            "input is already a kernel similarity matrix".into(),
        ));
    }
    let sigma = match bandwidth {
        Bandwidth::Fixed(s) if s > 0.0 => s,
        Bandwidth::Fixed(s) => {
            return Err(Error::Argument(format!(
                "bandwidth must be positive, got {s}"
            )))
        }
        Bandwidth::MedianHeuristic => median_positive_distance(d).ok_or_else(|| {
            Error::Domain("degenerate bandwidth: all pairwise distances are zero".into())
        })?,
    };
    let n = d.n();
    let denom = 2.0 * sigma * sigma;
    let mut values = Mat::zeros(n, n);
    for i in 0..n {
        values[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = (-d.values()[(i, j)].powi(2) / denom).exp();
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(DistanceMatrix {
        values,
        kind: ComparisonKind::KernelSimilarity,
    })
}

/// Median of the strictly positive upper-triangle distances, `None` if all
/// pairwise distances are zero. Even counts average the two middle values.
pub fn median_positive_distance(d: &DistanceMatrix) -> Option<f64> {
    let n = d.n();
    let mut pos: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = d.values()[(i, j)];
            if v > 0.0 {
                pos.push(v);
            }
        }
    }
    if pos.is_empty() {
        return None;
    }
    pos.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let m = pos.len();
    Some(if m % 2 == 1 {
        pos[m / 2]
    } else {
        0.5 * (pos[m / 2 - 1] + pos[m / 2])
    })
}

/// Orientation of a rank matrix: neighbors ranked within columns or rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    ByColumn,
    ByRow,
}

/// Integer nearest-neighbor ranks for every cell of a comparison matrix.
///
/// For `ByColumn`, column j holds rank 0 at the self entry (j,j) and ranks
/// `1..n-1` for the remaining cells, ascending by distance (descending by
/// similarity for kernel matrices), ties broken by ascending row index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    ranks: Vec<u32>,
    n: usize,
    orientation: Orientation,
}

impl RankMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    #[inline]
    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.ranks[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.ranks
    }

    /// Ranks of the permuted matrix, by index relabeling:
    /// `out.rank(i, j) = self.rank(pi(i), pi(j))`.
    ///
    /// Equals ranking the permuted matrix from scratch whenever the
    /// underlying comparisons are tie-free; with ties the two can disagree
    /// because the ascending-index tie rule sees different indices.
    pub fn relabel(&self, pi: &[usize]) -> Result<RankMatrix> {
        let n = self.n;
        check_permutation(pi, n)?;
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.ranks[pi[i] * n + pi[j]];
            }
        }
        Ok(RankMatrix {
            ranks: out,
            n,
            orientation: self.orientation,
        })
    }
}

/// Ranks each column of `d`; see [`RankMatrix`] for the conventions.
pub fn column_ranks(d: &DistanceMatrix) -> RankMatrix {
    let n = d.n();
    let descending = d.kind() == ComparisonKind::KernelSimilarity;
    let mut ranks = vec![0u32; n * n];
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for j in 0..n {
        order.clear();
        order.extend((0..n).filter(|&i| i != j));
        let values = d.values();
        if descending {
            order.sort_by(|&a, &b| {
                values[(b, j)]
                    .partial_cmp(&values[(a, j)])
                    .unwrap()
                    .then(a.cmp(&b))
            });
        } else {
            order.sort_by(|&a, &b| {
                values[(a, j)]
                    .partial_cmp(&values[(b, j)])
                    .unwrap()
                    .then(a.cmp(&b))
            });
        }
        ranks[j * n + j] = 0;
        for (r, &i) in order.iter().enumerate() {
            ranks[i * n + j] = (r + 1) as u32;
        }
    }
    RankMatrix {
        ranks,
        n,
        orientation: Orientation::ByColumn,
    }
}

/// Ranks each row of `d`; the row-wise mirror of [`column_ranks`].
pub fn row_ranks(d: &DistanceMatrix) -> RankMatrix {
    let n = d.n();
    let descending = d.kind() == ComparisonKind::KernelSimilarity;
    let mut ranks = vec![0u32; n * n];
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        let values = d.values();
        if descending {
            order.sort_by(|&a, &b| {
                values[(i, b)]
                    .partial_cmp(&values[(i, a)])
                    .unwrap()
                    .then(a.cmp(&b))
            });
        } else {
            order.sort_by(|&a, &b| {
                values[(i, a)]
                    .partial_cmp(&values[(i, b)])
                    .unwrap()
                    .then(a.cmp(&b))
            });
        }
        ranks[i * n + i] = 0;
        for (r, &j) in order.iter().enumerate() {
            ranks[i * n + j] = (r + 1) as u32;
        }
    }
    RankMatrix {
        ranks,
        n,
        orientation: Orientation::ByRow,
    }
}
