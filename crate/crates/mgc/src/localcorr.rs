//! Local generalized correlations: one scale at a time, and all n^2 scales
//! at once.
//!
//! A scale `(k, l)` keeps the cells whose column rank in the first matrix is
//! below `k` and whose row rank in the second is below `l`; with the self
//! entry at rank 0, scale `(n, n)` is the full matrix and the local
//! correlation there is the global generalized correlation. Means and
//! standard deviations are always taken over all n^2 cells, masked-out zeros
//! included.
//!
//! [`all_local_corrs`] computes the whole map in O(n^2): each product is
//! deposited once at the cell addressed by its rank pair, a summed-area pass
//! turns the deposits into per-scale totals, and one normalization sweep
//! produces the correlations. The deposit pass runs in a fixed row-major
//! order so results are bit-reproducible.

use crate::centering::{CenteredMatrix, Scheme};
use crate::error::{Error, Result};
use crate::geometry::RankMatrix;
use crate::mat::Mat;

/// The n x n grid of local correlations, indexed by scales `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCorrMap {
    corr: Mat,
    n: usize,
    scheme_pair: (Scheme, Scheme),
}

impl LocalCorrMap {
    /// Wraps an existing grid, e.g. one loaded back from disk.
    pub fn from_grid(corr: Mat, scheme_pair: (Scheme, Scheme)) -> Result<Self> {
        if corr.rows() != corr.cols() {
            return Err(Error::Shape("correlation map must be square".into()));
        }
        let n = corr.rows();
        Ok(LocalCorrMap {
            corr,
            n,
            scheme_pair,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scheme_pair(&self) -> (Scheme, Scheme) {
        self.scheme_pair
    }

    /// Local correlation at scale `(k, l)`, `1 <= k, l <= n`.
    #[inline]
    pub fn at(&self, k: usize, l: usize) -> f64 {
        self.corr[(k - 1, l - 1)]
    }

    /// The global entry `corr[n][n]`.
    pub fn global(&self) -> f64 {
        self.at(self.n, self.n)
    }

    /// Raw grid, row index = k - 1, column index = l - 1.
    pub fn grid(&self) -> &Mat {
        &self.corr
    }
}

fn check_shapes(
    a: &CenteredMatrix,
    b: &CenteredMatrix,
    ra: &RankMatrix,
    rb: &RankMatrix,
) -> Result<usize> {
    let n = a.n();
    if b.n() != n || ra.n() != n || rb.n() != n {
        return Err(Error::Shape(format!(
            "mismatched sizes: a={}, b={}, ra={}, rb={}",
            a.n(),
            b.n(),
            ra.n(),
            rb.n()
        )));
    }
    Ok(n)
}

/// Global generalized correlation of two centered matrices: the correlation
/// of their cells, `sum((a - mean a)(b - mean b)) / (n^2 sigma_a sigma_b)`.
/// Returns 0 when either variance vanishes.
pub fn global_corr(a: &CenteredMatrix, b: &CenteredMatrix) -> f64 {
    let n2 = (a.n() * a.n()) as f64;
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (&x, &y) in a.values().iter().zip(b.values().iter()) {
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    let cov = sab - sa * sb / n2;
    let var_a = saa - sa * sa / n2;
    let var_b = sbb - sb * sb / n2;
    if var_a <= 0.0 || var_b <= 0.0 {
        return 0.0;
    }
    cov / (var_a * var_b).sqrt()
}

/// Local generalized correlation at one scale, straight from the definition:
/// mask both matrices by their rank neighborhoods, then correlate the masked
/// cells (zeros included) over all n^2 positions.
pub fn local_corr_at_scale(
    a: &CenteredMatrix,
    b: &CenteredMatrix,
    ra: &RankMatrix,
    rb: &RankMatrix,
    k: usize,
    l: usize,
) -> Result<f64> {
    let n = check_shapes(a, b, ra, rb)?;
    if k < 1 || k > n || l < 1 || l > n {
        return Err(Error::Argument(format!(
            "scale ({k},{l}) out of range 1..={n}"
        )));
    }
    let n2 = (n * n) as f64;
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = if (ra.rank(i, j) as usize) < k {
                a.values()[(i, j)]
            } else {
                0.0
            };
            let y = if (rb.rank(i, j) as usize) < l {
                b.values()[(i, j)]
            } else {
                0.0
            };
            sa += x;
            sb += y;
            saa += x * x;
            sbb += y * y;
            sab += x * y;
        }
    }
    let cov = sab - sa * sb / n2;
    let var_a = saa - sa * sa / n2;
    let var_b = sbb - sb * sb / n2;
    if var_a <= 0.0 || var_b <= 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Per-scale running sums produced by the scatter and summed-area passes.
///
/// Index `u` holds the totals for scale `u + 1`: `cov[(u, v)]` is the sum of
/// `a_ij * b_ij` over cells inside the `(u+1, v+1)` neighborhood, and the
/// 1-d vectors hold the marginal sums of squares (`va`, `vb`) and plain sums
/// (`ea`, `eb`).
#[derive(Debug, Clone)]
pub struct LocalSums {
    pub cov: Mat,
    pub va: Vec<f64>,
    pub vb: Vec<f64>,
    pub ea: Vec<f64>,
    pub eb: Vec<f64>,
}

/// Scatter every cell's contributions at its rank pair, then accumulate with
/// first-row/first-column cumulative sums and 2-d inclusion-exclusion.
pub fn local_sums(
    a: &CenteredMatrix,
    b: &CenteredMatrix,
    ra: &RankMatrix,
    rb: &RankMatrix,
) -> Result<LocalSums> {
    let n = check_shapes(a, b, ra, rb)?;
    let mut cov = Mat::zeros(n, n);
    let mut va = vec![0.0; n];
    let mut vb = vec![0.0; n];
    let mut ea = vec![0.0; n];
    let mut eb = vec![0.0; n];

    for i in 0..n {
        for j in 0..n {
            let x = a.values()[(i, j)];
            let y = b.values()[(i, j)];
            let u = ra.rank(i, j) as usize;
            let v = rb.rank(i, j) as usize;
            cov[(u, v)] += x * y;
            va[u] += x * x;
            vb[v] += y * y;
            ea[u] += x;
            eb[v] += y;
        }
    }

    for u in 1..n {
        va[u] += va[u - 1];
        vb[u] += vb[u - 1];
        ea[u] += ea[u - 1];
        eb[u] += eb[u - 1];
        cov[(u, 0)] += cov[(u - 1, 0)];
        cov[(0, u)] += cov[(0, u - 1)];
    }
    for u in 1..n {
        for v in 1..n {
            let inc = cov[(u, v - 1)] + cov[(u - 1, v)] - cov[(u - 1, v - 1)];
            cov[(u, v)] += inc;
        }
    }

    Ok(LocalSums {
        cov,
        va,
        vb,
        ea,
        eb,
    })
}

/// All local correlations at once; cell `(k, l)` matches
/// [`local_corr_at_scale`] within accumulated rounding.
pub fn all_local_corrs(
    a: &CenteredMatrix,
    b: &CenteredMatrix,
    ra: &RankMatrix,
    rb: &RankMatrix,
) -> Result<LocalCorrMap> {
    let n = check_shapes(a, b, ra, rb)?;
    let sums = local_sums(a, b, ra, rb)?;
    let n2 = (n * n) as f64;
    let mut corr = sums.cov;
    for u in 0..n {
        let var_a = sums.va[u] - sums.ea[u] * sums.ea[u] / n2;
        for v in 0..n {
            let var_b = sums.vb[v] - sums.eb[v] * sums.eb[v] / n2;
            let c = corr[(u, v)] - sums.ea[u] * sums.eb[v] / n2;
            corr[(u, v)] = if var_a <= 0.0 || var_b <= 0.0 {
                0.0
            } else {
                c / (var_a * var_b).sqrt()
            };
        }
    }
    Ok(LocalCorrMap {
        corr,
        n,
        scheme_pair: (a.scheme(), b.scheme()),
    })
}
