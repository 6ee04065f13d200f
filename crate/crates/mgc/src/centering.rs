//! Centering schemes that turn raw comparison matrices into the centered
//! matrices behind each generalized correlation.
//!
//! Every scheme is computed on the full matrix first and the diagonal is
//! zeroed afterwards, in that fixed order. Row, column, and grand means for
//! `Double` and `Single*` are taken over all n (or n^2) entries including
//! the zero diagonal; `Unbiased` uses the n-2 / (n-1)(n-2) denominators that
//! make the resulting global correlation mean-zero under independence.

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::mat::Mat;

/// The centering scheme menu.
///
/// `Simple` backs Mantel, `Double` backs Dcorr and Hsic, `Unbiased` backs
/// Mcorr, and the `Single*` pair is the column/row-only variant used by the
/// one-sided transform option.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Simple,
    Double,
    Unbiased,
    SingleColumn,
    SingleRow,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Simple => "simple",
            Scheme::Double => "double",
            Scheme::Unbiased => "unbiased",
            Scheme::SingleColumn => "single-column",
            Scheme::SingleRow => "single-row",
        }
    }
}

/// A comparison matrix after centering; diagonal is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix {
    values: Mat,
    scheme: Scheme,
    exclude_diagonal: bool,
}

impl CenteredMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn exclude_diagonal(&self) -> bool {
        self.exclude_diagonal
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    /// Wraps arbitrary values for direct use with the local-correlation
    /// routines; callers are responsible for any invariants they need.
    pub fn from_raw(values: Mat, scheme: Scheme) -> Result<Self> {
        if values.rows() != values.cols() {
            return Err(Error::Shape("centered matrix must be square".into()));
        }
        Ok(CenteredMatrix {
            values,
            scheme,
            exclude_diagonal: scheme == Scheme::Unbiased,
        })
    }

    /// Relabels samples: `out[i][j] = self[pi(i)][pi(j)]`.
    pub fn apply_permutation(&self, pi: &[usize]) -> Result<CenteredMatrix> {
        let n = self.n();
        crate::geometry::check_permutation(pi, n)?;
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.values[(pi[i], pi[j])];
            }
        }
        Ok(CenteredMatrix {
            values: out,
            scheme: self.scheme,
            exclude_diagonal: self.exclude_diagonal,
        })
    }
}

/// Centers `d` under `scheme`.
pub fn center(d: &DistanceMatrix, scheme: Scheme) -> Result<CenteredMatrix> {
    let mut values = center_full(d, scheme)?;
    let n = values.rows();
    for i in 0..n {
        values[(i, i)] = 0.0;
    }
    Ok(CenteredMatrix {
        values,
        scheme,
        exclude_diagonal: scheme == Scheme::Unbiased,
    })
}

/// The centering intermediate before the diagonal is zeroed.
pub(crate) fn center_full(d: &DistanceMatrix, scheme: Scheme) -> Result<Mat> {
    let n = d.n();
    let src = d.values();
    let nf = n as f64;

    if scheme == Scheme::Unbiased && n < 4 {
        return Err(Error::Size(format!(
            "unbiased centering needs n >= 4, got {n}"
        )));
    }

    let mut row_sums = vec![0.0; n];
    let mut col_sums = vec![0.0; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = src[(i, j)];
            row_sums[i] += v;
            col_sums[j] += v;
            total += v;
        }
    }

    let mut out = Mat::zeros(n, n);
    match scheme {
        Scheme::Simple => {
            let off_diag_mean = {
                let diag: f64 = (0..n).map(|i| src[(i, i)]).sum();
                (total - diag) / (nf * (nf - 1.0))
            };
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = src[(i, j)] - off_diag_mean;
                }
            }
        }
        Scheme::Double => {
            let grand = total / (nf * nf);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = src[(i, j)] - row_sums[i] / nf - col_sums[j] / nf + grand;
                }
            }
        }
        Scheme::Unbiased => {
            let grand = total / ((nf - 1.0) * (nf - 2.0));
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] =
                        src[(i, j)] - row_sums[i] / (nf - 2.0) - col_sums[j] / (nf - 2.0) + grand;
                }
            }
        }
        Scheme::SingleColumn => {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = src[(i, j)] - col_sums[j] / nf;
                }
            }
        }
        Scheme::SingleRow => {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = src[(i, j)] - row_sums[i] / nf;
                }
            }
        }
    }
    Ok(out)
}
