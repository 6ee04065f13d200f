//! Multiscale graph correlation (MGC) dependence testing.
//!
//! Given paired samples (or precomputed distance matrices), this crate
//! computes the full grid of local generalized correlations over every
//! neighborhood scale, the smoothed-maximum MGC statistic with its optimal
//! scales, and permutation p-values. The classical global statistics the
//! multiscale construction generalizes (distance correlation, its unbiased
//! variant, Mantel, and a Gaussian-kernel Hsic) ship as comparators, along
//! with a Monte-Carlo power harness, a 20-distribution synthetic benchmark
//! suite, and Benjamini-Hochberg screening support.
//!
//! ```
//! use mgc::geometry::{pairwise_distances, Metric, SampleSet};
//! use mgc::inference::{permutation_test, MethodName, MethodSpec};
//! use mgc::mat::Mat;
//!
//! let x = SampleSet::new(Mat::from_rows(&[
//!     vec![0.1], vec![0.9], vec![1.8], vec![3.2], vec![4.1], vec![5.3],
//! ]))?;
//! let dx = pairwise_distances(&x, Metric::Euclidean)?;
//! let test = permutation_test(&MethodSpec::new(MethodName::Mgc), &dx, &dx, 99, 7, 1)?;
//! assert!(test.p_value.value <= 0.01);
//! # Ok::<(), mgc::Error>(())
//! ```

pub mod centering;
pub mod dataio;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod localcorr;
pub mod mat;
pub mod mgcstat;
pub mod rng;
pub mod synth;

#[cfg(feature = "testutil")]
pub mod testutil;

pub use error::{Error, Result};
