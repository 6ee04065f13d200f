//! Permutation inference, comparator statistics, Monte-Carlo power
//! estimation, sample-size search, and false-discovery-rate adjustment.
//!
//! All replicated work (permutations, power trials) derives one random
//! substream per replicate index, so every result is bitwise identical for
//! any worker count given the same seed.

use crate::centering::{center, Scheme};
use crate::error::{Error, Result};
use crate::geometry::{
    column_ranks, gaussian_kernel_from_distances, row_ranks, Bandwidth, ComparisonKind,
    DistanceMatrix, Metric,
};
use crate::localcorr::{all_local_corrs, global_corr, LocalCorrMap};
use crate::mgcstat::{mgc_statistic, MgcConfig, ScaleSelection};
use crate::rng::{run_indexed, substream_key, tag, Stream};
use crate::synth::{sample_dependency, sample_null, SimulationSpec};

/// The implemented test statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodName {
    Mgc,
    MgcMantel,
    Dcorr,
    Mcorr,
    Mantel,
    Hsic,
}

impl MethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Mgc => "mgc",
            MethodName::MgcMantel => "mgc-mantel",
            MethodName::Dcorr => "dcorr",
            MethodName::Mcorr => "mcorr",
            MethodName::Mantel => "mantel",
            MethodName::Hsic => "hsic",
        }
    }
}

impl std::str::FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mgc" => Ok(MethodName::Mgc),
            "mgc-mantel" => Ok(MethodName::MgcMantel),
            "dcorr" => Ok(MethodName::Dcorr),
            "mcorr" => Ok(MethodName::Mcorr),
            "mantel" => Ok(MethodName::Mantel),
            "hsic" => Ok(MethodName::Hsic),
            other => Err(Error::Argument(format!(
                "unknown method '{other}' (expected mgc, mgc-mantel, dcorr, mcorr, mantel, hsic)"
            ))),
        }
    }
}

/// A method plus its configuration. The centering scheme pair follows from
/// the name; only the kernel bandwidth (Hsic) is tunable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    pub name: MethodName,
    pub kernel_bandwidth: Bandwidth,
}

impl MethodSpec {
    pub fn new(name: MethodName) -> Self {
        MethodSpec {
            name,
            kernel_bandwidth: Bandwidth::MedianHeuristic,
        }
    }

    /// Centering for the two sides of the statistic.
    pub fn scheme(&self) -> Scheme {
        match self.name {
            MethodName::Mgc | MethodName::Mcorr => Scheme::Unbiased,
            MethodName::MgcMantel | MethodName::Mantel => Scheme::Simple,
            MethodName::Dcorr | MethodName::Hsic => Scheme::Double,
        }
    }

    fn is_multiscale(&self) -> bool {
        matches!(self.name, MethodName::Mgc | MethodName::MgcMantel)
    }

    fn mgc_config(&self) -> MgcConfig {
        match self.name {
            MethodName::MgcMantel => MgcConfig::mantel(),
            _ => MgcConfig::unbiased(),
        }
    }
}

/// The observed statistic, with the scale selection and map for the
/// multiscale methods.
#[derive(Debug, Clone)]
pub struct Observation {
    pub statistic: f64,
    pub selection: Option<ScaleSelection>,
    pub map: Option<LocalCorrMap>,
}

/// Turns comparison inputs into the matrices a method actually consumes:
/// Hsic exponentiates distances into Gaussian kernels, everything else runs
/// on distances directly. Kernel inputs are passed through untouched.
fn prepare_input(method: &MethodSpec, d: &DistanceMatrix) -> Result<DistanceMatrix> {
    if method.name == MethodName::Hsic && d.kind() == ComparisonKind::Distance {
        gaussian_kernel_from_distances(d, method.kernel_bandwidth)
    } else {
        Ok(d.clone())
    }
}

/// Computes the observed statistic (and scale selection for the multiscale
/// methods).
pub fn observed(
    method: &MethodSpec,
    da: &DistanceMatrix,
    db: &DistanceMatrix,
) -> Result<Observation> {
    if da.n() != db.n() {
        return Err(Error::Shape(format!(
            "sample counts differ: {} vs {}",
            da.n(),
            db.n()
        )));
    }
    if method.is_multiscale() {
        let (selection, map) = crate::mgcstat::mgc_from_distances(da, db, &method.mgc_config())?;
        return Ok(Observation {
            statistic: selection.statistic,
            selection: Some(selection),
            map: Some(map),
        });
    }
    let ka = prepare_input(method, da)?;
    let kb = prepare_input(method, db)?;
    let a = center(&ka, method.scheme())?;
    let b = center(&kb, method.scheme())?;
    Ok(Observation {
        statistic: global_corr(&a, &b),
        selection: None,
        map: None,
    })
}

/// The statistic value alone.
pub fn statistic(method: &MethodSpec, da: &DistanceMatrix, db: &DistanceMatrix) -> Result<f64> {
    Ok(observed(method, da, db)?.statistic)
}

/// Upper-tail permutation p-value with add-one smoothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue {
    pub value: f64,
    pub num_permutations: usize,
    /// Count of permuted statistics at least as large as the observed one.
    pub num_ge: usize,
}

impl PValue {
    fn from_counts(num_ge: usize, num_permutations: usize) -> Self {
        PValue {
            value: (num_ge as f64 + 1.0) / (num_permutations as f64 + 1.0),
            num_permutations,
            num_ge,
        }
    }
}

/// Result of a permutation test.
#[derive(Debug, Clone)]
pub struct PermutationTest {
    pub observation: Observation,
    pub p_value: PValue,
}

/// Permutation test for any method: the second input is relabeled by `r`
/// seeded permutations and the observed statistic is compared against the
/// permuted ones. The permuted side reuses the one-time centering and
/// ranking via index relabeling rather than recomputing from scratch.
pub fn permutation_test(
    method: &MethodSpec,
    da: &DistanceMatrix,
    db: &DistanceMatrix,
    r: usize,
    seed: u64,
    workers: usize,
) -> Result<PermutationTest> {
    if r < 1 {
        return Err(Error::Argument("need at least one permutation".into()));
    }
    if da.n() != db.n() {
        return Err(Error::Shape(format!(
            "sample counts differ: {} vs {}",
            da.n(),
            db.n()
        )));
    }
    let n = da.n();

    if method.is_multiscale() {
        let config = method.mgc_config();
        let a = center(da, config.scheme_a)?;
        let b = center(db, config.scheme_b)?;
        let ra = column_ranks(da);
        let rb = row_ranks(db);
        let map = all_local_corrs(&a, &b, &ra, &rb)?;
        let selection = mgc_statistic(&map);
        let observed_stat = selection.statistic;

        let perm_stats: Vec<Result<f64>> = run_indexed(r, workers, |t| {
            let mut stream = Stream::new(seed, &[tag::PERMUTATION, t as u64]);
            let pi = stream.permutation(n);
            let b_perm = b.apply_permutation(&pi)?;
            let rb_perm = rb.relabel(&pi)?;
            let map = all_local_corrs(&a, &b_perm, &ra, &rb_perm)?;
            Ok(mgc_statistic(&map).statistic)
        });
        let num_ge = count_ge(perm_stats, observed_stat)?;
        return Ok(PermutationTest {
            observation: Observation {
                statistic: observed_stat,
                selection: Some(selection),
                map: Some(map),
            },
            p_value: PValue::from_counts(num_ge, r),
        });
    }

    let ka = prepare_input(method, da)?;
    let kb = prepare_input(method, db)?;
    let a = center(&ka, method.scheme())?;
    let b = center(&kb, method.scheme())?;
    let observed_stat = global_corr(&a, &b);

    let perm_stats: Vec<Result<f64>> = run_indexed(r, workers, |t| {
        let mut stream = Stream::new(seed, &[tag::PERMUTATION, t as u64]);
        let pi = stream.permutation(n);
        let b_perm = b.apply_permutation(&pi)?;
        Ok(global_corr(&a, &b_perm))
    });
    let num_ge = count_ge(perm_stats, observed_stat)?;
    Ok(PermutationTest {
        observation: Observation {
            statistic: observed_stat,
            selection: None,
            map: None,
        },
        p_value: PValue::from_counts(num_ge, r),
    })
}

fn count_ge(stats: Vec<Result<f64>>, observed: f64) -> Result<usize> {
    let mut num_ge = 0;
    for s in stats {
        if s? >= observed {
            num_ge += 1;
        }
    }
    Ok(num_ge)
}

/// Monte-Carlo power estimate at a fixed type 1 error level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub power: f64,
    pub alpha: f64,
    /// Empirical (1 - alpha) quantile of the null statistics.
    pub critical_value: f64,
    pub num_replicates: usize,
    pub standard_error: f64,
}

/// Estimates testing power against the given dependency: draws `r` null
/// replicates (both marginals re-drawn independently) and `r` alternative
/// replicates (joint draws), takes the empirical `(1 - alpha)` quantile of
/// the null statistics as the critical value, and counts the alternative
/// statistics that exceed it strictly.
pub fn estimate_power(
    sim: &SimulationSpec,
    method: &MethodSpec,
    r: usize,
    alpha: f64,
    workers: usize,
) -> Result<PowerEstimate> {
    if r < 1 {
        return Err(Error::Argument("need at least one replicate".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }

    let pairs: Vec<Result<(f64, f64)>> = run_indexed(r, workers, |t| {
        let trial = SimulationSpec {
            seed: substream_key(sim.seed, &[tag::POWER_TRIAL, t as u64]),
            ..*sim
        };
        let null = sample_null(&trial)?;
        let alt = sample_dependency(&trial)?;
        let stat_of = |pair: &crate::synth::SamplePair| -> Result<f64> {
            let dx = crate::geometry::pairwise_distances(&pair.x, Metric::Euclidean)?;
            let dy = crate::geometry::pairwise_distances(&pair.y, Metric::Euclidean)?;
            statistic(method, &dx, &dy)
        };
        Ok((stat_of(&null)?, stat_of(&alt)?))
    });

    let mut null_stats = Vec::with_capacity(r);
    let mut alt_stats = Vec::with_capacity(r);
    for p in pairs {
        let (null, alt) = p?;
        null_stats.push(null);
        alt_stats.push(alt);
    }

    // Empirical quantile: the ceil((1 - alpha) r)-th order statistic.
    null_stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (((1.0 - alpha) * r as f64).ceil() as usize).clamp(1, r);
    let critical_value = null_stats[rank - 1];

    let rejections = alt_stats.iter().filter(|&&s| s > critical_value).count();
    let power = rejections as f64 / r as f64;
    Ok(PowerEstimate {
        power,
        alpha,
        critical_value,
        num_replicates: r,
        standard_error: (power * (1.0 - power) / r as f64).sqrt(),
    })
}

/// Smallest sample size in `n_grid` reaching `target` power, or `None`.
pub fn sample_size_for_power(
    sim: &SimulationSpec,
    method: &MethodSpec,
    target: f64,
    alpha: f64,
    n_grid: &[usize],
    r: usize,
    workers: usize,
) -> Result<Option<usize>> {
    if n_grid.is_empty() {
        return Err(Error::Argument("sample size grid is empty".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("sample size grid must be ascending".into()));
    }
    for &n in n_grid {
        let est = estimate_power(&SimulationSpec { n, ..*sim }, method, r, alpha, workers)?;
        if est.power >= target {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Benjamini-Hochberg step-up adjustment at level `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BhAdjustment {
    pub reject: Vec<bool>,
    pub adjusted: Vec<f64>,
}

pub fn adjust_pvalues_bh(pvals: &[f64], q: f64) -> Result<BhAdjustment> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Argument(format!("q must be in (0,1), got {q}")));
    }
    for (i, &p) in pvals.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "p-value {p} at index {i} outside [0,1]"
            )));
        }
    }
    let m = pvals.len();
    if m == 0 {
        return Ok(BhAdjustment {
            reject: Vec::new(),
            adjusted: Vec::new(),
        });
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].partial_cmp(&pvals[b]).unwrap().then(a.cmp(&b)));

    // Adjusted values: m p_(i) / i, then a running minimum from the right.
    let mut adjusted_sorted = vec![0.0; m];
    let mut running = f64::INFINITY;
    for i in (0..m).rev() {
        let raw = pvals[order[i]] * m as f64 / (i + 1) as f64;
        running = running.min(raw);
        adjusted_sorted[i] = running.min(1.0);
    }

    // Step-up: largest i with p_(i) <= i q / m rejects everything below it.
    let mut cutoff = None;
    for i in (0..m).rev() {
        if pvals[order[i]] <= (i + 1) as f64 * q / m as f64 {
            cutoff = Some(i);
            break;
        }
    }

    let mut reject = vec![false; m];
    let mut adjusted = vec![0.0; m];
    for (i, &idx) in order.iter().enumerate() {
        adjusted[idx] = adjusted_sorted[i];
        reject[idx] = cutoff.is_some_and(|c| i <= c);
    }
    Ok(BhAdjustment { reject, adjusted })
}
