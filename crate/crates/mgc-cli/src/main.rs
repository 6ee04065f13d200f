//! Command-line surface for the mgc library.
//!
//! Subcommands: `test` (permutation test on two inputs), `map` (local
//! correlation map export), `power` (Monte-Carlo power estimation),
//! `samplesize` (smallest n reaching a power target), `simulate` (benchmark
//! dependency sampling), and `screen` (per-feature tests with FDR control).
//!
//! Exit codes: 0 success, 2 usage or input error, 1 internal error. With
//! `--out`, results go to the file and stdout stays silent.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mgc::dataio::{
    load_distance_matrix, load_samples, load_table, write_map_grid, write_result, write_samples,
    ResultDocument,
};
use mgc::geometry::{pairwise_distances, ComparisonKind, DistanceMatrix, Metric};
use mgc::inference::{
    adjust_pvalues_bh, estimate_power, permutation_test, sample_size_for_power, MethodName,
    MethodSpec,
};
use mgc::mat::Mat;
use mgc::mgcstat::mgc_from_distances;
use mgc::rng::{substream_key, tag};
use mgc::synth::{default_kappa, sample_dependency, simulation_name, SimulationSpec};

#[derive(Parser)]
#[command(
    name = "mgc",
    version,
    about = "Multiscale graph correlation dependence testing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permutation test of independence between two inputs.
    Test(TestArgs),
    /// Compute and export the full local correlation map.
    Map(MapArgs),
    /// Monte-Carlo power estimation against a benchmark dependency.
    Power(PowerArgs),
    /// Smallest sample size reaching a target power.
    Samplesize(SamplesizeArgs),
    /// Draw samples from a benchmark dependency.
    Simulate(SimulateArgs),
    /// Per-feature dependence screening with FDR control.
    Screen(ScreenArgs),
}

#[derive(Args)]
struct InputArgs {
    /// First input file (samples, or a distance matrix with --dist).
    #[arg(long)]
    x: PathBuf,
    /// Second input file.
    #[arg(long)]
    y: PathBuf,
    /// Treat inputs as precomputed distance matrices.
    #[arg(long)]
    dist: bool,
    /// Skip the first row of each input file.
    #[arg(long)]
    header: bool,
    /// Cell delimiter.
    #[arg(long, default_value = ",")]
    delim: char,
}

impl InputArgs {
    fn load(&self) -> mgc::Result<(DistanceMatrix, DistanceMatrix)> {
        let load_one = |path: &Path| -> mgc::Result<DistanceMatrix> {
            if self.dist {
                load_distance_matrix(path, self.delim, self.header)
            } else {
                let samples = load_samples(path, self.delim, self.header)?;
                pairwise_distances(&samples, Metric::Euclidean)
            }
        };
        let dx = load_one(&self.x)?;
        let dy = load_one(&self.y)?;
        if dx.n() != dy.n() {
            return Err(mgc::Error::Shape(format!(
                "sample counts differ: {} has {}, {} has {}",
                self.x.display(),
                dx.n(),
                self.y.display(),
                dy.n()
            )));
        }
        Ok((dx, dy))
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Test statistic.
    #[arg(long, default_value = "mgc")]
    method: String,
    /// Number of permutations.
    #[arg(long, default_value_t = 1000)]
    perms: usize,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the local correlation map in the output document.
    #[arg(long)]
    emit_map: bool,
    /// Worker threads for the permutation loop.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output path for the result document (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Multiscale method backing the map (mgc or mgc-mantel).
    #[arg(long, default_value = "mgc")]
    method: String,
    /// Output path for the result document (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the raw map grid as delimited text.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    /// Benchmark dependency id (1-20).
    #[arg(long)]
    sim: u32,
    /// Sample size per replicate.
    #[arg(long)]
    n: usize,
    /// Dimension of X.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Noise level; defaults to 1 in one dimension and 0 otherwise.
    #[arg(long)]
    kappa: Option<f64>,
    /// Comma-separated list of methods.
    #[arg(long, default_value = "mgc")]
    method: String,
    /// Monte-Carlo replicates.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Type 1 error level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SamplesizeArgs {
    /// Benchmark dependency id (1-20).
    #[arg(long)]
    sim: u32,
    /// Dimension of X.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value = "mgc")]
    method: String,
    /// Target power to reach.
    #[arg(long, default_value_t = 0.85)]
    target: f64,
    /// Ascending comma-separated sample size grid.
    #[arg(long, default_value = "10,20,30,40,50,60,70,80,90,100,110,120")]
    grid: String,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Benchmark dependency id (1-20).
    #[arg(long)]
    sim: u32,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the X samples.
    #[arg(long)]
    x: PathBuf,
    /// Output path for the Y samples.
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value = ",")]
    delim: char,
}

#[derive(Args)]
struct ScreenArgs {
    /// Feature matrix file, one row per sample, one column per feature.
    #[arg(long)]
    features: PathBuf,
    /// Binary label file, one 0/1 value per sample.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "mgc")]
    method: String,
    #[arg(long, default_value_t = 1000)]
    perms: usize,
    /// False discovery rate level.
    #[arg(long, default_value_t = 0.05)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value = ",")]
    delim: char,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad input or arguments: exit 2.
    Input(String),
    /// Internal failure: exit 1.
    Internal(String),
}

impl From<mgc::Error> for CliError {
    fn from(e: mgc::Error) -> Self {
        match e {
            mgc::Error::Numeric(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Map(args) => cmd_map(args),
        Command::Power(args) => cmd_power(args),
        Command::Samplesize(args) => cmd_samplesize(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Screen(args) => cmd_screen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_method(name: &str) -> Result<MethodSpec, CliError> {
    Ok(MethodSpec::new(MethodName::from_str(name)?))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_result(doc: &ResultDocument, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => Ok(write_result(doc, path)?),
        None => {
            let text =
                serde_json::to_string_pretty(doc).map_err(|e| CliError::Internal(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    let multiscale = matches!(method.name, MethodName::Mgc | MethodName::MgcMantel);
    if args.emit_map && !multiscale {
        return Err(CliError::Input(
            "--emit-map requires a multiscale method (mgc, mgc-mantel)".into(),
        ));
    }
    if args.perms < 1 {
        return Err(CliError::Input("--perms must be at least 1".into()));
    }
    let (dx, dy) = args.input.load()?;
    let test = permutation_test(&method, &dx, &dy, args.perms, args.seed, args.workers)?;

    let n = dx.n();
    let (optimal_scales, canonical_scale, threshold) = match &test.observation.selection {
        Some(sel) => (
            sel.optimal_scales.clone(),
            sel.canonical_scale,
            Some(sel.threshold),
        ),
        None => (vec![(n, n)], (n, n), None),
    };
    let doc = ResultDocument {
        method: method.name.as_str().to_string(),
        statistic: test.observation.statistic,
        p_value: Some(test.p_value.value),
        optimal_scales,
        canonical_scale,
        threshold,
        num_permutations: test.p_value.num_permutations,
        seed: args.seed,
        map: if args.emit_map {
            test.observation.map.as_ref().map(|m| m.grid().to_nested())
        } else {
            None
        },
    };
    emit_result(&doc, args.out.as_deref())
}

fn cmd_map(args: MapArgs) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    let config = match method.name {
        MethodName::Mgc => mgc::mgcstat::MgcConfig::unbiased(),
        MethodName::MgcMantel => mgc::mgcstat::MgcConfig::mantel(),
        other => {
            return Err(CliError::Input(format!(
                "map requires a multiscale method (mgc, mgc-mantel), got {}",
                other.as_str()
            )))
        }
    };
    let (dx, dy) = args.input.load()?;
    let (selection, map) = mgc_from_distances(&dx, &dy, &config)?;
    if let Some(grid_path) = &args.grid_out {
        write_map_grid(&map, grid_path, args.input.delim)?;
    }
    let doc = ResultDocument {
        method: method.name.as_str().to_string(),
        statistic: selection.statistic,
        p_value: None,
        optimal_scales: selection.optimal_scales.clone(),
        canonical_scale: selection.canonical_scale,
        threshold: Some(selection.threshold),
        num_permutations: 0,
        seed: 0,
        map: Some(map.grid().to_nested()),
    };
    emit_result(&doc, args.out.as_deref())
}

#[derive(Serialize)]
struct PowerRecord {
    method: String,
    sim: u32,
    sim_name: String,
    n: usize,
    dim: usize,
    kappa: f64,
    alpha: f64,
    num_replicates: usize,
    power: f64,
    critical_value: f64,
    standard_error: f64,
    seed: u64,
}

fn cmd_power(args: PowerArgs) -> Result<(), CliError> {
    let kappa = args.kappa.unwrap_or_else(|| default_kappa(args.dim));
    let sim = SimulationSpec::new(args.sim, args.n, args.dim, kappa, args.seed)?;
    let mut records = Vec::new();
    for name in args.method.split(',') {
        let method = parse_method(name.trim())?;
        let est = estimate_power(&sim, &method, args.reps, args.alpha, args.workers)?;
        records.push(PowerRecord {
            method: method.name.as_str().to_string(),
            sim: args.sim,
            sim_name: simulation_name(args.sim).to_string(),
            n: args.n,
            dim: args.dim,
            kappa,
            alpha: args.alpha,
            num_replicates: est.num_replicates,
            power: est.power,
            critical_value: est.critical_value,
            standard_error: est.standard_error,
            seed: args.seed,
        });
    }
    emit_json(&records, args.out.as_deref())
}

#[derive(Serialize)]
struct SampleSizeRecord {
    method: String,
    sim: u32,
    sim_name: String,
    dim: usize,
    kappa: f64,
    target: f64,
    alpha: f64,
    grid: Vec<usize>,
    num_replicates: usize,
    /// Smallest grid size reaching the target, null when never reached.
    sample_size: Option<usize>,
    reached: bool,
    seed: u64,
}

fn cmd_samplesize(args: SamplesizeArgs) -> Result<(), CliError> {
    let kappa = args.kappa.unwrap_or_else(|| default_kappa(args.dim));
    let method = parse_method(&args.method)?;
    let grid: Vec<usize> = args
        .grid
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad grid entry '{}'", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    // n is swept over the grid; the placeholder is overwritten per step.
    let sim = SimulationSpec::new(
        args.sim,
        grid.first().copied().unwrap_or(3),
        args.dim,
        kappa,
        args.seed,
    )?;
    let found = sample_size_for_power(
        &sim,
        &method,
        args.target,
        args.alpha,
        &grid,
        args.reps,
        args.workers,
    )?;
    let record = SampleSizeRecord {
        method: method.name.as_str().to_string(),
        sim: args.sim,
        sim_name: simulation_name(args.sim).to_string(),
        dim: args.dim,
        kappa,
        target: args.target,
        alpha: args.alpha,
        grid,
        num_replicates: args.reps,
        sample_size: found,
        reached: found.is_some(),
        seed: args.seed,
    };
    emit_json(&record, args.out.as_deref())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let kappa = args.kappa.unwrap_or_else(|| default_kappa(args.dim));
    let sim = SimulationSpec::new(args.sim, args.n, args.dim, kappa, args.seed)?;
    let pair = sample_dependency(&sim)?;
    write_samples(&pair.x, &args.x, args.delim)?;
    write_samples(&pair.y, &args.y, args.delim)?;
    Ok(())
}

#[derive(Serialize)]
struct FeatureRecord {
    /// 1-based feature column.
    feature: usize,
    p_value: f64,
    adjusted_p: f64,
    reject: bool,
}

#[derive(Serialize)]
struct ScreenDocument {
    method: String,
    q: f64,
    num_permutations: usize,
    num_features: usize,
    num_rejected: usize,
    seed: u64,
    features: Vec<FeatureRecord>,
}

fn cmd_screen(args: ScreenArgs) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    if args.perms < 1 {
        return Err(CliError::Input("--perms must be at least 1".into()));
    }
    if !(args.q > 0.0 && args.q < 1.0) {
        return Err(CliError::Input(format!(
            "--q must be in (0,1), got {}",
            args.q
        )));
    }
    let features = load_table(&args.features, args.delim, args.header)?;
    let labels_table = load_table(&args.labels, args.delim, args.header)?;
    if labels_table.cols() != 1 {
        return Err(CliError::Input(format!(
            "label file must have one column, got {}",
            labels_table.cols()
        )));
    }
    let labels: Vec<f64> = labels_table.as_slice().to_vec();
    if labels.iter().any(|&l| l != 0.0 && l != 1.0) {
        return Err(CliError::Input("labels must be 0 or 1".into()));
    }
    let n = features.rows();
    if labels.len() != n {
        return Err(CliError::Input(format!(
            "feature rows ({n}) do not match label count ({})",
            labels.len()
        )));
    }

    // 0/1 mismatch distances on the labels, shared across features.
    let mut label_dist = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if labels[i] != labels[j] {
                label_dist[(i, j)] = 1.0;
            }
        }
    }
    let dy = DistanceMatrix::new(label_dist, ComparisonKind::Distance)?;

    let m = features.cols();
    let pvals: Vec<Result<f64, mgc::Error>> = mgc::rng::run_indexed(m, args.workers, |j| {
        let column: Vec<Vec<f64>> = (0..n).map(|i| vec![features[(i, j)]]).collect();
        let sample = mgc::geometry::SampleSet::new(Mat::from_rows(&column))?;
        let dx = pairwise_distances(&sample, Metric::Euclidean)?;
        let feature_seed = substream_key(args.seed, &[tag::SCREEN_FEATURE, j as u64]);
        let test = permutation_test(&method, &dx, &dy, args.perms, feature_seed, 1)?;
        Ok(test.p_value.value)
    });
    let pvals: Vec<f64> = pvals.into_iter().collect::<Result<_, _>>()?;

    let bh = adjust_pvalues_bh(&pvals, args.q)?;
    let features_out: Vec<FeatureRecord> = (0..m)
        .map(|j| FeatureRecord {
            feature: j + 1,
            p_value: pvals[j],
            adjusted_p: bh.adjusted[j],
            reject: bh.reject[j],
        })
        .collect();
    let doc = ScreenDocument {
        method: method.name.as_str().to_string(),
        q: args.q,
        num_permutations: args.perms,
        num_features: m,
        num_rejected: bh.reject.iter().filter(|&&r| r).count(),
        seed: args.seed,
        features: features_out,
    };
    emit_json(&doc, args.out.as_deref())
}
