//! Samplers for the 20 benchmark dependencies and their independent nulls.
//!
//! Each simulation is implemented exactly as printed in its defining
//! formulas, including per-simulation noise scalings that are not gated by
//! the noise parameter kappa (the step function's additive noise, the
//! spiral's `0.4 p`, the sine variants' `0.02 p` jitter, and simulations 19
//! and 20, which have no noise parameter at all). `w` is the decaying weight
//! vector `w_d = 1/d`.
//!
//! Draw order is frozen so that a seed fully determines the output: samples
//! are generated row by row, and within a row the draws are the auxiliary
//! variables in the order the formulas introduce them, then the X value
//! draws per dimension (with any X noise immediately after each block), then
//! the Y noise. One normal draw always consumes two uniforms (see
//! [`crate::rng::Stream::standard_normal`]).

use crate::error::{Error, Result};
use crate::geometry::SampleSet;
use crate::mat::Mat;
use crate::rng::{tag, Stream};

/// Identifies one of the 20 benchmark dependencies at a given size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSpec {
    pub sim_id: u32,
    pub n: usize,
    pub p: usize,
    pub kappa: f64,
    pub seed: u64,
}

/// One joint draw of paired samples; row i of `x` and `y` belong together.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub x: SampleSet,
    pub y: SampleSet,
}

/// Simulations whose Y has the same dimension as X; the rest are scalar.
const VECTOR_Y_SIMS: [u32; 8] = [4, 10, 12, 13, 14, 18, 19, 20];

impl SimulationSpec {
    pub fn new(sim_id: u32, n: usize, p: usize, kappa: f64, seed: u64) -> Result<Self> {
        if !(1..=20).contains(&sim_id) {
            return Err(Error::Argument(format!(
                "simulation id must be in 1..=20, got {sim_id}"
            )));
        }
        if p < 1 {
            return Err(Error::Argument("dimension p must be at least 1".into()));
        }
        if kappa.is_nan() || kappa < 0.0 {
            return Err(Error::Argument(format!(
                "noise level kappa must be nonnegative, got {kappa}"
            )));
        }
        Ok(SimulationSpec {
            sim_id,
            n,
            p,
            kappa,
            seed,
        })
    }

    /// Dimension of Y for this simulation.
    pub fn q(&self) -> usize {
        if VECTOR_Y_SIMS.contains(&self.sim_id) {
            self.p
        } else {
            1
        }
    }

    pub fn name(&self) -> &'static str {
        simulation_name(self.sim_id)
    }
}

pub fn simulation_name(sim_id: u32) -> &'static str {
    match sim_id {
        1 => "linear",
        2 => "exponential",
        3 => "cubic",
        4 => "joint-normal",
        5 => "step",
        6 => "quadratic",
        7 => "w-shape",
        8 => "spiral",
        9 => "uncorrelated-bernoulli",
        10 => "logarithmic",
        11 => "fourth-root",
        12 => "sine-4pi",
        13 => "sine-16pi",
        14 => "square",
        15 => "two-parabolas",
        16 => "circle",
        17 => "ellipse",
        18 => "diamond",
        19 => "multiplicative-noise",
        20 => "multimodal-independence",
        _ => "unknown",
    }
}

/// Default noise convention for the experiment drivers: full noise in one
/// dimension, none otherwise.
pub fn default_kappa(p: usize) -> f64 {
    if p == 1 {
        1.0
    } else {
        0.0
    }
}

fn weights(p: usize) -> Vec<f64> {
    (1..=p).map(|d| 1.0 / d as f64).collect()
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Samples n joint draws of the dependency.
pub fn sample_dependency(spec: &SimulationSpec) -> Result<SamplePair> {
    let mut stream = Stream::new(spec.seed, &[tag::DEPENDENCY, spec.sim_id as u64]);
    draw_pair(spec, &mut stream)
}

/// Samples the independence null with matching marginals: x comes from one
/// joint draw and y from a second, independent one.
pub fn sample_null(spec: &SimulationSpec) -> Result<SamplePair> {
    let mut sx = Stream::new(spec.seed, &[tag::NULL_X, spec.sim_id as u64]);
    let mut sy = Stream::new(spec.seed, &[tag::NULL_Y, spec.sim_id as u64]);
    let first = draw_pair(spec, &mut sx)?;
    let second = draw_pair(spec, &mut sy)?;
    Ok(SamplePair {
        x: first.x,
        y: second.y,
    })
}

fn draw_pair(spec: &SimulationSpec, stream: &mut Stream) -> Result<SamplePair> {
    let (n, p, q) = (spec.n, spec.p, spec.q());
    let kappa = spec.kappa;
    let w = weights(p);
    let mut x = Mat::zeros(n, p);
    let mut y = Mat::zeros(n, q);

    // Simulation 4 needs the Cholesky factor of its block covariance.
    let chol = if spec.sim_id == 4 {
        Some(joint_normal_cholesky(p, kappa)?)
    } else {
        None
    };

    let mut xbuf = vec![0.0; p];
    let mut ybuf = vec![0.0; q];
    for i in 0..n {
        let xr: &mut [f64] = &mut xbuf;
        let yr: &mut [f64] = &mut ybuf;
        xr.fill(0.0);
        yr.fill(0.0);
        match spec.sim_id {
            1 => {
                for v in xr.iter_mut() {
                    *v = stream.uniform(-1.0, 1.0);
                }
                let eps = stream.standard_normal();
                yr[0] = dot(&w, xr) + kappa * eps;
            }
            2 => {
                for v in xr.iter_mut() {
                    *v = stream.uniform(0.0, 3.0);
                }
                let eps = stream.standard_normal();
                yr[0] = dot(&w, xr).exp() + 10.0 * kappa * eps;
            }
            3 => {
                for v in xr.iter_mut() {
                    *v = stream.uniform(-1.0, 1.0);
                }
                let eps = stream.standard_normal();
                let u = dot(&w, xr) - 1.0 / 3.0;
                yr[0] = 128.0 * u * u * u + 48.0 * u * u - 12.0 * u + 80.0 * kappa * eps;
            }
            4 => {
                let l = chol.as_ref().unwrap();
                let z: Vec<f64> = (0..2 * p).map(|_| stream.standard_normal()).collect();
                let joint = l.multiply(&z);
                xr.copy_from_slice(&joint[..p]);
                yr.copy_from_slice(&joint[p..]);
            }
            5 => {
                for v in xr.iter_mut() {
                    *v = stream.uniform(-1.0, 1.0);
                }
                let eps = stream.standard_normal();
                yr[0] = if dot(&w, xr) > 0.0 { 1.0 } else { 0.0 } + eps;
            }
            6 => {
                for v in xr.iter_mut() {
                    *v = stream.uniform(-1.0, 1.0);
                }
                let eps = stream.standard_normal();
                yr[0] = dot(&w, xr).powi(2) + 0.5 * kappa * eps;
            }
            7 => {
                let u: Vec<f64> = (0..p).map(|_| stream.uniform(-1.0, 1.0)).collect();
                for v in xr.iter_mut() {
                    *v = stream.uniform(-1.0, 1.0);
                }
                let eps = stream.standard_normal();
                let wx = dot(&w, xr);
                yr[0] = 4.0 * ((wx * wx - 0.5).powi(2) + dot(&w, &u) / 500.0) + 0.5 * kappa * eps;
            }
            8 => {
                let u = stream.uniform(0.0, 5.0);
                let eps = stream.standard_normal();
                let (sin_pu, cos_pu) = (
                    (std::f64::consts::PI * u).sin(),
                    (std::f64::consts::PI * u).cos(),
                );
                for (d, v) in xr.iter_mut().enumerate().take(p - 1) {
                    *v = u * sin_pu * cos_pu.powi(d as i32 + 1);
                }
                xr[p - 1] = u * cos_pu.powi(p as i32);
                yr[0] = u * sin_pu + 0.4 * p as f64 * eps;
            }
            9 => {
                let u = if stream.bernoulli(0.5) { 1.0 } else { 0.0 };
                let bern: Vec<f64> = (0..p)
                    .map(|_| if stream.bernoulli(0.5) { 1.0 } else { 0.0 })
                    .collect();
                for (d, v) in xr.iter_mut().enumerate() {
                    let e1 = stream.standard_normal();
                    *v = bern[d] + 0.5 * e1;
                }
                let e2 = stream.standard_normal();
                yr[0] = (2.0 * u - 1.0) * dot(&w, xr) + 0.5 * e2;
            }
            10 => {
                for v in xr.iter_mut() {
                    *v = stream.standard_normal();
                }
                for (d, v) in yr.iter_mut().enumerate() {
                    let eps = stream.standard_normal();
                    *v = 2.0 * xr[d].abs().log2() + 3.0 * kappa * eps;
                }
            }
            11 => {
                for v in xr.iter_mut() {
                    *v = stream.uniform(-1.0, 1.0);
                }
                let eps = stream.standard_normal();
                yr[0] = dot(&w, xr).abs().powf(0.25) + kappa / 4.0 * eps;
            }
            12 | 13 => {
                let theta = if spec.sim_id == 12 {
                    4.0 * std::f64::consts::PI
                } else {
                    16.0 * std::f64::consts::PI
                };
                let y_noise = if spec.sim_id == 12 {
                    kappa
                } else {
                    0.5 * kappa
                };
                let u = stream.uniform(-1.0, 1.0);
                for v in xr.iter_mut() {
                    let jitter = stream.standard_normal();
                    *v = u + 0.02 * p as f64 * jitter;
                }
                for (d, v) in yr.iter_mut().enumerate() {
                    let eps = stream.standard_normal();
                    *v = (theta * xr[d]).sin() + y_noise * eps;
                }
            }
            14 | 18 => {
                let theta = if spec.sim_id == 14 {
                    -std::f64::consts::PI / 8.0
                } else {
                    -std::f64::consts::PI / 4.0
                };
                let u = stream.uniform(-1.0, 1.0);
                let v_aux = stream.uniform(-1.0, 1.0);
                for (d, v) in xr.iter_mut().enumerate() {
                    let eps = stream.standard_normal();
                    *v = u * theta.cos() + v_aux * theta.sin() + 0.05 * p as f64 * eps;
                    yr[d] = -u * theta.sin() + v_aux * theta.cos();
                }
            }
            15 => {
                let u = if stream.bernoulli(0.5) { 1.0 } else { 0.0 };
                for v in xr.iter_mut() {
                    *v = stream.uniform(-1.0, 1.0);
                }
                let eps = stream.unit(); // uniform(0,1) noise for this one
                yr[0] = (dot(&w, xr).powi(2) + 2.0 * kappa * eps) * (u - 0.5);
            }
            16 | 17 => {
                let r = if spec.sim_id == 16 { 1.0 } else { 5.0 };
                let u: Vec<f64> = (0..p).map(|_| stream.uniform(-1.0, 1.0)).collect();
                let eps: Vec<f64> = (0..p).map(|_| stream.standard_normal()).collect();
                let coords = spherical_coords(&u);
                for d in 0..p {
                    xr[d] = r * (coords[d] + 0.4 * eps[d]);
                }
                yr[0] = (std::f64::consts::PI * u[0]).sin();
            }
            19 => {
                let u: Vec<f64> = (0..p).map(|_| stream.standard_normal()).collect();
                for (d, v) in xr.iter_mut().enumerate() {
                    *v = stream.standard_normal();
                    yr[d] = u[d] * *v;
                }
            }
            20 => {
                let u: Vec<f64> = (0..p).map(|_| stream.standard_normal()).collect();
                let v_aux: Vec<f64> = (0..p).map(|_| stream.standard_normal()).collect();
                let u2: Vec<f64> = (0..p)
                    .map(|_| if stream.bernoulli(0.5) { 1.0 } else { 0.0 })
                    .collect();
                let v2: Vec<f64> = (0..p)
                    .map(|_| if stream.bernoulli(0.5) { 1.0 } else { 0.0 })
                    .collect();
                for d in 0..p {
                    xr[d] = u[d] / 3.0 + 2.0 * u2[d] - 1.0;
                    yr[d] = v_aux[d] / 3.0 + 2.0 * v2[d] - 1.0;
                }
            }
            _ => unreachable!("validated in SimulationSpec::new"),
        }
        for (d, v) in xr.iter().enumerate() {
            x[(i, d)] = *v;
        }
        for (d, v) in yr.iter().enumerate() {
            y[(i, d)] = *v;
        }
    }

    Ok(SamplePair {
        x: SampleSet::new(x)?,
        y: SampleSet::new(y)?,
    })
}

/// Spherical coordinates used by the circle and ellipse dependencies:
/// together with `sin(pi u_1)` they lie on the unit sphere in p+1
/// dimensions.
pub(crate) fn spherical_coords(u: &[f64]) -> Vec<f64> {
    let p = u.len();
    let pi = std::f64::consts::PI;
    let mut coords = vec![0.0; p];
    // X_d = sin(pi u_{d+1}) prod_{j<=d} cos(pi u_j), X_p closes with cosines.
    for d in 0..p.saturating_sub(1) {
        let mut prod = (pi * u[d + 1]).sin();
        for uj in &u[..=d] {
            prod *= (pi * uj).cos();
        }
        coords[d] = prod;
    }
    let mut prod = 1.0;
    for uj in u {
        prod *= (pi * uj).cos();
    }
    coords[p - 1] = prod;
    coords
}

struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    fn multiply(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                self.lower[i * d..i * d + i + 1]
                    .iter()
                    .zip(z)
                    .map(|(l, zj)| l * zj)
                    .sum()
            })
            .collect()
    }
}

fn joint_normal_cholesky(p: usize, kappa: f64) -> Result<Cholesky> {
    let d = 2 * p;
    let rho = 1.0 / (2.0 * p as f64);
    let mut sigma = vec![0.0; d * d];
    for i in 0..p {
        sigma[i * d + i] = 1.0;
        sigma[(p + i) * d + (p + i)] = 1.0 + 0.5 * kappa;
    }
    for i in 0..p {
        for j in 0..p {
            sigma[i * d + (p + j)] = rho;
            sigma[(p + i) * d + j] = rho;
        }
    }

    let mut lower = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut acc = sigma[i * d + j];
            for k in 0..j {
                acc -= lower[i * d + k] * lower[j * d + k];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::Numeric(
                        "joint-normal covariance is not positive definite".into(),
                    ));
                }
                lower[i * d + j] = acc.sqrt();
            } else {
                lower[i * d + j] = acc / lower[j * d + j];
            }
        }
    }
    Ok(Cholesky { dim: d, lower })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sim_id: u32, n: usize, p: usize, kappa: f64, seed: u64) -> SimulationSpec {
        SimulationSpec::new(sim_id, n, p, kappa, seed).unwrap()
    }

    #[test]
    fn invalid_sim_id_rejected() {
        assert!(SimulationSpec::new(0, 10, 1, 1.0, 0).is_err());
        assert!(SimulationSpec::new(21, 10, 1, 1.0, 0).is_err());
    }

    #[test]
    fn linear_noiseless_is_identity_in_1d() {
        let pair = sample_dependency(&spec(1, 25, 1, 0.0, 7)).unwrap();
        for i in 0..25 {
            assert_eq!(pair.y.row(i)[0], pair.x.row(i)[0]);
        }
    }

    #[test]
    fn quadratic_noiseless_squares_x() {
        let pair = sample_dependency(&spec(6, 25, 1, 0.0, 11)).unwrap();
        for i in 0..25 {
            let x = pair.x.row(i)[0];
            assert!((pair.y.row(i)[0] - x * x).abs() <= 1e-15);
        }
    }

    #[test]
    fn cubic_formula_replay_p3() {
        let pair = sample_dependency(&spec(3, 40, 3, 0.0, 13)).unwrap();
        let w = [1.0, 0.5, 1.0 / 3.0];
        for i in 0..40 {
            let wx: f64 = pair.x.row(i).iter().zip(&w).map(|(a, b)| a * b).sum();
            let u = wx - 1.0 / 3.0;
            let expect = 128.0 * u * u * u + 48.0 * u * u - 12.0 * u;
            assert!((pair.y.row(i)[0] - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn circle_intermediates_lie_on_the_unit_sphere() {
        let s = spec(16, 30, 2, 0.0, 21);
        let pair = sample_dependency(&s).unwrap();
        // Replay the documented draw order: per row, p uniforms for U then p
        // normals for the coordinate noise.
        let mut stream = Stream::new(s.seed, &[tag::DEPENDENCY, 16]);
        for i in 0..30 {
            let u: Vec<f64> = (0..2).map(|_| stream.uniform(-1.0, 1.0)).collect();
            let eps: Vec<f64> = (0..2).map(|_| stream.standard_normal()).collect();
            let coords = spherical_coords(&u);
            let y = (std::f64::consts::PI * u[0]).sin();
            let norm: f64 = coords.iter().map(|c| c * c).sum::<f64>() + y * y;
            assert!((norm - 1.0).abs() <= 1e-12, "row {i}: {norm}");
            // And the emitted sample is the noisy version of the same point.
            for d in 0..2 {
                assert!((pair.x.row(i)[d] - (coords[d] + 0.4 * eps[d])).abs() <= 1e-12);
            }
            assert!((pair.y.row(i)[0] - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn dimension_contract_for_all_sims() {
        for sim_id in 1..=20u32 {
            for p in [1usize, 5, 10] {
                let s = spec(sim_id, 6, p, default_kappa(p), 3);
                let pair = sample_dependency(&s).unwrap();
                assert_eq!(pair.x.n(), 6);
                assert_eq!(pair.x.p(), p);
                assert_eq!(pair.y.n(), 6);
                assert_eq!(pair.y.p(), s.q(), "sim {sim_id} q mismatch");
                let null = sample_null(&s).unwrap();
                assert_eq!(null.x.p(), p);
                assert_eq!(null.y.p(), s.q());
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_identical_bytes() {
        for sim_id in [1u32, 8, 15, 20] {
            let s = spec(sim_id, 12, 2, 1.0, 99);
            let a = sample_dependency(&s).unwrap();
            let b = sample_dependency(&s).unwrap();
            assert_eq!(a, b);
            let na = sample_null(&s).unwrap();
            let nb = sample_null(&s).unwrap();
            assert_eq!(na, nb);
        }
    }

    #[test]
    fn null_marginals_match_dependency_marginals() {
        // Two-sample KS on the first X coordinate, 2000 draws each.
        for sim_id in 1..=20u32 {
            let s = spec(sim_id, 2000, 1, 1.0, 321);
            let dep = sample_dependency(&s).unwrap();
            let null = sample_null(&s).unwrap();
            let mut a: Vec<f64> = (0..2000).map(|i| dep.x.row(i)[0]).collect();
            let mut b: Vec<f64> = (0..2000).map(|i| null.x.row(i)[0]).collect();
            a.sort_by(|u, v| u.partial_cmp(v).unwrap());
            b.sort_by(|u, v| u.partial_cmp(v).unwrap());
            let ks = two_sample_ks(&a, &b);
            assert!(ks <= 0.06, "sim {sim_id}: KS {ks}");
        }
    }

    fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
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

    #[test]
    fn noise_gating_for_kappa_scaled_sims() {
        // kappa = 0 output is a deterministic function of x / auxiliaries.
        let w1 = [1.0];
        for (sim_id, f) in [
            (2u32, (|x: f64| x.exp()) as fn(f64) -> f64),
            (11, |x: f64| x.abs().powf(0.25)),
        ] {
            let pair = sample_dependency(&spec(sim_id, 20, 1, 0.0, 5)).unwrap();
            for i in 0..20 {
                let wx = pair.x.row(i)[0] * w1[0];
                assert!((pair.y.row(i)[0] - f(wx)).abs() <= 1e-12, "sim {sim_id}");
            }
        }
    }

    #[test]
    fn joint_normal_covariance_shape() {
        // With kappa = 0 and p = 2 the theoretical cross-covariance is 1/(2p).
        let s = spec(4, 20_000, 2, 0.0, 17);
        let pair = sample_dependency(&s).unwrap();
        let n = 20_000;
        let mut cov = 0.0;
        for i in 0..n {
            cov += pair.x.row(i)[0] * pair.y.row(i)[1];
        }
        cov /= n as f64;
        assert!((cov - 0.25).abs() < 0.03, "cross covariance {cov}");
    }

    #[test]
    fn square_rotation_is_exact() {
        let s = spec(14, 15, 1, 0.0, 31);
        let pair = sample_dependency(&s).unwrap();
        let mut stream = Stream::new(s.seed, &[tag::DEPENDENCY, 14]);
        let theta = -std::f64::consts::PI / 8.0;
        for i in 0..15 {
            let u = stream.uniform(-1.0, 1.0);
            let v = stream.uniform(-1.0, 1.0);
            let eps = stream.standard_normal();
            assert!(
                (pair.x.row(i)[0] - (u * theta.cos() + v * theta.sin() + 0.05 * eps)).abs()
                    <= 1e-15
            );
            assert!((pair.y.row(i)[0] - (-u * theta.sin() + v * theta.cos())).abs() <= 1e-15);
        }
    }
}
