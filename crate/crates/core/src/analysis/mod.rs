//! Sampled error measures and digit-pair mutual information.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::scalar::Scalar;
use crate::topology::{DigitId, GridPoint, LabeledTree};
use crate::ttn::{AnyNetwork, TreeTensorNetwork};

/// A fixed, seeded subset of grid points shared by every network compared
/// on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<GridPoint>,
    pub seed: u64,
}

impl SampleSet {
    /// Draws `count` distinct points uniformly (all points when the grid is
    /// smaller than `count`).
    pub fn new(n_vars: usize, levels: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = n_vars * levels;
        let points = if bits < usize::BITS as usize - 1 && (1usize << bits) <= count.max(1) << 1 {
            let total = 1usize << bits;
            let mut chosen: Vec<usize> = if total <= count {
                (0..total).collect()
            } else {
                index::sample(&mut rng, total, count).into_vec()
            };
            chosen.sort_unstable();
            chosen.into_iter().map(|m| from_index(m, n_vars, levels)).collect()
        } else {
            let mut seen = HashSet::with_capacity(count);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let p = GridPoint::random(n_vars, levels, &mut rng);
                if seen.insert(p.clone()) {
                    out.push(p);
                }
            }
            out
        };
        Self { points, seed }
    }

    /// Samples covering every variable of `tree`.
    pub fn for_tree(tree: &LabeledTree, count: usize, seed: u64) -> Self {
        Self::new(tree.max_var(), tree.levels(), count, seed)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Grid point number `m`, reading bit `k` of `m` as raw digit slot `k`.
fn from_index(m: usize, n_vars: usize, levels: usize) -> GridPoint {
    let bits = (0..n_vars * levels).map(|k| ((m >> k) & 1) as u8).collect();
    GridPoint::from_raw(levels, bits)
}

/// Mean and largest absolute deviation over a sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub mean: f64,
    pub sup: f64,
}

/// Compares `approx` against `exact` on every sample.
pub fn compare<T: Scalar>(
    approx: &dyn GridFunction<T>,
    exact: &dyn GridFunction<T>,
    samples: &SampleSet,
) -> Result<ErrorMetrics> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples);
    }
    let diffs: Vec<f64> = samples
        .points
        .par_iter()
        .map(|p| (approx.eval(p) - exact.eval(p)).modulus())
        .collect();
    Ok(summarize(&diffs))
}

fn summarize(diffs: &[f64]) -> ErrorMetrics {
    ErrorMetrics {
        mean: diffs.iter().sum::<f64>() / diffs.len() as f64,
        sup: diffs.iter().copied().fold(0.0, f64::max),
    }
}

/// Deviation of a network from `f` over the samples.
pub fn error_metrics<T: Scalar>(
    net: &TreeTensorNetwork<T>,
    f: &dyn GridFunction<T>,
    samples: &SampleSet,
) -> Result<ErrorMetrics> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples);
    }
    let values = net.evaluate_many(&samples.points)?;
    let diffs: Vec<f64> = samples
        .points
        .par_iter()
        .zip(values.par_iter())
        .map(|(p, &v)| (v - f.eval(p)).modulus())
        .collect();
    Ok(summarize(&diffs))
}

/// Deviation of `Re` of a network of either scalar kind from a real `f`.
pub fn real_error_metrics(
    net: &AnyNetwork,
    f: &dyn GridFunction<f64>,
    samples: &SampleSet,
) -> Result<ErrorMetrics> {
    match net {
        AnyNetwork::Real(n) => error_metrics(n, f, samples),
        AnyNetwork::Complex(n) => {
            if samples.is_empty() {
                return Err(Error::InsufficientSamples);
            }
            let values = n.evaluate_many(&samples.points)?;
            let diffs: Vec<f64> = samples
                .points
                .par_iter()
                .zip(values.par_iter())
                .map(|(p, v)| (v.re - f.eval(p)).abs())
                .collect();
            Ok(summarize(&diffs))
        }
    }
}

/// Normalized two-digit reduced density matrix, basis `(x_a, x_b)` with
/// `x_b` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RdmEstimate {
    pub rho: DMatrix<Complex64>,
    pub sample_count: usize,
}

impl RdmEstimate {
    fn from_environments<T: Scalar>(
        f: &dyn GridFunction<T>,
        a: DigitId,
        b: DigitId,
        environments: &[GridPoint],
    ) -> Result<Self> {
        let rho = environments
            .par_iter()
            .map(|env| {
                let mut p = env.clone();
                let psi: Vec<Complex64> = (0..4u8)
                    .map(|k| {
                        p.set(a, k >> 1);
                        p.set(b, k & 1);
                        f.eval(&p).to_complex()
                    })
                    .collect();
                DMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj())
            })
            .reduce(|| DMatrix::zeros(4, 4), |x, y| x + y);
        let trace = rho.trace().re;
        if !(trace > f64::MIN_POSITIVE) {
            return Err(Error::InsufficientSamples);
        }
        Ok(Self {
            rho: rho.unscale(trace),
            sample_count: environments.len(),
        })
    }

    /// Reduced matrix of digit `a` (`keep_first`) or digit `b`.
    fn marginal(&self, keep_first: bool) -> DMatrix<Complex64> {
        DMatrix::from_fn(2, 2, |i, j| {
            (0..2)
                .map(|k| {
                    if keep_first {
                        self.rho[(2 * i + k, 2 * j + k)]
                    } else {
                        self.rho[(2 * k + i, 2 * k + j)]
                    }
                })
                .sum()
        })
    }

    /// `S_A + S_B − S_AB` in natural-log units.
    pub fn mutual_information(&self) -> f64 {
        let m = entropy(&self.marginal(true)) + entropy(&self.marginal(false)) - entropy(&self.rho);
        m.max(0.0)
    }
}

/// Von Neumann entropy with negative eigenvalues clipped and the spectrum
/// renormalized.
fn entropy(rho: &DMatrix<Complex64>) -> f64 {
    let h = (rho + rho.adjoint()).unscale(2.0);
    let eig: Vec<f64> = match Complex64::thin_svd(&h) {
        // singular values of a Hermitian PSD matrix are its eigenvalues
        Some((_, s, _)) => s,
        None => return f64::NAN,
    };
    let total: f64 = eig.iter().map(|&l| l.max(0.0)).sum();
    eig.iter()
        .map(|&l| l.max(0.0) / total)
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

/// Mutual information between digits `a` and `b` estimated from
/// `n_samples` environments drawn uniformly with replacement; each
/// environment contributes the exact outer product over the four settings
/// of `(a, b)`.
pub fn mutual_information<T: Scalar>(
    f: &dyn GridFunction<T>,
    n_vars: usize,
    levels: usize,
    a: DigitId,
    b: DigitId,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    check_pair(n_vars, levels, a, b)?;
    if n_samples == 0 {
        return Err(Error::InsufficientSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let envs: Vec<GridPoint> = (0..n_samples)
        .map(|_| GridPoint::random(n_vars, levels, &mut rng))
        .collect();
    Ok(RdmEstimate::from_environments(f, a, b, &envs)?.mutual_information())
}

/// Mutual information from the exact partial trace over every environment;
/// only feasible for small grids.
pub fn mutual_information_exact<T: Scalar>(
    f: &dyn GridFunction<T>,
    n_vars: usize,
    levels: usize,
    a: DigitId,
    b: DigitId,
) -> Result<f64> {
    check_pair(n_vars, levels, a, b)?;
    let bits = n_vars * levels;
    if bits > 24 {
        return Err(Error::InvalidParameter(format!(
            "exact trace over {bits} digits is too large"
        )));
    }
    let envs: Vec<GridPoint> = (0..1usize << bits)
        .map(|m| from_index(m, n_vars, levels))
        .filter(|p| p.get(a) == 0 && p.get(b) == 0)
        .collect();
    Ok(RdmEstimate::from_environments(f, a, b, &envs)?.mutual_information())
}

fn check_pair(n_vars: usize, levels: usize, a: DigitId, b: DigitId) -> Result<()> {
    let probe = GridPoint::zeros(n_vars, levels);
    for d in [a, b] {
        if !probe.covers(d) {
            return Err(Error::InvalidParameter(format!("digit {d} is outside the grid")));
        }
    }
    if a == b {
        return Err(Error::InvalidParameter(format!("digit pair {a}, {b} must be distinct")));
    }
    Ok(())
}

/// Pairwise mutual information over all digits of a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct MiMatrix {
    pub labels: Vec<DigitId>,
    pub values: DMatrix<f64>,
}

/// Mutual information for every digit pair of `tree`, sharing one set of
/// sampled environments. Symmetric with zero diagonal.
pub fn mi_matrix<T: Scalar>(
    f: &dyn GridFunction<T>,
    tree: &LabeledTree,
    n_samples: usize,
    seed: u64,
) -> Result<MiMatrix> {
    if n_samples == 0 {
        return Err(Error::InsufficientSamples);
    }
    let labels = tree.vertices().to_vec();
    let (n_vars, levels) = (tree.max_var(), tree.levels());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let envs: Vec<GridPoint> = (0..n_samples)
        .map(|_| GridPoint::random(n_vars, levels, &mut rng))
        .collect();
    let n = labels.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| {
            RdmEstimate::from_environments(f, labels[i], labels[j], &envs).map(|r| r.mutual_information())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(MiMatrix { labels, values: m })
}
