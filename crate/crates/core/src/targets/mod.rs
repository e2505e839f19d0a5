//! Named benchmark functions selectable at runtime.
//!
//! Each target evaluates on decoded coordinates in `[0, 1)^n` and, when a
//! closed construction is known, builds an exact network on a given tree.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::funcbuild::{exponential, hyperbolic, polynomial, Hyperbolic, PolynomialSpec};
use crate::function::GridFunction;
use crate::topology::{GridPoint, LabeledTree};
use crate::ttn::{AnyNetwork, TreeTensorNetwork};

/// A benchmark function of fixed or arbitrary dimension.
pub trait BenchmarkTarget: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Number of variables the target is defined for; `None` accepts any.
    fn n_vars(&self) -> Option<usize>;

    /// Value at coordinates `x ∈ [0, 1)^n`.
    fn value(&self, x: &[f64]) -> f64;

    /// Exact network on `tree`, if the target has a direct construction.
    /// Complex networks represent the target through their real part.
    fn exact_network(&self, tree: &LabeledTree) -> Option<Result<AnyNetwork>>;

    /// A point of large magnitude to seed cross interpolation from.
    fn anchor(&self) -> Option<Vec<f64>> {
        None
    }

    /// Instance parameters worth recording next to results.
    fn metadata(&self) -> Vec<(String, String)> {
        Vec::new()
    }

    /// Rejects trees whose variable count does not fit the target.
    fn check_tree(&self, tree: &LabeledTree) -> Result<()> {
        match self.n_vars() {
            Some(n) if n != tree.max_var() => Err(Error::InvalidParameter(format!(
                "target {} needs {n} variables, tree has {}",
                self.name(),
                tree.max_var()
            ))),
            _ => Ok(()),
        }
    }
}

/// Evaluates a [`BenchmarkTarget`] on grid points.
pub struct TargetFunction<'a>(pub &'a dyn BenchmarkTarget);

impl GridFunction<f64> for TargetFunction<'_> {
    fn eval(&self, p: &GridPoint) -> f64 {
        self.0.value(&p.coords())
    }
}

/// Laguerre polynomial `L_n(x)`.
#[derive(Debug, Clone, Copy)]
pub struct Laguerre {
    pub n: usize,
}

impl Default for Laguerre {
    fn default() -> Self {
        Self { n: 40 }
    }
}

impl Laguerre {
    /// Monomial coefficients `binom(n, k) (-1)^k / k!`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c = vec![1.0];
        for k in 1..=self.n {
            let prev = c[k - 1];
            c.push(-prev * (self.n + 1 - k) as f64 / (k * k) as f64);
        }
        c
    }

    /// Three-term recurrence, independent of the monomial coefficients.
    pub fn eval(&self, x: f64) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        let (mut prev, mut cur) = (1.0, 1.0 - x);
        for k in 1..self.n {
            let next = ((2 * k + 1) as f64 - x) * cur - k as f64 * prev;
            prev = cur;
            cur = next / (k + 1) as f64;
        }
        cur
    }
}

impl BenchmarkTarget for Laguerre {
    fn name(&self) -> &'static str {
        "laguerre"
    }

    fn description(&self) -> &'static str {
        "Laguerre polynomial L_n(x), exact with bond dimension n + 1"
    }

    fn n_vars(&self) -> Option<usize> {
        Some(1)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x[0])
    }

    fn exact_network(&self, tree: &LabeledTree) -> Option<Result<AnyNetwork>> {
        let spec = PolynomialSpec::new(self.coefficients(), 1);
        Some(self.check_tree(tree).and_then(|_| polynomial(tree, &spec).map(AnyNetwork::from)))
    }

    fn metadata(&self) -> Vec<(String, String)> {
        vec![("degree".into(), self.n.to_string())]
    }
}

/// Truncated Weierstrass series `Σ_{k=1}^{n} sin(π k^a x) / (π k^a)`.
#[derive(Debug, Clone, Copy)]
pub struct Weierstrass {
    pub a: u32,
    pub n_terms: usize,
}

impl Default for Weierstrass {
    fn default() -> Self {
        Self { a: 3, n_terms: 25 }
    }
}

impl Weierstrass {
    fn frequency(&self, k: usize) -> f64 {
        PI * (k as f64).powi(self.a as i32)
    }
}

impl BenchmarkTarget for Weierstrass {
    fn name(&self) -> &'static str {
        "weierstrass"
    }

    fn description(&self) -> &'static str {
        "truncated Weierstrass series, exact as a sum of complex exponentials"
    }

    fn n_vars(&self) -> Option<usize> {
        Some(1)
    }

    fn value(&self, x: &[f64]) -> f64 {
        (1..=self.n_terms)
            .map(|k| {
                let w = self.frequency(k);
                (w * x[0]).sin() / w
            })
            .sum()
    }

    /// `sin θ = Re(-i e^{iθ})`: a complex sum of `n` rank-one terms whose real
    /// part is carried by a real network of bond dimension `2n`.
    fn exact_network(&self, tree: &LabeledTree) -> Option<Result<AnyNetwork>> {
        let build = || -> Result<AnyNetwork> {
            self.check_tree(tree)?;
            let mut sum: Option<TreeTensorNetwork<Complex64>> = None;
            for k in 1..=self.n_terms {
                let w = self.frequency(k);
                let term = exponential(
                    tree,
                    Complex64::new(0.0, -1.0 / w),
                    &[Complex64::new(0.0, w)],
                    Complex64::new(0.0, 0.0),
                )?;
                sum = Some(match sum {
                    Some(s) => s.add(&term)?,
                    None => term,
                });
            }
            let sum = sum.ok_or_else(|| Error::InvalidParameter("weierstrass needs n_terms >= 1".into()))?;
            Ok(sum.real_values().into())
        };
        Some(build())
    }

    fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("a".into(), self.a.to_string()),
            ("n_terms".into(), self.n_terms.to_string()),
        ]
    }
}

/// Seed of the shipped plane-wave frequency table.
pub const PLANEWAVE_SEED: u64 = 20_231_107;
/// Number of plane waves in the shipped table.
pub const PLANEWAVE_TERMS: usize = 30;

const PLANEWAVE_TABLE: &str = include_str!("../../data/planewaves.csv");

/// Renders the frequency table drawn from a seeded standard normal, in the
/// format of the shipped data file.
pub fn planewave_table(seed: u64, n_terms: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = format!("# seed={seed}\nj,kx,ky,kz\n");
    for j in 1..=n_terms {
        let k: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        out.push_str(&format!("{j},{:?},{:?},{:?}\n", k[0], k[1], k[2]));
    }
    out
}

fn parse_planewaves(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('j') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("plane-wave row `{line}` needs 4 fields")));
        }
        let mut k = [0.0; 3];
        for (slot, field) in k.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{field}`")))?;
        }
        rows.push(k);
    }
    Ok(rows)
}

/// `Σ_j cos(j k_j · r)` over `r ∈ [0, 1)^3`.
#[derive(Debug, Clone)]
pub struct PlaneWaves {
    pub k: Vec<[f64; 3]>,
}

impl PlaneWaves {
    /// The instance shipped with the crate.
    pub fn fixed() -> Self {
        Self {
            k: parse_planewaves(PLANEWAVE_TABLE).expect("shipped plane-wave table parses"),
        }
    }

    pub fn from_table(text: &str) -> Result<Self> {
        Ok(Self {
            k: parse_planewaves(text)?,
        })
    }

    /// `e^{i j k_j · r}` summed over `j`: bond dimension equal to the number
    /// of waves, with the target as its real part.
    pub fn complex_network(&self, tree: &LabeledTree) -> Result<TreeTensorNetwork<Complex64>> {
        self.check_tree(tree)?;
        let mut sum: Option<TreeTensorNetwork<Complex64>> = None;
        for (j, k) in self.k.iter().enumerate() {
            let scale = (j + 1) as f64;
            let wave: Vec<Complex64> = k.iter().map(|&c| Complex64::new(0.0, scale * c)).collect();
            let term = exponential(tree, Complex64::new(1.0, 0.0), &wave, Complex64::new(0.0, 0.0))?;
            sum = Some(match sum {
                Some(s) => s.add(&term)?,
                None => term,
            });
        }
        sum.ok_or_else(|| Error::InvalidParameter("empty plane-wave table".into()))
    }
}

impl BenchmarkTarget for PlaneWaves {
    fn name(&self) -> &'static str {
        "planewaves"
    }

    fn description(&self) -> &'static str {
        "sum of 30 plane waves of increasing frequency in three dimensions"
    }

    fn n_vars(&self) -> Option<usize> {
        Some(3)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.k
            .iter()
            .enumerate()
            .map(|(j, k)| {
                let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                ((j + 1) as f64 * phase).cos()
            })
            .sum()
    }

    fn exact_network(&self, tree: &LabeledTree) -> Option<Result<AnyNetwork>> {
        Some(self.complex_network(tree).map(AnyNetwork::from))
    }

    fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("n_terms".into(), self.k.len().to_string()),
            ("frequency_seed".into(), PLANEWAVE_SEED.to_string()),
        ]
    }
}

const MULTINORMAL_INSTANCE: &str = include_str!("../../data/multinormal.toml");

#[derive(Debug, Clone, Deserialize)]
struct MultinormalFile {
    mean: [f64; 3],
    covariance: [[f64; 3]; 3],
    domain: [f64; 2],
}

/// Unnormalized trivariate Gaussian `exp(-(r - μ)ᵀ M⁻¹ (r - μ))` with peak
/// value one. The physical domain `[lo, hi)^3` is mapped onto `[0, 1)^3` by
/// `r = lo + (hi - lo) x`.
#[derive(Debug, Clone)]
pub struct Multinormal {
    pub mean: Vector3<f64>,
    pub covariance: Matrix3<f64>,
    pub domain: (f64, f64),
    precision: Matrix3<f64>,
}

impl Multinormal {
    pub fn new(mean: [f64; 3], covariance: [[f64; 3]; 3], domain: (f64, f64)) -> Result<Self> {
        let covariance = Matrix3::from_fn(|i, j| covariance[i][j]);
        if (covariance - covariance.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidParameter("covariance is not symmetric".into()));
        }
        let chol = covariance
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("covariance is not positive definite".into()))?;
        if domain.1 <= domain.0 {
            return Err(Error::InvalidParameter("empty multinormal domain".into()));
        }
        Ok(Self {
            mean: Vector3::from(mean),
            covariance,
            domain,
            precision: chol.inverse(),
        })
    }

    /// The instance shipped with the crate.
    pub fn fixed() -> Self {
        let file: MultinormalFile =
            toml::from_str(MULTINORMAL_INSTANCE).expect("shipped multinormal instance parses");
        Self::new(file.mean, file.covariance, (file.domain[0], file.domain[1]))
            .expect("shipped multinormal instance is valid")
    }

    /// Physical coordinate of a unit-cube coordinate.
    pub fn to_physical(&self, x: f64) -> f64 {
        self.domain.0 + (self.domain.1 - self.domain.0) * x
    }
}

impl BenchmarkTarget for Multinormal {
    fn name(&self) -> &'static str {
        "multinormal"
    }

    fn description(&self) -> &'static str {
        "trivariate Gaussian density on [0, 10)^3, learned by cross interpolation"
    }

    fn n_vars(&self) -> Option<usize> {
        Some(3)
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = Vector3::from_fn(|i, _| self.to_physical(x[i]) - self.mean[i]);
        (-(r.transpose() * self.precision * r)[0]).exp()
    }

    fn exact_network(&self, _tree: &LabeledTree) -> Option<Result<AnyNetwork>> {
        None
    }

    fn anchor(&self) -> Option<Vec<f64>> {
        let (lo, hi) = self.domain;
        Some(self.mean.iter().map(|m| (m - lo) / (hi - lo)).collect())
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let (lo, hi) = self.domain;
        let cov: Vec<String> = self
            .covariance
            .row_iter()
            .map(|r| format!("[{}, {}, {}]", r[0], r[1], r[2]))
            .collect();
        vec![
            ("mean".into(), format!("[{}, {}, {}]", self.mean[0], self.mean[1], self.mean[2])),
            ("covariance".into(), format!("[{}]", cov.join(", "))),
            ("domain".into(), format!("[{lo}, {hi})^3")),
            ("domain_map".into(), format!("r = {lo} + {} * x", hi - lo)),
        ]
    }
}

/// `cosh(Σ_i x_i)`, exact with bond dimension two.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoshSum;

impl BenchmarkTarget for CoshSum {
    fn name(&self) -> &'static str {
        "cosh"
    }

    fn description(&self) -> &'static str {
        "cosh of the coordinate sum, bond dimension two on any tree"
    }

    fn n_vars(&self) -> Option<usize> {
        None
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().sum::<f64>().cosh()
    }

    fn exact_network(&self, tree: &LabeledTree) -> Option<Result<AnyNetwork>> {
        let k = vec![1.0; tree.max_var()];
        Some(hyperbolic(tree, 1.0, &k, 0.0, Hyperbolic::Cosh).map(AnyNetwork::from))
    }
}

/// `Π_i (1 + x_i²)`, a product of single-variable factors with no
/// correlation between variables.
#[derive(Debug, Clone, Copy, Default)]
pub struct Product;

impl BenchmarkTarget for Product {
    fn name(&self) -> &'static str {
        "product"
    }

    fn description(&self) -> &'static str {
        "product of 1 + x_i^2 over all variables"
    }

    fn n_vars(&self) -> Option<usize> {
        None
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| 1.0 + v * v).product()
    }

    fn exact_network(&self, tree: &LabeledTree) -> Option<Result<AnyNetwork>> {
        let build = || -> Result<AnyNetwork> {
            let mut out: Option<TreeTensorNetwork<f64>> = None;
            for &var in tree.variables() {
                let factor = polynomial(tree, &PolynomialSpec::new(vec![1.0, 0.0, 1.0], var))?;
                out = Some(match out {
                    Some(acc) => acc.multiply(&factor)?.truncate(usize::MAX, 1e-14)?,
                    None => factor,
                });
            }
            out.map(AnyNetwork::from)
                .ok_or_else(|| Error::InvalidParameter("tree has no variables".into()))
        };
        Some(build())
    }
}

/// Benchmark targets selectable by name.
pub struct TargetRegistry {
    targets: BTreeMap<&'static str, Box<dyn BenchmarkTarget>>,
}

impl TargetRegistry {
    pub fn empty() -> Self {
        Self {
            targets: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Laguerre::default()));
        r.register(Box::new(Weierstrass::default()));
        r.register(Box::new(PlaneWaves::fixed()));
        r.register(Box::new(Multinormal::fixed()));
        r.register(Box::new(CoshSum));
        r.register(Box::new(Product));
        r
    }

    /// Adds a target, replacing any previous one with the same name.
    pub fn register(&mut self, target: Box<dyn BenchmarkTarget>) {
        self.targets.insert(target.name(), target);
    }

    pub fn get(&self, name: &str) -> Result<&dyn BenchmarkTarget> {
        self.targets
            .get(name)
            .map(|t| t.as_ref())
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.targets.keys().copied()
    }
}

impl Default for TargetRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests;
