use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{build_doubled_tree, default_bridge, FredholmProblem};
use crate::error::{Error, Result};
use crate::funcbuild::{constant, exponential, polynomial, PolynomialSpec};
use crate::function::{GridFunction, OfCoords};
use crate::topology::{CoupledBinary, LabeledTree, TreeGenerator};
use crate::treeci::{tci_learn, TciOptions};
use crate::ttn::TreeTensorNetwork;

/// Everything needed to run one benchmark equation.
pub struct FredholmSetup {
    pub problem: FredholmProblem<f64>,
    pub initial: TreeTensorNetwork<f64>,
    pub exact: Box<dyn GridFunction<f64>>,
}

/// A named Fredholm equation with a known solution.
pub trait FredholmInstance: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Builds the problem with `levels` digits per variable.
    fn setup(&self, levels: usize) -> Result<FredholmSetup>;
}

/// Two coupled binary trees, one per variable, and the doubled tree
/// bridged at the most significant digits of variable 1.
fn trees(levels: usize) -> Result<(LabeledTree, LabeledTree)> {
    let tx = CoupledBinary.generate(2, levels)?;
    let kt = build_doubled_tree(&tx, &[default_bridge(&tx)])?;
    Ok((tx, kt))
}

fn monomial(tree: &LabeledTree, var: usize, degree: usize) -> Result<TreeTensorNetwork<f64>> {
    let mut c = vec![0.0; degree + 1];
    c[degree] = 1.0;
    polynomial(tree, &PolynomialSpec::new(c, var))
}

/// `K = x₁x₂²t₁/6`, `α = 3`, `g = sin(x₂) − c·x₁x₂²` with exact solution
/// `sin(x₂)`; every network is built exactly.
pub struct ExampleOne;

impl ExampleOne {
    /// `c = (1 − cos 1 (sin² 1 / 2 + 1)) / 18`.
    pub fn c() -> f64 {
        let (s, co) = (1f64.sin(), 1f64.cos());
        (1.0 - co * (s * s / 2.0 + 1.0)) / 18.0
    }
}

impl FredholmInstance for ExampleOne {
    fn name(&self) -> &'static str {
        "fredholm-ex1"
    }

    fn description(&self) -> &'static str {
        "K = x1 x2^2 t1 / 6, alpha = 3, exact solution sin(x2)"
    }

    fn setup(&self, levels: usize) -> Result<FredholmSetup> {
        let (tx, kt) = trees(levels)?;
        let kernel = monomial(&kt, 1, 1)?
            .multiply(&monomial(&kt, 2, 2)?)?
            .multiply(&monomial(&kt, 3, 1)?)?
            .scaled(1.0 / 6.0)
            .truncate(usize::MAX, 1e-14)?;
        let i = Complex64::i();
        let sin_x2 = exponential(&tx, -i, &[Complex64::new(0.0, 0.0), i], Complex64::new(0.0, 0.0))?
            .real_values();
        let x1x2sq = monomial(&tx, 1, 1)?.multiply(&monomial(&tx, 2, 2)?)?;
        let g = sin_x2.add(&x1x2sq.scaled(-Self::c()))?.truncate(usize::MAX, 1e-14)?;
        let problem = FredholmProblem::new(g, kernel, 3)?;
        Ok(FredholmSetup {
            problem,
            initial: constant(&tx, 1.0),
            exact: Box::new(OfCoords(|x: &[f64]| x[1].sin())),
        })
    }
}

/// `K = x₁(1 + t₁ + t₂)/(1 + x₂)`, `α = 2`,
/// `g = 1/(1 + x₁ + x₂)² − x₁/(6(1 + x₂))` with exact solution
/// `1/(1 + x₁ + x₂)²`; kernel and `g` are learned by cross interpolation.
pub struct ExampleTwo {
    pub tci: TciOptions,
}

impl Default for ExampleTwo {
    fn default() -> Self {
        Self {
            tci: TciOptions {
                chi_max: 10,
                tol: 1e-12,
                sweeps: 6,
            },
        }
    }
}

impl FredholmInstance for ExampleTwo {
    fn name(&self) -> &'static str {
        "fredholm-ex2"
    }

    fn description(&self) -> &'static str {
        "K = x1 (1 + t1 + t2) / (1 + x2), alpha = 2, exact solution 1 / (1 + x1 + x2)^2"
    }

    fn setup(&self, levels: usize) -> Result<FredholmSetup> {
        let (tx, kt) = trees(levels)?;
        let k = OfCoords(|x: &[f64]| x[0] * (1.0 + x[2] + x[3]) / (1.0 + x[1]));
        let (kernel, _) = tci_learn(&k, &kt, &self.tci)?;
        let g = OfCoords(|x: &[f64]| {
            let s = 1.0 + x[0] + x[1];
            1.0 / (s * s) - x[0] / (1.0 + x[1]) / 6.0
        });
        let (g, _) = tci_learn(&g, &tx, &self.tci)?;
        let mut problem = FredholmProblem::new(g, kernel, 2)?;
        // contraction is slow from the constant start; ~25 iterations settle
        problem.iterations = 40;
        Ok(FredholmSetup {
            problem,
            initial: constant(&tx, 1.0),
            exact: Box::new(OfCoords(|x: &[f64]| {
                let s = 1.0 + x[0] + x[1];
                1.0 / (s * s)
            })),
        })
    }
}

/// Benchmark equations selectable by name.
pub struct FredholmRegistry {
    instances: BTreeMap<String, Box<dyn FredholmInstance>>,
}

impl FredholmRegistry {
    pub fn empty() -> Self {
        Self {
            instances: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ExampleOne));
        r.register(Box::new(ExampleTwo::default()));
        r
    }

    pub fn register(&mut self, instance: Box<dyn FredholmInstance>) {
        self.instances.insert(instance.name().to_string(), instance);
    }

    pub fn get(&self, name: &str) -> Result<&dyn FredholmInstance> {
        self.instances
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.instances.keys().map(String::as_str)
    }
}
