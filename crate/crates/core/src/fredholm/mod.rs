//! Iterative solver for non-linear Fredholm equations of the second kind,
//! `f(x) = g(x) + λ ∫ K(x, t) f(t)^α dt` over `[0, 1)^n`.
//!
//! The kernel lives on a doubled tree: the tree of `x` plus a copy whose
//! variables are shifted by a fixed offset (the `t` variables), joined by a
//! single bridging edge.

mod instances;

pub use instances::{ExampleOne, ExampleTwo, FredholmInstance, FredholmRegistry, FredholmSetup};

use std::collections::BTreeMap;

use crate::analysis::SampleSet;
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::scalar::Scalar;
use crate::topology::{DigitId, LabeledTree};
use crate::ttn::TreeTensorNetwork;

/// Truncation tolerance applied after every multiplication of the power
/// `f^α`.
pub const POWER_TOL: f64 = 1e-14;

/// Relabels variables through `map`; variables missing from the map keep
/// their number.
pub fn remap_variables<T: Scalar>(
    net: &TreeTensorNetwork<T>,
    map: &BTreeMap<usize, usize>,
) -> Result<TreeTensorNetwork<T>> {
    let present = net.tree().variables();
    let mut targets = BTreeMap::new();
    for &v in present {
        let to = map.get(&v).copied().unwrap_or(v);
        if to == 0 {
            return Err(Error::InvalidParameter("variables are numbered from 1".into()));
        }
        if targets.insert(to, v).is_some() {
            return Err(Error::LabelCollision(to));
        }
    }
    net.relabel(|d| DigitId::new(map.get(&d.var).copied().unwrap_or(d.var), d.digit))
}

/// Shifts every variable by `offset`.
pub fn shift_variables<T: Scalar>(net: &TreeTensorNetwork<T>, offset: isize) -> Result<TreeTensorNetwork<T>> {
    let map = net
        .tree()
        .variables()
        .iter()
        .map(|&v| {
            let to = v as isize + offset;
            if to < 1 {
                Err(Error::InvalidParameter(format!("variable {v} cannot move by {offset}")))
            } else {
                Ok((v, to as usize))
            }
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    remap_variables(net, &map)
}

/// Label of the `t` copy of digit `d`.
pub fn t_digit(d: DigitId, offset: usize) -> DigitId {
    DigitId::new(d.var + offset, d.digit)
}

/// Bridge between the most significant digit of the first variable and its
/// `t` copy.
pub fn default_bridge(tx: &LabeledTree) -> (DigitId, DigitId) {
    let first = DigitId::new(tx.variables()[0], 1);
    (first, t_digit(first, tx.max_var()))
}

/// `T_x ∪ T_t` joined by `bridges`, where `T_t` shifts the variables of `tx`
/// by `tx.max_var()`. Exactly one bridge yields a tree; none leaves it
/// disconnected and more close a cycle.
pub fn build_doubled_tree(tx: &LabeledTree, bridges: &[(DigitId, DigitId)]) -> Result<LabeledTree> {
    let offset = tx.max_var();
    let mut vertices = tx.vertices().to_vec();
    vertices.extend(tx.vertices().iter().map(|&d| t_digit(d, offset)));
    let mut edges = Vec::with_capacity(2 * tx.edges().len() + bridges.len());
    for (a, b) in tx.edge_labels() {
        edges.push((a, b));
        edges.push((t_digit(a, offset), t_digit(b, offset)));
    }
    for &(x, t) in bridges {
        if x.var > offset || t.var <= offset {
            return Err(Error::InvalidParameter(format!(
                "bridge {x}–{t} must join an x digit to a t digit"
            )));
        }
        edges.push((x, t));
    }
    LabeledTree::new(vertices, edges)
}

/// `f^α`, truncating after every product.
pub fn power<T: Scalar>(f: &TreeTensorNetwork<T>, alpha: u32, chi_max: usize) -> Result<TreeTensorNetwork<T>> {
    if alpha == 0 {
        return Ok(crate::funcbuild::constant(f.tree(), T::one()));
    }
    let mut p = f.clone();
    for _ in 1..alpha {
        p = p.multiply(f)?.truncate(chi_max, POWER_TOL)?;
    }
    Ok(p)
}

/// A Fredholm equation with its solver settings.
#[derive(Debug, Clone)]
pub struct FredholmProblem<T: Scalar> {
    pub g: TreeTensorNetwork<T>,
    pub kernel: TreeTensorNetwork<T>,
    pub alpha: u32,
    pub lambda: T,
    pub iterations: usize,
    /// Bond cap applied to the power and to every iterate; `None` leaves
    /// ranks uncapped.
    pub chi_max: Option<usize>,
    /// Relative truncation tolerance of every iterate.
    pub tol: f64,
    /// Stop once the relative change between iterates falls below this;
    /// `None` always runs every iteration.
    pub stop_tol: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl<T: Scalar> FredholmProblem<T> {
    /// Checks that the kernel lives on `T_x ∪ T_t` with one bridge and
    /// fills in the default settings: `λ = 1`, 20 iterations, no cap,
    /// tolerance `1e-12`, stopping at a relative change of `1e-2·2^{-L}`,
    /// 100 samples.
    pub fn new(g: TreeTensorNetwork<T>, kernel: TreeTensorNetwork<T>, alpha: u32) -> Result<Self> {
        let tx = g.tree();
        let offset = tx.max_var();
        let bridges: Vec<(DigitId, DigitId)> = kernel
            .tree()
            .edge_labels()
            .into_iter()
            .filter_map(|(a, b)| match (a.var <= offset, b.var <= offset) {
                (true, false) => Some((a, b)),
                (false, true) => Some((b, a)),
                _ => None,
            })
            .collect();
        if bridges.len() != 1 {
            return Err(Error::TreeMismatch);
        }
        if &build_doubled_tree(tx, &bridges)? != kernel.tree() {
            return Err(Error::TreeMismatch);
        }
        let levels = tx.levels();
        Ok(Self {
            g,
            kernel,
            alpha,
            lambda: T::one(),
            iterations: 20,
            chi_max: None,
            tol: 1e-12,
            stop_tol: Some(1e-2 * 0.5f64.powi(levels as i32)),
            samples: 100,
            seed: 0,
        })
    }

    pub fn offset(&self) -> usize {
        self.g.tree().max_var()
    }

    fn cap(&self) -> usize {
        self.chi_max.unwrap_or(usize::MAX)
    }

    /// Per-edge bound `χ_g(e) + χ_K(e)` in the order of `g`'s edges.
    pub fn rank_bound(&self) -> Vec<usize> {
        let kt = self.kernel.tree();
        self.g
            .tree()
            .edge_labels()
            .into_iter()
            .enumerate()
            .map(|(e, (a, b))| {
                let ke = kt
                    .edge_between(kt.position(a).unwrap(), kt.position(b).unwrap())
                    .expect("x edges are shared with the kernel tree");
                self.g.bond_dim(e) + self.kernel.bond_dim(ke)
            })
            .collect()
    }

    /// One application of the fixed-point map `f ↦ g + λ ∫ K f^α dt`.
    pub fn step(&self, f: &TreeTensorNetwork<T>) -> Result<TreeTensorNetwork<T>> {
        if f.tree() != self.g.tree() {
            return Err(Error::TreeMismatch);
        }
        let offset = self.offset();
        let ft = shift_variables(f, offset as isize)?;
        let lifted = power(&ft, self.alpha, self.cap())?.lift_to(self.kernel.tree())?;
        let integrand = self.kernel.multiply(&lifted)?;
        let t_vars: Vec<usize> = self.g.tree().variables().iter().map(|&v| v + offset).collect();
        let integral = integrand
            .partial_integrate(&t_vars)?
            .into_network()
            .ok_or(Error::TreeMismatch)?;
        let integral = TreeTensorNetwork::new(self.g.tree().clone(), integral.into_parts().1)?;
        integral
            .scaled(self.lambda)
            .add(&self.g)?
            .truncate(self.cap(), self.tol)
    }
}

/// One solver iteration as recorded in the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Mean absolute error against the reference solution, when given.
    pub error: Option<f64>,
    /// Mean absolute change relative to the mean magnitude of the new
    /// iterate, over the sample points.
    pub change: f64,
    pub max_bond: usize,
    /// Largest per-edge value of `χ_g + χ_K`.
    pub bound: usize,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Set when the change grew three iterations in a row.
    pub diverged: bool,
}

impl SolveTrace {
    pub fn final_error(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.error)
    }

    pub fn bound_held(&self) -> bool {
        self.records.iter().all(|r| r.bound_holds)
    }
}

/// Runs the fixed-point iteration from `initial`.
pub fn solve<T: Scalar>(
    problem: &FredholmProblem<T>,
    initial: &TreeTensorNetwork<T>,
    reference: Option<&dyn GridFunction<T>>,
) -> Result<(TreeTensorNetwork<T>, SolveTrace)> {
    solve_with(problem, initial, reference, |_| {})
}

/// [`solve`] reporting every iteration to `progress`.
pub fn solve_with<T: Scalar>(
    problem: &FredholmProblem<T>,
    initial: &TreeTensorNetwork<T>,
    reference: Option<&dyn GridFunction<T>>,
    mut progress: impl FnMut(&IterationRecord),
) -> Result<(TreeTensorNetwork<T>, SolveTrace)> {
    let samples = SampleSet::for_tree(problem.g.tree(), problem.samples, problem.seed);
    let bound = problem.rank_bound();
    let bound_max = bound.iter().copied().max().unwrap_or(1);
    let exact: Option<Vec<T>> = reference.map(|f| samples.points.iter().map(|p| f.eval(p)).collect());

    let mut trace = SolveTrace::default();
    let mut f = initial.clone();
    let mut old = f.evaluate_many(&samples.points)?;
    let mut growth = 0;
    for iteration in 1..=problem.iterations {
        f = problem.step(&f)?;
        let new = f.evaluate_many(&samples.points)?;
        let diff: f64 = new.iter().zip(&old).map(|(a, b)| (*a - *b).modulus()).sum();
        let size: f64 = new.iter().map(|a| a.modulus()).sum();
        let change = if size > 0.0 { diff / size } else { diff };
        let error = exact.as_ref().map(|ex| {
            new.iter().zip(ex).map(|(a, b)| (*a - *b).modulus()).sum::<f64>() / new.len().max(1) as f64
        });
        let bonds = f.bond_dims();
        let record = IterationRecord {
            iteration,
            error,
            change,
            max_bond: f.max_bond(),
            bound: bound_max,
            bound_holds: bonds.iter().zip(&bound).all(|(b, m)| b <= m),
        };
        if let Some(prev) = trace.records.last() {
            growth = if change > prev.change { growth + 1 } else { 0 };
            if growth >= 3 {
                trace.diverged = true;
            }
        }
        progress(&record);
        trace.records.push(record);
        old = new;
        if problem.stop_tol.is_some_and(|s| change < s) {
            trace.converged = true;
            break;
        }
    }
    Ok((f, trace))
}
