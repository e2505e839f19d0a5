//! Tree tensor cross interpolation.
//!
//! The state keeps the network in the interpolative gauge: every tensor
//! except the center is an interpolation factor pointing toward the center,
//! and the center holds exact target values at the bit configurations named
//! by the pivot lists on its bonds.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::scalar::Scalar;
use crate::tensor::{contract, interpolative_decomposition, DenseTensor, Index, IndexId};
use crate::topology::{DigitId, GridPoint, LabeledTree};
use crate::ttn::{layout_ids, TreeTensorNetwork};

/// Relative tolerance of the decompositions that bring an initial guess
/// into the interpolative gauge.
const INIT_TOL: f64 = 1e-14;

/// Pivot lists per directed edge `(from, to)`.
///
/// Entry `α` of a list is the bit configuration of the subtree on `from`'s
/// side selected by bond value `α`. Configurations are stored as one bit per
/// tree vertex (by position) and are zero outside that subtree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PivotTable {
    lists: BTreeMap<(usize, usize), Vec<Vec<u8>>>,
}

impl PivotTable {
    pub fn get(&self, from: usize, to: usize) -> Option<&[Vec<u8>]> {
        self.lists.get(&(from, to)).map(Vec::as_slice)
    }

    pub fn len_of(&self, from: usize, to: usize) -> usize {
        self.lists.get(&(from, to)).map_or(0, Vec::len)
    }

    /// The configuration of pivot `alpha` as digit assignments over exactly
    /// the subtree on `from`'s side.
    pub fn assignment(&self, tree: &LabeledTree, from: usize, to: usize, alpha: usize) -> Option<Vec<(DigitId, u8)>> {
        let cfg = self.lists.get(&(from, to))?.get(alpha)?;
        Some(
            tree.side(from, to)
                .into_iter()
                .map(|v| (tree.vertex(v), cfg[v]))
                .collect(),
        )
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.lists.keys().copied()
    }
}

/// Parameters of a learning run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TciOptions {
    pub chi_max: usize,
    /// Relative tolerance for both the entry replacement and the
    /// interpolative decompositions.
    pub tol: f64,
    pub sweeps: usize,
}

impl Default for TciOptions {
    fn default() -> Self {
        Self {
            chi_max: 16,
            tol: 1e-12,
            sweeps: 10,
        }
    }
}

/// Outcome of one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    /// Largest deviation between interpolated and exact values seen during
    /// the sweep.
    pub error: f64,
    pub max_bond: usize,
    /// Cumulative number of target evaluations.
    pub calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TciReport {
    pub sweeps: Vec<SweepRecord>,
    pub bond_dims: Vec<usize>,
    pub calls: u64,
}

impl TciReport {
    pub fn errors(&self) -> Vec<f64> {
        self.sweeps.iter().map(|s| s.error).collect()
    }
}

/// A network in the interpolative gauge together with its target.
pub struct TciState<'f, T: Scalar> {
    tree: LabeledTree,
    tensors: Vec<DenseTensor<T>>,
    pivots: PivotTable,
    center: usize,
    target: &'f dyn GridFunction<T>,
    calls: u64,
    slots: Vec<usize>,
    n_bits: usize,
    growth_base: BTreeMap<(usize, usize), usize>,
}

/// Rank-one initial guess: the constant `f(0, ..., 0)`, or one when that
/// value vanishes.
pub fn default_guess<T: Scalar>(tree: &LabeledTree, f: &dyn GridFunction<T>) -> TreeTensorNetwork<T> {
    let origin = GridPoint::zeros(tree.max_var(), tree.levels());
    let v = f.eval(&origin);
    let c = if v.modulus() > 0.0 { v } else { T::one() };
    crate::funcbuild::constant(tree, c)
}

/// Rank-one guess whose initial pivots all sit on `anchor`; useful when `f`
/// is concentrated away from the origin.
pub fn anchored_guess<T: Scalar>(tree: &LabeledTree, anchor: &GridPoint) -> Result<TreeTensorNetwork<T>> {
    crate::funcbuild::delta_at(tree, anchor)
}

impl<'f, T: Scalar> TciState<'f, T> {
    /// Brings `guess` into the interpolative gauge with center `root` by
    /// interpolative decompositions from the leaves inward, then fills the
    /// center with exact values of `f`.
    pub fn new(guess: TreeTensorNetwork<T>, f: &'f dyn GridFunction<T>, root: DigitId) -> Result<Self> {
        let (tree, tensors) = guess.into_parts();
        let root = tree
            .position(root)
            .ok_or_else(|| Error::InvalidParameter(format!("digit {root} is not in the tree")))?;
        let slots = tree
            .vertices()
            .iter()
            .map(|d| (d.var - 1) * tree.levels() + d.digit - 1)
            .collect();
        let n_bits = tree.max_var() * tree.levels();
        let mut state = Self {
            tree,
            tensors,
            pivots: PivotTable::default(),
            center: root,
            target: f,
            calls: 0,
            slots,
            n_bits,
            growth_base: BTreeMap::new(),
        };
        state.init_gauge()?;
        Ok(state)
    }

    fn init_gauge(&mut self) -> Result<()> {
        let rooting = self.tree.rooted(self.center);
        for &u in rooting.order.iter().rev() {
            let Some((p, e)) = rooting.parent[u] else { continue };
            let others = self.others(u, p);
            let configs = self.local_configs(u, &others);
            let row_ids = self.row_ids(u, &others);
            let (m, row_idx, col_idx) = self.tensors[u].matricize(&row_ids)?;
            if m.iter().all(|x| x.modulus() == 0.0) {
                return Err(Error::DegenerateInit);
            }
            let id = interpolative_decomposition(&m.transpose(), INIT_TOL, m.ncols());
            let r = id.pivots.len();
            let z = DenseTensor::from_matrix(&id.z.transpose(), row_idx, vec![Index::new(IndexId::Bond(e), r)])?;
            self.tensors[u] = self.canonical(u, z)?;
            let c = DenseTensor::from_matrix(&m.select_rows(&id.pivots), vec![Index::new(IndexId::Aux(0), r)], col_idx)?;
            let mut merged = contract(&c, &self.tensors[p])?;
            merged.rename(IndexId::Aux(0), IndexId::Bond(e));
            self.tensors[p] = merged;
            let list = id.pivots.iter().map(|&k| configs[k].clone()).collect();
            self.pivots.lists.insert((u, p), list);
        }
        let root = self.center;
        if self.tensors[root].max_abs() == 0.0 {
            return Err(Error::DegenerateInit);
        }
        let all = self.others(root, usize::MAX);
        let configs = self.local_configs(root, &all);
        let values = self.sample(&configs, &[vec![0; self.tree.len()]]);
        let indices = self.tensors[root].permute(&layout_ids(&self.tree, root))?.indices().to_vec();
        self.tensors[root] = DenseTensor::new(indices, values.as_slice().to_vec())?;
        Ok(())
    }

    pub fn tree(&self) -> &LabeledTree {
        &self.tree
    }

    pub fn center(&self) -> DigitId {
        self.tree.vertex(self.center)
    }

    pub fn center_tensor(&self) -> &DenseTensor<T> {
        &self.tensors[self.center]
    }

    pub fn pivots(&self) -> &PivotTable {
        &self.pivots
    }

    /// Number of target evaluations so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn max_bond(&self) -> usize {
        (0..self.tree.edges().len())
            .map(|e| self.bond_dim(e))
            .max()
            .unwrap_or(1)
    }

    fn bond_dim(&self, e: usize) -> usize {
        let (a, _) = self.tree.edges()[e];
        self.tensors[a].dim(IndexId::Bond(e)).unwrap_or(1)
    }

    pub fn network(&self) -> Result<TreeTensorNetwork<T>> {
        TreeTensorNetwork::new(self.tree.clone(), self.tensors.clone())
    }

    pub fn into_network(self) -> Result<TreeTensorNetwork<T>> {
        TreeTensorNetwork::new(self.tree, self.tensors)
    }

    /// Neighbors of `v` other than `skip`, with their edges.
    fn others(&self, v: usize, skip: usize) -> Vec<(usize, usize)> {
        self.tree
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&(w, _)| w != skip)
            .collect()
    }

    fn row_ids(&self, v: usize, others: &[(usize, usize)]) -> Vec<IndexId> {
        std::iter::once(IndexId::Site(v))
            .chain(others.iter().map(|&(_, e)| IndexId::Bond(e)))
            .collect()
    }

    fn canonical(&self, v: usize, t: DenseTensor<T>) -> Result<DenseTensor<T>> {
        t.permute(&layout_ids(&self.tree, v))
    }

    /// Configurations of `v`'s bit combined with the pivots `others → v`,
    /// enumerated row-major with the site slowest.
    fn local_configs(&self, v: usize, others: &[(usize, usize)]) -> Vec<Vec<u8>> {
        let lists: Vec<&[Vec<u8>]> = others
            .iter()
            .map(|&(w, _)| self.pivots.get(w, v).expect("pivot list toward the center"))
            .collect();
        let radix: Vec<usize> = lists.iter().map(|l| l.len()).collect();
        let total = 2 * radix.iter().product::<usize>();
        (0..total)
            .map(|mut k| {
                let mut cfg = vec![0u8; self.tree.len()];
                for (list, &r) in lists.iter().zip(&radix).rev() {
                    for (c, &b) in cfg.iter_mut().zip(&list[k % r]) {
                        *c |= b;
                    }
                    k /= r;
                }
                cfg[v] = k as u8;
                cfg
            })
            .collect()
    }

    fn point(&self, a: &[u8], b: &[u8]) -> GridPoint {
        let mut bits = vec![0u8; self.n_bits];
        for (v, &slot) in self.slots.iter().enumerate() {
            bits[slot] = a[v] | b[v];
        }
        GridPoint::from_raw(self.tree.levels(), bits)
    }

    /// Exact values `f(row ∪ col)` for every pair of disjoint partial
    /// configurations.
    fn sample(&mut self, rows: &[Vec<u8>], cols: &[Vec<u8>]) -> DMatrix<T> {
        let nc = cols.len();
        let total = rows.len() * nc;
        self.calls += total as u64;
        let this = &*self;
        let data: Vec<T> = (0..total)
            .into_par_iter()
            .map(|k| this.target.eval(&this.point(&rows[k / nc], &cols[k % nc])))
            .collect();
        DMatrix::from_row_slice(rows.len(), nc, &data)
    }

    /// Contracts the center with `neighbor`, replaces entries deviating
    /// from the target by more than `tol·max|Π|` with exact values, and
    /// splits the result by an interpolative decomposition so the center
    /// moves to `neighbor`. Returns the largest deviation observed.
    pub fn two_site_update(&mut self, neighbor: DigitId, chi_max: usize, tol: f64) -> Result<f64> {
        let n = self
            .tree
            .position(neighbor)
            .ok_or_else(|| Error::InvalidParameter(format!("digit {neighbor} is not in the tree")))?;
        self.update(n, chi_max, tol)
    }

    fn update(&mut self, n: usize, chi_max: usize, tol: f64) -> Result<f64> {
        let c = self.center;
        let e = self.tree.edge_between(c, n).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{} is not adjacent to the center {}",
                self.tree.vertex(n),
                self.tree.vertex(c)
            ))
        })?;
        let wc = self.others(c, n);
        let wn = self.others(n, c);
        let rows = self.local_configs(c, &wc);
        let cols = self.local_configs(n, &wn);
        let row_ids = self.row_ids(c, &wc);
        let col_ids = self.row_ids(n, &wn);
        let order: Vec<IndexId> = row_ids.iter().chain(&col_ids).copied().collect();
        let pi = contract(&self.tensors[c], &self.tensors[n])?.permute(&order)?;
        let (interp, row_idx, col_idx) = pi.matricize(&row_ids)?;
        let exact = self.sample(&rows, &cols);

        let scale = exact.iter().map(|x| x.modulus()).fold(0.0, f64::max);
        let mut updated = interp;
        let mut deviation = 0.0f64;
        for (u, &x) in updated.iter_mut().zip(exact.iter()) {
            let d = (*u - x).modulus();
            deviation = deviation.max(d);
            if !(d <= tol * scale) {
                *u = x;
            }
        }

        let base = self
            .growth_base
            .get(&(c, n))
            .copied()
            .unwrap_or_else(|| self.pivots.len_of(c, n).max(self.bond_dim(e)));
        let cap = chi_max.min(2 * base).max(1);
        let id = interpolative_decomposition(&updated.transpose(), tol, cap);
        let r = id.pivots.len();
        let bond = Index::new(IndexId::Bond(e), r);
        let z = DenseTensor::from_matrix(&id.z.transpose(), row_idx, vec![bond])?;
        let center = DenseTensor::from_matrix(&exact.select_rows(&id.pivots), vec![bond], col_idx)?;
        self.tensors[c] = self.canonical(c, z)?;
        self.tensors[n] = self.canonical(n, center)?;
        let list = id.pivots.iter().map(|&k| rows[k].clone()).collect();
        self.pivots.lists.insert((c, n), list);
        self.center = n;
        Ok(deviation)
    }

    /// One depth-first Euler tour from the default root over every edge,
    /// starting by moving the center back to the root if needed. Each edge
    /// may at most double its pivot count per sweep, up to `chi_max`.
    pub fn sweep(&mut self, chi_max: usize, tol: f64) -> Result<f64> {
        let root = self.tree.default_root();
        self.growth_base.clear();
        for &(a, b) in self.tree.edges() {
            for (u, v) in [(a, b), (b, a)] {
                let e = self.tree.edge_between(u, v).unwrap();
                let len = self.pivots.len_of(u, v).max(self.bond_dim(e));
                self.growth_base.insert((u, v), len);
            }
        }
        let mut error = 0.0f64;
        for next in self.path_to(root) {
            error = error.max(self.update(next, chi_max, tol)?);
        }
        for next in euler_tour(&self.tree, root) {
            error = error.max(self.update(next, chi_max, tol)?);
        }
        self.growth_base.clear();
        Ok(error)
    }

    /// Vertices visited when walking the center to `target`, excluding the
    /// current center.
    fn path_to(&self, target: usize) -> Vec<usize> {
        let rooting = self.tree.rooted(target);
        let mut out = Vec::new();
        let mut v = self.center;
        while let Some((p, _)) = rooting.parent[v] {
            out.push(p);
            v = p;
        }
        out
    }

    /// Largest deviation between center entries and the target at
    /// `samples` random center positions. These evaluations are not counted
    /// in [`TciState::calls`].
    pub fn check_gauge<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> f64 {
        let c = self.center;
        let all = self.others(c, usize::MAX);
        let t = &self.tensors[c];
        let dims = t.dims();
        let zero = vec![0u8; self.tree.len()];
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let ix: Vec<usize> = dims.iter().map(|&d| rng.random_range(0..d)).collect();
            let mut cfg = vec![0u8; self.tree.len()];
            cfg[c] = ix[0] as u8;
            for (&(w, _), &a) in all.iter().zip(&ix[1..]) {
                let p = &self.pivots.get(w, c).expect("pivot list toward the center")[a];
                for (x, &b) in cfg.iter_mut().zip(p) {
                    *x |= b;
                }
            }
            let exact = self.target.eval(&self.point(&cfg, &zero));
            worst = worst.max((exact - t.get(&ix)).modulus());
        }
        worst
    }
}

/// Center moves of a depth-first Euler tour from `root`, which end back at
/// `root`.
pub fn euler_tour(tree: &LabeledTree, root: usize) -> Vec<usize> {
    let rooting = tree.rooted(root);
    let mut out = Vec::with_capacity(2 * tree.edges().len());
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        let children: Vec<usize> = rooting.children(tree, v).map(|(w, _)| w).collect();
        if *next < children.len() {
            let w = children[*next];
            *next += 1;
            out.push(w);
            stack.push((w, 0));
        } else {
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                out.push(p);
            }
        }
    }
    out
}

/// Learns `f` on `tree` from the default rank-one guess.
pub fn tci_learn<T: Scalar>(
    f: &dyn GridFunction<T>,
    tree: &LabeledTree,
    options: &TciOptions,
) -> Result<(TreeTensorNetwork<T>, TciReport)> {
    tci_learn_from(f, default_guess(tree, f), options, |_| {})
}

/// Learns `f` starting from `guess`, reporting each finished sweep to
/// `progress`.
pub fn tci_learn_from<T: Scalar>(
    f: &dyn GridFunction<T>,
    guess: TreeTensorNetwork<T>,
    options: &TciOptions,
    mut progress: impl FnMut(&SweepRecord),
) -> Result<(TreeTensorNetwork<T>, TciReport)> {
    let root = guess.tree().vertex(guess.tree().default_root());
    let mut state = TciState::new(guess, f, root)?;
    let mut sweeps = Vec::with_capacity(options.sweeps);
    for sweep in 1..=options.sweeps {
        let error = state.sweep(options.chi_max, options.tol)?;
        let record = SweepRecord {
            sweep,
            error,
            max_bond: state.max_bond(),
            calls: state.calls(),
        };
        progress(&record);
        sweeps.push(record);
    }
    let calls = state.calls();
    let net = state.into_network()?;
    let report = TciReport {
        sweeps,
        bond_dims: net.bond_dims(),
        calls,
    };
    Ok((net, report))
}
