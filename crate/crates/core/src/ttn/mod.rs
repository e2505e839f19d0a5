//! Tree tensor networks: one tensor per tree vertex.
//!
//! The tensor at vertex `v` carries `IndexId::Site(v)` (dimension 2) followed
//! by `IndexId::Bond(e)` for every incident edge `e`, in the tree's adjacency
//! order. Every network keeps this layout.

mod integrate;
mod io;
mod truncate;

pub use integrate::Reduced;
pub use io::AnyNetwork;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarKind};
use crate::tensor::{contract, direct_sum, outer_fuse, DenseTensor, Index, IndexId};
use crate::topology::{DigitId, GridPoint, LabeledTree};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeTensorNetwork<T> {
    tree: LabeledTree,
    tensors: Vec<DenseTensor<T>>,
}

/// Bond and memory summary of a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStats {
    pub max_bond: usize,
    /// `(endpoint, endpoint, dimension)` per edge in tree edge order.
    pub per_edge_bonds: Vec<(DigitId, DigitId, usize)>,
    /// Eight bytes per stored entry.
    pub memory_bytes: usize,
}

/// Canonical index list of vertex `v` given the bond dimension of each edge.
pub(crate) fn layout(tree: &LabeledTree, v: usize, bonds: &[usize]) -> Vec<Index> {
    std::iter::once(Index::new(IndexId::Site(v), 2))
        .chain(
            tree.neighbors(v)
                .iter()
                .map(|&(_, e)| Index::new(IndexId::Bond(e), bonds[e])),
        )
        .collect()
}

pub(crate) fn layout_ids(tree: &LabeledTree, v: usize) -> Vec<IndexId> {
    std::iter::once(IndexId::Site(v))
        .chain(tree.neighbors(v).iter().map(|&(_, e)| IndexId::Bond(e)))
        .collect()
}

impl<T: Scalar> TreeTensorNetwork<T> {
    /// Checks index names and dimensions, then permutes every tensor into
    /// the canonical layout.
    pub fn new(tree: LabeledTree, tensors: Vec<DenseTensor<T>>) -> Result<Self> {
        if tensors.len() != tree.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} tensors for {} vertices",
                tensors.len(),
                tree.len()
            )));
        }
        let mut bonds: Vec<Option<usize>> = vec![None; tree.edges().len()];
        let mut out = Vec::with_capacity(tensors.len());
        for (v, t) in tensors.into_iter().enumerate() {
            let ids = layout_ids(&tree, v);
            if t.rank() != ids.len() || ids.iter().any(|&id| !t.has(id)) {
                return Err(Error::DimensionMismatch(format!(
                    "tensor at {} has indices {:?}, expected {:?}",
                    tree.vertex(v),
                    t.ids(),
                    ids
                )));
            }
            if t.dim(IndexId::Site(v)) != Some(2) {
                return Err(Error::DimensionMismatch(format!(
                    "site index of {} must have dimension 2",
                    tree.vertex(v)
                )));
            }
            for &(_, e) in tree.neighbors(v) {
                let d = t.dim(IndexId::Bond(e)).unwrap();
                match bonds[e] {
                    None => bonds[e] = Some(d),
                    Some(x) if x == d => {}
                    Some(x) => {
                        return Err(Error::DimensionMismatch(format!(
                            "bond {e} has dimensions {x} and {d}"
                        )))
                    }
                }
            }
            out.push(t.permute(&ids)?);
        }
        Ok(Self { tree, tensors: out })
    }

    /// Rank-one network whose vertex `v` contributes the factor
    /// `local(v)[bit]`.
    pub fn rank_one(tree: &LabeledTree, mut local: impl FnMut(usize) -> [T; 2]) -> Self {
        let bonds = vec![1; tree.edges().len()];
        let tensors = (0..tree.len())
            .map(|v| {
                let f = local(v);
                DenseTensor::new(layout(tree, v, &bonds), f.to_vec()).expect("rank-one layout")
            })
            .collect();
        Self {
            tree: tree.clone(),
            tensors,
        }
    }

    /// Network with the given bond dimension per edge and entries drawn
    /// uniformly from `[-1, 1]` (real and imaginary parts independently).
    pub fn random<R: Rng + ?Sized>(tree: &LabeledTree, bonds: &[usize], rng: &mut R) -> Self {
        let mut draw = || {
            let re = rng.random_range(-1.0..=1.0);
            let im = match T::KIND {
                ScalarKind::Real => 0.0,
                ScalarKind::Complex => rng.random_range(-1.0..=1.0),
            };
            T::from_parts(re, im)
        };
        let tensors = (0..tree.len())
            .map(|v| DenseTensor::from_fn(layout(tree, v, bonds), |_| draw()))
            .collect();
        Self {
            tree: tree.clone(),
            tensors,
        }
    }

    /// The identically zero function as a rank-one network.
    pub fn zero(tree: &LabeledTree) -> Self {
        let z = tree.default_root();
        Self::rank_one(tree, |v| {
            if v == z {
                [T::zero(); 2]
            } else {
                [T::one(); 2]
            }
        })
    }

    pub fn tree(&self) -> &LabeledTree {
        &self.tree
    }

    pub fn tensors(&self) -> &[DenseTensor<T>] {
        &self.tensors
    }

    pub fn tensor(&self, v: usize) -> &DenseTensor<T> {
        &self.tensors[v]
    }

    pub fn into_parts(self) -> (LabeledTree, Vec<DenseTensor<T>>) {
        (self.tree, self.tensors)
    }

    pub fn bond_dim(&self, e: usize) -> usize {
        let (a, _) = self.tree.edges()[e];
        self.tensors[a].dim(IndexId::Bond(e)).unwrap()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        (0..self.tree.edges().len()).map(|e| self.bond_dim(e)).collect()
    }

    /// Largest bond dimension (1 for a single-vertex tree).
    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn stats(&self) -> NetworkStats {
        let labels = self.tree.edge_labels();
        let per_edge_bonds = labels
            .into_iter()
            .enumerate()
            .map(|(e, (a, b))| (a, b, self.bond_dim(e)))
            .collect();
        NetworkStats {
            max_bond: self.max_bond(),
            per_edge_bonds,
            memory_bytes: 8 * self.tensors.iter().map(|t| t.len()).sum::<usize>(),
        }
    }

    /// Contracts the network at grid point `p`, leaves first.
    pub fn evaluate(&self, p: &GridPoint) -> Result<T> {
        let root = self.tree.default_root();
        let rooting = self.tree.rooted(root);
        let mut partial: Vec<Option<DenseTensor<T>>> = vec![None; self.tree.len()];
        for &v in rooting.order.iter().rev() {
            let bit = p.try_get(self.tree.vertex(v))?;
            let mut t = self.tensors[v].slice(IndexId::Site(v), bit as usize)?;
            for (c, _) in rooting.children(&self.tree, v) {
                let msg = partial[c].take().expect("child processed first");
                t = contract(&t, &msg)?;
            }
            partial[v] = Some(t);
        }
        let top = partial[root].take().expect("root processed");
        Ok(top.data()[0])
    }

    /// Evaluates at many points in parallel.
    pub fn evaluate_many(&self, points: &[GridPoint]) -> Result<Vec<T>> {
        points.par_iter().map(|p| self.evaluate(p)).collect()
    }

    /// Contracts every bond, giving the full tensor over `Site(0..len)` in
    /// vertex order. Exponential in the number of vertices.
    pub fn full_contraction(&self) -> Result<DenseTensor<T>> {
        let rooting = self.tree.rooted(self.tree.default_root());
        let mut acc = self.tensors[rooting.order[0]].clone();
        for &v in &rooting.order[1..] {
            acc = contract(&acc, &self.tensors[v])?;
        }
        let order: Vec<IndexId> = (0..self.tree.len()).map(IndexId::Site).collect();
        acc.permute(&order)
    }

    fn check_tree(&self, other: &Self) -> Result<()> {
        if self.tree != other.tree {
            return Err(Error::TreeMismatch);
        }
        Ok(())
    }

    /// Pointwise sum; bond dimensions add edge by edge.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_tree(other)?;
        let tensors = (0..self.tree.len())
            .map(|v| direct_sum(&self.tensors[v], &other.tensors[v], &[IndexId::Site(v)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.tree.clone(), tensors)
    }

    /// Pointwise product; bond dimensions multiply edge by edge.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_tree(other)?;
        let tensors = (0..self.tree.len())
            .map(|v| {
                let fuse: Vec<(IndexId, IndexId)> = self
                    .tree
                    .neighbors(v)
                    .iter()
                    .map(|&(_, e)| (IndexId::Bond(e), IndexId::Bond(e)))
                    .collect();
                outer_fuse(
                    &self.tensors[v],
                    &other.tensors[v],
                    &[IndexId::Site(v)],
                    &fuse,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.tree.clone(), tensors)
    }

    /// Multiplies the function by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        let r = self.tree.default_root();
        out.tensors[r].scale(c);
        out
    }

    /// Moves the network onto `tree`, where old vertex `v` becomes
    /// `vmap[v]`. Every old edge must map to an edge of `tree`; vertices of
    /// `tree` not hit by `vmap` get all-ones tensors and edges not hit get
    /// bond dimension one.
    fn transplant(&self, tree: &LabeledTree, vmap: &[usize]) -> Result<Self> {
        let mut emap = Vec::with_capacity(self.tree.edges().len());
        for &(a, b) in self.tree.edges() {
            let e = tree
                .edge_between(vmap[a], vmap[b])
                .ok_or(Error::TreeMismatch)?;
            emap.push(e);
        }
        let mut bonds = vec![1; tree.edges().len()];
        for (e, &ne) in emap.iter().enumerate() {
            bonds[ne] = self.bond_dim(e);
        }
        let mut tensors: Vec<Option<DenseTensor<T>>> = vec![None; tree.len()];
        for (v, t) in self.tensors.iter().enumerate() {
            let nv = vmap[v];
            let mut t = t.clone();
            t.rename(IndexId::Site(v), IndexId::Aux(0));
            for &(_, e) in self.tree.neighbors(v) {
                t.rename(IndexId::Bond(e), IndexId::Aux(1 + emap[e]));
            }
            t.rename(IndexId::Aux(0), IndexId::Site(nv));
            for &(_, e) in self.tree.neighbors(v) {
                t.rename(IndexId::Aux(1 + emap[e]), IndexId::Bond(emap[e]));
            }
            for &(_, ne) in tree.neighbors(nv) {
                if !t.has(IndexId::Bond(ne)) {
                    t = t.with_unit_index(IndexId::Bond(ne), t.rank());
                }
            }
            tensors[nv] = Some(t);
        }
        let tensors = tensors
            .into_iter()
            .enumerate()
            .map(|(v, t)| {
                t.unwrap_or_else(|| DenseTensor::from_fn(layout(tree, v, &bonds), |_| T::one()))
            })
            .collect();
        Self::new(tree.clone(), tensors)
    }

    /// Same values with every vertex label passed through `f`; the label
    /// map must be injective.
    pub fn relabel(&self, f: impl Fn(DigitId) -> DigitId) -> Result<Self> {
        let tree = self.tree.relabel(&f)?;
        let vmap: Vec<usize> = self
            .tree
            .vertices()
            .iter()
            .map(|&d| tree.position(f(d)).expect("relabeled vertex present"))
            .collect();
        self.transplant(&tree, &vmap)
    }

    /// Embeds the network into a larger tree that contains this tree as a
    /// subtree. The function is constant in the added digits.
    pub fn lift_to(&self, tree: &LabeledTree) -> Result<Self> {
        let vmap = self
            .tree
            .vertices()
            .iter()
            .map(|&d| tree.position(d).ok_or(Error::TreeMismatch))
            .collect::<Result<Vec<_>>>()?;
        self.transplant(tree, &vmap)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.tensors {
            for x in t.data_mut() {
                *x = x.conjugate();
            }
        }
        out
    }
}

impl TreeTensorNetwork<f64> {
    pub fn to_complex(&self) -> TreeTensorNetwork<Complex64> {
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                DenseTensor::new(
                    t.indices().to_vec(),
                    t.data().iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                )
                .expect("same shape")
            })
            .collect();
        TreeTensorNetwork {
            tree: self.tree.clone(),
            tensors,
        }
    }
}

impl TreeTensorNetwork<Complex64> {
    /// Drops imaginary parts entrywise. Only meaningful when every tensor is
    /// real up to rounding, as after building a real function from
    /// conjugate pairs and truncating; use `real_part` otherwise.
    pub fn discard_imaginary(&self) -> TreeTensorNetwork<f64> {
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                DenseTensor::new(
                    t.indices().to_vec(),
                    t.data().iter().map(|x| x.re).collect(),
                )
                .expect("same shape")
            })
            .collect();
        TreeTensorNetwork {
            tree: self.tree.clone(),
            tensors,
        }
    }

    /// The real part `(f + f*)/2` as a complex network of doubled rank.
    pub fn real_part(&self) -> Result<Self> {
        let half = Complex64::new(0.5, 0.0);
        self.scaled(half).add(&self.conj().scaled(half))
    }

    /// A real network with values `Re f`.
    ///
    /// Every bond is doubled to carry the real and imaginary parts of the
    /// partial contraction flowing toward the default root, where only the
    /// real part is kept.
    pub fn real_values(&self) -> TreeTensorNetwork<f64> {
        let tree = &self.tree;
        let rooting = tree.rooted(tree.default_root());
        let doubled: Vec<usize> = self.bond_dims().iter().map(|&d| 2 * d).collect();
        let tensors = (0..tree.len())
            .map(|v| {
                let t = &self.tensors[v];
                let up = rooting.parent[v].map(|(_, e)| e);
                let out_axis = up.map(|e| {
                    1 + tree
                        .neighbors(v)
                        .iter()
                        .position(|&(_, f)| f == e)
                        .expect("parent edge is incident")
                });
                let mut orig = vec![0; t.rank()];
                DenseTensor::from_fn(layout(tree, v, &doubled), |ix| {
                    orig[0] = ix[0];
                    let mut quarter_turns = 0;
                    for k in 1..ix.len() {
                        orig[k] = ix[k] / 2;
                        if Some(k) != out_axis {
                            quarter_turns += ix[k] % 2;
                        }
                    }
                    let z = t.get(&orig) * Complex64::i().powi(quarter_turns as i32);
                    match out_axis {
                        Some(k) if ix[k] % 2 == 1 => z.im,
                        _ => z.re,
                    }
                })
            })
            .collect();
        TreeTensorNetwork {
            tree: tree.clone(),
            tensors,
        }
    }
}

#[cfg(test)]
mod tests;
