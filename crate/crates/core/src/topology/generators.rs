use std::collections::BTreeMap;

use super::{DigitId, LabeledTree};
use crate::error::{Error, Result};

/// A named family of trees parameterized by the number of variables and
/// digits per variable.
pub trait TreeGenerator: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn generate(&self, n_vars: usize, levels: usize) -> Result<LabeledTree>;
}

fn check(n_vars: usize, levels: usize) -> Result<()> {
    if n_vars == 0 || levels == 0 {
        return Err(Error::InvalidParameter(format!(
            "tree needs n >= 1 and L >= 1, got n={n_vars}, L={levels}"
        )));
    }
    Ok(())
}

fn path(order: Vec<DigitId>) -> Result<LabeledTree> {
    let edges = order.windows(2).map(|w| (w[0], w[1])).collect();
    LabeledTree::new(order, edges)
}

/// Heap-shaped binary tree: the k-th label (1-based) hangs below label k/2.
fn heap_edges(order: &[DigitId]) -> Vec<(DigitId, DigitId)> {
    (2..=order.len())
        .map(|k| (order[k / 2 - 1], order[k - 1]))
        .collect()
}

fn sequential(n_vars: usize, levels: usize) -> Vec<DigitId> {
    (1..=n_vars)
        .flat_map(|i| (1..=levels).map(move |j| DigitId::new(i, j)))
        .collect()
}

fn interleaved(n_vars: usize, levels: usize) -> Vec<DigitId> {
    (1..=levels)
        .flat_map(|j| (1..=n_vars).map(move |i| DigitId::new(i, j)))
        .collect()
}

/// Tensor train with all digits of variable 1, then variable 2, and so on.
pub struct PathSequential;

impl TreeGenerator for PathSequential {
    fn name(&self) -> &'static str {
        "path-sequential"
    }
    fn description(&self) -> &'static str {
        "path with the digits of each variable contiguous, most significant first"
    }
    fn generate(&self, n_vars: usize, levels: usize) -> Result<LabeledTree> {
        check(n_vars, levels)?;
        path(sequential(n_vars, levels))
    }
}

/// Tensor train alternating variables at each significance level.
pub struct PathInterleaved;

impl TreeGenerator for PathInterleaved {
    fn name(&self) -> &'static str {
        "path-interleaved"
    }
    fn description(&self) -> &'static str {
        "path ordered 1.1, 2.1, ..., n.1, 1.2, 2.2, ..."
    }
    fn generate(&self, n_vars: usize, levels: usize) -> Result<LabeledTree> {
        check(n_vars, levels)?;
        path(interleaved(n_vars, levels))
    }
}

/// Single heap-ordered binary tree over the interleaved digit order, so the
/// most significant digits sit nearest the root.
pub struct BinaryTree;

impl TreeGenerator for BinaryTree {
    fn name(&self) -> &'static str {
        "binary-tree"
    }
    fn description(&self) -> &'static str {
        "one binary tree with significant digits near the root"
    }
    fn generate(&self, n_vars: usize, levels: usize) -> Result<LabeledTree> {
        check(n_vars, levels)?;
        let order = interleaved(n_vars, levels);
        let edges = heap_edges(&order);
        LabeledTree::new(order, edges)
    }
}

/// Sequential tensor trains, one per variable, joined along their most
/// significant digits. With a single variable the digits are split into a
/// spine `1..=s` (`s = ⌈L/2⌉`) and teeth, digit `s + i` hanging from digit `i`.
pub struct Comb;

impl TreeGenerator for Comb {
    fn name(&self) -> &'static str {
        "comb"
    }
    fn description(&self) -> &'static str {
        "per-variable trains coupled through their most significant digits"
    }
    fn generate(&self, n_vars: usize, levels: usize) -> Result<LabeledTree> {
        check(n_vars, levels)?;
        let vertices = sequential(n_vars, levels);
        let mut edges = Vec::new();
        if n_vars == 1 {
            let spine = levels.div_ceil(2);
            for j in 1..spine {
                edges.push((DigitId::new(1, j), DigitId::new(1, j + 1)));
            }
            for j in spine + 1..=levels {
                edges.push((DigitId::new(1, j - spine), DigitId::new(1, j)));
            }
        } else {
            for i in 1..=n_vars {
                for j in 1..levels {
                    edges.push((DigitId::new(i, j), DigitId::new(i, j + 1)));
                }
                if i > 1 {
                    edges.push((DigitId::new(i - 1, 1), DigitId::new(i, 1)));
                }
            }
        }
        LabeledTree::new(vertices, edges)
    }
}

/// One heap-ordered binary tree per variable with the roots joined in a
/// chain `1.1 – 2.1 – ... – n.1`.
pub struct CoupledBinary;

impl TreeGenerator for CoupledBinary {
    fn name(&self) -> &'static str {
        "coupled-binary"
    }
    fn description(&self) -> &'static str {
        "per-variable binary trees coupled at their roots"
    }
    fn generate(&self, n_vars: usize, levels: usize) -> Result<LabeledTree> {
        check(n_vars, levels)?;
        let mut edges = Vec::new();
        for i in 1..=n_vars {
            let order: Vec<DigitId> = (1..=levels).map(|j| DigitId::new(i, j)).collect();
            edges.extend(heap_edges(&order));
            if i > 1 {
                edges.push((DigitId::new(i - 1, 1), DigitId::new(i, 1)));
            }
        }
        LabeledTree::new(sequential(n_vars, levels), edges)
    }
}

/// Every digit attached directly to `1.1`.
pub struct Star;

impl TreeGenerator for Star {
    fn name(&self) -> &'static str {
        "star"
    }
    fn description(&self) -> &'static str {
        "all digits attached to the most significant digit of variable 1"
    }
    fn generate(&self, n_vars: usize, levels: usize) -> Result<LabeledTree> {
        check(n_vars, levels)?;
        let vertices = sequential(n_vars, levels);
        let center = DigitId::new(1, 1);
        let edges = vertices[1..].iter().map(|&v| (center, v)).collect();
        LabeledTree::new(vertices, edges)
    }
}

/// Tree layouts selectable by name.
pub struct TreeRegistry {
    generators: BTreeMap<&'static str, Box<dyn TreeGenerator>>,
}

impl TreeRegistry {
    pub fn empty() -> Self {
        Self {
            generators: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(PathSequential));
        r.register(Box::new(PathInterleaved));
        r.register(Box::new(BinaryTree));
        r.register(Box::new(Comb));
        r.register(Box::new(CoupledBinary));
        r.register(Box::new(Star));
        r
    }

    /// Adds a generator, replacing any previous one with the same name.
    pub fn register(&mut self, generator: Box<dyn TreeGenerator>) {
        self.generators.insert(generator.name(), generator);
    }

    pub fn get(&self, name: &str) -> Option<&dyn TreeGenerator> {
        self.generators.get(name).map(|g| g.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.generators.keys().copied()
    }

    pub fn build(&self, name: &str, n_vars: usize, levels: usize) -> Result<LabeledTree> {
        self.get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))?
            .generate(n_vars, levels)
    }
}

impl Default for TreeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
