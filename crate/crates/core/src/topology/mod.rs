//! Labeled trees over binary digits and the bit/real encoding.

mod generators;

pub use generators::{
    BinaryTree, Comb, CoupledBinary, PathInterleaved, PathSequential, Star, TreeGenerator,
    TreeRegistry,
};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of one binary digit: the `digit`-th most significant bit of
/// variable `var`. Both fields are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitId {
    pub var: usize,
    pub digit: usize,
}

impl DigitId {
    pub const fn new(var: usize, digit: usize) -> Self {
        Self { var, digit }
    }
}

impl fmt::Display for DigitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.var, self.digit)
    }
}

impl FromStr for DigitId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDigit(s.to_string());
        let (v, d) = s.trim().split_once('.').ok_or_else(bad)?;
        let var: usize = v.parse().map_err(|_| bad())?;
        let digit: usize = d.parse().map_err(|_| bad())?;
        if var == 0 || digit == 0 {
            return Err(bad());
        }
        Ok(Self { var, digit })
    }
}

/// Human-writable tree description: vertices as `"i.j"` labels and edges as
/// label pairs.
///
/// ```toml
/// vertices = ["1.1", "1.2", "1.3"]
/// edges = [["1.1", "1.2"], ["1.2", "1.3"]]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl TreeSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("tree spec serializes")
    }
}

/// Builds and validates a tree from its textual description.
pub fn build_tree(spec: &TreeSpec) -> Result<LabeledTree> {
    let vertices = spec
        .vertices
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<DigitId>>>()?;
    let edges = spec
        .edges
        .iter()
        .map(|[a, b]| Ok((a.parse()?, b.parse()?)))
        .collect::<Result<Vec<_>>>()?;
    LabeledTree::new(vertices, edges)
}

/// A tree whose vertices are binary digits.
///
/// Vertices are stored sorted by [`DigitId`] and edges as sorted
/// `(low, high)` vertex-position pairs, so two trees with the same vertex
/// and edge sets compare equal and share vertex and edge numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    vertices: Vec<DigitId>,
    edges: Vec<(usize, usize)>,
    /// Per vertex: `(neighbor, edge)` sorted by neighbor label.
    adjacency: Vec<Vec<(usize, usize)>>,
    positions: BTreeMap<DigitId, usize>,
    variables: Vec<usize>,
    levels: usize,
}

impl LabeledTree {
    /// Validates vertices and edges. Every variable that appears must carry
    /// all digits `1..=L`, where `L` is the largest digit index present.
    pub fn new(vertices: Vec<DigitId>, edges: Vec<(DigitId, DigitId)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::DisconnectedTree("tree has no vertices".into()));
        }
        let mut positions = BTreeMap::new();
        for &v in &vertices {
            if v.var == 0 || v.digit == 0 {
                return Err(Error::InvalidDigit(v.to_string()));
            }
            if positions.insert(v, 0).is_some() {
                return Err(Error::DuplicateDigit(v));
            }
        }
        let mut sorted: Vec<DigitId> = positions.keys().copied().collect();
        sorted.sort();
        for (i, v) in sorted.iter().enumerate() {
            positions.insert(*v, i);
        }

        let levels = sorted.iter().map(|v| v.digit).max().unwrap_or(0);
        let variables: Vec<usize> = sorted
            .iter()
            .map(|v| v.var)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for &var in &variables {
            for digit in 1..=levels {
                let d = DigitId::new(var, digit);
                if !positions.contains_key(&d) {
                    return Err(Error::MissingDigit(d));
                }
            }
        }

        let mut edge_set = BTreeSet::new();
        for &(a, b) in &edges {
            let pa = *positions.get(&a).ok_or(Error::MissingDigit(a))?;
            let pb = *positions.get(&b).ok_or(Error::MissingDigit(b))?;
            if pa == pb {
                return Err(Error::CycleDetected(format!("self loop at {a}")));
            }
            if !edge_set.insert((pa.min(pb), pa.max(pb))) {
                return Err(Error::CycleDetected(format!("repeated edge {a}-{b}")));
            }
        }

        // union-find: any edge joining an already connected pair closes a cycle
        let mut parent: Vec<usize> = (0..sorted.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &edge_set {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Err(Error::CycleDetected(format!(
                    "edge {}-{} closes a loop",
                    sorted[a], sorted[b]
                )));
            }
            parent[ra] = rb;
        }
        if edge_set.len() + 1 != sorted.len() {
            return Err(Error::DisconnectedTree(format!(
                "{} vertices but {} edges",
                sorted.len(),
                edge_set.len()
            )));
        }

        let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); sorted.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        Ok(Self {
            vertices: sorted,
            edges,
            adjacency,
            positions,
            variables,
            levels,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[DigitId] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> DigitId {
        self.vertices[v]
    }

    pub fn position(&self, d: DigitId) -> Option<usize> {
        self.positions.get(&d).copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_labels(&self) -> Vec<(DigitId, DigitId)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.vertices[a], self.vertices[b]))
            .collect()
    }

    /// `(neighbor, edge)` pairs of vertex `v`, ordered by neighbor label.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, e)| e)
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Digits per variable.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Sorted variable indices present in the tree.
    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    pub fn max_var(&self) -> usize {
        *self.variables.last().expect("non-empty tree")
    }

    /// Vertex used as root by truncation and cross interpolation: digit
    /// `1.1` when present, otherwise the smallest label.
    pub fn default_root(&self) -> usize {
        self.position(DigitId::new(1, 1)).unwrap_or(0)
    }

    /// Breadth-first rooting of the tree.
    pub fn rooted(&self, root: usize) -> Rooting {
        let n = self.len();
        let mut parent = vec![None; n];
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, e) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e));
                    queue.push_back(w);
                }
            }
        }
        Rooting {
            root,
            order,
            parent,
        }
    }

    /// Vertices on `from`'s side of the edge `from`–`to`, sorted.
    pub fn side(&self, from: usize, to: usize) -> Vec<usize> {
        let mut out = vec![from];
        let mut stack = vec![(from, to)];
        while let Some((v, came)) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if w != came {
                    out.push(w);
                    stack.push((w, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Returns the same tree with every label passed through `f`.
    pub fn relabel(&self, f: impl Fn(DigitId) -> DigitId) -> Result<Self> {
        let vertices = self.vertices.iter().map(|&v| f(v)).collect();
        let edges = self
            .edges
            .iter()
            .map(|&(a, b)| (f(self.vertices[a]), f(self.vertices[b])))
            .collect();
        Self::new(vertices, edges)
    }

    pub fn to_spec(&self) -> TreeSpec {
        TreeSpec {
            vertices: self.vertices.iter().map(ToString::to_string).collect(),
            edges: self
                .edge_labels()
                .into_iter()
                .map(|(a, b)| [a.to_string(), b.to_string()])
                .collect(),
        }
    }
}

/// A rooted view of a tree: breadth-first order and parent links.
#[derive(Debug, Clone)]
pub struct Rooting {
    pub root: usize,
    /// Breadth-first order starting at the root; reversed it is a valid
    /// leaves-to-root order.
    pub order: Vec<usize>,
    /// `(parent, edge)` for every vertex except the root.
    pub parent: Vec<Option<(usize, usize)>>,
}

impl Rooting {
    pub fn children<'a>(
        &'a self,
        tree: &'a LabeledTree,
        v: usize,
    ) -> impl Iterator<Item = (usize, usize)> + 'a {
        let up = self.parent[v].map(|(p, _)| p);
        tree.neighbors(v)
            .iter()
            .copied()
            .filter(move |&(w, _)| Some(w) != up)
    }
}

/// Binary digits of `x`, most significant first, truncated to the grid.
pub fn encode(x: f64, levels: usize) -> Result<Vec<u8>> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    // doubling and subtracting one are exact in binary floating point
    let mut r = x;
    Ok((0..levels)
        .map(|_| {
            r *= 2.0;
            if r >= 1.0 {
                r -= 1.0;
                1
            } else {
                0
            }
        })
        .collect())
}

/// `Σ_j bits_j / 2^j`.
pub fn decode(bits: &[u8]) -> f64 {
    let mut scale = 0.5;
    let mut x = 0.0;
    for &b in bits {
        if b != 0 {
            x += scale;
        }
        scale *= 0.5;
    }
    x
}

/// A complete assignment of digits for variables `1..=n_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPoint {
    levels: usize,
    bits: Vec<u8>,
}

impl GridPoint {
    pub fn zeros(n_vars: usize, levels: usize) -> Self {
        Self {
            levels,
            bits: vec![0; n_vars * levels],
        }
    }

    /// Grid point at the largest grid values not exceeding `coords`.
    pub fn from_coords(coords: &[f64], levels: usize) -> Result<Self> {
        let mut bits = Vec::with_capacity(coords.len() * levels);
        for &x in coords {
            bits.extend(encode(x, levels)?);
        }
        Ok(Self { levels, bits })
    }

    pub fn random<R: Rng + ?Sized>(n_vars: usize, levels: usize, rng: &mut R) -> Self {
        Self {
            levels,
            bits: (0..n_vars * levels)
                .map(|_| rng.random_range(0..2u8))
                .collect(),
        }
    }

    /// Point from raw bits laid out variable by variable, most significant
    /// digit first.
    pub(crate) fn from_raw(levels: usize, bits: Vec<u8>) -> Self {
        Self { levels, bits }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn n_vars(&self) -> usize {
        if self.levels == 0 {
            0
        } else {
            self.bits.len() / self.levels
        }
    }

    fn slot(&self, d: DigitId) -> Option<usize> {
        (d.var >= 1 && d.var <= self.n_vars() && d.digit >= 1 && d.digit <= self.levels)
            .then(|| (d.var - 1) * self.levels + d.digit - 1)
    }

    pub fn covers(&self, d: DigitId) -> bool {
        self.slot(d).is_some()
    }

    /// Digit value; panics when `d` is outside the point.
    pub fn get(&self, d: DigitId) -> u8 {
        self.bits[self.slot(d).expect("digit outside grid point")]
    }

    pub fn try_get(&self, d: DigitId) -> Result<u8> {
        self.slot(d)
            .map(|s| self.bits[s])
            .ok_or(Error::IncompleteGridPoint(d))
    }

    pub fn set(&mut self, d: DigitId, bit: u8) {
        let s = self.slot(d).expect("digit outside grid point");
        self.bits[s] = bit & 1;
    }

    /// Bits of variable `var` (1-based), most significant first.
    pub fn var_bits(&self, var: usize) -> &[u8] {
        &self.bits[(var - 1) * self.levels..var * self.levels]
    }

    pub fn coord(&self, var: usize) -> f64 {
        decode(self.var_bits(var))
    }

    pub fn coords(&self) -> Vec<f64> {
        (1..=self.n_vars()).map(|v| self.coord(v)).collect()
    }

    pub fn raw_bits(&self) -> &[u8] {
        &self.bits
    }
}
