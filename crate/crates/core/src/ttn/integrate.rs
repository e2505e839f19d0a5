use std::collections::BTreeMap;

use super::TreeTensorNetwork;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{contract, DenseTensor, Index, IndexId};
use crate::topology::{DigitId, LabeledTree};

/// Result of integrating out variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Reduced<T> {
    Network(TreeTensorNetwork<T>),
    Scalar(T),
}

impl<T: Scalar> Reduced<T> {
    pub fn into_network(self) -> Option<TreeTensorNetwork<T>> {
        match self {
            Reduced::Network(n) => Some(n),
            Reduced::Scalar(_) => None,
        }
    }

    pub fn into_scalar(self) -> Option<T> {
        match self {
            Reduced::Scalar(s) => Some(s),
            Reduced::Network(_) => None,
        }
    }
}

impl<T: Scalar> TreeTensorNetwork<T> {
    /// Integrates the listed variables over `[0, 1)` with the left-endpoint
    /// rule on the grid: every digit is summed with weight ½.
    ///
    /// Integrated vertices are merged into neighbors, leaves first, and the
    /// remaining vertices keep a tree formed by contracting the removed
    /// edges.
    pub fn partial_integrate(&self, vars: &[usize]) -> Result<Reduced<T>> {
        for &var in vars {
            if !self.tree.variables().contains(&var) {
                return Err(Error::InvalidParameter(format!(
                    "variable {var} is not part of the network"
                )));
            }
        }
        let n = self.tree.len();
        let integrated: Vec<bool> = self
            .tree
            .vertices()
            .iter()
            .map(|d| vars.contains(&d.var))
            .collect();
        let half = T::from_re(0.5);
        let mut tensors: Vec<Option<DenseTensor<T>>> = Vec::with_capacity(n);
        for v in 0..n {
            let t = &self.tensors[v];
            tensors.push(Some(if integrated[v] {
                let w = DenseTensor::new(vec![Index::new(IndexId::Site(v), 2)], vec![half, half])?;
                contract(t, &w)?
            } else {
                t.clone()
            }));
        }
        // live adjacency: vertex -> (neighbor, bond edge id)
        let mut adj: Vec<BTreeMap<usize, usize>> = (0..n)
            .map(|v| self.tree.neighbors(v).iter().copied().collect())
            .collect();
        let mut alive: Vec<bool> = vec![true; n];
        let mut remaining: usize = integrated.iter().filter(|&&x| x).count();

        while remaining > 0 {
            // prefer integrated leaves, then integrated vertices next to kept ones
            let pick = (0..n)
                .filter(|&u| alive[u] && integrated[u])
                .min_by_key(|&u| {
                    let kept_nbr = adj[u].keys().any(|&w| !integrated[w]);
                    (adj[u].len(), !kept_nbr, u)
                })
                .expect("remaining integrated vertex");
            let w = match adj[pick].keys().find(|&&w| !integrated[w]) {
                Some(&w) => w,
                None => match adj[pick].keys().next() {
                    Some(&w) => w,
                    None => {
                        // single remaining vertex: everything integrated
                        let t = tensors[pick].take().expect("alive tensor");
                        return Ok(Reduced::Scalar(t.data()[0]));
                    }
                },
            };
            let tu = tensors[pick].take().expect("alive tensor");
            let tw = tensors[w].take().expect("alive tensor");
            tensors[w] = Some(contract(&tw, &tu)?);
            let edges: Vec<(usize, usize)> = adj[pick].iter().map(|(&x, &b)| (x, b)).collect();
            adj[w].remove(&pick);
            for (x, b) in edges {
                if x != w {
                    adj[x].remove(&pick);
                    adj[x].insert(w, b);
                    adj[w].insert(x, b);
                }
            }
            adj[pick].clear();
            alive[pick] = false;
            remaining -= 1;
        }

        let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        let labels: Vec<DigitId> = kept.iter().map(|&v| self.tree.vertex(v)).collect();
        let mut edge_list = Vec::new();
        for &v in &kept {
            for (&w, &b) in &adj[v] {
                if v < w {
                    edge_list.push((v, w, b));
                }
            }
        }
        let tree = LabeledTree::new(
            labels,
            edge_list
                .iter()
                .map(|&(a, b, _)| (self.tree.vertex(a), self.tree.vertex(b)))
                .collect(),
        )?;
        let mut out = vec![None; tree.len()];
        for &v in &kept {
            let nv = tree.position(self.tree.vertex(v)).expect("kept vertex");
            let mut t = tensors[v].take().expect("alive tensor");
            t.rename(IndexId::Site(v), IndexId::Aux(0));
            for &(a, b, bond) in &edge_list {
                if a == v || b == v {
                    let ne = tree
                        .edge_between(
                            tree.position(self.tree.vertex(a)).unwrap(),
                            tree.position(self.tree.vertex(b)).unwrap(),
                        )
                        .expect("edge present");
                    t.rename(IndexId::Bond(bond), IndexId::Aux(1 + ne));
                }
            }
            t.rename(IndexId::Aux(0), IndexId::Site(nv));
            for ne in 0..tree.edges().len() {
                t.rename(IndexId::Aux(1 + ne), IndexId::Bond(ne));
            }
            out[nv] = Some(t);
        }
        let net = TreeTensorNetwork::new(tree, out.into_iter().map(|t| t.unwrap()).collect())?;
        Ok(Reduced::Network(net))
    }

    /// Integral over the whole unit cube.
    pub fn integrate_all(&self) -> Result<T> {
        let vars = self.tree.variables().to_vec();
        match self.partial_integrate(&vars)? {
            Reduced::Scalar(s) => Ok(s),
            Reduced::Network(_) => unreachable!("all variables integrated"),
        }
    }
}
