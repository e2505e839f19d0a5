use super::TreeTensorNetwork;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::tensor::{contract, qr_split, svd_split, DenseTensor, IndexId};

const TMP: IndexId = IndexId::Aux(0);

/// Splits `t` across bond `e` so that the part without `Bond(e)` is
/// orthonormal; returns `(t', carry)` where `carry` has indices
/// `[Bond(e), Bond(e)']` ready to be contracted into the neighbor.
fn split_off<T: Scalar>(
    t: &DenseTensor<T>,
    e: usize,
    truncation: Option<(usize, f64)>,
) -> Result<(DenseTensor<T>, DenseTensor<T>)> {
    let bond = IndexId::Bond(e);
    let rows: Vec<IndexId> = t.ids().into_iter().filter(|&id| id != bond).collect();
    let (mut left, right) = match truncation {
        Some((chi, tol)) => {
            let f = svd_split(t, &rows, chi, tol, TMP)?;
            (f.left, f.right)
        }
        None => qr_split(t, &rows, TMP)?,
    };
    left.rename(TMP, bond);
    Ok((left, right))
}

/// Contracts a carry `[TMP, Bond(e)]` into the neighbor over `Bond(e)`.
fn absorb<T: Scalar>(carry: &DenseTensor<T>, t: &DenseTensor<T>, e: usize) -> Result<DenseTensor<T>> {
    let mut out = contract(carry, t)?;
    out.rename(TMP, IndexId::Bond(e));
    Ok(out)
}

impl<T: Scalar> TreeTensorNetwork<T> {
    /// Bond truncation by SVD in canonical form.
    ///
    /// The network is first orthogonalized toward the root `1.1`; a
    /// depth-first walk then moves the orthogonality center across each edge
    /// with a truncated SVD (at most `chi_max` values and relative discarded
    /// Frobenius weight at most `tol` per edge) and back with a QR.
    pub fn truncate(&self, chi_max: usize, tol: f64) -> Result<Self> {
        let tree = self.tree.clone();
        if tree.len() == 1 {
            return Ok(self.clone());
        }
        let rooting = tree.rooted(tree.default_root());
        let mut tensors = self.tensors.clone();

        for &v in rooting.order.iter().rev() {
            if let Some((p, e)) = rooting.parent[v] {
                let (q, carry) = split_off(&tensors[v], e, None)?;
                tensors[v] = q;
                tensors[p] = absorb(&carry, &tensors[p], e)?;
            }
        }

        // explicit DFS stack: (vertex, next child slot, edge to parent)
        let children: Vec<Vec<(usize, usize)>> = (0..tree.len())
            .map(|v| rooting.children(&tree, v).collect())
            .collect();
        let mut stack: Vec<(usize, usize)> = vec![(rooting.root, 0)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < children[v].len() {
                let (c, e) = children[v][*next];
                *next += 1;
                let (u, carry) = split_off(&tensors[v], e, Some((chi_max.max(1), tol)))?;
                tensors[v] = u;
                tensors[c] = absorb(&carry, &tensors[c], e)?;
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some((p, e)) = rooting.parent[v] {
                    let (q, carry) = split_off(&tensors[v], e, None)?;
                    tensors[v] = q;
                    tensors[p] = absorb(&carry, &tensors[p], e)?;
                }
            }
        }
        Self::new(tree, tensors)
    }
}
