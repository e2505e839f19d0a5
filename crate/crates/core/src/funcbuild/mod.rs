//! Exact constructions of elementary functions on any labeled tree.

mod polynomial;
mod spec;

pub use polynomial::{polynomial, PolynomialSpec};
pub use spec::FunctionSpec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::{GridPoint, LabeledTree};
use crate::ttn::TreeTensorNetwork;

/// Spreads `c` evenly as `c^{1/N}` over the `N` tensors when such a root
/// exists; otherwise the whole factor sits on the default root vertex.
fn spread<T: Scalar>(tree: &LabeledTree, c: T) -> impl Fn(usize) -> T {
    let n = tree.len();
    let root = tree.default_root();
    let share = c.root(n);
    move |v| match share {
        Some(s) => s,
        None if v == root => c,
        None => T::one(),
    }
}

/// The constant function `c`.
pub fn constant<T: Scalar>(tree: &LabeledTree, c: T) -> TreeTensorNetwork<T> {
    let factor = spread(tree, c);
    TreeTensorNetwork::rank_one(tree, |v| [factor(v); 2])
}

/// `c·exp(k·x + a)` as a rank-one network. `k[i - 1]` multiplies variable
/// `i`; the additive constant `a` is shared evenly among the tensors.
pub fn exponential<T: Scalar>(tree: &LabeledTree, c: T, k: &[T], a: T) -> Result<TreeTensorNetwork<T>> {
    if k.len() < tree.max_var() {
        return Err(Error::InvalidParameter(format!(
            "exponential needs {} wave numbers, got {}",
            tree.max_var(),
            k.len()
        )));
    }
    let factor = spread(tree, c);
    let a_share = a / T::from_re(tree.len() as f64);
    Ok(TreeTensorNetwork::rank_one(tree, |v| {
        let d = tree.vertex(v);
        let step = k[d.var - 1] * T::from_re(0.5f64.powi(d.digit as i32));
        let base = factor(v);
        [base * a_share.exp(), base * (step + a_share).exp()]
    }))
}

/// Kind of hyperbolic function built by [`hyperbolic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hyperbolic {
    Cosh,
    Sinh,
}

/// `c·cosh(k·x + a)` or `c·sinh(k·x + a)` as the sum of two exponentials,
/// bond dimension two on every edge.
pub fn hyperbolic<T: Scalar>(
    tree: &LabeledTree,
    c: T,
    k: &[T],
    a: T,
    kind: Hyperbolic,
) -> Result<TreeTensorNetwork<T>> {
    let half = c * T::from_re(0.5);
    let neg_k: Vec<T> = k.iter().map(|&x| -x).collect();
    let plus = exponential(tree, half, k, a)?;
    let sign = match kind {
        Hyperbolic::Cosh => half,
        Hyperbolic::Sinh => -half,
    };
    let minus = exponential(tree, sign, &neg_k, -a)?;
    plus.add(&minus)
}

/// Grid-normalized delta at `point`: `2^{nL}` there and zero elsewhere, so
/// its integral is one.
pub fn delta_at<T: Scalar>(tree: &LabeledTree, point: &GridPoint) -> Result<TreeTensorNetwork<T>> {
    for &d in tree.vertices() {
        point.try_get(d)?;
    }
    Ok(TreeTensorNetwork::rank_one(tree, |v| {
        let bit = point.get(tree.vertex(v));
        let two = T::from_re(2.0);
        if bit == 0 {
            [two, T::zero()]
        } else {
            [T::zero(), two]
        }
    }))
}

/// [`delta_at`] from coordinates, which must lie exactly on the grid.
pub fn delta<T: Scalar>(tree: &LabeledTree, coords: &[f64]) -> Result<TreeTensorNetwork<T>> {
    let l = tree.levels();
    let scale = (1u64 << l) as f64;
    let on_grid = coords.len() >= tree.max_var()
        && coords
            .iter()
            .all(|&x| (0.0..1.0).contains(&x) && (x * scale).fract() == 0.0);
    if !on_grid {
        return Err(Error::OffGridPoint(coords.to_vec()));
    }
    let point = GridPoint::from_coords(coords, l)?;
    delta_at(tree, &point)
}
