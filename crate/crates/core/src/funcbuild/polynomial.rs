use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, IndexId};
use crate::topology::{DigitId, LabeledTree};
use crate::ttn::{layout, TreeTensorNetwork};

/// `p(x) = Σ_k c_k x^k` in one variable of the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSpec<T> {
    /// `c_0, c_1, ..., c_d`; an empty list is the zero polynomial.
    pub coefficients: Vec<T>,
    pub variable: usize,
    /// Digit of `variable` whose tensor carries the coefficients; defaults to
    /// the most significant digit.
    pub root_digit: Option<DigitId>,
}

impl<T: Scalar> PolynomialSpec<T> {
    pub fn new(coefficients: Vec<T>, variable: usize) -> Self {
        Self {
            coefficients,
            variable,
            root_digit: None,
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: T) -> T {
        self.coefficients
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }
}

/// Pascal triangle up to row `d` in exact integers, stored as `f64`.
pub(crate) struct Binomials {
    rows: Vec<Vec<f64>>,
}

impl Binomials {
    pub(crate) fn new(d: usize) -> Self {
        let mut exact: Vec<Vec<u128>> = vec![vec![1]];
        for n in 1..=d {
            let prev = &exact[n - 1];
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1].saturating_add(prev[k]);
            }
            exact.push(row);
        }
        Self {
            rows: exact
                .into_iter()
                .map(|r| r.into_iter().map(|x| x as f64).collect())
                .collect(),
        }
    }

    pub(crate) fn get(&self, n: usize, k: usize) -> f64 {
        if k > n {
            0.0
        } else {
            self.rows[n][k]
        }
    }

    /// Multinomial `b! / (a_1! ... a_m! (b - Σa)!)`, zero when `Σa > b`.
    pub(crate) fn multinomial(&self, alphas: &[usize], b: usize) -> f64 {
        let mut rest = b;
        let mut out = 1.0;
        for &a in alphas {
            if a > rest {
                return 0.0;
            }
            out *= self.get(rest, a);
            rest -= a;
        }
        out
    }
}

/// `u^f` with `0^0 = 1`.
fn power<T: Scalar>(u: T, f: usize) -> T {
    if f == 0 {
        T::one()
    } else {
        u.powi(f as i32)
    }
}

/// Exact polynomial network with bond dimension `d + 1` on every edge.
///
/// Each bond carries powers of the partial sum of the digit contributions
/// `x_j / 2^j` of the subtree behind it. A vertex combines its children's
/// powers `α` and its own contribution into the power `β` sent toward the
/// root digit with multinomial weight; the root digit applies the
/// coefficients. Digits of other variables contribute zero, so they act as
/// weighted copy tensors and their leaves emit `δ_{β,0}`.
pub fn polynomial<T: Scalar>(tree: &LabeledTree, spec: &PolynomialSpec<T>) -> Result<TreeTensorNetwork<T>> {
    let root_digit = spec
        .root_digit
        .unwrap_or(DigitId::new(spec.variable, 1));
    if root_digit.var != spec.variable {
        return Err(Error::InvalidParameter(format!(
            "root digit {root_digit} does not belong to variable {}",
            spec.variable
        )));
    }
    let root = tree
        .position(root_digit)
        .ok_or_else(|| Error::InvalidParameter(format!("digit {root_digit} is not in the tree")))?;
    if spec.coefficients.is_empty() {
        return Ok(TreeTensorNetwork::zero(tree));
    }
    let d = spec.degree();
    let chi = d + 1;
    let binom = Binomials::new(d);
    let rooting = tree.rooted(root);
    let bonds = vec![chi; tree.edges().len()];

    let tensors = (0..tree.len())
        .map(|v| {
            let digit = tree.vertex(v);
            let up = rooting.parent[v].map(|(_, e)| e);
            let shape = layout(tree, v, &bonds);
            // axis position of the bond toward the root, if any
            let beta_axis = up.map(|e| {
                shape
                    .iter()
                    .position(|i| i.id == IndexId::Bond(e))
                    .expect("parent bond in layout")
            });
            let mut alphas = Vec::with_capacity(shape.len());
            DenseTensor::from_fn(shape, |ix| {
                let bit = ix[0];
                let u = if digit.var == spec.variable && bit == 1 {
                    T::from_re(0.5f64.powi(digit.digit as i32))
                } else {
                    T::zero()
                };
                alphas.clear();
                for (k, &a) in ix.iter().enumerate().skip(1) {
                    if Some(k) != beta_axis {
                        alphas.push(a);
                    }
                }
                let sum: usize = alphas.iter().sum();
                let term = |b: usize| -> T {
                    if sum > b {
                        T::zero()
                    } else {
                        T::from_re(binom.multinomial(&alphas, b)) * power(u, b - sum)
                    }
                };
                match beta_axis {
                    Some(k) => term(ix[k]),
                    None => spec
                        .coefficients
                        .iter()
                        .enumerate()
                        .fold(T::zero(), |acc, (b, &c)| acc + c * term(b)),
                }
            })
        })
        .collect();
    TreeTensorNetwork::new(tree.clone(), tensors)
}
