//! Dense tensors with named indices.
//!
//! Values are stored row-major over the listed index order: the last index
//! varies fastest.

mod factor;

pub(crate) use factor::faer_thin_svd;
pub use factor::{interpolative_decomposition, qr_split, svd_split, Factorization, IdResult};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Name of a tensor index. Site indices carry a binary digit, bond indices
/// join two tensors of a network, auxiliary indices are scratch names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexId {
    Site(usize),
    Bond(usize),
    Aux(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Index {
    pub id: IndexId,
    pub dim: usize,
}

impl Index {
    pub const fn new(id: IndexId, dim: usize) -> Self {
        Self { id, dim }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    indices: Vec<Index>,
    data: Vec<T>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Advances a row-major multi-index; returns false after the last one.
fn advance(idx: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(indices: Vec<Index>, data: Vec<T>) -> Result<Self> {
        let count: usize = indices.iter().map(|i| i.dim).product();
        if count != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for shape {:?}",
                data.len(),
                indices.iter().map(|i| i.dim).collect::<Vec<_>>()
            )));
        }
        for (k, a) in indices.iter().enumerate() {
            if indices[..k].iter().any(|b| b.id == a.id) {
                return Err(Error::DimensionMismatch(format!(
                    "index {:?} listed twice",
                    a.id
                )));
            }
        }
        Ok(Self { indices, data })
    }

    pub fn zeros(indices: Vec<Index>) -> Self {
        let count = indices.iter().map(|i| i.dim).product();
        Self::new(indices, vec![T::zero(); count]).expect("consistent zero tensor")
    }

    pub fn scalar(value: T) -> Self {
        Self {
            indices: Vec::new(),
            data: vec![value],
        }
    }

    /// Fills entries from a function of the multi-index.
    pub fn from_fn(indices: Vec<Index>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let dims: Vec<usize> = indices.iter().map(|i| i.dim).collect();
        let count: usize = dims.iter().product();
        let mut data = Vec::with_capacity(count);
        if count > 0 {
            let mut idx = vec![0; dims.len()];
            loop {
                data.push(f(&idx));
                if !advance(&mut idx, &dims) {
                    break;
                }
            }
        }
        Self::new(indices, data).expect("from_fn shape")
    }

    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    pub fn ids(&self) -> Vec<IndexId> {
        self.indices.iter().map(|i| i.id).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i.dim).collect()
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn axis(&self, id: IndexId) -> Option<usize> {
        self.indices.iter().position(|i| i.id == id)
    }

    pub fn dim(&self, id: IndexId) -> Option<usize> {
        self.axis(id).map(|k| self.indices[k].dim)
    }

    pub fn has(&self, id: IndexId) -> bool {
        self.axis(id).is_some()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        let mut off = 0;
        for (k, &i) in idx.iter().enumerate() {
            off = off * self.indices[k].dim + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: T) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.modulus_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: T) {
        for x in &mut self.data {
            *x *= factor;
        }
    }

    pub fn rename(&mut self, from: IndexId, to: IndexId) {
        if let Some(k) = self.axis(from) {
            self.indices[k].id = to;
        }
    }

    /// Reorders axes to follow `order`, which must list every index once.
    pub fn permute(&self, order: &[IndexId]) -> Result<Self> {
        if order.len() != self.rank() {
            return Err(Error::DimensionMismatch(format!(
                "permutation {order:?} of {:?}",
                self.ids()
            )));
        }
        let perm = order
            .iter()
            .map(|&id| {
                self.axis(id).ok_or_else(|| {
                    Error::DimensionMismatch(format!("index {id:?} not present"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let src_strides = strides(&self.dims());
        let new_indices: Vec<Index> = perm.iter().map(|&p| self.indices[p]).collect();
        let new_dims: Vec<usize> = new_indices.iter().map(|i| i.dim).collect();
        let gather: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        if !self.data.is_empty() {
            let mut idx = vec![0; new_dims.len()];
            loop {
                let off: usize = idx.iter().zip(&gather).map(|(i, s)| i * s).sum();
                data.push(self.data[off]);
                if !advance(&mut idx, &new_dims) {
                    break;
                }
            }
        }
        Ok(Self {
            indices: new_indices,
            data,
        })
    }

    /// Fixes index `id` at `value`, removing it.
    pub fn slice(&self, id: IndexId, value: usize) -> Result<Self> {
        let k = self
            .axis(id)
            .ok_or_else(|| Error::DimensionMismatch(format!("index {id:?} not present")))?;
        let dims = self.dims();
        if value >= dims[k] {
            return Err(Error::DimensionMismatch(format!(
                "slice {value} of {id:?} with dim {}",
                dims[k]
            )));
        }
        let outer: usize = dims[..k].iter().product();
        let inner: usize = dims[k + 1..].iter().product();
        let mut data = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * dims[k] + value) * inner;
            data.extend_from_slice(&self.data[base..base + inner]);
        }
        let mut indices = self.indices.clone();
        indices.remove(k);
        Ok(Self { indices, data })
    }

    /// Inserts a new index of dimension one at axis position `at`.
    pub fn with_unit_index(&self, id: IndexId, at: usize) -> Self {
        let mut indices = self.indices.clone();
        indices.insert(at, Index::new(id, 1));
        Self {
            indices,
            data: self.data.clone(),
        }
    }

    /// Matrix view with `rows` (in the given order) as row indices and the
    /// remaining indices, in tensor order, as columns.
    pub fn matricize(&self, rows: &[IndexId]) -> Result<(DMatrix<T>, Vec<Index>, Vec<Index>)> {
        let cols: Vec<IndexId> = self
            .ids()
            .into_iter()
            .filter(|id| !rows.contains(id))
            .collect();
        let order: Vec<IndexId> = rows.iter().chain(cols.iter()).copied().collect();
        let p = self.permute(&order)?;
        let nr = rows.len();
        let row_idx = p.indices[..nr].to_vec();
        let col_idx = p.indices[nr..].to_vec();
        let m: usize = row_idx.iter().map(|i| i.dim).product();
        let n: usize = col_idx.iter().map(|i| i.dim).product();
        Ok((DMatrix::from_row_slice(m, n, &p.data), row_idx, col_idx))
    }

    /// Inverse of [`DenseTensor::matricize`].
    pub fn from_matrix(mat: &DMatrix<T>, rows: Vec<Index>, cols: Vec<Index>) -> Result<Self> {
        let m: usize = rows.iter().map(|i| i.dim).product();
        let n: usize = cols.iter().map(|i| i.dim).product();
        if mat.nrows() != m || mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {m}x{n} tensor split",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let data: Vec<T> = mat.transpose().as_slice().to_vec();
        Self::new(rows.into_iter().chain(cols).collect(), data)
    }
}

/// Sums over every index id shared by `a` and `b`. The result carries the
/// free indices of `a` followed by those of `b`.
pub fn contract<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    let shared: Vec<IndexId> = a.ids().into_iter().filter(|&id| b.has(id)).collect();
    for &id in &shared {
        if a.dim(id) != b.dim(id) {
            return Err(Error::DimensionMismatch(format!(
                "index {id:?} has dims {:?} and {:?}",
                a.dim(id),
                b.dim(id)
            )));
        }
    }
    let a_free: Vec<IndexId> = a
        .ids()
        .into_iter()
        .filter(|id| !shared.contains(id))
        .collect();
    let b_free: Vec<IndexId> = b
        .ids()
        .into_iter()
        .filter(|id| !shared.contains(id))
        .collect();
    let (ma, ..) = a.matricize(&a_free)?;
    let (mb, ..) = b.matricize(&shared)?;
    let prod = ma * mb;
    let indices: Vec<Index> = a_free
        .iter()
        .map(|&id| Index::new(id, a.dim(id).unwrap()))
        .chain(b_free.iter().map(|&id| Index::new(id, b.dim(id).unwrap())))
        .collect();
    let data: Vec<T> = prod.transpose().as_slice().to_vec();
    DenseTensor::new(indices, data)
}

/// Block-diagonal direct sum over every index not listed in `shared`.
///
/// Both tensors must carry the same index ids. For each value of the shared
/// indices, the slice of the result is `a_slice ⊕ b_slice`: entries where
/// every summed index lies in `a`'s range come from `a`, entries where every
/// summed index lies in `b`'s (offset) range come from `b`, all others are
/// zero. With no summed indices the slices are scalars and the result is
/// their sum.
pub fn direct_sum<T: Scalar>(
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
    shared: &[IndexId],
) -> Result<DenseTensor<T>> {
    if a.rank() != b.rank() || a.ids().iter().any(|&id| !b.has(id)) {
        return Err(Error::DimensionMismatch(format!(
            "direct sum of {:?} and {:?}",
            a.ids(),
            b.ids()
        )));
    }
    for &id in shared {
        match (a.dim(id), b.dim(id)) {
            (Some(x), Some(y)) if x == y => {}
            (x, y) => {
                return Err(Error::DimensionMismatch(format!(
                    "shared index {id:?} has dims {x:?} and {y:?}"
                )))
            }
        }
    }
    let b = b.permute(&a.ids())?;
    let summed: Vec<bool> = a.ids().iter().map(|id| !shared.contains(id)).collect();
    if !summed.iter().any(|&s| s) {
        let data = a.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect();
        return DenseTensor::new(a.indices.clone(), data);
    }
    let indices: Vec<Index> = a
        .indices
        .iter()
        .zip(&b.indices)
        .zip(&summed)
        .map(|((ia, ib), &s)| Index::new(ia.id, if s { ia.dim + ib.dim } else { ia.dim }))
        .collect();
    let mut out = DenseTensor::zeros(indices);
    let a_dims = a.dims();
    let mut target = vec![0; a.rank()];
    if !a.data.is_empty() {
        let mut idx = vec![0; a.rank()];
        let mut n = 0;
        loop {
            out.set(&idx, a.data[n]);
            n += 1;
            if !advance(&mut idx, &a_dims) {
                break;
            }
        }
    }
    let b_dims = b.dims();
    if !b.data.is_empty() {
        let mut idx = vec![0; b.rank()];
        let mut n = 0;
        loop {
            for k in 0..idx.len() {
                target[k] = if summed[k] { idx[k] + a_dims[k] } else { idx[k] };
            }
            out.set(&target, b.data[n]);
            n += 1;
            if !advance(&mut idx, &b_dims) {
                break;
            }
        }
    }
    Ok(out)
}

/// Outer product taken slice-wise over the `shared` indices, with each pair
/// in `fuse` merged into one index of dimension `d_a · d_b` numbered
/// `α_a · d_b + α_b`. The fused index keeps `a`'s id.
///
/// Result order: `a`'s indices (fused ones in place), then `b`'s indices
/// that are neither shared nor fused.
pub fn outer_fuse<T: Scalar>(
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
    shared: &[IndexId],
    fuse: &[(IndexId, IndexId)],
) -> Result<DenseTensor<T>> {
    let missing = |id: IndexId| Error::DimensionMismatch(format!("index {id:?} not present"));
    for &id in shared {
        let (da, db) = (
            a.dim(id).ok_or_else(|| missing(id))?,
            b.dim(id).ok_or_else(|| missing(id))?,
        );
        if da != db {
            return Err(Error::DimensionMismatch(format!(
                "shared index {id:?} has dims {da} and {db}"
            )));
        }
    }
    for &(ia, ib) in fuse {
        a.axis(ia).ok_or_else(|| missing(ia))?;
        b.axis(ib).ok_or_else(|| missing(ib))?;
    }

    // role of every a axis: shared, fused (with b axis) or free
    enum Src {
        Shared(usize, usize),
        Fused(usize, usize, usize),
        A(usize),
        B(usize),
    }
    let mut srcs = Vec::new();
    let mut indices = Vec::new();
    for (ka, ia) in a.indices.iter().enumerate() {
        if shared.contains(&ia.id) {
            srcs.push(Src::Shared(ka, b.axis(ia.id).unwrap()));
            indices.push(*ia);
        } else if let Some(&(_, ib)) = fuse.iter().find(|(x, _)| *x == ia.id) {
            let kb = b.axis(ib).unwrap();
            let db = b.indices[kb].dim;
            srcs.push(Src::Fused(ka, kb, db));
            indices.push(Index::new(ia.id, ia.dim * db));
        } else {
            srcs.push(Src::A(ka));
            indices.push(*ia);
        }
    }
    for (kb, ib) in b.indices.iter().enumerate() {
        if !shared.contains(&ib.id) && !fuse.iter().any(|(_, y)| *y == ib.id) {
            if indices.iter().any(|i| i.id == ib.id) {
                return Err(Error::DimensionMismatch(format!(
                    "index {:?} appears unfused in both operands",
                    ib.id
                )));
            }
            srcs.push(Src::B(kb));
            indices.push(*ib);
        }
    }
    let mut ia = vec![0; a.rank()];
    let mut ib = vec![0; b.rank()];
    Ok(DenseTensor::from_fn(indices, |idx| {
        for (k, s) in srcs.iter().enumerate() {
            match *s {
                Src::Shared(x, y) => {
                    ia[x] = idx[k];
                    ib[y] = idx[k];
                }
                Src::Fused(x, y, db) => {
                    ia[x] = idx[k] / db;
                    ib[y] = idx[k] % db;
                }
                Src::A(x) => ia[x] = idx[k],
                Src::B(y) => ib[y] = idx[k],
            }
        }
        a.get(&ia) * b.get(&ib)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: IndexId = IndexId::Aux(0);
    const J: IndexId = IndexId::Aux(1);
    const K: IndexId = IndexId::Aux(2);
    const S: IndexId = IndexId::Site(0);

    fn t(ids: &[(IndexId, usize)], data: &[f64]) -> DenseTensor<f64> {
        DenseTensor::new(
            ids.iter().map(|&(id, d)| Index::new(id, d)).collect(),
            data.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn matrix_vector_contraction() {
        let m = t(&[(I, 2), (J, 2)], &[1.0, 2.0, 3.0, 4.0]);
        let v = t(&[(J, 2)], &[1.0, 1.0]);
        let r = contract(&m, &v).unwrap();
        assert_eq!(r.ids(), vec![I]);
        assert_eq!(r.data(), &[3.0, 7.0]);
    }

    #[test]
    fn contraction_with_scalar_like_tensor() {
        let m = t(&[(I, 2), (J, 2)], &[1.0, 2.0, 3.0, 4.0]);
        let s = t(&[(K, 1)], &[2.0]);
        let r = contract(&m, &s).unwrap();
        assert_eq!(r.ids(), vec![I, J, K]);
        assert_eq!(r.data(), &[2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn contraction_dimension_mismatch() {
        let a = t(&[(I, 2)], &[1.0, 2.0]);
        let b = t(&[(I, 3)], &[1.0, 2.0, 3.0]);
        assert!(matches!(contract(&a, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn direct_sum_examples() {
        let a = t(&[(I, 2)], &[1.0, 2.0]);
        let b = t(&[(I, 1)], &[3.0]);
        assert_eq!(direct_sum(&a, &b, &[]).unwrap().data(), &[1.0, 2.0, 3.0]);

        let id2 = t(&[(I, 2), (J, 2)], &[1.0, 0.0, 0.0, 1.0]);
        let id4 = direct_sum(&id2, &id2, &[]).unwrap();
        assert_eq!(id4.dims(), vec![4, 4]);
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(id4.get(&[r, c]), if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn direct_sum_keeps_shared_index() {
        // χ=2 and χ=3 slices under a shared site index
        let a = DenseTensor::from_fn(vec![Index::new(S, 2), Index::new(I, 2)], |ix| {
            (1 + ix[0] * 10 + ix[1]) as f64
        });
        let b = DenseTensor::from_fn(vec![Index::new(S, 2), Index::new(I, 3)], |ix| {
            (100 + ix[0] * 10 + ix[1]) as f64
        });
        let s = direct_sum(&a, &b, &[S]).unwrap();
        assert_eq!(s.dims(), vec![2, 5]);
        for x in 0..2 {
            for k in 0..5 {
                let expect = if k < 2 { a.get(&[x, k]) } else { b.get(&[x, k - 2]) };
                assert_eq!(s.get(&[x, k]), expect);
            }
        }
        let bad = t(&[(S, 3), (I, 1)], &[1.0, 2.0, 3.0]);
        assert!(direct_sum(&a, &bad, &[S]).is_err());
    }

    #[test]
    fn direct_sum_off_blocks_vanish() {
        let a = DenseTensor::from_fn(vec![Index::new(I, 2), Index::new(J, 2)], |_| 1.0);
        let b = DenseTensor::from_fn(vec![Index::new(I, 3), Index::new(J, 3)], |_| 2.0);
        let s = direct_sum(&a, &b, &[]).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let expect = match (r < 2, c < 2) {
                    (true, true) => 1.0,
                    (false, false) => 2.0,
                    _ => 0.0,
                };
                assert_eq!(s.get(&[r, c]), expect);
            }
        }
    }

    #[test]
    fn outer_fuse_vectors() {
        let a = t(&[(I, 2)], &[1.0, 2.0]);
        let b = t(&[(I, 2)], &[3.0, 4.0]);
        let r = outer_fuse(&a, &b, &[], &[(I, I)]).unwrap();
        assert_eq!(r.data(), &[3.0, 4.0, 6.0, 8.0]);

        let one = t(&[(I, 1)], &[1.0]);
        let r = outer_fuse(&a, &one, &[], &[(I, I)]).unwrap();
        assert_eq!(r.data(), a.data());
    }

    #[test]
    fn outer_fuse_matches_kronecker() {
        let a = t(&[(I, 2), (J, 2)], &[1.0, 2.0, 3.0, 4.0]);
        let b = t(&[(I, 2), (J, 2)], &[0.0, 5.0, 6.0, 7.0]);
        let r = outer_fuse(&a, &b, &[], &[(I, I), (J, J)]).unwrap();
        let ka = DMatrix::from_row_slice(2, 2, a.data());
        let kb = DMatrix::from_row_slice(2, 2, b.data());
        let kron = ka.kronecker(&kb);
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(r.get(&[x, y]), kron[(x, y)]);
            }
        }
    }

    #[test]
    fn permute_round_trip() {
        let a = DenseTensor::from_fn(
            vec![Index::new(I, 2), Index::new(J, 3), Index::new(K, 4)],
            |ix| (ix[0] * 100 + ix[1] * 10 + ix[2]) as f64,
        );
        let p = a.permute(&[K, I, J]).unwrap();
        assert_eq!(p.get(&[3, 1, 2]), 123.0);
        assert_eq!(p.permute(&[I, J, K]).unwrap(), a);
    }

    /// Nested-loop oracle: iterate the union of index assignments directly.
    fn oracle(a: &DenseTensor<f64>, b: &DenseTensor<f64>) -> DenseTensor<f64> {
        let shared: Vec<Index> = a
            .indices()
            .iter()
            .filter(|i| b.has(i.id))
            .copied()
            .collect();
        let out: Vec<Index> = a
            .indices()
            .iter()
            .filter(|i| !b.has(i.id))
            .chain(b.indices().iter().filter(|i| !a.has(i.id)))
            .copied()
            .collect();
        DenseTensor::from_fn(out.clone(), |oi| {
            let mut sum = 0.0;
            let sdims: Vec<usize> = shared.iter().map(|i| i.dim).collect();
            let mut si = vec![0; shared.len()];
            loop {
                let lookup = |id: IndexId| {
                    out.iter()
                        .position(|i| i.id == id)
                        .map(|p| oi[p])
                        .unwrap_or_else(|| si[shared.iter().position(|i| i.id == id).unwrap()])
                };
                let ia: Vec<usize> = a.ids().iter().map(|&id| lookup(id)).collect();
                let ib: Vec<usize> = b.ids().iter().map(|&id| lookup(id)).collect();
                sum += a.get(&ia) * b.get(&ib);
                if !advance(&mut si, &sdims) {
                    break;
                }
            }
            sum
        })
    }

    #[test]
    fn order_three_pair_against_loops() {
        let a = DenseTensor::from_fn(
            vec![Index::new(I, 2), Index::new(J, 2), Index::new(K, 3)],
            |ix| (ix[0] + 2 * ix[1]) as f64 - 0.5 * ix[2] as f64,
        );
        let b = DenseTensor::from_fn(
            vec![
                Index::new(IndexId::Aux(7), 2),
                Index::new(J, 2),
                Index::new(IndexId::Aux(8), 3),
            ],
            |ix| 1.0 + (ix[0] * ix[2]) as f64 - ix[1] as f64,
        );
        let r = contract(&a, &b).unwrap();
        assert_eq!(r.rank(), 4);
        let o = oracle(&a, &b);
        assert_eq!(r.ids(), o.ids());
        for (x, y) in r.data().iter().zip(o.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn arb_pair() -> impl Strategy<Value = (DenseTensor<f64>, DenseTensor<f64>)> {
        // up to 6 distinct ids, dims ≤ 3, each operand picks a subset
        (
            proptest::collection::vec(1usize..=3, 6),
            proptest::collection::vec(0u8..4, 6),
            any::<u64>(),
        )
            .prop_map(|(dims, roles, seed)| {
                let mut ai = Vec::new();
                let mut bi = Vec::new();
                for k in 0..6 {
                    let idx = Index::new(IndexId::Aux(k), dims[k]);
                    match roles[k] {
                        1 => ai.push(idx),
                        2 => bi.push(idx),
                        3 => {
                            ai.push(idx);
                            bi.push(idx);
                        }
                        _ => {}
                    }
                }
                bi.reverse();
                let mut s = seed;
                let mut next = move || {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((s >> 33) as f64 / (1u64 << 31) as f64) - 0.5
                };
                let a = DenseTensor::from_fn(ai, |_| next());
                let b = DenseTensor::from_fn(bi, |_| next());
                (a, b)
            })
    }

    proptest! {
        #[test]
        fn contract_agrees_with_loops((a, b) in arb_pair()) {
            let r = contract(&a, &b).unwrap();
            let o = oracle(&a, &b);
            prop_assert_eq!(r.ids(), o.ids());
            for (x, y) in r.data().iter().zip(o.data()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn contract_is_bilinear((a, b) in arb_pair(), s in -2.0f64..2.0) {
            let mut a2 = a.clone();
            a2.scale(s);
            let r1 = contract(&a2, &b).unwrap();
            let r0 = contract(&a, &b).unwrap();
            for (x, y) in r1.data().iter().zip(r0.data()) {
                prop_assert!((x - s * y).abs() < 1e-12);
            }
        }

        #[test]
        fn outer_fuse_entries_are_products(
            da in 1usize..4, db in 1usize..4, ds in 1usize..3, seed in any::<u32>()
        ) {
            let f = |x: usize| ((x as u32).wrapping_mul(seed | 1) % 97) as f64 / 13.0;
            let a = DenseTensor::from_fn(vec![Index::new(S, ds), Index::new(I, da)], |ix| f(ix[0] * 7 + ix[1]));
            let b = DenseTensor::from_fn(vec![Index::new(I, db), Index::new(S, ds)], |ix| f(100 + ix[0] * 5 + ix[1]));
            let r = outer_fuse(&a, &b, &[S], &[(I, I)]).unwrap();
            for s in 0..ds {
                for x in 0..da {
                    for y in 0..db {
                        prop_assert_eq!(r.get(&[s, x * db + y]), a.get(&[s, x]) * b.get(&[y, s]));
                    }
                }
            }
        }
    }
}
