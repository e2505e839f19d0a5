use nalgebra::DMatrix;

use super::{DenseTensor, Index, IndexId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Two-factor split of a tensor across a new bond index.
#[derive(Debug, Clone)]
pub struct Factorization<T> {
    /// Row indices followed by the bond.
    pub left: DenseTensor<T>,
    /// The bond followed by the column indices.
    pub right: DenseTensor<T>,
    pub kept_rank: usize,
    /// Fraction of the squared Frobenius norm dropped by truncation.
    pub discarded_weight: f64,
}

fn check_rows<T: Scalar>(t: &DenseTensor<T>, rows: &[IndexId]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    for &id in rows {
        if !t.has(id) {
            return Err(Error::DimensionMismatch(format!("index {id:?} not present")));
        }
    }
    Ok(())
}

/// Smallest rank whose discarded tail keeps `‖dropped‖_F ≤ tol·‖all‖_F`,
/// capped at `chi_max` and never below one. Singular values at rounding level
/// relative to the largest are always dropped.
fn truncation_rank(sigma: &[f64], chi_max: usize, tol: f64) -> usize {
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let budget = tol * tol * total;
    let floor = sigma.first().copied().unwrap_or(0.0) * sigma.len() as f64 * f64::EPSILON;
    let mut keep = sigma.iter().take_while(|&&s| s > floor).count().max(1);
    let mut tail = 0.0;
    while keep > 1 {
        let next = tail + sigma[keep - 1] * sigma[keep - 1];
        if next > budget {
            break;
        }
        tail = next;
        keep -= 1;
    }
    keep.min(chi_max).max(1)
}

/// Truncated SVD of `t` matricized as `rows | rest`. The singular values are
/// absorbed into the right factor.
pub fn svd_split<T: Scalar>(
    t: &DenseTensor<T>,
    rows: &[IndexId],
    chi_max: usize,
    tol: f64,
    bond: IndexId,
) -> Result<Factorization<T>> {
    check_rows(t, rows)?;
    let (m, row_idx, col_idx) = t.matricize(rows)?;
    let (u, sigma, v_t) = T::thin_svd(&m).ok_or(Error::SvdFailure)?;
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::SvdFailure);
    }
    let keep = truncation_rank(&sigma, chi_max.max(1), tol);
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let dropped: f64 = sigma[keep..].iter().map(|s| s * s).sum();
    let discarded_weight = if total > 0.0 { dropped / total } else { 0.0 };

    let u = u.columns(0, keep).into_owned();
    let mut r = v_t.rows(0, keep).into_owned();
    for (k, mut row) in r.row_iter_mut().enumerate() {
        row *= T::from_re(sigma[k]);
    }
    let left = DenseTensor::from_matrix(&u, row_idx, vec![Index::new(bond, keep)])?;
    let right = DenseTensor::from_matrix(&r, vec![Index::new(bond, keep)], col_idx)?;
    Ok(Factorization {
        left,
        right,
        kept_rank: keep,
        discarded_weight,
    })
}

pub(crate) fn faer_thin_svd<T>(m: &DMatrix<T>) -> Option<(DMatrix<T>, Vec<f64>, DMatrix<T>)>
where
    T: Scalar + faer::traits::ComplexField,
{
    let (nr, nc) = m.shape();
    let k = nr.min(nc);
    if k == 0 {
        return None;
    }
    let a = faer::Mat::<T>::from_fn(nr, nc, |i, j| m[(i, j)]);
    let svd = a.thin_svd().ok()?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let sigma = (0..k).map(|i| Scalar::parts(s[i]).0).collect();
    let u = DMatrix::from_fn(nr, k, |i, j| u[(i, j)]);
    let v_t = DMatrix::from_fn(k, nc, |i, j| nalgebra::ComplexField::conjugate(v[(j, i)]));
    Some((u, sigma, v_t))
}

/// Thin QR split of `t` matricized as `rows | rest`: the left factor has
/// orthonormal columns over the row indices.
pub fn qr_split<T: Scalar>(
    t: &DenseTensor<T>,
    rows: &[IndexId],
    bond: IndexId,
) -> Result<(DenseTensor<T>, DenseTensor<T>)> {
    check_rows(t, rows)?;
    let (m, row_idx, col_idx) = t.matricize(rows)?;
    let k = m.nrows().min(m.ncols());
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    Ok((
        DenseTensor::from_matrix(&q, row_idx, vec![Index::new(bond, k)])?,
        DenseTensor::from_matrix(&r, vec![Index::new(bond, k)], col_idx)?,
    ))
}

/// Column interpolative decomposition `M ≈ C·Z` with `C = M[:, pivots]`.
#[derive(Debug, Clone)]
pub struct IdResult<T> {
    pub pivots: Vec<usize>,
    pub c: DMatrix<T>,
    pub z: DMatrix<T>,
    /// Set when `r_max` pivots did not reach the requested tolerance.
    pub rank_exceeded: bool,
}

/// Greedy interpolative decomposition by column-pivoted Gram–Schmidt.
///
/// Columns are chosen by largest residual norm (ties go to the lowest
/// column), stopping once every residual entry is at most `tol·max|M|` or
/// `r_max` columns are taken. At least one column is always selected.
pub fn interpolative_decomposition<T: Scalar>(
    m: &DMatrix<T>,
    tol: f64,
    r_max: usize,
) -> IdResult<T> {
    let (nr, nc) = m.shape();
    let scale = m.iter().map(|x| x.modulus()).fold(0.0, f64::max);
    let threshold = tol * scale;
    let limit = r_max.max(1).min(nr.min(nc)).max(1);

    let mut residual = m.clone();
    let mut basis: Vec<nalgebra::DVector<T>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let max_residual = |r: &DMatrix<T>| r.iter().map(|x| x.modulus()).fold(0.0, f64::max);

    while pivots.len() < limit {
        if !pivots.is_empty() && max_residual(&residual) <= threshold {
            break;
        }
        let mut best = None;
        let mut best_norm = -1.0;
        for j in 0..nc {
            if pivots.contains(&j) {
                continue;
            }
            let n = residual.column(j).norm_squared();
            if n > best_norm {
                best_norm = n;
                best = Some(j);
            }
        }
        let Some(p) = best else { break };
        pivots.push(p);
        if best_norm <= 0.0 {
            break;
        }
        let mut q = residual.column(p).into_owned();
        // second projection pass restores orthogonality lost to cancellation
        for b in &basis {
            let c = b.dotc(&q);
            q.axpy(-c, b, T::one());
        }
        let n = q.norm();
        if n == 0.0 {
            break;
        }
        q.unscale_mut(n);
        let coeffs = q.adjoint() * &residual;
        residual -= &q * coeffs;
        basis.push(q);
    }

    let c = m.select_columns(&pivots);
    let z = interpolation_matrix(&c, m, &pivots);
    let rank_exceeded = max_residual(&(m - &c * &z)) > threshold;
    IdResult {
        pivots,
        c,
        z,
        rank_exceeded,
    }
}

/// Least-squares solution of `C·Z = M` with the identity forced on the
/// pivot columns.
fn interpolation_matrix<T: Scalar>(c: &DMatrix<T>, m: &DMatrix<T>, pivots: &[usize]) -> DMatrix<T> {
    let r = pivots.len();
    let mut z = DMatrix::<T>::zeros(r, m.ncols());
    if c.iter().any(|x| x.modulus() > 0.0) {
        let qr = c.clone().qr();
        let rhs = qr.q().adjoint() * m;
        let rr = qr.r();
        if let Some(sol) = rr.solve_upper_triangular(&rhs) {
            if sol.iter().all(|x| x.is_finite()) {
                z = sol;
            }
        }
    }
    for (k, &p) in pivots.iter().enumerate() {
        for i in 0..r {
            z[(i, p)] = if i == k { T::one() } else { T::zero() };
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::contract;
    use num_complex::Complex64;
    use proptest::prelude::*;

    const I: IndexId = IndexId::Aux(0);
    const J: IndexId = IndexId::Aux(1);
    const B: IndexId = IndexId::Bond(9);

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DenseTensor<f64> {
        DenseTensor::new(vec![Index::new(I, rows), Index::new(J, cols)], data.to_vec()).unwrap()
    }

    fn rel_err(a: &DenseTensor<f64>, b: &DenseTensor<f64>) -> f64 {
        let b = b.permute(&a.ids()).unwrap();
        let d: f64 = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        d / a.norm()
    }

    #[test]
    fn rank_one_split() {
        let t = mat(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let f = svd_split(&t, &[I], 2, 1e-12, B).unwrap();
        assert_eq!(f.kept_rank, 1);
        // Gram matrix eigenvalues: 25 and 0, so nothing of substance is dropped
        assert!(f.discarded_weight <= 1e-24);
        assert!(rel_err(&t, &contract(&f.left, &f.right).unwrap()) < 1e-14);
    }

    #[test]
    fn identity_capped_at_one() {
        let t = mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let f = svd_split(&t, &[I], 1, 0.0, B).unwrap();
        assert_eq!(f.kept_rank, 1);
        assert!((f.discarded_weight - 0.5).abs() < 1e-15);
        assert_eq!(f.left.ids(), vec![I, B]);
        assert_eq!(f.right.ids(), vec![B, J]);
    }

    #[test]
    fn rounding_level_values_are_dropped() {
        assert_eq!(truncation_rank(&[1.0, 1e-3, 1e-17], 10, 0.0), 2);
        assert_eq!(truncation_rank(&[1.0, 1e-3, 1e-17], 1, 0.0), 1);
        assert_eq!(truncation_rank(&[0.0, 0.0], 10, 0.0), 1);
        assert_eq!(truncation_rank(&[1.0, 1e-3, 1e-4], 10, 2e-3), 1);
    }

    #[test]
    fn empty_row_set_is_rejected() {
        let t = mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(svd_split(&t, &[], 2, 0.0, B).unwrap_err(), Error::EmptyIndexSet);
    }

    #[test]
    fn complex_split_is_lossless() {
        let t = DenseTensor::from_fn(vec![Index::new(I, 3), Index::new(J, 4)], |ix| {
            Complex64::new(ix[0] as f64 - 1.0, (ix[1] * ix[0]) as f64 * 0.3)
        });
        let f = svd_split(&t, &[I], 10, 0.0, B).unwrap();
        let back = contract(&f.left, &f.right).unwrap();
        for (x, y) in t.data().iter().zip(back.data()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn qr_factor_is_orthonormal() {
        let t = DenseTensor::from_fn(
            vec![Index::new(I, 2), Index::new(J, 3), Index::new(IndexId::Aux(2), 2)],
            |ix| (1 + ix[0] + 2 * ix[1] * ix[2]) as f64,
        );
        let (q, r) = qr_split(&t, &[I, J], B).unwrap();
        let mut qc = q.clone();
        qc.rename(B, IndexId::Aux(5));
        let gram = contract(&qc, &q).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((gram.get(&[a, b]) - e).abs() < 1e-13);
            }
        }
        assert!(rel_err(&t, &contract(&q, &r).unwrap()) < 1e-14);
    }

    #[test]
    fn id_on_identity() {
        let m = DMatrix::<f64>::identity(2, 2);
        let id = interpolative_decomposition(&m, 0.0, 5);
        assert_eq!(id.pivots, vec![0, 1]);
        assert_eq!(id.z, DMatrix::identity(2, 2));
        assert!(!id.rank_exceeded);
    }

    #[test]
    fn id_on_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let id = interpolative_decomposition(&m, 1e-12, 2);
        assert_eq!(id.pivots.len(), 1);
        let res = (&m - &id.c * &id.z).amax();
        assert!(res <= 1e-12 * 4.0);
    }

    #[test]
    fn id_skips_zero_column() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, -1.0]);
        let id = interpolative_decomposition(&m, 1e-14, 2);
        assert_eq!(id.pivots, vec![1]);
        assert_eq!(id.z[(0, 0)], 0.0);
    }

    #[test]
    fn id_flags_unreachable_tolerance() {
        let m = DMatrix::<f64>::identity(3, 3);
        let id = interpolative_decomposition(&m, 1e-12, 2);
        assert_eq!(id.pivots.len(), 2);
        assert!(id.rank_exceeded);
    }

    fn arb_matrix() -> impl Strategy<Value = DMatrix<f64>> {
        (1usize..7, 1usize..7, 1usize..4).prop_flat_map(|(r, c, k)| {
            (
                proptest::collection::vec(-1.0f64..1.0, r * k),
                proptest::collection::vec(-1.0f64..1.0, k * c),
            )
                .prop_map(move |(a, b)| {
                    DMatrix::from_row_slice(r, k, &a) * DMatrix::from_row_slice(k, c, &b)
                })
        })
    }

    proptest! {
        #[test]
        fn lossless_svd_reconstructs(m in arb_matrix()) {
            let t = DenseTensor::from_matrix(&m, vec![Index::new(I, m.nrows())], vec![Index::new(J, m.ncols())]).unwrap();
            prop_assume!(t.norm() > 1e-8);
            let f = svd_split(&t, &[I], usize::MAX, 0.0, B).unwrap();
            prop_assert!(rel_err(&t, &contract(&f.left, &f.right).unwrap()) <= 1e-12);
        }

        #[test]
        fn id_invariants(m in arb_matrix(), tol in prop_oneof![Just(0.0), Just(1e-10), Just(1e-3)], r_max in 1usize..7) {
            let id = interpolative_decomposition(&m, tol, r_max);
            for (k, &p) in id.pivots.iter().enumerate() {
                for i in 0..id.pivots.len() {
                    prop_assert_eq!(id.z[(i, p)], if i == k { 1.0 } else { 0.0 });
                }
                prop_assert_eq!(id.c.column(k), m.column(p));
            }
            if !id.rank_exceeded {
                let res = (&m - &id.c * &id.z).amax();
                prop_assert!(res <= tol * m.amax() + 1e-300);
            }
        }
    }
}
