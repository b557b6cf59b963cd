//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::scalar::{real, CMat, Real};

/// Thin SVD `m = u * diag(s) * v^H` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

pub fn svd<T: Real>(m: &CMat<T>) -> Svd<T> {
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("left singular vectors requested");
    let v = dec.v_t.expect("right singular vectors requested").adjoint();
    let s: Vec<T> = dec.singular_values.iter().copied().collect();

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return Svd { u, s, v };
    }
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    let s = order.iter().map(|&j| s[j]).collect();
    Svd { u, s, v }
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn numerical_rank<T: Real>(s: &[T], rel_tol: T) -> usize {
    match s.first() {
        Some(&top) if top > T::zero() => s.iter().filter(|&&x| x > rel_tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the null space of `a`, which has `n` columns.
///
/// An `a` without rows has the whole space as its null space.
pub fn null_space<T: Real>(a: &CMat<T>, rel_tol: T) -> CMat<T> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    // Pad to at least n rows so the thin SVD carries a full n x n right factor.
    let rows = a.nrows().max(n);
    let mut padded = CMat::zeros(rows, n);
    padded.rows_mut(0, a.nrows()).copy_from(a);
    let dec = svd(&padded);
    let rank = numerical_rank(&dec.s, rel_tol);
    dec.v.columns(rank, n - rank).into_owned()
}

/// Orthonormal completion of the orthonormal columns `v` (n x r) to n columns.
pub fn complete_columns<T: Real>(v: &CMat<T>) -> CMat<T> {
    let n = v.nrows();
    let comp = null_space(&v.adjoint(), T::lit(1e-10));
    let mut full = CMat::zeros(n, n);
    full.columns_mut(0, v.ncols()).copy_from(v);
    let extra = n - v.ncols();
    full.columns_mut(v.ncols(), extra).copy_from(&comp.columns(0, extra));
    full
}

/// Squared Frobenius norm.
pub fn fro2<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Frobenius distance of `m^H m` (columns) or `m m^H` (rows) from the identity.
pub fn orthonormality_error<T: Real>(m: &CMat<T>, columns: bool) -> T {
    let gram = if columns { m.adjoint() * m } else { m * m.adjoint() };
    let n = gram.nrows();
    let eye = CMat::<T>::identity(n, n);
    fro2(&(gram - eye)).sqrt()
}

/// `Re tr(a * b)` without forming the product.
pub fn re_trace_product<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = T::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let p = a[(i, j)] * b[(j, i)];
            acc += p.re;
        }
    }
    acc
}

/// `ln det(m)` for a Hermitian positive-definite matrix, `None` if not PD.
pub fn logdet_hpd<T: Real>(m: &CMat<T>) -> Option<T> {
    let chol = m.clone().cholesky()?;
    let l = chol.l_dirty();
    let mut acc = T::zero();
    for i in 0..m.nrows() {
        // nalgebra's complex Cholesky takes a complex sqrt of a negative
        // pivot instead of failing, so the pivot has to be checked here.
        let d = l[(i, i)].re;
        if !(d > T::zero()) || l[(i, i)].im.abs() > d * T::lit(1e-6) {
            return None;
        }
        acc += d.ln();
    }
    Some(acc + acc)
}

/// Scales a complex matrix by a real factor.
pub fn scale<T: Real>(m: &CMat<T>, k: T) -> CMat<T> {
    m * real(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn sample(rows: usize, cols: usize, seed: u64) -> CMat<f64> {
        // Deterministic pseudo-random fill; no RNG dependency needed here.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMat::from_fn(rows, cols, |_, _| cx(next(), next()))
    }

    #[test]
    fn svd_reconstructs_and_sorts() {
        for (r, c) in [(5, 3), (3, 5), (4, 4)] {
            let m = sample(r, c, 7);
            let d = svd(&m);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
            let sig = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                d.s.len(),
                d.s.iter().map(|&x| real(x)),
            ));
            let back = &d.u * sig * d.v.adjoint();
            assert!(fro2(&(back - &m)).sqrt() < 1e-12);
        }
    }

    #[test]
    fn null_space_is_orthogonal_and_complete() {
        let a = sample(2, 6, 3);
        let n = null_space(&a, 1e-10);
        assert_eq!(n.ncols(), 4);
        assert!(fro2(&(&a * &n)).sqrt() < 1e-12);
        assert!(orthonormality_error(&n, true) < 1e-12);
    }

    #[test]
    fn null_space_of_rank_deficient_rows() {
        let row = sample(1, 5, 11);
        let mut a = CMat::zeros(3, 5);
        a.rows_mut(0, 1).copy_from(&row);
        a.rows_mut(1, 1).copy_from(&(&row * cx(2.0, -1.0)));
        let n = null_space(&a, 1e-10);
        assert_eq!(n.ncols(), 4);
        assert!(fro2(&(&a * &n)).sqrt() < 1e-12);
    }

    #[test]
    fn completion_is_unitary() {
        let v = svd(&sample(6, 2, 5)).u;
        let full = complete_columns(&v);
        assert!(orthonormality_error(&full, true) < 1e-12);
    }

    #[test]
    fn logdet_matches_product_of_eigenvalues() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(2.0), real(8.0)]));
        assert!((logdet_hpd(&m).unwrap() - 16f64.ln()).abs() < 1e-14);
        let neg = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(-1.0), real(1.0)]));
        assert!(logdet_hpd(&neg).is_none());
    }
}
