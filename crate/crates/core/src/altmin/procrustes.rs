//! Semi-unitary digital factor: initialization and the Procrustes update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complete_columns, svd};
use crate::scalar::{CMat, Real};

/// Shape of the digital factor `F_DD` (`m x cols`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `m >= cols`: orthonormal columns, `F_DD^H F_DD = I`.
    Tall,
    /// `m < cols`: orthonormal rows, `F_DD F_DD^H = I`.
    Fat,
}

impl Regime {
    pub fn for_dims(n_rf: usize, target_cols: usize) -> Self {
        if n_rf >= target_cols {
            Regime::Tall
        } else {
            Regime::Fat
        }
    }
}

/// Initial `F_DD` from the SVD `F_opt = U S V^H`.
///
/// Tall: `[V, 0]^H`, i.e. `V^H` padded with zero rows up to `m`.
/// Fat: the first `m` columns of `V`, conjugate-transposed.
pub fn init_fdd<T: Real>(f_opt: &CMat<T>, regime: Regime, m: usize) -> Result<CMat<T>> {
    let cols = f_opt.ncols();
    if m == 0 || cols == 0 {
        return Err(Error::DimensionMismatch("init_fdd needs a non-empty target and m >= 1".into()));
    }
    if regime != Regime::for_dims(m, cols) {
        return Err(Error::DimensionMismatch(format!(
            "{regime:?} regime requested for m = {m} and {cols} target columns"
        )));
    }
    let mut v = svd(f_opt).v;
    let need = match regime {
        Regime::Tall => cols,
        Regime::Fat => m,
    };
    if v.ncols() < need {
        v = complete_columns(&v);
    }
    let mut fdd = CMat::zeros(m, cols);
    match regime {
        Regime::Tall => fdd.rows_mut(0, cols).copy_from(&v.adjoint()),
        Regime::Fat => fdd.copy_from(&v.columns(0, m).adjoint()),
    }
    Ok(fdd)
}

/// Maximizes `Re tr(F_DD M)` over semi-unitary `F_DD` (`m x cols`) for
/// `M = alpha F_opt^H S C` (`cols x m`).
///
/// With the thin SVD `M = U S V^H` the maximizer is `F_DD = V U^H` and the
/// maximum is the nuclear norm of `M`. The same expression covers both
/// regimes; the thin factor has `min(cols, m)` columns.
pub fn update_fdd<T: Real>(m_mat: &CMat<T>, regime: Regime) -> CMat<T> {
    debug_assert_eq!(regime, Regime::for_dims(m_mat.ncols(), m_mat.nrows()));
    let dec = svd(m_mat);
    &dec.v * dec.u.adjoint()
}
