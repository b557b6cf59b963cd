//! Fully digital block-diagonalization (BD) precoder and combiner, used both
//! as the approximation target for the hybrid design and as the upper baseline.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{null_space, svd};
use crate::scalar::{CMat, Real};
use crate::system::{ChannelRealization, SystemConfig};

/// Relative singular-value threshold for the interference null space.
pub const NULL_SPACE_REL_TOL: f64 = 1e-10;

/// Concatenated digital precoder `[F(1,1), .., F(K,1), F(1,2), .., F(K,F)]`.
///
/// Users are contiguous within a subcarrier; subcarriers follow each other.
#[derive(Debug, Clone)]
pub struct DigitalPrecoderTarget<T: Real> {
    pub f_opt: CMat<T>,
    pub n_users: usize,
    pub n_streams: usize,
    pub n_subcarriers: usize,
}

impl<T: Real> DigitalPrecoderTarget<T> {
    pub fn block_columns(&self, user: usize, subcarrier: usize) -> Range<usize> {
        let start = (subcarrier * self.n_users + user) * self.n_streams;
        start..start + self.n_streams
    }

    /// Columns of the composite `K * Ns` block for one subcarrier.
    pub fn subcarrier_columns(&self, subcarrier: usize) -> Range<usize> {
        let w = self.n_users * self.n_streams;
        subcarrier * w..(subcarrier + 1) * w
    }

    pub fn block(&self, user: usize, subcarrier: usize) -> CMat<T> {
        let r = self.block_columns(user, subcarrier);
        self.f_opt.columns(r.start, r.len()).into_owned()
    }
}

/// Per-(user, subcarrier) digital combiners `W[k, f]` (`n_rx x Ns`).
#[derive(Debug, Clone)]
pub struct DigitalCombinerSet<T: Real> {
    pub w_opt: Vec<CMat<T>>,
    pub n_subcarriers: usize,
}

impl<T: Real> DigitalCombinerSet<T> {
    pub fn get(&self, user: usize, subcarrier: usize) -> &CMat<T> {
        &self.w_opt[user * self.n_subcarriers + subcarrier]
    }

    /// User `k`'s combiners for all subcarriers side by side (`n_rx x Ns F`).
    pub fn concatenated(&self, user: usize) -> CMat<T> {
        let first = self.get(user, 0);
        let ns = first.ncols();
        let mut out = CMat::zeros(first.nrows(), ns * self.n_subcarriers);
        for f in 0..self.n_subcarriers {
            out.columns_mut(f * ns, ns).copy_from(self.get(user, f));
        }
        out
    }
}

/// Stacks the given matrices vertically.
pub(crate) fn vstack<T: Real>(blocks: &[&CMat<T>], cols: usize) -> CMat<T> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.rows_mut(r, b.nrows()).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// BD for one subcarrier: returns `(precoder, combiner)` per user.
///
/// Each user's precoder lives in the null space of the other users' stacked
/// channels and, within it, follows the `ns` dominant right singular
/// directions of the projected own channel with unit power per stream.
pub fn block_diagonalize<T: Real>(channels: &[&CMat<T>], ns: usize) -> Result<Vec<(CMat<T>, CMat<T>)>> {
    let n_cols = channels[0].ncols();
    let tol = T::lit(NULL_SPACE_REL_TOL);
    (0..channels.len())
        .map(|k| {
            let others: Vec<&CMat<T>> = channels
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, h)| *h)
                .collect();
            let basis = null_space(&vstack(&others, n_cols), tol);
            if basis.ncols() < ns {
                return Err(Error::Infeasible(format!(
                    "user {k}: interference null space has dimension {} < {ns} streams",
                    basis.ncols()
                )));
            }
            let projected = channels[k] * &basis;
            let dec = svd(&projected);
            if dec.v.ncols() < ns {
                return Err(Error::Infeasible(format!(
                    "user {k}: own channel supports only {} streams",
                    dec.v.ncols()
                )));
            }
            let precoder = &basis * dec.v.columns(0, ns);
            let combiner = dec.u.columns(0, ns).into_owned();
            Ok((precoder, combiner))
        })
        .collect()
}

/// Fully digital BD precoder/combiner over all subcarriers.
pub fn bd_digital_precoder<T: Real>(
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig,
) -> Result<(DigitalPrecoderTarget<T>, DigitalCombinerSet<T>)> {
    channel.check_against(cfg)?;
    let (k_users, n_sub, _, n_tx) = channel.dims();
    let ns = cfg.n_streams;
    if k_users * ns > n_tx {
        return Err(Error::Infeasible(format!("K*Ns = {} exceeds n_tx = {n_tx}", k_users * ns)));
    }
    let per_sub: Vec<Vec<(CMat<T>, CMat<T>)>> = (0..n_sub)
        .into_par_iter()
        .map(|f| {
            let hs: Vec<&CMat<T>> = (0..k_users).map(|k| channel.get(k, f)).collect();
            block_diagonalize(&hs, ns)
        })
        .collect::<Result<_>>()?;

    let mut target = DigitalPrecoderTarget {
        f_opt: CMat::zeros(n_tx, k_users * ns * n_sub),
        n_users: k_users,
        n_streams: ns,
        n_subcarriers: n_sub,
    };
    let mut w_opt = vec![CMat::zeros(0, 0); k_users * n_sub];
    for (f, users) in per_sub.into_iter().enumerate() {
        for (k, (p, w)) in users.into_iter().enumerate() {
            let cols = target.block_columns(k, f);
            target.f_opt.columns_mut(cols.start, ns).copy_from(&p);
            w_opt[k * n_sub + f] = w;
        }
    }
    Ok((target, DigitalCombinerSet { w_opt, n_subcarriers: n_sub }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro2, orthonormality_error};
    use crate::system::{generate_channel, ChannelParams};

    fn setup(k: usize, n_tx: usize, n_rx: usize, ns: usize, f: usize, seed: u64) -> (SystemConfig, ChannelRealization<f64>) {
        let cfg = SystemConfig::new(n_tx, n_rx, k * ns, ns, k, ns, f);
        let ch = generate_channel(&cfg, &ChannelParams::for_config(&cfg, seed)).unwrap();
        (cfg, ch)
    }

    #[test]
    fn single_user_is_eigen_beamforming() {
        let (cfg, ch) = setup(1, 8, 4, 2, 2, 3);
        let (t, w) = bd_digital_precoder(&ch, &cfg).unwrap();
        for f in 0..2 {
            let h = ch.get(0, f);
            let dec = svd(h);
            let p = t.block(0, f);
            // Same subspace as the top right singular vectors.
            let top = dec.v.columns(0, 2).into_owned();
            let proj = &top * top.adjoint() * &p;
            assert!(fro2(&(proj - &p)).sqrt() < 1e-10);
            // Captured gain equals the top singular values.
            let g = fro2(&(h * &p));
            assert!((g - (dec.s[0].powi(2) + dec.s[1].powi(2))).abs() < 1e-9 * g);
            assert!(orthonormality_error(w.get(0, f), true) < 1e-10);
        }
    }

    #[test]
    fn two_users_zero_leakage() {
        let (cfg, ch) = setup(2, 8, 2, 1, 3, 7);
        let (t, _) = bd_digital_precoder(&ch, &cfg).unwrap();
        for f in 0..3 {
            let leak = fro2(&(ch.get(1, f) * t.block(0, f))).sqrt();
            assert!(leak < 1e-8 * fro2(ch.get(1, f)).sqrt(), "leak {leak}");
            // Independent check: projection onto the null space built from scratch.
            let h2 = ch.get(1, f);
            let pinv_proj = h2.adjoint() * (h2 * h2.adjoint()).try_inverse().unwrap() * h2;
            let p = t.block(0, f);
            assert!(fro2(&(&pinv_proj * &p)).sqrt() < 1e-8);
        }
    }

    #[test]
    fn blocks_have_stream_power_and_layout() {
        let (cfg, ch) = setup(3, 16, 4, 2, 2, 11);
        let (t, w) = bd_digital_precoder(&ch, &cfg).unwrap();
        assert_eq!(t.f_opt.ncols(), 3 * 2 * 2);
        assert_eq!(t.block_columns(1, 1), 8..10);
        for f in 0..2 {
            for k in 0..3 {
                assert!((fro2(&t.block(k, f)) - 2.0).abs() < 1e-10);
                assert!(orthonormality_error(w.get(k, f), true) < 1e-10);
                for j in 0..3 {
                    if j != k {
                        let leak = fro2(&(ch.get(j, f) * t.block(k, f))).sqrt();
                        assert!(leak <= 1e-8 * fro2(ch.get(j, f)).sqrt());
                    }
                }
            }
        }
    }

    #[test]
    fn infeasible_when_null_space_too_small() {
        // Three users with 4 antennas each leave no null space in 8 dimensions.
        let cfg = SystemConfig::new(8, 4, 3, 1, 3, 1, 1);
        let mut p = ChannelParams::for_config(&cfg, 1);
        p.n_clusters = 4;
        let ch: ChannelRealization<f64> = generate_channel(&cfg, &p).unwrap();
        assert!(matches!(bd_digital_precoder(&ch, &cfg), Err(Error::Infeasible(_))));
    }
}
