//! Achievable rate of a fixed linear transceiver under Gaussian signaling.

use serde::{Deserialize, Serialize};

use crate::cancel::HybridSolution;
use crate::digital::{DigitalCombinerSet, DigitalPrecoderTarget};
use crate::error::{Error, Result};
use crate::linalg::logdet_hpd;
use crate::scalar::{real, CMat, Real};
use crate::system::ChannelRealization;

/// Anything that yields a transmit chain and a combiner per `(user, subcarrier)`.
pub trait PrecodingChain<T: Real> {
    fn n_users(&self) -> usize;
    fn n_subcarriers(&self) -> usize;
    /// Full transmit chain `T_{k,f}` (`Nt x Ns`), power normalization included.
    fn transmit(&self, user: usize, subcarrier: usize) -> CMat<T>;
    /// Overall combiner `W_RF W_BB` (`Nr x Ns`).
    fn combiner(&self, user: usize, subcarrier: usize) -> CMat<T>;
}

impl<T: Real> PrecodingChain<T> for HybridSolution<T> {
    fn n_users(&self) -> usize {
        HybridSolution::n_users(self)
    }
    fn n_subcarriers(&self) -> usize {
        HybridSolution::n_subcarriers(self)
    }
    fn transmit(&self, user: usize, subcarrier: usize) -> CMat<T> {
        self.transmit_chain(user, subcarrier)
    }
    fn combiner(&self, user: usize, subcarrier: usize) -> CMat<T> {
        self.combiners[user].effective(subcarrier)
    }
}

/// The fully digital BD transceiver.
#[derive(Debug, Clone, Copy)]
pub struct DigitalChain<'a, T: Real> {
    pub target: &'a DigitalPrecoderTarget<T>,
    pub combiners: &'a DigitalCombinerSet<T>,
}

impl<T: Real> PrecodingChain<T> for DigitalChain<'_, T> {
    fn n_users(&self) -> usize {
        self.target.n_users
    }
    fn n_subcarriers(&self) -> usize {
        self.target.n_subcarriers
    }
    fn transmit(&self, user: usize, subcarrier: usize) -> CMat<T> {
        self.target.block(user, subcarrier)
    }
    fn combiner(&self, user: usize, subcarrier: usize) -> CMat<T> {
        self.combiners.get(user, subcarrier).clone()
    }
}

/// `log2 det(I + snr R_w^{-1} G G^H)` with `G = W^H H T` and `R_w = W^H W`.
///
/// Returns `None` when `R_w` is singular.
pub fn rate_bits<T: Real>(h: &CMat<T>, t: &CMat<T>, w: &CMat<T>, snr: T) -> Option<T> {
    let g = w.adjoint() * (h * t);
    let r_w = w.adjoint() * w;
    let scale = r_w.diagonal().iter().fold(T::zero(), |m, z| m.max(z.re));
    let chol = r_w.cholesky()?;
    let l = chol.l();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        // Complex Cholesky does not reject rank loss by itself; treat a
        // condition number of R_w beyond 1e12 as singular.
        if !(d.re * d.re > T::lit(1e-12) * scale) || d.im.abs() > d.re * T::lit(1e-6) {
            return None;
        }
    }
    let a = l.solve_lower_triangular(&g)?;
    let n = a.nrows();
    let m = CMat::<T>::identity(n, n) + (&a * a.adjoint()) * real(snr);
    logdet_hpd(&m).map(|v| v / T::ln_2())
}

/// Per-user and total spectral efficiency in bits/s/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEfficiency {
    /// Sum over users of the subcarrier-averaged rate.
    pub total: f64,
    pub per_user: Vec<f64>,
}

/// Evaluates `sum_k (1/F) sum_f rate(k, f)` at nominal SNR `snr`
/// (`P / (K Ns F sigma^2)`, linear).
pub fn spectral_efficiency<T: Real, C: PrecodingChain<T> + ?Sized>(
    channel: &ChannelRealization<T>,
    chain: &C,
    snr: f64,
) -> Result<SpectralEfficiency> {
    let (k_users, n_sub, _, _) = channel.dims();
    if chain.n_users() != k_users || chain.n_subcarriers() != n_sub {
        return Err(Error::DimensionMismatch(format!(
            "chain covers {} users x {} subcarriers, channel {k_users} x {n_sub}",
            chain.n_users(),
            chain.n_subcarriers()
        )));
    }
    let snr_t = T::lit(snr);
    let mut per_user = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let mut acc = 0.0;
        for f in 0..n_sub {
            let r = rate_bits(channel.get(k, f), &chain.transmit(k, f), &chain.combiner(k, f), snr_t)
                .ok_or(Error::SingularCombiner { user: k, subcarrier: f })?;
            acc += r.as_f64();
        }
        per_user.push(acc / n_sub as f64);
    }
    Ok(SpectralEfficiency { total: per_user.iter().sum(), per_user })
}
