//! Second-layer baseband processing: hybrid combiners, effective channels,
//! block diagonalization over the composite digital precoder, and the
//! transmit-power normalization `kappa`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::altmin::{assemble_analog, build_phase_bank, AltMinState, AnalogArchitecture, GroupSolution, PhaseBank, SwitchMatrix};
use crate::altmin::{altmin_with_bank, StoppingRule};
use crate::digital::{block_diagonalize, DigitalCombinerSet};
use crate::error::{Error, Result};
use crate::linalg::fro2;
use crate::scalar::{real, CMat, Real};
use crate::system::{ChannelRealization, SystemConfig};

/// How the users' combiners are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombinerMode {
    /// Pass the fully digital BD combiner through unchanged.
    Digital,
    /// Approximate each user's digital combiner with an FPS analog stage.
    Hybrid,
}

/// One user's combiner: `W_RF` shared by all subcarriers, `W_BB` per subcarrier.
#[derive(Debug, Clone)]
pub struct UserCombiner<T: Real> {
    /// `None` in digital mode (identity analog stage).
    pub w_rf: Option<CMat<T>>,
    pub w_bb: Vec<CMat<T>>,
    pub state: Option<AltMinState<T>>,
}

impl<T: Real> UserCombiner<T> {
    /// `W_RF W_BB` for one subcarrier.
    pub fn effective(&self, subcarrier: usize) -> CMat<T> {
        match &self.w_rf {
            Some(w_rf) => w_rf * &self.w_bb[subcarrier],
            None => self.w_bb[subcarrier].clone(),
        }
    }
}

/// Builds every user's combiner. In hybrid mode the user's concatenated
/// digital combiner (`Nr x Ns F`) is approximated with `cfg.n_rf_rx` chains
/// and a fully-connected receive bank of `rx_n_ps` fixed phases.
pub fn design_hybrid_combiners<T: Real>(
    w_opt: &DigitalCombinerSet<T>,
    cfg: &SystemConfig,
    rx_n_ps: usize,
    mode: CombinerMode,
    stop: &StoppingRule,
) -> Result<Vec<UserCombiner<T>>> {
    let n_sub = w_opt.n_subcarriers;
    match mode {
        CombinerMode::Digital => Ok((0..cfg.n_users)
            .map(|k| UserCombiner {
                w_rf: None,
                w_bb: (0..n_sub).map(|f| w_opt.get(k, f).clone()).collect(),
                state: None,
            })
            .collect()),
        CombinerMode::Hybrid => {
            let arch = AnalogArchitecture::uniform(rx_n_ps, 1);
            arch.validate(cfg.n_rx, cfg.n_rf_rx)
                .map_err(|e| retag(e, "receiver.n_ps"))?;
            let bank: PhaseBank<T> = build_phase_bank(&arch, cfg.n_rf_rx);
            let ns = cfg.n_streams;
            (0..cfg.n_users)
                .into_par_iter()
                .map(|k| {
                    let st = altmin_with_bank(&w_opt.concatenated(k), &bank, stop)?;
                    let w_rf = assemble_analog(&st.s, &bank);
                    let w_bb_all = st.f_bb();
                    let w_bb = (0..n_sub).map(|f| w_bb_all.columns(f * ns, ns).into_owned()).collect();
                    Ok(UserCombiner { w_rf: Some(w_rf), w_bb, state: Some(st) })
                })
                .collect()
        }
    }
}

fn retag(e: Error, field: &str) -> Error {
    match e {
        Error::InvalidConfig { reason, .. } => Error::config(field, reason),
        other => other,
    }
}

/// `Ns x K Ns` effective channels of every user on one subcarrier:
/// `W~^H H F_RF F_BB(f)`, with `f_rf_bb` the product `F_RF F_BB(f)`.
pub fn effective_channel<T: Real>(
    channel: &ChannelRealization<T>,
    combiners: &[UserCombiner<T>],
    f_rf_bb: &CMat<T>,
    subcarrier: usize,
) -> Result<Vec<CMat<T>>> {
    combiners
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let h = channel.get(k, subcarrier);
            let w_eff = w.effective(subcarrier);
            if w_eff.nrows() != h.nrows() || h.ncols() != f_rf_bb.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "user {k}: combiner {}x{}, channel {}x{}, precoder {}x{}",
                    w_eff.nrows(),
                    w_eff.ncols(),
                    h.nrows(),
                    h.ncols(),
                    f_rf_bb.nrows(),
                    f_rf_bb.ncols()
                )));
            }
            Ok(w_eff.adjoint() * (h * f_rf_bb))
        })
        .collect()
}

/// `F_BD(k, f)` for every user on one subcarrier (`K Ns x Ns` each).
pub fn bd_second_layer<T: Real>(effective: &[CMat<T>], ns: usize) -> Result<Vec<CMat<T>>> {
    let refs: Vec<&CMat<T>> = effective.iter().collect();
    Ok(block_diagonalize(&refs, ns)?.into_iter().map(|(p, _)| p).collect())
}

/// `kappa = K Ns F / sum ||F_RF F_BB(f) F_BD(k, f)||^2`; `f_rf_bb[f]` holds
/// `F_RF F_BB(f)` and `f_bd[f][k]` the second layer.
pub fn normalize_kappa<T: Real>(f_rf_bb: &[CMat<T>], f_bd: &[Vec<CMat<T>>], streams_total: usize) -> Result<T> {
    let mut denom = T::zero();
    for (a, per_user) in f_rf_bb.iter().zip(f_bd) {
        for b in per_user {
            denom += fro2(&(a * b));
        }
    }
    if !(denom > T::zero()) {
        return Err(Error::ZeroPower);
    }
    Ok(T::from_usize(streams_total).unwrap() / denom)
}

/// A complete hybrid transceiver design.
#[derive(Debug, Clone)]
pub struct HybridSolution<T: Real> {
    pub s: SwitchMatrix,
    pub phase_bank: PhaseBank<T>,
    /// One gain per group.
    pub alphas: Vec<T>,
    /// Stacked `alpha_i F_DD,i`, `N_RF x K Ns F`.
    pub f_bb: CMat<T>,
    pub f_rf: CMat<T>,
    /// Indexed `[f][k]`.
    pub f_bd: Vec<Vec<CMat<T>>>,
    pub kappa: T,
    pub combiners: Vec<UserCombiner<T>>,
    pub precoder: GroupSolution<T>,
    /// Effective channels `[f][k]`, kept for the leakage check.
    pub effective: Vec<Vec<CMat<T>>>,
    pub n_streams: usize,
}

impl<T: Real> HybridSolution<T> {
    pub fn n_users(&self) -> usize {
        self.combiners.len()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.f_bd.len()
    }

    /// `F_BB(f)`, the `K Ns` columns of subcarrier `f`.
    pub fn f_bb_subcarrier(&self, subcarrier: usize) -> CMat<T> {
        let w = self.n_users() * self.n_streams;
        self.f_bb.columns(subcarrier * w, w).into_owned()
    }

    /// `sqrt(kappa) F_RF F_BB(f) F_BD(k, f)`.
    pub fn transmit_chain(&self, user: usize, subcarrier: usize) -> CMat<T> {
        (&self.f_rf * self.f_bb_subcarrier(subcarrier) * &self.f_bd[subcarrier][user]) * real(self.kappa.sqrt())
    }

    /// Total transmit power summed over all `(k, f)`, recomputed from scratch.
    pub fn total_power(&self) -> T {
        let mut p = T::zero();
        for f in 0..self.n_subcarriers() {
            for k in 0..self.n_users() {
                p += fro2(&self.transmit_chain(k, f));
            }
        }
        p
    }

    /// Largest `||H^_{j,f} F_BD(k,f)||_F` over `j != k`.
    pub fn max_leakage(&self) -> T {
        let mut worst = T::zero();
        for (eff, bd) in self.effective.iter().zip(&self.f_bd) {
            for (j, h) in eff.iter().enumerate() {
                for (k, b) in bd.iter().enumerate() {
                    if j != k {
                        worst = worst.max(fro2(&(h * b)).sqrt());
                    }
                }
            }
        }
        worst
    }
}

/// Completes a transmit design: second-layer BD per subcarrier and `kappa`.
pub fn complete_hybrid<T: Real>(
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig,
    precoder: GroupSolution<T>,
    phase_bank: PhaseBank<T>,
    combiners: Vec<UserCombiner<T>>,
) -> Result<HybridSolution<T>> {
    channel.check_against(cfg)?;
    let f_rf = assemble_analog(&precoder.s, &phase_bank);
    let w = cfg.streams_per_subcarrier();
    let f_bb = precoder.f_bb.clone();
    if f_rf.ncols() != f_bb.nrows() || f_bb.ncols() != cfg.streams_total() {
        return Err(Error::DimensionMismatch(format!(
            "F_RF is {}x{}, F_BB is {}x{}",
            f_rf.nrows(),
            f_rf.ncols(),
            f_bb.nrows(),
            f_bb.ncols()
        )));
    }
    let per_sub: Vec<(CMat<T>, Vec<CMat<T>>, Vec<CMat<T>>)> = (0..cfg.n_subcarriers)
        .into_par_iter()
        .map(|f| {
            let f_rf_bb = &f_rf * f_bb.columns(f * w, w);
            let eff = effective_channel(channel, &combiners, &f_rf_bb, f)?;
            let bd = bd_second_layer(&eff, cfg.n_streams)
                .map_err(|e| Error::Infeasible(format!("subcarrier {f}: {e}")))?;
            Ok((f_rf_bb, eff, bd))
        })
        .collect::<Result<_>>()?;
    let mut f_rf_bb = Vec::with_capacity(per_sub.len());
    let mut effective = Vec::with_capacity(per_sub.len());
    let mut f_bd = Vec::with_capacity(per_sub.len());
    for (a, e, b) in per_sub {
        f_rf_bb.push(a);
        effective.push(e);
        f_bd.push(b);
    }
    let kappa = normalize_kappa(&f_rf_bb, &f_bd, cfg.streams_total())?;
    Ok(HybridSolution {
        s: precoder.s.clone(),
        alphas: precoder.groups.iter().map(|g| g.alpha).collect(),
        phase_bank,
        f_bb,
        f_rf,
        f_bd,
        kappa,
        combiners,
        precoder,
        effective,
        n_streams: cfg.n_streams,
    })
}
