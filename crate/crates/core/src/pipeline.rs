//! End-to-end designs on one channel realization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::altmin::{build_phase_bank, group_solve, AnalogArchitecture, StoppingRule};
use crate::cancel::{complete_hybrid, design_hybrid_combiners, CombinerMode, HybridSolution};
use crate::digital::{bd_digital_precoder, DigitalCombinerSet, DigitalPrecoderTarget};
use crate::error::{Error, Result};
use crate::eval::hardware::fps_profile;
use crate::eval::{candidate_histogram, power_total, random_switch_precoder, spectral_efficiency, DigitalChain, EvaluationReport, PsAccounting};
use crate::linalg::fro2;
use crate::scalar::Real;
use crate::system::{ChannelRealization, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FullyDigital,
    FpsAltmin,
    RandomSwitch,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::FullyDigital, Method::FpsAltmin, Method::RandomSwitch];

    pub fn name(self) -> &'static str {
        match self {
            Method::FullyDigital => "fully-digital",
            Method::FpsAltmin => "fps-altmin",
            Method::RandomSwitch => "random-switch",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("methods", format!("unknown method `{s}` (expected fully-digital, fps-altmin or random-switch)")))
    }
}

/// Hardware and solver settings shared by the hybrid methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSettings {
    pub arch: AnalogArchitecture,
    /// Fixed phases of each user's receive bank in hybrid-combiner mode.
    pub rx_n_ps: usize,
    pub combiner_mode: CombinerMode,
    pub stop: StoppingRule,
    pub accounting: PsAccounting,
}

impl PipelineSettings {
    /// Transmit bank of `n_ps` phases, `n_groups` groups, receive bank of the same size.
    pub fn new(n_ps: usize, n_groups: usize) -> Self {
        PipelineSettings {
            arch: AnalogArchitecture::uniform(n_ps, n_groups),
            rx_n_ps: n_ps,
            combiner_mode: CombinerMode::Hybrid,
            stop: StoppingRule::default(),
            accounting: PsAccounting::Footnote,
        }
    }
}

/// Channel plus its fully digital BD target, shared by every method.
#[derive(Debug, Clone)]
pub struct Prepared<T: Real> {
    pub channel: ChannelRealization<T>,
    pub target: DigitalPrecoderTarget<T>,
    pub w_opt: DigitalCombinerSet<T>,
}

impl<T: Real> Prepared<T> {
    pub fn new(channel: ChannelRealization<T>, cfg: &SystemConfig) -> Result<Self> {
        let (target, w_opt) = bd_digital_precoder(&channel, cfg)?;
        Ok(Prepared { channel, target, w_opt })
    }
}

/// A method's transceiver, before SNR-dependent evaluation.
#[derive(Debug, Clone)]
pub enum Design<T: Real> {
    FullyDigital,
    Hybrid { method: Method, solution: Box<HybridSolution<T>>, resamples: usize },
}

/// Builds the transceiver of `method`; `seed` drives the random switches.
pub fn design<T: Real>(
    method: Method,
    prep: &Prepared<T>,
    cfg: &SystemConfig,
    settings: &PipelineSettings,
    seed: u64,
) -> Result<Design<T>> {
    if method == Method::FullyDigital {
        return Ok(Design::FullyDigital);
    }
    settings.arch.validate(cfg.n_tx, cfg.n_rf_tx)?;
    let (precoder, resamples) = match method {
        Method::FpsAltmin => (group_solve(&prep.target.f_opt, &settings.arch, cfg.n_rf_tx, &settings.stop)?, 0),
        _ => {
            let out = random_switch_precoder(&prep.target.f_opt, &settings.arch, cfg.n_rf_tx, &settings.stop, seed)?;
            (out.solution, out.resamples)
        }
    };
    let combiners = design_hybrid_combiners(&prep.w_opt, cfg, settings.rx_n_ps, settings.combiner_mode, &settings.stop)?;
    let bank = build_phase_bank(&settings.arch, cfg.n_rf_tx);
    let solution = complete_hybrid(&prep.channel, cfg, precoder, bank, combiners)?;
    Ok(Design::Hybrid { method, solution: Box::new(solution), resamples })
}

/// Spectral efficiency and diagnostics of a design at `cfg`'s SNR.
pub fn evaluate<T: Real>(
    design: &Design<T>,
    prep: &Prepared<T>,
    cfg: &SystemConfig,
    settings: &PipelineSettings,
    seed: u64,
) -> Result<EvaluationReport> {
    let snr = cfg.snr_linear();
    let budget = cfg.streams_total() as f64;
    match design {
        Design::FullyDigital => {
            let chain = DigitalChain { target: &prep.target, combiners: &prep.w_opt };
            let se = spectral_efficiency(&prep.channel, &chain, snr)?;
            Ok(EvaluationReport {
                method: Method::FullyDigital.name().into(),
                seed,
                se_bits_per_hz: se.total,
                per_user_se: se.per_user,
                power_total_w: None,
                iterations: 0,
                converged: true,
                candidate_set_sizes: Default::default(),
                fallbacks: 0,
                resamples: 0,
                kappa: None,
                max_leakage: None,
                power_error: (fro2(&prep.target.f_opt).as_f64() - budget).abs(),
                config: cfg.clone(),
            })
        }
        Design::Hybrid { method, solution, resamples } => {
            let se = spectral_efficiency(&prep.channel, solution.as_ref(), snr)?;
            let pre = &solution.precoder;
            let profile = fps_profile(
                cfg.n_tx as u64,
                cfg.n_rf_tx as u64,
                settings.arch.n_ps as u64,
                settings.arch.n_groups as u64,
                settings.accounting,
            );
            Ok(EvaluationReport {
                method: method.name().into(),
                seed,
                se_bits_per_hz: se.total,
                per_user_se: se.per_user,
                power_total_w: Some(power_total(&profile).watts()),
                iterations: pre.iterations(),
                converged: pre.groups.iter().all(|g| g.converged),
                candidate_set_sizes: candidate_histogram(pre.candidate_counts()),
                fallbacks: pre.groups.iter().map(|g| g.fallbacks).sum(),
                resamples: *resamples,
                kappa: Some(solution.kappa.as_f64()),
                max_leakage: Some(solution.max_leakage().as_f64()),
                power_error: (solution.total_power().as_f64() - budget).abs(),
                config: cfg.clone(),
            })
        }
    }
}

/// Designs and evaluates one method.
pub fn run_method<T: Real>(
    method: Method,
    prep: &Prepared<T>,
    cfg: &SystemConfig,
    settings: &PipelineSettings,
    seed: u64,
) -> Result<EvaluationReport> {
    let d = design(method, prep, cfg, settings, seed)?;
    evaluate(&d, prep, cfg, settings, seed)
}

/// Random-switch baseline on a given channel.
pub fn random_switch_baseline<T: Real>(
    cfg: &SystemConfig,
    settings: &PipelineSettings,
    channel: ChannelRealization<T>,
    seed: u64,
) -> Result<EvaluationReport> {
    let prep = Prepared::new(channel, cfg)?;
    run_method(Method::RandomSwitch, &prep, cfg, settings, seed)
}
