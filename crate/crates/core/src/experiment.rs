//! Monte-Carlo sweeps driven by a TOML configuration file.
//!
//! Realization `r` uses seed `base_seed + r` for both the channel and the
//! random-switch draws. Realizations run in parallel; rows are emitted in
//! (sweep value, realization, method) order regardless of completion order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::altmin::{AnalogArchitecture, StoppingRule};
use crate::cancel::CombinerMode;
use crate::error::{Error, Result};
use crate::eval::{describe_hardware, power_total, EvaluationReport, HardwareProfile, PsAccounting};
use crate::pipeline::{design, evaluate, Design, Method, PipelineSettings, Prepared};
use crate::system::{generate_channel, near_square, ChannelParams, SystemConfig};

pub const DETAIL_SCHEMA: &str = "fpsim-detail/1";
pub const SUMMARY_SCHEMA: &str = "fpsim-summary/1";
pub const REPORT_SCHEMA: &str = "fpsim-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_rf_tx: usize,
    pub n_rf_rx: usize,
    pub n_users: usize,
    pub n_streams: usize,
    pub n_subcarriers: usize,
    #[serde(default = "one")]
    pub tx_power: f64,
    /// Nominal SNR; overridden per point when sweeping `snr_db`.
    #[serde(default)]
    pub snr_db: f64,
}

fn one() -> f64 {
    1.0
}

impl SystemSection {
    /// System configuration at `snr_db`, noise power derived from the nominal SNR.
    pub fn at_snr(&self, snr_db: f64) -> SystemConfig {
        let mut cfg = SystemConfig::new(
            self.n_tx,
            self.n_rx,
            self.n_rf_tx,
            self.n_rf_rx,
            self.n_users,
            self.n_streams,
            self.n_subcarriers,
        )
        .with_snr_db(snr_db);
        cfg.tx_power = self.tx_power;
        cfg.noise_power = self.tx_power / (cfg.streams_total() as f64 * crate::system::db_to_linear(snr_db));
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub n_clusters: usize,
    pub n_rays: usize,
    pub angle_spread_deg: f64,
    /// `[rows, cols]`; defaults to the most square factorization of `n_tx`.
    pub tx_array: Option<(usize, usize)>,
    pub rx_array: Option<(usize, usize)>,
    pub base_seed: u64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection { n_clusters: 5, n_rays: 10, angle_spread_deg: 10.0, tx_array: None, rx_array: None, base_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchSection {
    pub n_ps: usize,
    #[serde(default = "one_usize")]
    pub n_groups: usize,
    /// Explicit fixed phases (radians); uniform spacing when absent.
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverSection {
    pub mode: CombinerMode,
    /// Receive-bank size; follows the transmit `n_ps` when absent.
    pub n_ps: Option<usize>,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        ReceiverSection { mode: CombinerMode::Hybrid, n_ps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    NPs,
    NGroups,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NPs => "n_ps",
            SweepAxis::NGroups => "n_groups",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub prefix: String,
    pub json: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("results"), prefix: "fpsim".into(), json: true }
    }
}

/// Everything a sweep needs; every field is echoed into the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_realizations: usize,
    pub methods: Vec<Method>,
    /// Worker threads; `None` uses the global default.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub accounting: PsAccounting,
    pub system: SystemSection,
    #[serde(default)]
    pub channel: ChannelSection,
    pub arch: ArchSection,
    #[serde(default)]
    pub receiver: ReceiverSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub stopping: StoppingRule,
    #[serde(default)]
    pub output: OutputSection,
}

/// One sweep point: the system at its SNR and the hardware settings.
#[derive(Debug, Clone)]
struct Point {
    value: f64,
    cfg: SystemConfig,
    settings: PipelineSettings,
}

fn as_count(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(Error::config(format!("sweep.values[{axis}]"), format!("{v} is not a positive integer")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("config: {e}")))
    }

    /// Channel parameters for realization `r`.
    pub fn channel_params(&self, r: usize) -> ChannelParams {
        ChannelParams {
            n_clusters: self.channel.n_clusters,
            n_rays: self.channel.n_rays,
            angle_spread_deg: self.channel.angle_spread_deg,
            tx_array: self.channel.tx_array.unwrap_or_else(|| near_square(self.system.n_tx)),
            rx_array: self.channel.rx_array.unwrap_or_else(|| near_square(self.system.n_rx)),
            seed: self.channel.base_seed.wrapping_add(r as u64),
        }
    }

    fn arch_with(&self, n_ps: usize, n_groups: usize) -> AnalogArchitecture {
        match &self.arch.phases {
            Some(p) if n_ps == self.arch.n_ps => AnalogArchitecture { n_ps, phases: p.clone(), n_groups },
            _ => AnalogArchitecture::uniform(n_ps, n_groups),
        }
    }

    fn points(&self) -> Result<Vec<Point>> {
        self.sweep
            .values
            .iter()
            .map(|&v| {
                let (snr, n_ps, n_groups) = match self.sweep.axis {
                    SweepAxis::SnrDb => (v, self.arch.n_ps, self.arch.n_groups),
                    SweepAxis::NPs => (self.system.snr_db, as_count(self.sweep.axis, v)?, self.arch.n_groups),
                    SweepAxis::NGroups => (self.system.snr_db, self.arch.n_ps, as_count(self.sweep.axis, v)?),
                };
                if !snr.is_finite() {
                    return Err(Error::config("sweep.values", format!("SNR {v} is not finite")));
                }
                let rx_n_ps = match self.sweep.axis {
                    SweepAxis::NPs if self.receiver.n_ps.is_none() => n_ps,
                    _ => self.receiver.n_ps.unwrap_or(self.arch.n_ps),
                };
                Ok(Point {
                    value: v,
                    cfg: self.system.at_snr(snr),
                    settings: PipelineSettings {
                        arch: self.arch_with(n_ps, n_groups),
                        rx_n_ps,
                        combiner_mode: self.receiver.mode,
                        stop: self.stopping,
                        accounting: self.accounting,
                    },
                })
            })
            .collect()
    }

    /// Checks every field, reporting the first failure with its path.
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::config("n_realizations", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::config("methods", format!("`{m}` listed twice")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::config("sweep.values", "at least one value is required"));
        }
        if !(self.stopping.rel_tol >= 0.0) || self.stopping.max_iter == 0 {
            return Err(Error::config("stopping", "need rel_tol >= 0 and max_iter >= 1"));
        }
        if let Some(p) = &self.arch.phases {
            if p.len() != self.arch.n_ps {
                return Err(Error::config("arch.phases", format!("{} phases for n_ps = {}", p.len(), self.arch.n_ps)));
            }
        }
        if self.output.prefix.is_empty() {
            return Err(Error::config("output.prefix", "must not be empty"));
        }
        let base = self.system.at_snr(self.system.snr_db);
        base.validate()?;
        self.channel_params(0).validate(&base).map_err(|e| match e {
            Error::InvalidConfig { field, reason } => Error::config(format!("channel.{}", field.trim_start_matches("channel.")), reason),
            other => other,
        })?;
        for p in self.points()? {
            p.cfg.validate()?;
            p.settings.arch.validate(base.n_tx, base.n_rf_tx).map_err(|e| match e {
                Error::InvalidConfig { field, reason } => Error::config(format!("{field} (sweep value {})", p.value), reason),
                other => other,
            })?;
            if p.settings.combiner_mode == CombinerMode::Hybrid && p.settings.rx_n_ps == 0 {
                return Err(Error::config("receiver.n_ps", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Flattened `key = value` lines of the full configuration, defaults included.
    pub fn echo_lines(&self) -> Vec<String> {
        let v = serde_json::to_value(self).expect("config serializes");
        let mut out = Vec::new();
        flatten("", &v, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => out.push(format!("{prefix} = {other}")),
    }
}

/// One `(sweep value, realization, method)` outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub method: String,
    pub realization: usize,
    pub seed: u64,
    pub status: String,
    pub se_bits_per_hz: Option<f64>,
    /// Per-user rates joined with `;`.
    pub per_user_se: String,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub mean_candidates: Option<f64>,
    pub max_candidates: Option<usize>,
    pub fallbacks: Option<usize>,
    pub resamples: Option<usize>,
    pub kappa: Option<f64>,
    pub max_leakage: Option<f64>,
    pub power_error: Option<f64>,
    pub power_total_w: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub method: String,
    pub n_ok: usize,
    pub n_failed: usize,
    pub mean_se: Option<f64>,
    /// Sample standard deviation.
    pub std_se: Option<f64>,
    pub stderr_se: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub detail: Vec<DetailRow>,
    pub summary: Vec<SummaryRow>,
    /// Candidate-set size histogram per method, pooled over the sweep.
    pub candidate_histograms: BTreeMap<String, BTreeMap<usize, usize>>,
    pub hardware: Vec<HardwareRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HardwareRow {
    pub profile: HardwareProfile,
    pub power_total_w: f64,
    pub power_total: String,
}

impl ExperimentResult {
    pub fn n_failed(&self) -> usize {
        self.detail.iter().filter(|r| r.status != "ok").count()
    }
}

fn ok_row(axis: SweepAxis, value: f64, r: usize, rep: &EvaluationReport) -> DetailRow {
    let total: usize = rep.candidate_set_sizes.values().sum();
    let weighted: usize = rep.candidate_set_sizes.iter().map(|(k, n)| k * n).sum();
    DetailRow {
        sweep_axis: axis.to_string(),
        sweep_value: value,
        method: rep.method.clone(),
        realization: r,
        seed: rep.seed,
        status: "ok".into(),
        se_bits_per_hz: Some(rep.se_bits_per_hz),
        per_user_se: rep.per_user_se.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"),
        iterations: Some(rep.iterations),
        converged: Some(rep.converged),
        mean_candidates: (total > 0).then(|| weighted as f64 / total as f64),
        max_candidates: rep.candidate_set_sizes.keys().next_back().copied(),
        fallbacks: Some(rep.fallbacks),
        resamples: Some(rep.resamples),
        kappa: rep.kappa,
        max_leakage: rep.max_leakage,
        power_error: Some(rep.power_error),
        power_total_w: rep.power_total_w,
        error: String::new(),
    }
}

fn failed_row(axis: SweepAxis, value: f64, method: Method, r: usize, seed: u64, e: &Error) -> DetailRow {
    DetailRow {
        sweep_axis: axis.to_string(),
        sweep_value: value,
        method: method.name().into(),
        realization: r,
        seed,
        status: "failed".into(),
        se_bits_per_hz: None,
        per_user_se: String::new(),
        iterations: None,
        converged: None,
        mean_candidates: None,
        max_candidates: None,
        fallbacks: None,
        resamples: None,
        kappa: None,
        max_leakage: None,
        power_error: None,
        power_total_w: None,
        error: e.to_string(),
    }
}

type Job = Vec<(usize, usize, DetailRow, Option<EvaluationReport>)>;

fn run_realization(cfg: &ExperimentConfig, points: &[Point], r: usize) -> Job {
    let params = cfg.channel_params(r);
    let seed = params.seed;
    let axis = cfg.sweep.axis;
    let mut out = Vec::new();
    let base = cfg.system.at_snr(cfg.system.snr_db);
    let prep = generate_channel::<f64>(&base, &params).and_then(|ch| Prepared::new(ch, &base));
    let prep = match prep {
        Ok(p) => p,
        Err(e) => {
            for (pi, p) in points.iter().enumerate() {
                for (mi, &m) in cfg.methods.iter().enumerate() {
                    out.push((pi, mi, failed_row(axis, p.value, m, r, seed, &e), None));
                }
            }
            return out;
        }
    };
    // SNR does not enter the designs, so they are shared across SNR points.
    let mut cache: HashMap<(usize, usize, Method), std::result::Result<Design<f64>, String>> = HashMap::new();
    for (pi, p) in points.iter().enumerate() {
        for (mi, &m) in cfg.methods.iter().enumerate() {
            let key = (p.settings.arch.n_ps, p.settings.arch.n_groups, m);
            let d = cache
                .entry(key)
                .or_insert_with(|| design(m, &prep, &p.cfg, &p.settings, seed).map_err(|e| e.to_string()));
            let res = match d {
                Ok(d) => evaluate(d, &prep, &p.cfg, &p.settings, seed),
                Err(msg) => Err(Error::Format(msg.clone())),
            };
            match res {
                Ok(rep) => out.push((pi, mi, ok_row(axis, p.value, r, &rep), Some(rep))),
                Err(e) => out.push((pi, mi, failed_row(axis, p.value, m, r, seed, &e), None)),
            }
        }
    }
    out
}

fn summarize(axis: SweepAxis, value: f64, method: &str, rows: &[&DetailRow]) -> SummaryRow {
    let se: Vec<f64> = rows.iter().filter_map(|r| r.se_bits_per_hz).collect();
    let n = se.len();
    let mean = (n > 0).then(|| se.iter().sum::<f64>() / n as f64);
    let std = mean.map(|m| {
        if n < 2 {
            0.0
        } else {
            (se.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt()
        }
    });
    SummaryRow {
        sweep_axis: axis.to_string(),
        sweep_value: value,
        method: method.into(),
        n_ok: n,
        n_failed: rows.len() - n,
        mean_se: mean,
        std_se: std,
        stderr_se: std.map(|s| s / (n as f64).sqrt()),
    }
}

/// Runs the sweep. Solver failures become failed rows; only configuration
/// errors abort.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let points = cfg.points()?;
    let work = || -> Vec<Job> {
        (0..cfg.n_realizations)
            .into_par_iter()
            .map(|r| run_realization(cfg, &points, r))
            .collect()
    };
    let jobs = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut all: Vec<(usize, usize, usize, DetailRow, Option<EvaluationReport>)> = jobs
        .into_iter()
        .enumerate()
        .flat_map(|(r, job)| job.into_iter().map(move |(pi, mi, row, rep)| (pi, r, mi, row, rep)))
        .collect();
    all.sort_by_key(|(pi, r, mi, _, _)| (*pi, *r, *mi));

    let mut histograms: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    for (_, _, _, _, rep) in &all {
        if let Some(rep) = rep {
            let h = histograms.entry(rep.method.clone()).or_default();
            for (k, n) in &rep.candidate_set_sizes {
                *h.entry(*k).or_insert(0) += n;
            }
        }
    }
    let detail: Vec<DetailRow> = all.into_iter().map(|(_, _, _, row, _)| row).collect();

    let mut summary = Vec::new();
    for p in &points {
        for m in &cfg.methods {
            let rows: Vec<&DetailRow> = detail
                .iter()
                .filter(|d| d.method == m.name() && d.sweep_value.to_bits() == p.value.to_bits())
                .collect();
            summary.push(summarize(cfg.sweep.axis, p.value, m.name(), &rows));
        }
    }

    let hardware = describe_hardware(
        cfg.system.n_tx as u64,
        cfg.system.n_rf_tx as u64,
        cfg.arch.n_ps as u64,
        cfg.arch.n_groups as u64,
        cfg.accounting,
    )
    .into_iter()
    .map(|profile| {
        let p = power_total(&profile);
        HardwareRow { power_total_w: p.watts(), power_total: p.to_string(), profile }
    })
    .collect();

    Ok(ExperimentResult {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        detail,
        summary,
        candidate_histograms: histograms,
        hardware,
    })
}

fn csv_bytes<S: Serialize>(schema: &str, cfg: &ExperimentConfig, rows: &[S]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    buf.extend_from_slice(format!("# schema: {schema}\n").as_bytes());
    for line in cfg.echo_lines() {
        buf.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    let mut w = csv::Writer::from_writer(buf);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| Error::Format(format!("csv: {e}")))
}

/// Detail CSV with the schema and config header.
pub fn detail_csv(res: &ExperimentResult) -> Result<Vec<u8>> {
    csv_bytes(DETAIL_SCHEMA, &res.config, &res.detail)
}

pub fn summary_csv(res: &ExperimentResult) -> Result<Vec<u8>> {
    csv_bytes(SUMMARY_SCHEMA, &res.config, &res.summary)
}

/// Writes `<prefix>_detail.csv`, `<prefix>_summary.csv` and (optionally)
/// `<prefix>_report.json` under the output directory; returns the paths.
pub fn write_outputs(res: &ExperimentResult) -> Result<Vec<PathBuf>> {
    let out = &res.config.output;
    fs::create_dir_all(&out.dir)?;
    let mut paths = Vec::new();
    let detail = out.dir.join(format!("{}_detail.csv", out.prefix));
    fs::write(&detail, detail_csv(res)?)?;
    paths.push(detail);
    let summary = out.dir.join(format!("{}_summary.csv", out.prefix));
    fs::write(&summary, summary_csv(res)?)?;
    paths.push(summary);
    if out.json {
        let json = out.dir.join(format!("{}_report.json", out.prefix));
        let text = serde_json::to_string_pretty(res).map_err(|e| Error::Format(format!("json: {e}")))?;
        fs::write(&json, text)?;
        paths.push(json);
    }
    Ok(paths)
}
