//! Component counts and power of the analog network for the competing
//! hybrid-precoder structures. Powers are kept in integer milliwatts so
//! totals are exact.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Adaptive phase shifter power (mW).
pub const P_ADAPTIVE_PS_MW: u64 = 50;
/// Fixed phase shifter power (mW).
pub const P_FIXED_PS_MW: u64 = 20;
/// Switch power (mW).
pub const P_SWITCH_MW: u64 = 5;
/// Hybrid coupler power (mW).
pub const P_COUPLER_MW: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    SpsFully,
    SpsPartial,
    ButlerFully,
    ButlerPartial,
    DpsFully,
    DpsPartial,
    FpsFully,
    FpsGroup(usize),
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::SpsFully => write!(f, "SPS fully-connected"),
            Structure::SpsPartial => write!(f, "SPS partially-connected"),
            Structure::ButlerFully => write!(f, "Butler fully-connected"),
            Structure::ButlerPartial => write!(f, "Butler partially-connected"),
            Structure::DpsFully => write!(f, "DPS fully-connected"),
            Structure::DpsPartial => write!(f, "DPS partially-connected"),
            Structure::FpsFully => write!(f, "FPS fully-connected"),
            Structure::FpsGroup(eta) => write!(f, "FPS group-connected (eta={eta})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsType {
    Adaptive,
    Fixed,
    MultiChannelFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OtherKind {
    None,
    Switch,
    Coupler,
}

/// How FPS phase shifters enter the power total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsAccounting {
    /// `Nc * N_RF` fixed shifters, each at the Butler fixed-shifter power.
    #[default]
    Footnote,
    /// Only the `Nc` physical multi-channel shifters.
    Physical,
}

/// Exact power in milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Power(pub u64);

impl Power {
    pub fn milliwatts(self) -> u64 {
        self.0
    }

    pub fn watts(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 1000;
        let frac = self.0 % 1000;
        if frac == 0 {
            write!(f, "{whole} W")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{whole}.{} W", digits.trim_end_matches('0'))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub structure: Structure,
    /// Phase shifters installed.
    pub n_ps: u64,
    pub ps_type: PsType,
    pub p_ps_mw: u64,
    /// Phase shifters charged in the power total (differs from `n_ps` only
    /// for FPS under footnote accounting).
    pub n_ps_powered: u64,
    pub other_kind: OtherKind,
    pub n_oc: u64,
    pub p_oc_mw: u64,
    /// Set when a count formula was evaluated outside its domain.
    pub note: Option<String>,
}

/// `N_PS P_PS + N_OC P_OC`, exact.
pub fn power_total(p: &HardwareProfile) -> Power {
    Power(p.n_ps_powered * p.p_ps_mw + p.n_oc * p.p_oc_mw)
}

fn plain(structure: Structure, n_ps: u64, ps_type: PsType, p_ps_mw: u64) -> HardwareProfile {
    HardwareProfile {
        structure,
        n_ps,
        ps_type,
        p_ps_mw,
        n_ps_powered: n_ps,
        other_kind: OtherKind::None,
        n_oc: 0,
        p_oc_mw: 0,
        note: None,
    }
}

/// `(floor(log2 n), exact)`.
fn log2_floor(n: u64) -> (u64, bool) {
    if n == 0 {
        return (0, false);
    }
    (63 - u64::from(n.leading_zeros()), n.is_power_of_two())
}

/// Butler counts `(width/2)(log2 n - 1)` shifters and `(width/2) log2 n`
/// couplers for an `n`-port matrix replicated to `width` total ports.
fn butler(structure: Structure, width: u64, n: u64) -> HardwareProfile {
    let (lg, exact) = log2_floor(n);
    let half = width / 2;
    let mut notes = Vec::new();
    if !exact {
        notes.push(format!("formula requires power-of-two port count; {n} evaluated with floor(log2) = {lg}"));
    }
    if width % 2 != 0 {
        notes.push(format!("odd port count {width} halved with truncation"));
    }
    HardwareProfile {
        structure,
        n_ps: half * lg.saturating_sub(1),
        ps_type: PsType::Fixed,
        p_ps_mw: P_FIXED_PS_MW,
        n_ps_powered: half * lg.saturating_sub(1),
        other_kind: OtherKind::Coupler,
        n_oc: half * lg,
        p_oc_mw: P_COUPLER_MW,
        note: if notes.is_empty() { None } else { Some(notes.join("; ")) },
    }
}

/// The FPS profile for `eta` groups.
pub fn fps_profile(n_tx: u64, n_rf: u64, n_ps: u64, eta: u64, accounting: PsAccounting) -> HardwareProfile {
    let eta = eta.max(1);
    let structure = if eta == 1 { Structure::FpsFully } else { Structure::FpsGroup(eta as usize) };
    let total = n_ps * n_rf * n_tx;
    HardwareProfile {
        structure,
        n_ps,
        ps_type: PsType::MultiChannelFixed,
        p_ps_mw: P_FIXED_PS_MW,
        n_ps_powered: match accounting {
            PsAccounting::Footnote => n_ps * n_rf,
            PsAccounting::Physical => n_ps,
        },
        other_kind: OtherKind::Switch,
        n_oc: total / eta,
        p_oc_mw: P_SWITCH_MW,
        note: (total % eta != 0).then(|| format!("eta = {eta} does not divide Nc*N_RF*Nt = {total}")),
    }
}

/// Every structure's profile for `(Nt, N_RF, Nc, eta)`.
pub fn describe_hardware(n_tx: u64, n_rf: u64, n_ps: u64, eta: u64, accounting: PsAccounting) -> Vec<HardwareProfile> {
    let mut rows = vec![
        plain(Structure::SpsFully, n_rf * n_tx, PsType::Adaptive, P_ADAPTIVE_PS_MW),
        plain(Structure::SpsPartial, n_tx, PsType::Adaptive, P_ADAPTIVE_PS_MW),
        butler(Structure::ButlerFully, n_rf * n_tx, n_tx),
        butler(Structure::ButlerPartial, n_tx, if n_rf == 0 { 0 } else { n_tx / n_rf }),
        plain(Structure::DpsFully, 2 * n_rf * n_tx, PsType::Adaptive, P_ADAPTIVE_PS_MW),
        plain(Structure::DpsPartial, 2 * n_tx, PsType::Adaptive, P_ADAPTIVE_PS_MW),
        fps_profile(n_tx, n_rf, n_ps, 1, accounting),
    ];
    if eta > 1 {
        rows.push(fps_profile(n_tx, n_rf, n_ps, eta, accounting));
    }
    rows
}

/// The five rows of the published power comparison for `Nt = 144`,
/// `N_RF = 8`, built from the printed component counts.
pub fn table_ii() -> Vec<(&'static str, HardwareProfile)> {
    let fixed = |n_ps: u64, other_kind: OtherKind, n_oc: u64, p_oc_mw: u64, n_ps_powered: u64| HardwareProfile {
        structure: Structure::FpsFully,
        n_ps,
        ps_type: PsType::Fixed,
        p_ps_mw: P_FIXED_PS_MW,
        n_ps_powered,
        other_kind,
        n_oc,
        p_oc_mw,
        note: None,
    };
    let mut butler = fixed(3456, OtherKind::Coupler, 4032, P_COUPLER_MW, 3456);
    butler.structure = Structure::ButlerFully;
    vec![
        ("DPS fully-connected", plain(Structure::DpsFully, 2304, PsType::Adaptive, P_ADAPTIVE_PS_MW)),
        ("FPS fully-connected, Nc = 10", fixed(10, OtherKind::Switch, 11520, P_SWITCH_MW, 80)),
        ("SPS fully-connected, 4-bit", plain(Structure::SpsFully, 1152, PsType::Adaptive, P_ADAPTIVE_PS_MW)),
        ("FPS fully-connected, Nc = 2", fixed(2, OtherKind::Switch, 2304, P_SWITCH_MW, 16)),
        ("SPS fully-connected with Butler matrices", butler),
    ]
}
