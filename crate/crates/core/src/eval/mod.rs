//! Spectral efficiency, the random-switch baseline, and the analog-network
//! hardware and power model.

pub mod hardware;
pub mod random;
pub mod rate;
pub mod report;

pub use hardware::{describe_hardware, power_total, table_ii, HardwareProfile, OtherKind, Power, PsAccounting, PsType, Structure};
pub use random::{random_switch_precoder, RandomSwitchOutcome};
pub use rate::{rate_bits, spectral_efficiency, DigitalChain, PrecodingChain, SpectralEfficiency};
pub use report::{candidate_histogram, EvaluationReport};
