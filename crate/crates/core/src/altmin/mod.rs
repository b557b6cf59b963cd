//! Fixed-phase-shifter alternating minimization.
//!
//! The hybrid precoder `S C F_BB` approximates a digital target `F_opt`,
//! with `S` binary, `C` the fixed phase bank, and `F_BB = alpha F_DD` for a
//! real gain and a semi-unitary `F_DD`. Replacing `||S C F_DD||^2` by its
//! upper bound `||S||^2` decouples the switches, so both blocks of the
//! alternation have closed-form global minimizers.

pub mod arch;
pub mod group;
pub mod procrustes;
pub mod solver;
pub mod switch;

pub use arch::{assemble_analog, build_phase_bank, AnalogArchitecture, PhaseBank, SwitchMatrix};
pub use group::{group_solve, GroupSolution};
pub use procrustes::{init_fdd, update_fdd, Regime};
pub use solver::{altmin, altmin_with_bank, AltMinRecord, AltMinState, StoppingRule};
pub use switch::{solve_alpha_switch_vector, solve_switch_and_alpha, AlphaCandidate, Branch, SwitchUpdate};
