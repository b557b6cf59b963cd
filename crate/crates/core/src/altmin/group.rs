//! Group-connected mapping: the antennas and RF chains split into `eta`
//! groups, each solved as an independent fully-connected subproblem.

use rayon::prelude::*;

use crate::altmin::arch::{build_phase_bank, AnalogArchitecture, SwitchMatrix};
use crate::altmin::solver::{altmin_with_bank, AltMinState, StoppingRule};
use crate::error::Result;
use crate::scalar::{CMat, Real};

/// Per-group solutions and their block-diagonal assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSolution<T: Real> {
    pub groups: Vec<AltMinState<T>>,
    /// `blkdiag(S_1, .., S_eta)`.
    pub s: SwitchMatrix,
    /// Rows `i m .. (i+1) m` hold `alpha_i F_DD,i`.
    pub f_bb: CMat<T>,
}

impl<T: Real> GroupSolution<T> {
    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Sum of the final per-group surrogate objectives.
    pub fn surrogate_objective(&self) -> T {
        self.groups.iter().fold(T::zero(), |acc, g| acc + g.surrogate())
    }

    pub fn iterations(&self) -> usize {
        self.groups.iter().map(|g| g.iterations).max().unwrap_or(0)
    }

    pub fn candidate_counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().flat_map(|g| g.candidate_counts.iter().copied())
    }

    /// Assembles from independently solved groups.
    pub fn assemble(groups: Vec<AltMinState<T>>) -> Self {
        let s = SwitchMatrix::block_diagonal(&groups.iter().map(|g| g.s.clone()).collect::<Vec<_>>());
        let m = groups[0].f_dd.nrows();
        let cols = groups[0].f_dd.ncols();
        let mut f_bb = CMat::zeros(m * groups.len(), cols);
        for (i, g) in groups.iter().enumerate() {
            f_bb.rows_mut(i * m, m).copy_from(&g.f_bb());
        }
        GroupSolution { groups, s, f_bb }
    }
}

/// Solves the group-connected design: the target rows are cut into
/// `arch.n_groups` slices, each approximated with `n_rf / eta` RF chains.
pub fn group_solve<T: Real>(
    f_opt: &CMat<T>,
    arch: &AnalogArchitecture,
    n_rf: usize,
    stop: &StoppingRule,
) -> Result<GroupSolution<T>> {
    arch.validate(f_opt.nrows(), n_rf)?;
    let eta = arch.n_groups;
    let rows = f_opt.nrows() / eta;
    let bank = build_phase_bank::<T>(arch, n_rf / eta);
    let groups = (0..eta)
        .into_par_iter()
        .map(|i| altmin_with_bank(&f_opt.rows(i * rows, rows).into_owned(), &bank, stop))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupSolution::assemble(groups))
}
