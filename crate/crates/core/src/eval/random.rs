//! Baseline with a random switch matrix and an optimized digital part.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::altmin::{
    assemble_analog, build_phase_bank, init_fdd, update_fdd, AltMinState, AnalogArchitecture, GroupSolution, PhaseBank,
    Regime, StoppingRule, SwitchMatrix,
};
use crate::error::{Error, Result};
use crate::linalg::{fro2, re_trace_product, scale};
use crate::scalar::{CMat, Real};

#[derive(Debug, Clone)]
pub struct RandomSwitchOutcome<T: Real> {
    pub solution: GroupSolution<T>,
    /// All-zero switch draws that were thrown away.
    pub resamples: usize,
}

/// Draws i.i.d. Bernoulli(1/2) switches, redrawing an all-zero sample.
pub fn sample_switches(rows: usize, cols: usize, rng: &mut ChaCha8Rng, resamples: &mut usize) -> SwitchMatrix {
    loop {
        let s = SwitchMatrix::from_fn(rows, cols, |_, _| rng.random::<bool>());
        if s.count_ones() > 0 {
            return s;
        }
        *resamples += 1;
    }
}

/// With `S` fixed, alternates the scalar least-squares gain
/// `alpha = Re tr(F_DD F_opt^H S C) / ||S||^2` and the Procrustes update.
pub fn fixed_switch_altmin<T: Real>(
    f_opt: &CMat<T>,
    s: SwitchMatrix,
    bank: &PhaseBank<T>,
    stop: &StoppingRule,
) -> Result<AltMinState<T>> {
    let m = bank.n_rf;
    let regime = Regime::for_dims(m, f_opt.ncols());
    let mut f_dd = init_fdd(f_opt, regime, m)?;
    let p = f_opt.adjoint() * assemble_analog(&s, bank);
    let ones = T::from_usize(s.count_ones()).unwrap();
    if ones == T::zero() {
        return Err(Error::DegenerateTarget);
    }
    let two = T::one() + T::one();
    let rel_tol = T::lit(stop.rel_tol);
    let mut trace: Vec<T> = Vec::new();
    let mut alpha = T::zero();
    let mut converged = false;
    for _ in 0..stop.max_iter.max(1) {
        alpha = re_trace_product(&f_dd, &p) / ones;
        if alpha == T::zero() {
            // Keep the current F_DD; no direction to rotate toward.
            trace.push(T::zero());
            converged = true;
            break;
        }
        let m_mat = scale(&p, alpha);
        f_dd = update_fdd(&m_mat, regime);
        let g = alpha * alpha * ones - two * re_trace_product(&f_dd, &m_mat);
        let done = trace.last().map(|&prev| (prev - g).abs() <= rel_tol * prev.abs()).unwrap_or(false);
        trace.push(g);
        if done {
            converged = true;
            break;
        }
    }
    let sc = assemble_analog(&s, bank);
    let slack = ones - fro2(&(&sc * &f_dd));
    Ok(AltMinState {
        f_dd,
        alpha,
        s,
        regime,
        iterations: trace.len(),
        bound_slack: vec![slack; trace.len()],
        objective_trace: trace,
        candidate_counts: Vec::new(),
        converged,
        fallbacks: 0,
    })
}

/// Random-switch precoder respecting the group pattern of `arch`.
pub fn random_switch_precoder<T: Real>(
    f_opt: &CMat<T>,
    arch: &AnalogArchitecture,
    n_rf: usize,
    stop: &StoppingRule,
    seed: u64,
) -> Result<RandomSwitchOutcome<T>> {
    arch.validate(f_opt.nrows(), n_rf)?;
    let eta = arch.n_groups;
    let rows = f_opt.nrows() / eta;
    let m = n_rf / eta;
    let bank: PhaseBank<T> = build_phase_bank(arch, m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Channel generation draws stream 0 of the same seed.
    rng.set_stream(1);
    let mut resamples = 0;
    let draws: Vec<SwitchMatrix> = (0..eta).map(|_| sample_switches(rows, arch.n_ps * m, &mut rng, &mut resamples)).collect();
    let groups = draws
        .into_iter()
        .enumerate()
        .map(|(i, s)| fixed_switch_altmin(&f_opt.rows(i * rows, rows).into_owned(), s, &bank, stop))
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomSwitchOutcome { solution: GroupSolution::assemble(groups), resamples })
}
