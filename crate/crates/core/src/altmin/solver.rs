//! The alternating-minimization loop for one fully-connected (sub)problem.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::altmin::arch::{assemble_analog, build_phase_bank, AnalogArchitecture, PhaseBank, SwitchMatrix};
use crate::altmin::procrustes::{init_fdd, update_fdd, Regime};
use crate::altmin::switch::solve_switch_and_alpha;
use crate::error::{Error, Result};
use crate::linalg::{fro2, re_trace_product, scale};
use crate::scalar::{CMat, RMat, Real};

/// Stop when the relative surrogate decrease drops below `rel_tol`, or after
/// `max_iter` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule { rel_tol: 1e-4, max_iter: 100 }
    }
}

/// Final iterate of the alternating minimization plus its history.
#[derive(Debug, Clone, PartialEq)]
pub struct AltMinState<T: Real> {
    pub f_dd: CMat<T>,
    pub alpha: T,
    pub s: SwitchMatrix,
    pub regime: Regime,
    /// Surrogate `alpha^2 ||S||^2 - 2 alpha Re tr(F_DD F_opt^H S C)` after each iteration.
    pub objective_trace: Vec<T>,
    /// `||S||_F^2 - ||S C F_DD||_F^2` after each iteration (non-negative).
    pub bound_slack: Vec<T>,
    /// Number of retained gain candidates per switch update.
    pub candidate_counts: Vec<usize>,
    pub iterations: usize,
    /// False when the loop stopped on the iteration cap.
    pub converged: bool,
    /// Switch updates that had to fall back to interval endpoints.
    pub fallbacks: usize,
}

impl<T: Real> AltMinState<T> {
    /// `F_BB = alpha F_DD`.
    pub fn f_bb(&self) -> CMat<T> {
        scale(&self.f_dd, self.alpha)
    }

    pub fn surrogate(&self) -> T {
        *self.objective_trace.last().expect("at least one iteration")
    }

    /// `||F_opt - S C F_BB||_F^2`, the unrelaxed approximation error.
    pub fn approximation_error(&self, f_opt: &CMat<T>, bank: &PhaseBank<T>) -> T {
        let f_rf = assemble_analog(&self.s, bank);
        fro2(&(f_opt - f_rf * self.f_bb()))
    }

    pub fn to_record(&self) -> AltMinRecord {
        let (rows, cols) = self.s.shape();
        AltMinRecord {
            regime: self.regime,
            alpha: self.alpha.as_f64(),
            s_rows: rows,
            s_cols: cols,
            s_packed: self.s.packed_row_major(),
            f_dd_rows: self.f_dd.nrows(),
            f_dd_cols: self.f_dd.ncols(),
            f_dd: self.f_dd.transpose().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
            objective_trace: self.objective_trace.iter().map(|v| v.as_f64()).collect(),
            bound_slack: self.bound_slack.iter().map(|v| v.as_f64()).collect(),
            candidate_counts: self.candidate_counts.clone(),
            iterations: self.iterations,
            converged: self.converged,
            fallbacks: self.fallbacks,
        }
    }

    pub fn from_record(rec: &AltMinRecord) -> Result<Self> {
        if rec.f_dd.len() != rec.f_dd_rows * rec.f_dd_cols {
            return Err(Error::Format("F_DD payload does not match its dimensions".into()));
        }
        let f_dd = CMat::from_fn(rec.f_dd_rows, rec.f_dd_cols, |r, c| {
            let [re, im] = rec.f_dd[r * rec.f_dd_cols + c];
            Complex::new(T::lit(re), T::lit(im))
        });
        Ok(AltMinState {
            f_dd,
            alpha: T::lit(rec.alpha),
            s: SwitchMatrix::from_packed_row_major(rec.s_rows, rec.s_cols, &rec.s_packed)?,
            regime: rec.regime,
            objective_trace: rec.objective_trace.iter().map(|&v| T::lit(v)).collect(),
            bound_slack: rec.bound_slack.iter().map(|&v| T::lit(v)).collect(),
            candidate_counts: rec.candidate_counts.clone(),
            iterations: rec.iterations,
            converged: rec.converged,
            fallbacks: rec.fallbacks,
        })
    }
}

/// JSON form of [`AltMinState`]: `S` as row-major packed bits, `F_DD` as
/// row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltMinRecord {
    pub regime: Regime,
    pub alpha: f64,
    pub s_rows: usize,
    pub s_cols: usize,
    pub s_packed: Vec<u8>,
    pub f_dd_rows: usize,
    pub f_dd_cols: usize,
    pub f_dd: Vec<[f64; 2]>,
    pub objective_trace: Vec<f64>,
    pub bound_slack: Vec<f64>,
    pub candidate_counts: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub fallbacks: usize,
}

/// `X = Re(F_opt F_DD^H C^H)` laid out like `S` (`n_antennas x n_ps m`).
pub(crate) fn switch_target<T: Real>(f_opt: &CMat<T>, f_dd: &CMat<T>, bank: &PhaseBank<T>) -> RMat<T> {
    let y = f_opt * f_dd.adjoint();
    let nc = bank.n_ps();
    RMat::from_fn(y.nrows(), nc * bank.n_rf, |r, col| {
        let (rf, i) = (col / nc, col % nc);
        (y[(r, rf)] * bank.c[i].conj()).re
    })
}

/// Runs the alternating minimization for a target with `bank.n_rf` RF chains.
pub fn altmin_with_bank<T: Real>(f_opt: &CMat<T>, bank: &PhaseBank<T>, stop: &StoppingRule) -> Result<AltMinState<T>> {
    if stop.max_iter == 0 {
        return Err(Error::config("stopping.max_iter", "must be at least 1"));
    }
    let m = bank.n_rf;
    let regime = Regime::for_dims(m, f_opt.ncols());
    let mut f_dd = init_fdd(f_opt, regime, m)?;
    let f_opt_h = f_opt.adjoint();
    let rel_tol = T::lit(stop.rel_tol);

    let mut trace = Vec::new();
    let mut slack = Vec::new();
    let mut counts = Vec::new();
    let mut fallbacks = 0;
    let mut converged = false;
    let mut last = None;

    for _ in 0..stop.max_iter {
        let up = solve_switch_and_alpha(&switch_target(f_opt, &f_dd, bank))?;
        counts.push(up.candidates.len());
        fallbacks += usize::from(up.fallback);

        let sc = assemble_analog(&up.s, bank);
        let m_mat = scale(&(&f_opt_h * &sc), up.alpha);
        f_dd = update_fdd(&m_mat, regime);

        let ones = T::from_usize(up.s.count_ones()).unwrap();
        let two = T::one() + T::one();
        let g = up.alpha * up.alpha * ones - two * re_trace_product(&f_dd, &m_mat);
        slack.push(ones - fro2(&(&sc * &f_dd)));

        let done = trace
            .last()
            .map(|&prev: &T| (prev - g).abs() <= rel_tol * prev.abs())
            .unwrap_or(false);
        trace.push(g);
        last = Some((up.alpha, up.s));
        if done {
            converged = true;
            break;
        }
    }

    let (alpha, s) = last.expect("max_iter >= 1");
    Ok(AltMinState {
        f_dd,
        alpha,
        s,
        regime,
        iterations: trace.len(),
        objective_trace: trace,
        bound_slack: slack,
        candidate_counts: counts,
        converged,
        fallbacks,
    })
}

/// Fully-connected alternating minimization for `n_rf` RF chains.
pub fn altmin<T: Real>(
    f_opt: &CMat<T>,
    arch: &AnalogArchitecture,
    n_rf: usize,
    stop: &StoppingRule,
) -> Result<AltMinState<T>> {
    if arch.n_groups != 1 {
        return Err(Error::config("arch.n_groups", "altmin handles the fully-connected mapping; use group_solve"));
    }
    arch.validate(f_opt.nrows(), n_rf)?;
    altmin_with_bank(f_opt, &build_phase_bank(arch, n_rf), stop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_error;
    use crate::scalar::cx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian(r: usize, c: usize, rng: &mut ChaCha8Rng) -> CMat<f64> {
        CMat::from_fn(r, c, |_, _| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn trace_is_monotone_and_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (cols, m) in [(3, 4), (12, 4)] {
            let f = gaussian(16, cols, &mut rng);
            let st = altmin(&f, &AnalogArchitecture::uniform(6, 1), m, &StoppingRule::default()).unwrap();
            for w in st.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", st.objective_trace);
            }
            assert!(st.bound_slack.iter().all(|&s| s >= -1e-9));
            let err = match st.regime {
                Regime::Tall => orthonormality_error(&st.f_dd, true),
                Regime::Fat => orthonormality_error(&st.f_dd, false),
            };
            assert!(err < 1e-9);
            assert!(st.iterations <= 100);
        }
    }

    #[test]
    fn synthesized_target_improves() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let arch = AnalogArchitecture::uniform(4, 1);
        let bank: PhaseBank<f64> = build_phase_bank(&arch, 3);
        let s0 = SwitchMatrix::from_fn(12, 12, |_, _| rng.random::<bool>());
        let f0 = crate::linalg::svd(&gaussian(3, 5, &mut rng)).u * crate::linalg::svd(&gaussian(3, 5, &mut rng)).v.adjoint();
        let f_opt = scale(&(assemble_analog(&s0, &bank) * &f0), 1.7);
        let st = altmin_with_bank(&f_opt, &bank, &StoppingRule::default()).unwrap();
        assert!(st.surrogate() <= st.objective_trace[0]);
        let rel = st.approximation_error(&f_opt, &bank).sqrt() / fro2(&f_opt).sqrt();
        assert!(rel.is_finite() && rel < 1.0, "relative error {rel}");
    }

    #[test]
    fn record_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = gaussian(8, 2, &mut rng);
        let st = altmin(&f, &AnalogArchitecture::uniform(3, 1), 2, &StoppingRule::default()).unwrap();
        let json = serde_json::to_string(&st.to_record()).unwrap();
        let rec: AltMinRecord = serde_json::from_str(&json).unwrap();
        let back = AltMinState::<f64>::from_record(&rec).unwrap();
        assert_eq!(back, st);
    }

    #[test]
    fn rejects_grouped_arch_and_zero_iterations() {
        let f = CMat::<f64>::identity(4, 1);
        assert!(altmin(&f, &AnalogArchitecture::uniform(2, 2), 2, &StoppingRule::default()).is_err());
        let stop = StoppingRule { rel_tol: 1e-4, max_iter: 0 };
        assert!(altmin(&f, &AnalogArchitecture::uniform(2, 1), 2, &stop).is_err());
    }

    #[test]
    fn zero_target_is_degenerate() {
        let f = CMat::<f64>::zeros(4, 2);
        let r = altmin(&f, &AnalogArchitecture::uniform(2, 1), 2, &StoppingRule::default());
        assert!(matches!(r, Err(Error::DegenerateTarget)));
    }

    #[test]
    fn f32_solver_runs() {
        let f = CMat::<f32>::from_fn(6, 2, |r, c| cx((r + 2 * c) as f32 * 0.1 - 0.3, (r * c) as f32 * 0.05));
        let st = altmin(&f, &AnalogArchitecture::uniform(4, 1), 2, &StoppingRule::default()).unwrap();
        assert!(st.surrogate().is_finite());
    }
}
