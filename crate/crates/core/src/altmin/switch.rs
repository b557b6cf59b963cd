//! Joint closed-form update of the binary switch matrix and the real gain.
//!
//! Minimizes `||x - alpha s||^2` over `s in {0,1}^n`, `alpha in R` exactly.
//! For fixed `alpha` each switch is closed iff its entry is nearer to `alpha`
//! than to zero. Sorting `x` ascending splits the `alpha` axis into intervals
//! `[2 x_(i), 2 x_(i+1)]` on which the objective is a parabola; only parabola
//! vertices (prefix means for `alpha < 0`, suffix means for `alpha > 0`) that
//! fall inside their own interval can be optimal.

use serde::Serialize;

use crate::altmin::arch::SwitchMatrix;
use crate::error::{Error, Result};
use crate::scalar::{RMat, Real};

/// Which end of the sorted entries a candidate selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `alpha < 0`: the `i` smallest entries are switched on.
    Prefix,
    /// `alpha > 0`: every entry after the `i` smallest is switched on.
    Suffix,
}

/// A parabola vertex that survived the sign-and-interval test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaCandidate<T> {
    pub value: T,
    /// Number of sorted entries below the interval (`i` in `[2 x_(i), 2 x_(i+1)]`).
    pub index: usize,
    pub branch: Branch,
    /// Objective at the vertex, `sum x^2 - |selected| * mean^2`.
    pub objective: T,
}

#[derive(Debug, Clone)]
pub struct SwitchSolution<T> {
    pub alpha: T,
    /// Switch states in the input order.
    pub s: Vec<bool>,
    /// `||x - alpha s||^2` for the returned pair.
    pub objective: T,
    pub candidates: Vec<AlphaCandidate<T>>,
    /// True when no vertex survived and interval endpoints were used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct SwitchUpdate<T> {
    pub alpha: T,
    pub s: SwitchMatrix,
    pub objective: T,
    pub candidates: Vec<AlphaCandidate<T>>,
    pub fallback: bool,
}

/// Switch states from the threshold rule for a given gain.
pub fn switches_for_alpha<T: Real>(x: &[T], alpha: T) -> Vec<bool> {
    let half = alpha / (T::one() + T::one());
    if alpha > T::zero() {
        x.iter().map(|&v| v > half).collect()
    } else if alpha < T::zero() {
        x.iter().map(|&v| v < half).collect()
    } else {
        vec![false; x.len()]
    }
}

/// `||x - alpha s||^2`.
pub fn residual<T: Real>(x: &[T], alpha: T, s: &[bool]) -> T {
    x.iter()
        .zip(s)
        .fold(T::zero(), |acc, (&v, &on)| {
            let d = if on { v - alpha } else { v };
            acc + d * d
        })
}

/// Globally optimal `(alpha, s)` for a real vector.
pub fn solve_alpha_switch_vector<T: Real>(x: &[T]) -> Result<SwitchSolution<T>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("switch subproblem input contains non-finite entries".into()));
    }
    if x.iter().all(|v| *v == T::zero()) {
        return Err(Error::DegenerateTarget);
    }
    let n = x.len();
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

    let two = T::one() + T::one();
    let energy = sorted.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let scale = sorted[0].abs().max(sorted[n - 1].abs());
    let slack = T::default_epsilon() * T::lit(8.0) * scale;
    let total = sorted.iter().fold(T::zero(), |acc, &v| acc + v);

    // Interval i is [2 x_(i), 2 x_(i+1)] (1-based), unbounded at i = 0 and i = n.
    let in_interval = |value: T, i: usize| -> bool {
        let lower_ok = i == 0 || value >= two * sorted[i - 1] - slack;
        let upper_ok = i == n || value <= two * sorted[i] + slack;
        lower_ok && upper_ok
    };

    let mut candidates = Vec::new();
    let mut prefix = T::zero();
    for i in 0..=n {
        if i > 0 {
            prefix += sorted[i - 1];
            let count = T::from_usize(i).unwrap();
            let mean = prefix / count;
            if mean < T::zero() && in_interval(mean, i) {
                candidates.push(AlphaCandidate { value: mean, index: i, branch: Branch::Prefix, objective: energy - count * mean * mean });
            }
        }
        if i < n {
            let count = T::from_usize(n - i).unwrap();
            let mean = (total - prefix) / count;
            if mean > T::zero() && in_interval(mean, i) {
                candidates.push(AlphaCandidate { value: mean, index: i, branch: Branch::Suffix, objective: energy - count * mean * mean });
            }
        }
    }

    let (alpha, fallback) = match candidates
        .iter()
        .min_by(|a, b| a.objective.partial_cmp(&b.objective).expect("finite"))
    {
        Some(best) => (best.value, false),
        None => {
            let ends = [two * sorted[0], two * sorted[n - 1]];
            let best = ends
                .into_iter()
                .filter(|a| *a != T::zero())
                .map(|a| (a, residual(x, a, &switches_for_alpha(x, a))))
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
                .map(|(a, _)| a)
                .ok_or(Error::DegenerateTarget)?;
            (best, true)
        }
    };

    let s = switches_for_alpha(x, alpha);
    let objective = residual(x, alpha, &s);
    Ok(SwitchSolution { alpha, s, objective, candidates, fallback })
}

/// Solves the switch/gain block for the matrix `X = Re(F_opt F_DD^H C^H)`,
/// vectorized column-major.
pub fn solve_switch_and_alpha<T: Real>(x_mat: &RMat<T>) -> Result<SwitchUpdate<T>> {
    let sol = solve_alpha_switch_vector(x_mat.as_slice())?;
    Ok(SwitchUpdate {
        alpha: sol.alpha,
        s: SwitchMatrix::from_column_major(x_mat.nrows(), x_mat.ncols(), sol.s),
        objective: sol.objective,
        candidates: sol.candidates,
        fallback: sol.fallback,
    })
}
