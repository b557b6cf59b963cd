//! Analog network description: fixed phase bank, switch matrix, and `F_RF = S C`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{phasor, real, CMat, CVec, Real};

/// FPS hardware: `n_ps` fixed phases shared by all RF chains, and the number
/// of RF-chain/antenna groups (`1` = fully connected).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogArchitecture {
    pub n_ps: usize,
    /// Fixed phases in radians, one per phase shifter.
    pub phases: Vec<f64>,
    pub n_groups: usize,
}

impl AnalogArchitecture {
    /// `n_ps` phases uniformly spaced on `[0, 2 pi)`.
    pub fn uniform(n_ps: usize, n_groups: usize) -> Self {
        let phases = (0..n_ps)
            .map(|i| std::f64::consts::TAU * i as f64 / n_ps as f64)
            .collect();
        AnalogArchitecture { n_ps, phases, n_groups }
    }

    pub fn fully_connected(n_ps: usize) -> Self {
        Self::uniform(n_ps, 1)
    }

    /// Checks the grouping against the antenna and RF-chain counts it maps.
    pub fn validate(&self, n_antennas: usize, n_rf: usize) -> Result<()> {
        if self.n_ps == 0 || self.phases.len() != self.n_ps {
            return Err(Error::config("arch.n_ps", format!("need n_ps >= 1 phases, got n_ps = {} with {} phases", self.n_ps, self.phases.len())));
        }
        if self.n_groups == 0 || self.n_groups > n_rf {
            return Err(Error::config("arch.n_groups", format!("must lie in 1..={n_rf}, got {}", self.n_groups)));
        }
        if n_antennas % self.n_groups != 0 || n_rf % self.n_groups != 0 {
            return Err(Error::config(
                "arch.n_groups",
                format!("{} groups must divide both {n_antennas} antennas and {n_rf} RF chains", self.n_groups),
            ));
        }
        Ok(())
    }
}

/// Block-diagonal phase matrix `C = blkdiag(c, .., c)` (`n_ps m x m`) with
/// `c = [e^{j theta_1}, .., e^{j theta_Nc}]^T / sqrt(Nc)`.
#[derive(Debug, Clone)]
pub struct PhaseBank<T: Real> {
    pub c: CVec<T>,
    pub n_rf: usize,
}

impl<T: Real> PhaseBank<T> {
    pub fn n_ps(&self) -> usize {
        self.c.len()
    }

    /// Dense `C`.
    pub fn matrix(&self) -> CMat<T> {
        let nc = self.n_ps();
        let mut m = CMat::zeros(nc * self.n_rf, self.n_rf);
        for rf in 0..self.n_rf {
            m.view_mut((rf * nc, rf), (nc, 1)).copy_from(&self.c);
        }
        m
    }
}

pub fn build_phase_bank<T: Real>(arch: &AnalogArchitecture, n_rf: usize) -> PhaseBank<T> {
    assert!(arch.n_ps >= 1 && n_rf >= 1, "phase bank needs at least one shifter and one RF chain");
    let norm = T::one() / T::from_usize(arch.n_ps).unwrap().sqrt();
    let c = DVector::from_iterator(arch.n_ps, arch.phases.iter().map(|&th| phasor(T::lit(th)) * norm));
    PhaseBank { c, n_rf }
}

/// Binary switch matrix, stored column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl SwitchMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SwitchMatrix { rows, cols, bits: vec![false; rows * cols] }
    }

    /// Builds from a column-major bit vector.
    pub fn from_column_major(rows: usize, cols: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), rows * cols);
        SwitchMatrix { rows, cols, bits }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                bits.push(f(r, c));
            }
        }
        SwitchMatrix { rows, cols, bits }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[c * self.rows + r]
    }

    pub fn set(&mut self, r: usize, c: usize, on: bool) {
        self.bits[c * self.rows + r] = on;
    }

    pub fn column_major(&self) -> &[bool] {
        &self.bits
    }

    /// Number of closed switches, equal to `||S||_F^2`.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_real<T: Real>(&self) -> CMat<T> {
        CMat::from_fn(self.rows, self.cols, |r, c| if self.get(r, c) { real(T::one()) } else { real(T::zero()) })
    }

    /// Places `blocks` along the diagonal.
    pub fn block_diagonal(blocks: &[SwitchMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = SwitchMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for c in 0..b.cols {
                for r in 0..b.rows {
                    out.set(r0 + r, c0 + c, b.get(r, c));
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Row-major bits packed MSB-first into bytes.
    pub fn packed_row_major(&self) -> Vec<u8> {
        let mut out = vec![0u8; (self.rows * self.cols).div_ceil(8)];
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    let i = r * self.cols + c;
                    out[i / 8] |= 0x80 >> (i % 8);
                }
            }
        }
        out
    }

    pub fn from_packed_row_major(rows: usize, cols: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != (rows * cols).div_ceil(8) {
            return Err(Error::Format(format!("{} packed bytes do not fit a {rows}x{cols} switch matrix", bytes.len())));
        }
        Ok(Self::from_fn(rows, cols, |r, c| {
            let i = r * cols + c;
            bytes[i / 8] & (0x80 >> (i % 8)) != 0
        }))
    }

    /// One text line per row of `0`/`1` characters.
    pub fn to_grid_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }
}

/// `F_RF = S C` computed without forming `C`: column `rf` only sees the
/// `rf`-th block of `n_ps` switch columns.
pub fn assemble_analog<T: Real>(s: &SwitchMatrix, bank: &PhaseBank<T>) -> CMat<T> {
    let nc = bank.n_ps();
    assert_eq!(s.cols, nc * bank.n_rf, "switch columns must equal n_ps * n_rf");
    let mut f = CMat::zeros(s.rows, bank.n_rf);
    for rf in 0..bank.n_rf {
        for (i, ci) in bank.c.iter().enumerate() {
            let col = rf * nc + i;
            for r in 0..s.rows {
                if s.get(r, col) {
                    f[(r, rf)] += *ci;
                }
            }
        }
    }
    f
}
