//! Analytic round-throughput model.
//!
//! A round costs the fixed pulse, readout and classical latency plus a
//! register re-initialisation that grows linearly with the register size:
//! `R = 1 / (t_MW + t_RF + t_meas + t_class + τ_reset·r)`, and a node with
//! `E` electrons completes `R_node = E·R` rounds per second.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("slot time must be positive")]
    ZeroSlot,
    #[error("{0} must be finite and non-negative")]
    NegativeTime(&'static str),
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("sweep grids must not be empty")]
    EmptyGrid,
}

/// Times in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingParams {
    pub t_mw: f64,
    pub t_rf: f64,
    pub t_meas: f64,
    pub t_class: f64,
    /// Re-initialisation time per register qubit.
    pub tau_reset: f64,
    pub r: u32,
    pub electrons: u32,
}

impl TimingParams {
    /// All fixed costs lumped into `t_MW`.
    pub fn with_fixed(fixed: f64, tau_reset: f64, r: u32, electrons: u32) -> Self {
        TimingParams {
            t_mw: fixed,
            t_rf: 0.0,
            t_meas: 0.0,
            t_class: 0.0,
            tau_reset,
            r,
            electrons,
        }
    }

    pub fn fixed(&self) -> f64 {
        self.t_mw + self.t_rf + self.t_meas + self.t_class
    }

    /// `τ_reset · r`.
    pub fn t_reinit(&self) -> f64 {
        self.tau_reset * f64::from(self.r)
    }

    pub fn slot_time(&self) -> f64 {
        self.fixed() + self.t_reinit()
    }

    fn check(&self) -> Result<(), PerfError> {
        for (name, v) in [
            ("t_MW", self.t_mw),
            ("t_RF", self.t_rf),
            ("t_meas", self.t_meas),
            ("t_class", self.t_class),
            ("tau_reset", self.tau_reset),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(PerfError::NegativeTime(name));
            }
        }
        if self.r == 0 {
            return Err(PerfError::ZeroCount("r"));
        }
        if self.electrons == 0 {
            return Err(PerfError::ZeroCount("E"));
        }
        if self.slot_time() <= 0.0 {
            return Err(PerfError::ZeroSlot);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThroughputPoint {
    pub tau_reset: f64,
    pub r: u32,
    /// Rounds per second per electron.
    pub rate: f64,
    /// Rounds per second per node.
    pub node_rate: f64,
}

/// Rounds per second for one electron.
pub fn round_throughput(p: &TimingParams) -> Result<f64, PerfError> {
    p.check()?;
    Ok(1.0 / p.slot_time())
}

pub fn node_throughput(p: &TimingParams) -> Result<f64, PerfError> {
    Ok(f64::from(p.electrons) * round_throughput(p)?)
}

/// Every `(τ_reset, r)` combination, sorted by `τ_reset` then `r`.
pub fn sweep(
    template: &TimingParams,
    taus: &[f64],
    rs: &[u32],
) -> Result<Vec<ThroughputPoint>, PerfError> {
    if taus.is_empty() || rs.is_empty() {
        return Err(PerfError::EmptyGrid);
    }
    let mut taus = taus.to_vec();
    taus.sort_by(f64::total_cmp);
    let mut rs = rs.to_vec();
    rs.sort_unstable();
    let mut out = Vec::with_capacity(taus.len() * rs.len());
    for &tau_reset in &taus {
        for &r in &rs {
            let p = TimingParams {
                tau_reset,
                r,
                ..*template
            };
            let rate = round_throughput(&p)?;
            out.push(ThroughputPoint {
                tau_reset,
                r,
                rate,
                node_rate: f64::from(p.electrons) * rate,
            });
        }
    }
    Ok(out)
}

/// Smallest register with `2^r ≥ p_ops`, never below one qubit.
pub fn min_register_size(p_ops: u64) -> u32 {
    if p_ops <= 2 {
        return 1;
    }
    64 - (p_ops - 1).leading_zeros()
}

/// Register sizes plotted against re-initialisation time.
pub const DEFAULT_R_GRID: [u32; 5] = [1, 2, 4, 8, 16];

/// Fixed per-round overhead used for the register-size sweep, in seconds.
pub const DEFAULT_FIXED: f64 = 10e-6;

/// `τ_reset` from 0 to 10 µs in 0.5 µs steps.
pub fn default_tau_grid() -> Vec<f64> {
    (0..=20).map(|i| f64::from(i) * 0.5e-6).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_sizes() {
        assert_eq!(min_register_size(1), 1);
        assert_eq!(min_register_size(2), 1);
        assert_eq!(min_register_size(3), 2);
        assert_eq!(min_register_size(6), 3);
        assert_eq!(min_register_size(16), 4);
        assert_eq!(min_register_size(17), 5);
    }

    #[test]
    fn rejects_empty_slot() {
        let p = TimingParams::with_fixed(0.0, 0.0, 1, 1);
        assert_eq!(round_throughput(&p), Err(PerfError::ZeroSlot));
    }
}
