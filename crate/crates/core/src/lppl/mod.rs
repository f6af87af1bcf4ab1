//! Log-periodic power law model: evaluation, calibration, qualification.
//!
//! The model for the expected log-price is
//!
//! ```text
//! ln E[p(t)] = A + B (tc - t)^m + C (tc - t)^m cos(omega ln(tc - t) - phi)
//! ```
//!
//! with critical time `tc` beyond the observed data. The four linear
//! parameters `(A, B, C1, C2)` are slaved to the nonlinear triple
//! `(tc, m, omega)` by ordinary least squares; the calibration searches only
//! the nonlinear triple (multi-start simplex descent, see [`fit`]).

mod fit;
mod optimize;
mod slave;
mod store;

pub use fit::fit_window;
pub use optimize::NelderMead;
pub use slave::{slave_linear, SlavedFit};
pub use store::{read_fit_store, write_fit_store, FitRecord, FitStoreWriter};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::windows::Window;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("window has {got} observations, need at least {need}")]
    TooFewObservations { got: usize, need: usize },
    #[error("critical time {tc} does not exceed the last observation time {t_last}")]
    CriticalTimeInsideWindow { tc: f64, t_last: f64 },
    #[error("model evaluated at t = {t} >= critical time tc = {tc}")]
    TimeBeyondCritical { t: f64, tc: f64 },
    #[error("design matrix is rank deficient")]
    DegenerateDesign,
    #[error("fit store: {0}")]
    Store(String),
}

/// Qualification of a parameter set under the hazard-rate sign constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BubbleType {
    /// Super-exponential rise: `b >= 0` and `B < 0`.
    Bubble,
    /// Super-exponential decline: `b <= 0` and `B > 0`.
    NegativeBubble,
    /// Neither constraint satisfied.
    Neither,
}

/// One LPPL parameter set. `tc` lives on the absolute calendar-day axis
/// (see [`crate::calendar::day_number`]) so it can be compared with event
/// dates; `phi` is normalized to `[0, 2*pi)` and `c >= 0` by convention,
/// the oscillation sign being absorbed into the phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpplParams {
    /// Critical time, fractional calendar-day number.
    pub tc: f64,
    /// Power-law exponent, `0 < m < 1`.
    pub m: f64,
    /// Angular log-frequency.
    pub omega: f64,
    /// Phase in `[0, 2*pi)`.
    pub phi: f64,
    /// Log-price level.
    pub a: f64,
    /// Power-law amplitude (negative for bubbles).
    pub b: f64,
    /// Oscillation amplitude, non-negative.
    pub c: f64,
}

impl LpplParams {
    /// Model value (expected ln-price) at calendar time `t < tc`.
    pub fn value(&self, t: f64) -> Result<f64, FitError> {
        if t >= self.tc {
            return Err(FitError::TimeBeyondCritical { t, tc: self.tc });
        }
        Ok(self.value_unchecked(t))
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        let dt = self.tc - t;
        let ldt = dt.ln();
        let f = (self.m * ldt).exp();
        self.a + self.b * f + self.c * f * (self.omega * ldt - self.phi).cos()
    }

    /// Damping `b = -B m - |C| sqrt(m^2 + omega^2)` from the requirement
    /// that the hazard rate stay non-negative.
    pub fn damping(&self) -> f64 {
        -self.b * self.m - self.c.abs() * (self.m * self.m + self.omega * self.omega).sqrt()
    }

    /// Bubble / negative-bubble qualification from the signs of the damping
    /// and the power-law amplitude.
    pub fn bubble_type(&self) -> BubbleType {
        let b = self.damping();
        if b >= 0.0 && self.b < 0.0 {
            BubbleType::Bubble
        } else if b <= 0.0 && self.b > 0.0 {
            BubbleType::NegativeBubble
        } else {
            BubbleType::Neither
        }
    }

    /// RMS residual of the model against `(t, ln price)` data.
    pub fn rms_residual(&self, data: &[(f64, f64)]) -> f64 {
        let sse: f64 = data
            .iter()
            .map(|&(t, y)| {
                let r = y - self.value_unchecked(t);
                r * r
            })
            .sum();
        (sse / data.len() as f64).sqrt()
    }
}

/// One calibration result for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub window: Window,
    pub params: LpplParams,
    /// Root-mean-square residual of ln-price.
    pub q: f64,
    /// Damping value, cached from [`LpplParams::damping`].
    pub damping: f64,
    pub bubble_type: BubbleType,
}

/// Calibration knobs. Defaults follow the documented search heuristic:
/// an 8 x 6 x 6 coarse grid over `(tc, m, omega)`, each node refined by a
/// simplex descent in scaled coordinates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitConfig {
    /// Minimum trading-day observations required in a window.
    pub min_observations: usize,
    /// Bounds on the power-law exponent.
    pub m_bounds: (f64, f64),
    /// Bounds on the angular log-frequency.
    pub omega_bounds: (f64, f64),
    /// `tc` is searched in `(t2, t2 + tc_extension * width]`.
    pub tc_extension: f64,
    /// Coarse-grid nodes along `tc`.
    pub tc_grid: usize,
    /// Coarse-grid nodes along `m`.
    pub m_grid: usize,
    /// Coarse-grid nodes along `omega`.
    pub omega_grid: usize,
    /// Simplex iteration cap per start point.
    pub max_iterations: usize,
    /// Simplex diameter stop threshold in scaled coordinates.
    pub tolerance: f64,
    /// Best parameter sets kept per window after basin deduplication.
    pub keep: usize,
    /// Start-point jitter as a fraction of a grid cell (0 disables).
    pub start_jitter: f64,
    /// Seed for the start-point jitter.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            min_observations: 30,
            m_bounds: (0.01, 0.99),
            omega_bounds: (2.0, 25.0),
            tc_extension: 0.5,
            tc_grid: 8,
            m_grid: 6,
            omega_grid: 6,
            max_iterations: 500,
            tolerance: 1e-4,
            keep: 10,
            start_jitter: 0.0,
            seed: 0,
        }
    }
}
