//! Generation of the sliding analysis-window grid.
//!
//! Start times step forward from the earliest start `t10` and end times step
//! backward from the latest end `t20`; a window is kept when its width lies
//! within the configured bounds. All arithmetic is in calendar days.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("window start {t1} not before end {t2}")]
    StartNotBeforeEnd { t1: NaiveDate, t2: NaiveDate },
    #[error("invalid grid config: {0}")]
    BadConfig(String),
}

/// One analysis sub-window `[t1, t2]` in calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Window {
    pub t1: NaiveDate,
    pub t2: NaiveDate,
}

impl Window {
    pub fn new(t1: NaiveDate, t2: NaiveDate) -> Result<Self, WindowError> {
        if t1 >= t2 {
            return Err(WindowError::StartNotBeforeEnd { t1, t2 });
        }
        Ok(Self { t1, t2 })
    }

    /// Width `t2 - t1` in calendar days.
    pub fn width(&self) -> i64 {
        (self.t2 - self.t1).num_days()
    }
}

/// Grid-stepping rules. Defaults: 50-day forward start step, 50-day backward
/// end step, widths between 110 and 1500 calendar days.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowGrid {
    /// Forward step of window start times, calendar days (> 0).
    pub dt1: i64,
    /// Backward step of window end times, calendar days (< 0).
    pub dt2: i64,
    /// Minimum window width.
    pub dt_min: i64,
    /// Maximum window width.
    pub dt_max: i64,
}

impl Default for WindowGrid {
    fn default() -> Self {
        Self {
            dt1: 50,
            dt2: -50,
            dt_min: 110,
            dt_max: 1500,
        }
    }
}

impl WindowGrid {
    fn validate(&self) -> Result<(), WindowError> {
        if self.dt1 <= 0 {
            return Err(WindowError::BadConfig(format!("dt1 = {} must be > 0", self.dt1)));
        }
        if self.dt2 >= 0 {
            return Err(WindowError::BadConfig(format!("dt2 = {} must be < 0", self.dt2)));
        }
        if self.dt_min < 1 || self.dt_min > self.dt_max {
            return Err(WindowError::BadConfig(format!(
                "need 1 <= dt_min <= dt_max, got [{}, {}]",
                self.dt_min, self.dt_max
            )));
        }
        Ok(())
    }

    /// Enumerate the window grid over `[t10, t20]`, sorted by `(t2, t1)`.
    ///
    /// The result is exactly the set `{(t10 + k*dt1, t20 + j*dt2)}` over
    /// non-negative integers `k, j` whose width lies in
    /// `[dt_min, dt_max]`. A span shorter than `dt_min` yields an empty
    /// list; callers that cannot proceed on an empty grid must check.
    pub fn generate(&self, t10: NaiveDate, t20: NaiveDate) -> Result<Vec<Window>, WindowError> {
        self.validate()?;
        if t10 >= t20 {
            return Err(WindowError::StartNotBeforeEnd { t1: t10, t2: t20 });
        }
        let span = (t20 - t10).num_days();
        let step = -self.dt2; // backward step size, positive
        let mut windows = Vec::new();
        // Walk end times from the smallest admissible t2 upward so the
        // output comes out sorted by (t2, t1) without a final sort.
        let j_max = (span - self.dt_min) / step;
        for j in (0..=j_max).rev() {
            let t2 = t20 - Duration::days(j * step);
            let reach = (t2 - t10).num_days();
            if reach < self.dt_min {
                continue;
            }
            // dt_min <= reach - k*dt1 <= dt_max
            let k_min = if reach > self.dt_max {
                (reach - self.dt_max + self.dt1 - 1) / self.dt1
            } else {
                0
            };
            let k_max = (reach - self.dt_min) / self.dt1;
            for k in k_min..=k_max {
                let t1 = t10 + Duration::days(k * self.dt1);
                windows.push(Window { t1, t2 });
            }
        }
        Ok(windows)
    }

    /// Number of windows [`generate`](Self::generate) would return.
    pub fn count(&self, t10: NaiveDate, t20: NaiveDate) -> Result<usize, WindowError> {
        self.validate()?;
        if t10 >= t20 {
            return Err(WindowError::StartNotBeforeEnd { t1: t10, t2: t20 });
        }
        let span = (t20 - t10).num_days();
        let step = -self.dt2;
        let mut total = 0usize;
        let j_max = (span - self.dt_min) / step;
        for j in 0..=j_max.max(-1) {
            let reach = span - j * step;
            if reach < self.dt_min {
                break;
            }
            let k_min = if reach > self.dt_max {
                (reach - self.dt_max + self.dt1 - 1) / self.dt1
            } else {
                0
            };
            let k_max = (reach - self.dt_min) / self.dt1;
            if k_max >= k_min {
                total += (k_max - k_min + 1) as usize;
            }
        }
        Ok(total)
    }
}
