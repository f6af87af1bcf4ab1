//! Detection of crashes and rebounds in equity indices.
//!
//! The pipeline calibrates the log-periodic power law (LPPL) on a grid of
//! sliding windows, classifies the resulting parameter sets with a
//! Gelfand-style pattern recognition scheme, turns them into daily crash and
//! rebound alarm indices, and validates the alarms with error diagrams and
//! rule-based trading backtests.
//!
//! Modules follow the stages of the pipeline:
//!
//! * [`market_data`] — CSV ingestion of prices and risk-free rates.
//! * [`windows`] — the `(t1, t2)` analysis window grid.
//! * [`lppl`] — LPPL evaluation, calibration and bubble qualification.
//! * [`events`] — labeling of historical crash and rebound days.
//! * [`patrec`] — classes, informative parameters, questionnaires, traits,
//!   features and the alarm index.
//! * [`eval`] — error diagrams (missed events vs alarm-time fraction).
//! * [`backtest`] — alarm-driven trading strategies and performance metrics.
//! * [`synthetic`] — seeded generators for planted-signal test data.

pub mod backtest;
pub mod calendar;
pub mod eval;
pub mod events;
pub mod lppl;
pub mod market_data;
pub mod patrec;
pub mod synthetic;
pub mod windows;

pub use calendar::{day_number, date_from_day_number, DailySeries, DateRange};
pub use events::EventLabels;
pub use lppl::{BubbleType, FitConfig, FitResult, LpplParams};
pub use market_data::{PriceSeries, RateSeries};
pub use patrec::{AlarmMode, AlarmSeries, EventType, FeatureSet, PatrecConfig};
pub use windows::{Window, WindowGrid};
