//! Alarm-driven trading strategies and performance accounting.
//!
//! Daily exposure comes from moving averages of the two alarm indices; the
//! rest of the wealth sits in the risk-free rate. Exposures live on the
//! calendar-day alarm grid and are applied to the market return realized on
//! the next trading day; cash accrues the annualized rate divided by 252 on
//! each trading-day step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{DailySeries, DateRange};
use crate::market_data::{DataError, PriceSeries, RateSeries};

/// Trading days per year used for annualization and the daily cash rate.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("moving-average look-back {n} invalid for series of length {len}")]
    BadLookback { n: usize, len: usize },
    #[error("series are not aligned: {0}")]
    Misaligned(String),
    #[error("need at least {need} trading-day steps, got {got}")]
    TooShort { need: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Strategy family: sign and source of the daily exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `theta = AI_R`: long only, sized by the rebound alarm.
    Long,
    /// `theta = -AI_C`: short only, sized by the crash alarm.
    Short,
    /// `theta = AI_R - AI_C`: net of the two alarms.
    LongShort,
}

/// Daily signed market weight in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureSeries {
    pub strategy: Strategy,
    /// Moving-average look-back that produced the inputs, in days.
    pub lookback: usize,
    pub series: DailySeries,
}

/// Wealth path starting at 1.0 on the first day of the exposure range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthTrajectory {
    pub wealth: DailySeries,
    /// `returns[i]` moves wealth from day `i-1` to day `i`; `returns[0] = 0`.
    pub returns: Vec<f64>,
    /// True where the step lands on a trading day (a market return was
    /// realized and cash accrued).
    pub market_steps: Vec<bool>,
}

/// Table-style performance metrics over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub ann_return: f64,
    pub volatility: f64,
    pub downside_dev: f64,
    /// None when volatility is zero (Sharpe undefined).
    pub sharpe: Option<f64>,
    pub max_drawdown: f64,
    pub abs_exposure: f64,
    pub ann_turnover: f64,
    pub period: DateRange,
}

/// Trailing mean of the past `n` days (the value on day `d` averages
/// `[d-n+1, d]`). The first `n-1` days have no value and are dropped.
pub fn moving_average(series: &DailySeries, n: usize) -> Result<DailySeries, BacktestError> {
    let len = series.len();
    if n < 1 || n > len {
        return Err(BacktestError::BadLookback { n, len });
    }
    let mut values = Vec::with_capacity(len - n + 1);
    let mut acc: f64 = series.values[..n].iter().sum();
    values.push(acc / n as f64);
    for i in n..len {
        acc += series.values[i] - series.values[i - n];
        values.push(acc / n as f64);
    }
    Ok(DailySeries::new(
        series.date_at(n - 1),
        values,
    ))
}

/// Combine averaged rebound and crash alarms into a daily exposure.
///
/// With `vol_override` set, days where both averaged alarms exceed the
/// threshold are treated as high-volatility and forced into the short rule
/// `theta = -AI_C`, whatever the strategy.
pub fn exposure(
    ai_rebound: &DailySeries,
    ai_crash: &DailySeries,
    strategy: Strategy,
    lookback: usize,
    vol_override: Option<f64>,
) -> Result<ExposureSeries, BacktestError> {
    if ai_rebound.start != ai_crash.start || ai_rebound.len() != ai_crash.len() {
        return Err(BacktestError::Misaligned(format!(
            "rebound {} x{} vs crash {} x{}",
            ai_rebound.start,
            ai_rebound.len(),
            ai_crash.start,
            ai_crash.len()
        )));
    }
    let values = ai_rebound
        .values
        .iter()
        .zip(&ai_crash.values)
        .map(|(&r, &c)| {
            if let Some(threshold) = vol_override {
                if r > threshold && c > threshold {
                    return -c;
                }
            }
            match strategy {
                Strategy::Long => r,
                Strategy::Short => -c,
                Strategy::LongShort => r - c,
            }
        })
        .collect();
    Ok(ExposureSeries {
        strategy,
        lookback,
        series: DailySeries::new(ai_rebound.start, values),
    })
}

/// Compound wealth over the exposure range.
///
/// On a step into a trading day `d` the return is
/// `theta_{d-1} * (P(d)/P(d-1) - 1) + (1 - |theta_{d-1}|) * rf(d-1)/252`
/// with forward-filled prices; steps into non-trading days return zero.
pub fn run_strategy(
    exposure: &ExposureSeries,
    prices: &PriceSeries,
    riskfree: &RateSeries,
) -> Result<WealthTrajectory, BacktestError> {
    let n = exposure.series.len();
    if n < 2 {
        return Err(BacktestError::TooShort { need: 2, got: n });
    }
    let start = exposure.series.start;
    let mut wealth = Vec::with_capacity(n);
    let mut returns = Vec::with_capacity(n);
    let mut market_steps = Vec::with_capacity(n);
    wealth.push(1.0);
    returns.push(0.0);
    market_steps.push(false);

    let mut prev_price = prices.price_on(start)?;
    for i in 1..n {
        let day = exposure.series.date_at(i);
        let prev_day = exposure.series.date_at(i - 1);
        let (ret, is_market) = if prices.is_observation(day) {
            let price = prices.price_on(day)?;
            let r_mkt = price / prev_price - 1.0;
            prev_price = price;
            let theta = exposure.series.values[i - 1];
            let rf_daily = riskfree.rate_on(prev_day)? / TRADING_DAYS_PER_YEAR;
            (theta * r_mkt + (1.0 - theta.abs()) * rf_daily, true)
        } else {
            (0.0, false)
        };
        wealth.push(wealth[i - 1] * (1.0 + ret));
        returns.push(ret);
        market_steps.push(is_market);
    }

    Ok(WealthTrajectory {
        wealth: DailySeries::new(start, wealth),
        returns,
        market_steps,
    })
}

/// Population standard deviation.
fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Compute the performance table for a wealth trajectory.
pub fn performance(
    trajectory: &WealthTrajectory,
    exposure: &ExposureSeries,
    riskfree: &RateSeries,
) -> Result<PerformanceReport, BacktestError> {
    let steps: Vec<usize> = (0..trajectory.returns.len())
        .filter(|&i| trajectory.market_steps[i])
        .collect();
    if steps.len() < 2 {
        return Err(BacktestError::TooShort {
            need: 2,
            got: steps.len(),
        });
    }
    let trading_returns: Vec<f64> = steps.iter().map(|&i| trajectory.returns[i]).collect();
    let rf_daily: Vec<f64> = steps
        .iter()
        .map(|&i| {
            riskfree
                .rate_on(trajectory.wealth.date_at(i - 1))
                .map(|r| r / TRADING_DAYS_PER_YEAR)
        })
        .collect::<Result<_, _>>()?;

    let total = trajectory.wealth.values[trajectory.wealth.len() - 1];
    let ann_return = total.powf(TRADING_DAYS_PER_YEAR / steps.len() as f64) - 1.0;
    let volatility = TRADING_DAYS_PER_YEAR.sqrt() * std_dev(&trading_returns);
    let clipped_excess: Vec<f64> = trading_returns
        .iter()
        .zip(&rf_daily)
        .map(|(r, rf)| (r - rf).min(0.0))
        .collect();
    let downside_dev = TRADING_DAYS_PER_YEAR.sqrt() * std_dev(&clipped_excess);
    let ann_rf = rf_daily.iter().sum::<f64>() / rf_daily.len() as f64 * TRADING_DAYS_PER_YEAR;
    let sharpe = if volatility > 0.0 {
        Some((ann_return - ann_rf) / volatility)
    } else {
        None
    };

    let mut peak = f64::NEG_INFINITY;
    let mut max_drawdown = 0.0f64;
    for &w in &trajectory.wealth.values {
        peak = peak.max(w);
        max_drawdown = max_drawdown.max(1.0 - w / peak);
    }

    let theta = &exposure.series.values;
    let abs_exposure = theta.iter().map(|t| t.abs()).sum::<f64>() / theta.len() as f64;
    let ann_turnover = if theta.len() > 1 {
        TRADING_DAYS_PER_YEAR
            * theta
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .sum::<f64>()
            / (theta.len() - 1) as f64
    } else {
        0.0
    };

    Ok(PerformanceReport {
        ann_return,
        volatility,
        downside_dev,
        sharpe,
        max_drawdown,
        abs_exposure,
        ann_turnover,
        period: exposure.series.range(),
    })
}

/// Benchmarks holding a constant position equal to the strategy's mean
/// signed exposure and mean absolute exposure over the whole period.
pub fn constant_benchmarks(
    exposure_series: &ExposureSeries,
    prices: &PriceSeries,
    riskfree: &RateSeries,
) -> Result<(PerformanceReport, PerformanceReport), BacktestError> {
    let n = exposure_series.series.len() as f64;
    let signed = exposure_series.series.values.iter().sum::<f64>() / n;
    let absolute = exposure_series
        .series
        .values
        .iter()
        .map(|t| t.abs())
        .sum::<f64>()
        / n;
    let report = |level: f64| -> Result<PerformanceReport, BacktestError> {
        let constant = ExposureSeries {
            strategy: exposure_series.strategy,
            lookback: exposure_series.lookback,
            series: DailySeries::new(
                exposure_series.series.start,
                vec![level; exposure_series.series.len()],
            ),
        };
        let trajectory = run_strategy(&constant, prices, riskfree)?;
        performance(&trajectory, &constant, riskfree)
    };
    Ok((report(signed)?, report(absolute)?))
}
