//! Labeling of historical crash and rebound days.
//!
//! A day begins a crash (rebound) when its price is the maximum (minimum)
//! over the window of `half_window` calendar days on both sides, compared on
//! the forward-filled calendar axis. Ties are broken to the earliest day in
//! the window attaining the extremum, so labels are unique.

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::day_number;
use crate::market_data::PriceSeries;

#[derive(Debug, Error)]
pub enum EventError {
    #[error("series spans {span} days, need more than {need} for half_window {half_window}")]
    SpanTooShort {
        span: i64,
        need: i64,
        half_window: i64,
    },
    #[error("invalid half_window {0}")]
    BadHalfWindow(i64),
}

/// Labeled crash and rebound days for one series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLabels {
    pub crashes: BTreeSet<NaiveDate>,
    pub rebounds: BTreeSet<NaiveDate>,
    pub half_window: i64,
}

impl EventLabels {
    /// Distance in days from `d` to the nearest crash, if any.
    pub fn nearest_crash(&self, d: NaiveDate) -> Option<i64> {
        nearest(&self.crashes, d)
    }

    pub fn nearest_rebound(&self, d: NaiveDate) -> Option<i64> {
        nearest(&self.rebounds, d)
    }
}

fn nearest(set: &BTreeSet<NaiveDate>, d: NaiveDate) -> Option<i64> {
    let after = set.range(d..).next().map(|e| (*e - d).num_days());
    let before = set.range(..d).next_back().map(|e| (d - *e).num_days());
    match (before, after) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    }
}

/// Label every observation day whose price is the two-sided extremum over
/// `±half_window` calendar days. Days without full window coverage at the
/// series edges are not candidates.
pub fn label_events(series: &PriceSeries, half_window: i64) -> Result<EventLabels, EventError> {
    if half_window < 1 {
        return Err(EventError::BadHalfWindow(half_window));
    }
    let first = series.first_date();
    let last = series.last_date();
    let span = (last - first).num_days();
    if span <= 2 * half_window {
        return Err(EventError::SpanTooShort {
            span,
            need: 2 * half_window,
            half_window,
        });
    }

    // Daily forward-filled prices across the whole series, so window extrema
    // are taken over calendar days.
    let n_days = span as usize + 1;
    let mut daily = Vec::with_capacity(n_days);
    {
        let obs = series.observations();
        let mut cursor = 0;
        for i in 0..n_days {
            let d = first + Duration::days(i as i64);
            while cursor + 1 < obs.len() && obs[cursor + 1].0 <= d {
                cursor += 1;
            }
            daily.push(obs[cursor].1);
        }
    }
    let idx_of = |d: NaiveDate| (day_number(d) - day_number(first)) as usize;

    let mut crashes = BTreeSet::new();
    let mut rebounds = BTreeSet::new();
    let hw = half_window as usize;
    for &(d, price) in series.observations() {
        let i = idx_of(d);
        if i < hw || i + hw >= n_days {
            continue; // no full two-sided coverage
        }
        let lo = i - hw;
        let hi = i + hw;
        let window = &daily[lo..=hi];
        let max = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = window.iter().cloned().fold(f64::INFINITY, f64::min);
        // earliest day attaining the extremum wins ties
        if price == max && window.iter().position(|&p| p == max) == Some(i - lo) {
            crashes.insert(d);
        }
        if price == min && window.iter().position(|&p| p == min) == Some(i - lo) {
            rebounds.insert(d);
        }
    }

    Ok(EventLabels {
        crashes,
        rebounds,
        half_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn daily_series(start: &str, lnp: impl Iterator<Item = f64>) -> PriceSeries {
        let start = d(start);
        let obs: Vec<(NaiveDate, f64)> = lnp
            .enumerate()
            .map(|(i, v)| (start + Duration::days(i as i64), v.exp()))
            .collect();
        PriceSeries::new("fixture", obs).unwrap()
    }

    #[test]
    fn monotone_series_has_no_events() {
        let series = daily_series("2000-01-01", (0..400).map(|i| i as f64 * 1e-3));
        let labels = label_events(&series, 100).unwrap();
        assert!(labels.crashes.is_empty());
        assert!(labels.rebounds.is_empty());
    }

    #[test]
    fn triangle_peak_is_single_crash() {
        // rises for 150 days, falls for 150 days: one crash at the apex,
        // no interior rebounds
        let series = daily_series(
            "2000-01-01",
            (0..=300).map(|i| -((i as f64) - 150.0).abs() * 1e-3),
        );
        let labels = label_events(&series, 100).unwrap();
        assert_eq!(labels.crashes.len(), 1);
        assert!(labels.crashes.contains(&d("2000-05-30"))); // day 150
        assert!(labels.rebounds.is_empty());
    }

    #[test]
    fn valley_is_single_rebound() {
        let series = daily_series(
            "2000-01-01",
            (0..=300).map(|i| ((i as f64) - 150.0).abs() * 1e-3),
        );
        let labels = label_events(&series, 100).unwrap();
        assert_eq!(labels.rebounds.len(), 1);
        assert!(labels.crashes.is_empty());
    }

    #[test]
    fn short_span_is_error() {
        let series = daily_series("2000-01-01", (0..=200).map(|i| i as f64 * 1e-3));
        assert!(matches!(
            label_events(&series, 100),
            Err(EventError::SpanTooShort { .. })
        ));
    }

    #[test]
    fn constant_series_has_no_events() {
        let series = daily_series("2000-01-01", (0..400).map(|_| 1.0));
        let labels = label_events(&series, 100).unwrap();
        assert!(labels.crashes.is_empty());
        assert!(labels.rebounds.is_empty());
    }

    #[test]
    fn tie_goes_to_earliest_day() {
        // plateau of equal maxima: only the first plateau day is labeled
        let mut lnp: Vec<f64> = (0..150).map(|i| i as f64 * 1e-3).collect();
        lnp.extend(std::iter::repeat(0.149).take(5));
        lnp.extend((0..150).rev().map(|i| i as f64 * 1e-3));
        let series = daily_series("2000-01-01", lnp.into_iter());
        let labels = label_events(&series, 100).unwrap();
        assert_eq!(labels.crashes.len(), 1);
        assert_eq!(*labels.crashes.iter().next().unwrap(), d("2000-05-29"));
    }

    #[test]
    fn weekend_gaps_still_label_peak() {
        // observations only on weekdays; the peak remains a two-sided max
        // on the forward-filled calendar axis
        let start = d("2000-01-03");
        let mut obs = Vec::new();
        let mut day = start;
        let mut i = 0i64;
        while obs.len() < 300 {
            use chrono::Datelike;
            if day.weekday().num_days_from_monday() < 5 {
                let lnp = -((i as f64) - 210.0).abs() * 1e-3;
                obs.push((day, lnp.exp()));
                i += 1;
            }
            day += Duration::days(1);
        }
        let series = PriceSeries::new("weekdays", obs).unwrap();
        let labels = label_events(&series, 100).unwrap();
        assert_eq!(labels.crashes.len(), 1);
    }

    #[test]
    fn wider_half_window_labels_no_more_events() {
        let cfg = crate::synthetic::PlantedMarketConfig {
            cycles: 6,
            ..Default::default()
        };
        let market = crate::synthetic::planted_market(&cfg, 9);
        let narrow = label_events(&market.series, 100).unwrap();
        let wide = label_events(&market.series, 200).unwrap();
        assert!(wide.crashes.len() <= narrow.crashes.len());
        assert!(wide.rebounds.len() <= narrow.rebounds.len());
    }

    #[test]
    fn planted_market_crashes_found_near_planted_days() {
        let cfg = crate::synthetic::PlantedMarketConfig {
            cycles: 5,
            ..Default::default()
        };
        let market = crate::synthetic::planted_market(&cfg, 21);
        let labels = label_events(&market.series, 100).unwrap();
        // each planted peak with coverage is recovered within a few days
        let mut matched = 0;
        for planted in &market.event_days {
            if labels
                .crashes
                .iter()
                .any(|c| (*c - *planted).num_days().abs() <= 3)
            {
                matched += 1;
            }
        }
        assert!(
            matched >= market.event_days.len() - 1,
            "matched {matched} of {}",
            market.event_days.len()
        );
    }

    #[test]
    fn nearest_distance_queries() {
        let mut labels = EventLabels {
            crashes: BTreeSet::new(),
            rebounds: BTreeSet::new(),
            half_window: 100,
        };
        assert_eq!(labels.nearest_crash(d("2000-01-01")), None);
        labels.crashes.insert(d("2000-03-01"));
        labels.crashes.insert(d("2000-06-01"));
        assert_eq!(labels.nearest_crash(d("2000-03-01")), Some(0));
        assert_eq!(labels.nearest_crash(d("2000-02-20")), Some(10));
        assert_eq!(labels.nearest_crash(d("2000-04-20")), Some(42));
    }

    proptest! {
        // crashes are at least half_window + 1 days apart, and labeling is
        // invariant under a positive price rescale
        #[test]
        fn spacing_and_scale_invariance(
            seed in 0u64..40,
            scale in 0.1f64..10.0,
        ) {
            let cfg = crate::synthetic::PlantedMarketConfig {
                cycles: 4,
                noise: 0.004,
                ..Default::default()
            };
            let market = crate::synthetic::planted_market(&cfg, seed);
            let labels = label_events(&market.series, 100).unwrap();
            let crashes: Vec<_> = labels.crashes.iter().collect();
            for pair in crashes.windows(2) {
                prop_assert!((*pair[1] - *pair[0]).num_days() >= 101);
            }
            let scaled = PriceSeries::new(
                "scaled",
                market
                    .series
                    .observations()
                    .iter()
                    .map(|&(d, p)| (d, p * scale))
                    .collect(),
            )
            .unwrap();
            let scaled_labels = label_events(&scaled, 100).unwrap();
            prop_assert_eq!(&scaled_labels.crashes, &labels.crashes);
            prop_assert_eq!(&scaled_labels.rebounds, &labels.rebounds);
        }
    }
}
