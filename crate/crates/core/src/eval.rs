//! Error diagrams: missed-event fraction versus alarm-time fraction.
//!
//! Thresholds descend through the distinct alarm values. At each threshold
//! the alarm periods are the union of fixed-length windows anchored at every
//! day at or above the threshold; a point is recorded whenever the count of
//! predicted events increases. A chance predictor traces `y = 1 - x`.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::patrec::AlarmSeries;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no events inside the alarm range: diagram undefined")]
    NoEvents,
    #[error("event {0} outside the alarm range")]
    EventOutsideRange(NaiveDate),
    #[error("alarm duration must be >= 1, got {0}")]
    BadDuration(i64),
    #[error("empty alarm series")]
    EmptyAlarm,
}

/// Where the alarm window sits relative to its triggering day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmPlacement {
    /// `[d, d + Da - 1]`: the alarm looks forward from the first exceedance.
    Forward,
    /// `[d - (Da-1)/2, d + Da/2]`: centered variant.
    Centered,
}

/// One error diagram. `points[k] = (alarm_fraction, miss_fraction)` recorded
/// at `thresholds[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDiagram {
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
    pub n_events: usize,
    pub n_days: usize,
}

/// Build the error diagram of an alarm series against a set of event days.
pub fn error_diagram(
    alarm: &AlarmSeries,
    events: &BTreeSet<NaiveDate>,
    da: i64,
    placement: AlarmPlacement,
) -> Result<ErrorDiagram, EvalError> {
    if da < 1 {
        return Err(EvalError::BadDuration(da));
    }
    let series = &alarm.series;
    let n_days = series.len();
    if n_days == 0 {
        return Err(EvalError::EmptyAlarm);
    }
    let mut event_idx = Vec::with_capacity(events.len());
    for e in events {
        match series.index_of(*e) {
            Some(i) => event_idx.push(i as i64),
            None => return Err(EvalError::EventOutsideRange(*e)),
        }
    }
    let n_events = event_idx.len();
    if n_events == 0 {
        return Err(EvalError::NoEvents);
    }

    let (back, forward) = match placement {
        AlarmPlacement::Forward => (0, da - 1),
        AlarmPlacement::Centered => ((da - 1) / 2, da / 2),
    };

    let mut thresholds: Vec<f64> = series.values.clone();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let mut points = Vec::new();
    let mut recorded_thresholds = Vec::new();
    let mut predicted_so_far = 0usize;
    for &theta in &thresholds {
        // alarm periods at this threshold, recomputed from scratch and merged
        let mut covered_days = 0i64;
        let mut predicted = 0usize;
        let mut cover_end = -1i64; // last day index already counted
        let mut event_cursor = 0usize;
        for (i, &v) in series.values.iter().enumerate() {
            if v < theta {
                continue;
            }
            let start = (i as i64 - back).max(0).max(cover_end + 1);
            let end = (i as i64 + forward).min(n_days as i64 - 1);
            if end >= start {
                covered_days += end - start + 1;
                cover_end = end;
            } else {
                cover_end = cover_end.max(end);
            }
            // events are sorted: advance past this merged block
            while event_cursor < n_events && event_idx[event_cursor] <= cover_end {
                if event_idx[event_cursor] >= (i as i64 - back).max(0) {
                    predicted += 1;
                } else {
                    // event before this block and not counted earlier blocks:
                    // it was already skipped as unpredicted at this threshold
                }
                event_cursor += 1;
            }
        }
        if predicted > predicted_so_far {
            predicted_so_far = predicted;
            points.push((
                covered_days as f64 / n_days as f64,
                (n_events - predicted) as f64 / n_events as f64,
            ));
            recorded_thresholds.push(theta);
            if predicted == n_events {
                break;
            }
        }
    }

    Ok(ErrorDiagram {
        points,
        thresholds: recorded_thresholds,
        n_events,
        n_days,
    })
}

/// Mean of `1 - alarm_fraction - miss_fraction` over the diagram points:
/// positive when the alarm beats chance on average. The point list itself
/// stays the primary artifact.
pub fn skill_summary(diagram: &ErrorDiagram) -> f64 {
    let n = diagram.points.len();
    assert!(n > 0, "diagram has no points");
    diagram
        .points
        .iter()
        .map(|&(x, y)| 1.0 - x - y)
        .sum::<f64>()
        / n as f64
}

/// Write the diagram as CSV rows `threshold,alarm_fraction,miss_fraction`.
pub fn diagram_csv(diagram: &ErrorDiagram) -> String {
    let mut out = String::from("threshold,alarm_fraction,miss_fraction\n");
    for (theta, (x, y)) in diagram.thresholds.iter().zip(&diagram.points) {
        out.push_str(&format!("{theta},{x},{y}\n"));
    }
    out
}

/// Render a scatter of the diagram with the `y = 1 - x` chance line.
pub fn diagram_svg(diagram: &ErrorDiagram, title: &str) -> String {
    let size = 480.0;
    let margin = 50.0;
    let plot = size - 2.0 * margin;
    let sx = |x: f64| margin + x * plot;
    let sy = |y: f64| margin + (1.0 - y) * plot;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{plot}\" height=\"{plot}\" fill=\"white\" \
         stroke=\"black\"/>\n",
        m = margin
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"gray\" \
         stroke-dasharray=\"6,4\"/>\n",
        sx(0.0),
        sy(1.0),
        sx(1.0),
        sy(0.0)
    ));
    for &(x, y) in &diagram.points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\"/>\n",
            sx(x),
            sy(y)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        size / 2.0,
        margin / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"12\">alarm fraction</text>\n",
        size / 2.0,
        size - margin / 3.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"12\" \
         transform=\"rotate(-90 {:.0} {:.0})\">miss fraction</text>\n",
        margin / 3.0,
        size / 2.0,
        margin / 3.0,
        size / 2.0
    ));
    svg.push_str("</svg>\n");
    svg
}
