//! Pattern-recognition chain from calibrated fits to alarm indices.
//!
//! The chain runs once per target event type (crashes from bubble fits,
//! rebounds from negative-bubble fits):
//!
//! 1. classify learning-set fits into Class I/II by critical-time proximity
//!    to labeled events, and into width groups;
//! 2. find informative `(group, parameter)` pairs whose class densities
//!    differ under a KS test, keeping the regions where Class I dominates;
//! 3. questionnaire every scan day in balanced ternary, decompose into
//!    position-triple traits, and qualify traits into features by their
//!    `(alpha, beta)` frequencies;
//! 4. score any day by the ratio of Class-I features among its qualified
//!    traits — the alarm index.

mod alarm;
mod kde;
mod ks;

pub use alarm::{
    alarm_index, alarm_series, build_questionnaire, enumerate_traits, qualify_features,
};
pub use kde::{dominance_regions, gaussian_kde, silverman_bandwidth};
pub use ks::ks_two_sample;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{day_number, DailySeries, DateRange};
use crate::events::EventLabels;
use crate::lppl::{BubbleType, FitResult};

#[derive(Debug, Error)]
pub enum PatrecError {
    #[error("window width {width} outside group range [{min}, {max}]")]
    WidthOutOfRange { width: i64, min: i64, max: i64 },
    #[error("questionnaire has {len} answers, need at least 3 for traits")]
    QuestionnaireTooShort { len: usize },
    #[error("group count must be >= 1")]
    NoGroups,
    #[error("feature set i/o: {0}")]
    Store(String),
}

/// Which regime change a pattern-recognition run targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    Crash,
    Rebound,
}

impl EventType {
    /// Fit qualification consumed by this run.
    pub fn bubble_type(self) -> BubbleType {
        match self {
            EventType::Crash => BubbleType::Bubble,
            EventType::Rebound => BubbleType::NegativeBubble,
        }
    }

    /// The labeled days this run predicts.
    pub fn target(self, labels: &EventLabels) -> &BTreeSet<NaiveDate> {
        match self {
            EventType::Crash => &labels.crashes,
            EventType::Rebound => &labels.rebounds,
        }
    }
}

/// Critical-time proximity class: I means `tc` lands near a labeled event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    I,
    II,
}

/// Fit parameters compared between classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitParam {
    #[serde(rename = "m")]
    M,
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "B")]
    Amplitude,
    #[serde(rename = "b")]
    Damping,
    #[serde(rename = "q")]
    Residual,
}

impl FitParam {
    pub const ALL: [FitParam; 6] = [
        FitParam::M,
        FitParam::Omega,
        FitParam::Phi,
        FitParam::Amplitude,
        FitParam::Damping,
        FitParam::Residual,
    ];

    pub fn extract(self, fit: &FitResult) -> f64 {
        match self {
            FitParam::M => fit.params.m,
            FitParam::Omega => fit.params.omega,
            FitParam::Phi => fit.params.phi,
            FitParam::Amplitude => fit.params.b,
            FitParam::Damping => fit.damping,
            FitParam::Residual => fit.q,
        }
    }
}

/// Equal-width binning of window widths into groups `1..=n_groups`.
/// A width exactly on an interior bin edge belongs to the lower bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupBinning {
    pub n_groups: u32,
    pub width_min: i64,
    pub width_max: i64,
}

impl GroupBinning {
    pub fn new(n_groups: u32, width_min: i64, width_max: i64) -> Result<Self, PatrecError> {
        if n_groups < 1 {
            return Err(PatrecError::NoGroups);
        }
        Ok(Self {
            n_groups,
            width_min,
            width_max,
        })
    }

    /// Group of a window width. Exact integer arithmetic: the bin index is
    /// `ceil((width - width_min) * n / (width_max - width_min))`, clamped to
    /// 1 at the lower endpoint.
    pub fn group_of(&self, width: i64) -> Result<u32, PatrecError> {
        if width < self.width_min || width > self.width_max {
            return Err(PatrecError::WidthOutOfRange {
                width,
                min: self.width_min,
                max: self.width_max,
            });
        }
        let k = width - self.width_min;
        let range = self.width_max - self.width_min;
        if range == 0 {
            return Ok(1);
        }
        let g = (k * self.n_groups as i64 + range - 1) / range; // ceil
        Ok(g.max(1) as u32)
    }
}

impl Default for GroupBinning {
    fn default() -> Self {
        Self {
            n_groups: 14,
            width_min: 110,
            width_max: 1500,
        }
    }
}

/// One fit with its class and width group.
#[derive(Debug, Clone)]
pub struct ClassifiedFit {
    pub fit: FitResult,
    pub class: Class,
    pub group: u32,
}

/// A `(group, parameter)` pair whose class densities differ significantly,
/// with the regions where the Class-I density dominates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformativeParameter {
    pub group: u32,
    pub param: FitParam,
    /// Closed intervals of parameter values that look Class I.
    pub regions: Vec<(f64, f64)>,
    pub ks_stat: f64,
    pub p_value: f64,
}

impl InformativeParameter {
    pub fn contains(&self, v: f64) -> bool {
        self.regions.iter().any(|&(lo, hi)| lo <= v && v <= hi)
    }
}

/// Balanced-ternary answers for one day, one entry per informative
/// parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub date: NaiveDate,
    pub answers: Vec<i8>,
}

/// A position-triple fragment of a questionnaire with its ternary values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Trait {
    pub positions: [u16; 3],
    pub values: [i8; 3],
}

/// Everything needed to score new days: informative parameters, qualified
/// features and the thresholds that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub version: u32,
    pub event_type: EventType,
    pub near_days: i64,
    pub alpha: u32,
    pub beta: u32,
    pub binning: GroupBinning,
    pub informative: Vec<InformativeParameter>,
    pub class1_features: BTreeSet<Trait>,
    pub class2_features: BTreeSet<Trait>,
}

pub const FEATURE_SET_VERSION: u32 = 1;

impl FeatureSet {
    pub fn save(&self, path: &Path) -> Result<(), PatrecError> {
        let file = File::create(path).map_err(|e| PatrecError::Store(e.to_string()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)
            .map_err(|e| PatrecError::Store(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PatrecError> {
        let file = File::open(path)
            .map_err(|e| PatrecError::Store(format!("{}: {e}", path.display())))?;
        let fs: FeatureSet = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| PatrecError::Store(e.to_string()))?;
        if fs.version != FEATURE_SET_VERSION {
            return Err(PatrecError::Store(format!(
                "unsupported feature set version {}",
                fs.version
            )));
        }
        Ok(fs)
    }
}

/// Calendar-daily alarm values in `[0, 1]` for one event type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlarmSeries {
    pub event_type: EventType,
    pub series: DailySeries,
}

/// Whether alarm evaluation may see fits whose window ends after the
/// evaluated day. Backtests inside the learning set may; predictions only
/// use windows with `t2 <= day`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmMode {
    Learning,
    Prediction,
}

/// Knobs of one pattern-recognition run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PatrecConfig {
    pub event_type: EventType,
    /// "Near": maximum distance in days between a critical time (or scan
    /// day) and an event.
    pub near_days: i64,
    pub binning: GroupBinning,
    /// KS significance threshold for informative parameters.
    pub significance: f64,
    /// Minimum per-class sample size for a (group, parameter) pair.
    pub min_count: usize,
    /// Trait must appear more than `alpha` times in T_I for a Class-I
    /// feature.
    pub alpha: u32,
    /// ... and fewer than `beta` times in T_II.
    pub beta: u32,
    /// Density evaluation grid for region extraction.
    pub kde_grid: usize,
}

impl PatrecConfig {
    pub fn new(event_type: EventType) -> Self {
        Self {
            event_type,
            near_days: 20,
            binning: GroupBinning::default(),
            significance: 0.01,
            min_count: 10,
            alpha: 7,
            beta: 100,
            kde_grid: 512,
        }
    }
}

/// Class of one fit: I when its critical time lies within `near_days` of
/// any target event.
pub fn assign_class(fit: &FitResult, events: &BTreeSet<NaiveDate>, near_days: i64) -> Class {
    let near = events.iter().any(|e| {
        (fit.params.tc - day_number(*e) as f64).abs() <= near_days as f64
    });
    if near {
        Class::I
    } else {
        Class::II
    }
}

/// Group every fit by the width of its window.
pub fn assign_groups(
    fits: &[FitResult],
    binning: &GroupBinning,
) -> Result<Vec<u32>, PatrecError> {
    fits.iter()
        .map(|f| binning.group_of(f.window.width()))
        .collect()
}

/// Informative `(group, parameter)` pairs from classified fits. Pairs with
/// fewer than `min_count` samples in either class are skipped.
pub fn informative_params(
    classified: &[ClassifiedFit],
    cfg: &PatrecConfig,
) -> Vec<InformativeParameter> {
    let mut out = Vec::new();
    for group in 1..=cfg.binning.n_groups {
        for param in FitParam::ALL {
            let collect = |class: Class| -> Vec<f64> {
                classified
                    .iter()
                    .filter(|c| c.group == group && c.class == class)
                    .map(|c| param.extract(&c.fit))
                    .filter(|v| v.is_finite())
                    .collect()
            };
            let class1 = collect(Class::I);
            let class2 = collect(Class::II);
            if class1.len() < cfg.min_count || class2.len() < cfg.min_count {
                continue;
            }
            let (ks_stat, p_value) = ks_two_sample(&class1, &class2);
            if p_value > cfg.significance {
                continue;
            }
            let regions = dominance_regions(&class1, &class2, cfg.kde_grid);
            if regions.is_empty() {
                continue;
            }
            out.push(InformativeParameter {
                group,
                param,
                regions,
                ks_stat,
                p_value,
            });
        }
    }
    out
}

/// Admission rule for class assignment: the critical time must land within
/// `near_days` past the window end (forecasts far beyond the window say
/// nothing about events inside the learning span).
pub fn learning_eligible(fit: &FitResult, near_days: i64) -> bool {
    fit.params.tc - day_number(fit.window.t2) as f64 <= near_days as f64
}

/// Run the full learning chain over `scan` (the learning period): classify,
/// find informative parameters, questionnaire every scan day, count traits
/// and qualify features.
///
/// `fits` may contain any bubble type; the run keeps those matching its
/// event type with windows ending inside the learning period.
pub fn learn_features(
    fits: &[FitResult],
    events: &EventLabels,
    scan: DateRange,
    cfg: &PatrecConfig,
) -> Result<FeatureSet, PatrecError> {
    let target = cfg.event_type.target(events);
    let in_period: Vec<&FitResult> = fits
        .iter()
        .filter(|f| f.bubble_type == cfg.event_type.bubble_type() && f.window.t2 <= scan.end)
        .collect();

    // classes and groups only for fits admitted by the tc-proximity rule
    let mut classified = Vec::new();
    for fit in in_period.iter().filter(|f| learning_eligible(f, cfg.near_days)) {
        classified.push(ClassifiedFit {
            fit: (*fit).clone(),
            class: assign_class(fit, target, cfg.near_days),
            group: cfg.binning.group_of(fit.window.width())?,
        });
    }
    let informative = informative_params(&classified, cfg);

    // scan the learning period day by day
    let questionnaire_fits: Vec<FitResult> = in_period.iter().map(|f| (*f).clone()).collect();
    let mut learning_days = Vec::with_capacity(scan.num_days());
    for day in scan.days() {
        let qn = build_questionnaire(day, &questionnaire_fits, &informative, &cfg.binning, cfg.near_days);
        let near_event = target
            .iter()
            .any(|e| (day_number(day) - day_number(*e)).abs() <= cfg.near_days);
        learning_days.push((day, near_event, qn));
    }
    let (class1_features, class2_features) = qualify_features(&learning_days, cfg.alpha, cfg.beta);

    Ok(FeatureSet {
        version: FEATURE_SET_VERSION,
        event_type: cfg.event_type,
        near_days: cfg.near_days,
        alpha: cfg.alpha,
        beta: cfg.beta,
        binning: cfg.binning,
        informative,
        class1_features,
        class2_features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lppl::LpplParams;
    use crate::windows::Window;
    use chrono::Duration;

    pub(crate) fn fit_with(tc: f64, t1: &str, t2: &str, m: f64) -> FitResult {
        let window = Window::new(t1.parse().unwrap(), t2.parse().unwrap()).unwrap();
        let params = LpplParams {
            tc,
            m,
            omega: 8.0,
            phi: 1.0,
            a: 5.0,
            b: -0.5,
            c: 0.01,
        };
        FitResult {
            window,
            params,
            q: 0.01,
            damping: params.damping(),
            bubble_type: params.bubble_type(),
        }
    }

    #[test]
    fn group_bin_edges() {
        let binning = GroupBinning::default();
        assert_eq!(binning.group_of(110).unwrap(), 1);
        assert_eq!(binning.group_of(1500).unwrap(), 14);
        // bin width (1500-110)/14 = 99.29: 209 is still group 1, 210 tips
        // into group 2
        assert_eq!(binning.group_of(209).unwrap(), 1);
        assert_eq!(binning.group_of(210).unwrap(), 2);
        assert!(binning.group_of(109).is_err());
        assert!(binning.group_of(1501).is_err());
    }

    #[test]
    fn exact_interior_edge_goes_to_lower_bin() {
        // range 100..=200 in 10 groups: edges every 10 days exactly
        let binning = GroupBinning::new(10, 100, 200).unwrap();
        assert_eq!(binning.group_of(110).unwrap(), 1);
        assert_eq!(binning.group_of(111).unwrap(), 2);
        assert_eq!(binning.group_of(120).unwrap(), 2);
    }

    #[test]
    fn single_group_accepts_everything_in_range() {
        let binning = GroupBinning::new(1, 110, 1500).unwrap();
        for w in [110, 500, 1500] {
            assert_eq!(binning.group_of(w).unwrap(), 1);
        }
    }

    #[test]
    fn class_boundary_at_near_days() {
        let event: NaiveDate = "2000-06-01".parse().unwrap();
        let events: BTreeSet<NaiveDate> = [event].into_iter().collect();
        let base = day_number(event) as f64;
        let mk = |tc: f64| fit_with(tc, "1999-01-01", "2000-05-20", 0.5);
        assert_eq!(assign_class(&mk(base), &events, 20), Class::I);
        assert_eq!(assign_class(&mk(base + 20.0), &events, 20), Class::I);
        assert_eq!(assign_class(&mk(base + 21.0), &events, 20), Class::II);
        assert_eq!(assign_class(&mk(base - 20.0), &events, 20), Class::I);
        let empty = BTreeSet::new();
        assert_eq!(assign_class(&mk(base), &empty, 20), Class::II);
    }

    #[test]
    fn informative_detects_shifted_group() {
        // group 1 fits: class I m-values shifted well above class II
        let t2 = "2000-05-20";
        let mut classified = Vec::new();
        for i in 0..100 {
            let m1 = 0.7 + 0.002 * (i as f64 % 10.0);
            let m2 = 0.2 + 0.002 * (i as f64 % 10.0);
            classified.push(ClassifiedFit {
                fit: fit_with(730_700.0, "2000-01-20", t2, m1),
                class: Class::I,
                group: 1,
            });
            classified.push(ClassifiedFit {
                fit: fit_with(730_700.0, "2000-01-20", t2, m2),
                class: Class::II,
                group: 1,
            });
        }
        let cfg = PatrecConfig::new(EventType::Crash);
        let found = informative_params(&classified, &cfg);
        let m_param: Vec<_> = found
            .iter()
            .filter(|ip| ip.param == FitParam::M && ip.group == 1)
            .collect();
        assert_eq!(m_param.len(), 1);
        let ip = m_param[0];
        assert!(ip.p_value < 1e-6);
        // class-I dominance sits in the upper part of the pooled m-range
        for (lo, _) in &ip.regions {
            assert!(*lo > 0.4, "region starts at {lo}");
        }
        assert!(ip.contains(0.705));
        assert!(!ip.contains(0.205));
    }

    #[test]
    fn identical_classes_are_not_informative() {
        let mut classified = Vec::new();
        for i in 0..30 {
            let m = 0.3 + 0.01 * (i as f64);
            for class in [Class::I, Class::II] {
                classified.push(ClassifiedFit {
                    fit: fit_with(730_700.0, "2000-01-20", "2000-05-20", m),
                    class,
                    group: 1,
                });
            }
        }
        let cfg = PatrecConfig::new(EventType::Crash);
        assert!(informative_params(&classified, &cfg).is_empty());
    }

    #[test]
    fn insufficient_samples_skipped() {
        let mut classified = Vec::new();
        for i in 0..5 {
            classified.push(ClassifiedFit {
                fit: fit_with(730_700.0, "2000-01-20", "2000-05-20", 0.8 + 0.01 * i as f64),
                class: Class::I,
                group: 1,
            });
        }
        for i in 0..50 {
            classified.push(ClassifiedFit {
                fit: fit_with(730_700.0, "2000-01-20", "2000-05-20", 0.2 + 0.001 * i as f64),
                class: Class::II,
                group: 1,
            });
        }
        let cfg = PatrecConfig::new(EventType::Crash); // min_count 10 > 5
        assert!(informative_params(&classified, &cfg).is_empty());
    }

    #[test]
    fn learning_eligibility_rule() {
        let fit = fit_with(0.0, "2000-01-01", "2000-06-01", 0.5);
        let t2 = day_number(fit.window.t2) as f64;
        let near = FitResult {
            params: LpplParams { tc: t2 + 20.0, ..fit.params },
            ..fit.clone()
        };
        let far = FitResult {
            params: LpplParams { tc: t2 + 21.0, ..fit.params },
            ..fit
        };
        assert!(learning_eligible(&near, 20));
        assert!(!learning_eligible(&far, 20));
    }

    #[test]
    fn feature_set_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.json");
        let mut class1 = BTreeSet::new();
        class1.insert(Trait {
            positions: [0, 1, 2],
            values: [1, -1, 0],
        });
        let fs = FeatureSet {
            version: FEATURE_SET_VERSION,
            event_type: EventType::Rebound,
            near_days: 20,
            alpha: 7,
            beta: 100,
            binning: GroupBinning::default(),
            informative: vec![InformativeParameter {
                group: 2,
                param: FitParam::Omega,
                regions: vec![(3.0, 5.5)],
                ks_stat: 0.4,
                p_value: 0.001,
            }],
            class1_features: class1,
            class2_features: BTreeSet::new(),
        };
        fs.save(&path).unwrap();
        let loaded = FeatureSet::load(&path).unwrap();
        assert_eq!(loaded, fs);
    }

    #[test]
    fn feature_set_version_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.json");
        let fs = FeatureSet {
            version: 99,
            event_type: EventType::Crash,
            near_days: 20,
            alpha: 7,
            beta: 100,
            binning: GroupBinning::default(),
            informative: vec![],
            class1_features: BTreeSet::new(),
            class2_features: BTreeSet::new(),
        };
        fs.save(&path).unwrap();
        assert!(FeatureSet::load(&path).is_err());
    }

    #[test]
    fn event_day_sets_for_each_run() {
        let mut labels = EventLabels {
            crashes: BTreeSet::new(),
            rebounds: BTreeSet::new(),
            half_window: 100,
        };
        labels.crashes.insert("2001-01-01".parse().unwrap());
        assert_eq!(EventType::Crash.target(&labels).len(), 1);
        assert_eq!(EventType::Rebound.target(&labels).len(), 0);
        assert_eq!(EventType::Crash.bubble_type(), BubbleType::Bubble);
        assert_eq!(EventType::Rebound.bubble_type(), BubbleType::NegativeBubble);
        let _ = Duration::days(1);
    }
}
