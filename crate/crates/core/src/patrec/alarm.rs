//! Questionnaires, traits, feature qualification and the alarm index.

use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::calendar::{day_number, DailySeries, DateRange};
use crate::lppl::FitResult;

use super::{
    AlarmMode, AlarmSeries, FeatureSet, GroupBinning, InformativeParameter, PatrecError,
    Questionnaire, Trait,
};

/// Balanced-ternary questionnaire for one day.
///
/// Collects the fits whose critical time lies within `near_days` of `day`;
/// for each informative parameter the answer is `+1` when more than half of
/// the collected fits in that group fall inside the Class-I regions, `-1`
/// when fewer than half do, and `0` on an exact split or when the group is
/// empty.
pub fn build_questionnaire(
    day: NaiveDate,
    fits: &[FitResult],
    informative: &[InformativeParameter],
    binning: &GroupBinning,
    near_days: i64,
) -> Questionnaire {
    let day_num = day_number(day) as f64;
    let collected: Vec<&FitResult> = fits
        .iter()
        .filter(|f| (f.params.tc - day_num).abs() <= near_days as f64)
        .collect();

    let answers = informative
        .iter()
        .map(|ip| {
            let mut total = 0u32;
            let mut inside = 0u32;
            for fit in &collected {
                match binning.group_of(fit.window.width()) {
                    Ok(g) if g == ip.group => {
                        total += 1;
                        if ip.contains(ip.param.extract(fit)) {
                            inside += 1;
                        }
                    }
                    _ => {}
                }
            }
            if total == 0 {
                0
            } else if 2 * inside > total {
                1
            } else if 2 * inside < total {
                -1
            } else {
                0
            }
        })
        .collect();

    Questionnaire { date: day, answers }
}

/// All `C(L, 3)` position-triple traits of a questionnaire, in lexicographic
/// position order.
pub fn enumerate_traits(qn: &Questionnaire) -> Result<Vec<Trait>, PatrecError> {
    let len = qn.answers.len();
    if len < 3 {
        return Err(PatrecError::QuestionnaireTooShort { len });
    }
    let mut traits = Vec::with_capacity(len * (len - 1) * (len - 2) / 6);
    for_each_trait(qn, |t| traits.push(t));
    Ok(traits)
}

fn for_each_trait(qn: &Questionnaire, mut f: impl FnMut(Trait)) {
    let a = &qn.answers;
    let len = a.len();
    for i in 0..len {
        for j in (i + 1)..len {
            for k in (j + 1)..len {
                f(Trait {
                    positions: [i as u16, j as u16, k as u16],
                    values: [a[i], a[j], a[k]],
                });
            }
        }
    }
}

/// Count trait occurrences over the learning scan and qualify features.
///
/// `T_I` collects the traits of near-event days, `T_II` of the rest. A trait
/// becomes a Class-I feature when it appears more than `alpha` times in
/// `T_I` and fewer than `beta` times in `T_II`; a Class-II feature when it
/// appears at most `alpha` times in `T_I` and at least `beta` times in
/// `T_II`. Everything else stays unqualified. Days whose questionnaires are
/// too short for traits contribute nothing.
pub fn qualify_features(
    learning_days: &[(NaiveDate, bool, Questionnaire)],
    alpha: u32,
    beta: u32,
) -> (
    std::collections::BTreeSet<Trait>,
    std::collections::BTreeSet<Trait>,
) {
    let mut counts: HashMap<Trait, (u32, u32)> = HashMap::new();
    for (_, near_event, qn) in learning_days {
        if qn.answers.len() < 3 {
            continue;
        }
        for_each_trait(qn, |t| {
            let entry = counts.entry(t).or_insert((0, 0));
            if *near_event {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        });
    }
    let mut class1 = std::collections::BTreeSet::new();
    let mut class2 = std::collections::BTreeSet::new();
    for (t, (in_t1, in_t2)) in counts {
        if in_t1 > alpha && in_t2 < beta {
            class1.insert(t);
        } else if in_t1 <= alpha && in_t2 >= beta {
            class2.insert(t);
        }
    }
    (class1, class2)
}

fn pack(t: &Trait) -> u64 {
    let v = |x: i8| (x + 1) as u64; // -1,0,1 -> 0,1,2
    (t.positions[0] as u64)
        | (t.positions[1] as u64) << 16
        | (t.positions[2] as u64) << 32
        | v(t.values[0]) << 48
        | v(t.values[1]) << 50
        | v(t.values[2]) << 52
}

struct PackedFeatures {
    class1: HashSet<u64>,
    class2: HashSet<u64>,
}

impl PackedFeatures {
    fn new(fs: &FeatureSet) -> Self {
        Self {
            class1: fs.class1_features.iter().map(pack).collect(),
            class2: fs.class2_features.iter().map(pack).collect(),
        }
    }
}

fn alarm_index_packed(
    day: NaiveDate,
    fits: &[FitResult],
    fs: &FeatureSet,
    packed: &PackedFeatures,
) -> f64 {
    let qn = build_questionnaire(day, fits, &fs.informative, &fs.binning, fs.near_days);
    if qn.answers.len() < 3 {
        return 0.0;
    }
    let mut n1 = 0u64;
    let mut n2 = 0u64;
    for_each_trait(&qn, |t| {
        let key = pack(&t);
        if packed.class1.contains(&key) {
            n1 += 1;
        } else if packed.class2.contains(&key) {
            n2 += 1;
        }
    });
    if n1 + n2 == 0 {
        0.0
    } else {
        n1 as f64 / (n1 + n2) as f64
    }
}

/// Alarm index of one day: the fraction of the day's qualified traits that
/// are Class-I features. Zero when no trait qualifies.
pub fn alarm_index(day: NaiveDate, fits: &[FitResult], fs: &FeatureSet) -> f64 {
    alarm_index_packed(day, fits, fs, &PackedFeatures::new(fs))
}

/// Alarm index on every calendar day of `range`.
///
/// Only fits matching the feature set's event type contribute. In
/// [`AlarmMode::Prediction`] a fit is visible on a day only once its window
/// has ended (`t2 <= day`), so truncating the inputs after a day never
/// changes earlier values.
pub fn alarm_series(
    fits: &[FitResult],
    fs: &FeatureSet,
    range: DateRange,
    mode: AlarmMode,
) -> AlarmSeries {
    let mut eligible: Vec<FitResult> = fits
        .iter()
        .filter(|f| f.bubble_type == fs.event_type.bubble_type())
        .cloned()
        .collect();
    eligible.sort_by(|a, b| {
        (a.window.t2, a.window.t1, a.q)
            .partial_cmp(&(b.window.t2, b.window.t1, b.q))
            .unwrap()
    });
    let packed = PackedFeatures::new(fs);

    let days: Vec<NaiveDate> = range.days().collect();
    let values: Vec<f64> = days
        .par_iter()
        .map(|&day| {
            let visible = match mode {
                AlarmMode::Learning => &eligible[..],
                AlarmMode::Prediction => {
                    let cut = eligible.partition_point(|f| f.window.t2 <= day);
                    &eligible[..cut]
                }
            };
            alarm_index_packed(day, visible, fs, &packed)
        })
        .collect();

    AlarmSeries {
        event_type: fs.event_type,
        series: DailySeries::new(range.start, values),
    }
}
