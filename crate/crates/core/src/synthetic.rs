//! Seeded synthetic series for tests, fixtures and benchmarks.
//!
//! Generators produce daily observations whose ln-price follows a planted
//! parameter set plus independent Gaussian noise, and multi-cycle markets
//! where super-exponential runs end in sharp reversals at known days.

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calendar::day_number;
use crate::lppl::LpplParams;
use crate::market_data::PriceSeries;

/// Standard normal draw (polar Box-Muller, one value per call).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let v: f64 = rng.gen_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * ((-2.0 * s.ln()) / s).sqrt();
        }
    }
}

/// Price series following `params` exactly on every calendar day of
/// `[t1, t2]`, with iid Gaussian noise of standard deviation `noise` on the
/// ln-price. `params.tc` is on the absolute day-number axis.
pub fn lppl_price_series(
    name: &str,
    t1: NaiveDate,
    t2: NaiveDate,
    params: &LpplParams,
    noise: f64,
    seed: u64,
) -> PriceSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observations = Vec::new();
    let mut day = t1;
    while day <= t2 {
        let t = day_number(day) as f64;
        let mut lnp = params
            .value(t)
            .expect("generator window must end before tc");
        if noise > 0.0 {
            lnp += noise * standard_normal(&mut rng);
        }
        observations.push((day, lnp.exp()));
        day += Duration::days(1);
    }
    PriceSeries::new(name, observations).expect("generated series is valid")
}

/// Shape of a planted multi-cycle market.
#[derive(Debug, Clone)]
pub struct PlantedMarketConfig {
    pub cycles: usize,
    /// Quiet days before each super-exponential run.
    pub pre_days: i64,
    /// Length of the run itself.
    pub bubble_days: i64,
    /// Length of the reversal following the run.
    pub crash_days: i64,
    /// Quiet days after the reversal.
    pub post_days: i64,
    /// Ln-price change over the run (positive).
    pub rise: f64,
    /// Ln-price change over the reversal (positive magnitude).
    pub drop: f64,
    /// Iid Gaussian noise on the ln-price.
    pub noise: f64,
    /// Distance of the critical time past the run's last day, uniform draw.
    pub tc_after_peak: (f64, f64),
    pub m_range: (f64, f64),
    pub omega_range: (f64, f64),
    /// Mirror the construction: declining runs ending in rebounds.
    pub negative: bool,
    pub start: NaiveDate,
    pub start_price: f64,
}

impl Default for PlantedMarketConfig {
    fn default() -> Self {
        Self {
            cycles: 20,
            pre_days: 40,
            bubble_days: 200,
            crash_days: 25,
            post_days: 35,
            rise: 0.3,
            drop: 0.35,
            noise: 0.002,
            tc_after_peak: (3.0, 12.0),
            m_range: (0.3, 0.7),
            omega_range: (5.0, 12.0),
            negative: false,
            start: NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(),
            start_price: 100.0,
        }
    }
}

/// A planted market plus the ground truth used to build it.
#[derive(Debug, Clone)]
pub struct PlantedMarket {
    pub series: PriceSeries,
    /// The day each run peaks (or troughs): the planted regime-change days.
    pub event_days: Vec<NaiveDate>,
    /// Parameter set of each planted run, `tc` on the absolute day axis.
    pub planted: Vec<LpplParams>,
}

/// Build a market of `cfg.cycles` repeated runs. Each cycle is
/// pre -> run -> reversal -> post; the run follows an LPPL with randomly
/// drawn `(m, omega, phi, tc)` and amplitude scaled to produce `cfg.rise`,
/// capped so the planted set qualifies under the hazard-rate constraint.
pub fn planted_market(cfg: &PlantedMarketConfig, seed: u64) -> PlantedMarket {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sign = if cfg.negative { -1.0 } else { 1.0 };
    let mut observations = Vec::new();
    let mut event_days = Vec::new();
    let mut planted = Vec::new();
    let mut level = cfg.start_price.ln();
    let mut day = cfg.start;
    let mut noise = |rng: &mut ChaCha8Rng| cfg.noise * standard_normal(rng);

    for _ in 0..cfg.cycles {
        // quiet drift ahead of the run
        for _ in 0..cfg.pre_days {
            observations.push((day, (level + noise(&mut rng)).exp()));
            day += Duration::days(1);
        }

        // the super-exponential run
        let run_start = day;
        let peak_day = run_start + Duration::days(cfg.bubble_days - 1);
        let m = rng.gen_range(cfg.m_range.0..cfg.m_range.1);
        let omega = rng.gen_range(cfg.omega_range.0..cfg.omega_range.1);
        let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let tc = day_number(peak_day) as f64
            + rng.gen_range(cfg.tc_after_peak.0..cfg.tc_after_peak.1);
        let d0 = tc - day_number(run_start) as f64;
        let d_end = tc - day_number(peak_day) as f64;
        // amplitude producing the requested ln move over the run
        let b = sign * cfg.rise / (d_end.powf(m) - d0.powf(m));
        // oscillation at half the level that would break the sign constraint
        let c = 0.5 * (b * m).abs() / (m * m + omega * omega).sqrt();
        let a = level - b * d0.powf(m) - c * d0.powf(m) * (omega * d0.ln() - phi).cos();
        let params = LpplParams { tc, m, omega, phi, a, b, c };
        while day <= peak_day {
            let lnp = params.value(day_number(day) as f64).unwrap();
            observations.push((day, (lnp + noise(&mut rng)).exp()));
            day += Duration::days(1);
        }
        level = params.value(day_number(peak_day) as f64).unwrap();
        event_days.push(peak_day);
        planted.push(params);

        // reversal, linear in ln-price
        for i in 1..=cfg.crash_days {
            let lnp = level - sign * cfg.drop * i as f64 / cfg.crash_days as f64;
            observations.push((day, (lnp + noise(&mut rng)).exp()));
            day += Duration::days(1);
        }
        level -= sign * cfg.drop;

        // quiet tail
        for _ in 0..cfg.post_days {
            observations.push((day, (level + noise(&mut rng)).exp()));
            day += Duration::days(1);
        }
    }

    PlantedMarket {
        series: PriceSeries::new("planted_market", observations).unwrap(),
        event_days,
        planted,
    }
}
