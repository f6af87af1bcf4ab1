//! Multi-start calibration of one window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::calendar::day_number;
use crate::market_data::PriceSeries;
use crate::windows::Window;

use super::optimize::NelderMead;
use super::slave::slave_linear;
use super::{FitConfig, FitError, FitResult, LpplParams};

/// Two local minima closer than these thresholds in all three nonlinear
/// coordinates are treated as the same basin; only the lower-residual one
/// is kept.
const TC_BASIN_DAYS: f64 = 5.0;
const M_BASIN: f64 = 0.02;
const OMEGA_BASIN: f64 = 0.2;

/// Smallest admissible distance of `tc` past the window end, in days.
const TC_MARGIN: f64 = 1e-6;

struct ScaledBox {
    tc_lo: f64,
    tc_span: f64,
    m_lo: f64,
    m_span: f64,
    omega_lo: f64,
    omega_span: f64,
}

impl ScaledBox {
    fn unscale(&self, x: &[f64]) -> (f64, f64, f64) {
        (
            self.tc_lo + x[0] * self.tc_span,
            self.m_lo + x[1] * self.m_span,
            self.omega_lo + x[2] * self.omega_span,
        )
    }
}

/// Calibrate the LPPL on one window by multi-start local minimization of the
/// RMS residual over `(tc, m, omega)`, with the linear parameters slaved.
///
/// Returns at most `cfg.keep` basin-deduplicated results sorted by ascending
/// residual. An empty list means no start point converged inside bounds; too
/// few observations in the window is an error.
pub fn fit_window(
    series: &PriceSeries,
    window: &Window,
    cfg: &FitConfig,
) -> Result<Vec<FitResult>, FitError> {
    let observations = series.slice(window.t1, window.t2);
    if observations.len() < cfg.min_observations {
        return Err(FitError::TooFewObservations {
            got: observations.len(),
            need: cfg.min_observations,
        });
    }

    let origin = day_number(window.t1) as f64;
    let data: Vec<(f64, f64)> = observations
        .iter()
        .map(|&(d, p)| ((day_number(d) as f64 - origin), p.ln()))
        .collect();
    let t_last = data[data.len() - 1].0;
    let width = window.width() as f64;

    let scaled = ScaledBox {
        tc_lo: width,
        tc_span: cfg.tc_extension * width,
        m_lo: cfg.m_bounds.0,
        m_span: cfg.m_bounds.1 - cfg.m_bounds.0,
        omega_lo: cfg.omega_bounds.0,
        omega_span: cfg.omega_bounds.1 - cfg.omega_bounds.0,
    };

    let objective = |x: &[f64]| -> f64 {
        if x.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return f64::INFINITY;
        }
        let (tc, m, omega) = scaled.unscale(x);
        if tc <= t_last + TC_MARGIN {
            return f64::INFINITY;
        }
        match slave_linear(tc, m, omega, &data) {
            Ok(fit) => fit.q,
            Err(_) => f64::INFINITY,
        }
    };

    let starts = start_points(cfg, window);
    let minimizer = NelderMead {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
        initial_step: 0.08,
    };

    let mut candidates: Vec<(f64, f64, f64, f64)> = starts
        .par_iter()
        .filter_map(|start| {
            let (x, q, _) = minimizer.minimize(objective, start);
            if !q.is_finite() {
                return None;
            }
            let (tc, m, omega) = scaled.unscale(&x);
            Some((q, tc, m, omega))
        })
        .collect();

    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut kept: Vec<(f64, f64, f64, f64)> = Vec::new();
    for cand in candidates {
        let (_, tc, m, omega) = cand;
        let duplicate = kept.iter().any(|&(_, ktc, km, komega)| {
            (tc - ktc).abs() < TC_BASIN_DAYS
                && (m - km).abs() < M_BASIN
                && (omega - komega).abs() < OMEGA_BASIN
        });
        if !duplicate {
            kept.push(cand);
            if kept.len() == cfg.keep {
                break;
            }
        }
    }

    let mut results = Vec::with_capacity(kept.len());
    for (_, tc, m, omega) in kept {
        let slaved = match slave_linear(tc, m, omega, &data) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let params = LpplParams {
            tc: origin + tc,
            m,
            omega,
            phi: slaved.phi(),
            a: slaved.a,
            b: slaved.b,
            c: slaved.c_amplitude(),
        };
        // canonical residual: recomputed from the recovered parameter set so
        // stored q and params are exactly consistent
        let q = params.rms_residual(
            &data
                .iter()
                .map(|&(t, y)| (origin + t, y))
                .collect::<Vec<_>>(),
        );
        results.push(FitResult {
            window: *window,
            params,
            q,
            damping: params.damping(),
            bubble_type: params.bubble_type(),
        });
    }
    results.sort_by(|a, b| a.q.partial_cmp(&b.q).unwrap());
    Ok(results)
}

/// Coarse-grid start points in scaled coordinates (cell centers), with
/// optional seeded jitter.
fn start_points(cfg: &FitConfig, window: &Window) -> Vec<Vec<f64>> {
    let mut rng = jitter_rng(cfg, window);
    let mut starts = Vec::with_capacity(cfg.tc_grid * cfg.m_grid * cfg.omega_grid);
    for i in 0..cfg.tc_grid {
        for j in 0..cfg.m_grid {
            for k in 0..cfg.omega_grid {
                let mut p = vec![
                    (i as f64 + 0.5) / cfg.tc_grid as f64,
                    (j as f64 + 0.5) / cfg.m_grid as f64,
                    (k as f64 + 0.5) / cfg.omega_grid as f64,
                ];
                if cfg.start_jitter > 0.0 {
                    let cells = [cfg.tc_grid, cfg.m_grid, cfg.omega_grid];
                    for (v, cell) in p.iter_mut().zip(cells) {
                        let half = cfg.start_jitter / cell as f64 * 0.5;
                        *v = (*v + rng.gen_range(-half..=half)).clamp(1e-6, 1.0);
                    }
                }
                starts.push(p);
            }
        }
    }
    starts
}

/// Jitter stream derived from the run seed and the window identity, so a fit
/// is reproducible regardless of scheduling order.
fn jitter_rng(cfg: &FitConfig, window: &Window) -> ChaCha8Rng {
    let mix = cfg
        .seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(day_number(window.t1) as u64)
        .wrapping_mul(0x2545_f491_4f6c_dd1d)
        .wrapping_add(day_number(window.t2) as u64);
    ChaCha8Rng::seed_from_u64(mix)
}
