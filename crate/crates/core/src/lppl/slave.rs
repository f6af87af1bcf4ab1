//! Least-squares slaving of the linear parameters.
//!
//! For a fixed nonlinear triple `(tc, m, omega)` the model is linear in
//! `(A, B, C1, C2)` after expanding the phase:
//!
//! ```text
//! ln p ~ A + B f + C1 f cos(omega ln(tc-t)) + C2 f sin(omega ln(tc-t)),
//! f = (tc-t)^m
//! ```
//!
//! The amplitude and phase are recovered as `C = sqrt(C1^2 + C2^2)`,
//! `phi = atan2(C2, C1)`.

use nalgebra::{DMatrix, DVector};

use super::FitError;

/// Minimum observations accepted by [`slave_linear`].
pub const MIN_SLAVE_OBSERVATIONS: usize = 8;

/// Relative tolerance below which the triangular factor is considered
/// rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

/// Linear parameters slaved to one nonlinear triple, with the RMS residual
/// of the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlavedFit {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square residual of ln-price.
    pub q: f64,
}

impl SlavedFit {
    /// Oscillation amplitude `C >= 0`.
    pub fn c_amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }

    /// Phase normalized to `[0, 2*pi)`.
    pub fn phi(&self) -> f64 {
        let phi = self.c2.atan2(self.c1);
        if phi < 0.0 {
            phi + 2.0 * std::f64::consts::PI
        } else {
            phi
        }
    }
}

/// Solve the slaved ordinary-least-squares problem for one nonlinear triple
/// over `(t, ln price)` observations.
pub fn slave_linear(
    tc: f64,
    m: f64,
    omega: f64,
    window_data: &[(f64, f64)],
) -> Result<SlavedFit, FitError> {
    let n = window_data.len();
    if n < MIN_SLAVE_OBSERVATIONS {
        return Err(FitError::TooFewObservations {
            got: n,
            need: MIN_SLAVE_OBSERVATIONS,
        });
    }
    let t_last = window_data
        .iter()
        .map(|&(t, _)| t)
        .fold(f64::NEG_INFINITY, f64::max);
    if tc <= t_last {
        return Err(FitError::CriticalTimeInsideWindow { tc, t_last });
    }

    let mut design = DMatrix::<f64>::zeros(n, 4);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, &(t, lnp)) in window_data.iter().enumerate() {
        let dt = tc - t;
        let ldt = dt.ln();
        let f = (m * ldt).exp();
        let (s, c) = (omega * ldt).sin_cos();
        design[(i, 0)] = 1.0;
        design[(i, 1)] = f;
        design[(i, 2)] = f * c;
        design[(i, 3)] = f * s;
        rhs[i] = lnp;
    }

    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = (0..4).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    if diag_max == 0.0 || (0..4).any(|i| r[(i, i)].abs() < RANK_TOLERANCE * diag_max) {
        return Err(FitError::DegenerateDesign);
    }
    let qtb = qr.q().transpose() * &rhs;
    let beta = r
        .solve_upper_triangular(&qtb)
        .ok_or(FitError::DegenerateDesign)?;

    let residual = &rhs - &design * &beta;
    let q = (residual.norm_squared() / n as f64).sqrt();

    Ok(SlavedFit {
        a: beta[0],
        b: beta[1],
        c1: beta[2],
        c2: beta[3],
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lppl::LpplParams;

    #[test]
    fn recovers_generator_parameters() {
        // Noiseless data from the model itself is the oracle: with the true
        // (tc, m, omega) the slaved solution must reproduce (A, B, C, phi).
        let truth = LpplParams {
            tc: 400.0,
            m: 0.45,
            omega: 7.5,
            phi: 1.2,
            a: 5.0,
            b: -0.6,
            c: 0.04,
        };
        let data: Vec<(f64, f64)> = (0..350)
            .map(|i| {
                let t = i as f64;
                (t, truth.value_unchecked(t))
            })
            .collect();
        let fit = slave_linear(truth.tc, truth.m, truth.omega, &data).unwrap();
        assert!((fit.a - truth.a).abs() / truth.a.abs() < 1e-9, "A: {}", fit.a);
        assert!((fit.b - truth.b).abs() / truth.b.abs() < 1e-9, "B: {}", fit.b);
        assert!(
            (fit.c_amplitude() - truth.c).abs() / truth.c < 1e-9,
            "C: {}",
            fit.c_amplitude()
        );
        assert!((fit.phi() - truth.phi).abs() < 1e-9, "phi: {}", fit.phi());
        assert!(fit.q < 1e-9, "q: {}", fit.q);
    }

    #[test]
    fn constant_series_fits_exactly() {
        let a0 = 2.5;
        let data: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, a0)).collect();
        let fit = slave_linear(100.0, 0.5, 6.0, &data).unwrap();
        assert!((fit.a - a0).abs() < 1e-10);
        assert!(fit.b.abs() < 1e-10);
        assert!(fit.c1.abs() < 1e-10);
        assert!(fit.c2.abs() < 1e-10);
        assert!(fit.q < 1e-12);
    }

    #[test]
    fn too_few_observations() {
        let data: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 1.0)).collect();
        assert!(matches!(
            slave_linear(100.0, 0.5, 6.0, &data),
            Err(FitError::TooFewObservations { got: 4, need: 8 })
        ));
    }

    #[test]
    fn tc_inside_window_rejected() {
        let data: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 1.0)).collect();
        assert!(matches!(
            slave_linear(10.0, 0.5, 6.0, &data),
            Err(FitError::CriticalTimeInsideWindow { .. })
        ));
    }

    #[test]
    fn degenerate_design_detected() {
        // m = 0 makes f identical to the intercept column.
        let data: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, (i as f64).sin())).collect();
        assert!(matches!(
            slave_linear(100.0, 0.0, 6.0, &data),
            Err(FitError::DegenerateDesign)
        ));
    }

    #[test]
    fn first_order_optimality_of_linear_subproblem() {
        // Perturbing any slaved coordinate must not decrease the residual.
        let truth = LpplParams {
            tc: 300.0,
            m: 0.6,
            omega: 9.0,
            phi: 0.7,
            a: 4.0,
            b: -0.3,
            c: 0.02,
        };
        let data: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let t = i as f64;
                // deterministic wiggle so the residual is nonzero
                (t, truth.value_unchecked(t) + 1e-3 * (0.13 * t).sin())
            })
            .collect();
        let fit = slave_linear(truth.tc, truth.m, truth.omega, &data).unwrap();
        let q0 = rms_q(&data, truth.tc, truth.m, truth.omega, fit.a, fit.b, fit.c1, fit.c2);
        for delta in [1e-6, -1e-6] {
            for coord in 0..4 {
                let mut p = [fit.a, fit.b, fit.c1, fit.c2];
                p[coord] += delta;
                let q = rms_q(&data, truth.tc, truth.m, truth.omega, p[0], p[1], p[2], p[3]);
                assert!(q >= q0, "coord {coord} delta {delta}: {q} < {q0}");
            }
        }
    }

    /// RMS residual in the (A, B, C1, C2) parameterization, used as the
    /// independent check of least-squares optimality.
    pub(crate) fn rms_q(
        data: &[(f64, f64)],
        tc: f64,
        m: f64,
        omega: f64,
        a: f64,
        b: f64,
        c1: f64,
        c2: f64,
    ) -> f64 {
        let sse: f64 = data
            .iter()
            .map(|&(t, y)| {
                let dt = tc - t;
                let ldt = dt.ln();
                let f = (m * ldt).exp();
                let (s, c) = (omega * ldt).sin_cos();
                let r = y - (a + b * f + c1 * f * c + c2 * f * s);
                r * r
            })
            .sum();
        (sse / data.len() as f64).sqrt()
    }
}
