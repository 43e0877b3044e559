//! Simplified long-wave model
//!
//! ```text
//! ẋ = -p (x - q y)
//! ẏ = -r (y - s z),   z = x - y
//! ```
//!
//! Eliminating `z` leaves a linear 2×2 system whose eigenvalues decide
//! whether the cycle is undamped, damped, growing or absent.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix2};
use thiserror::Error;

use crate::odelin::{rk4_integrate, OdeError, TimeGrid, Trajectory};

/// Real parts within this distance of zero count as undamped.
pub const RE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LongWaveError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongWaveParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl LongWaveParams {
    /// `q = 1`, `s = -2`.
    pub fn with_rates(p: f64, r: f64) -> Self {
        LongWaveParams { p, q: 1.0, r, s: -2.0 }
    }

    pub fn validate(&self) -> Result<(), LongWaveError> {
        if ![self.p, self.q, self.r, self.s].iter().all(|v| v.is_finite()) {
            return Err(LongWaveError::Invalid("coefficients must be finite".into()));
        }
        if self.p < 0.0 || self.r < 0.0 {
            return Err(LongWaveError::Invalid(format!("rates p = {}, r = {} must be non-negative", self.p, self.r)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    UndampedPeriodic,
    DampedOscillatory,
    GrowingOscillatory,
    NonOscillatory,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::UndampedPeriodic => "undamped_periodic",
            Regime::DampedOscillatory => "damped_oscillatory",
            Regime::GrowingOscillatory => "growing_oscillatory",
            Regime::NonOscillatory => "non_oscillatory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleReport {
    pub eigenvalues: [Complex<f64>; 2],
    pub regime: Regime,
    /// `2π / |Im λ|`, in the time unit of `p` and `r`.
    pub period_years: Option<f64>,
}

/// The system matrix in `(x, y)` after substituting `z = x - y`.
pub fn lw_matrix(params: &LongWaveParams) -> Matrix2<f64> {
    let LongWaveParams { p, q, r, s } = *params;
    Matrix2::new(-p, p * q, r * s, -r * (1.0 + s))
}

pub fn lw_classify(params: &LongWaveParams) -> CycleReport {
    let m = lw_matrix(params);
    let half_trace = 0.5 * m.trace();
    let det = m.determinant();
    let disc = half_trace * half_trace - det;
    let (eigenvalues, im) = if disc < 0.0 {
        let w = (-disc).sqrt();
        ([Complex::new(half_trace, w), Complex::new(half_trace, -w)], w)
    } else {
        let w = disc.sqrt();
        ([Complex::new(half_trace + w, 0.0), Complex::new(half_trace - w, 0.0)], 0.0)
    };
    let regime = if im == 0.0 {
        Regime::NonOscillatory
    } else if half_trace.abs() <= RE_TOL {
        Regime::UndampedPeriodic
    } else if half_trace < 0.0 {
        Regime::DampedOscillatory
    } else {
        Regime::GrowingOscillatory
    };
    CycleReport { eigenvalues, regime, period_years: (im > 0.0).then(|| 2.0 * PI / im) }
}

/// RK4 on `(x, y)`; columns `x, y, z`.
pub fn lw_simulate(params: &LongWaveParams, x0: f64, y0: f64, grid: &TimeGrid) -> Result<Trajectory, LongWaveError> {
    params.validate()?;
    let m = lw_matrix(params);
    let sol = rk4_integrate(
        |_, u, du| {
            du[0] = m[(0, 0)] * u[0] + m[(0, 1)] * u[1];
            du[1] = m[(1, 0)] * u[0] + m[(1, 1)] * u[1];
        },
        &[x0, y0],
        grid,
    )?;
    let x = sol.column(0);
    let y = sol.column(1);
    let z = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    Ok(Trajectory::from_columns(*grid, vec![("x".into(), x), ("y".into(), y), ("z".into(), z)]))
}

/// Mean spacing of upward zero crossings of `v - mean(v)`, located by linear
/// interpolation. Needs at least two crossings.
pub fn estimate_period(times: &[f64], v: &[f64]) -> Option<f64> {
    if v.is_empty() || times.len() != v.len() {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let crossings: Vec<f64> = (1..v.len())
        .filter_map(|k| {
            let (a, b) = (v[k - 1] - mean, v[k] - mean);
            (a < 0.0 && b >= 0.0).then(|| times[k - 1] + (times[k] - times[k - 1]) * a / (a - b))
        })
        .collect();
    if crossings.len() < 2 {
        return None;
    }
    Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn matrix_examples() {
        let m = lw_matrix(&LongWaveParams { p: 1.0, q: 1.0, r: 1.0, s: 0.0 });
        assert_eq!(m, Matrix2::new(-1.0, 1.0, 0.0, -1.0));
        let m = lw_matrix(&LongWaveParams { p: 0.3, q: 2.0, r: 0.5, s: -2.0 });
        assert_eq!((m[(1, 0)], m[(1, 1)]), (-1.0, 0.5));
        let m = lw_matrix(&LongWaveParams { p: 0.0, q: 2.0, r: 0.5, s: -2.0 });
        assert_eq!((m[(0, 0)], m[(0, 1)]), (0.0, 0.0));
    }

    #[test]
    fn quoted_periods() {
        let c = lw_classify(&LongWaveParams::with_rates(0.10, 0.10));
        assert_eq!(c.regime, Regime::UndampedPeriodic);
        assert_relative_eq!(c.period_years.unwrap(), 2.0 * PI / 0.10, max_relative = 1e-12);
        assert!((c.period_years.unwrap() - 62.8).abs() < 0.1);
        let c = lw_classify(&LongWaveParams::with_rates(0.34, 0.34));
        assert!((c.period_years.unwrap() - 18.48).abs() < 0.01);
        let c = lw_classify(&LongWaveParams::with_rates(0.12, 0.12));
        assert!((c.period_years.unwrap() - 52.36).abs() < 0.01);
    }

    #[test]
    fn trace_sign_decides_damping() {
        // trace = r - p for s = -2
        assert_eq!(lw_classify(&LongWaveParams::with_rates(0.12, 0.10)).regime, Regime::DampedOscillatory);
        assert_eq!(lw_classify(&LongWaveParams::with_rates(0.10, 0.12)).regime, Regime::GrowingOscillatory);
        let c = lw_classify(&LongWaveParams { p: 1.0, q: 1.0, r: 1.0, s: 0.0 });
        assert_eq!(c.regime, Regime::NonOscillatory);
        assert_eq!(c.period_years, None);
    }

    #[test]
    fn trivial_simulations() {
        let g = TimeGrid::new(0.0, 50.0, 100).unwrap();
        let t = lw_simulate(&LongWaveParams::with_rates(0.1, 0.1), 0.0, 0.0, &g).unwrap();
        assert!(t.rows().iter().all(|r| r.iter().all(|v| *v == 0.0)));
        let t = lw_simulate(&LongWaveParams::with_rates(0.0, 0.0), 0.7, -0.2, &g).unwrap();
        assert!(t.rows().iter().all(|r| r == &[0.7, -0.2, 0.7 - -0.2]));
    }

    #[test]
    fn orbit_closes_after_one_period() {
        let g = TimeGrid::new(0.0, 126.0, 12_600).unwrap();
        let t = lw_simulate(&LongWaveParams::with_rates(0.10, 0.10), 1.0, 0.0, &g).unwrap();
        let x = t.column(0);
        let k = (2.0 * PI / 0.10 / g.step()).round() as usize;
        assert!((x[k] - 1.0).abs() < 0.01, "x = {}", x[k]);
        let est = estimate_period(&t.times(), &x).unwrap();
        assert_relative_eq!(est, 2.0 * PI / 0.10, max_relative = 0.02);
    }

    #[test]
    fn period_estimate_needs_two_crossings() {
        assert_eq!(estimate_period(&[0.0, 1.0], &[1.0, 1.0]), None);
        assert_eq!(estimate_period(&[], &[]), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]
        #[test]
        fn undamped_period_and_closure(p in 0.05..0.5f64, q in 0.6..2.0f64) {
            let params = LongWaveParams { p, q, r: p, s: -2.0 };
            let c = lw_classify(&params);
            prop_assert_eq!(c.regime, Regime::UndampedPeriodic);
            prop_assert!(lw_matrix(&params).trace().abs() < 1e-12);
            let period = c.period_years.unwrap();
            let steps = 20_000;
            let g = TimeGrid::new(0.0, 3.0 * period, steps).unwrap();
            let t = lw_simulate(&params, 1.0, 0.0, &g).unwrap();
            let x = t.column(0);
            let est = estimate_period(&t.times(), &x).unwrap();
            prop_assert!((est / period - 1.0).abs() < 0.02, "{est} vs {period}");
            let k = (period / g.step()).round() as usize;
            let row = &t.rows()[k];
            let gap = ((row[0] - 1.0).powi(2) + row[1].powi(2)).sqrt();
            prop_assert!(gap < 0.01, "closure gap {gap}");
        }

        #[test]
        fn undamped_iff_zero_trace(p in 0.01..1.0f64, r in 0.01..1.0f64, q in 0.6..2.0f64, s in -3.0..-1.5f64) {
            let params = LongWaveParams { p, q, r, s };
            let c = lw_classify(&params);
            let trace = -p - r * (1.0 + s);
            if c.regime == Regime::UndampedPeriodic {
                prop_assert!(trace.abs() <= 2.0 * RE_TOL);
            } else if c.regime != Regime::NonOscillatory {
                prop_assert!(trace.abs() > 1e-12);
            }
        }
    }
}
