//! Harrod's growth model: the classical exponential solution, the corrected
//! continuous model in which capital follows accumulated income, and the
//! year-by-year discrete recursion the classical model actually encodes.
//!
//! All trajectories are on the dimensionless time `t̂ = t / t*`, `t*` being
//! one year.

use thiserror::Error;

use crate::odelin::{rk4_integrate, sup_relative_deviation, OdeError, TimeGrid, Trajectory};

/// Fraction of the distance to the pole `1/σ` a corrected trajectory may cover.
pub const POLE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarrodError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("income becomes unbounded at the pole t̂ = {pole}; grid ends at {t_end}")]
    Pole { pole: f64, t_end: f64 },
    #[error("accumulation ratio alpha = {0} exceeds 1")]
    AlphaAboveOne(f64),
    #[error("trivial case: {0}")]
    Trivial(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarrodParams {
    /// Accumulation share of income, dimensionless.
    pub mu: f64,
    /// Capital/income ratio for one year of income, in years.
    pub nu_star: f64,
    /// Length of a year in physical time units.
    pub t_star: f64,
    /// Initial income intensity, money per time.
    pub y0: f64,
    /// Initial capital, money.
    pub k0: f64,
}

impl HarrodParams {
    pub fn new(mu: f64, nu_star: f64) -> Result<Self, HarrodError> {
        let p = HarrodParams { mu, nu_star, t_star: 1.0, y0: 1.0, k0: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), HarrodError> {
        // mu = 0 is admitted: it is the no-investment limit the model must reproduce.
        if !(0.0..1.0).contains(&self.mu) {
            return Err(HarrodError::Invalid(format!("mu = {} must lie in [0, 1)", self.mu)));
        }
        for (name, v) in [("nu_star", self.nu_star), ("t_star", self.t_star), ("y0", self.y0), ("k0", self.k0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HarrodError::Invalid(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.mu / self.nu_star
    }

    /// Capital/income ratio for income accumulated over `t` (same units as `t_star`).
    pub fn nu_for_interval(&self, t: f64) -> f64 {
        self.nu_star * self.t_star / t
    }
}

/// Income split into consumption, accumulation and investment.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDecomposition {
    pub y: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
}

impl FlowDecomposition {
    pub fn from_income(mu: f64, y: Vec<f64>) -> Self {
        let s: Vec<f64> = y.iter().map(|v| mu * v).collect();
        let c = y.iter().zip(&s).map(|(v, s)| v - s).collect();
        let i = s.clone();
        FlowDecomposition { y, c, s, i }
    }

    /// Largest relative violation of `Y = C + S`, `S = I`, `S = μY`.
    pub fn max_identity_residual(&self, mu: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.y.len() {
            let scale = self.y[k].abs().max(f64::MIN_POSITIVE);
            let r = [
                self.y[k] - self.c[k] - self.s[k],
                self.s[k] - self.i[k],
                self.s[k] - mu * self.y[k],
            ];
            worst = r.iter().fold(worst, |w, v| w.max(v.abs() / scale));
        }
        worst
    }

    fn into_trajectory(self, grid: TimeGrid) -> Trajectory {
        Trajectory::from_columns(
            grid,
            vec![("Y".into(), self.y), ("C".into(), self.c), ("S".into(), self.s), ("I".into(), self.i)],
        )
    }
}

/// Output of the continuous Harrod models.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRun {
    /// Columns `Y, C, S, I`.
    pub trajectory: Trajectory,
    /// Sup-relative gap between the closed form and RK4 on the same grid.
    pub rk4_deviation: f64,
}

/// `Y(t̂) = Y0 exp(μ t̂ / ν)`.
pub fn classical_trajectory(params: &HarrodParams, nu: f64, grid: &TimeGrid) -> Result<GrowthRun, HarrodError> {
    params.validate()?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(HarrodError::Invalid(format!("nu = {nu} must be positive")));
    }
    let rate = params.mu / nu;
    let y: Vec<f64> = grid.nodes().map(|t| params.y0 * (rate * t).exp()).collect();
    let y0 = y[0];
    let numeric = rk4_integrate(|_, x, dx| dx[0] = rate * x[0], &[y0], grid)?;
    let rk4_deviation = sup_relative_deviation(&numeric.column(0), &y);
    Ok(GrowthRun {
        trajectory: FlowDecomposition::from_income(params.mu, y).into_trajectory(*grid),
        rk4_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedRun {
    pub run: GrowthRun,
    /// `1/σ`, where income becomes unbounded; `None` when `μ = 0`.
    pub blowup_time: Option<f64>,
    /// `0.5/σ`, the conditionally reliable forecast horizon.
    pub forecast_horizon: Option<f64>,
}

/// `Y(t̂) = Y0 / (1 - σ t̂)^2` with `σ = μ/ν*`, valid up to the pole at `1/σ`.
pub fn corrected_trajectory(params: &HarrodParams, grid: &TimeGrid) -> Result<CorrectedRun, HarrodError> {
    params.validate()?;
    if grid.t_start < 0.0 {
        return Err(HarrodError::Invalid(format!("grid starts at {} < 0", grid.t_start)));
    }
    let sigma = params.sigma();
    let blowup_time = (sigma > 0.0).then(|| 1.0 / sigma);
    if let Some(pole) = blowup_time {
        if grid.t_end >= pole * (1.0 - POLE_GUARD) {
            return Err(HarrodError::Pole { pole, t_end: grid.t_end });
        }
    }
    let y: Vec<f64> = grid
        .nodes()
        .map(|t| params.y0 / (1.0 - sigma * t).powi(2))
        .collect();
    let numeric = rk4_integrate(
        |t, x, dx| dx[0] = 2.0 * sigma / (1.0 - sigma * t) * x[0],
        &[y[0]],
        grid,
    )?;
    let rk4_deviation = sup_relative_deviation(&numeric.column(0), &y);
    Ok(CorrectedRun {
        run: GrowthRun {
            trajectory: FlowDecomposition::from_income(params.mu, y).into_trajectory(*grid),
            rk4_deviation,
        },
        blowup_time,
        forecast_horizon: blowup_time.map(|p| 0.5 * p),
    })
}

/// Year-by-year capital and income volumes implied by a constant
/// capital/income ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    pub alpha: f64,
    pub capital: Vec<f64>,
    pub income: Vec<f64>,
    pub investment: Vec<f64>,
    /// `(year, jump)` pairs: capital is piecewise constant and its derivative
    /// is a train of impulses of these weights at the year boundaries.
    pub impulses: Vec<(usize, f64)>,
}

impl DiscretePath {
    pub fn years(&self) -> usize {
        self.capital.len() - 1
    }
}

/// `Ỹ_n / Ỹ_0` from the geometric sum, or `n + 1` when `α = 1`.
pub fn geometric_income_ratio(alpha: f64, n: usize) -> f64 {
    if alpha == 1.0 {
        (n + 1) as f64
    } else {
        (1.0 - alpha.powi(n as i32 + 1)) / (1.0 - alpha)
    }
}

/// `K_n = K_0 + α K_{n-1}`, `Ỹ_n = K_n/ν`, `Ĩ_n = μ K_n/ν`, for years `0..=n`.
pub fn discrete_path(params: &HarrodParams, nu: f64, n: usize) -> Result<DiscretePath, HarrodError> {
    params.validate()?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(HarrodError::Invalid(format!("nu = {nu} must be positive")));
    }
    let alpha = params.mu / nu;
    if alpha > 1.0 {
        return Err(HarrodError::AlphaAboveOne(alpha));
    }
    let mut capital = Vec::with_capacity(n + 1);
    capital.push(params.k0);
    for i in 1..=n {
        capital.push(params.k0 + alpha * capital[i - 1]);
    }
    let income: Vec<f64> = capital.iter().map(|k| k / nu).collect();
    let investment = capital.iter().map(|k| k * params.mu / nu).collect();
    let impulses = (1..=n).map(|i| (i, capital[i] - capital[i - 1])).collect();
    debug_assert!({
        let closed = income[0] * geometric_income_ratio(alpha, n);
        (income[n] - closed).abs() <= 1e-12 * closed.abs()
    });
    Ok(DiscretePath { alpha, capital, income, investment, impulses })
}

/// Both sides of the would-be identity between the exponential and the
/// geometric-sum income at year `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdequacyResidual {
    /// `exp(α n)`.
    pub lhs_exp: f64,
    /// `(1 - α^{n+1}) / (1 - α)`.
    pub rhs_rational: f64,
    /// `|α n - ln((1 - α^{n+1}) / (1 - α))|`.
    pub cumulative_residual: f64,
    /// `|α - ln((1 - α^{n+1}) / (1 - α^n))|`.
    pub stepwise_residual: f64,
}

impl AdequacyResidual {
    pub fn mismatch_ratio(&self) -> f64 {
        self.lhs_exp / self.rhs_rational
    }
}

pub fn adequacy_residual(alpha: f64, n: usize) -> Result<AdequacyResidual, HarrodError> {
    if n == 0 {
        return Err(HarrodError::Trivial("n = 0".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarrodError::Trivial(format!("alpha = {alpha} outside (0, 1)")));
    }
    let n_f = n as f64;
    let a_n = alpha.powi(n as i32);
    let a_n1 = a_n * alpha;
    let rhs_rational = (1.0 - a_n1) / (1.0 - alpha);
    Ok(AdequacyResidual {
        lhs_exp: (alpha * n_f).exp(),
        rhs_rational,
        cumulative_residual: (alpha * n_f - rhs_rational.ln()).abs(),
        stepwise_residual: (alpha - ((1.0 - a_n1) / (1.0 - a_n)).ln()).abs(),
    })
}
