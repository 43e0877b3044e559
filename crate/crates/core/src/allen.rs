//! Harrod-Domar, Phillips (two variants) and multiplier models written in
//! dimensional form, plus a check of whether a model's physical-time
//! trajectory survives a change of the arbitrary time scale `t0`.
//!
//! Flows are referred to reference intensities through
//! `Y = Y0·Ȳ, C = C0·C̄, I = I0·Ī, Z = Z0·Z̄` and `t = t0·t̄`, which introduces
//! `k1 = Y0/C0`, `k2 = Y0/I0`, `k3 = Y0/Z0` and `ρ = t0/t*`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::harrod::{corrected_trajectory, HarrodError, HarrodParams};
use crate::odelin::{
    analytic_solution, char_roots, polynomial_roots, rk4_integrate, sup_relative_deviation, OdeError,
    OdeSpec, Root, TimeGrid, Trajectory,
};

/// Relative deviation above which a model counts as scale dependent.
pub const SCALE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllenError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Harrod(#[from] HarrodError),
}

fn positive(name: &str, v: f64) -> Result<(), AllenError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(AllenError::Invalid(format!("{name} = {v} must be positive")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), AllenError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(AllenError::Invalid(format!("{name} = {v} must be non-negative")))
    }
}

fn share(name: &str, v: f64) -> Result<(), AllenError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(AllenError::Invalid(format!("{name} = {v} must lie in (0, 1)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllenScaling {
    /// Arbitrary time scale, physical units.
    pub t0: f64,
    /// One year, physical units.
    pub t_star: f64,
    pub y0: f64,
    pub c0: f64,
    pub i0: f64,
    pub z0: f64,
}

impl AllenScaling {
    /// Unit reference intensities, so `k1 = k2 = k3 = 1`.
    pub fn new(t0: f64, t_star: f64) -> Self {
        AllenScaling { t0, t_star, y0: 1.0, c0: 1.0, i0: 1.0, z0: 1.0 }
    }

    pub fn validate(&self) -> Result<(), AllenError> {
        positive("t0", self.t0)?;
        positive("t_star", self.t_star)?;
        positive("y0", self.y0)?;
        positive("c0", self.c0)?;
        positive("i0", self.i0)?;
        positive("z0", self.z0)
    }

    pub fn k1(&self) -> f64 {
        self.y0 / self.c0
    }

    pub fn k2(&self) -> f64 {
        self.y0 / self.i0
    }

    pub fn k3(&self) -> f64 {
        self.y0 / self.z0
    }

    pub fn rho(&self) -> f64 {
        self.t0 / self.t_star
    }

    pub fn with_t0(self, t0: f64) -> Self {
        AllenScaling { t0, ..self }
    }
}

/// Trajectory plus the RK4 cross-check of its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRun {
    pub trajectory: Trajectory,
    pub rk4_deviation: f64,
}

/// `Y(t) = Y0 exp(μ t / (ν t0))` on a physical-time grid; columns `Y, C, I`.
pub fn harrod_domar_trajectory(
    scaling: &AllenScaling,
    mu: f64,
    nu: f64,
    grid: &TimeGrid,
) -> Result<ScaledRun, AllenError> {
    scaling.validate()?;
    share("mu", mu)?;
    positive("nu", nu)?;
    let rate = mu / (nu * scaling.t0);
    let y: Vec<f64> = grid.nodes().map(|t| scaling.y0 * (rate * t).exp()).collect();
    let numeric = rk4_integrate(|_, x, dx| dx[0] = rate * x[0], &[y[0]], grid)?;
    let rk4_deviation = sup_relative_deviation(&numeric.column(0), &y);
    let c = y.iter().map(|v| (1.0 - mu) * v / scaling.k1()).collect();
    let i = y.iter().map(|v| mu * v / scaling.k2()).collect();
    Ok(ScaledRun {
        trajectory: Trajectory::from_columns(*grid, vec![("Y".into(), y), ("C".into(), c), ("I".into(), i)]),
        rk4_deviation,
    })
}

/// Which constant term the Phillips income equation carries.
///
/// The customary statement uses `b1 = κνλ`. Eliminating `I` and `Z` from the
/// three-equation system instead gives `b1 = κμλ`, the form that also
/// matches the capital equation of the stock-adjustment variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stiffness {
    #[default]
    KappaNuLambda,
    KappaMuLambda,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhillipsParams {
    /// Reaction rate of investment (inverse lag).
    pub kappa: f64,
    /// Accelerator power.
    pub nu: f64,
    /// Multiplier (share of income not consumed).
    pub mu: f64,
    /// Reaction rate of production to demand.
    pub lambda: f64,
    pub stiffness: Stiffness,
}

impl PhillipsParams {
    pub fn new(kappa: f64, nu: f64, mu: f64, lambda: f64) -> Self {
        PhillipsParams { kappa, nu, mu, lambda, stiffness: Stiffness::default() }
    }

    pub fn validate(&self) -> Result<(), AllenError> {
        positive("kappa", self.kappa)?;
        non_negative("nu", self.nu)?;
        share("mu", self.mu)?;
        positive("lambda", self.lambda)
    }

    pub fn a1(&self) -> f64 {
        self.kappa + self.mu * self.lambda - self.kappa * self.nu * self.lambda
    }

    pub fn b1(&self) -> f64 {
        match self.stiffness {
            Stiffness::KappaNuLambda => self.kappa * self.nu * self.lambda,
            Stiffness::KappaMuLambda => self.kappa * self.mu * self.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhillipsSolution {
    /// Columns `Y, dY, I, Z` on the year-normalised time `t̂`.
    pub trajectory: Trajectory,
    pub roots: Vec<Root>,
    /// `2π / |Im p|` in units of `t̂`, for complex roots.
    pub period: Option<f64>,
}

/// `Ÿ + (a1/ρ) Ẏ + (b1/ρ²) Y = 0` on `t̂`, from `Y(0)` and `Ẏ(0)`.
///
/// Investment and demand follow algebraically from the system:
/// `k2 I = μY + ρẎ/λ`, `k3 Z = Y + ρẎ/λ`.
pub fn phillips_solve(
    params: &PhillipsParams,
    scaling: &AllenScaling,
    y0: f64,
    ydot0: f64,
    grid: &TimeGrid,
) -> Result<PhillipsSolution, AllenError> {
    params.validate()?;
    scaling.validate()?;
    let rho = scaling.rho();
    let spec = OdeSpec::new(vec![1.0, params.a1() / rho, params.b1() / (rho * rho)])?;
    let roots = char_roots(&spec)?;
    let sol = analytic_solution(&spec, &[y0, ydot0], grid)?;
    let y = sol.column(0);
    let dy = sol.column(1);
    let lag = |k: usize| rho * dy[k] / params.lambda;
    let inv = (0..y.len()).map(|k| (params.mu * y[k] + lag(k)) / scaling.k2()).collect();
    let dem = (0..y.len()).map(|k| (y[k] + lag(k)) / scaling.k3()).collect();
    let period = roots
        .iter()
        .map(|r| r.value.im.abs())
        .filter(|&im| im > 0.0)
        .fold(None, |acc: Option<f64>, im| Some(acc.map_or(im, |a| a.max(im))))
        .map(|im| 2.0 * PI / im);
    Ok(PhillipsSolution {
        trajectory: Trajectory::from_columns(
            *grid,
            vec![("Y".into(), y), ("dY".into(), dy), ("I".into(), inv), ("Z".into(), dem)],
        ),
        roots,
        period,
    })
}

/// Fourth-order central differences at interior nodes (two-node margin).
fn central_derivative(v: &[f64], h: f64) -> Vec<(usize, f64)> {
    (2..v.len().saturating_sub(2))
        .map(|k| (k, (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / (12.0 * h)))
        .collect()
}

/// Largest residual of the three-equation system on a [`phillips_solve`]
/// trajectory, with time derivatives from fourth-order differences:
///
/// - `ρ İ + κ (I - (νρ/k2) Ẏ)`
/// - `ρ Ẏ + λ (Y - k3 Z)`
///
/// The demand identity `k3 Z = (1-μ) Y + k2 I` is checked pointwise.
pub fn phillips_system_residual(traj: &Trajectory, params: &PhillipsParams, scaling: &AllenScaling) -> f64 {
    let h = traj.grid().step();
    let rho = scaling.rho();
    let (k2, k3) = (scaling.k2(), scaling.k3());
    let y = traj.column(0);
    let inv = traj.column(2);
    let dem = traj.column(3);
    let dy = central_derivative(&y, h);
    let di = central_derivative(&inv, h);
    let mut worst: f64 = 0.0;
    for ((k, dyk), (_, dik)) in dy.into_iter().zip(di) {
        let r1 = rho * dik + params.kappa * (inv[k] - params.nu * rho / k2 * dyk);
        let r2 = rho * dyk + params.lambda * (y[k] - k3 * dem[k]);
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    for k in 0..y.len() {
        worst = worst.max((k3 * dem[k] - (1.0 - params.mu) * y[k] - k2 * inv[k]).abs());
    }
    worst
}

/// Roots of `t0² p³ + t0 a1 p² + b1 p`, the characteristic polynomial of the
/// capital equation in physical time.
pub fn phillips_capital_roots(params: &PhillipsParams, t0: f64) -> Result<Vec<Root>, AllenError> {
    params.validate()?;
    positive("t0", t0)?;
    Ok(polynomial_roots(&[t0 * t0, t0 * params.a1(), params.b1(), 0.0])?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BergstromSolution {
    /// Columns `K, dK`.
    pub trajectory: Trajectory,
    /// `γ + μλ - νγλ`.
    pub damping: f64,
    /// `μγλ`.
    pub stiffness: f64,
    /// The adjustment speed `γ` plays the role of the Phillips `κ`.
    pub equivalent_kappa: f64,
    pub roots: Vec<Root>,
}

/// `K̈ + (γ + μλ - νγλ) K̇ + μγλ K = 0` from `K(0), K̇(0)`.
///
/// Uses the closed form when the characteristic roots are simple and RK4
/// otherwise.
pub fn bergstrom_capital_solve(
    mu: f64,
    nu: f64,
    gamma: f64,
    lambda: f64,
    init: [f64; 2],
    grid: &TimeGrid,
) -> Result<BergstromSolution, AllenError> {
    share("mu", mu)?;
    non_negative("nu", nu)?;
    non_negative("gamma", gamma)?;
    non_negative("lambda", lambda)?;
    let damping = gamma + mu * lambda - nu * gamma * lambda;
    let stiffness = mu * gamma * lambda;
    let spec = OdeSpec::new(vec![1.0, damping, stiffness])?;
    let roots = char_roots(&spec)?;
    let sol = match analytic_solution(&spec, &init, grid) {
        Err(OdeError::RepeatedRoot { .. }) => spec.integrate(&init, grid)?,
        other => other?,
    };
    Ok(BergstromSolution {
        trajectory: sol.with_labels(vec!["K".into(), "dK".into()]),
        damping,
        stiffness,
        equivalent_kappa: gamma,
        roots,
    })
}

/// `Y(t̂) = Y0 exp(-λμ t̂)` with demand `Z = (1-μ) Y`; columns `Y, Z`.
pub fn multiplier_trajectory(mu: f64, lambda: f64, y0: f64, grid: &TimeGrid) -> Result<Trajectory, AllenError> {
    share("mu", mu)?;
    positive("lambda", lambda)?;
    let y: Vec<f64> = grid.nodes().map(|t| y0 * (-lambda * mu * t).exp()).collect();
    let z = y.iter().map(|v| (1.0 - mu) * v).collect();
    Ok(Trajectory::from_columns(*grid, vec![("Y".into(), y), ("Z".into(), z)]))
}

/// A model together with everything but the time scale.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleModel {
    HarrodDomar { scaling: AllenScaling, mu: f64, nu: f64 },
    /// `ydot0` is the derivative with respect to `t̂`.
    Phillips { params: PhillipsParams, scaling: AllenScaling, y0: f64, ydot0: f64 },
    Multiplier { mu: f64, lambda: f64, y0: f64 },
    CorrectedHarrod { params: HarrodParams },
}

impl ScaleModel {
    pub fn id(&self) -> &'static str {
        match self {
            ScaleModel::HarrodDomar { .. } => "harrod-domar",
            ScaleModel::Phillips { .. } => "phillips",
            ScaleModel::Multiplier { .. } => "multiplier",
            ScaleModel::CorrectedHarrod { .. } => "corrected-harrod",
        }
    }

    fn has_time_scale(&self) -> bool {
        !matches!(self, ScaleModel::CorrectedHarrod { .. })
    }

    /// Income on a physical-time grid under time scale `t0`.
    pub fn income(&self, t0: f64, grid: &TimeGrid) -> Result<Vec<f64>, AllenError> {
        let rescaled = |unit: f64| TimeGrid::new(grid.t_start / unit, grid.t_end / unit, grid.steps);
        Ok(match self {
            ScaleModel::HarrodDomar { scaling, mu, nu } => {
                harrod_domar_trajectory(&scaling.with_t0(t0), *mu, *nu, grid)?.trajectory.column(0)
            }
            ScaleModel::Phillips { params, scaling, y0, ydot0 } => {
                let g = rescaled(scaling.t_star)?;
                phillips_solve(params, &scaling.with_t0(t0), *y0, *ydot0, &g)?.trajectory.column(0)
            }
            ScaleModel::Multiplier { mu, lambda, y0 } => {
                positive("t0", t0)?;
                multiplier_trajectory(*mu, *lambda, *y0, &rescaled(t0)?)?.column(0)
            }
            ScaleModel::CorrectedHarrod { params } => {
                corrected_trajectory(params, &rescaled(params.t_star)?)?.run.trajectory.column(0)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleVerdict {
    ScaleDependent,
    ScaleInvariant,
}

impl ScaleVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScaleVerdict::ScaleDependent => "scale_dependent",
            ScaleVerdict::ScaleInvariant => "scale_invariant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleInvarianceReport {
    pub model: &'static str,
    pub t0_a: f64,
    pub t0_b: f64,
    pub max_rel_deviation: f64,
    pub verdict: ScaleVerdict,
    /// Set when the model has no time-scale parameter at all.
    pub trivially_invariant: bool,
    pub income_a: Vec<f64>,
    pub income_b: Vec<f64>,
}

/// Runs `model` under `t0_a` and `t0_b` on the same physical-time grid and
/// compares incomes node by node, relative to the larger magnitude.
pub fn scale_invariance_check(
    model: &ScaleModel,
    t0_a: f64,
    t0_b: f64,
    grid: &TimeGrid,
) -> Result<ScaleInvarianceReport, AllenError> {
    positive("t0_a", t0_a)?;
    positive("t0_b", t0_b)?;
    if t0_a == t0_b {
        return Err(AllenError::Invalid("t0_a and t0_b must differ".into()));
    }
    let (a, b) = rayon::join(|| model.income(t0_a, grid), || model.income(t0_b, grid));
    let (income_a, income_b) = (a?, b?);
    let max_rel_deviation = income_a
        .iter()
        .zip(&income_b)
        .map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max);
    let verdict = if max_rel_deviation > SCALE_THRESHOLD {
        ScaleVerdict::ScaleDependent
    } else {
        ScaleVerdict::ScaleInvariant
    };
    Ok(ScaleInvarianceReport {
        model: model.id(),
        t0_a,
        t0_b,
        max_rel_deviation,
        verdict,
        trivially_invariant: !model.has_time_scale(),
        income_a,
        income_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(t_end: f64, steps: usize) -> TimeGrid {
        TimeGrid::new(0.0, t_end, steps).unwrap()
    }

    fn reference() -> PhillipsParams {
        PhillipsParams::new(4.0, 0.6, 0.5, 1.0)
    }

    #[test]
    fn harrod_domar_closed_form_and_scale() {
        let s = AllenScaling::new(1.0, 1.0);
        let run = harrod_domar_trajectory(&s, 0.5, 1.0, &grid(1.0, 1000)).unwrap();
        let y = run.trajectory.column(0);
        assert_eq!(y[0], 1.0);
        assert_relative_eq!(*y.last().unwrap(), 0.5f64.exp(), epsilon = 1e-14);
        assert!(run.rk4_deviation < 1e-10);
        let doubled = harrod_domar_trajectory(&s.with_t0(2.0), 0.5, 1.0, &grid(1.0, 10)).unwrap();
        assert_relative_eq!(*doubled.trajectory.column(0).last().unwrap(), 0.25f64.exp(), epsilon = 1e-14);
        // Y = k1 C + k2 I
        let t = &run.trajectory;
        for row in t.rows() {
            assert_relative_eq!(row[0], row[1] + row[2], max_relative = 1e-14);
        }
    }

    #[test]
    fn phillips_reference_coefficients() {
        let p = reference();
        assert_relative_eq!(p.a1(), 2.1, epsilon = 1e-14);
        assert_relative_eq!(p.b1(), 2.4, epsilon = 1e-14);
        let sol = phillips_solve(&p, &AllenScaling::new(1.0, 1.0), 1.0, 0.0, &grid(10.0, 100)).unwrap();
        assert!(sol.roots.iter().all(|r| r.value.im != 0.0 && r.value.re < 0.0));
        let im = (2.4f64 - 1.05 * 1.05).sqrt();
        assert_relative_eq!(sol.period.unwrap(), 2.0 * PI / im, max_relative = 1e-12);
    }

    #[test]
    fn phillips_without_accelerator_settles() {
        let p = PhillipsParams::new(4.0, 0.0, 0.5, 1.0);
        assert_eq!(p.b1(), 0.0);
        let sol = phillips_solve(&p, &AllenScaling::new(1.0, 1.0), 1.0, -0.5, &grid(20.0, 400)).unwrap();
        assert!(sol.roots.iter().any(|r| r.value.norm() < 1e-14));
        assert_eq!(sol.period, None);
        let y = sol.trajectory.column(0);
        // Y = 1 - 0.5 (1 - e^{-a t}) / a with a = a1 = 4.5
        assert_relative_eq!(*y.last().unwrap(), 1.0 - 0.5 / 4.5, max_relative = 1e-10);
    }

    #[test]
    fn phillips_period_scales_with_rho() {
        let p = reference();
        let g = grid(5.0, 10);
        let one = phillips_solve(&p, &AllenScaling::new(1.0, 1.0), 1.0, 0.0, &g).unwrap();
        let two = phillips_solve(&p, &AllenScaling::new(2.0, 1.0), 1.0, 0.0, &g).unwrap();
        assert_relative_eq!(two.period.unwrap(), 2.0 * one.period.unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn phillips_trajectory_satisfies_system_when_stiffness_is_derived() {
        let s = AllenScaling { y0: 2.0, i0: 0.5, z0: 1.5, ..AllenScaling::new(1.3, 1.0) };
        let p = PhillipsParams { stiffness: Stiffness::KappaMuLambda, ..reference() };
        let sol = phillips_solve(&p, &s, 1.0, 0.3, &grid(5.0, 2000)).unwrap();
        let r = phillips_system_residual(&sol.trajectory, &p, &s);
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn printed_stiffness_violates_system_unless_nu_equals_mu() {
        let s = AllenScaling::new(1.0, 1.0);
        let p = reference();
        let sol = phillips_solve(&p, &s, 1.0, 0.0, &grid(5.0, 2000)).unwrap();
        assert!(phillips_system_residual(&sol.trajectory, &p, &s) > 1e-2);
        let equal = PhillipsParams::new(4.0, 0.5, 0.5, 1.0);
        let sol = phillips_solve(&equal, &s, 1.0, 0.0, &grid(5.0, 2000)).unwrap();
        assert!(phillips_system_residual(&sol.trajectory, &equal, &s) < 1e-6);
    }

    #[test]
    fn capital_roots_contain_zero_and_income_roots() {
        let p = reference();
        let cubic = phillips_capital_roots(&p, 1.0).unwrap();
        assert!(cubic.iter().any(|r| r.value.norm() < 1e-14));
        let quad = phillips_solve(&p, &AllenScaling::new(1.0, 1.0), 1.0, 0.0, &grid(1.0, 4)).unwrap();
        for q in &quad.roots {
            assert!(cubic.iter().any(|c| (c.value - q.value).norm() < 1e-10));
        }
        let halved = phillips_capital_roots(&p, 2.0).unwrap();
        for q in &quad.roots {
            assert!(halved.iter().any(|c| (c.value - q.value / 2.0).norm() < 1e-12));
        }
    }

    #[test]
    fn bergstrom_cases() {
        let b = bergstrom_capital_solve(0.5, 0.6, 4.0, 1.0, [1.0, 0.0], &grid(1.0, 10)).unwrap();
        assert_relative_eq!(b.damping, 2.1, epsilon = 1e-14);
        assert_relative_eq!(b.stiffness, 2.0, epsilon = 1e-14);
        assert_eq!(b.equivalent_kappa, 4.0);

        // γ = 1, λ = 1, μ = 0.5, ν = 1.5: undamped with ω² = 0.5
        let g = grid(2.0 * PI / 0.5f64.sqrt(), 500);
        let b = bergstrom_capital_solve(0.5, 1.5, 1.0, 1.0, [1.0, 0.0], &g).unwrap();
        assert!(b.damping.abs() < 1e-15);
        let k = b.trajectory.column(0);
        assert_relative_eq!(*k.last().unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(k[250], -1.0, epsilon = 1e-10);

        // γ = 0: K̈ + μλ K̇ = 0, so K̇ decays and K levels off at K0 + K̇0/(μλ)
        let b = bergstrom_capital_solve(0.5, 0.6, 0.0, 1.0, [1.0, 1.0], &grid(40.0, 400)).unwrap();
        assert_eq!(b.stiffness, 0.0);
        assert_relative_eq!(*b.trajectory.column(0).last().unwrap(), 3.0, max_relative = 1e-8);
    }

    #[test]
    fn bergstrom_repeated_root_falls_back_to_rk4() {
        // damping 2, stiffness 1: double root at -1
        // γ + μλ - νγλ = 2 and μγλ = 1 with μ = 0.5, λ = 1 ⇒ γ = 2, ν = 0.25
        let b = bergstrom_capital_solve(0.5, 0.25, 2.0, 1.0, [1.0, 0.0], &grid(1.0, 1000)).unwrap();
        assert_eq!(b.roots[0].multiplicity, 2);
        // (1 + t) e^{-t}
        assert_relative_eq!(*b.trajectory.column(0).last().unwrap(), 2.0 * (-1f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn multiplier_decay() {
        let y = multiplier_trajectory(0.5, 1.0, 1.0, &grid(2.0, 20)).unwrap();
        assert_eq!(y.column(0)[0], 1.0);
        assert_relative_eq!(*y.column(0).last().unwrap(), (-1f64).exp(), epsilon = 1e-15);
        let fast = multiplier_trajectory(0.999_999, 1.0, 1.0, &grid(2.0, 20)).unwrap();
        assert_relative_eq!(*fast.column(0).last().unwrap(), (-2f64).exp(), max_relative = 1e-5);
    }

    #[test]
    fn scale_check_verdicts() {
        let g = grid(1.0, 100);
        let hd = ScaleModel::HarrodDomar { scaling: AllenScaling::new(1.0, 1.0), mu: 0.5, nu: 1.0 };
        let r = scale_invariance_check(&hd, 1.0, 2.0, &g).unwrap();
        assert_eq!(r.verdict, ScaleVerdict::ScaleDependent);
        assert_relative_eq!(r.max_rel_deviation, 1.0 - (-0.25f64).exp(), epsilon = 1e-12);
        assert!((r.max_rel_deviation - 0.221).abs() < 1e-3);

        let ph = ScaleModel::Phillips {
            params: reference(),
            scaling: AllenScaling::new(1.0, 1.0),
            y0: 1.0,
            ydot0: 0.0,
        };
        let r = scale_invariance_check(&ph, 1.0, 2.0, &g).unwrap();
        assert_eq!(r.verdict, ScaleVerdict::ScaleDependent);

        let mult = ScaleModel::Multiplier { mu: 0.5, lambda: 1.0, y0: 1.0 };
        assert_eq!(scale_invariance_check(&mult, 1.0, 2.0, &g).unwrap().verdict, ScaleVerdict::ScaleDependent);

        let ch = ScaleModel::CorrectedHarrod { params: HarrodParams::new(0.5, 10.0).unwrap() };
        let r = scale_invariance_check(&ch, 1.0, 2.0, &grid(15.0, 100)).unwrap();
        assert_eq!(r.verdict, ScaleVerdict::ScaleInvariant);
        assert!(r.trivially_invariant);
        assert_eq!(r.max_rel_deviation, 0.0);

        assert!(scale_invariance_check(&hd, 1.0, 1.0, &g).is_err());
    }

    proptest! {
        #[test]
        fn classical_models_always_scale_dependent(
            kappa in 0.2..5.0f64, nu in 0.1..2.0f64, mu in 0.05..0.95f64, lambda in 0.2..3.0f64,
            t0 in 0.5..2.0f64,
        ) {
            let g = grid(t0, 200);
            let hd = ScaleModel::HarrodDomar { scaling: AllenScaling::new(t0, 1.0), mu, nu };
            let r = scale_invariance_check(&hd, t0, 2.0 * t0, &g).unwrap();
            prop_assert_eq!(r.verdict, ScaleVerdict::ScaleDependent);
            let ph = ScaleModel::Phillips {
                params: PhillipsParams::new(kappa, nu, mu, lambda),
                scaling: AllenScaling::new(t0, 1.0),
                y0: 1.0,
                ydot0: 0.0,
            };
            match scale_invariance_check(&ph, t0, 2.0 * t0, &g) {
                Ok(r) => prop_assert_eq!(r.verdict, ScaleVerdict::ScaleDependent),
                Err(AllenError::Ode(OdeError::RepeatedRoot { .. })) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn multiplier_is_decreasing(mu in 0.01..0.99f64, lambda in 0.01..5.0f64, y0 in 0.1..10.0f64) {
            let y = multiplier_trajectory(mu, lambda, y0, &grid(10.0, 50)).unwrap().column(0);
            prop_assert!(y.windows(2).all(|w| w[1] < w[0]));
        }

        #[test]
        fn capital_cubic_matches_income_quadratic(
            kappa in 0.2..5.0f64, nu in 0.1..2.0f64, mu in 0.05..0.95f64, lambda in 0.2..3.0f64,
        ) {
            let p = PhillipsParams::new(kappa, nu, mu, lambda);
            let quad = polynomial_roots(&[1.0, p.a1(), p.b1()]).unwrap();
            prop_assume!(quad.iter().all(|r| r.multiplicity == 1));
            let cubic = phillips_capital_roots(&p, 1.0).unwrap();
            for q in &quad {
                prop_assert!(cubic.iter().any(|c| (c.value - q.value).norm() < 1e-10));
            }
        }
    }
}
