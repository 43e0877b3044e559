//! Integral equations of the second kind on `[0, 1]`
//!
//! ```text
//! φ(t) = λ ∫₀¹ k(t, η) φ(η) dη + q(t)
//! ```
//!
//! Reduction of constant-coefficient ODEs to this form, a Nyström solver
//! with Simpson, Gauss-Legendre or trapezoid nodes, resolvents, characteristic
//! numbers with eigenfunctions, sweeps over a kernel parameter, and the
//! degenerate kernel whose homogeneous equation is solvable for every value
//! of its parameter.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::solve_checked;
use crate::odelin::{derivative_labels, OdeError, OdeSpec, Sampler, TimeGrid, Trajectory};

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Default relative distance between `1/λ` and an operator eigenvalue below
/// which a solve is refused.
pub const SPECTRUM_GUARD: f64 = 1e-8;
/// Eigenvalues of the weighted kernel matrix at or below this magnitude are
/// treated as numerical rank deficiency.
pub const DISCARD_THRESHOLD: f64 = 1e-10;
/// Bound on `‖φ - λ K W φ‖∞ / ‖φ‖∞` for a reported eigenpair.
pub const EIGEN_RESIDUAL: f64 = 1e-6;
/// Relative singular-value gap that flags a parameter as singular.
pub const SINGULAR_RATIO: f64 = 1e-6;
/// Tolerance on the orthonormality conditions of the degenerate kernel.
pub const SIDE_CONDITION_TOL: f64 = 1e-8;
pub const DEFAULT_NODES: usize = 201;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FredholmError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("kernel is not finite at (t, η) = ({t}, {eta})")]
    NonFiniteKernel { t: f64, eta: f64 },
    #[error("λ = {lambda} is too close to the characteristic number {nearest}")]
    NearCharacteristic { lambda: f64, nearest: Complex<f64> },
    #[error("side conditions fail: ∫ρ² = {norm}, ∫ρσ = {cross}")]
    SideConditions { norm: f64, cross: f64 },
    #[error("boundary conditions: {0}")]
    Boundary(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// A kernel `k(t, η)` on `[0, 1]²`, optionally with a separable form
/// `Σ g_i(t) h_i(η)`.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    eval: KernelFn,
    params: Vec<(String, f64)>,
    factors: Option<Vec<(Sampler, Sampler)>>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("rank", &self.factors.as_ref().map(Vec::len))
            .finish()
    }
}

fn sampler(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Sampler {
    Arc::new(f)
}

impl KernelSpec {
    pub fn from_fn(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        KernelSpec { name: name.into(), eval: Arc::new(f), params: Vec::new(), factors: None }
    }

    pub fn separable(name: impl Into<String>, factors: Vec<(Sampler, Sampler)>) -> Self {
        let pairs = factors.clone();
        let eval: KernelFn = Arc::new(move |t, eta| pairs.iter().map(|(g, h)| g(t) * h(eta)).sum());
        KernelSpec { name: name.into(), eval, params: Vec::new(), factors: Some(factors) }
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.push((name.into(), value));
        self
    }

    /// `t + η`.
    pub fn t_plus_eta() -> Self {
        KernelSpec::separable(
            "t-plus-eta",
            vec![(sampler(|t| t), sampler(|_| 1.0)), (sampler(|_| 1.0), sampler(|e| e))],
        )
    }

    /// `exp(t - η)`.
    pub fn exp_diff() -> Self {
        KernelSpec::separable("exp-diff", vec![(sampler(f64::exp), sampler(|e: f64| (-e).exp()))])
    }

    pub fn zero() -> Self {
        KernelSpec::separable("zero", Vec::new())
    }

    /// `g(t) h(η)`.
    pub fn product(name: impl Into<String>, g: Sampler, h: Sampler) -> Self {
        KernelSpec::separable(name, vec![(g, h)])
    }

    /// `ρ(t) ρ(η) + μ σ(t) ρ(η)`.
    pub fn degenerate(rho: Sampler, sigma: Sampler, mu: f64) -> Self {
        let scaled = sigma.clone();
        KernelSpec::separable(
            "degenerate",
            vec![(rho.clone(), rho.clone()), (sampler(move |t| mu * scaled(t)), rho)],
        )
        .with_param("mu", mu)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn eval(&self, t: f64, eta: f64) -> f64 {
        (self.eval)(t, eta)
    }

    pub fn evaluator(&self) -> KernelFn {
        self.eval.clone()
    }

    pub fn factors(&self) -> Option<&[(Sampler, Sampler)]> {
        self.factors.as_deref()
    }

    /// Largest gap between the evaluator and the separable form at `points`.
    pub fn separable_mismatch(&self, points: &[(f64, f64)]) -> Option<f64> {
        let factors = self.factors.as_ref()?;
        Some(
            points
                .iter()
                .map(|&(t, e)| (self.eval(t, e) - factors.iter().map(|(g, h)| g(t) * h(e)).sum::<f64>()).abs())
                .fold(0.0, f64::max),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Composite Simpson, odd node count.
    Simpson,
    GaussLegendre,
    /// Composite trapezoid; second order, tolerates kernels that jump on the
    /// diagonal when the diagonal value is the mean of the one-sided limits.
    Trapezoid,
}

impl QuadratureRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuadratureRule::Simpson => "simpson",
            QuadratureRule::GaussLegendre => "gauss-legendre",
            QuadratureRule::Trapezoid => "trapezoid",
        }
    }

    /// Nodes strictly increasing in `[0, 1]`, weights summing to 1.
    pub fn nodes_weights(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>), FredholmError> {
        match self {
            QuadratureRule::Simpson => {
                if n < 3 || n.is_multiple_of(2) {
                    return Err(FredholmError::Invalid(format!("Simpson needs an odd node count ≥ 3, got {n}")));
                }
                let h = 1.0 / (n - 1) as f64;
                let nodes = uniform_nodes(n);
                let weights = (0..n)
                    .map(|i| {
                        let c = if i == 0 || i == n - 1 {
                            1.0
                        } else if i % 2 == 1 {
                            4.0
                        } else {
                            2.0
                        };
                        c * h / 3.0
                    })
                    .collect();
                Ok((nodes, weights))
            }
            QuadratureRule::Trapezoid => {
                if n < 2 {
                    return Err(FredholmError::Invalid(format!("trapezoid needs at least 2 nodes, got {n}")));
                }
                let h = 1.0 / (n - 1) as f64;
                let weights = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
                Ok((uniform_nodes(n), weights))
            }
            QuadratureRule::GaussLegendre => {
                if n == 0 {
                    return Err(FredholmError::Invalid("Gauss-Legendre needs at least 1 node".into()));
                }
                Ok(gauss_legendre(n))
            }
        }
    }
}

fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 }).collect()
}

/// Legendre nodes by Newton iteration, mapped to `[0, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut prev, mut p) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * prev) / kf;
                prev = p;
                p = next;
            }
            dp = n as f64 * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Quadrature nodes, weights and the sampled kernel `K_ij = k(t_i, η_j)`.
pub struct NystromDiscretization {
    rule: QuadratureRule,
    kernel: KernelSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    k: DMatrix<f64>,
    kw: DMatrix<f64>,
    spectrum: OnceLock<Vec<Complex<f64>>>,
}

impl fmt::Debug for NystromDiscretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NystromDiscretization")
            .field("rule", &self.rule)
            .field("kernel", &self.kernel)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl NystromDiscretization {
    pub fn new(kernel: KernelSpec, rule: QuadratureRule, n: usize) -> Result<Self, FredholmError> {
        let (nodes, weights) = rule.nodes_weights(n)?;
        let k = DMatrix::from_fn(n, n, |i, j| kernel.eval(nodes[i], nodes[j]));
        if let Some((idx, _)) = k.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            // column-major storage
            let (i, j) = (idx % n, idx / n);
            return Err(FredholmError::NonFiniteKernel { t: nodes[i], eta: nodes[j] });
        }
        let kw = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * weights[j]);
        Ok(NystromDiscretization { rule, kernel, nodes, weights, k, kw, spectrum: OnceLock::new() })
    }

    /// Simpson rule with the default node count.
    pub fn simpson(kernel: KernelSpec) -> Result<Self, FredholmError> {
        NystromDiscretization::new(kernel, QuadratureRule::Simpson, DEFAULT_NODES)
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kernel_matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    /// `K · diag(w)`.
    pub fn weighted_matrix(&self) -> &DMatrix<f64> {
        &self.kw
    }

    /// Eigenvalues of `K · diag(w)`, computed once.
    pub fn spectrum(&self) -> &[Complex<f64>] {
        self.spectrum.get_or_init(|| self.kw.clone().complex_eigenvalues().iter().copied().collect())
    }

    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn sample(&self, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&t| f(t)).collect()
    }

    fn check_spectrum(&self, lambda: f64) -> Result<(), FredholmError> {
        if lambda == 0.0 {
            return Ok(());
        }
        let target = Complex::new(1.0 / lambda, 0.0);
        let nearest = self
            .spectrum()
            .iter()
            .filter(|mu| (target - **mu).norm() <= SPECTRUM_GUARD * mu.norm().max(1.0))
            .min_by(|a, b| (target - **a).norm().total_cmp(&(target - **b).norm()));
        match nearest {
            Some(mu) => Err(FredholmError::NearCharacteristic { lambda, nearest: Complex::new(1.0, 0.0) / mu }),
            None => Ok(()),
        }
    }

    fn system(&self, lambda: f64) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::identity(n, n) - &self.kw * lambda
    }

    fn nearest_characteristic(&self, lambda: f64) -> Complex<f64> {
        let target = Complex::new(1.0 / lambda, 0.0);
        self.spectrum()
            .iter()
            .min_by(|a, b| (target - **a).norm().total_cmp(&(target - **b).norm()))
            .map(|mu| Complex::new(1.0, 0.0) / mu)
            .unwrap_or(Complex::new(f64::INFINITY, 0.0))
    }
}

/// Node values of `φ` with the Nyström interpolant for off-node points.
#[derive(Clone)]
pub struct NystromSolution {
    pub lambda: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    kernel: KernelFn,
    free_term: Sampler,
}

impl fmt::Debug for NystromSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NystromSolution").field("lambda", &self.lambda).field("values", &self.values).finish()
    }
}

impl NystromSolution {
    /// `φ(t) = q(t) + λ Σ_j w_j k(t, η_j) φ_j`.
    pub fn eval(&self, t: f64) -> f64 {
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((&eta, &w), &phi)| w * (self.kernel)(t, eta) * phi)
            .sum();
        (self.free_term)(t) + self.lambda * sum
    }

    /// `φ(t) - λ ∫ k(t, η) φ(η) dη - q(t)` for the interpolant, with the
    /// integral taken by an independent 64-point Gauss-Legendre rule.
    pub fn residual_at(&self, t: f64) -> f64 {
        let (xs, ws) = gauss_legendre(64);
        let integral: f64 = xs.iter().zip(&ws).map(|(&eta, &w)| w * (self.kernel)(t, eta) * self.eval(eta)).sum();
        self.eval(t) - self.lambda * integral - (self.free_term)(t)
    }
}

/// Solves `(I - λ K W) φ = q` at the nodes.
pub fn nystrom_solve(disc: &NystromDiscretization, lambda: f64, q: Sampler) -> Result<NystromSolution, FredholmError> {
    if !lambda.is_finite() {
        return Err(FredholmError::Invalid(format!("λ = {lambda} must be finite")));
    }
    let rhs = DMatrix::from_column_slice(disc.len(), 1, &disc.sample(&*q));
    let values = if lambda == 0.0 {
        rhs.column(0).iter().copied().collect()
    } else {
        disc.check_spectrum(lambda)?;
        let phi = solve_checked(&disc.system(lambda), &rhs)
            .map_err(|_| FredholmError::NearCharacteristic { lambda, nearest: disc.nearest_characteristic(lambda) })?;
        phi.column(0).iter().copied().collect()
    };
    Ok(NystromSolution {
        lambda,
        nodes: disc.nodes.clone(),
        weights: disc.weights.clone(),
        values,
        kernel: disc.kernel.evaluator(),
        free_term: q,
    })
}

/// `H = (I - λ K W)⁻¹ K` on the nodes.
pub fn resolvent(disc: &NystromDiscretization, lambda: f64) -> Result<DMatrix<f64>, FredholmError> {
    if lambda == 0.0 {
        return Ok(disc.k.clone());
    }
    disc.check_spectrum(lambda)?;
    solve_checked(&disc.system(lambda), &disc.k)
        .map_err(|_| FredholmError::NearCharacteristic { lambda, nearest: disc.nearest_characteristic(lambda) })
}

/// `q + λ H W q` on the nodes.
pub fn apply_resolvent(disc: &NystromDiscretization, h: &DMatrix<f64>, lambda: f64, q: &[f64]) -> Vec<f64> {
    let wq = DVector::from_iterator(q.len(), q.iter().zip(&disc.weights).map(|(v, w)| v * w));
    let hq = h * wq;
    q.iter().zip(hq.iter()).map(|(v, s)| v + lambda * s).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Sorted by modulus.
    pub characteristic_numbers: Vec<Complex<f64>>,
    /// Node samples, sup-norm 1 with the largest component exactly 1.
    pub eigenfunctions: Vec<Vec<Complex<f64>>>,
    /// `‖φ - λ K W φ‖∞` per pair.
    pub residuals: Vec<f64>,
    pub nodes: Vec<f64>,
    pub discard_threshold: f64,
    /// Eigenvalues above the threshold whose eigenvector failed the residual bound.
    pub rejected: usize,
}

fn inverse_iteration(kw: &DMatrix<f64>, mu: Complex<f64>) -> Option<Vec<Complex<f64>>> {
    let n = kw.nrows();
    let shift = mu + Complex::new(1e-10, 1e-10) * mu.norm().max(1.0);
    let a = DMatrix::from_fn(n, n, |i, j| {
        let v = Complex::new(kw[(i, j)], 0.0);
        if i == j {
            v - shift
        } else {
            v
        }
    });
    let lu = a.lu();
    let mut v = DVector::from_fn(n, |i, _| Complex::new(1.0 + 0.1 * i as f64 / n as f64, 0.0));
    for _ in 0..4 {
        v = lu.solve(&v)?;
        let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(scale.is_finite() && scale > 0.0) {
            return None;
        }
        v /= Complex::new(scale, 0.0);
    }
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
    let mut out: Vec<Complex<f64>> = v.iter().map(|z| z / pivot).collect();
    if let Some(top) = out.iter_mut().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
        *top = Complex::new(1.0, 0.0);
    }
    Some(out)
}

/// Characteristic numbers `λ_i = 1/μ_i` for eigenvalues `|μ_i| > discard_threshold`
/// of `K W`, with eigenfunctions from shifted inverse iteration.
pub fn char_numbers(disc: &NystromDiscretization, discard_threshold: f64) -> SpectralReport {
    let kw = &disc.kw;
    let mut pairs: Vec<(Complex<f64>, Vec<Complex<f64>>, f64)> = Vec::new();
    let mut rejected = 0;
    for &mu in disc.spectrum().iter().filter(|mu| mu.norm() > discard_threshold) {
        let lambda = Complex::new(1.0, 0.0) / mu;
        let accepted = inverse_iteration(kw, mu).and_then(|phi| {
            let residual = (0..phi.len())
                .map(|i| {
                    let applied: Complex<f64> = (0..phi.len()).map(|j| phi[j] * kw[(i, j)]).sum();
                    (phi[i] - lambda * applied).norm()
                })
                .fold(0.0, f64::max);
            (residual <= EIGEN_RESIDUAL).then_some((lambda, phi, residual))
        });
        match accepted {
            Some(p) => pairs.push(p),
            None => rejected += 1,
        }
    }
    pairs.sort_by(|a, b| {
        a.0.norm()
            .total_cmp(&b.0.norm())
            .then(b.0.re.total_cmp(&a.0.re))
            .then(b.0.im.total_cmp(&a.0.im))
    });
    SpectralReport {
        characteristic_numbers: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.2).collect(),
        eigenfunctions: pairs.into_iter().map(|p| p.1).collect(),
        nodes: disc.nodes.clone(),
        discard_threshold,
        rejected,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelClass {
    /// Singular at every sampled parameter.
    Exceptional,
    /// Singular at isolated parameters at most.
    NonExceptional,
    /// Runs of adjacent singular parameters that do not cover the grid.
    Indeterminate,
}

impl KernelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelClass::Exceptional => "exceptional",
            KernelClass::NonExceptional => "non-exceptional",
            KernelClass::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub mu: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub classification: KernelClass,
}

impl SweepReport {
    pub fn flagged(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.flagged).map(|p| p.mu).collect()
    }
}

/// Smallest and largest singular values of `I - (K₀ + μ K₁) W` for every `μ`.
pub fn param_singularity_sweep(
    base: &NystromDiscretization,
    direction: &NystromDiscretization,
    mu_grid: &[f64],
) -> Result<SweepReport, FredholmError> {
    if base.nodes != direction.nodes || base.weights != direction.weights {
        return Err(FredholmError::Invalid("both kernels must share one discretization".into()));
    }
    if mu_grid.is_empty() {
        return Err(FredholmError::Invalid("parameter grid is empty".into()));
    }
    let n = base.len();
    let points: Vec<SweepPoint> = mu_grid
        .par_iter()
        .map(|&mu| {
            let a = DMatrix::identity(n, n) - &base.kw - &direction.kw * mu;
            let sv = a.singular_values();
            let sigma_max = sv.iter().copied().fold(0.0, f64::max);
            let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
            SweepPoint { mu, sigma_min, sigma_max, flagged: sigma_min < SINGULAR_RATIO * sigma_max }
        })
        .collect();
    let flags: Vec<bool> = points.iter().map(|p| p.flagged).collect();
    let classification = if flags.iter().all(|f| *f) {
        KernelClass::Exceptional
    } else if flags.windows(2).any(|w| w[0] && w[1]) {
        KernelClass::Indeterminate
    } else {
        KernelClass::NonExceptional
    };
    Ok(SweepReport { points, classification })
}

/// Sup-norm residual of `φ = ρ + μσ` in
/// `φ(t) = ∫₀¹ [ρ(t)ρ(η) + μ σ(t)ρ(η)] φ(η) dη` at the nodes of `disc`.
pub fn degenerate_residual(
    rho: &Sampler,
    sigma: &Sampler,
    mu: f64,
    disc: &NystromDiscretization,
) -> Result<f64, FredholmError> {
    let r = disc.sample(&**rho);
    let s = disc.sample(&**sigma);
    let norm = disc.integrate(&r.iter().map(|v| v * v).collect::<Vec<_>>());
    let cross = disc.integrate(&r.iter().zip(&s).map(|(a, b)| a * b).collect::<Vec<_>>());
    if (norm - 1.0).abs() > SIDE_CONDITION_TOL || cross.abs() > SIDE_CONDITION_TOL {
        return Err(FredholmError::SideConditions { norm, cross });
    }
    let phi: Vec<f64> = r.iter().zip(&s).map(|(a, b)| a + mu * b).collect();
    let moment = disc.integrate(&r.iter().zip(&phi).map(|(a, b)| a * b).collect::<Vec<_>>());
    Ok((0..phi.len()).map(|i| (phi[i] - (r[i] + mu * s[i]) * moment).abs()).fold(0.0, f64::max))
}

/// Closed forms for the two worked kernels.
pub mod closed_form {
    /// Roots of `λ² + 12λ - 12`.
    pub fn sum_kernel_characteristic_numbers() -> [f64; 2] {
        let r = 4.0 * 3f64.sqrt();
        [-6.0 + r, -6.0 - r]
    }

    /// Resolvent of `k = t + η`:
    /// `[6(λ-2)(t+η) - 12λtη - 4λ] / (λ² + 12λ - 12)`.
    pub fn sum_kernel_resolvent(t: f64, eta: f64, lambda: f64) -> f64 {
        (6.0 * (lambda - 2.0) * (t + eta) - 12.0 * lambda * t * eta - 4.0 * lambda)
            / (lambda * lambda + 12.0 * lambda - 12.0)
    }

    /// Resolvent of `k = exp(t - η)`, `λ ≠ 1`.
    pub fn exp_kernel_resolvent(t: f64, eta: f64, lambda: f64) -> f64 {
        (t - eta).exp() / (1.0 - lambda)
    }

    /// `q(t) + λ/(1-λ) eᵗ ∫₀¹ e^{-η} q(η) dη`, given the moment `∫₀¹ e^{-η} q`.
    pub fn exp_kernel_solution(q_t: f64, moment: f64, t: f64, lambda: f64) -> f64 {
        q_t + lambda / (1.0 - lambda) * t.exp() * moment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    /// Derivative order.
    pub order: usize,
    pub at: Endpoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// `z(0), z'(0), ..., z^(n-1)(0)`.
    Initial(Vec<f64>),
    /// Conditions split between `t = 0` and `t = 1`.
    TwoPoint(Vec<BoundaryCondition>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    Volterra,
    Fredholm,
}

/// `φ = z^(n)` satisfies `φ(t) = λ ∫ k(t, η) φ(η) dη + q(t)`; the constants
/// of integration are `c = d - ∫₀¹ G(η) φ(η) dη`.
#[derive(Clone)]
pub struct IntegralProblem {
    pub kind: IntegralKind,
    pub kernel: KernelSpec,
    pub free_term: Sampler,
    pub lambda: f64,
    order: usize,
    constants: Vec<f64>,
    functionals: Vec<Sampler>,
}

impl fmt::Debug for IntegralProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralProblem")
            .field("kind", &self.kind)
            .field("order", &self.order)
            .field("constants", &self.constants)
            .finish()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `(t - η)^(n-1-k) / (n-1-k)!` summed against `-a_k`, for `η < t`.
fn memory_kernel(lower: &[f64], s: f64) -> f64 {
    let n = lower.len();
    -(0..n).map(|k| lower[k] * s.powi((n - 1 - k) as i32) / factorial(n - 1 - k)).sum::<f64>()
}

/// `P_i(t) = Σ_{k ≤ i} a_k t^(i-k) / (i-k)!`.
fn constant_weights(lower: &[f64], t: f64) -> Vec<f64> {
    (0..lower.len())
        .map(|i| (0..=i).map(|k| lower[k] * t.powi((i - k) as i32) / factorial(i - k)).sum())
        .collect()
}

impl IntegralProblem {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Integration constants that do not depend on `φ`.
    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// `c_i` given `φ` at uniform nodes on `[0, 1]` with trapezoid weights.
    fn integration_constants(&self, nodes: &[f64], weights: &[f64], phi: &[f64]) -> Vec<f64> {
        if self.functionals.is_empty() {
            return self.constants.clone();
        }
        self.constants
            .iter()
            .zip(&self.functionals)
            .map(|(d, g)| d - nodes.iter().zip(weights).zip(phi).map(|((&e, &w), &p)| w * g(e) * p).sum::<f64>())
            .collect()
    }
}

/// Rewrites `c_n z^(n) + ... + c_0 z = f` with the given boundary data as an
/// integral equation for `φ = z^(n)`. Initial data give a Volterra equation
/// with a convolution kernel; two-point data give a Fredholm kernel on
/// `[0, 1]`. In both cases `λ = 1`.
pub fn ode_to_integral(spec: &OdeSpec, boundary: &Boundary) -> Result<IntegralProblem, FredholmError> {
    let n = spec.order();
    let lead = spec.coeffs()[0];
    let lower = spec.monic_lower();
    let forcing = spec.forcing().cloned();
    let force = move |t: f64| forcing.as_ref().map_or(0.0, |f| f(t) / lead);

    match boundary {
        Boundary::Initial(values) => {
            if values.len() != n {
                return Err(FredholmError::Boundary(format!("{} initial values for an order-{n} equation", values.len())));
            }
            let (lw, cv) = (lower.clone(), values.clone());
            let free_term: Sampler = Arc::new(move |t| {
                force(t) - constant_weights(&lw, t).iter().zip(&cv).map(|(p, c)| p * c).sum::<f64>()
            });
            let lw = lower.clone();
            let kernel = KernelSpec::from_fn("ode-reduced", move |t, eta| {
                if eta <= t {
                    memory_kernel(&lw, t - eta)
                } else {
                    0.0
                }
            });
            Ok(IntegralProblem {
                kind: IntegralKind::Volterra,
                kernel,
                free_term,
                lambda: 1.0,
                order: n,
                constants: values.clone(),
                functionals: Vec::new(),
            })
        }
        Boundary::TwoPoint(conds) => {
            if conds.len() != n {
                return Err(FredholmError::Boundary(format!("{} conditions for an order-{n} equation", conds.len())));
            }
            let mut seen = HashSet::new();
            for c in conds {
                if c.order >= n {
                    return Err(FredholmError::Boundary(format!("derivative order {} exceeds {}", c.order, n - 1)));
                }
                if !seen.insert((c.order, c.at)) {
                    return Err(FredholmError::Boundary(format!("derivative order {} given twice at {:?}", c.order, c.at)));
                }
            }
            // row r: Σ_i M_ri c_i = v_r - ∫ ℓ_r φ
            let m = DMatrix::from_fn(n, n, |r, i| {
                let k = conds[r].order;
                match conds[r].at {
                    Endpoint::Start => f64::from(u8::from(i == k)),
                    Endpoint::End if i >= k => 1.0 / factorial(i - k),
                    Endpoint::End => 0.0,
                }
            });
            let minv = solve_checked(&m, &DMatrix::identity(n, n))
                .map_err(|_| FredholmError::Boundary("conditions do not determine the integration constants".into()))?;
            let v = DVector::from_iterator(n, conds.iter().map(|c| c.value));
            let constants: Vec<f64> = (&minv * v).iter().copied().collect();
            let ends: Vec<Option<usize>> =
                conds.iter().map(|c| (c.at == Endpoint::End).then_some(n - 1 - c.order)).collect();
            let functionals: Vec<Sampler> = (0..n)
                .map(|i| {
                    let row: Vec<f64> = minv.row(i).iter().copied().collect();
                    let ends = ends.clone();
                    sampler(move |eta| {
                        row.iter()
                            .zip(&ends)
                            .filter_map(|(m, e)| e.map(|p| m * (1.0 - eta).powi(p as i32) / factorial(p)))
                            .sum()
                    })
                })
                .collect();
            let (lw, cv) = (lower.clone(), constants.clone());
            let free_term: Sampler = Arc::new(move |t| {
                force(t) - constant_weights(&lw, t).iter().zip(&cv).map(|(p, c)| p * c).sum::<f64>()
            });
            let (lw, fs) = (lower.clone(), functionals.clone());
            let kernel = KernelSpec::from_fn("ode-reduced", move |t, eta| {
                let memory = match eta.partial_cmp(&t) {
                    Some(Ordering::Less) => memory_kernel(&lw, t - eta),
                    // mean of the one-sided limits
                    Some(Ordering::Equal) => 0.5 * memory_kernel(&lw, 0.0),
                    _ => 0.0,
                };
                let weights = constant_weights(&lw, t);
                memory + weights.iter().zip(&fs).map(|(p, g)| p * g(eta)).sum::<f64>()
            });
            Ok(IntegralProblem {
                kind: IntegralKind::Fredholm,
                kernel,
                free_term,
                lambda: 1.0,
                order: n,
                constants,
                functionals,
            })
        }
    }
}

/// Trapezoidal march of a Volterra equation on a uniform grid.
pub fn volterra_march(kernel: &KernelSpec, lambda: f64, q: &Sampler, grid: &TimeGrid) -> Result<Vec<f64>, FredholmError> {
    let h = grid.step();
    let t: Vec<f64> = grid.nodes().collect();
    let mut phi = Vec::with_capacity(t.len());
    phi.push(q(t[0]));
    for i in 1..t.len() {
        let mut acc = 0.5 * kernel.eval(t[i], t[0]) * phi[0];
        for j in 1..i {
            acc += kernel.eval(t[i], t[j]) * phi[j];
        }
        let denom = 1.0 - 0.5 * h * lambda * kernel.eval(t[i], t[i]);
        if denom.abs() < 1e-12 {
            return Err(FredholmError::Invalid(format!("march step is singular at t = {}", t[i])));
        }
        let next = (q(t[i]) + lambda * h * acc) / denom;
        if !next.is_finite() {
            return Err(FredholmError::Ode(OdeError::BlowUp {
                t: t[i],
                node: i - 1,
                last_t: t[i - 1],
                state: vec![phi[i - 1]],
            }));
        }
        phi.push(next);
    }
    Ok(phi)
}

/// One resolution: node values of `φ`, then `z` and its derivatives.
fn reduced_pass(problem: &IntegralProblem, grid: &TimeGrid) -> Result<Vec<Vec<f64>>, FredholmError> {
    let nodes: Vec<f64> = grid.nodes().collect();
    let h = grid.step();
    let len = nodes.len();
    let weights: Vec<f64> = (0..len).map(|i| if i == 0 || i == len - 1 { 0.5 * h } else { h }).collect();
    let phi = match problem.kind {
        IntegralKind::Volterra => volterra_march(&problem.kernel, problem.lambda, &problem.free_term, grid)?,
        IntegralKind::Fredholm => {
            let a = DMatrix::from_fn(len, len, |i, j| {
                f64::from(u8::from(i == j)) - problem.lambda * weights[j] * problem.kernel.eval(nodes[i], nodes[j])
            });
            let q = DMatrix::from_iterator(len, 1, nodes.iter().map(|&t| (problem.free_term)(t)));
            let sol = solve_checked(&a, &q).map_err(|_| FredholmError::NearCharacteristic {
                lambda: problem.lambda,
                nearest: Complex::new(problem.lambda, 0.0),
            })?;
            sol.column(0).iter().copied().collect()
        }
    };
    let n = problem.order;
    let c = problem.integration_constants(&nodes, &weights, &phi);
    let mut rows = Vec::with_capacity(len);
    for i in 0..len {
        let t = nodes[i];
        let mut row = Vec::with_capacity(n + 1);
        for k in 0..n {
            let p = n - 1 - k;
            let memory: f64 = if i == 0 {
                0.0
            } else {
                (0..=i)
                    .map(|j| {
                        let w = if j == 0 || j == i { 0.5 * h } else { h };
                        w * (t - nodes[j]).powi(p as i32) / factorial(p) * phi[j]
                    })
                    .sum()
            };
            let poly: f64 = (k..n).map(|m| c[m] * t.powi((m - k) as i32) / factorial(m - k)).sum();
            row.push(memory + poly);
        }
        row.push(phi[i]);
        rows.push(row);
    }
    Ok(rows)
}

/// Solves a reduced problem at `steps` and `2·steps` trapezoid intervals and
/// combines them by Richardson extrapolation. Columns `z, dz, ..., phi`.
///
/// Fredholm problems live on `[0, 1]`; Volterra problems accept any grid
/// starting at 0.
pub fn solve_reduced(problem: &IntegralProblem, grid: &TimeGrid) -> Result<Trajectory, FredholmError> {
    if grid.t_start != 0.0 {
        return Err(FredholmError::Invalid("reduced problems start at t = 0".into()));
    }
    if problem.kind == IntegralKind::Fredholm && grid.t_end != 1.0 {
        return Err(FredholmError::Invalid("two-point problems are posed on [0, 1]".into()));
    }
    let fine_grid = TimeGrid::new(grid.t_start, grid.t_end, 2 * grid.steps)?;
    let (coarse, fine) = rayon::join(|| reduced_pass(problem, grid), || reduced_pass(problem, &fine_grid));
    let (coarse, fine) = (coarse?, fine?);
    let values = coarse
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().zip(&fine[2 * i]).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
        .collect();
    let mut labels = derivative_labels(problem.order);
    labels.push("phi".into());
    Ok(Trajectory::new(*grid, labels, values))
}
