//! Constant-coefficient linear ODEs: characteristic roots, closed-form
//! solutions, and a fixed-step RK4 integrator shared by every model.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

pub type Sampler = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative distance under which two computed roots count as one.
pub const ROOT_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("equation order must be at least 1")]
    ZeroOrder,
    #[error("leading coefficient must be finite and nonzero")]
    BadLeading,
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error("initial data has {got} values, equation needs {expected}")]
    InitLength { expected: usize, got: usize },
    #[error("forced equations have no closed-form solution; integrate numerically")]
    Forced,
    #[error("repeated characteristic root {root} (multiplicity {multiplicity}) is not supported")]
    RepeatedRoot { root: Complex<f64>, multiplicity: usize },
    #[error("degenerate initial data: Vandermonde system is singular")]
    DegenerateData,
    #[error("closed-form solution has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("solution blew up at t = {t}; last finite node {node} at t = {last_t}")]
    BlowUp { t: f64, node: usize, last_t: f64, state: Vec<f64> },
    #[error("right-hand side returned {got} components for a state of dimension {expected}")]
    Dimension { expected: usize, got: usize },
}

/// `c_n z^(n) + ... + c_1 z' + c_0 z = f(t)`, coefficients stored highest first.
#[derive(Clone)]
pub struct OdeSpec {
    coeffs: Vec<f64>,
    forcing: Option<Sampler>,
}

impl fmt::Debug for OdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSpec")
            .field("coeffs", &self.coeffs)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl OdeSpec {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, OdeError> {
        if coeffs.len() < 2 {
            return Err(OdeError::ZeroOrder);
        }
        if !(coeffs[0].is_finite() && coeffs[0] != 0.0) {
            return Err(OdeError::BadLeading);
        }
        Ok(OdeSpec { coeffs, forcing: None })
    }

    pub fn with_forcing(mut self, f: Sampler) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn forcing(&self) -> Option<&Sampler> {
        self.forcing.as_ref()
    }

    /// `a_0 .. a_{n-1}` of the monic form `z^(n) + a_{n-1} z^(n-1) + ... + a_0 z`.
    pub fn monic_lower(&self) -> Vec<f64> {
        let lead = self.coeffs[0];
        self.coeffs[1..].iter().rev().map(|c| c / lead).collect()
    }

    /// Integrates the equivalent first-order system for `(z, z', ..., z^(n-1))`.
    pub fn integrate(&self, init: &[f64], grid: &TimeGrid) -> Result<Trajectory, OdeError> {
        let n = self.order();
        if init.len() != n {
            return Err(OdeError::InitLength { expected: n, got: init.len() });
        }
        let a = self.monic_lower();
        let lead = self.coeffs[0];
        let forcing = self.forcing.clone();
        let traj = rk4_integrate(
            |t, x, dx| {
                dx[..n - 1].copy_from_slice(&x[1..]);
                let f = forcing.as_ref().map_or(0.0, |f| f(t) / lead);
                dx[n - 1] = f - a.iter().zip(x).map(|(ak, xk)| ak * xk).sum::<f64>();
            },
            init,
            grid,
        )?;
        Ok(traj.with_labels(derivative_labels(n)))
    }
}

pub(crate) fn derivative_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| match k {
            0 => "z".to_string(),
            1 => "dz".to_string(),
            k => format!("d{k}z"),
        })
        .collect()
}

/// Uniform grid `t_start + k (t_end - t_start) / steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self, OdeError> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(OdeError::Grid("bounds must be finite".into()));
        }
        if t_end <= t_start {
            return Err(OdeError::Grid(format!("t_end {t_end} must exceed t_start {t_start}")));
        }
        if steps == 0 {
            return Err(OdeError::Grid("steps must be positive".into()));
        }
        Ok(TimeGrid { t_start, t_end, steps })
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t_start + (self.t_end - self.t_start) * k as f64 / self.steps as f64
        }
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.node(k))
    }
}

/// Per-node samples of a vector-valued curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Panics if the rows do not match the grid or the labels.
    pub fn new(grid: TimeGrid, labels: Vec<String>, values: Vec<Vec<f64>>) -> Self {
        assert_eq!(values.len(), grid.len(), "one row per grid node");
        assert!(values.iter().all(|row| row.len() == labels.len()), "ragged trajectory");
        Trajectory { grid, labels, values }
    }

    /// Builds a trajectory from named columns.
    pub fn from_columns(grid: TimeGrid, columns: Vec<(String, Vec<f64>)>) -> Self {
        let labels = columns.iter().map(|(l, _)| l.clone()).collect();
        let values = (0..grid.len())
            .map(|k| columns.iter().map(|(_, c)| c[k]).collect())
            .collect();
        Trajectory::new(grid, labels, values)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.labels.len());
        self.labels = labels;
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.nodes().collect()
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[idx]).collect()
    }

    pub fn column_by_label(&self, label: &str) -> Option<Vec<f64>> {
        self.labels.iter().position(|l| l == label).map(|i| self.column(i))
    }

    pub fn last(&self) -> &[f64] {
        self.values.last().expect("trajectory has at least two nodes")
    }

    /// Keeps the listed components, in the given order.
    pub fn select(&self, indices: &[usize]) -> Trajectory {
        Trajectory {
            grid: self.grid,
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            values: self.values.iter().map(|row| indices.iter().map(|&i| row[i]).collect()).collect(),
        }
    }
}

/// `max |a - b| / max |b|` (absolute when `b` vanishes identically).
pub fn sup_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex<f64>,
    pub multiplicity: usize,
}

fn horner(coeffs: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    // value and derivative, coefficients highest first
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of `sum c_k p^k` from the eigenvalues of the companion matrix.
///
/// Roots closer than [`ROOT_CLUSTER_TOL`] (relative) are merged and reported
/// once with their multiplicity; simple roots are refined by Newton steps.
/// Output is sorted by real part, then imaginary part, both descending.
pub fn char_roots(spec: &OdeSpec) -> Result<Vec<Root>, OdeError> {
    polynomial_roots(spec.coeffs())
}

/// Same as [`char_roots`] for a bare coefficient list (highest degree first).
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Root>, OdeError> {
    if coeffs.len() < 2 {
        return Err(OdeError::ZeroOrder);
    }
    if !(coeffs[0].is_finite() && coeffs[0] != 0.0) {
        return Err(OdeError::BadLeading);
    }
    let n = coeffs.len() - 1;
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -coeffs[j + 1] / coeffs[0];
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    let raw: Vec<Complex<f64>> = companion.complex_eigenvalues().iter().copied().collect();

    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    'next: for r in raw {
        for (center, count) in clusters.iter_mut() {
            let scale = 1f64.max(center.norm()).max(r.norm());
            if (*center - r).norm() <= ROOT_CLUSTER_TOL * scale {
                *center = (*center * *count as f64 + r) / (*count as f64 + 1.0);
                *count += 1;
                continue 'next;
            }
        }
        clusters.push((r, 1));
    }

    let mut roots: Vec<Root> = clusters
        .into_iter()
        .map(|(mut z, multiplicity)| {
            if multiplicity == 1 {
                for _ in 0..3 {
                    let (p, dp) = horner(coeffs, z);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let candidate = z - p / dp;
                    if horner(coeffs, candidate).0.norm() < p.norm() {
                        z = candidate;
                    } else {
                        break;
                    }
                }
            }
            Root { value: z, multiplicity }
        })
        .collect();
    roots.sort_by(|a, b| {
        b.value
            .re
            .total_cmp(&a.value.re)
            .then(b.value.im.total_cmp(&a.value.im))
    });
    Ok(roots)
}

/// Closed-form solution `sum c_i exp(p_i t)` of a homogeneous equation with
/// simple characteristic roots. Columns are `z` and its derivatives up to
/// order `n-1`.
pub fn analytic_solution(spec: &OdeSpec, init: &[f64], grid: &TimeGrid) -> Result<Trajectory, OdeError> {
    let n = spec.order();
    if spec.forcing().is_some() {
        return Err(OdeError::Forced);
    }
    if init.len() != n {
        return Err(OdeError::InitLength { expected: n, got: init.len() });
    }
    let roots = char_roots(spec)?;
    if let Some(r) = roots.iter().find(|r| r.multiplicity > 1) {
        return Err(OdeError::RepeatedRoot { root: r.value, multiplicity: r.multiplicity });
    }
    let p: Vec<Complex<f64>> = roots.iter().map(|r| r.value).collect();
    let vander = DMatrix::from_fn(n, n, |k, i| p[i].powu(k as u32));
    let rhs = DVector::from_iterator(n, init.iter().map(|&v| Complex::new(v, 0.0)));
    let c = vander.lu().solve(&rhs).ok_or(OdeError::DegenerateData)?;
    if c.iter().any(|ci| !(ci.re.is_finite() && ci.im.is_finite())) {
        return Err(OdeError::DegenerateData);
    }

    let mut values = Vec::with_capacity(grid.len());
    for t in grid.nodes() {
        let terms: Vec<Complex<f64>> = (0..n).map(|i| c[i] * (p[i] * t).exp()).collect();
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            let mut sum = Complex::new(0.0, 0.0);
            let mut mag = 0.0;
            for i in 0..n {
                let term = terms[i] * p[i].powu(k as u32);
                sum += term;
                mag += term.norm();
            }
            if sum.im.abs() > 1e-10 * mag.max(f64::MIN_POSITIVE) {
                return Err(OdeError::ImaginaryResidue(sum.im.abs() / mag));
            }
            row.push(sum.re);
        }
        values.push(row);
    }
    Ok(Trajectory::new(*grid, derivative_labels(n), values))
}

/// Classical fourth-order Runge-Kutta on a fixed grid.
///
/// `rhs(t, x, dx)` writes the derivative of `x` into `dx`. Columns are labelled
/// `x0, x1, ...`; relabel with [`Trajectory::with_labels`].
pub fn rk4_integrate<F>(mut rhs: F, x0: &[f64], grid: &TimeGrid) -> Result<Trajectory, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let d = x0.len();
    let h = grid.step();
    let mut values = Vec::with_capacity(grid.len());
    let mut x = x0.to_vec();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::BlowUp { t: grid.t_start, node: 0, last_t: grid.t_start, state: x });
    }
    values.push(x.clone());

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    for step in 0..grid.steps {
        let t = grid.node(step);
        rhs(t, &x, &mut k1);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..d {
            tmp[i] = x[i] + h * k3[i];
        }
        rhs(t + h, &tmp, &mut k4);
        let mut next = Vec::with_capacity(d);
        for i in 0..d {
            next.push(x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::BlowUp { t: grid.node(step + 1), node: step, last_t: t, state: x });
        }
        x = next;
        values.push(x.clone());
    }
    let labels = (0..d).map(|i| format!("x{i}")).collect();
    Ok(Trajectory::new(*grid, labels, values))
}
