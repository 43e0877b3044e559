use nalgebra::DMatrix;

/// Pivots smaller than this fraction of the infinity norm count as zero.
pub const PIVOT_TOL: f64 = 1e-12;

pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// LU solve of `m · x = rhs` with a relative pivot check. On failure returns
/// the smallest pivot magnitude.
pub fn solve_checked(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>, f64> {
    let norm = inf_norm(m);
    let lu = m.clone().lu();
    let min_pivot = lu.u().diagonal().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if min_pivot.is_nan() || min_pivot < PIVOT_TOL * norm || norm == 0.0 {
        return Err(if min_pivot.is_finite() { min_pivot } else { 0.0 });
    }
    lu.solve(rhs).ok_or(min_pivot)
}
