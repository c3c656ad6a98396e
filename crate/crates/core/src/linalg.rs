use nalgebra::{DMatrix, DVector};

/// Solves the symmetric positive (semi-)definite system `a x = b` by
/// Cholesky. When the factorisation fails, `jitter` is added to the
/// diagonal, growing tenfold until it succeeds. Returns the solution and
/// whether jitter was needed.
pub(crate) fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>, jitter: f64) -> (DVector<f64>, bool) {
    if let Some(ch) = a.clone().cholesky() {
        return (ch.solve(b), false);
    }
    let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut eps = jitter;
    loop {
        let mut shifted = a.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += eps;
        }
        if let Some(ch) = shifted.cholesky() {
            return (ch.solve(b), true);
        }
        if eps > scale {
            return (DVector::zeros(b.len()), true);
        }
        eps *= 10.0;
    }
}
