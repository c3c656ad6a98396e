use super::sweep::SortedColumn;
use super::{check_inputs, is_constant, SplitCandidate};
use crate::error::Result;

/// Sorted sweep scoring each boundary by Welch's |t| between the two
/// groups (sample variances, `n - 1`). Both groups need at least
/// `max(m, 2)` rows. Sample variances are floored at `1e-12 Var(y)` so
/// constant groups with different means do not score infinity.
pub fn best_split_ttest(x: &[f64], y: &[f64], m: usize) -> Result<Option<SplitCandidate>> {
    check_inputs(x, y)?;
    let m = m.max(2);
    if y.len() < 2 * m || is_constant(y) {
        return Ok(None);
    }
    let col = SortedColumn::new(x, y)?;
    let moments = col.moments();
    let floor = 1e-12 * moments.variance(0, col.len());
    Ok(col
        .argmax(m, |k| moments.welch_t(k, floor).abs())
        .map(|(k, t)| SplitCandidate {
            feature_index: 0,
            threshold: col.threshold(k),
            score: t,
            reduction: moments.reduction(k),
            left_count: k,
            right_count: col.len() - k,
        })
        .filter(|c| c.reduction > 0.0))
}
