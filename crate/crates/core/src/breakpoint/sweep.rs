use super::check_inputs;
use crate::error::Result;
use crate::util::median;

/// Running Σy and Σy² over the rows sorted by x, so that the mean and
/// population variance of any prefix or suffix are O(1) lookups.
///
/// The sums are kept on `y - shift` with `shift` the column mean, which
/// avoids the cancellation of the raw `E[y²] - E[y]²` form. Suffixes have
/// their own running sums: taking them as total minus prefix loses most
/// digits when the suffix is a handful of rows.
#[derive(Debug, Clone)]
pub struct PrefixMoments {
    shift: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    suffix_sum: Vec<f64>,
    suffix_sq: Vec<f64>,
}

impl PrefixMoments {
    /// `ys` must already be in sorted-x order.
    pub fn new(ys: &[f64]) -> Self {
        let n = ys.len();
        let shift = if n == 0 { 0.0 } else { ys.iter().sum::<f64>() / n as f64 };
        let mut sum = Vec::with_capacity(n + 1);
        let mut sum_sq = Vec::with_capacity(n + 1);
        let (mut s, mut q) = (0.0, 0.0);
        sum.push(0.0);
        sum_sq.push(0.0);
        for &y in ys {
            let d = y - shift;
            s += d;
            q += d * d;
            sum.push(s);
            sum_sq.push(q);
        }
        let mut suffix_sum = vec![0.0; n + 1];
        let mut suffix_sq = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let d = ys[i] - shift;
            suffix_sum[i] = suffix_sum[i + 1] + d;
            suffix_sq[i] = suffix_sq[i + 1] + d * d;
        }
        PrefixMoments {
            shift,
            sum,
            sum_sq,
            suffix_sum,
            suffix_sq,
        }
    }

    pub fn len(&self) -> usize {
        self.sum.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Σy over the first `k` sorted rows.
    pub fn sum(&self, k: usize) -> f64 {
        self.sum[k] + k as f64 * self.shift
    }

    /// Σy² over the first `k` sorted rows.
    pub fn sum_sq(&self, k: usize) -> f64 {
        let s = self.sum[k];
        self.sum_sq[k] + 2.0 * self.shift * s + k as f64 * self.shift * self.shift
    }

    /// Count, shifted sum and shifted sum of squares of rows `[from, to)`.
    #[inline]
    fn range(&self, from: usize, to: usize) -> (f64, f64, f64) {
        ((to - from) as f64, self.sum[to] - self.sum[from], self.sum_sq[to] - self.sum_sq[from])
    }

    /// Mean and sum of squared deviations of rows `[from, to)`.
    #[inline]
    fn mean_ss(&self, from: usize, to: usize) -> (f64, f64) {
        let (k, s, q) = if to == self.len() {
            ((to - from) as f64, self.suffix_sum[from], self.suffix_sq[from])
        } else {
            self.range(from, to)
        };
        let mean = s / k;
        (mean + self.shift, (q - s * mean).max(0.0))
    }

    /// Population variance of rows `[from, to)`.
    pub fn variance(&self, from: usize, to: usize) -> f64 {
        let (k, _, _) = self.range(from, to);
        self.mean_ss(from, to).1 / k
    }

    /// Weighted variance reduction of splitting after the first `k` rows:
    /// `Var(s) - (k/n Var(left) + (n-k)/n Var(right))`, evaluated through the
    /// equivalent between-group form `k (n-k) / n² (μ_left - μ_right)²`.
    #[inline]
    pub fn reduction(&self, k: usize) -> f64 {
        let n = self.len();
        let (a, b, t) = (k as f64, (n - k) as f64, n as f64);
        let ml = self.sum[k] / a;
        let mr = self.suffix_sum[k] / b;
        a * b / (t * t) * (ml - mr) * (ml - mr)
    }

    /// Welch's t for the split after the first `k` rows, with sample
    /// variances floored at `var_floor`.
    #[inline]
    pub fn welch_t(&self, k: usize, var_floor: f64) -> f64 {
        let n = self.len();
        let (ml, ssl) = self.mean_ss(0, k);
        let (mr, ssr) = self.mean_ss(k, n);
        let (a, b) = (k as f64, (n - k) as f64);
        let vl = (ssl / (a - 1.0)).max(var_floor);
        let vr = (ssr / (b - 1.0)).max(var_floor);
        let diff = ml - mr;
        if diff == 0.0 {
            return 0.0;
        }
        diff / (vl / a + vr / b).sqrt()
    }
}

/// One feature column sorted once, with the target's prefix moments.
#[derive(Debug, Clone)]
pub struct SortedColumn {
    xs: Vec<f64>,
    ys: Vec<f64>,
    moments: PrefixMoments,
    median_x: f64,
}

impl SortedColumn {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        check_inputs(x, y)?;
        let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let moments = PrefixMoments::new(&ys);
        let median_x = median(&xs);
        Ok(SortedColumn {
            xs,
            ys,
            moments,
            median_x,
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn moments(&self) -> &PrefixMoments {
        &self.moments
    }

    /// Left-group sizes `k` at which a split separates distinct x values
    /// and leaves at least `m` rows on each side.
    pub fn split_positions(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.len();
        let lo = m.max(1);
        let hi = n.saturating_sub(m.max(1));
        (lo..=hi).filter(move |&k| k < n && self.xs[k - 1] < self.xs[k])
    }

    /// Midpoint threshold separating the first `k` sorted rows from the rest.
    pub fn threshold(&self, k: usize) -> f64 {
        super::midpoint(self.xs[k - 1], self.xs[k])
    }

    /// Position maximising `score`, ties broken toward the threshold nearest
    /// the median of x and then toward the smaller position.
    pub fn argmax(&self, m: usize, mut score: impl FnMut(usize) -> f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for k in self.split_positions(m) {
            let s = score(k);
            if !s.is_finite() {
                continue;
            }
            let dist = (self.threshold(k) - self.median_x).abs();
            let better = match best {
                None => true,
                Some((_, bs, bd)) => s > bs || (s == bs && dist < bd),
            };
            if better {
                best = Some((k, s, dist));
            }
        }
        best.map(|(k, s, _)| (k, s))
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn prefix_totals_match_column_totals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ys: Vec<f64> = (0..10_000).map(|_| rng.random_range(-5.0..50.0)).collect();
        let p = PrefixMoments::new(&ys);
        let s: f64 = ys.iter().sum();
        let q: f64 = ys.iter().map(|v| v * v).sum();
        assert!((p.sum(ys.len()) - s).abs() <= 1e-9 * s.abs());
        assert!((p.sum_sq(ys.len()) - q).abs() <= 1e-9 * q.abs());
        for k in [1usize, 17, 5000, 9999] {
            let s: f64 = ys[..k].iter().sum();
            let q: f64 = ys[..k].iter().map(|v| v * v).sum();
            assert!((p.sum(k) - s).abs() <= 1e-9 * s.abs().max(1.0));
            assert!((p.sum_sq(k) - q).abs() <= 1e-9 * q.abs());
        }
    }

    #[test]
    fn positions_skip_ties_and_respect_m() {
        let c = SortedColumn::new(&[1.0, 1.0, 2.0, 3.0, 3.0, 4.0], &[0.0; 6]).unwrap();
        assert_eq!(c.split_positions(1).collect::<Vec<_>>(), vec![2, 3, 5]);
        assert_eq!(c.split_positions(3).collect::<Vec<_>>(), vec![3]);
        assert_eq!(c.threshold(3), 2.5);
    }

    #[test]
    fn argmax_breaks_ties_toward_median() {
        let c = SortedColumn::new(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0; 5]).unwrap();
        let (k, _) = c.argmax(1, |_| 1.0).unwrap();
        assert!(c.threshold(k) == 1.5 || c.threshold(k) == 2.5);
        assert_eq!(k, 2);
    }
}
