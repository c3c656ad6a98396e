use super::{ColumnDesc, Dataset};
use crate::error::{Error, Result};

/// Adds `window - 1` shifted copies of every lag-0 column.
///
/// Column order is the original table followed by one block per lag,
/// `x(t-1)` for all columns, then `x(t-2)`, and so on. Lags that reach back
/// past the start of the row's episode are filled with `pad`. Without an
/// episode column the whole table is treated as one episode.
///
/// Standardise before expanding: the pad value is meant to be the neutral
/// post-normalisation value.
pub fn lag_expand(dataset: &Dataset, window: usize, pad: f64) -> Result<Dataset> {
    if window < 1 {
        return Err(Error::Config("lag window must be at least 1".into()));
    }
    if window == 1 {
        return Ok(dataset.clone());
    }
    let n = dataset.n_rows();
    let episode_start = episode_starts(dataset.episodes(), n);

    let sources: Vec<usize> = (0..dataset.n_cols())
        .filter(|&i| dataset.schema()[i].lag == 0)
        .collect();
    let mut schema = dataset.schema().to_vec();
    let mut columns = dataset.columns().to_vec();
    for k in 1..window {
        for &i in &sources {
            let desc = &dataset.schema()[i];
            schema.push(ColumnDesc {
                name: format!("{}(t-{k})", desc.name),
                base: desc.name.clone(),
                feature: desc.feature.clone(),
                kind: desc.kind.clone(),
                lag: k,
            });
            let src = dataset.column(i);
            columns.push(
                (0..n)
                    .map(|r| if r >= k && r - k >= episode_start[r] { src[r - k] } else { pad })
                    .collect(),
            );
        }
    }

    let mut out = Dataset::new(schema, columns, dataset.target().map(<[f64]>::to_vec))?
        .with_augmented_flags(dataset.augmented().to_vec());
    if let Some(e) = dataset.episodes() {
        out = out.with_episodes(e.to_vec())?;
    }
    if let Some(s) = dataset.norm_stats() {
        out = out.with_norm_stats(s.clone());
    }
    Ok(out)
}

pub(crate) fn episode_starts(episodes: Option<&[String]>, n: usize) -> Vec<usize> {
    let mut start = vec![0; n];
    if let Some(ep) = episodes {
        for r in 1..n {
            start[r] = if ep[r] == ep[r - 1] { start[r - 1] } else { r };
        }
    }
    start
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::dataset::testutil::{continuous, onehot};

    fn table(rows: usize, episodes: &[&str]) -> Dataset {
        let x: Vec<f64> = (0..rows).map(|r| r as f64 * 1.5 + 1.0).collect();
        let a: Vec<f64> = (0..rows).map(|r| (r % 2) as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| 1.0 - v).collect();
        Dataset::new(
            vec![continuous("x"), onehot("act", "pass"), onehot("act", "shot")],
            vec![x, a, b],
            Some(vec![0.0; rows]),
        )
        .unwrap()
        .with_episodes(episodes.iter().map(|s| s.to_string()).collect())
        .unwrap()
    }

    #[test]
    fn window_one_is_identity() {
        let d = table(3, &["a", "a", "a"]);
        let e = lag_expand(&d, 1, 0.0).unwrap();
        assert_eq!(e.schema(), d.schema());
        assert_eq!(e.columns(), d.columns());
    }

    #[test]
    fn window_two_shifts_previous_row() {
        let d = table(2, &["a", "a"]);
        let e = lag_expand(&d, 2, 0.0).unwrap();
        assert_eq!(e.n_cols(), 6);
        let x1 = e.column_index("x(t-1)").unwrap();
        assert_eq!(e.column(x1)[1], d.column(0)[0]);
        assert_eq!(e.column(x1)[0], 0.0);
        assert_eq!(e.schema()[x1].lag, 1);
    }

    #[test]
    fn zero_window_is_config_error() {
        assert!(matches!(lag_expand(&table(2, &["a", "a"]), 0, 0.0), Err(Error::Config(_))));
    }

    // Independent oracle: walk back through a per-episode history map.
    #[test]
    fn matches_history_lookup() {
        let eps = ["g1", "g1", "g2", "g2", "g2", "g2", "g2"];
        let d = table(eps.len(), &eps);
        let window = 3;
        let e = lag_expand(&d, window, -9.0).unwrap();
        assert_eq!(e.n_rows(), d.n_rows());

        let mut history: HashMap<&str, Vec<Vec<f64>>> = HashMap::new();
        for r in 0..d.n_rows() {
            let past = history.entry(eps[r]).or_default();
            past.push(d.row(r));
            let mut expected = d.row(r);
            for k in 1..window {
                match past.len().checked_sub(k + 1) {
                    Some(j) => expected.extend(past[j].iter().copied()),
                    None => expected.extend(std::iter::repeat_n(-9.0, d.n_cols())),
                }
            }
            assert_eq!(e.row(r), expected, "row {r}");
        }
    }
}
