use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

/// Random disjoint train/test partition of sizes `ceil(N(1-f))` and
/// `floor(N f)`. Each part keeps the original relative row order.
pub fn split_train_test(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction {test_fraction} is outside (0, 1)")));
    }
    let n = dataset.n_rows();
    if n < 2 {
        return Err(Error::Config(format!("cannot split a table of {n} rows")));
    }
    let (train_idx, test_idx) = partition_indices(n, test_fraction, seed);
    Ok((dataset.select_rows(&train_idx), dataset.select_rows(&test_idx)))
}

pub(crate) fn partition_indices(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    // The epsilon absorbs products such as 10 * 0.2 landing a hair below 2.
    let n_test = ((n as f64 * test_fraction + 1e-9).floor() as usize).min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = idx.split_off(n - n_test);
    idx.sort_unstable();
    test.sort_unstable();
    (idx, test)
}
