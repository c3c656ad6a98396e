//! Synthetic teachers with a known piecewise-linear answer.
//!
//! [`PlantedTree`] is an 8-leaf linear model tree over five continuous
//! features on `[0, 1]` and two categorical features. Its root splits
//! `x0 <= 0.4` where the slope changes from 3 to 2 without a jump, the
//! second level splits on one indicator column per side and the third level
//! on one continuous feature per node. Leaf intercepts are centred so each
//! subtree has mean zero, which makes the root a clean kink in the marginal
//! of `x0`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{ColumnDesc, Dataset, FeatureSpec};
use crate::error::{Error, Result};

pub const ZONES: [&str; 3] = ["neutral", "offensive", "defensive"];
pub const ACTIONS: [&str; 3] = ["pass", "shot", "carry"];

/// Rows per synthetic episode in [`PlantedTree::write_csv`].
pub const EPISODE_LEN: usize = 25;

const ROOT_THRESHOLD: f64 = 0.4;
const ROOT_SLOPES: (f64, f64) = (3.0, 2.0);

/// `(feature, threshold, slope below, slope above, offset)` of each of the
/// four third-level kinks. The first two sit under `x0 <= 0.4` and are
/// selected by `zone = offensive`; the last two by `action = shot`.
const KINKS: [(usize, f64, f64, f64, f64); 4] = [
    (1, 0.5, 1.5, -1.0, -0.3),
    (2, 0.3, -1.2, 1.0, 0.6),
    (3, 0.6, 1.0, -2.0, -0.4),
    (4, 0.7, -1.0, 2.5, 0.8),
];

/// Ground-truth generator; see the module docs for the structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedTree {
    /// Standard deviation of the Gaussian noise added to soft labels.
    pub noise_sd: f64,
    /// Extra continuous features `x5, x6, ...` the target ignores.
    pub extra_features: usize,
}

impl Default for PlantedTree {
    fn default() -> Self {
        PlantedTree {
            noise_sd: 0.01,
            extra_features: 0,
        }
    }
}

/// Rows drawn from a [`PlantedTree`]. `data` carries the noisy soft labels
/// as its target.
#[derive(Debug, Clone)]
pub struct Sample {
    pub data: Dataset,
    /// Noise-free teacher output per row.
    pub truth: Vec<f64>,
    /// Planted leaf (0..8) per row, left to right.
    pub leaves: Vec<usize>,
    zone: Vec<usize>,
    action: Vec<usize>,
}

impl PlantedTree {
    pub fn n_continuous(&self) -> usize {
        5 + self.extra_features
    }

    pub fn feature_specs(&self) -> Vec<FeatureSpec> {
        let mut specs: Vec<FeatureSpec> = (0..self.n_continuous())
            .map(|i| FeatureSpec::continuous(format!("x{i}")))
            .collect();
        specs.push(FeatureSpec::categorical("zone", ZONES));
        specs.push(FeatureSpec::categorical("action", ACTIONS));
        specs
    }

    pub fn schema(&self) -> Vec<ColumnDesc> {
        crate::dataset::encoded_schema(&self.feature_specs())
    }

    /// Sidecar schema text matching [`PlantedTree::write_csv`].
    pub fn schema_text(&self) -> String {
        let mut s = String::from("target = q\nepisode = episode\naction = action\n");
        for i in 0..self.n_continuous() {
            let _ = writeln!(s, "feature x{i} = continuous");
        }
        let _ = writeln!(s, "feature zone = categorical: {}", ZONES.join(", "));
        let _ = writeln!(s, "feature action = categorical: {}", ACTIONS.join(", "));
        s
    }

    /// Column index and threshold of the planted root split.
    pub fn root_split(&self) -> (usize, f64) {
        (0, ROOT_THRESHOLD)
    }

    /// Column holding the indicator for `zone = offensive`.
    pub fn zone_column(&self) -> usize {
        self.n_continuous() + 1
    }

    /// Column holding the indicator for `action = shot`.
    pub fn shot_column(&self) -> usize {
        self.n_continuous() + ZONES.len() + 1
    }

    /// Index (0..8) of the planted leaf an encoded row falls in.
    pub fn leaf_of(&self, row: &[f64]) -> usize {
        let (f, t) = self.root_split();
        let (node, gate) = if row[f] <= t {
            (0, row[self.zone_column()])
        } else {
            (2, row[self.shot_column()])
        };
        let k = node + usize::from(gate > 0.5);
        let (feat, thr, ..) = KINKS[k];
        2 * k + usize::from(row[feat] > thr)
    }

    /// Noise-free output for an encoded row.
    pub fn evaluate(&self, row: &[f64]) -> f64 {
        let (f, t) = self.root_split();
        let d = row[f] - t;
        let root = if d <= 0.0 { ROOT_SLOPES.0 * d } else { ROOT_SLOPES.1 * d };
        let (feat, thr, below, above, offset) = KINKS[self.leaf_of(row) / 2];
        let e = row[feat] - thr;
        let kink = if e <= 0.0 { below * e } else { above * e };
        root + offset + kink - kink_mean(thr, below, above)
    }

    /// `n` rows with features uniform on `[0, 1]` and uniform categories.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, self.noise_sd)
            .map_err(|e| Error::Config(format!("invalid noise level {}: {e}", self.noise_sd)))?;
        let schema = self.schema();
        let nc = self.n_continuous();
        let mut columns = vec![Vec::with_capacity(n); schema.len()];
        let (mut zone, mut action) = (Vec::with_capacity(n), Vec::with_capacity(n));
        let (mut truth, mut soft, mut leaves) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        let mut row = vec![0.0; schema.len()];
        for _ in 0..n {
            row.iter_mut().for_each(|v| *v = 0.0);
            for v in row.iter_mut().take(nc) {
                *v = rng.random();
            }
            let z = rng.random_range(0..ZONES.len());
            let a = rng.random_range(0..ACTIONS.len());
            row[nc + z] = 1.0;
            row[nc + ZONES.len() + a] = 1.0;
            let q = self.evaluate(&row);
            truth.push(q);
            soft.push(q + noise.sample(&mut rng));
            leaves.push(self.leaf_of(&row));
            zone.push(z);
            action.push(a);
            for (c, v) in columns.iter_mut().zip(&row) {
                c.push(*v);
            }
        }
        let data = Dataset::new(schema, columns, Some(soft))?;
        let episodes = (0..n).map(|i| format!("g{}", i / EPISODE_LEN)).collect();
        Ok(Sample {
            data: data.with_episodes(episodes)?,
            truth,
            leaves,
            zone,
            action,
        })
    }

    /// Writes `sample` as a CSV with columns `episode, x0.., zone, action, q`.
    pub fn write_csv(&self, sample: &Sample, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let nc = self.n_continuous();
        let mut header = String::from("episode");
        for i in 0..nc {
            let _ = write!(header, ",x{i}");
        }
        header.push_str(",zone,action,q\n");
        let data = &sample.data;
        let episodes = data.episodes().unwrap_or_default();
        let soft = data.require_target()?;
        let mut buf = header;
        for r in 0..data.n_rows() {
            buf.push_str(episodes.get(r).map_or("g0", String::as_str));
            for c in 0..nc {
                let _ = write!(buf, ",{}", data.column(c)[r]);
            }
            let _ = writeln!(buf, ",{},{},{}", ZONES[sample.zone[r]], ACTIONS[sample.action[r]], soft[r]);
            if buf.len() > 1 << 20 {
                w.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))?;
                buf.clear();
            }
        }
        w.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Mean of the kink `below·(x-t)` / `above·(x-t)` for `x` uniform on `[0, 1]`.
fn kink_mean(t: f64, below: f64, above: f64) -> f64 {
    -below * t * t / 2.0 + above * (1.0 - t) * (1.0 - t) / 2.0
}
