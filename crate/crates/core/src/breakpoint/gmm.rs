use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_inputs, clamp_threshold, is_constant, partition_at, SplitCandidate};
use crate::error::{Error, Result};
use crate::util::median;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub max_em_iters: usize,
    /// Stop when the mean log-likelihood per point moves less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            max_em_iters: 100,
            tol: 1e-6,
            seed: 0,
        }
    }
}

const COV_FLOOR: f64 = 1e-6;
/// Consecutive iterations a component may sit on the covariance floor
/// before the fit is declared degenerate.
const MAX_FLOOR_HITS: usize = 5;

/// Symmetric 2x2 covariance `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Clamps both eigenvalues to at least `floor`; reports whether any
    /// eigenvalue was raised.
    fn floored(self, floor: f64) -> (Cov2, bool) {
        let tr = self.xx + self.yy;
        let disc = ((self.xx - self.yy) * 0.5).hypot(self.xy);
        let (l1, l2) = (tr * 0.5 + disc, tr * 0.5 - disc);
        if l2 >= floor {
            return (self, false);
        }
        let (f1, f2) = (l1.max(floor), l2.max(floor));
        // Eigenvector for l1.
        let (vx, vy) = if self.xy.abs() > 0.0 {
            let (a, b) = (l1 - self.yy, self.xy);
            let norm = a.hypot(b);
            (a / norm, b / norm)
        } else if self.xx >= self.yy {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let out = Cov2 {
            xx: f1 * vx * vx + f2 * vy * vy,
            xy: (f1 - f2) * vx * vy,
            yy: f1 * vy * vy + f2 * vx * vx,
        };
        (out, true)
    }

    fn log_density(&self, mean: (f64, f64), p: (f64, f64)) -> f64 {
        let det = self.det();
        let (dx, dy) = (p.0 - mean.0, p.1 - mean.1);
        let q = (self.yy * dx * dx - 2.0 * self.xy * dx * dy + self.xx * dy * dy) / det;
        -0.5 * q - 0.5 * det.ln() - std::f64::consts::LN_2 - std::f64::consts::PI.ln()
    }
}

/// Two-component mixture on standardised `(x, y)`, plus the x threshold
/// where the components' x-marginal posteriors are equal, in raw x units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureFit {
    pub weights: [f64; 2],
    pub means: [(f64, f64); 2],
    pub covariances: [Cov2; 2],
    pub boundary: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
}

struct Standardiser {
    mean: f64,
    scale: f64,
}

impl Standardiser {
    fn fit(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        Standardiser {
            mean,
            scale: if sd > 0.0 { sd } else { 1.0 },
        }
    }

    fn to(&self, v: f64) -> f64 {
        (v - self.mean) / self.scale
    }

    fn from(&self, z: f64) -> f64 {
        self.mean + self.scale * z
    }
}

/// Fits a two-component bivariate Gaussian mixture to `(x, y)` by EM.
///
/// Both coordinates are standardised first. Initialisation is a seeded
/// two-means clustering: a random first centre, the farthest point as the
/// second, then a few Lloyd steps. Covariance eigenvalues are floored at
/// 1e-6; a component stuck on the floor or losing all its weight makes the
/// fit degenerate, reported as a data error.
pub fn fit_gmm(x: &[f64], y: &[f64], cfg: &GmmConfig) -> Result<GaussianMixtureFit> {
    check_inputs(x, y)?;
    let n = x.len();
    if n < 4 {
        return Err(Error::Data(format!("mixture fit needs at least 4 points, got {n}")));
    }
    let sx = Standardiser::fit(x);
    let sy = Standardiser::fit(y);
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(&a, &b)| (sx.to(a), sy.to(b))).collect();

    let (mut weights, mut means, mut covs) = init_two_means(&pts, cfg.seed)?;
    let mut resp = vec![0.0f64; n];
    let mut prev_ll = f64::NEG_INFINITY;
    let mut converged = false;
    let mut floor_hits = [0usize; 2];
    let mut iterations = 0;
    let mut ll = f64::NEG_INFINITY;

    for it in 0..cfg.max_em_iters {
        iterations = it + 1;
        // E step: responsibility of component 0.
        let mut total = 0.0;
        let lw = [weights[0].ln(), weights[1].ln()];
        for (r, &p) in resp.iter_mut().zip(&pts) {
            let a = lw[0] + covs[0].log_density(means[0], p);
            let b = lw[1] + covs[1].log_density(means[1], p);
            let hi = a.max(b);
            let lse = hi + ((a - hi).exp() + (b - hi).exp()).ln();
            *r = (a - lse).exp();
            total += lse;
        }
        ll = total / n as f64;

        // M step.
        let mut nk = [0.0f64; 2];
        let mut sum = [(0.0f64, 0.0f64); 2];
        for (&r, &(px, py)) in resp.iter().zip(&pts) {
            let w = [r, 1.0 - r];
            for k in 0..2 {
                nk[k] += w[k];
                sum[k].0 += w[k] * px;
                sum[k].1 += w[k] * py;
            }
        }
        for k in 0..2 {
            if nk[k] < 1e-9 * n as f64 {
                return Err(Error::Data(format!("mixture component {k} lost all weight")));
            }
            means[k] = (sum[k].0 / nk[k], sum[k].1 / nk[k]);
        }
        let mut acc = [Cov2 { xx: 0.0, xy: 0.0, yy: 0.0 }; 2];
        for (&r, &(px, py)) in resp.iter().zip(&pts) {
            let w = [r, 1.0 - r];
            for k in 0..2 {
                let (dx, dy) = (px - means[k].0, py - means[k].1);
                acc[k].xx += w[k] * dx * dx;
                acc[k].xy += w[k] * dx * dy;
                acc[k].yy += w[k] * dy * dy;
            }
        }
        for k in 0..2 {
            let raw = Cov2 {
                xx: acc[k].xx / nk[k],
                xy: acc[k].xy / nk[k],
                yy: acc[k].yy / nk[k],
            };
            let (c, hit) = raw.floored(COV_FLOOR);
            covs[k] = c;
            floor_hits[k] = if hit { floor_hits[k] + 1 } else { 0 };
            if floor_hits[k] >= MAX_FLOOR_HITS {
                return Err(Error::Data(format!(
                    "mixture component {k} collapsed onto the covariance floor"
                )));
            }
            weights[k] = nk[k] / n as f64;
        }
        let s = weights[0] + weights[1];
        weights = [weights[0] / s, 1.0 - weights[0] / s];

        if (ll - prev_ll).abs() < cfg.tol {
            converged = true;
            break;
        }
        prev_ll = ll;
    }

    let med = sx.to(median(x));
    let boundary = marginal_boundary(weights, means, covs, med).map(|z| sx.from(z));
    Ok(GaussianMixtureFit {
        weights,
        means: [
            (sx.from(means[0].0), sy.from(means[0].1)),
            (sx.from(means[1].0), sy.from(means[1].1)),
        ],
        covariances: covs.map(|c| Cov2 {
            xx: c.xx * sx.scale * sx.scale,
            xy: c.xy * sx.scale * sy.scale,
            yy: c.yy * sy.scale * sy.scale,
        }),
        boundary,
        iterations,
        converged,
        log_likelihood: ll,
    })
}

type Init = ([f64; 2], [(f64, f64); 2], [Cov2; 2]);

fn init_two_means(pts: &[(f64, f64)], seed: u64) -> Result<Init> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let first = pts[rng.random_range(0..pts.len())];
    let second = pts
        .iter()
        .copied()
        .fold((first, 0.0), |(best, bd), p| {
            let d = d2(p, first);
            if d > bd {
                (p, d)
            } else {
                (best, bd)
            }
        })
        .0;
    let mut centres = [first, second];
    let mut assign = vec![0u8; pts.len()];
    for _ in 0..10 {
        let mut sums = [(0.0, 0.0, 0usize); 2];
        for (a, &p) in assign.iter_mut().zip(pts) {
            *a = u8::from(d2(p, centres[1]) < d2(p, centres[0]));
            let s = &mut sums[usize::from(*a)];
            s.0 += p.0;
            s.1 += p.1;
            s.2 += 1;
        }
        for k in 0..2 {
            if sums[k].2 == 0 {
                return Err(Error::Data("two-means initialisation left a cluster empty".into()));
            }
            centres[k] = (sums[k].0 / sums[k].2 as f64, sums[k].1 / sums[k].2 as f64);
        }
    }
    let mut counts = [0usize; 2];
    let mut covs = [Cov2 { xx: 0.0, xy: 0.0, yy: 0.0 }; 2];
    for (&a, &p) in assign.iter().zip(pts) {
        let k = usize::from(a);
        let (dx, dy) = (p.0 - centres[k].0, p.1 - centres[k].1);
        counts[k] += 1;
        covs[k].xx += dx * dx;
        covs[k].xy += dx * dy;
        covs[k].yy += dy * dy;
    }
    let n = pts.len() as f64;
    let covs = [0, 1].map(|k| {
        let c = counts[k] as f64;
        Cov2 {
            xx: covs[k].xx / c,
            xy: covs[k].xy / c,
            yy: covs[k].yy / c,
        }
        .floored(COV_FLOOR)
        .0
    });
    Ok(([counts[0] as f64 / n, counts[1] as f64 / n], centres, covs))
}

/// Equal-posterior point of the two components' x marginals:
/// `pi1 N(x | mu1, s1²) = pi2 N(x | mu2, s2²)`, a quadratic in x. Among the
/// real roots, prefer one between the two component means, then the one
/// nearest `median`.
fn marginal_boundary(w: [f64; 2], mu: [(f64, f64); 2], cov: [Cov2; 2], median: f64) -> Option<f64> {
    let (m1, m2) = (mu[0].0, mu[1].0);
    let (v1, v2) = (cov[0].xx, cov[1].xx);
    let a = 0.5 / v2 - 0.5 / v1;
    let b = m1 / v1 - m2 / v2;
    let c = 0.5 * m2 * m2 / v2 - 0.5 * m1 * m1 / v1 + (w[0] / w[1]).ln() - 0.5 * (v1 / v2).ln();
    let roots: Vec<f64> = if a.abs() < 1e-12 * (0.5 / v1 + 0.5 / v2) {
        if b == 0.0 {
            return None;
        }
        vec![-c / b]
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // Numerically stable pair of roots.
        let q = -0.5 * (b + b.signum() * sq);
        let mut r = vec![q / a];
        if q != 0.0 {
            r.push(c / q);
        }
        r
    };
    let (lo, hi) = (m1.min(m2), m1.max(m2));
    let nearest = |rs: &[f64]| {
        rs.iter()
            .copied()
            .filter(|r| r.is_finite())
            .min_by(|p, q| (p - median).abs().total_cmp(&(q - median).abs()))
    };
    let inside: Vec<f64> = roots.iter().copied().filter(|&r| r >= lo && r <= hi).collect();
    if inside.is_empty() {
        nearest(&roots)
    } else {
        nearest(&inside)
    }
}

/// Fits the mixture, takes its x boundary as the threshold, moves it into
/// the range that keeps `m` rows per side and scores it by variance
/// reduction. Degenerate fits yield `None`.
pub fn best_split_gmm(x: &[f64], y: &[f64], m: usize, cfg: &GmmConfig) -> Result<Option<SplitCandidate>> {
    check_inputs(x, y)?;
    if y.len() < 2 * m.max(1) || y.len() < 4 || is_constant(y) || is_constant(x) {
        return Ok(None);
    }
    let fit = match fit_gmm(x, y, cfg) {
        Ok(f) => f,
        Err(Error::Data(msg)) => {
            log::debug!("mixture heuristic skipped: {msg}");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let Some(c) = fit.boundary.and_then(|b| clamp_threshold(x, m, b)) else {
        return Ok(None);
    };
    let p = partition_at(x, y, c);
    if p.reduction <= 0.0 {
        return Ok(None);
    }
    Ok(Some(SplitCandidate {
        feature_index: 0,
        threshold: c,
        score: p.reduction,
        reduction: p.reduction,
        left_count: p.left,
        right_count: p.right,
    }))
}
