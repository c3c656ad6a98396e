use crate::error::{Error, Result};

/// What the first event of an episode is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpactBaseline {
    /// `impact = q - value`.
    Constant(f64),
    /// Leave the first event of each episode without an impact.
    SkipFirst,
}

impl Default for ImpactBaseline {
    /// Baseline 0: the first action is credited with its whole action-value.
    fn default() -> Self {
        ImpactBaseline::Constant(0.0)
    }
}

/// Impact of each event: the change in action-value from the previous event
/// of the same episode, `q[t] - q[t-1]`.
///
/// Rows must be grouped by episode and, when `timestamps` are given,
/// chronological within each episode; an episode id that reappears after
/// another episode started, or a timestamp going backwards, is a data error.
pub fn compute_impact(
    q: &[f64],
    episode_ids: &[String],
    timestamps: Option<&[f64]>,
    baseline: ImpactBaseline,
) -> Result<Vec<Option<f64>>> {
    if q.len() != episode_ids.len() {
        return Err(Error::Data(format!(
            "{} action-values for {} episode ids",
            q.len(),
            episode_ids.len()
        )));
    }
    if let Some(ts) = timestamps {
        if ts.len() != q.len() {
            return Err(Error::Data(format!("{} timestamps for {} events", ts.len(), q.len())));
        }
    }
    let mut finished = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(q.len());
    for t in 0..q.len() {
        let first = t == 0 || episode_ids[t] != episode_ids[t - 1];
        if first {
            if t > 0 {
                finished.insert(episode_ids[t - 1].as_str());
            }
            if finished.contains(episode_ids[t].as_str()) {
                return Err(Error::Data(format!(
                    "row {t}: episode {:?} resumes after another episode",
                    episode_ids[t]
                )));
            }
            out.push(match baseline {
                ImpactBaseline::Constant(b) => Some(q[t] - b),
                ImpactBaseline::SkipFirst => None,
            });
        } else {
            if let Some(ts) = timestamps {
                if ts[t] < ts[t - 1] {
                    return Err(Error::Data(format!(
                        "row {t}: timestamp {} precedes {} within episode {:?}",
                        ts[t],
                        ts[t - 1],
                        episode_ids[t]
                    )));
                }
            }
            out.push(Some(q[t] - q[t - 1]));
        }
    }
    Ok(out)
}
