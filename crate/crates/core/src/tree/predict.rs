use super::{ModelTree, Node, NodeId};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

impl ModelTree {
    /// Leaf reached by a row whose feature values come from `x`; a row goes
    /// left iff `x[feature] <= threshold`.
    #[inline]
    pub(crate) fn route_with(&self, x: impl Fn(usize) -> f64) -> NodeId {
        let mut id = self.root();
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = &self.nodes[id]
        {
            id = if x(*feature) <= *threshold { *left } else { *right };
        }
        id
    }

    #[inline]
    fn predict_with(&self, x: impl Fn(usize) -> f64 + Copy) -> f64 {
        match &self.nodes[self.route_with(x)] {
            Node::Leaf { model, .. } => model.eval_with(x),
            Node::Split { .. } => unreachable!("routing ends at a leaf"),
        }
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features() {
            return Err(Error::Config(format!(
                "row has {} features, the tree expects {}",
                row.len(),
                self.n_features()
            )));
        }
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("feature {:?} is not finite", self.feature_name(i))));
        }
        Ok(())
    }

    /// Leaf id that `row` is routed to.
    pub fn leaf_for(&self, row: &[f64]) -> Result<NodeId> {
        self.check_row(row)?;
        Ok(self.route_with(|i| row[i]))
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        Ok(self.predict_with(|i| row[i]))
    }

    /// Row-wise predictions, bit-identical to calling [`predict`](Self::predict)
    /// on each row.
    pub fn predict_batch(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_fingerprint(&data.fingerprint())?;
        let cols = data.columns();
        for (i, c) in cols.iter().enumerate() {
            if let Some(r) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::Input(format!(
                    "row {r}: feature {:?} is not finite",
                    self.feature_name(i)
                )));
            }
        }
        Ok((0..data.n_rows()).map(|r| self.predict_with(|i| cols[i][r])).collect())
    }

    /// Leaf id for every row of `data`.
    pub fn route_batch(&self, data: &Dataset) -> Result<Vec<NodeId>> {
        self.check_fingerprint(&data.fingerprint())?;
        let cols = data.columns();
        Ok((0..data.n_rows()).map(|r| self.route_with(|i| cols[i][r])).collect())
    }

    /// Rows of `data` reaching each node, indexed by node id.
    pub(crate) fn node_rows(&self, data: &Dataset) -> Vec<Vec<usize>> {
        let cols = data.columns();
        let mut out = vec![Vec::new(); self.nodes.len()];
        out[self.root()] = (0..data.n_rows()).collect();
        for id in 0..self.nodes.len() {
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } = &self.nodes[id]
            {
                let rows = std::mem::take(&mut out[id]);
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| cols[*feature][r] <= *threshold);
                out[*left] = l;
                out[*right] = r;
                out[id] = rows;
            }
        }
        out
    }
}
