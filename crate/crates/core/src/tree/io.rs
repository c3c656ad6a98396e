use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelTree, Node};
use crate::dataset::schema_fingerprint;
use crate::error::{Error, Result};

pub const FORMAT_NAME: &str = "mimictree.model_tree";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct DocumentRef<'a> {
    format: &'a str,
    version: u32,
    #[serde(flatten)]
    tree: &'a ModelTree,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct Document {
    #[serde(flatten)]
    tree: ModelTree,
}

impl ModelTree {
    /// Versioned JSON document. Floats are written in shortest round-trip
    /// form, so a reloaded tree predicts bit-identically.
    pub fn to_json(&self) -> Result<String> {
        let doc = DocumentRef {
            format: FORMAT_NAME,
            version: FORMAT_VERSION,
            tree: self,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn to_json_value(&self) -> Result<serde_json::Value> {
        Ok(serde_json::from_str(&self.to_json()?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: Header =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("not a model tree document: {e}")))?;
        if header.format != FORMAT_NAME {
            return Err(Error::Format(format!("unexpected document format {:?}", header.format)));
        }
        if header.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model tree version {} (this build reads {FORMAT_VERSION})",
                header.version
            )));
        }
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        doc.tree.validate()?;
        Ok(doc.tree)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Structural checks on a deserialised tree.
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Format(msg));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        if schema_fingerprint(&self.schema) != self.fingerprint {
            return bad("schema fingerprint does not match the stored schema".into());
        }
        let d = self.schema.len();
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if *feature >= d || !threshold.is_finite() {
                        return bad(format!("node {id}: invalid split"));
                    }
                    for &c in [left, right] {
                        if c <= id || c >= self.nodes.len() || seen[c] {
                            return bad(format!("node {id}: invalid child {c}"));
                        }
                        seen[c] = true;
                    }
                }
                Node::Leaf { model, .. } => {
                    if model.weights.len() != d {
                        return bad(format!("node {id}: leaf has {} weights for {d} features", model.weights.len()));
                    }
                }
            }
        }
        if let Some(id) = seen.iter().position(|s| !s) {
            return bad(format!("node {id} is unreachable"));
        }
        Ok(())
    }
}
