use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Binary,
    Categorical(Vec<String>),
}

/// One raw input column as declared by the user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// 0 for the current event, k for a value already shifted k events back.
    #[serde(default)]
    pub lag: usize,
}

impl FeatureSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Continuous,
            lag: 0,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Binary,
            lag: 0,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical(levels.into_iter().map(Into::into).collect()),
            lag: 0,
        }
    }

    pub fn validate(&self, window: usize) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Schema("feature with empty name".into()));
        }
        if let FeatureKind::Categorical(levels) = &self.kind {
            if levels.is_empty() {
                return Err(Error::Schema(format!("categorical feature {:?} has no levels", self.name)));
            }
            let mut seen = HashSet::new();
            for level in levels {
                if !seen.insert(level) {
                    return Err(Error::Schema(format!(
                        "categorical feature {:?} lists level {level:?} twice",
                        self.name
                    )));
                }
            }
        }
        if window > 0 && self.lag >= window {
            return Err(Error::Schema(format!(
                "feature {:?} has lag {} but the window is {window}",
                self.name, self.lag
            )));
        }
        Ok(())
    }
}

/// Sidecar schema describing how to read an event CSV.
///
/// The text form is one `key = value` pair per line; `#` starts a comment.
///
/// ```text
/// target  = q_home
/// episode = game_id
/// window  = 10
/// action  = action
/// pad     = 0
/// feature time_remaining = continuous
/// feature blocked        = binary
/// feature manpower       = categorical: even, short, power
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub features: Vec<FeatureSpec>,
    pub target: Option<String>,
    pub episode: Option<String>,
    pub window: usize,
    /// Categorical feature holding the action taken at each event.
    pub action: Option<String>,
    /// Value written into lag columns whose history falls before the
    /// episode start.
    pub pad: f64,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            features: Vec::new(),
            target: None,
            episode: None,
            window: 1,
            action: None,
            pad: 0.0,
        }
    }
}

impl SchemaConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.features.is_empty() {
            return Err(Error::Schema("schema declares no features".into()));
        }
        let mut names = HashSet::new();
        for f in &self.features {
            f.validate(self.window)?;
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("feature {:?} declared twice", f.name)));
            }
        }
        if let Some(action) = &self.action {
            match self.features.iter().find(|f| &f.name == action) {
                Some(FeatureSpec {
                    kind: FeatureKind::Categorical(_),
                    ..
                }) => {}
                Some(_) => {
                    return Err(Error::Schema(format!("action feature {action:?} must be categorical")))
                }
                None => return Err(Error::Schema(format!("action feature {action:?} is not declared"))),
            }
        }
        if !self.pad.is_finite() {
            return Err(Error::Config("pad value must be finite".into()));
        }
        Ok(())
    }
}

impl FromStr for SchemaConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = SchemaConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Schema(format!("line {}: {msg}: {raw:?}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if let Some(name) = key.strip_prefix("feature") {
                let name = name.trim();
                if name.is_empty() || !key.starts_with("feature ") && !key.starts_with("feature\t") {
                    return Err(bad("expected `feature <name> = <kind>`"));
                }
                let (name, lag) = split_lag(name).map_err(|m| bad(&m))?;
                let kind = parse_kind(value).map_err(|m| bad(&m))?;
                cfg.features.push(FeatureSpec { name, kind, lag });
                continue;
            }
            match key {
                "target" => cfg.target = Some(value.to_string()),
                "episode" => cfg.episode = Some(value.to_string()),
                "action" => cfg.action = Some(value.to_string()),
                "window" => cfg.window = value.parse().map_err(|_| bad("window must be a positive integer"))?,
                "pad" => cfg.pad = value.parse().map_err(|_| bad("pad must be a number"))?,
                _ => return Err(bad("unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `speed@2` declares a column that already holds the value two events back.
fn split_lag(name: &str) -> std::result::Result<(String, usize), String> {
    match name.rsplit_once('@') {
        Some((base, lag)) => {
            let lag = lag.trim().parse().map_err(|_| format!("bad lag {lag:?}"))?;
            Ok((base.trim().to_string(), lag))
        }
        None => Ok((name.to_string(), 0)),
    }
}

fn parse_kind(value: &str) -> std::result::Result<FeatureKind, String> {
    let (head, rest) = match value.split_once(':') {
        Some((h, r)) => (h.trim(), Some(r)),
        None => (value.trim(), None),
    };
    match (head, rest) {
        ("continuous", None) => Ok(FeatureKind::Continuous),
        ("binary", None) => Ok(FeatureKind::Binary),
        ("categorical", Some(levels)) => Ok(FeatureKind::Categorical(
            levels
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
        )),
        ("categorical", None) => Err("categorical features need `categorical: a, b, ...`".into()),
        _ => Err(format!("unknown feature kind {value:?}")),
    }
}
