use std::fs::File;
use std::path::Path;

use super::schema::{FeatureKind, FeatureSpec, SchemaConfig};
use super::{ColumnDesc, ColumnKind, Dataset};
use crate::error::{Error, Result};

/// Reads an event CSV, one-hot encoding categorical features and mapping
/// binary features to 0/1. Row order is preserved.
pub fn load_csv(path: impl AsRef<Path>, schema: &[FeatureSpec], target_column: &str) -> Result<Dataset> {
    let cfg = SchemaConfig {
        features: schema.to_vec(),
        target: Some(target_column.to_string()),
        ..SchemaConfig::default()
    };
    load_csv_with(path, &cfg)
}

/// Like [`load_csv`] but driven by a full sidecar config: the target column
/// is optional (teacher-labeled runs) and the episode column, when named,
/// is attached for lag expansion and impact computation.
pub fn load_csv_with(path: impl AsRef<Path>, cfg: &SchemaConfig) -> Result<Dataset> {
    let path = path.as_ref();
    cfg.validate()?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("{}: missing column {name:?}", path.display())))
    };

    let mut sources = Vec::with_capacity(cfg.features.len());
    for f in &cfg.features {
        sources.push(find(&f.name)?);
    }
    let target_idx = cfg.target.as_deref().map(find).transpose()?;
    let episode_idx = cfg.episode.as_deref().map(find).transpose()?;

    let schema = encoded_schema(&cfg.features);
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); schema.len()];
    let mut target = target_idx.map(|_| Vec::new());
    let mut episodes = episode_idx.map(|_| Vec::new());

    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    while reader.read_record(&mut record)? {
        let mut out = 0usize;
        for (f, &src) in cfg.features.iter().zip(&sources) {
            let cell = record.get(src).unwrap_or("").trim();
            match &f.kind {
                FeatureKind::Continuous => {
                    columns[out].push(parse_number(cell, row, &f.name)?);
                    out += 1;
                }
                FeatureKind::Binary => {
                    columns[out].push(parse_binary(cell, row, &f.name)?);
                    out += 1;
                }
                FeatureKind::Categorical(levels) => {
                    let hit = levels.iter().position(|l| l == cell).ok_or_else(|| Error::Level {
                        row,
                        feature: f.name.clone(),
                        value: cell.to_string(),
                    })?;
                    for j in 0..levels.len() {
                        columns[out + j].push(if j == hit { 1.0 } else { 0.0 });
                    }
                    out += levels.len();
                }
            }
        }
        if let (Some(t), Some(idx)) = (target.as_mut(), target_idx) {
            let name = cfg.target.as_deref().unwrap_or_default();
            t.push(parse_number(record.get(idx).unwrap_or("").trim(), row, name)?);
        }
        if let (Some(e), Some(idx)) = (episodes.as_mut(), episode_idx) {
            e.push(record.get(idx).unwrap_or("").trim().to_string());
        }
        row += 1;
    }

    let mut data = Dataset::new(schema, columns, target)?;
    if let Some(e) = episodes {
        data = data.with_episodes(e)?;
    }
    Ok(data)
}

pub(crate) fn encoded_schema(features: &[FeatureSpec]) -> Vec<ColumnDesc> {
    let mut out = Vec::new();
    for f in features {
        let tag = |name: String| {
            if f.lag == 0 {
                name
            } else {
                format!("{name}(t-{})", f.lag)
            }
        };
        match &f.kind {
            FeatureKind::Continuous | FeatureKind::Binary => out.push(ColumnDesc {
                name: tag(f.name.clone()),
                base: tag(f.name.clone()),
                feature: f.name.clone(),
                kind: if f.kind == FeatureKind::Binary {
                    ColumnKind::Binary
                } else {
                    ColumnKind::Continuous
                },
                lag: f.lag,
            }),
            FeatureKind::Categorical(levels) => {
                for level in levels {
                    let name = tag(format!("{}={level}", f.name));
                    out.push(ColumnDesc {
                        name: name.clone(),
                        base: name,
                        feature: f.name.clone(),
                        kind: ColumnKind::OneHot { level: level.clone() },
                        lag: f.lag,
                    });
                }
            }
        }
    }
    out
}

fn parse_number(cell: &str, row: usize, column: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

fn parse_binary(cell: &str, row: usize, column: &str) -> Result<f64> {
    match cell.to_ascii_lowercase().as_str() {
        "true" | "t" | "yes" | "y" | "1" | "1.0" => Ok(1.0),
        "false" | "f" | "no" | "n" | "0" | "0.0" => Ok(0.0),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn binary_feature_becomes_one_column() {
        let f = write("blocked,q\ntrue,0.1\nfalse,0.2\nTRUE,0.3\n");
        let d = load_csv(f.path(), &[FeatureSpec::binary("blocked")], "q").unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_cols(), 1);
        assert_eq!(d.column(0), &[1.0, 0.0, 1.0]);
        assert_eq!(d.target().unwrap(), &[0.1, 0.2, 0.3]);
    }

    #[test]
    fn categorical_expands_to_one_hot() {
        let f = write("manpower,q\neven,0\nshort,0\npower,0\n");
        let spec = FeatureSpec::categorical("manpower", ["even", "short", "power"]);
        let d = load_csv(f.path(), &[spec], "q").unwrap();
        assert_eq!(d.n_cols(), 3);
        assert_eq!(d.schema()[1].name, "manpower=short");
        for r in 0..3 {
            assert_eq!(d.row(r).iter().sum::<f64>(), 1.0);
            assert_eq!(d.row(r)[r], 1.0);
        }
    }

    #[test]
    fn missing_target_is_a_schema_error() {
        let f = write("x\n1\n2\n");
        let err = load_csv(f.path(), &[FeatureSpec::continuous("x")], "q").unwrap_err();
        match err {
            Error::Schema(msg) => assert!(msg.contains("\"q\"")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_numeric_cell_reports_row() {
        let f = write("x,q\n1,0\nabc,0\n");
        let err = load_csv(f.path(), &[FeatureSpec::continuous("x")], "q").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }), "{err:?}");
    }

    #[test]
    fn unknown_level_reports_row() {
        let f = write("a,q\nx,0\nx,0\nz,0\n");
        let err = load_csv(f.path(), &[FeatureSpec::categorical("a", ["x", "y"])], "q").unwrap_err();
        assert!(matches!(err, Error::Level { row: 2, .. }), "{err:?}");
    }

    #[test]
    fn sidecar_attaches_episodes_and_allows_no_target() {
        let f = write("game,x\ng1,1\ng1,2\ng2,3\n");
        let cfg: SchemaConfig = "episode = game\nfeature x = continuous".parse().unwrap();
        let d = load_csv_with(f.path(), &cfg).unwrap();
        assert!(d.target().is_none());
        assert_eq!(d.episodes().unwrap(), &["g1", "g1", "g2"]);
    }
}
