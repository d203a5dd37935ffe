//! CSV and JSON artifacts plus the run manifest.

use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// A finished output file held in memory until the run succeeds.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    /// Data rows for CSV files.
    pub rows: Option<usize>,
}

pub struct Table {
    name: String,
    writer: csv::Writer<Vec<u8>>,
    rows: usize,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Table { name: name.to_string(), writer, rows: 0 })
    }

    pub fn row<R: Serialize>(&mut self, record: R) -> Result<(), CliError> {
        self.writer.serialize(record)?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<Artifact, CliError> {
        let bytes = self.writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        let text = std::str::from_utf8(&bytes).expect("csv writes utf-8");
        if let Some(line) = text.lines().skip(1).find(|l| l.split(',').any(|f| matches!(f, "NaN" | "inf" | "-inf"))) {
            return Err(CliError::Numerical(format!("{}: non-finite value in row {line:?}", self.name)));
        }
        Ok(Artifact { name: self.name, bytes, rows: Some(self.rows) })
    }
}

/// Pretty JSON with the schema tag added at the top level.
pub fn json(name: &str, mut value: serde_json::Value) -> Artifact {
    if let Some(obj) = value.as_object_mut() {
        obj.insert("schema".to_string(), SCHEMA.into());
    }
    let mut bytes = serde_json::to_vec_pretty(&value).expect("serializable value");
    bytes.push(b'\n');
    Artifact { name: name.to_string(), bytes, rows: None }
}

pub fn text(name: &str, s: String) -> Artifact {
    Artifact { name: name.to_string(), bytes: s.into_bytes(), rows: None }
}

#[derive(Serialize)]
struct FileEntry<'a> {
    name: &'a str,
    bytes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<usize>,
}

/// Writes every artifact into `dir`, then `manifest.json`.
pub fn write_run(
    dir: &Path,
    experiment: &str,
    config: &crate::config::RunConfig,
    artifacts: &[Artifact],
    wall_time: f64,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
    }
    let files: Vec<FileEntry> =
        artifacts.iter().map(|a| FileEntry { name: &a.name, bytes: a.bytes.len(), rows: a.rows }).collect();
    let manifest = serde_json::json!({
        "experiment": experiment,
        "config": config,
        "versions": {
            "fhm-cli": env!("CARGO_PKG_VERSION"),
            "fhm-core": fhm_core::VERSION,
        },
        "wall_time_s": wall_time,
        "threads": rayon::current_num_threads(),
        "files": files,
    });
    let m = json("manifest.json", manifest);
    std::fs::write(dir.join(&m.name), &m.bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_rows_are_numerical_failures() {
        let mut t = Table::new("x.csv", &["a", "b"]).unwrap();
        t.row((1.0, 2.0)).unwrap();
        t.row((f64::NAN, 2.0)).unwrap();
        let e = t.finish().err().unwrap();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn table_counts_rows_and_leaves_options_empty() {
        let mut t = Table::new("x.csv", &["a", "b"]).unwrap();
        t.row((0.5, None::<f64>)).unwrap();
        let a = t.finish().unwrap();
        assert_eq!(a.rows, Some(1));
        assert_eq!(String::from_utf8(a.bytes).unwrap(), "a,b\n0.5,\n");
    }
}
