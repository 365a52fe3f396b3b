//! Feature matrix files: one CSV per project plus a corpus manifest.
//!
//! CSV schema: `month,<18 feature columns>` with month numbered from 1.
//! Floats are written in Rust's shortest round-trip form, so a sequence
//! reloads bit-identically.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSequence, FeatureVector};
use crate::types::{GradStatus, FEATURE_COLUMNS, NUM_FEATURES};

/// One project entry in the corpus manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub project_id: String,
    pub label: u8,
    pub months: usize,
    pub csv_path: String,
}

pub fn write_feature_csv(seq: &FeatureSequence, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("month");
    for col in FEATURE_COLUMNS {
        header.push(',');
        header.push_str(col);
    }
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    for (i, month) in seq.months.iter().enumerate() {
        let mut line = (i + 1).to_string();
        for v in month.as_row() {
            line.push(',');
            line.push_str(&format!("{v}"));
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn load_feature_csv(path: &Path, project_id: &str, label: GradStatus) -> Result<FeatureSequence> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut csv = csv::Reader::from_reader(BufReader::new(file));
    let headers = csv
        .headers()
        .map_err(|e| Error::UnreadableStream(e.to_string()))?
        .clone();
    let expected: Vec<&str> = std::iter::once("month").chain(FEATURE_COLUMNS).collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Other(format!(
            "feature csv {} has unexpected columns {:?}",
            path.display(),
            got
        )));
    }
    let mut months = Vec::new();
    for row in csv.records() {
        let row = row.map_err(|e| Error::UnreadableStream(e.to_string()))?;
        let mut values = [0.0; NUM_FEATURES];
        for (i, v) in values.iter_mut().enumerate() {
            let cell = row.get(i + 1).unwrap_or("");
            *v = cell.parse().map_err(|_| {
                Error::Other(format!(
                    "bad float `{cell}` in {} column {}",
                    path.display(),
                    FEATURE_COLUMNS[i]
                ))
            })?;
        }
        months.push(FeatureVector::from_row(&values));
    }
    Ok(FeatureSequence {
        project_id: project_id.to_string(),
        label,
        months,
    })
}

pub fn write_manifest(entries: &[ManifestEntry], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), entries)
        .map_err(|e| Error::Other(format!("manifest write failed: {e}")))?;
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = File::open(path).map_err(|_| Error::MissingArtifact {
        stage: "features".into(),
        path: PathBuf::from(path),
    })?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Other(format!("manifest parse failed: {e}")))
}

/// Load every sequence named by a manifest, resolving csv paths relative to
/// the manifest's directory when they are not absolute.
pub fn load_corpus(manifest_path: &Path) -> Result<Vec<FeatureSequence>> {
    let entries = load_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        let label = GradStatus::from_label(entry.label)
            .ok_or_else(|| Error::Other(format!("bad label {} for {}", entry.label, entry.project_id)))?;
        let csv_path = PathBuf::from(&entry.csv_path);
        let csv_path = if csv_path.is_absolute() {
            csv_path
        } else {
            base.join(csv_path)
        };
        out.push(load_feature_csv(&csv_path, &entry.project_id, label)?);
    }
    Ok(out)
}
