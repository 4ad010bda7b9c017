use std::path::Path;

use super::dataset::{Dataset, Labels};
use super::error::DataError;

/// Loads a comma-separated table with a header row.
///
/// Every column other than `label_column` becomes a feature, in header
/// order. Labels that are all whole numbers become remapped class ids;
/// anything else is kept as a real target. Rows are numbered from 1,
/// excluding the header.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let mut reader =
        csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> =
        reader.headers().map_err(|e| csv_error(path, e))?.iter().map(|h| h.trim().to_string()).collect();
    let label_at = header.iter().position(|h| h == label_column).ok_or_else(|| DataError::Parse {
        row: 0,
        column: label_column.to_string(),
        message: "label column not found in header".into(),
    })?;

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != header.len() {
            return Err(DataError::Parse {
                row,
                column: header.get(record.len()).cloned().unwrap_or_else(|| format!("#{}", record.len() + 1)),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| DataError::Parse {
                row,
                column: header[c].clone(),
                message: format!("not a finite number: {cell:?}"),
            })?;
            if c == label_at {
                raw_labels.push(v);
            } else {
                features.push(v);
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(DataError::Empty);
    }
    let cols = header.len() - 1;
    if raw_labels.iter().all(|v| v.fract() == 0.0) {
        Dataset::with_raw_classes(features, cols, &raw_labels)
    } else {
        Dataset::new(features, cols, Labels::Targets(raw_labels))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> DataError {
    let row = e.position().map_or(0, |p| p.record() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => DataError::Io { path: path.to_path_buf(), source },
        other => DataError::Parse { row, column: String::new(), message: format!("{other:?}") },
    }
}
