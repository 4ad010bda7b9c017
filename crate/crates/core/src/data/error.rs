use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{field}: file truncated at byte offset {offset}")]
    Truncated { field: &'static str, offset: u64 },

    #[error("{field} at byte offset {offset}: magic {found:#010x}, expected {expected:#010x}")]
    BadMagic { field: &'static str, offset: u64, expected: u32, found: u32 },

    #[error("{field} at byte offset {offset}: {images} images but {labels} labels")]
    CountMismatch { field: &'static str, offset: u64, images: usize, labels: usize },

    #[error("row {row}, column {column}: {message}")]
    Parse { row: usize, column: String, message: String },

    #[error("dataset is empty")]
    Empty,

    #[error("{0}")]
    Shape(String),
}
