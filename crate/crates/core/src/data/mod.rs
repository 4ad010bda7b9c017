//! Dataset loading and synthesis.

mod dataset;
mod error;
mod idx;
mod synth;
mod table;

pub use dataset::{normalize_unit_interval, Dataset, Labels, Normalization};
pub use error::DataError;
pub use idx::{encode_idx, load_idx, parse_idx_images, parse_idx_labels, IMAGE_MAGIC, LABEL_MAGIC};
pub use synth::{digit_templates, synth_digits, SYNTH_NOISE};
pub use table::load_csv;
