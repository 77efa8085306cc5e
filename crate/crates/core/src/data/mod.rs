//! Dataset generation, ingestion and export.

pub mod export;
pub mod idx;
pub mod sequences;

pub use export::{as_image, csv_record, encode_pgm, format_f64, read_csv, write_csv, write_pgm};
pub use idx::{parse_idx, read_idx, write_idx, IdxImages};
pub use sequences::{SequenceSet, Standardization, WindowLayout, WindowedDataset};
