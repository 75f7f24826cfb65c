//! Radon barcodes for grayscale image retrieval.
//!
//! An image is normalized to a small square, projected at a handful of angles,
//! and each projection is binarized into a short bit string; the concatenation
//! is the image's barcode. Barcodes compare by Hamming distance, which makes
//! nearest-neighbor retrieval cheap and plays well with bit-sampling LSH.
//! Retrieval quality against annotated corpora is scored with the hierarchical
//! IRMA-code error metric.
//!
//! Modules follow the pipeline: [`imaging`] loads and resizes, [`radon`]
//! projects, [`barcode`] encodes and compares, [`index`] searches, [`irma`]
//! scores.

pub mod barcode;
pub mod imaging;
pub mod index;
pub mod irma;
pub mod radon;

pub use barcode::{encode_minmax, encode_threshold, hamming, Barcode, EncoderKind};
pub use imaging::{load_grayscale, normalize, GrayImage};
pub use index::{Index, IndexEntry, LshConfig};
pub use irma::{code_error, total_error, BranchTable, IrmaCode};
pub use radon::{project, ProjectionSet};
