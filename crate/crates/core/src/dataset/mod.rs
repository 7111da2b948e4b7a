//! Labeled image datasets on disk.
//!
//! Readers return a [`DatasetManifest`] describing the whole dataset together
//! with a lazy [`RecordStream`] that decodes one record at a time. Writers
//! consume records in order and always finish by writing a provenance
//! manifest (`manifest.json`) next to the data.

mod cifar;
mod idx;
mod image_dir;
pub mod pnm;
mod writer;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

pub use cifar::{read_cifar_bin, CIFAR10_CLASSES, CIFAR_RECORD_BYTES};
pub use idx::{read_idx, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use image_dir::read_image_dir;
pub use writer::{
    write_enhanced, Codec, DatasetSink, EnhancementRecord, ProvenanceManifest, MANIFEST_FILE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    Idx,
    CifarBin,
    ImageDir,
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::Idx => "idx",
            DatasetFormat::CifarBin => "cifar_bin",
            DatasetFormat::ImageDir => "image_dir",
        })
    }
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idx" => Ok(DatasetFormat::Idx),
            "cifar" | "cifar_bin" => Ok(DatasetFormat::CifarBin),
            "image_dir" | "image-dir" | "dir" => Ok(DatasetFormat::ImageDir),
            other => Err(Error::param(format!(
                "unknown dataset format {other:?} (expected idx, cifar_bin or image_dir)"
            ))),
        }
    }
}

/// Description of a dataset as found on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: DatasetFormat,
    /// `(width, height, channels)`
    pub image_shape: (usize, usize, usize),
    pub num_items: usize,
    pub label_names: Vec<String>,
    pub source_paths: Vec<PathBuf>,
    /// Records contributed by each source: one entry per CIFAR batch file,
    /// per class directory, or a single entry for an IDX pair.
    pub source_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub image: Image,
    pub label: usize,
}

/// Lazily decoded records in file order.
pub type RecordStream = Box<dyn Iterator<Item = Result<LabeledImage>> + Send>;

/// Opens a dataset. IDX takes `[images, labels]`, CIFAR-10 takes one or
/// more batch files and an image directory takes its root.
pub fn open(format: DatasetFormat, paths: &[PathBuf]) -> Result<(DatasetManifest, RecordStream)> {
    match format {
        DatasetFormat::Idx => match paths {
            [images, labels] => read_idx(images, labels),
            _ => Err(Error::param(
                "IDX datasets need exactly two paths: images file then labels file",
            )),
        },
        DatasetFormat::CifarBin => read_cifar_bin(paths),
        DatasetFormat::ImageDir => match paths {
            [root] => read_image_dir(root),
            _ => Err(Error::param(
                "image_dir datasets need exactly one root path",
            )),
        },
    }
}

/// Per-class record counts, for checking that label distributions survive
/// a rewrite.
pub fn label_histogram(records: impl IntoIterator<Item = usize>, classes: usize) -> Vec<usize> {
    let mut hist = vec![0; classes];
    for label in records {
        if label >= hist.len() {
            hist.resize(label + 1, 0);
        }
        hist[label] += 1;
    }
    hist
}
