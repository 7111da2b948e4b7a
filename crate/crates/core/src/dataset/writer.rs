use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cifar::CIFAR_RECORD_BYTES;
use super::idx::{IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
use super::pnm::encode_pnm;
use super::{DatasetFormat, DatasetManifest, LabeledImage};
use crate::error::{Error, Result};
use crate::TOOL_VERSION;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Output container for an enhanced dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Codec {
    /// Same container as the source.
    #[default]
    Same,
    ImageDir,
}

impl std::str::FromStr for Codec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "same" => Ok(Codec::Same),
            "image_dir" | "image-dir" | "dir" => Ok(Codec::ImageDir),
            other => Err(Error::param(format!(
                "unknown codec {other:?} (expected same or image_dir)"
            ))),
        }
    }
}

/// Which enhancement produced a dataset, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancementRecord {
    pub method: String,
    pub params: serde_json::Value,
}

/// The `manifest.json` written beside every emitted dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceManifest {
    pub format: DatasetFormat,
    /// `[width, height, channels]`
    pub shape: [usize; 3],
    pub count: usize,
    pub classes: Vec<String>,
    pub enhancement: EnhancementRecord,
    pub tool_version: String,
    /// Data files relative to the output root.
    pub files: Vec<String>,
}

impl ProvenanceManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| Error::format(format!("{}: {e}", path.display())))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn file_name(path: &Path) -> Result<String> {
    path.file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::param(format!("{}: no usable file name", path.display())))
}

enum Target {
    Idx {
        images: BufWriter<File>,
        labels: BufWriter<File>,
    },
    Cifar {
        counts: Vec<usize>,
        file: usize,
        in_file: usize,
        writer: Option<BufWriter<File>>,
    },
    Dir,
}

/// Streaming writer that accepts records in order.
pub struct DatasetSink {
    root: PathBuf,
    source: DatasetManifest,
    format: DatasetFormat,
    files: Vec<String>,
    target: Target,
    written: usize,
}

impl DatasetSink {
    pub fn create(out_root: &Path, source: &DatasetManifest, codec: Codec) -> Result<Self> {
        fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;
        let format = match codec {
            Codec::Same => source.format,
            Codec::ImageDir => DatasetFormat::ImageDir,
        };
        let (w, h, c) = source.image_shape;
        let mut files = Vec::new();
        let target = match format {
            DatasetFormat::Idx => {
                if c != 1 {
                    return Err(Error::param(
                        "IDX output supports single-channel images only",
                    ));
                }
                let (img_name, lbl_name) = match source.format {
                    DatasetFormat::Idx => (
                        file_name(&source.source_paths[0])?,
                        file_name(&source.source_paths[1])?,
                    ),
                    _ => ("images-idx3-ubyte".into(), "labels-idx1-ubyte".into()),
                };
                let mut images = create(&out_root.join(&img_name))?;
                let mut labels = create(&out_root.join(&lbl_name))?;
                let n = source.num_items as u32;
                let mut header = Vec::with_capacity(16);
                for v in [IDX_IMAGES_MAGIC, n, h as u32, w as u32] {
                    header.extend_from_slice(&v.to_be_bytes());
                }
                images
                    .write_all(&header)
                    .map_err(|e| Error::io(out_root.join(&img_name), e))?;
                header.clear();
                for v in [IDX_LABELS_MAGIC, n] {
                    header.extend_from_slice(&v.to_be_bytes());
                }
                labels
                    .write_all(&header)
                    .map_err(|e| Error::io(out_root.join(&lbl_name), e))?;
                files.push(img_name);
                files.push(lbl_name);
                Target::Idx { images, labels }
            }
            DatasetFormat::CifarBin => {
                if source.format != DatasetFormat::CifarBin {
                    return Err(Error::param("CIFAR-10 output requires a CIFAR-10 source"));
                }
                for p in &source.source_paths {
                    files.push(file_name(p)?);
                }
                Target::Cifar {
                    counts: source.source_counts.clone(),
                    file: 0,
                    in_file: 0,
                    writer: None,
                }
            }
            DatasetFormat::ImageDir => {
                for name in &source.label_names {
                    let dir = out_root.join(name);
                    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                }
                Target::Dir
            }
        };
        Ok(DatasetSink {
            root: out_root.to_path_buf(),
            source: source.clone(),
            format,
            files,
            target,
            written: 0,
        })
    }

    pub fn written(&self) -> usize {
        self.written
    }

    /// Appends the next record, quantizing pixels to 8 bits.
    pub fn push(&mut self, record: &LabeledImage) -> Result<()> {
        if record.image.shape() != self.source.image_shape {
            return Err(Error::format(format!(
                "record {} has shape {:?}, dataset shape is {:?}",
                self.written,
                record.image.shape(),
                self.source.image_shape
            )));
        }
        if self.written >= self.source.num_items {
            return Err(Error::format(format!(
                "more records than the {} announced",
                self.source.num_items
            )));
        }
        let label = u8::try_from(record.label)
            .map_err(|_| Error::format(format!("label {} does not fit a byte", record.label)))?;
        match &mut self.target {
            Target::Idx { images, labels } => {
                images
                    .write_all(&record.image.to_u8())
                    .map_err(|e| Error::io(self.root.join(&self.files[0]), e))?;
                labels
                    .write_all(&[label])
                    .map_err(|e| Error::io(self.root.join(&self.files[1]), e))?;
            }
            Target::Cifar {
                counts,
                file,
                in_file,
                writer,
            } => {
                while *in_file == counts[*file] {
                    if let Some(mut w) = writer.take() {
                        w.flush()
                            .map_err(|e| Error::io(self.root.join(&self.files[*file]), e))?;
                    }
                    *file += 1;
                    *in_file = 0;
                }
                let path = self.root.join(&self.files[*file]);
                if writer.is_none() {
                    *writer = Some(create(&path)?);
                }
                let mut buf = Vec::with_capacity(CIFAR_RECORD_BYTES);
                buf.push(label);
                buf.extend_from_slice(&record.image.to_planar_u8());
                writer
                    .as_mut()
                    .unwrap()
                    .write_all(&buf)
                    .map_err(|e| Error::io(&path, e))?;
                *in_file += 1;
            }
            Target::Dir => {
                let class = self.source.label_names.get(record.label).ok_or_else(|| {
                    Error::format(format!("label {} has no class name", record.label))
                })?;
                let ext = if record.image.channels() == 1 {
                    "pgm"
                } else {
                    "ppm"
                };
                let rel = format!("{class}/{:06}.{ext}", self.written);
                let path = self.root.join(&rel);
                fs::write(&path, encode_pnm(&record.image)).map_err(|e| Error::io(&path, e))?;
                self.files.push(rel);
            }
        }
        self.written += 1;
        Ok(())
    }

    /// Flushes the data files and writes `manifest.json`.
    pub fn finish(mut self, enhancement: EnhancementRecord) -> Result<ProvenanceManifest> {
        if self.written != self.source.num_items {
            return Err(Error::format(format!(
                "wrote {} records, dataset announced {}",
                self.written, self.source.num_items
            )));
        }
        match &mut self.target {
            Target::Idx { images, labels } => {
                images
                    .flush()
                    .map_err(|e| Error::io(self.root.join(&self.files[0]), e))?;
                labels
                    .flush()
                    .map_err(|e| Error::io(self.root.join(&self.files[1]), e))?;
            }
            Target::Cifar { writer, file, .. } => {
                if let Some(w) = writer.as_mut() {
                    w.flush()
                        .map_err(|e| Error::io(self.root.join(&self.files[*file]), e))?;
                }
            }
            Target::Dir => {}
        }
        let (w, h, c) = self.source.image_shape;
        let manifest = ProvenanceManifest {
            format: self.format,
            shape: [w, h, c],
            count: self.written,
            classes: self.source.label_names.clone(),
            enhancement,
            tool_version: TOOL_VERSION.to_string(),
            files: self.files.clone(),
        };
        let path = self.root.join(MANIFEST_FILE);
        let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        json.push(b'\n');
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// Writes already-enhanced records in order and emits the provenance
/// manifest.
pub fn write_enhanced<I>(
    records: I,
    manifest: &DatasetManifest,
    out_root: &Path,
    codec: Codec,
    enhancement: EnhancementRecord,
) -> Result<ProvenanceManifest>
where
    I: IntoIterator<Item = Result<LabeledImage>>,
{
    let mut sink = DatasetSink::create(out_root, manifest, codec)?;
    for record in records {
        sink.push(&record?)?;
    }
    sink.finish(enhancement)
}
