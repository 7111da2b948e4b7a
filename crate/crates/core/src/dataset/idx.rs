//! MNIST IDX files: big-endian headers followed by unsigned bytes.

use std::fs::{self, File};
use std::io::{BufReader, Read};
use std::path::Path;

use super::{DatasetFormat, DatasetManifest, LabeledImage, RecordStream};
use crate::error::{Error, Result};
use crate::image::Image;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn read_header(path: &Path, len: usize) -> Result<(Vec<u8>, u64)> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let size = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut header = vec![0u8; len];
    if size < len as u64 {
        return Err(Error::format(format!(
            "{}: truncated IDX header",
            path.display()
        )));
    }
    file.read_exact(&mut header)
        .map_err(|e| Error::io(path, e))?;
    Ok((header, size))
}

/// Opens an IDX image/label pair. Headers and file sizes are validated up
/// front; pixels are streamed.
pub fn read_idx(images_path: &Path, labels_path: &Path) -> Result<(DatasetManifest, RecordStream)> {
    let (header, image_size) = read_header(images_path, 16)?;
    let magic = be_u32(&header, 0);
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::format(format!(
            "{}: bad IDX image magic {magic:#010x}",
            images_path.display()
        )));
    }
    let count = be_u32(&header, 4) as usize;
    let rows = be_u32(&header, 8) as usize;
    let cols = be_u32(&header, 12) as usize;
    let expected = 16 + (count * rows * cols) as u64;
    if image_size != expected {
        return Err(Error::format(format!(
            "{}: header promises {count} images of {rows}x{cols} ({expected} bytes), file has {image_size}",
            images_path.display()
        )));
    }

    let labels = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    if labels.len() < 8 {
        return Err(Error::format(format!(
            "{}: truncated IDX header",
            labels_path.display()
        )));
    }
    let magic = be_u32(&labels, 0);
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::format(format!(
            "{}: bad IDX label magic {magic:#010x}",
            labels_path.display()
        )));
    }
    let label_count = be_u32(&labels, 4) as usize;
    if label_count != count {
        return Err(Error::format(format!(
            "image count {count} does not match label count {label_count}"
        )));
    }
    if labels.len() != 8 + count {
        return Err(Error::format(format!(
            "{}: expected {} bytes, file has {}",
            labels_path.display(),
            8 + count,
            labels.len()
        )));
    }
    if count == 0 || rows == 0 || cols == 0 {
        return Err(Error::format("IDX dataset is empty"));
    }
    let labels = labels[8..].to_vec();
    let classes = labels.iter().copied().max().unwrap_or(0) as usize + 1;

    let manifest = DatasetManifest {
        format: DatasetFormat::Idx,
        image_shape: (cols, rows, 1),
        num_items: count,
        label_names: (0..classes).map(|c| c.to_string()).collect(),
        source_paths: vec![images_path.to_path_buf(), labels_path.to_path_buf()],
        source_counts: vec![count],
    };

    let mut reader =
        BufReader::new(File::open(images_path).map_err(|e| Error::io(images_path, e))?);
    let mut skip = [0u8; 16];
    reader
        .read_exact(&mut skip)
        .map_err(|e| Error::io(images_path, e))?;
    let path = images_path.to_path_buf();
    let stream = labels.into_iter().map(move |label| {
        let mut buf = vec![0u8; rows * cols];
        reader
            .read_exact(&mut buf)
            .map_err(|e| Error::io(&path, e))?;
        Ok(LabeledImage {
            image: Image::from_u8(&buf, cols, rows, 1)?,
            label: label as usize,
        })
    });
    Ok((manifest, Box::new(stream)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    pub(crate) fn fixture(dir: &Path, images: &[u8], labels: &[u8]) -> (PathBuf, PathBuf) {
        let ip = dir.join("images-idx3-ubyte");
        let lp = dir.join("labels-idx1-ubyte");
        fs::write(&ip, images).unwrap();
        fs::write(&lp, labels).unwrap();
        (ip, lp)
    }

    // Two 2x3 images (rows=2, cols=3) labelled 7 and 1.
    fn two_image_files() -> (Vec<u8>, Vec<u8>) {
        let mut images = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3];
        images.extend_from_slice(&[0, 51, 102, 153, 204, 255]);
        images.extend_from_slice(&[255, 0, 255, 0, 255, 0]);
        let labels = vec![0, 0, 8, 1, 0, 0, 0, 2, 7, 1];
        (images, labels)
    }

    #[test]
    fn decodes_hand_built_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = two_image_files();
        let (ip, lp) = fixture(dir.path(), &images, &labels);
        let (manifest, stream) = read_idx(&ip, &lp).unwrap();
        assert_eq!(manifest.num_items, 2);
        assert_eq!(manifest.image_shape, (3, 2, 1));
        assert_eq!(manifest.label_names.len(), 8);
        let records: Vec<_> = stream.collect::<Result<_>>().unwrap();
        assert_eq!(records[0].label, 7);
        assert_eq!(records[1].label, 1);
        assert_eq!(records[0].image.as_slice(), &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(records[1].image.plane(0).get(1, 0), 0.0);
        assert_eq!(records[1].image.plane(0).get(1, 1), 1.0);
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (mut images, labels) = two_image_files();
        images[3] = 0x01;
        let (ip, lp) = fixture(dir.path(), &images, &labels);
        assert!(matches!(read_idx(&ip, &lp), Err(Error::Format(_))));

        let (images, mut labels) = two_image_files();
        labels[3] = 0x03;
        let (ip, lp) = fixture(dir.path(), &images, &labels);
        assert!(matches!(read_idx(&ip, &lp), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_count_mismatch_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let (images, mut labels) = two_image_files();
        labels[7] = 3;
        labels.push(0);
        let (ip, lp) = fixture(dir.path(), &images, &labels);
        assert!(matches!(read_idx(&ip, &lp), Err(Error::Format(_))));

        let (mut images, labels) = two_image_files();
        images.pop();
        let (ip, lp) = fixture(dir.path(), &images, &labels);
        assert!(matches!(read_idx(&ip, &lp), Err(Error::Format(_))));

        let (ip, lp) = fixture(dir.path(), &[0, 0, 8], &labels);
        assert!(matches!(read_idx(&ip, &lp), Err(Error::Format(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nope");
        assert!(matches!(read_idx(&p, &p), Err(Error::Io { .. })));
    }
}
