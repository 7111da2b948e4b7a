//! CIFAR-10 binary batches: 3073-byte records of one label byte followed by
//! 32x32 red, green and blue planes.

use std::fs::{self, File};
use std::io::{BufReader, Read};
use std::path::PathBuf;

use super::{DatasetFormat, DatasetManifest, LabeledImage, RecordStream};
use crate::error::{Error, Result};
use crate::image::Image;

pub const CIFAR_SIDE: usize = 32;
pub const CIFAR_RECORD_BYTES: usize = 1 + CIFAR_SIDE * CIFAR_SIDE * 3;

pub const CIFAR10_CLASSES: [&str; 10] = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
];

pub fn read_cifar_bin(paths: &[PathBuf]) -> Result<(DatasetManifest, RecordStream)> {
    if paths.is_empty() {
        return Err(Error::param(
            "CIFAR-10 dataset needs at least one batch file",
        ));
    }
    let mut counts = Vec::with_capacity(paths.len());
    for path in paths {
        let len = fs::metadata(path).map_err(|e| Error::io(path, e))?.len() as usize;
        if len == 0 || !len.is_multiple_of(CIFAR_RECORD_BYTES) {
            return Err(Error::format(format!(
                "{}: length {len} is not a positive multiple of {CIFAR_RECORD_BYTES}",
                path.display()
            )));
        }
        counts.push(len / CIFAR_RECORD_BYTES);
    }
    let manifest = DatasetManifest {
        format: DatasetFormat::CifarBin,
        image_shape: (CIFAR_SIDE, CIFAR_SIDE, 3),
        num_items: counts.iter().sum(),
        label_names: CIFAR10_CLASSES.iter().map(|s| s.to_string()).collect(),
        source_paths: paths.to_vec(),
        source_counts: counts.clone(),
    };

    let stream = manifest
        .source_paths
        .clone()
        .into_iter()
        .zip(counts)
        .flat_map(|(path, count)| {
            let mut reader = File::open(&path)
                .map(BufReader::new)
                .map_err(|e| Error::io(&path, e));
            let mut index = 0;
            (0..count).map(move |_| {
                let reader = reader.as_mut().map_err(|e| Error::format(e.to_string()))?;
                let mut buf = [0u8; CIFAR_RECORD_BYTES];
                reader
                    .read_exact(&mut buf)
                    .map_err(|e| Error::io(&path, e))?;
                index += 1;
                decode_record(&buf).map_err(|e| {
                    Error::format(format!("{} record {}: {e}", path.display(), index - 1))
                })
            })
        });
    Ok((manifest, Box::new(stream)))
}

fn decode_record(buf: &[u8; CIFAR_RECORD_BYTES]) -> Result<LabeledImage> {
    let label = buf[0] as usize;
    if label >= CIFAR10_CLASSES.len() {
        return Err(Error::format(format!("label {label} out of range 0..10")));
    }
    Ok(LabeledImage {
        image: Image::from_planar_u8(&buf[1..], CIFAR_SIDE, CIFAR_SIDE, 3)?,
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(label: u8, seed: u8) -> Vec<u8> {
        let mut r = vec![label];
        r.extend((0..3072).map(|i| (i as u8).wrapping_mul(seed).wrapping_add(seed)));
        r
    }

    #[test]
    fn reads_planar_records() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("data_batch_1.bin");
        let mut bytes = record(3, 7);
        bytes.extend(record(9, 11));
        fs::write(&p, &bytes).unwrap();
        let (m, stream) = read_cifar_bin(&[p]).unwrap();
        assert_eq!(m.num_items, 2);
        assert_eq!(m.image_shape, (32, 32, 3));
        let recs: Vec<_> = stream.collect::<Result<_>>().unwrap();
        assert_eq!(recs[0].label, 3);
        assert_eq!(recs[1].label, 9);
        assert_eq!(recs[0].image.to_planar_u8(), &bytes[1..3073]);
        // green plane starts at byte 1 + 1024
        assert_eq!(
            recs[1].image.plane(1).get(0, 0),
            f64::from(bytes[3073 + 1 + 1024]) / 255.0
        );
    }

    #[test]
    fn rejects_partial_records() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.bin");
        let mut bytes = record(1, 1);
        bytes.pop();
        fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_cifar_bin(&[p]), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_out_of_range_label() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.bin");
        fs::write(&p, record(10, 1)).unwrap();
        let (_, mut stream) = read_cifar_bin(&[p]).unwrap();
        assert!(matches!(stream.next(), Some(Err(Error::Format(_)))));
    }
}
