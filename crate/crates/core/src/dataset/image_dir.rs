//! One subdirectory per class, each holding PGM/PPM images.

use std::fs;
use std::path::{Path, PathBuf};

use super::pnm::{pnm_shape, read_pnm};
use super::{DatasetFormat, DatasetManifest, LabeledImage, RecordStream};
use crate::error::{Error, Result};

fn is_image(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("pgm" | "ppm" | "pnm")
    )
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// Class indices follow the lexicographic order of subdirectory names;
/// files within a class are read in lexicographic order too.
pub fn read_image_dir(root: &Path) -> Result<(DatasetManifest, RecordStream)> {
    let classes: Vec<PathBuf> = sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    if classes.is_empty() {
        return Err(Error::format(format!(
            "{}: no class subdirectories",
            root.display()
        )));
    }

    let mut label_names = Vec::with_capacity(classes.len());
    let mut files: Vec<(PathBuf, usize)> = Vec::new();
    let mut counts = Vec::with_capacity(classes.len());
    let mut shape = None;
    for (label, dir) in classes.iter().enumerate() {
        let name = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::format(format!("{}: class name is not UTF-8", dir.display())))?;
        label_names.push(name.to_string());
        let images: Vec<PathBuf> = sorted_entries(dir)?
            .into_iter()
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        if images.is_empty() {
            return Err(Error::format(format!("class {name:?} has no images")));
        }
        for path in &images {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let s =
                pnm_shape(&bytes).map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
            match shape {
                None => shape = Some(s),
                Some(first) if first != s => {
                    return Err(Error::format(format!(
                        "{}: shape {s:?} differs from {first:?}",
                        path.display()
                    )))
                }
                _ => {}
            }
        }
        counts.push(images.len());
        files.extend(images.into_iter().map(|p| (p, label)));
    }

    let manifest = DatasetManifest {
        format: DatasetFormat::ImageDir,
        image_shape: shape.expect("at least one image"),
        num_items: files.len(),
        label_names,
        source_paths: vec![root.to_path_buf()],
        source_counts: counts,
    };
    let stream = files.into_iter().map(|(path, label)| {
        Ok(LabeledImage {
            image: read_pnm(&path)?,
            label,
        })
    });
    Ok((manifest, Box::new(stream)))
}
