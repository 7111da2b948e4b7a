//! Binary dumps of wavelet subbands.
//!
//! Each subband goes to its own file: the magic `WVQ1`, then little-endian
//! `u32` width and height, then `width * height` little-endian `f64` values
//! in row-major order. A JSON sidecar (`index.json`) lists every file with
//! its channel, level, band and shape.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dwt::{CoeffPyramid, Subband};
use crate::error::{Error, Result};
use crate::image::Plane;

pub const WVQ_MAGIC: &[u8; 4] = b"WVQ1";
pub const INDEX_FILE: &str = "index.json";

pub fn encode_wvq(plane: &Plane) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * plane.as_slice().len());
    out.extend_from_slice(WVQ_MAGIC);
    out.extend_from_slice(&(plane.width() as u32).to_le_bytes());
    out.extend_from_slice(&(plane.height() as u32).to_le_bytes());
    for v in plane.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_wvq(bytes: &[u8]) -> Result<Plane> {
    if bytes.len() < 12 || &bytes[..4] != WVQ_MAGIC {
        return Err(Error::format("missing WVQ1 header"));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != width * height * 8 {
        return Err(Error::format(format!(
            "WVQ1 body holds {} bytes, {width}x{height} needs {}",
            body.len(),
            width * height * 8
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Plane::new(width, height, data).map_err(|e| Error::format(e.to_string()))
}

pub fn read_wvq(path: &Path) -> Result<Plane> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wvq(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandEntry {
    pub file: String,
    pub channel: usize,
    /// 1 is the finest level.
    pub level: usize,
    pub band: String,
    pub width: usize,
    pub height: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpIndex {
    pub format: String,
    /// `[width, height]`
    pub original_shape: [usize; 2],
    pub channels: usize,
    pub levels: usize,
    pub subbands: Vec<SubbandEntry>,
}

impl DumpIndex {
    pub fn total_energy(&self) -> f64 {
        self.subbands.iter().map(|s| s.energy).sum()
    }
}

/// Lists the subbands of per-channel pyramids in dump order without
/// touching the filesystem.
pub fn subband_entries(pyramids: &[CoeffPyramid]) -> Vec<(SubbandEntry, &Plane)> {
    let mut out = Vec::new();
    for (c, pyr) in pyramids.iter().enumerate() {
        let levels = pyr.num_levels();
        for (i, bands) in pyr.levels.iter().enumerate() {
            for (band, plane) in [
                (Subband::LH, &bands.horiz),
                (Subband::HL, &bands.vert),
                (Subband::HH, &bands.diag),
            ] {
                out.push((entry(c, i + 1, band, plane), plane));
            }
        }
        out.push((
            entry(c, levels, Subband::LL, &pyr.coarsest_approx),
            &pyr.coarsest_approx,
        ));
    }
    out
}

fn entry(channel: usize, level: usize, band: Subband, plane: &Plane) -> SubbandEntry {
    SubbandEntry {
        file: format!("c{channel}_l{level}_{band}.wvq"),
        channel,
        level,
        band: band.name().to_string(),
        width: plane.width(),
        height: plane.height(),
        energy: plane.energy(),
    }
}

/// Writes every subband of `pyramids` plus the JSON sidecar into `dir`.
pub fn dump_pyramids(dir: &Path, pyramids: &[CoeffPyramid]) -> Result<DumpIndex> {
    let first = pyramids
        .first()
        .ok_or_else(|| Error::param("nothing to dump"))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut subbands = Vec::new();
    for (entry, plane) in subband_entries(pyramids) {
        let path = dir.join(&entry.file);
        fs::write(&path, encode_wvq(plane)).map_err(|e| Error::io(&path, e))?;
        subbands.push(entry);
    }
    let index = DumpIndex {
        format: "WVQ1".into(),
        original_shape: [first.original_shape.0, first.original_shape.1],
        channels: pyramids.len(),
        levels: first.num_levels(),
        subbands,
    };
    let path = dir.join(INDEX_FILE);
    let json = serde_json::to_vec_pretty(&index).expect("index serializes");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(index)
}
