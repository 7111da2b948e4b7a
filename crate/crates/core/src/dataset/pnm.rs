//! Binary portable graymap (`P5`) and pixmap (`P6`) files with maxval 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

struct Header {
    channels: usize,
    width: usize,
    height: usize,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(Error::format(
                "not a binary PGM/PPM file (expected P5 or P6)",
            ))
        }
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format("truncated or malformed PNM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::format("PNM header value out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format("PNM header not terminated by whitespace"));
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::format(format!(
            "unsupported PNM maxval {maxval} (expected 255)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::format("PNM image has zero size"));
    }
    Ok(Header {
        channels,
        width,
        height,
        data_offset: pos + 1,
    })
}

pub fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let h = parse_header(bytes)?;
    let len = h.width * h.height * h.channels;
    let data = bytes
        .get(h.data_offset..h.data_offset + len)
        .ok_or_else(|| Error::format("PNM pixel data truncated"))?;
    Image::from_u8(data, h.width, h.height, h.channels)
}

/// `(width, height, channels)` from the header alone.
pub fn pnm_shape(bytes: &[u8]) -> Result<(usize, usize, usize)> {
    let h = parse_header(bytes)?;
    Ok((h.width, h.height, h.channels))
}

/// Encodes as P5 (one channel) or P6 (three channels).
pub fn encode_pnm(img: &Image) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(&img.to_u8());
    out
}

pub fn read_pnm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_pnm(path: &Path, img: &Image) -> Result<()> {
    fs::write(path, encode_pnm(img)).map_err(|e| Error::io(path, e))
}
