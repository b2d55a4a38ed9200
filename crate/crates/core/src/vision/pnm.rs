//! Binary PGM (P5) read/write and PPM (P6) read, maxval 255 only.

use std::io::{self, Write};

use super::{GrayImage, VisionError};

fn bad(msg: impl Into<String>) -> VisionError {
    VisionError::InvalidImage(msg.into())
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<usize, VisionError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("malformed header number"))
    }
}

/// Reads a P5 (gray) or P6 (RGB, converted to luma) image.
pub fn read_pnm(bytes: &[u8]) -> Result<GrayImage, VisionError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(bad("missing PNM magic"));
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        _ => return Err(bad("only binary P5/P6 images are supported")),
    };
    let mut header = Header { bytes, pos: 2 };
    let width = header.number()?;
    let height = header.number()?;
    let maxval = header.number()?;
    if maxval != 255 {
        return Err(bad(format!("maxval {maxval} unsupported, expected 255")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if header.pos >= bytes.len() || !bytes[header.pos].is_ascii_whitespace() {
        return Err(bad("missing raster separator"));
    }
    let raster = &bytes[header.pos + 1..];
    let expected = width * height * channels;
    if raster.len() < expected {
        return Err(bad(format!("raster has {} bytes, expected {expected}", raster.len())));
    }
    let raster = &raster[..expected];
    if channels == 1 {
        GrayImage::new(width, height, raster.to_vec())
    } else {
        GrayImage::from_rgb(width, height, raster)
    }
}

pub fn write_pgm<W: Write>(img: &GrayImage, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(img.data())
}
