//! PGM (P2 ASCII / P5 binary) images, maxval up to 65535.
//!
//! Pixels are held as floats in [0,1]; quantization happens only on write,
//! round half up. Writing back an image produced by [`write_pgm`] is
//! byte-identical.

use graph_tv::graph::GridShape;
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct ImageBuffer {
    pub shape: GridShape,
    /// Row-major gray levels in [0,1].
    pub pixels: Vec<f64>,
    pub maxval: u32,
    /// True for P5 input; preserved on write.
    pub binary: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(&'static str),
    #[error("PGM data ends early: expected {expected} samples, got {got}")]
    TruncatedData { expected: usize, got: usize },
}

/// Header tokens, skipping `#` comments.
struct Tokens<'a> {
    rest: &'a [u8],
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<&'a str> {
        loop {
            let mut i = 0;
            while i < self.rest.len() && self.rest[i].is_ascii_whitespace() {
                i += 1;
            }
            self.rest = &self.rest[i..];
            if self.rest.first() == Some(&b'#') {
                let end = self
                    .rest
                    .iter()
                    .position(|&b| b == b'\n')
                    .map_or(self.rest.len(), |p| p + 1);
                self.rest = &self.rest[end..];
                continue;
            }
            if self.rest.is_empty() {
                return None;
            }
            let end = self
                .rest
                .iter()
                .position(|b| b.is_ascii_whitespace())
                .unwrap_or(self.rest.len());
            let (tok, rest) = self.rest.split_at(end);
            self.rest = rest;
            return std::str::from_utf8(tok).ok();
        }
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<ImageBuffer, PgmError> {
    let mut toks = Tokens { rest: bytes };
    let magic = toks
        .next()
        .ok_or(PgmError::MalformedHeader("missing magic"))?;
    let binary = match magic {
        "P2" => false,
        "P5" => true,
        _ => return Err(PgmError::MalformedHeader("not a P2/P5 PGM")),
    };
    let mut dim = |what| {
        toks.next()
            .and_then(|t| t.parse::<u32>().ok())
            .ok_or(PgmError::MalformedHeader(what))
    };
    let width = dim("bad width")? as usize;
    let height = dim("bad height")? as usize;
    let maxval = dim("bad maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader("zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::MalformedHeader("maxval out of range"));
    }
    let count = width * height;
    let mut samples = Vec::with_capacity(count);
    if binary {
        // One whitespace byte separates the header from the raster.
        let data = &toks.rest[1.min(toks.rest.len())..];
        let wide = maxval > 255;
        let stride = if wide { 2 } else { 1 };
        if data.len() < count * stride {
            return Err(PgmError::TruncatedData {
                expected: count,
                got: data.len() / stride,
            });
        }
        for i in 0..count {
            let v = if wide {
                u32::from(data[2 * i]) << 8 | u32::from(data[2 * i + 1])
            } else {
                u32::from(data[i])
            };
            samples.push(v);
        }
    } else {
        while samples.len() < count {
            match toks.next().and_then(|t| t.parse::<u32>().ok()) {
                Some(v) => samples.push(v),
                None => {
                    return Err(PgmError::TruncatedData {
                        expected: count,
                        got: samples.len(),
                    })
                }
            }
        }
    }
    if samples.iter().any(|&v| v > maxval) {
        return Err(PgmError::MalformedHeader("sample exceeds maxval"));
    }
    Ok(ImageBuffer {
        shape: GridShape::new(height, width),
        pixels: samples
            .iter()
            .map(|&v| f64::from(v) / f64::from(maxval))
            .collect(),
        maxval,
        binary,
    })
}

pub fn write_pgm(buf: &ImageBuffer) -> Vec<u8> {
    let (h, w) = (buf.shape.n1, buf.shape.n2);
    let quant = |p: f64| -> u32 {
        let v = (p.clamp(0.0, 1.0) * f64::from(buf.maxval) + 0.5).floor();
        (v as u32).min(buf.maxval)
    };
    let mut out = Vec::new();
    let magic = if buf.binary { "P5" } else { "P2" };
    out.extend_from_slice(format!("{magic}\n{w} {h}\n{}\n", buf.maxval).as_bytes());
    if buf.binary {
        for &p in &buf.pixels {
            let v = quant(p);
            if buf.maxval > 255 {
                out.push((v >> 8) as u8);
            }
            out.push((v & 0xff) as u8);
        }
    } else {
        for r in 0..h {
            let row: Vec<String> = (0..w)
                .map(|c| quant(buf.pixels[r * w + c]).to_string())
                .collect();
            out.extend_from_slice(row.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_two_by_two() {
        let buf = read_pgm(b"P2\n2 2\n255\n0 255\n255 0\n").unwrap();
        assert_eq!(buf.pixels, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!((buf.shape.n1, buf.shape.n2), (2, 2));
    }

    #[test]
    fn comments_are_skipped() {
        let buf = read_pgm(b"P2 # magic\n# a comment line\n2 1\n10\n5 10\n").unwrap();
        assert_eq!(buf.pixels, vec![0.5, 1.0]);
    }

    #[test]
    fn maxval_zero_rejected() {
        assert_eq!(
            read_pgm(b"P2\n1 1\n0\n0\n").unwrap_err(),
            PgmError::MalformedHeader("maxval out of range")
        );
    }

    #[test]
    fn truncated_binary_rejected() {
        assert!(matches!(
            read_pgm(b"P5\n2 2\n255\n\x01\x02"),
            Err(PgmError::TruncatedData { .. })
        ));
    }

    #[test]
    fn binary_round_trip_is_byte_identical() {
        let mut file = b"P5\n3 2\n255\n".to_vec();
        file.extend_from_slice(&[0, 17, 255, 42, 128, 7]);
        let buf = read_pgm(&file).unwrap();
        assert_eq!(write_pgm(&buf), file);
    }

    #[test]
    fn ascii_round_trip_is_byte_identical() {
        let file = b"P2\n2 2\n255\n0 255\n12 100\n".to_vec();
        let buf = read_pgm(&file).unwrap();
        assert_eq!(write_pgm(&buf), file);
    }

    #[test]
    fn sixteen_bit_round_trip() {
        let mut file = b"P5\n2 1\n65535\n".to_vec();
        file.extend_from_slice(&[0x12, 0x34, 0xff, 0xff]);
        let buf = read_pgm(&file).unwrap();
        assert_eq!(write_pgm(&buf), file);
    }
}
