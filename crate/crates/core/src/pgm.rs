//! 8-bit PGM (netpbm P2 ASCII / P5 binary) reader and writer.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::phasecore::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`, whitespace-separated decimal samples.
    Ascii,
    /// `P5`, one byte per sample.
    Binary,
}

/// Raw decoded raster; dimensions are not yet checked against the image rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmRaster {
    pub width: usize,
    pub height: usize,
    pub format: PgmFormat,
    pub pixels: Vec<u8>,
}

impl PgmRaster {
    pub fn into_image(self) -> Result<GrayImage> {
        GrayImage::new(self.width, self.height, self.pixels)
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skips whitespace and `#` comments that run to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Pgm(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("{what} is out of range")))
    }
}

pub fn decode(data: &[u8]) -> Result<PgmRaster> {
    let format = match data.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(Error::Pgm("missing P2/P5 magic number".into())),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Pgm(format!("only maxval 255 is supported, got {maxval}")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("image dimensions overflow".into()))?;

    let pixels = match format {
        PgmFormat::Binary => {
            // exactly one whitespace byte separates the header from the raster
            if !data.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(Error::Pgm("missing separator after header".into()));
            }
            let start = cur.pos + 1;
            let raster = data
                .get(start..start + count)
                .ok_or_else(|| Error::Pgm("truncated raster".into()))?;
            raster.to_vec()
        }
        PgmFormat::Ascii => (0..count)
            .map(|_| {
                let v = cur.number("sample")?;
                u8::try_from(v)
                    .ok()
                    .filter(|_| v <= maxval)
                    .ok_or_else(|| Error::Pgm(format!("sample {v} exceeds maxval")))
            })
            .collect::<Result<_>>()?,
    };
    Ok(PgmRaster {
        width,
        height,
        format,
        pixels,
    })
}

pub fn read<R: Read>(mut reader: R) -> Result<PgmRaster> {
    let mut data = Vec::new();
    reader.read_to_end(&mut data)?;
    decode(&data)
}

pub fn encode(image: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    match format {
        PgmFormat::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(image.pixels());
            out
        }
        PgmFormat::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in image.pixels().chunks(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

pub fn write<W: Write>(mut writer: W, image: &GrayImage, format: PgmFormat) -> Result<()> {
    writer.write_all(&encode(image, format))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_with_comments() {
        let src = b"P2\n# a comment\n2 2 # trailing\n255\n0 255\n 17\t128\n";
        let raster = decode(src).unwrap();
        assert_eq!(raster.format, PgmFormat::Ascii);
        assert_eq!(raster.pixels, vec![0, 255, 17, 128]);
        assert_eq!(raster.into_image().unwrap().n(), 1);
    }

    #[test]
    fn binary_raster_may_contain_whitespace_bytes() {
        let mut src = b"P5 2 2 255\n".to_vec();
        src.extend([b'\n', b' ', 0, 255]);
        assert_eq!(decode(&src).unwrap().pixels, vec![b'\n', b' ', 0, 255]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode(b"P6\n1 1\n255\n\0").is_err());
        assert!(decode(b"P5\n2 2\n255\n\0\0").is_err());
        assert!(decode(b"P2\n1 1\n65535\n0\n").is_err());
        assert!(decode(b"P2\n1 1\n255\n300\n").is_err());
        assert!(decode(b"P2\n2 2\n255\n1 2 3\n").is_err());
        // well-formed PGM, but not a power-of-two square
        assert!(decode(b"P2\n3 1\n255\n1 2 3\n").unwrap().into_image().is_err());
    }

    fn image_strategy() -> impl Strategy<Value = GrayImage> {
        (0u32..=4).prop_flat_map(|n| {
            let side = 1usize << n;
            proptest::collection::vec(any::<u8>(), side * side)
                .prop_map(move |p| GrayImage::new(side, side, p).unwrap())
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(img in image_strategy(), binary in any::<bool>()) {
            let format = if binary { PgmFormat::Binary } else { PgmFormat::Ascii };
            let bytes = encode(&img, format);
            let back = decode(&bytes).unwrap();
            prop_assert_eq!(back.format, format);
            prop_assert_eq!(back.into_image().unwrap(), img.clone());
            let again = encode(&decode(&bytes).unwrap().into_image().unwrap(), format);
            prop_assert_eq!(again, bytes);
        }
    }
}
