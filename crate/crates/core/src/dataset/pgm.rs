//! Plain (P2) and raw (P5) PGM with maxval up to 255, read and written
//! bit-exactly.

use std::io::{self, Write};

use crate::pixel_map::Raster;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgmError {
    NotPgm,
    Malformed(String),
    Truncated,
    /// maxval above 255
    Depth(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// P2
    Plain,
    /// P5
    Raw,
}

pub fn is_pgm(bytes: &[u8]) -> bool {
    bytes.starts_with(b"P2") || bytes.starts_with(b"P5")
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
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

    fn number(&mut self) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                PgmError::Truncated
            } else {
                PgmError::Malformed(format!("expected a number at byte {start}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::Malformed(format!("number too large at byte {start}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Raster, PgmError> {
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Plain,
        Some(b"P5") => PgmFormat::Raw,
        _ => return Err(PgmError::NotPgm),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number()? as usize;
    let height = cur.number()? as usize;
    let maxval = cur.number()?;
    if width == 0 || height == 0 {
        return Err(PgmError::Malformed(format!("empty image {width}x{height}")));
    }
    if maxval == 0 {
        return Err(PgmError::Malformed("maxval is zero".into()));
    }
    if maxval > 255 {
        return Err(PgmError::Depth(maxval));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| PgmError::Malformed("dimensions overflow".into()))?;
    let data = match format {
        PgmFormat::Raw => {
            // exactly one whitespace byte separates the header from the raster
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                Some(_) => return Err(PgmError::Malformed("no whitespace after maxval".into())),
                None => return Err(PgmError::Truncated),
            }
            let body = bytes.get(cur.pos..cur.pos + n).ok_or(PgmError::Truncated)?;
            body.to_vec()
        }
        PgmFormat::Plain => {
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                data.push(cur.number()?);
            }
            data.into_iter()
                .map(|v| {
                    u8::try_from(v)
                        .map_err(|_| PgmError::Malformed(format!("sample {v} exceeds 255")))
                })
                .collect::<Result<Vec<u8>, _>>()?
        }
    };
    if let Some(&v) = data.iter().find(|&&v| v as u32 > maxval) {
        return Err(PgmError::Malformed(format!(
            "sample {v} exceeds maxval {maxval}"
        )));
    }
    Ok(Raster::new(width, height, data).expect("dimensions checked above"))
}

pub fn encode<W: Write + ?Sized>(
    raster: &Raster,
    format: PgmFormat,
    out: &mut W,
) -> io::Result<()> {
    let (w, h) = (raster.width(), raster.height());
    match format {
        PgmFormat::Raw => {
            write!(out, "P5\n{w} {h}\n255\n")?;
            out.write_all(raster.as_slice())
        }
        PgmFormat::Plain => {
            write!(out, "P2\n{w} {h}\n255\n")?;
            for row in raster.as_slice().chunks(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn raw_two_by_two() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 255, 128, 7]);
        let r = decode(&bytes).unwrap();
        assert_eq!((r.width(), r.height()), (2, 2));
        assert_eq!(r.as_slice(), &[0, 255, 128, 7]);
    }

    #[test]
    fn raw_body_may_start_with_whitespace_bytes() {
        // 10 and 32 are valid samples right after the header separator
        let mut bytes = b"P5 2 1 255 ".to_vec();
        bytes.extend([10, 32]);
        assert_eq!(decode(&bytes).unwrap().as_slice(), &[10, 32]);
    }

    #[test]
    fn plain_with_comments() {
        let text = b"P2\n# made by hand\n3 1 # width height\n200\n0 100\n200\n";
        assert_eq!(decode(text).unwrap().as_slice(), &[0, 100, 200]);
    }

    #[test]
    fn errors() {
        assert_eq!(decode(b"P6\n1 1\n255\n\0\0\0"), Err(PgmError::NotPgm));
        assert_eq!(
            decode(b"P5\n2 2\n255\n\x01\x02\x03"),
            Err(PgmError::Truncated)
        );
        assert_eq!(decode(b"P5\n2 2\n"), Err(PgmError::Truncated));
        assert_eq!(decode(b"P5\n1 1\n65535\n\0\0"), Err(PgmError::Depth(65535)));
        assert!(matches!(
            decode(b"P2\n1 1\n100\n101\n"),
            Err(PgmError::Malformed(_))
        ));
        assert!(matches!(
            decode(b"P2\n0 1\n255\n"),
            Err(PgmError::Malformed(_))
        ));
        assert_eq!(decode(b"P2\n2 1\n255\n7"), Err(PgmError::Truncated));
    }

    #[test]
    fn exact_encoding() {
        let r = Raster::new(3, 2, vec![1, 2, 3, 40, 50, 255]).unwrap();
        let mut raw = Vec::new();
        encode(&r, PgmFormat::Raw, &mut raw).unwrap();
        assert_eq!(raw, b"P5\n3 2\n255\n\x01\x02\x03\x28\x32\xff");
        let mut plain = Vec::new();
        encode(&r, PgmFormat::Plain, &mut plain).unwrap();
        assert_eq!(plain, b"P2\n3 2\n255\n1 2 3\n40 50 255\n");
    }

    proptest! {
        #[test]
        fn round_trip(w in 1usize..9, h in 1usize..9, seed in any::<u64>(), plain in any::<bool>()) {
            let r = Raster::from_fn(w, h, |x, y| (seed.wrapping_mul(31 + x as u64 * 7 + y as u64 * 131) >> 13) as u8).unwrap();
            let fmt = if plain { PgmFormat::Plain } else { PgmFormat::Raw };
            let mut buf = Vec::new();
            encode(&r, fmt, &mut buf).unwrap();
            prop_assert_eq!(decode(&buf).unwrap(), r);
        }
    }
}
