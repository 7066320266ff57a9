//! Binary PGM (P5) codec, 8-bit only.
//!
//! The writer always emits `P5\n<w> <h>\n255\n` followed by the raw bytes, so
//! reading a written file and writing it again reproduces it byte for byte.
//! The reader accepts any whitespace layout and `#` comments in the header.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{GrayImage, PreprocessError};

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, PreprocessError> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| pgm_err("missing magic number"))?;
    if magic != b"P5" {
        return Err(pgm_err("not a binary PGM (expected P5)"));
    }
    let width = parse_header_number(bytes, &mut pos, "width")?;
    let height = parse_header_number(bytes, &mut pos, "height")?;
    let maxval = parse_header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(pgm_err("only 8-bit PGM (maxval 1..=255) is supported"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(pgm_err("missing raster separator"));
    }
    pos += 1;
    let len = width
        .checked_mul(height)
        .ok_or_else(|| pgm_err("image dimensions overflow"))?;
    if bytes.len() < pos + len {
        return Err(pgm_err("truncated raster"));
    }
    GrayImage::new(width, height, bytes[pos..pos + len].to_vec())
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage, PreprocessError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PreprocessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    decode_pgm(&bytes)
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<(), PreprocessError> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| PreprocessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    file.write_all(&encode_pgm(image))
        .map_err(|e| PreprocessError::Io {
            path: path.display().to_string(),
            source: e,
        })
}

/// Histogram as plain text, one count per line (256 lines).
pub fn histogram_to_text(hist: &[u64; 256]) -> String {
    let mut s = String::with_capacity(256 * 4);
    for count in hist {
        s.push_str(&count.to_string());
        s.push('\n');
    }
    s
}

pub fn histogram_from_text(text: &str) -> Result<[u64; 256], PreprocessError> {
    let mut hist = [0u64; 256];
    let mut n = 0;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if n == 256 {
            return Err(PreprocessError::Histogram("more than 256 bins".into()));
        }
        hist[n] = line
            .parse()
            .map_err(|_| PreprocessError::Histogram(format!("bad count {line:?}")))?;
        n += 1;
    }
    if n != 256 {
        return Err(PreprocessError::Histogram(format!("expected 256 bins, found {n}")));
    }
    Ok(hist)
}

fn pgm_err(msg: &str) -> PreprocessError {
    PreprocessError::Pgm(msg.to_string())
}

fn parse_header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, PreprocessError> {
    let tok = next_token(bytes, pos).ok_or_else(|| pgm_err(&format!("missing {what}")))?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| pgm_err(&format!("invalid {what}")))
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_exact() {
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 200, 255, 7]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        let back = decode_pgm(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(encode_pgm(&back), bytes);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5 # made by hand\n2 # width\n1\n255\n".to_vec();
        bytes.extend_from_slice(&[3, 4]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.pixels(), &[3, 4]);
    }

    #[test]
    fn rejects_truncated_and_foreign_files() {
        assert!(decode_pgm(b"P5\n4 4\n255\n\x00\x01").is_err());
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode_pgm(b"").is_err());
    }

    #[test]
    fn histogram_text_round_trip() {
        let mut hist = [0u64; 256];
        hist[0] = 5;
        hist[255] = 12;
        let text = histogram_to_text(&hist);
        assert_eq!(text.lines().count(), 256);
        assert_eq!(histogram_from_text(&text).unwrap(), hist);
        assert!(histogram_from_text("1\n2\n").is_err());
    }
}
