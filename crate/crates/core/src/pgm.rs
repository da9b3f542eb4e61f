//! Binary PGM (`P5`, maxval 255) encoding.

use crate::error::{Error, Result};
use crate::plane::Picture;

/// Encode as `P5\n<w> <h>\n255\n` followed by raw samples.
pub fn encode_pgm(p: &Picture) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", p.width(), p.height()).into_bytes();
    out.extend_from_slice(p.data());
    out
}

/// Decode a binary PGM with maxval 255. Header comments are accepted.
pub fn decode_pgm(buf: &[u8]) -> Result<Picture> {
    let mut pos = 0usize;
    if buf.len() < 2 || &buf[..2] != b"P5" {
        return Err(Error::format(0, "not a binary PGM (missing P5 magic)"));
    }
    pos += 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match buf.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while buf.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while buf.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(pos as u64, "expected a decimal header field"));
        }
        *field = std::str::from_utf8(&buf[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start as u64, "header field out of range"))?;
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(Error::format(pos as u64, format!("unsupported maxval {maxval}")));
    }
    if !buf.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(pos as u64, "missing whitespace after header"));
    }
    pos += 1;
    let need = w
        .checked_mul(h)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::format(0, format!("invalid size {w}x{h}")))?;
    if buf.len() - pos < need {
        return Err(Error::format(buf.len() as u64, format!("expected {need} sample bytes")));
    }
    Picture::from_vec(w, h, buf[pos..pos + need].to_vec())
}
