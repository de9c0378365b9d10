//! Binary greyscale PGM (`P5`, maxval 255).

use tactile_core::Frame;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(&'static str),
    #[error("truncated PGM payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("unsupported PGM maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    // Skips whitespace and `#` comments running to the end of the line.
    fn skip_space(&mut self) {
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

    fn number(&mut self, what: &'static str) -> Result<u32, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::MalformedHeader(what));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PgmError::MalformedHeader(what))
    }
}

/// Decodes a `P5` image. Scale and timestamp take their defaults.
pub fn read_pgm(bytes: &[u8]) -> Result<Frame, PgmError> {
    if !bytes.starts_with(b"P5") {
        return Err(PgmError::MalformedHeader("missing P5 magic"));
    }
    let mut c = Cursor { bytes, pos: 2 };
    if !c.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PgmError::MalformedHeader("missing whitespace after magic"));
    }
    let width = c.number("width")? as usize;
    let height = c.number("height")? as usize;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader("zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::MalformedHeader("maxval out of range"));
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !c.bytes.get(c.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(PgmError::MalformedHeader("missing whitespace after maxval"));
    }
    let payload = &bytes[c.pos + 1..];
    let expected = width
        .checked_mul(height)
        .ok_or(PgmError::MalformedHeader("dimensions overflow"))?;
    if payload.len() < expected {
        return Err(PgmError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    Frame::new(width, height, payload[..expected].to_vec()).map_err(|_| PgmError::MalformedHeader("invalid dimensions"))
}

/// Canonical encoding: `"P5\n<w> <h>\n255\n"` followed by the raw pixels.
pub fn write_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.pixels());
    out
}
