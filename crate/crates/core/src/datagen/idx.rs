//! IDX image files (the MNIST container): a big-endian `u32` magic
//! `0x00000803` (unsigned bytes, three dimensions), the three dimension
//! sizes as big-endian `u32`, then `count·rows·cols` pixel bytes.

use std::path::Path;

use super::sprites::{Sprite, SpriteSet, SpriteSource};
use crate::error::{Error, Result};

pub const IDX_MAGIC_U8_3D: u32 = 0x0000_0803;

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx(format!("truncated header: need {} bytes, have {}", at + 4, bytes.len())))
}

/// Parses an in-memory IDX image file. Pixels are scaled by `1/255`.
pub fn parse_idx_sprites(bytes: &[u8]) -> Result<Vec<Sprite>> {
    let magic = read_u32(bytes, 0)?;
    if magic != IDX_MAGIC_U8_3D {
        return Err(Error::Idx(format!(
            "bad magic {magic:#010x}, expected {IDX_MAGIC_U8_3D:#010x}"
        )));
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    if count == 0 || rows == 0 || cols == 0 {
        return Err(Error::Idx(format!("empty image block {count}x{rows}x{cols}")));
    }
    let need = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .and_then(|v| v.checked_add(16))
        .ok_or_else(|| Error::Idx("dimension product overflows".into()))?;
    if bytes.len() < need {
        return Err(Error::Idx(format!(
            "truncated payload: need {need} bytes, have {}",
            bytes.len()
        )));
    }
    if bytes.len() > need {
        return Err(Error::Idx(format!(
            "{} trailing bytes after payload",
            bytes.len() - need
        )));
    }
    let px = rows * cols;
    Ok(bytes[16..]
        .chunks_exact(px)
        .map(|chunk| Sprite {
            rows,
            cols,
            pixels: chunk.iter().map(|&b| f64::from(b) / 255.0).collect(),
        })
        .collect())
}

/// Loads every image of an IDX file as a sprite.
pub fn load_idx_sprites(path: impl AsRef<Path>) -> Result<SpriteSet> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let sprites = parse_idx_sprites(&bytes)?;
    SpriteSet::new(sprites, SpriteSource::IdxFile(path.to_path_buf()))
}

/// Serializes sprites of a common shape as an IDX image file, rounding
/// pixels to the nearest byte.
pub fn encode_idx_sprites(sprites: &[Sprite]) -> Result<Vec<u8>> {
    let first = sprites.first().ok_or(Error::Empty("sprite list"))?;
    let (rows, cols) = (first.rows, first.cols);
    let mut out = Vec::with_capacity(16 + sprites.len() * rows * cols);
    out.extend_from_slice(&IDX_MAGIC_U8_3D.to_be_bytes());
    for d in [sprites.len(), rows, cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    for s in sprites {
        if (s.rows, s.cols) != (rows, cols) {
            return Err(Error::shape("encode_idx_sprites", format!("{rows}x{cols}"), format!("{}x{}", s.rows, s.cols)));
        }
        out.extend(s.pixels.iter().map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(&IDX_MAGIC_U8_3D.to_be_bytes());
        for d in [4u32, 2, 3] {
            b.extend_from_slice(&d.to_be_bytes());
        }
        b.extend((0..24).map(|i| if i == 0 { 255 } else { (i * 10) as u8 }));
        b
    }

    #[test]
    fn reads_fixture() {
        let s = parse_idx_sprites(&fixture()).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!((s[0].rows, s[0].cols), (2, 3));
        assert_eq!(s[0].pixels[0], 1.0);
        assert_eq!(s[1].pixels[0], 60.0 / 255.0);
        assert!(s.iter().flat_map(|s| &s.pixels).all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn rejects_bad_magic() {
        let mut b = fixture();
        b[3] = 0x01;
        assert!(matches!(parse_idx_sprites(&b), Err(Error::Idx(m)) if m.contains("magic")));
    }

    #[test]
    fn rejects_truncation_anywhere() {
        let b = fixture();
        for cut in [0, 3, 10, 15, 16, 39] {
            assert!(matches!(parse_idx_sprites(&b[..cut]), Err(Error::Idx(_))), "cut {cut}");
        }
        let mut long = b.clone();
        long.push(0);
        assert!(parse_idx_sprites(&long).is_err());
    }

    #[test]
    fn encode_round_trips_bytes() {
        let b = fixture();
        let s = parse_idx_sprites(&b).unwrap();
        assert_eq!(encode_idx_sprites(&s).unwrap(), b);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_idx_sprites("/nonexistent/images.idx"),
            Err(Error::Io { .. })
        ));
    }
}
