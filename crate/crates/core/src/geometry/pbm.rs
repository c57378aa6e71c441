//! Portable bitmap (P1 and P4) ingestion. Set pixels are occupied; the first
//! row of the file is the top of the domain.

use crate::error::{invalid, Result};

use super::raster::RasterDomain;

pub fn parse_pbm(bytes: &[u8], origin: [f64; 2], pixel_level: i32) -> Result<RasterDomain> {
    let mut pos = 0usize;
    let magic = token(bytes, &mut pos).ok_or_else(|| invalid("PBM: missing magic number"))?;
    let binary = match magic.as_slice() {
        b"P1" => false,
        b"P4" => true,
        _ => return Err(invalid("PBM: expected P1 or P4")),
    };
    let number = |pos: &mut usize| -> Result<usize> {
        let t = token(bytes, pos).ok_or_else(|| invalid("PBM: truncated header"))?;
        std::str::from_utf8(&t)
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&v: &usize| v > 0)
            .ok_or_else(|| invalid("PBM: bad dimension"))
    };
    let width = number(&mut pos)?;
    let height = number(&mut pos)?;
    let mut rows = vec![false; width * height];
    if binary {
        pos += 1; // single whitespace byte after the header
        let stride = width.div_ceil(8);
        let data = bytes.get(pos..pos + stride * height).ok_or_else(|| invalid("PBM: truncated raster"))?;
        for r in 0..height {
            for c in 0..width {
                rows[r * width + c] = data[r * stride + c / 8] >> (7 - c % 8) & 1 == 1;
            }
        }
    } else {
        let mut k = 0;
        while k < width * height {
            match bytes.get(pos) {
                None => return Err(invalid("PBM: truncated raster")),
                Some(b'0') => k += 1,
                Some(b'1') => {
                    rows[k] = true;
                    k += 1;
                }
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => {}
                Some(_) => return Err(invalid("PBM: unexpected byte in raster")),
            }
            pos += 1;
        }
    }
    // Pixel (column c, row r) becomes index (x = c, y = height - 1 - r).
    let mut occupied = vec![false; width * height];
    for r in 0..height {
        for c in 0..width {
            occupied[c * height + (height - 1 - r)] = rows[r * width + c];
        }
    }
    RasterDomain::from_occupancy(origin.to_vec(), pixel_level, vec![width, height], occupied)
}

fn token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return None,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Some(bytes[start..*pos].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_and_binary_agree() {
        let ascii = b"P1\n# L shape\n3 2\n1 0 0\n1 1 1\n";
        let binary = [b"P4\n3 2\n".as_slice(), &[0b1000_0000, 0b1110_0000]].concat();
        let a = parse_pbm(ascii, [0.0, 0.0], 0).unwrap();
        let b = parse_pbm(&binary, [0.0, 0.0], 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.occupied_count(), 4);
        // Top-left file pixel is (x = 0, y = 1).
        assert!(a.contains(&[0.5, 1.5]));
        assert!(!a.contains(&[1.5, 1.5]));
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(parse_pbm(b"P2\n1 1\n1", [0.0, 0.0], 0).is_err());
        assert!(parse_pbm(b"P1\n2 2\n1 1 1", [0.0, 0.0], 0).is_err());
    }
}
