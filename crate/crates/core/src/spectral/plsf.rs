//! `PLSF` binary field dumps.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `b"PLSF"`                           |
//! | 4      | 4    | `d` (u32)                                 |
//! | 8      | 4    | `n` (u32)                                 |
//! | 12     | 4    | `K_H` (u32)                               |
//! | 16     | 8    | `L` (f64)                                 |
//! | 24     | 4    | flags (u32); bit 0 set for frequency data |
//! | 28     | 4    | reserved, must be zero                    |
//! | 32     | 8·K_H·n^d | row-major `(re, im)` pairs of f32    |

use thiserror::Error;

use super::{Domain, Field, SpaceGrid};

pub const MAGIC: &[u8; 4] = b"PLSF";
pub const HEADER_LEN: usize = 32;
const FLAG_FREQUENCY: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlsfError {
    #[error("buffer of {0} bytes is shorter than the header")]
    Truncated(usize),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported header field: {0}")]
    Header(String),
    #[error("payload has {got} bytes, header implies {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("non-finite sample in payload")]
    NonFinite,
}

/// Serialises a field; values are narrowed to `f32`.
pub fn encode(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&(field.channels() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    let flags = match field.domain() {
        Domain::Space => 0u32,
        Domain::Frequency => FLAG_FREQUENCY,
    };
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

/// Parses a `PLSF` buffer, validating every header field before touching
/// the payload.
pub fn decode(bytes: &[u8]) -> Result<Field, PlsfError> {
    if bytes.len() < HEADER_LEN {
        return Err(PlsfError::Truncated(bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err(PlsfError::BadMagic);
    }
    let d = read_u32(bytes, 4) as usize;
    let n = read_u32(bytes, 8) as usize;
    let channels = read_u32(bytes, 12) as usize;
    let length = f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let flags = read_u32(bytes, 24);
    let reserved = read_u32(bytes, 28);
    if reserved != 0 {
        return Err(PlsfError::Header(format!("reserved word {reserved:#x}")));
    }
    if flags & !FLAG_FREQUENCY != 0 {
        return Err(PlsfError::Header(format!("unknown flags {flags:#x}")));
    }
    if channels == 0 {
        return Err(PlsfError::Header("zero channels".into()));
    }
    if !(1..=super::MAX_DIM).contains(&d) || n < 8 || !n.is_power_of_two() {
        return Err(PlsfError::Header(format!("d = {d}, n = {n}")));
    }
    let expected = n
        .checked_pow(d as u32)
        .and_then(|len| len.checked_mul(channels))
        .and_then(|count| count.checked_mul(8))
        .ok_or_else(|| PlsfError::Header("size overflows".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(PlsfError::PayloadLength {
            expected,
            got: payload.len(),
        });
    }
    let grid = SpaceGrid::new(d, n, length).map_err(|e| PlsfError::Header(e.to_string()))?;
    let mut values = Vec::with_capacity(expected / 8);
    for pair in payload.chunks_exact(8) {
        let re = f32::from_le_bytes(pair[..4].try_into().expect("4 bytes"));
        let im = f32::from_le_bytes(pair[4..].try_into().expect("4 bytes"));
        if !(re.is_finite() && im.is_finite()) {
            return Err(PlsfError::NonFinite);
        }
        values.push(num_complex::Complex64::new(re as f64, im as f64));
    }
    let domain = if flags & FLAG_FREQUENCY != 0 {
        Domain::Frequency
    } else {
        Domain::Space
    };
    Field::from_values(&grid, channels, values, domain).map_err(|e| PlsfError::Header(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sample() -> Field {
        let grid = SpaceGrid::new(2, 8, 3.5).unwrap();
        Field::from_fn(&grid, 2, |ch, x| Complex64::new(x[0] + ch as f64, -x[1]))
    }

    #[test]
    fn round_trip_at_f32_precision() {
        let f = sample();
        let bytes = encode(&f);
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 2 * 64);
        assert_eq!(&bytes[..4], b"PLSF");
        let g = decode(&bytes).unwrap();
        assert_eq!(g.grid(), f.grid());
        assert_eq!(g.channels(), 2);
        assert!(g.max_abs_diff(&f).unwrap() < 1e-6);
        // a decoded field re-encodes to the same bytes
        assert_eq!(encode(&g), bytes);
    }

    #[test]
    fn frequency_flag_survives() {
        let f = sample().to_frequency().unwrap();
        let g = decode(&encode(&f)).unwrap();
        assert_eq!(g.domain(), Domain::Frequency);
    }

    #[test]
    fn rejects_corrupt_headers() {
        let bytes = encode(&sample());
        assert_eq!(decode(&bytes[..10]), Err(PlsfError::Truncated(10)));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(decode(&bad), Err(PlsfError::BadMagic));
        let mut bad = bytes.clone();
        bad[8..12].copy_from_slice(&12u32.to_le_bytes());
        assert!(matches!(decode(&bad), Err(PlsfError::Header(_))));
        let mut bad = bytes.clone();
        bad[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode(&bad), Err(PlsfError::Header(_))));
        let mut bad = bytes.clone();
        bad[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&bad), Err(PlsfError::Header(_))));
        let mut bad = bytes.clone();
        bad.pop();
        assert!(matches!(decode(&bad), Err(PlsfError::PayloadLength { .. })));
        let mut bad = bytes;
        bad[32..36].copy_from_slice(&f32::INFINITY.to_le_bytes());
        assert_eq!(decode(&bad), Err(PlsfError::NonFinite));
    }
}
