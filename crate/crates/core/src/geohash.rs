//! Fixed-precision geohash cells over WGS-84 coordinates.
//!
//! A geohash interleaves longitude and latitude bisections (longitude first)
//! and spells every five bits with the public base-32 alphabet. Points that
//! fall exactly on a bisection line go to the upper half, so cell bounds are
//! half-open `[min, max)` on both axes.

use alloc::string::String;

use crate::error::{domain, Error, Result};
use crate::EARTH_RADIUS_KM;

pub const ALPHABET: &[u8; 32] = b"0123456789bcdefghjkmnpqrstuvwxyz";

/// Longest supported code. Twelve characters already resolve a few
/// centimetres, the limit of what an `f64` degree carries usefully.
pub const MAX_LEVEL: usize = 12;

/// Latitude/longitude bounds of a cell, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Bounds {
    const WORLD: Bounds = Bounds {
        lat_min: -90.0,
        lat_max: 90.0,
        lon_min: -180.0,
        lon_max: 180.0,
    };

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.lat_min + self.lat_max),
            0.5 * (self.lon_min + self.lon_max),
        )
    }

    /// Half-open containment test.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.lat_min && lat < self.lat_max && lon >= self.lon_min && lon < self.lon_max
    }
}

/// A geohash cell: its code and the exact dyadic bounds the code denotes.
#[derive(Debug, Clone, PartialEq)]
pub struct GeohashCell {
    code: String,
    bounds: Bounds,
}

impl GeohashCell {
    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn level(&self) -> usize {
        self.code.len()
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn center(&self) -> (f64, f64) {
        self.bounds.center()
    }

    pub fn area_km2(&self) -> f64 {
        cell_area_km2(self)
    }

    pub fn into_code(self) -> String {
        self.code
    }
}

#[inline]
fn bisect(v: f64, min: &mut f64, max: &mut f64) -> u8 {
    let mid = 0.5 * (*min + *max);
    if v >= mid {
        *min = mid;
        1
    } else {
        *max = mid;
        0
    }
}

/// Encode a coordinate at `level` characters.
pub fn encode(lat: f64, lon: f64, level: usize) -> Result<GeohashCell> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(domain!("latitude {lat} outside [-90, 90]"));
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(domain!("longitude {lon} outside [-180, 180]"));
    }
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(domain!("geohash level {level} outside [1, {MAX_LEVEL}]"));
    }

    let mut b = Bounds::WORLD;
    let mut code = String::with_capacity(level);
    let mut even = true;
    for _ in 0..level {
        let mut idx = 0u8;
        for _ in 0..5 {
            let bit = if even {
                bisect(lon, &mut b.lon_min, &mut b.lon_max)
            } else {
                bisect(lat, &mut b.lat_min, &mut b.lat_max)
            };
            idx = (idx << 1) | bit;
            even = !even;
        }
        code.push(ALPHABET[idx as usize] as char);
    }
    Ok(GeohashCell { code, bounds: b })
}

/// The code's `5·level` bits as an integer. For a fixed level, integer
/// order equals code order.
pub fn encode_bits(lat: f64, lon: f64, level: usize) -> Result<u64> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(domain!("latitude {lat} outside [-90, 90]"));
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(domain!("longitude {lon} outside [-180, 180]"));
    }
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(domain!("geohash level {level} outside [1, {MAX_LEVEL}]"));
    }
    let mut b = Bounds::WORLD;
    let mut bits = 0u64;
    for i in 0..5 * level {
        let bit = if i % 2 == 0 {
            bisect(lon, &mut b.lon_min, &mut b.lon_max)
        } else {
            bisect(lat, &mut b.lat_min, &mut b.lat_max)
        };
        bits = (bits << 1) | u64::from(bit);
    }
    Ok(bits)
}

/// Spell `5·level` bits with the geohash alphabet.
pub fn code_from_bits(bits: u64, level: usize) -> String {
    (0..level)
        .rev()
        .map(|i| ALPHABET[((bits >> (5 * i)) & 31) as usize] as char)
        .collect()
}

fn symbol_value(c: u8) -> Option<u8> {
    ALPHABET.iter().position(|&a| a == c).map(|i| i as u8)
}

/// Decode a code into its cell bounds. Upper-case input is accepted.
pub fn decode(code: &str) -> Result<GeohashCell> {
    if code.is_empty() {
        return Err(Error::Parse("empty geohash".into()));
    }
    if code.len() > MAX_LEVEL {
        return Err(Error::Parse(alloc::format!(
            "geohash longer than {MAX_LEVEL} characters"
        )));
    }
    let mut b = Bounds::WORLD;
    let mut even = true;
    let mut normalized = String::with_capacity(code.len());
    for ch in code.bytes() {
        let lower = ch.to_ascii_lowercase();
        let v = symbol_value(lower).ok_or_else(|| {
            Error::Parse(alloc::format!("invalid geohash character {:?}", ch as char))
        })?;
        normalized.push(lower as char);
        for shift in (0..5).rev() {
            let bit = (v >> shift) & 1;
            let (min, max) = if even {
                (&mut b.lon_min, &mut b.lon_max)
            } else {
                (&mut b.lat_min, &mut b.lat_max)
            };
            let mid = 0.5 * (*min + *max);
            if bit == 1 {
                *min = mid;
            } else {
                *max = mid;
            }
            even = !even;
        }
    }
    Ok(GeohashCell {
        code: normalized,
        bounds: b,
    })
}

/// Spherical-earth area of the cell's bounding rectangle in km².
pub fn cell_area_km2(cell: &GeohashCell) -> f64 {
    bounds_area_km2(&cell.bounds)
}

pub fn bounds_area_km2(b: &Bounds) -> f64 {
    let dlon = (b.lon_max - b.lon_min).to_radians();
    let band = libm::sin(b.lat_max.to_radians()) - libm::sin(b.lat_min.to_radians());
    EARTH_RADIUS_KM * EARTH_RADIUS_KM * dlon * band
}

/// The 32 children of a cell, in alphabet order.
pub fn children(cell: &GeohashCell) -> Result<alloc::vec::Vec<GeohashCell>> {
    if cell.level() >= MAX_LEVEL {
        return Err(domain!("cell already at maximum level"));
    }
    ALPHABET
        .iter()
        .map(|&c| {
            let mut code = cell.code.clone();
            code.push(c as char);
            decode(&code)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: quantize each axis to an integer grid, interleave
    /// the integer bits, then chunk into base-32 symbols.
    fn oracle_encode(lat: f64, lon: f64, level: usize) -> String {
        let bits = 5 * level;
        let lon_bits = (bits + 1) / 2;
        let lat_bits = bits / 2;
        let quantize = |v: f64, lo: f64, hi: f64, nbits: usize| -> u64 {
            let cells = 1u64 << nbits;
            let q = ((v - lo) / (hi - lo) * cells as f64).floor() as u64;
            q.min(cells - 1)
        };
        let lon_q = quantize(lon, -180.0, 180.0, lon_bits);
        let lat_q = quantize(lat, -90.0, 90.0, lat_bits);
        let mut word: u64 = 0;
        let (mut li, mut ai) = (lon_bits, lat_bits);
        for k in 0..bits {
            let bit = if k % 2 == 0 {
                li -= 1;
                (lon_q >> li) & 1
            } else {
                ai -= 1;
                (lat_q >> ai) & 1
            };
            word = (word << 1) | bit;
        }
        (0..level)
            .map(|i| {
                let v = (word >> (5 * (level - 1 - i))) & 31;
                ALPHABET[v as usize] as char
            })
            .collect()
    }

    #[test]
    fn oracle_reproduces_published_vector() {
        assert_eq!(oracle_encode(57.64911, 10.40744, 6), "u4pruy");
        assert_eq!(oracle_encode(0.0, 0.0, 1), "s");
    }

    #[test]
    fn published_vector() {
        assert_eq!(encode(57.64911, 10.40744, 6).unwrap().code(), "u4pruy");
    }

    #[test]
    fn origin_is_s() {
        let cell = encode(0.0, 0.0, 1).unwrap();
        assert_eq!(cell.code(), "s");
    }

    #[test]
    fn decode_s_bounds() {
        let b = decode("s").unwrap().bounds();
        assert_eq!(
            (b.lat_min, b.lat_max, b.lon_min, b.lon_max),
            (0.0, 45.0, 0.0, 45.0)
        );
    }

    #[test]
    fn decode_rejects_bad_input() {
        assert!(matches!(decode(""), Err(Error::Parse(_))));
        assert!(matches!(decode("u4a"), Err(Error::Parse(_))));
        assert!(matches!(decode("u4i"), Err(Error::Parse(_))));
        assert_eq!(decode("U4PRUY").unwrap().code(), "u4pruy");
    }

    #[test]
    fn encode_rejects_out_of_domain() {
        assert!(encode(91.0, 0.0, 5).is_err());
        assert!(encode(0.0, -180.5, 5).is_err());
        assert!(encode(0.0, 0.0, 0).is_err());
        assert!(encode(0.0, 0.0, 13).is_err());
        assert!(encode(90.0, 180.0, 12).is_ok());
    }

    #[test]
    fn level6_area_near_bengaluru() {
        let cell = encode(12.9716, 77.5946, 6).unwrap();
        let a = cell.area_km2();
        assert!((a - 0.72).abs() / 0.72 < 0.05, "area {a}");
    }

    #[test]
    fn level5_area_near_bengaluru() {
        let cell = encode(12.9716, 77.5946, 5).unwrap();
        let a = cell.area_km2();
        let nominal = 4.9 * 4.9;
        assert!((a - nominal).abs() / nominal < 0.10, "area {a}");
    }

    #[test]
    fn degenerate_bounds_have_zero_area() {
        let b = Bounds {
            lat_min: 13.0,
            lat_max: 13.0,
            lon_min: 77.0,
            lon_max: 77.1,
        };
        assert_eq!(bounds_area_km2(&b), 0.0);
    }

    #[test]
    fn children_areas_sum_to_parent() {
        let parent = encode(12.9716, 77.5946, 6).unwrap();
        let total: f64 = children(&parent).unwrap().iter().map(|c| c.area_km2()).sum();
        let rel = (total - parent.area_km2()).abs() / parent.area_km2();
        assert!(rel < 1e-9, "rel {rel}");
    }

    proptest! {
        #[test]
        fn matches_oracle(lat in -90.0f64..90.0, lon in -180.0f64..180.0, level in 1usize..=12) {
            let got = encode(lat, lon, level).unwrap();
            let want = oracle_encode(lat, lon, level);
            prop_assert_eq!(got.code(), want.as_str());
        }

        #[test]
        fn center_round_trip(lat in -90.0f64..90.0, lon in -180.0f64..180.0, level in 1usize..=12) {
            let cell = encode(lat, lon, level).unwrap();
            prop_assert!(cell.bounds().contains(lat, lon));
            let decoded = decode(cell.code()).unwrap();
            prop_assert_eq!(decoded.bounds(), cell.bounds());
            let (clat, clon) = decoded.center();
            let again = encode(clat, clon, level).unwrap();
            prop_assert_eq!(again.code(), cell.code());
        }

        #[test]
        fn refinement_is_monotone(lat in -89.0f64..89.0, lon in -179.0f64..179.0, level in 1usize..12) {
            let coarse = encode(lat, lon, level).unwrap();
            let fine = encode(lat, lon, level + 1).unwrap();
            prop_assert!(fine.code().starts_with(coarse.code()));
            let (c, f) = (coarse.bounds(), fine.bounds());
            prop_assert!(f.lat_min >= c.lat_min && f.lat_max <= c.lat_max);
            prop_assert!(f.lon_min >= c.lon_min && f.lon_max <= c.lon_max);
        }
    }

    #[test]
    fn bits_agree_with_codes() {
        for &(lat, lon) in &[(57.64911, 10.40744), (-33.9, 151.2), (0.0, 0.0), (90.0, 180.0), (-90.0, -180.0)] {
            for level in 1..=MAX_LEVEL {
                let bits = encode_bits(lat, lon, level).unwrap();
                assert_eq!(code_from_bits(bits, level), encode(lat, lon, level).unwrap().code());
            }
        }
    }

}
