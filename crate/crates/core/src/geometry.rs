//! Spatial primitives and the binary disk-detection predicate.
//!
//! A beacon reports `1` for a target strictly inside its sensing disk and `0`
//! otherwise. Distances are compared in squared form throughout.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("coordinate is not finite: ({x}, {y})")]
    NonFinitePoint { x: f64, y: f64 },
    #[error("beacon radius must be finite and >= 0, got {0}")]
    InvalidRadius(f64),
    #[error("domain extent must be finite and > 0, got {width} x {height}")]
    InvalidDomain { width: f64, height: f64 },
    #[error("beacon {index} at ({x}, {y}) lies outside the {width} x {height} domain")]
    BeaconOutsideDomain {
        index: usize,
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
    #[error("invalid signature character {0:?}, expected '0' or '1'")]
    InvalidSignatureChar(char),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(GeometryError::NonFinitePoint { x, y });
        }
        Ok(Self { x, y })
    }

    #[inline]
    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Point {
        Point {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

/// A sensor at a known position with a disk-shaped sensing range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beacon {
    pub position: Point,
    pub radius: f64,
}

impl Beacon {
    pub fn new(position: Point, radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(GeometryError::InvalidRadius(radius));
        }
        Ok(Self { position, radius })
    }

    #[inline]
    pub fn radius_sq(&self) -> f64 {
        self.radius * self.radius
    }
}

/// Axis-aligned rectangle `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    width: f64,
    height: f64,
}

impl Domain {
    pub fn new(width: f64, height: f64) -> Result<Self, GeometryError> {
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(GeometryError::InvalidDomain { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn center(&self) -> Point {
        Point {
            x: self.width / 2.0,
            y: self.height / 2.0,
        }
    }
}

impl Default for Domain {
    /// The 100 x 100 normalized square.
    fn default() -> Self {
        Self {
            width: 100.0,
            height: 100.0,
        }
    }
}

/// Beacons placed inside a domain. Beacon order fixes signature bit order.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    domain: Domain,
    beacons: Vec<Beacon>,
}

impl Deployment {
    pub fn new(domain: Domain, beacons: Vec<Beacon>) -> Result<Self, GeometryError> {
        for (index, b) in beacons.iter().enumerate() {
            if !domain.contains(&b.position) {
                return Err(GeometryError::BeaconOutsideDomain {
                    index,
                    x: b.position.x,
                    y: b.position.y,
                    width: domain.width,
                    height: domain.height,
                });
            }
        }
        Ok(Self { domain, beacons })
    }

    pub fn empty(domain: Domain) -> Self {
        Self {
            domain,
            beacons: Vec::new(),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn beacons(&self) -> &[Beacon] {
        &self.beacons
    }

    pub fn len(&self) -> usize {
        self.beacons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beacons.is_empty()
    }
}

/// Ordered binary reading vector, one bit per beacon.
///
/// Bits are packed little-endian into `u64` words; unused high bits of the
/// last word are always zero so that equality and hashing are exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    len: usize,
    words: Vec<u64>,
}

pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl Signature {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut sig = Self::zeros(0);
        for b in bits {
            if sig.len.is_multiple_of(64) {
                sig.words.push(0);
            }
            if b {
                sig.words[sig.len / 64] |= 1 << (sig.len % 64);
            }
            sig.len += 1;
        }
        sig
    }

    pub(crate) fn from_words(len: usize, words: &[u64]) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self {
            len,
            words: words.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Renders as a `'0'`/`'1'` string, bit 0 first.
impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Signature {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(GeometryError::InvalidSignatureChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Signature::from_bits(bits))
    }
}

/// Binary reading of one beacon: strict `‖x − s‖² < r²`, so the disk boundary reads 0.
#[inline]
pub fn detects(beacon: &Beacon, x: &Point) -> bool {
    beacon.position.distance_sq(x) < beacon.radius_sq()
}

pub fn signature_at(dep: &Deployment, x: &Point) -> Signature {
    Signature::from_bits(dep.beacons.iter().map(|b| detects(b, x)))
}
