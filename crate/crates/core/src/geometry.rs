//! Waveguide cross section and atom placement.
//!
//! All lengths are measured in units of the inverse resonant wavenumber,
//! so the default `k0` is 1 and `a = 4` means a cross-section side of
//! `4 / k0`. The origin sits at one corner of the cross section; the
//! guide interior is `0 < x < a`, `0 < y < b` and `z` runs along the axis.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WgqedError};

/// Rectangular cross section with `a >= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct WaveguideGeometry {
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    a: f64,
    b: f64,
}

impl TryFrom<RawGeometry> for WaveguideGeometry {
    type Error = WgqedError;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        WaveguideGeometry::new(raw.a, raw.b)
    }
}

impl From<WaveguideGeometry> for RawGeometry {
    fn from(g: WaveguideGeometry) -> Self {
        RawGeometry { a: g.a, b: g.b }
    }
}

impl WaveguideGeometry {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= 0.0 {
            return Err(WgqedError::Geometry(format!(
                "sides must be finite and positive, got a = {a}, b = {b}"
            )));
        }
        if a < b {
            return Err(WgqedError::Geometry(format!(
                "expected a >= b, got a = {a}, b = {b}; swap the sides (rotate the guide) so that a is the wide side"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.a).contains(&x) && (0.0..=self.b).contains(&y)
    }

    pub fn strictly_contains(&self, x: f64, y: f64) -> bool {
        x > 0.0 && x < self.a && y > 0.0 && y < self.b
    }

    /// Centre of the cross section (the guide axis).
    pub fn axis(&self) -> (f64, f64) {
        (0.5 * self.a, 0.5 * self.b)
    }
}

/// A point-like, motionless atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomConfig {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AtomConfig {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn on_axis(geom: &WaveguideGeometry, z: f64) -> Self {
        let (x, y) = geom.axis();
        Self { x, y, z }
    }

    pub fn validate(&self, id: usize, geom: &WaveguideGeometry) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(WgqedError::NonFinite("atom position"));
        }
        if !geom.strictly_contains(self.x, self.y) {
            return Err(WgqedError::AtomOnWall {
                id,
                x: self.x,
                y: self.y,
            });
        }
        Ok(())
    }

    pub fn same_transverse_point(&self, other: &AtomConfig) -> bool {
        self.x == other.x && self.y == other.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_narrow_first_side() {
        let err = WaveguideGeometry::new(2.0, 4.0).unwrap_err();
        assert!(err.to_string().contains("swap"));
    }

    #[test]
    fn rejects_non_positive_sides() {
        assert!(WaveguideGeometry::new(0.0, 0.0).is_err());
        assert!(WaveguideGeometry::new(4.0, -1.0).is_err());
        assert!(WaveguideGeometry::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn wall_atoms_are_rejected() {
        let g = WaveguideGeometry::new(4.0, 2.0).unwrap();
        assert!(AtomConfig::new(0.0, 1.0, 0.0).validate(0, &g).is_err());
        assert!(AtomConfig::new(2.0, 2.0, 0.0).validate(0, &g).is_err());
        assert!(AtomConfig::new(2.0, 1.0, 0.0).validate(0, &g).is_ok());
    }

    #[test]
    fn serde_validates() {
        let bad: std::result::Result<WaveguideGeometry, _> =
            serde_json::from_str(r#"{"a": 1.0, "b": 3.0}"#);
        assert!(bad.is_err());
    }
}
