//! Rectangular waveguide mode catalogue.
//!
//! TE modes carry indices `m, n = 0, 1, 2, ...` (not both zero), TM modes need
//! `m, n >= 1`. The transverse wavenumbers are `k_m = m pi / a` and
//! `k_n = n pi / b`, and a mode propagates at `k0` when its cutoff
//! `sqrt(k_m^2 + k_n^2)` is below `k0`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WgqedError};
use crate::geometry::WaveguideGeometry;

/// Relative distance from a cutoff below which `k0` is treated as sitting on it.
pub const CUTOFF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    TE,
    TM,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::TE => f.write_str("TE"),
            Family::TM => f.write_str("TM"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    family: Family,
    m: u32,
    n: u32,
}

impl ModeIndex {
    pub fn new(family: Family, m: u32, n: u32) -> Result<Self> {
        let reason = match family {
            Family::TE if m == 0 && n == 0 => Some("TE indices cannot both be zero"),
            Family::TM if m == 0 || n == 0 => Some("TM indices must both be positive"),
            _ => None,
        };
        match reason {
            Some(reason) => Err(WgqedError::InvalidMode {
                family: match family {
                    Family::TE => "TE",
                    Family::TM => "TM",
                },
                m,
                n,
                reason,
            }),
            None => Ok(Self { family, m, n }),
        }
    }

    pub fn te(m: u32, n: u32) -> Result<Self> {
        Self::new(Family::TE, m, n)
    }

    pub fn tm(m: u32, n: u32) -> Result<Self> {
        Self::new(Family::TM, m, n)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `(k_m, k_n)` for this mode.
    pub fn transverse_wavenumbers(&self, geom: &WaveguideGeometry) -> (f64, f64) {
        (self.m as f64 * PI / geom.a(), self.n as f64 * PI / geom.b())
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.family, self.m, self.n)
    }
}

pub fn cutoff_wavenumber(mode: &ModeIndex, geom: &WaveguideGeometry) -> f64 {
    let (km, kn) = mode.transverse_wavenumbers(geom);
    (km * km + kn * kn).sqrt()
}

/// Ordering used for every mode listing: cutoff, then TE before TM, then `(m, n)`.
fn mode_order(geom: &WaveguideGeometry) -> impl Fn(&ModeIndex, &ModeIndex) -> Ordering + '_ {
    move |p, q| {
        cutoff_wavenumber(p, geom)
            .total_cmp(&cutoff_wavenumber(q, geom))
            .then(p.family.cmp(&q.family))
            .then((p.m, p.n).cmp(&(q.m, q.n)))
    }
}

/// Every valid mode whose cutoff is at most `k_max`, in catalogue order.
pub fn enumerate_modes(geom: &WaveguideGeometry, k_max: f64) -> Vec<ModeIndex> {
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Vec::new();
    }
    let m_max = (k_max * geom.a() / PI).floor() as u32;
    let n_max = (k_max * geom.b() / PI).floor() as u32;
    let mut modes = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            for family in [Family::TE, Family::TM] {
                if let Ok(mode) = ModeIndex::new(family, m, n) {
                    if cutoff_wavenumber(&mode, geom) <= k_max {
                        modes.push(mode);
                    }
                }
            }
        }
    }
    modes.sort_by(mode_order(geom));
    modes
}

/// Modes with cutoff strictly below `k0`.
pub fn enumerate_propagating(geom: &WaveguideGeometry, k0: f64) -> Vec<ModeIndex> {
    enumerate_modes(geom, k0)
        .into_iter()
        .filter(|mode| cutoff_wavenumber(mode, geom) < k0)
        .collect()
}

/// Rejects a non-positive `k0` or one that sits on any mode cutoff.
pub fn check_frequency(geom: &WaveguideGeometry, k0: f64) -> Result<()> {
    if !k0.is_finite() || k0 <= 0.0 {
        return Err(WgqedError::Geometry(format!(
            "k0 must be finite and positive, got {k0}"
        )));
    }
    let window = k0 * (1.0 + 2.0 * CUTOFF_TOLERANCE);
    for mode in enumerate_modes(geom, window) {
        let cutoff = cutoff_wavenumber(&mode, geom);
        if (cutoff - k0).abs() <= CUTOFF_TOLERANCE * k0 {
            return Err(WgqedError::AtCutoff {
                mode: mode.to_string(),
                cutoff,
                k0,
            });
        }
    }
    Ok(())
}

/// Transverse electric field shape of one mode, normalization constant set to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProfile {
    pub ex: Complex64,
    pub ey: Complex64,
    pub ez: Complex64,
}

impl FieldProfile {
    pub fn norm_sqr(&self) -> f64 {
        self.ex.norm_sqr() + self.ey.norm_sqr() + self.ez.norm_sqr()
    }
}

/// Field components of `mode` at `(x, y)` for total wavenumber `k` and axial wavenumber `kz`.
pub fn field_profile(
    mode: &ModeIndex,
    geom: &WaveguideGeometry,
    k: f64,
    kz: f64,
    x: f64,
    y: f64,
) -> Result<FieldProfile> {
    if !geom.contains(x, y) {
        return Err(WgqedError::OutsideCrossSection {
            x,
            y,
            a: geom.a(),
            b: geom.b(),
        });
    }
    let (km, kn) = mode.transverse_wavenumbers(geom);
    let kc2 = km * km + kn * kn;
    let cos_sin = (km * x).cos() * (kn * y).sin();
    let sin_cos = (km * x).sin() * (kn * y).cos();
    let i = Complex64::i();
    Ok(match mode.family {
        Family::TE => FieldProfile {
            ex: -i * (kn * k / kc2 * cos_sin),
            ey: i * (km * k / kc2 * sin_cos),
            ez: Complex64::new(0.0, 0.0),
        },
        Family::TM => FieldProfile {
            ex: i * (kz * km / kc2 * cos_sin),
            ey: i * (kz * kn / kc2 * sin_cos),
            ez: Complex64::new((km * x).sin() * (kn * y).sin(), 0.0),
        },
    })
}
