//! Closed-form single-mode results, written straight from the TE10 formulas.
//!
//! Nothing here touches the mode sums or the numeric matrix code, so these
//! functions can be used to check them.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Result, WgqedError};
use crate::geometry::WaveguideGeometry;

/// `sqrt(1 - (pi / (k0 a))^2)`, or a below-cutoff error.
fn te10_factor(geom: &WaveguideGeometry, k0: f64) -> Result<f64> {
    let cutoff = PI / geom.a();
    if !(k0 > cutoff) {
        return Err(WgqedError::BelowCutoff { k0, cutoff });
    }
    Ok((1.0 - (cutoff / k0).powi(2)).sqrt())
}

/// Decay rate of the `m_J = +-1` pair through TE10, in `gamma0` units.
pub fn gamma_prime(x1: f64, geom: &WaveguideGeometry, k0: f64) -> Result<f64> {
    let root = te10_factor(geom, k0)?;
    if !(0.0..=geom.a()).contains(&x1) {
        return Err(WgqedError::OutsideCrossSection {
            x: x1,
            y: 0.0,
            a: geom.a(),
            b: geom.b(),
        });
    }
    let s = (PI * x1 / geom.a()).sin();
    Ok(6.0 * PI * s * s / (k0 * k0 * geom.a() * geom.b() * root))
}

/// Amplitudes `(b_-1, b_+1, b_0)` after starting in `m_J = -1`.
pub fn single_atom_amplitudes(t: f64, gamma_prime: f64) -> (Complex64, Complex64, Complex64) {
    let e = (-0.5 * gamma_prime * t).exp();
    let half_i = Complex64::new(0.0, 0.5);
    (
        half_i * (1.0 + e),
        half_i * (e - 1.0),
        Complex64::new(0.0, 0.0),
    )
}

/// Populations `(P_-1, P_+1, P_0)` after starting in `m_J = -1`.
pub fn single_atom_populations(t: f64, gamma_prime: f64) -> (f64, f64, f64) {
    let e = (-0.5 * gamma_prime * t).exp();
    (
        0.25 * (1.0 + 2.0 * e + e * e),
        0.25 * (1.0 - 2.0 * e + e * e),
        0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoAtomEigenpair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub r1: Complex64,
    pub r2: Complex64,
    pub r3: Complex64,
}

impl TwoAtomEigenpair {
    pub fn lambdas(&self) -> [Complex64; 2] {
        [self.lambda1, self.lambda2]
    }
}

/// Far-field two-atom eigenvalues for atoms at transverse `x1`, `x2` separated by `dz`.
pub fn two_atom_eigenvalues(
    x1: f64,
    x2: f64,
    dz: f64,
    geom: &WaveguideGeometry,
    k0: f64,
) -> Result<TwoAtomEigenpair> {
    let root = te10_factor(geom, k0)?;
    let g1 = gamma_prime(x1, geom, k0)?;
    let g2 = gamma_prime(x2, geom, k0)?;
    let r1 = Complex64::new(0.0, -g1 / 4.0);
    let r3 = Complex64::new(0.0, -g2 / 4.0);
    let a = geom.a();
    let magnitude = 3.0 * PI / (2.0 * k0 * k0 * a * geom.b() * root)
        * (PI * x1 / a).sin()
        * (PI * x2 / a).sin();
    let r2 = Complex64::new(0.0, -magnitude) * Complex64::from_polar(1.0, k0 * dz.abs() * root);
    let disc = ((r1 - r3) * (r1 - r3) + 4.0 * r2 * r2).sqrt();
    Ok(TwoAtomEigenpair {
        lambda1: r1 + r3 + disc,
        lambda2: r1 + r3 - disc,
        r1,
        r2,
        r3,
    })
}

/// Axial period of the two-atom coupling, half the TE10 guided wavelength.
pub fn spatial_period(geom: &WaveguideGeometry, k0: f64) -> Result<f64> {
    Ok(PI / (k0 * te10_factor(geom, k0)?))
}
