//! Zeeman-basis transition dipoles of a J=0 -> J=1 atom.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Result, WgqedError};

/// The three excited sublevels in canonical order.
pub const SUBLEVELS: [i32; 3] = [-1, 0, 1];

/// Squared dipole magnitude (rate units, `gamma0 = 1`) for the convention
/// `Lambda = -(gamma0 / 2) G`. Fixed so that a single atom in a single-mode
/// guide decays at exactly the TE10 rate `gamma'`.
pub fn dipole_magnitude_sqr(k0: f64) -> f64 {
    0.75 / (k0 * k0 * k0)
}

/// Cartesian components of `<e, m_J| d |g>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleVector(pub Vector3<Complex64>);

impl DipoleVector {
    pub fn x(&self) -> Complex64 {
        self.0[0]
    }

    pub fn y(&self) -> Complex64 {
        self.0[1]
    }

    pub fn z(&self) -> Complex64 {
        self.0[2]
    }

    /// `<g| d |e, m_J>`, the complex conjugate.
    pub fn lowering(&self) -> Vector3<Complex64> {
        self.0.map(|c| c.conj())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `m_J = 0` is z-polarized; `m_J = +-1` map to `-+d (1, +-i, 0) / sqrt(2)`.
pub fn dipole_components(m_j: i32, k0: f64) -> Result<DipoleVector> {
    let d = dipole_magnitude_sqr(k0).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let h = d * std::f64::consts::FRAC_1_SQRT_2;
    let v = match m_j {
        0 => Vector3::new(zero, zero, Complex64::new(d, 0.0)),
        1 => Vector3::new(Complex64::new(-h, 0.0), Complex64::new(0.0, -h), zero),
        -1 => Vector3::new(Complex64::new(h, 0.0), Complex64::new(0.0, -h), zero),
        other => return Err(WgqedError::InvalidSublevel(other)),
    };
    Ok(DipoleVector(v))
}

/// Rows are sublevels `-1, 0, +1`; columns are the Cartesian components of `<e|d|g>`.
pub fn dipole_matrix(k0: f64) -> Matrix3<Complex64> {
    let mut m = Matrix3::zeros();
    for (row, &mj) in SUBLEVELS.iter().enumerate() {
        let d = dipole_components(mj, k0).expect("canonical sublevel");
        m.set_row(row, &d.0.transpose());
    }
    m
}

/// Projects a Cartesian coupling tensor `T[alpha][beta]` (absorber component
/// alpha, emitter component beta) onto sublevel pairs:
/// `B[mu][nu] = sum d_alpha(mu) T[alpha][beta] conj(d_beta(nu))`.
pub fn sublevel_block(tensor: &Matrix3<Complex64>, k0: f64) -> Matrix3<Complex64> {
    let d = dipole_matrix(k0);
    d * tensor * d.adjoint()
}
