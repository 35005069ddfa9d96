//! Effective evolution generator for the one-excitation sector.
//!
//! For `N` atoms the amplitudes of the `3N` singly excited states obey
//! `i db/dt = Lambda b` with `Lambda = -(gamma0 / 2) G`, where `G` is the
//! Green's matrix assembled from the four mode families of the guide
//! (see [`parts`]). Rates are in units of `gamma0`, lengths in `1 / k0`.

pub mod dipole;
pub mod parts;
pub mod truncation;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WgqedError};
use crate::geometry::{AtomConfig, WaveguideGeometry};
use crate::modes::check_frequency;

pub use dipole::{dipole_components, dipole_magnitude_sqr, DipoleVector, SUBLEVELS};
pub use parts::{
    evolution_block, green_part_i, green_part_ii, green_part_iii, green_part_iv, green_tensor,
    AtomPair, Block,
};
pub use truncation::TruncationPolicy;

/// One singly excited state `|e_{atom, m_J}>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExcitedStateIndex {
    pub atom: usize,
    pub m_j: i32,
}

impl ExcitedStateIndex {
    pub fn new(atom: usize, m_j: i32) -> Result<Self> {
        if !SUBLEVELS.contains(&m_j) {
            return Err(WgqedError::InvalidSublevel(m_j));
        }
        Ok(Self { atom, m_j })
    }

    /// Position in the canonical ordering (atom ascending, `m_J = -1, 0, +1`).
    pub fn flat(&self) -> usize {
        3 * self.atom + (self.m_j + 1) as usize
    }

    pub fn from_flat(index: usize) -> Self {
        Self {
            atom: index / 3,
            m_j: (index % 3) as i32 - 1,
        }
    }
}

/// Canonical list of excited states for `n_atoms` atoms.
pub fn excited_states(n_atoms: usize) -> Vec<ExcitedStateIndex> {
    (0..3 * n_atoms).map(ExcitedStateIndex::from_flat).collect()
}

/// Dense `3N x 3N` generator `Lambda` plus the inputs that produced it.
#[derive(Debug, Clone)]
pub struct EffectiveMatrix {
    matrix: DMatrix<Complex64>,
    geometry: WaveguideGeometry,
    k0: f64,
    atoms: Vec<AtomConfig>,
    truncation: TruncationPolicy,
}

impl EffectiveMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[AtomConfig] {
        &self.atoms
    }

    pub fn geometry(&self) -> &WaveguideGeometry {
        &self.geometry
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn truncation(&self) -> &TruncationPolicy {
        &self.truncation
    }

    pub fn entry(&self, row: ExcitedStateIndex, col: ExcitedStateIndex) -> Complex64 {
        self.matrix[(row.flat(), col.flat())]
    }

    /// Wraps an arbitrary generator, e.g. for testing the propagators.
    pub fn from_raw(
        matrix: DMatrix<Complex64>,
        geometry: WaveguideGeometry,
        k0: f64,
        atoms: Vec<AtomConfig>,
        truncation: TruncationPolicy,
    ) -> Result<Self> {
        let dim = 3 * atoms.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(WgqedError::DimensionMismatch {
                expected: dim,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            matrix,
            geometry,
            k0,
            atoms,
            truncation,
        })
    }
}

/// Assembles `Lambda` blockwise over all ordered atom pairs.
pub fn build_effective_matrix(
    atoms: &[AtomConfig],
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<EffectiveMatrix> {
    if atoms.is_empty() {
        return Err(WgqedError::Config("at least one atom is required".into()));
    }
    check_frequency(geom, k0)?;
    trunc.validate()?;
    for (id, atom) in atoms.iter().enumerate() {
        atom.validate(id, geom)?;
    }

    let n = atoms.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|row| (0..n).map(move |col| (row, col)))
        .collect();
    let blocks: Vec<(usize, usize, Block)> = pairs
        .par_iter()
        .map(|&(row, col)| {
            let pair = if row == col {
                AtomPair::self_term(row, &atoms[row])
            } else {
                AtomPair::new(row, &atoms[row], col, &atoms[col], trunc)?
            };
            Ok((row, col, evolution_block(&pair, geom, k0, trunc)?))
        })
        .collect::<Result<_>>()?;

    let mut matrix = DMatrix::zeros(3 * n, 3 * n);
    for (row, col, block) in blocks {
        matrix
            .fixed_view_mut::<3, 3>(3 * row, 3 * col)
            .copy_from(&block);
    }
    if matrix
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(WgqedError::NonFinite("effective matrix"));
    }
    Ok(EffectiveMatrix {
        matrix,
        geometry: *geom,
        k0,
        atoms: atoms.to_vec(),
        truncation: *trunc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn guide() -> WaveguideGeometry {
        WaveguideGeometry::new(4.0, 2.0).unwrap()
    }

    #[test]
    fn state_indexing_round_trips() {
        for (k, s) in excited_states(4).iter().enumerate() {
            assert_eq!(s.flat(), k);
        }
        assert_eq!(
            ExcitedStateIndex::from_flat(4),
            ExcitedStateIndex { atom: 1, m_j: 0 }
        );
        assert!(ExcitedStateIndex::new(0, 3).is_err());
    }

    #[test]
    fn single_atom_pi_state_is_decoupled() {
        let m = build_effective_matrix(
            &[AtomConfig::new(2.0, 1.0, 0.0)],
            &guide(),
            1.0,
            &TruncationPolicy::default(),
        )
        .unwrap();
        for k in 0..3 {
            assert_eq!(m.matrix()[(1, k)].norm(), 0.0);
            assert_eq!(m.matrix()[(k, 1)].norm(), 0.0);
        }
        let kz = (1.0 - (PI / 4.0f64).powi(2)).sqrt();
        let gamma_prime = 6.0 * PI / (8.0 * kz);
        for (r, c) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
            let e = m.matrix()[(r, c)];
            assert!((e.im + gamma_prime / 4.0).abs() < 1e-13);
            assert!(e.re.abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = TruncationPolicy::default();
        assert!(build_effective_matrix(&[], &guide(), 1.0, &t).is_err());
        assert!(
            build_effective_matrix(&[AtomConfig::new(0.0, 1.0, 0.0)], &guide(), 1.0, &t).is_err()
        );
        let on_cutoff = WaveguideGeometry::new(PI, 1.0).unwrap();
        assert!(matches!(
            build_effective_matrix(&[AtomConfig::new(1.0, 0.5, 0.0)], &on_cutoff, 1.0, &t),
            Err(WgqedError::AtCutoff { .. })
        ));
        let twins = [
            AtomConfig::new(2.0, 1.0, 3.0),
            AtomConfig::new(2.0, 1.0, 3.0),
        ];
        assert!(matches!(
            build_effective_matrix(&twins, &guide(), 1.0, &t),
            Err(WgqedError::CoincidentAtoms { .. })
        ));
    }
}
