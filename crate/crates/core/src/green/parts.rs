//! The four mode-family contributions to the Green's matrix.
//!
//! Each part is first accumulated as a Cartesian coupling tensor
//! `T[alpha][beta]` (alpha: field component at the absorbing atom, beta:
//! at the emitting atom, both in units of `gamma0`) and then projected onto
//! Zeeman sublevels with [`sublevel_block`]. Propagating modes contribute
//! `i exp(i kz |dz|) / kz`-type terms (decay plus long-range exchange),
//! below-cutoff modes real `exp(-kappa |dz|) / kappa` near-field terms.
//! The self term of an atom keeps only the propagating modes.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

use super::dipole::sublevel_block;
use super::truncation::TruncationPolicy;
use crate::error::{Result, WgqedError};
use crate::geometry::{AtomConfig, WaveguideGeometry};

pub type Block = Matrix3<Complex64>;

const X: usize = 0;
const Y: usize = 1;
const Z: usize = 2;

/// An (absorber, emitter) pair. Row sublevels of a block belong to the
/// absorber, columns to the emitter.
#[derive(Debug, Clone, Copy)]
pub struct AtomPair<'a> {
    pub absorber_id: usize,
    pub absorber: &'a AtomConfig,
    pub emitter_id: usize,
    pub emitter: &'a AtomConfig,
}

impl<'a> AtomPair<'a> {
    pub fn new(
        absorber_id: usize,
        absorber: &'a AtomConfig,
        emitter_id: usize,
        emitter: &'a AtomConfig,
        trunc: &TruncationPolicy,
    ) -> Result<Self> {
        let pair = Self {
            absorber_id,
            absorber,
            emitter_id,
            emitter,
        };
        if pair.is_self_term() {
            return Ok(pair);
        }
        let dz = pair.axial_distance();
        if dz == 0.0 && absorber.same_transverse_point(emitter) {
            return Err(WgqedError::CoincidentAtoms {
                first: emitter_id.min(absorber_id),
                second: emitter_id.max(absorber_id),
            });
        }
        if dz < trunc.min_axial_separation {
            return Err(WgqedError::AxialSeparation {
                first: emitter_id.min(absorber_id),
                second: emitter_id.max(absorber_id),
                dz,
                min: trunc.min_axial_separation,
            });
        }
        Ok(pair)
    }

    pub fn self_term(id: usize, atom: &'a AtomConfig) -> Self {
        Self {
            absorber_id: id,
            absorber: atom,
            emitter_id: id,
            emitter: atom,
        }
    }

    pub fn is_self_term(&self) -> bool {
        self.absorber_id == self.emitter_id
    }

    pub fn axial_distance(&self) -> f64 {
        (self.absorber.z - self.emitter.z).abs()
    }

    /// `sign(z_absorber - z_emitter)`, zero when the atoms share `z`.
    fn axial_sign(&self) -> f64 {
        let d = self.absorber.z - self.emitter.z;
        if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

/// Axial propagation factor of one mode with cutoff `kc`.
#[derive(Debug, Clone, Copy)]
enum Axial {
    /// `kz = sqrt(k0^2 - kc^2)`; carries `i exp(i kz |dz|)`.
    Propagating { kz: f64, phase: Complex64 },
    /// `kappa = sqrt(kc^2 - k0^2)`; carries `exp(-kappa |dz|)`.
    Evanescent { kappa: f64, damping: f64 },
}

impl Axial {
    fn new(kc2: f64, k0: f64, dz: f64) -> Self {
        let k02 = k0 * k0;
        if kc2 < k02 {
            let kz = (k02 - kc2).sqrt();
            Axial::Propagating {
                kz,
                phase: Complex64::i() * Complex64::from_polar(1.0, kz * dz),
            }
        } else {
            let kappa = (kc2 - k02).sqrt();
            Axial::Evanescent {
                kappa,
                damping: (-kappa * dz).exp(),
            }
        }
    }
}

/// Number of propagating orders `[[k0 L / pi]]` along a side of length `side`.
fn propagating_orders(k0: f64, side: f64) -> u32 {
    (k0 * side / PI).floor() as u32
}

/// Sum over TE modes with one vanishing index, along a side of length `side`.
/// `pos_abs`, `pos_emit` are the atom coordinates across that side.
fn single_index_sum(
    pair: &AtomPair<'_>,
    side: f64,
    pos_abs: f64,
    pos_emit: f64,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<Complex64> {
    let dz = pair.axial_distance();
    let k02 = k0 * k0;
    let m_prop = propagating_orders(k0, side);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 1..=m_prop {
        let km = m as f64 * PI / side;
        let overlap = (km * pos_abs).sin() * (km * pos_emit).sin();
        if let Axial::Propagating { kz, phase } = Axial::new(km * km, k0, dz) {
            acc += phase * (overlap * k02 / kz);
        }
    }
    if pair.is_self_term() {
        return Ok(acc);
    }
    let budget = trunc.decay_budget();
    let mut tail = 0.0;
    let mut count = 0usize;
    let mut m = m_prop + 1;
    loop {
        let km = m as f64 * PI / side;
        let kappa = (km * km - k02).sqrt();
        if kappa * dz > budget {
            break;
        }
        count += 1;
        if count > trunc.max_terms {
            return Err(exhausted(pair, trunc));
        }
        let overlap = (km * pos_abs).sin() * (km * pos_emit).sin();
        tail += overlap * (-kappa * dz).exp() * k02 / kappa;
        m += 1;
    }
    Ok(acc + tail)
}

fn exhausted(pair: &AtomPair<'_>, trunc: &TruncationPolicy) -> WgqedError {
    WgqedError::TruncationExhausted {
        first: pair.emitter_id.min(pair.absorber_id),
        second: pair.emitter_id.max(pair.absorber_id),
        max_terms: trunc.max_terms,
    }
}

/// Visits every `(m, n)` with `m, n >= 1` that is either propagating, or
/// (for distinct atoms) evanescent within the truncation budget.
fn for_each_double_index(
    pair: &AtomPair<'_>,
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
    mut visit: impl FnMut(f64, f64, Axial),
) -> Result<()> {
    let dz = pair.axial_distance();
    let k02 = k0 * k0;
    let reach2 = if pair.is_self_term() {
        k02
    } else {
        let r = trunc.decay_budget() / dz;
        k02 + r * r
    };
    let (a, b) = (geom.a(), geom.b());
    let mut evanescent = 0usize;
    let mut m = 1u32;
    loop {
        let km = m as f64 * PI / a;
        let rest = reach2 - km * km;
        if rest <= (PI / b).powi(2) {
            break;
        }
        let n_max = (rest.sqrt() * b / PI).floor() as u32;
        for n in 1..=n_max {
            let kn = n as f64 * PI / b;
            let kc2 = km * km + kn * kn;
            if pair.is_self_term() && kc2 >= k02 {
                break;
            }
            let axial = Axial::new(kc2, k0, dz);
            if let Axial::Evanescent { .. } = axial {
                evanescent += 1;
                if evanescent > trunc.max_terms {
                    return Err(exhausted(pair, trunc));
                }
            }
            visit(km, kn, axial);
        }
        m += 1;
    }
    Ok(())
}

/// Part I: TE modes with `n = 0` (field along y only).
pub fn green_part_i_tensor(
    pair: &AtomPair<'_>,
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<Block> {
    let s = single_index_sum(pair, geom.a(), pair.absorber.x, pair.emitter.x, k0, trunc)?;
    let mut t = Block::zeros();
    t[(Y, Y)] = s * (8.0 * PI / (geom.a() * geom.b()));
    Ok(t)
}

/// Part II: TE modes with `m = 0` (field along x only).
pub fn green_part_ii_tensor(
    pair: &AtomPair<'_>,
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<Block> {
    let s = single_index_sum(pair, geom.b(), pair.absorber.y, pair.emitter.y, k0, trunc)?;
    let mut t = Block::zeros();
    t[(X, X)] = s * (8.0 * PI / (geom.a() * geom.b()));
    Ok(t)
}

/// Part III: TE modes with `m, n >= 1`.
pub fn green_part_iii_tensor(
    pair: &AtomPair<'_>,
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<Block> {
    let (j, i) = (pair.absorber, pair.emitter);
    let k02 = k0 * k0;
    let mut t = Block::zeros();
    for_each_double_index(pair, geom, k0, trunc, |km, kn, axial| {
        // Transverse TE field direction (kn cos sin, -km sin cos) at each atom.
        let fj = [
            kn * (km * j.x).cos() * (kn * j.y).sin(),
            -km * (km * j.x).sin() * (kn * j.y).cos(),
        ];
        let fi = [
            kn * (km * i.x).cos() * (kn * i.y).sin(),
            -km * (km * i.x).sin() * (kn * i.y).cos(),
        ];
        let shape = k02 / (km * km + kn * kn);
        let weight = match axial {
            Axial::Propagating { kz, phase } => phase * (shape / kz),
            Axial::Evanescent { kappa, damping } => Complex64::from(shape * damping / kappa),
        };
        for (alpha, fa) in fj.iter().enumerate() {
            for (beta, fb) in fi.iter().enumerate() {
                t[(alpha, beta)] += weight * (fa * fb);
            }
        }
    })?;
    Ok(t * Complex64::from(16.0 * PI / (geom.a() * geom.b())))
}

/// Part IV: TM modes.
pub fn green_part_iv_tensor(
    pair: &AtomPair<'_>,
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<Block> {
    let (j, i) = (pair.absorber, pair.emitter);
    let sign = pair.axial_sign();
    let distinct = !pair.is_self_term();
    let mut t = Block::zeros();
    let mut ambiguous = false;
    for_each_double_index(pair, geom, k0, trunc, |km, kn, axial| {
        let kc2 = km * km + kn * kn;
        // Transverse (u) and axial (w) field shapes at each atom.
        let uj = [
            km * (km * j.x).cos() * (kn * j.y).sin(),
            kn * (km * j.x).sin() * (kn * j.y).cos(),
        ];
        let ui = [
            km * (km * i.x).cos() * (kn * i.y).sin(),
            kn * (km * i.x).sin() * (kn * i.y).cos(),
        ];
        let wj = (km * j.x).sin() * (kn * j.y).sin();
        let wi = (km * i.x).sin() * (kn * i.y).sin();

        // Coefficients of the transverse-transverse, mixed and axial-axial tensors.
        let (c1, c2, c3) = match axial {
            Axial::Propagating { kz, phase } => {
                let mixed = if distinct {
                    phase * Complex64::i() * sign
                } else {
                    Complex64::new(0.0, 0.0)
                };
                (phase * kz, mixed, phase / kz)
            }
            Axial::Evanescent { kappa, damping } => (
                Complex64::from(-damping * kappa),
                Complex64::from(-damping * sign),
                Complex64::from(damping / kappa),
            ),
        };
        if distinct && sign == 0.0 {
            let mixed = uj.iter().any(|u| *u * wi != 0.0) || ui.iter().any(|u| *u * wj != 0.0);
            ambiguous |= mixed;
        }
        for alpha in 0..2 {
            for beta in 0..2 {
                t[(alpha, beta)] += c1 * (uj[alpha] * ui[beta] / kc2);
            }
            // D2 = conj(w_i) u_j - w_j conj(u_i)
            t[(alpha, Z)] += c2 * (uj[alpha] * wi);
            t[(Z, alpha)] -= c2 * (wj * ui[alpha]);
        }
        t[(Z, Z)] += c3 * (kc2 * wj * wi);
    })?;
    if ambiguous {
        return Err(WgqedError::SignAmbiguity {
            first: pair.emitter_id.min(pair.absorber_id),
            second: pair.emitter_id.max(pair.absorber_id),
        });
    }
    Ok(t * Complex64::from(16.0 * PI / (geom.a() * geom.b())))
}

macro_rules! sublevel_part {
    ($(#[$doc:meta])* $name:ident, $tensor:ident) => {
        $(#[$doc])*
        pub fn $name(
            pair: &AtomPair<'_>,
            geom: &WaveguideGeometry,
            k0: f64,
            trunc: &TruncationPolicy,
        ) -> Result<Block> {
            Ok(sublevel_block(&$tensor(pair, geom, k0, trunc)?, k0))
        }
    };
}

sublevel_part!(
    /// Green's-matrix part I over sublevels (rows: absorber, columns: emitter).
    green_part_i, green_part_i_tensor
);
sublevel_part!(
    /// Green's-matrix part II over sublevels.
    green_part_ii, green_part_ii_tensor
);
sublevel_part!(
    /// Green's-matrix part III over sublevels.
    green_part_iii, green_part_iii_tensor
);
sublevel_part!(
    /// Green's-matrix part IV over sublevels.
    green_part_iv, green_part_iv_tensor
);

/// Full Cartesian Green's tensor `G^I + G^II + G^III + G^IV` for a pair.
pub fn green_tensor(
    pair: &AtomPair<'_>,
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<Block> {
    Ok(green_part_i_tensor(pair, geom, k0, trunc)?
        + green_part_ii_tensor(pair, geom, k0, trunc)?
        + green_part_iii_tensor(pair, geom, k0, trunc)?
        + green_part_iv_tensor(pair, geom, k0, trunc)?)
}

/// The block of the evolution generator for this pair: `-(1/2) G` over sublevels.
pub fn evolution_block(
    pair: &AtomPair<'_>,
    geom: &WaveguideGeometry,
    k0: f64,
    trunc: &TruncationPolicy,
) -> Result<Block> {
    Ok(sublevel_block(&green_tensor(pair, geom, k0, trunc)?, k0) * Complex64::from(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::dipole::dipole_matrix;
    use approx::assert_relative_eq;

    fn guide() -> WaveguideGeometry {
        WaveguideGeometry::new(4.0, 2.0).unwrap()
    }

    fn lenient() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn max_abs(b: &Block) -> f64 {
        b.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn self_part_i_is_positive_imaginary_on_sigma_diagonal() {
        let atom = AtomConfig::new(2.0, 1.0, 0.0);
        let pair = AtomPair::self_term(0, &atom);
        let block = green_part_i(&pair, &guide(), 1.0, &lenient()).unwrap();
        for idx in [0, 2] {
            assert!(block[(idx, idx)].re.abs() < 1e-15);
            assert!(block[(idx, idx)].im > 0.0);
        }
        // -(1/2) G on the sigma diagonal equals -i gamma'/4.
        let kz = (1.0 - (PI / 4.0f64).powi(2)).sqrt();
        let gamma_prime = 6.0 * PI / (8.0 * kz);
        assert_relative_eq!(
            -0.5 * block[(0, 0)].im,
            -gamma_prime / 4.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn self_part_i_vanishes_at_wall() {
        let atom = AtomConfig::new(0.0, 1.0, 0.0);
        let pair = AtomPair::self_term(0, &atom);
        let block = green_part_i(&pair, &guide(), 1.0, &lenient()).unwrap();
        assert!(max_abs(&block) < 1e-30);
    }

    #[test]
    fn distinct_part_i_at_one_period_matches_exchange_rate() {
        let kz = (1.0 - (PI / 4.0f64).powi(2)).sqrt();
        let period = PI / kz;
        // Far enough that the evanescent tail is negligible.
        let dz = 20.0 * period;
        let a1 = AtomConfig::new(2.0, 1.0, 0.0);
        let a2 = AtomConfig::new(2.0, 1.0, dz);
        let pair = AtomPair::new(1, &a2, 0, &a1, &lenient()).unwrap();
        let block = green_part_i(&pair, &guide(), 1.0, &lenient()).unwrap() * Complex64::from(-0.5);
        // r2 = -3 i pi / (2 a b kz) * exp(i dz kz); phase is exp(2 pi i * 20) = 1.
        let r2 = -3.0 * PI / (2.0 * 8.0 * kz);
        assert_relative_eq!(block[(0, 0)].im, r2, max_relative = 1e-9);
        assert!(block[(0, 0)].re.abs() < 1e-9 * r2.abs());
    }

    #[test]
    fn part_ii_self_term_is_empty_in_single_mode_guide() {
        let atom = AtomConfig::new(1.3, 0.7, 0.0);
        let pair = AtomPair::self_term(0, &atom);
        assert_eq!(
            max_abs(&green_part_ii(&pair, &guide(), 1.0, &lenient()).unwrap()),
            0.0
        );
        assert_eq!(
            max_abs(&green_part_iii(&pair, &guide(), 1.0, &lenient()).unwrap()),
            0.0
        );
        assert_eq!(
            max_abs(&green_part_iv(&pair, &guide(), 1.0, &lenient()).unwrap()),
            0.0
        );
    }

    #[test]
    fn part_ii_decays_like_leading_evanescent_mode() {
        let kappa = ((PI / 2.0f64).powi(2) - 1.0).sqrt();
        let a1 = AtomConfig::new(2.0, 0.7, 0.0);
        let mut prev = f64::INFINITY;
        for dz in [2.0, 4.0, 8.0, 12.0] {
            let a2 = AtomConfig::new(2.0, 0.7, dz);
            let pair = AtomPair::new(1, &a2, 0, &a1, &lenient()).unwrap();
            let m = max_abs(&green_part_ii(&pair, &guide(), 1.0, &lenient()).unwrap());
            // Constant from the leading term: 8 pi / (ab) * d^2 / 2 * 1 / kappa, sin^2 <= 1.
            let bound = 8.0 * PI / 8.0 * 0.375 / kappa * (-kappa * dz).exp() * 1.0001;
            assert!(m <= bound, "dz = {dz}: {m} > {bound}");
            assert!(m < prev);
            prev = m;
        }
    }

    #[test]
    fn part_ii_swap_gives_adjoint_when_purely_evanescent() {
        let a1 = AtomConfig::new(1.1, 0.4, 0.3);
        let a2 = AtomConfig::new(2.9, 1.5, 1.7);
        let t = lenient();
        let p = AtomPair::new(1, &a2, 0, &a1, &t).unwrap();
        let q = AtomPair::new(0, &a1, 1, &a2, &t).unwrap();
        let g12 = green_part_ii(&p, &guide(), 1.0, &t).unwrap();
        let g21 = green_part_ii(&q, &guide(), 1.0, &t).unwrap();
        assert!(max_abs(&(g21 - g12.adjoint())) < 1e-14 * max_abs(&g12));
    }

    #[test]
    fn part_iii_centre_has_no_xy_coupling() {
        // At (a/2, b/2) the x profile needs m even and n odd, the y profile the reverse.
        let a1 = AtomConfig::new(2.0, 1.0, 0.0);
        let a2 = AtomConfig::new(2.0, 1.0, 3.0);
        let t = lenient();
        let pair = AtomPair::new(1, &a2, 0, &a1, &t).unwrap();
        let tensor = green_part_iii_tensor(&pair, &guide(), 1.0, &t).unwrap();
        assert!(tensor[(X, Y)].norm() < 1e-12 * tensor[(Y, Y)].norm());
        assert!(tensor[(Y, X)].norm() < 1e-12 * tensor[(Y, Y)].norm());
    }

    #[test]
    fn part_iv_axial_coefficient_at_centre() {
        // At dz = 15 only the m = n = 1 term survives the truncation budget.
        let g = guide();
        let a1 = AtomConfig::new(2.0, 1.0, 0.0);
        let a2 = AtomConfig::new(2.0, 1.0, 15.0);
        let t = lenient();
        let pair = AtomPair::new(1, &a2, 0, &a1, &t).unwrap();
        let tensor = green_part_iv_tensor(&pair, &g, 1.0, &t).unwrap();
        let (km, kn) = (PI / 4.0, PI / 2.0);
        let kc2 = km * km + kn * kn;
        let kappa = (kc2 - 1.0).sqrt();
        // D3 / d^2 = kc^2 * 1, evanescent weight +exp(-kappa dz) / kappa after the overall minus.
        let expected = 16.0 * PI / 8.0 * kc2 * (-kappa * 15.0).exp() / kappa;
        assert_relative_eq!(tensor[(Z, Z)].re, expected, max_relative = 1e-9);
    }

    #[test]
    fn part_iv_mixed_terms_flip_with_exchange() {
        let g = WaveguideGeometry::new(8.0, 8.0).unwrap();
        let a1 = AtomConfig::new(2.3, 5.1, 0.0);
        let a2 = AtomConfig::new(3.7, 1.9, 2.5);
        let t = lenient();
        let p = AtomPair::new(1, &a2, 0, &a1, &t).unwrap();
        let q = AtomPair::new(0, &a1, 1, &a2, &t).unwrap();
        let tp = green_part_iv_tensor(&p, &g, 1.0, &t).unwrap();
        let tq = green_part_iv_tensor(&q, &g, 1.0, &t).unwrap();
        // Reciprocity of the Cartesian tensor: T_pq = T_qp^T.
        assert!(max_abs(&(tp - tq.transpose())) < 1e-12 * max_abs(&tp));
        assert!(tp[(X, Z)].norm() > 1e-6);
    }

    #[test]
    fn equal_z_with_tm_cross_terms_is_ambiguous() {
        let t = TruncationPolicy {
            min_axial_separation: 0.0,
            max_terms: 10,
            ..TruncationPolicy::default()
        };
        let a1 = AtomConfig::new(1.0, 0.5, 0.0);
        let a2 = AtomConfig::new(3.0, 1.5, 0.0);
        let pair = AtomPair::new(1, &a2, 0, &a1, &t).unwrap();
        let err = green_part_iv(&pair, &guide(), 1.0, &t).unwrap_err();
        // Either the sum is unbounded at dz = 0 or the sign is ambiguous; both refuse.
        assert!(matches!(
            err,
            WgqedError::SignAmbiguity { .. } | WgqedError::TruncationExhausted { .. }
        ));
    }

    #[test]
    fn pair_validation() {
        let t = lenient();
        let a1 = AtomConfig::new(2.0, 1.0, 0.0);
        let same = AtomConfig::new(2.0, 1.0, 0.0);
        let close = AtomConfig::new(1.0, 1.0, 1e-4);
        assert!(matches!(
            AtomPair::new(1, &same, 0, &a1, &t),
            Err(WgqedError::CoincidentAtoms { .. })
        ));
        assert!(matches!(
            AtomPair::new(1, &close, 0, &a1, &t),
            Err(WgqedError::AxialSeparation { .. })
        ));
    }

    #[test]
    fn truncation_cap_is_reported() {
        let t = TruncationPolicy {
            max_terms: 5,
            ..TruncationPolicy::default()
        };
        let a1 = AtomConfig::new(2.0, 1.0, 0.0);
        let a2 = AtomConfig::new(1.0, 0.5, 0.01);
        let pair = AtomPair::new(1, &a2, 0, &a1, &t).unwrap();
        assert!(matches!(
            green_tensor(&pair, &guide(), 1.0, &t),
            Err(WgqedError::TruncationExhausted { .. })
        ));
    }

    #[test]
    fn evolution_block_uses_dipole_sandwich() {
        let atom = AtomConfig::new(1.7, 0.6, 0.0);
        let pair = AtomPair::self_term(0, &atom);
        let g = guide();
        let t = lenient();
        let direct = evolution_block(&pair, &g, 1.0, &t).unwrap();
        let d = dipole_matrix(1.0);
        let tensor = green_tensor(&pair, &g, 1.0, &t).unwrap();
        let manual = d * tensor * d.adjoint() * Complex64::from(-0.5);
        assert!(max_abs(&(direct - manual)) < 1e-15);
    }
}
