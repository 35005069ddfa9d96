//! Shared scene generators, independent oracles and property checks for the
//! integration and acceptance targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use wgqed_core::dynamics::{dark_subspace, propagate_with, InitialState, Propagator};
use wgqed_core::linalg::eigenvalues;
use wgqed_core::modes::check_frequency;
use wgqed_core::{
    build_effective_matrix, AtomConfig, EffectiveMatrix, TruncationPolicy, WaveguideGeometry,
};

#[derive(Debug, Clone)]
pub struct Scene {
    pub geom: WaveguideGeometry,
    pub atoms: Vec<AtomConfig>,
    pub k0: f64,
}

impl Scene {
    pub fn build(&self, trunc: &TruncationPolicy) -> EffectiveMatrix {
        build_effective_matrix(&self.atoms, &self.geom, self.k0, trunc).expect("scene builds")
    }
}

/// Random guides (single- and multimode) with 1..=`max_atoms` atoms at
/// distinct axial positions at least `min_gap` apart.
pub fn scene(max_atoms: usize, min_gap: f64) -> impl Strategy<Value = Scene> {
    (
        3.3f64..9.0,
        0.35f64..1.0,
        prop::collection::vec(
            (0.03f64..0.97, 0.03f64..0.97, min_gap..min_gap + 30.0),
            1..=max_atoms,
        ),
        -50.0f64..50.0,
    )
        .prop_map(|(a, ratio, raw, z0)| {
            let geom = WaveguideGeometry::new(a, a * ratio).unwrap();
            let mut z = z0;
            let atoms = raw
                .into_iter()
                .map(|(u, v, gap)| {
                    let atom = AtomConfig::new(u * geom.a(), v * geom.b(), z);
                    z += gap;
                    atom
                })
                .collect();
            Scene {
                geom,
                atoms,
                k0: 1.0,
            }
        })
        .prop_filter("k0 sits on a cutoff", |s| {
            check_frequency(&s.geom, s.k0).is_ok()
        })
}

/// Guides with only TE10 propagating.
pub fn single_mode_scene(max_atoms: usize, min_gap: f64) -> impl Strategy<Value = Scene> {
    (
        3.3f64..6.0,
        0.2f64..0.5,
        prop::collection::vec(
            (0.03f64..0.97, 0.03f64..0.97, min_gap..min_gap + 30.0),
            1..=max_atoms,
        ),
    )
        .prop_map(|(a, ratio, raw)| {
            let b = (a * ratio).min(3.0);
            let geom = WaveguideGeometry::new(a, b).unwrap();
            let mut z = 0.0;
            let atoms = raw
                .into_iter()
                .map(|(u, v, gap)| {
                    let atom = AtomConfig::new(u * a, v * b, z);
                    z += gap;
                    atom
                })
                .collect();
            Scene {
                geom,
                atoms,
                k0: 1.0,
            }
        })
}

/// Normalized random one-excitation state.
pub fn state(n_atoms: usize, raw: &[(f64, f64)]) -> InitialState {
    let amps: Vec<Complex64> = (0..3 * n_atoms)
        .map(|k| {
            let (re, im) = raw[k % raw.len()];
            Complex64::new(re + 0.1 * k as f64, im)
        })
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    InitialState::new(amps.iter().map(|z| z / norm).collect()).unwrap()
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Transition dipoles `<e, m|d|g>` for `m = -1, 0, +1`, written out directly.
fn oracle_dipoles(k0: f64) -> [[Complex64; 3]; 3] {
    let d = (0.75 / (k0 * k0 * k0)).sqrt();
    let h = d / 2f64.sqrt();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        [c(h, 0.0), c(0.0, -h), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(d, 0.0)],
        [c(-h, 0.0), c(0.0, -h), c(0.0, 0.0)],
    ]
}

/// Cartesian Green's tensor between absorber `j` and emitter `i` from a
/// single loop over every mode in a box large enough that the neglected
/// evanescent terms are below `exp(-46)`. Evanescent modes use the complex
/// continuation `kz = i kappa`; TM mixed terms are averaged over both
/// propagation directions for a self term.
pub fn brute_tensor(
    geom: &WaveguideGeometry,
    k0: f64,
    j: &AtomConfig,
    i: &AtomConfig,
    self_term: bool,
) -> [[Complex64; 3]; 3] {
    let (a, b) = (geom.a(), geom.b());
    let d = (j.z - i.z).abs();
    let kmax = if self_term {
        k0
    } else {
        (k0 * k0 + (46.0 / d).powi(2)).sqrt()
    };
    let (m_top, n_top) = (
        (kmax * a / PI).ceil() as u32 + 1,
        (kmax * b / PI).ceil() as u32 + 1,
    );
    let zero = Complex64::new(0.0, 0.0);
    let mut t = [[zero; 3]; 3];
    let iu = Complex64::i();
    let directions: &[f64] = if self_term {
        &[1.0, -1.0]
    } else if j.z > i.z {
        &[1.0]
    } else {
        &[-1.0]
    };
    for m in 0..=m_top {
        for n in 0..=n_top {
            if m == 0 && n == 0 {
                continue;
            }
            let (km, kn) = (m as f64 * PI / a, n as f64 * PI / b);
            let kc2 = km * km + kn * kn;
            if self_term && kc2 >= k0 * k0 {
                continue;
            }
            let kz = Complex64::new(k0 * k0 - kc2, 0.0).sqrt();
            let g = iu * (iu * kz * d).exp() / kz;
            let eps = if m > 0 { 2.0 } else { 1.0 } * if n > 0 { 2.0 } else { 1.0 };
            let pref = eps * 4.0 * PI / (a * b);
            let te = |p: &AtomConfig| {
                [
                    kn * (km * p.x).cos() * (kn * p.y).sin(),
                    -km * (km * p.x).sin() * (kn * p.y).cos(),
                    0.0,
                ]
            };
            let (fj, fi) = (te(j), te(i));
            for al in 0..3 {
                for be in 0..3 {
                    t[al][be] += g * (pref * k0 * k0 / kc2 * fj[al] * fi[be]);
                }
            }
            if m == 0 || n == 0 {
                continue;
            }
            let u = |p: &AtomConfig| {
                [
                    km * (km * p.x).cos() * (kn * p.y).sin(),
                    kn * (km * p.x).sin() * (kn * p.y).cos(),
                ]
            };
            let w = |p: &AtomConfig| (km * p.x).sin() * (kn * p.y).sin();
            let weight = g * kc2 / directions.len() as f64;
            for &sigma in directions {
                let s = Complex64::new(sigma, 0.0);
                let fwd = |p: &AtomConfig| {
                    let uu = u(p);
                    [
                        iu * s * kz / kc2 * uu[0],
                        iu * s * kz / kc2 * uu[1],
                        Complex64::new(w(p), 0.0),
                    ]
                };
                let back = |p: &AtomConfig| {
                    let uu = u(p);
                    [
                        -iu * s * kz / kc2 * uu[0],
                        -iu * s * kz / kc2 * uu[1],
                        Complex64::new(w(p), 0.0),
                    ]
                };
                let (ej, ei) = (fwd(j), back(i));
                for al in 0..3 {
                    for be in 0..3 {
                        t[al][be] += weight * pref * ej[al] * ei[be];
                    }
                }
            }
        }
    }
    t
}

/// `-(1/2) D T D^H` for every atom pair, from [`brute_tensor`].
pub fn brute_generator(scene: &Scene) -> DMatrix<Complex64> {
    let n = scene.atoms.len();
    let dip = oracle_dipoles(scene.k0);
    let mut out = DMatrix::zeros(3 * n, 3 * n);
    for r in 0..n {
        for c in 0..n {
            let t = brute_tensor(
                &scene.geom,
                scene.k0,
                &scene.atoms[r],
                &scene.atoms[c],
                r == c,
            );
            for mu in 0..3 {
                for nu in 0..3 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for al in 0..3 {
                        for be in 0..3 {
                            acc += dip[mu][al] * t[al][be] * dip[nu][be].conj();
                        }
                    }
                    out[(3 * r + mu, 3 * c + nu)] = acc * -0.5;
                }
            }
        }
    }
    out
}

pub fn check_brute_force(scene: &Scene) -> Result<String, String> {
    let trunc = TruncationPolicy::default();
    let m = scene.build(&trunc);
    let oracle = brute_generator(scene);
    let scale = max_abs(&oracle).max(1.0);
    let diff = max_abs(&(m.matrix() - &oracle)) / scale;
    if diff < 10.0 * trunc.tol {
        Ok(format!("{diff:.2e}"))
    } else {
        Err(format!(
            "generator differs from brute-force sum by {diff:.3e} (relative)"
        ))
    }
}

/// `Lambda_{(j,mu),(i,nu)} = (-1)^(mu+nu) Lambda_{(i,-nu),(j,-mu)}`.
pub fn check_reciprocity(scene: &Scene) -> Result<f64, String> {
    let m = scene.build(&TruncationPolicy::default());
    let a = m.matrix();
    let n = a.nrows();
    let flip = |k: usize| 3 * (k / 3) + (2 - k % 3);
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let parity = ((r % 3) as i32 - 1 + (c % 3) as i32 - 1).rem_euclid(2);
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            worst = worst.max((a[(r, c)] - a[(flip(c), flip(r))] * sign).norm());
        }
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    if worst <= 1e-12 * scale {
        Ok(worst / scale)
    } else {
        Err(format!(
            "reciprocity violated by {:.3e} (relative)",
            worst / scale
        ))
    }
}

pub fn check_im_nonpositive(scene: &Scene) -> Result<f64, String> {
    let m = scene.build(&TruncationPolicy::default());
    let top = eigenvalues(m.matrix())
        .map_err(|e| e.to_string())?
        .iter()
        .map(|l| l.im)
        .fold(f64::NEG_INFINITY, f64::max);
    if top <= 1e-9 {
        Ok(top)
    } else {
        Err(format!("eigenvalue with Im = {top:.3e} > 1e-9"))
    }
}

pub fn check_monotone(scene: &Scene, s0: &InitialState) -> Result<f64, String> {
    let m = scene.build(&TruncationPolicy::default());
    let times: Vec<f64> = (0..400).map(|k| 0.05 * k as f64).collect();
    let traj = propagate_with(&m, s0, &times, Propagator::Auto).map_err(|e| e.to_string())?;
    let total = traj.total_population();
    let rise = total
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    if rise <= 1e-8 {
        Ok(rise)
    } else {
        Err(format!("total population rose by {rise:.3e}"))
    }
}

pub fn check_dark_stationary(scene: &Scene) -> Result<usize, String> {
    let m = scene.build(&TruncationPolicy::default());
    let dark = dark_subspace(&m).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (0..=50).map(|k| k as f64).collect();
    for k in 0..dark.dim() {
        let v = dark.vector(k);
        let residual = (m.matrix() * &v).norm();
        if residual >= 1e-9 {
            return Err(format!("|Lambda v| = {residual:.3e} for dark vector {k}"));
        }
        let s0 = InitialState::new(v.iter().copied().collect()).map_err(|e| e.to_string())?;
        for method in [Propagator::Eigen, Propagator::Expm] {
            let traj = propagate_with(&m, &s0, &times, method).map_err(|e| e.to_string())?;
            let spread = traj
                .total_population()
                .iter()
                .map(|p| (p - 1.0).abs())
                .fold(0.0, f64::max);
            if spread >= 1e-9 {
                return Err(format!(
                    "dark vector {k} lost {spread:.3e} under {method:?}"
                ));
            }
        }
    }
    Ok(dark.dim())
}

/// Halving `tol` and doubling `max_terms` moves every entry by < 10 tol,
/// relative to the largest entry.
pub fn check_truncation(scene: &Scene, tol: f64) -> Result<f64, String> {
    let coarse = TruncationPolicy::default().with_tol(tol);
    let mut fine = coarse.with_tol(tol / 2.0);
    fine.max_terms *= 2;
    let a = scene.build(&coarse);
    let b = scene.build(&fine);
    let rel = max_abs(&(a.matrix() - b.matrix())) / max_abs(b.matrix()).max(f64::MIN_POSITIVE);
    if rel < 10.0 * tol {
        Ok(rel / tol)
    } else {
        Err(format!("tol {tol:e}: entries moved by {rel:.3e}"))
    }
}

pub fn check_propagators(scene: &Scene, s0: &InitialState) -> Result<f64, String> {
    let m = scene.build(&TruncationPolicy::default());
    let times: Vec<f64> = (0..200).map(|k| 0.1 * k as f64).collect();
    let e = propagate_with(&m, s0, &times, Propagator::Eigen).map_err(|e| e.to_string())?;
    let x = propagate_with(&m, s0, &times, Propagator::Expm).map_err(|e| e.to_string())?;
    let worst = e
        .amplitudes()
        .iter()
        .zip(x.amplitudes())
        .map(|(p, q): (&DVector<Complex64>, _)| (p - q).camax())
        .fold(0.0, f64::max);
    if worst < 1e-8 {
        Ok(worst)
    } else {
        Err(format!("eigen and expm propagation differ by {worst:.3e}"))
    }
}

pub fn check_translation(scene: &Scene, shift: f64) -> Result<f64, String> {
    let trunc = TruncationPolicy::default();
    let a = scene.build(&trunc);
    let moved = Scene {
        atoms: scene
            .atoms
            .iter()
            .map(|p| AtomConfig::new(p.x, p.y, p.z + shift))
            .collect(),
        ..scene.clone()
    };
    let b = moved.build(&trunc);
    let diff = max_abs(&(a.matrix() - b.matrix()));
    if diff < 1e-12 {
        Ok(diff)
    } else {
        Err(format!("shift {shift} changed entries by {diff:.3e}"))
    }
}
