//! One-excitation amplitude dynamics `b(t) = exp(-i Lambda t) b(0)`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, WgqedError};
use crate::green::{EffectiveMatrix, ExcitedStateIndex};
use crate::linalg::{eigendecomposition, eigenvalues, expm, null_spaces};

/// Relative singular value below which a direction counts as dark.
pub const DEFAULT_DARK_THRESHOLD: f64 = 1e-12;

/// Eigenvector conditioning above which the eigen route hands over to expm.
pub const MAX_EIGEN_CONDITION: f64 = 1e8;

const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    amplitudes: DVector<Complex64>,
}

impl InitialState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_multiple_of(3) || amplitudes.is_empty() {
            return Err(WgqedError::InitialState(format!(
                "expected 3N amplitudes, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(WgqedError::NonFinite("initial amplitudes"));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr > 1.0 + NORM_SLACK {
            return Err(WgqedError::InitialState(format!(
                "excited-state norm^2 {norm_sqr} exceeds 1"
            )));
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    /// Full population in a single sublevel.
    pub fn sublevel(n_atoms: usize, atom: usize, m_j: i32) -> Result<Self> {
        Self::from_components(n_atoms, &[(atom, m_j, Complex64::new(1.0, 0.0))])
    }

    pub fn from_components(n_atoms: usize, parts: &[(usize, i32, Complex64)]) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 3 * n_atoms];
        for &(atom, m_j, amp) in parts {
            if atom >= n_atoms {
                return Err(WgqedError::InitialState(format!(
                    "atom {atom} does not exist (N = {n_atoms})"
                )));
            }
            amps[ExcitedStateIndex::new(atom, m_j)?.flat()] += amp;
        }
        Self::new(amps)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagator {
    /// Spectral decomposition `V exp(-i D t) V^{-1}`.
    Eigen,
    /// Padé matrix exponential, reused across equal steps.
    Expm,
    /// Eigen route, falling back to `Expm` when the eigenbasis is ill conditioned.
    Auto,
}

#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    times: Vec<f64>,
    amplitudes: Vec<DVector<Complex64>>,
}

impl AmplitudeTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn amplitudes(&self) -> &[DVector<Complex64>] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.first().map_or(0, |a| a.len())
    }

    pub fn n_atoms(&self) -> usize {
        self.dim() / 3
    }

    pub fn amplitude(&self, step: usize, state: ExcitedStateIndex) -> Complex64 {
        self.amplitudes[step][state.flat()]
    }

    /// `P_e(t) = |b_e(t)|^2` for one state across the grid.
    pub fn population(&self, state: ExcitedStateIndex) -> Vec<f64> {
        let k = state.flat();
        self.amplitudes.iter().map(|b| b[k].norm_sqr()).collect()
    }

    /// Total excited population of one atom; zeros when the atom is absent.
    pub fn atom_population(&self, atom: usize) -> Vec<f64> {
        if atom >= self.n_atoms() {
            return vec![0.0; self.len()];
        }
        self.amplitudes
            .iter()
            .map(|b| (0..3).map(|s| b[3 * atom + s].norm_sqr()).sum())
            .collect()
    }

    pub fn total_population(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|b| b.norm_squared()).collect()
    }
}

/// `points` evenly spaced times covering `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !t_max.is_finite() || points < 2 {
        return Err(WgqedError::TimeGrid(format!(
            "need t_max > 0 and at least 2 points, got t_max = {t_max}, points = {points}"
        )));
    }
    let step = t_max / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k + 1 == points {
                t_max
            } else {
                k as f64 * step
            }
        })
        .collect())
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(WgqedError::TimeGrid("empty grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(WgqedError::NonFinite("time grid"));
    }
    if times[0] < 0.0 {
        return Err(WgqedError::TimeGrid(format!(
            "first time {} is negative",
            times[0]
        )));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(WgqedError::TimeGrid(
            "times must be sorted ascending".into(),
        ));
    }
    Ok(())
}

pub fn propagate(
    m: &EffectiveMatrix,
    s0: &InitialState,
    times: &[f64],
) -> Result<AmplitudeTrajectory> {
    propagate_with(m, s0, times, Propagator::Auto)
}

pub fn propagate_with(
    m: &EffectiveMatrix,
    s0: &InitialState,
    times: &[f64],
    method: Propagator,
) -> Result<AmplitudeTrajectory> {
    propagate_matrix(m.matrix(), s0, times, method)
}

/// Propagates under an arbitrary generator.
pub fn propagate_matrix(
    lambda: &DMatrix<Complex64>,
    s0: &InitialState,
    times: &[f64],
    method: Propagator,
) -> Result<AmplitudeTrajectory> {
    if lambda.nrows() != s0.dim() || lambda.ncols() != s0.dim() {
        return Err(WgqedError::DimensionMismatch {
            expected: lambda.nrows(),
            got: s0.dim(),
        });
    }
    check_grid(times)?;
    let b0 = s0.amplitudes();
    let n = b0.len();
    let mut amplitudes = vec![DVector::zeros(n); times.len()];
    // Exactly uncoupled blocks are propagated separately so that states
    // with no path to the initial excitation stay exactly zero.
    for block in coupled_blocks(lambda) {
        if block.iter().all(|&k| b0[k] == Complex64::new(0.0, 0.0)) {
            continue;
        }
        let sub = lambda.select_rows(&block).select_columns(&block);
        let sub0 = b0.select_rows(&block);
        let part = match method {
            Propagator::Eigen => eigen_route(&sub, &sub0, times, false)?,
            Propagator::Expm => expm_route(&sub, &sub0, times)?,
            Propagator::Auto => match eigen_route(&sub, &sub0, times, true) {
                Ok(a) => a,
                Err(WgqedError::Numerical(reason)) => {
                    warn!("eigen propagator unusable ({reason}); using matrix exponential");
                    expm_route(&sub, &sub0, times)?
                }
                Err(e) => return Err(e),
            },
        };
        for (full, local) in amplitudes.iter_mut().zip(part) {
            for (j, &k) in block.iter().enumerate() {
                full[k] = local[j];
            }
        }
    }
    Ok(AmplitudeTrajectory {
        times: times.to_vec(),
        amplitudes,
    })
}

/// Index sets of the connected components of the nonzero pattern of `a`.
fn coupled_blocks(a: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut blocks = Vec::new();
    for seed in 0..n {
        if label[seed].is_some() {
            continue;
        }
        let id = blocks.len();
        label[seed] = Some(id);
        let mut stack = vec![seed];
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                let zero = Complex64::new(0.0, 0.0);
                if label[j].is_none() && (a[(i, j)] != zero || a[(j, i)] != zero) {
                    label[j] = Some(id);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        blocks.push(members);
    }
    blocks
}

fn eigen_route(
    lambda: &DMatrix<Complex64>,
    b0: &DVector<Complex64>,
    times: &[f64],
    strict: bool,
) -> Result<Vec<DVector<Complex64>>> {
    let eig = eigendecomposition(lambda)?;
    if eig.condition > MAX_EIGEN_CONDITION {
        if strict {
            return Err(WgqedError::Numerical(format!(
                "eigenvector condition number {:.3e} exceeds {MAX_EIGEN_CONDITION:e}",
                eig.condition
            )));
        }
        warn!(
            "eigenvector condition number {:.3e} exceeds {MAX_EIGEN_CONDITION:e}; results may be inaccurate",
            eig.condition
        );
    }
    let coeffs = &eig.inverse * b0;
    let minus_i = Complex64::new(0.0, -1.0);
    Ok(times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return b0.clone();
            }
            let weighted = DVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(eig.values.iter())
                    .map(|(c, l)| c * (minus_i * l * t).exp()),
            );
            &eig.vectors * weighted
        })
        .collect())
}

fn expm_route(
    lambda: &DMatrix<Complex64>,
    b0: &DVector<Complex64>,
    times: &[f64],
) -> Result<Vec<DVector<Complex64>>> {
    let minus_i = Complex64::new(0.0, -1.0);
    let generator = lambda * minus_i;
    let step_op = |dt: f64| expm(&(&generator * Complex64::new(dt, 0.0)));

    let mut out = Vec::with_capacity(times.len());
    let mut state = b0.clone();
    let mut now = 0.0;
    let mut cached: Option<(f64, DMatrix<Complex64>)> = None;
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt);
            if !reuse {
                cached = Some((dt, step_op(dt)?));
            }
            let (_, u) = cached.as_ref().expect("step operator");
            state = u * state;
        }
        now = t;
        out.push(state.clone());
    }
    Ok(out)
}

/// Orthonormal basis of the kernel of `Lambda` (non-decaying states).
#[derive(Debug, Clone)]
pub struct DarkSubspace {
    /// Right null vectors as columns.
    pub basis: DMatrix<Complex64>,
    /// Left null vectors (`w^H Lambda = 0`) as columns.
    pub left_basis: DMatrix<Complex64>,
    pub threshold: f64,
}

impl DarkSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn vector(&self, k: usize) -> DVector<Complex64> {
        self.basis.column(k).into_owned()
    }

    /// Spectral projector onto the kernel along the range of `Lambda`.
    ///
    /// This is the `t -> infinity` limit of `exp(-i Lambda t)` when every
    /// other eigenvalue decays; it reduces to the orthogonal projector
    /// whenever kernel and range are orthogonal.
    pub fn projector(&self) -> Result<DMatrix<Complex64>> {
        let n = self.basis.nrows();
        if self.dim() == 0 {
            return Ok(DMatrix::zeros(n, n));
        }
        let overlap = self.left_basis.adjoint() * &self.basis;
        let inv = overlap.try_inverse().ok_or_else(|| {
            WgqedError::Numerical("zero eigenvalue is not semisimple; no stationary limit".into())
        })?;
        Ok(&self.basis * inv * self.left_basis.adjoint())
    }
}

pub fn dark_subspace(m: &EffectiveMatrix) -> Result<DarkSubspace> {
    dark_subspace_with_threshold(m, DEFAULT_DARK_THRESHOLD)
}

pub fn dark_subspace_with_threshold(m: &EffectiveMatrix, threshold: f64) -> Result<DarkSubspace> {
    let ns = null_spaces(m.matrix(), threshold)?;
    Ok(DarkSubspace {
        basis: ns.right,
        left_basis: ns.left,
        threshold,
    })
}

/// Limiting amplitudes `P_dark b(0)`.
pub fn asymptotic_amplitudes(m: &EffectiveMatrix, s0: &InitialState) -> Result<DVector<Complex64>> {
    if m.dim() != s0.dim() {
        return Err(WgqedError::DimensionMismatch {
            expected: m.dim(),
            got: s0.dim(),
        });
    }
    let lams = eigenvalues(m.matrix())?;
    let scale = lams.iter().map(|l| l.norm()).fold(0.0, f64::max);
    if lams.iter().any(|l| {
        l.norm() > DEFAULT_DARK_THRESHOLD * scale && -l.im <= DEFAULT_DARK_THRESHOLD * scale
    }) {
        warn!(
            "non-decaying eigenvalue outside the kernel; populations oscillate and have no limit"
        );
    }
    Ok(dark_subspace(m)?.projector()? * s0.amplitudes())
}

/// Limiting populations of every excited state, canonical order.
pub fn asymptotic_population(m: &EffectiveMatrix, s0: &InitialState) -> Result<Vec<f64>> {
    Ok(asymptotic_amplitudes(m, s0)?
        .iter()
        .map(|z| z.norm_sqr())
        .collect())
}

/// Time and value of the largest total excited population of `atom`, with
/// the grid maximum refined by a parabola through its neighbours.
pub fn max_population(traj: &AmplitudeTrajectory, atom: usize) -> (f64, f64) {
    let t = traj.times();
    if t.is_empty() {
        return (0.0, 0.0);
    }
    if atom >= traj.n_atoms() {
        return (t[0], 0.0);
    }
    let p = traj.atom_population(atom);
    let (k, best) =
        p.iter().copied().enumerate().fold(
            (0, p[0]),
            |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
        );
    if k == 0 || k + 1 == p.len() {
        return (t[k], best.clamp(0.0, 1.0));
    }
    let (t0, t1, t2) = (t[k - 1], t[k], t[k + 1]);
    let (p0, p1, p2) = (p[k - 1], p[k], p[k + 1]);
    // Divided differences of the interpolating parabola.
    let d01 = (p1 - p0) / (t1 - t0);
    let d12 = (p2 - p1) / (t2 - t1);
    let curv = (d12 - d01) / (t2 - t0);
    if !(curv < 0.0) || !curv.is_finite() {
        return (t1, best.clamp(0.0, 1.0));
    }
    let slope_at_t1 = d01 + curv * (t1 - t0);
    let shift = -slope_at_t1 / (2.0 * curv);
    let t_star = (t1 + shift).clamp(t0, t2);
    let value = p1 + slope_at_t1 * (t_star - t1) + curv * (t_star - t1).powi(2);
    (t_star, value.max(best).clamp(0.0, 1.0))
}
