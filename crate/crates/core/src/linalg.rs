//! Dense complex linear algebra used by the propagators.
//!
//! Eigenvectors come from a complex Schur form followed by triangular
//! back-substitution; the matrix exponential is Padé(13) with scaling and
//! squaring. The two routes share nothing beyond matrix products, which is
//! what makes them useful as cross-checks of each other.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{Result, WgqedError};

type CMat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `A = V diag(values) V^{-1}`.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub values: DVector<Complex64>,
    /// Unit-norm right eigenvectors as columns.
    pub vectors: CMat,
    pub inverse: CMat,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

pub fn eigendecomposition(a: &CMat) -> Result<Eigendecomposition> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(WgqedError::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if !all_finite(a) {
        return Err(WgqedError::NonFinite("matrix passed to eigensolver"));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000 * n.max(1))
        .ok_or_else(|| WgqedError::Numerical("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let norm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smin = (f64::EPSILON * norm).max(f64::MIN_POSITIVE);

    // Eigenvectors of the triangular factor, column k has x_k = 1 and x_j = 0 for j > k.
    let mut x = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = c(1.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                s += t[(j, l)] * x[(l, k)];
            }
            let mut pivot = t[(j, j)] - lambda;
            if pivot.norm() < smin {
                pivot = c(smin);
            }
            x[(j, k)] = -s / pivot;
        }
    }
    let mut vectors = q * x;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= c(nrm);
        }
    }
    let values = DVector::from_iterator(n, (0..n).map(|k| t[(k, k)]));
    let sv = vectors.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smallest > 0.0 {
        smax / smallest
    } else {
        f64::INFINITY
    };
    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| WgqedError::Numerical("eigenvector matrix is singular".into()))?;
    Ok(Eigendecomposition {
        values,
        vectors,
        inverse,
        condition,
    })
}

/// Eigenvalues only, via the Schur form.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    if !all_finite(a) {
        return Err(WgqedError::NonFinite("matrix passed to eigensolver"));
    }
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000 * n.max(1))
        .ok_or_else(|| WgqedError::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|k| t[(k, k)]).collect())
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which Padé(13) is accurate to unit roundoff.
const THETA13: f64 = 5.371_920_351_148_152;

fn one_norm(m: &CMat) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Padé(13) approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(WgqedError::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if !all_finite(a) {
        return Err(WgqedError::NonFinite("matrix passed to expm"));
    }
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * c(2f64.powi(-squarings));
    let b = &PADE13;
    let ident = CMat::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]))
        + &a6 * c(b[7])
        + &a4 * c(b[5])
        + &a2 * c(b[3])
        + &ident * c(b[1]);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]))
        + &a6 * c(b[6])
        + &a4 * c(b[4])
        + &a2 * c(b[2])
        + &ident * c(b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let lu = q.lu();
    let mut r = lu
        .solve(&p)
        .ok_or_else(|| WgqedError::Numerical("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !all_finite(&r) {
        return Err(WgqedError::NonFinite("matrix exponential"));
    }
    Ok(r)
}

/// Right and left null spaces from a singular value decomposition.
#[derive(Debug, Clone)]
pub struct NullSpaces {
    /// Orthonormal columns `v` with `A v ~ 0`.
    pub right: CMat,
    /// Orthonormal columns `w` with `w^H A ~ 0`.
    pub left: CMat,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
}

fn right_null(a: &CMat, rel_threshold: f64) -> Result<(CMat, Vec<f64>)> {
    let n = a.nrows();
    let svd = SVD::try_new(a.clone(), false, true, f64::EPSILON, 10_000 * n.max(1))
        .ok_or_else(|| WgqedError::Numerical("SVD did not converge".into()))?;
    let v = svd.v_t.expect("requested V^H").adjoint();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
    let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let null: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| smax == 0.0 || svd.singular_values[k] <= rel_threshold * smax)
        .collect();
    if null.is_empty() {
        return Ok((CMat::zeros(n, 0), sigma));
    }
    let cols: Vec<_> = null.iter().map(|&k| v.column(k)).collect();
    Ok((CMat::from_columns(&cols), sigma))
}

/// Null spaces using a singular-value cut at `rel_threshold * sigma_max`.
pub fn null_spaces(a: &CMat, rel_threshold: f64) -> Result<NullSpaces> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(WgqedError::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if !all_finite(a) {
        return Err(WgqedError::NonFinite("matrix passed to SVD"));
    }
    let (right, sigma) = right_null(a, rel_threshold)?;
    // The U factor is unreliable for exactly zero singular values, so the
    // left kernel comes from a second decomposition of the adjoint.
    let (left, _) = right_null(&a.adjoint(), rel_threshold)?;
    if left.ncols() != right.ncols() {
        return Err(WgqedError::Numerical(format!(
            "left and right kernels disagree in dimension ({} vs {})",
            left.ncols(),
            right.ncols()
        )));
    }
    Ok(NullSpaces {
        right,
        left,
        singular_values: sigma,
    })
}
