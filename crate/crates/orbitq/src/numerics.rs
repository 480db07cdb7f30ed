//! Dense numerical kernels shared by every layer: matrix exponential and
//! logarithm, eigenvalue clustering, least-squares / null-space solves (real
//! and complex), and a damped Gauss-Newton iteration with finite-difference
//! Jacobian.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{OrbitqError, Result};

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Matrix exponential by scaling-and-squaring with a truncated Taylor series.
pub fn exp_real(a: &RMat) -> RMat {
    let n = a.nrows();
    let norm = a.norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * (0.5f64).powi(s as i32);
    let mut result = RMat::identity(n, n);
    let mut term = RMat::identity(n, n);
    for k in 1..=40 {
        term = (&term * &scaled) / (k as f64);
        result += &term;
        if term.norm() < 1e-18 * result.norm().max(1.0) {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Principal square root by the Denman-Beavers iteration.
///
/// Fails when the spectrum touches the closed negative real axis (no principal
/// root) or the iteration stalls.
pub fn sqrt_principal(a: &RMat) -> Result<RMat> {
    let n = a.nrows();
    for lam in complex_eigenvalues(a)? {
        if lam.re <= 0.0 && lam.im.abs() < 1e-9 * (1.0 + lam.re.abs()) {
            return Err(OrbitqError::LogDomainError {
                reason: format!("eigenvalue {lam} lies on the closed negative real axis"),
            });
        }
    }
    let mut y = a.clone();
    let mut z = RMat::identity(n, n);
    for _ in 0..100 {
        let y_inv = y.clone().try_inverse().ok_or_else(|| OrbitqError::LogDomainError {
            reason: "singular iterate in square-root iteration".into(),
        })?;
        let z_inv = z.clone().try_inverse().ok_or_else(|| OrbitqError::LogDomainError {
            reason: "singular iterate in square-root iteration".into(),
        })?;
        let y_next = (&y + &z_inv) * 0.5;
        let z_next = (&z + &y_inv) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-14 * (1.0 + y.norm()) {
            return Ok(y);
        }
    }
    Err(OrbitqError::LogDomainError {
        reason: "square-root iteration did not converge".into(),
    })
}

/// Principal matrix logarithm by inverse scaling-and-squaring: repeated square
/// roots until the iterate sits in the series-convergence region, then the
/// Mercator series.
pub fn log_real(g: &RMat) -> Result<RMat> {
    let n = g.nrows();
    let id = RMat::identity(n, n);
    let mut b = g.clone();
    let mut k = 0u32;
    while (&b - &id).norm() > 0.3 {
        b = sqrt_principal(&b)?;
        k += 1;
        if k > 60 {
            return Err(OrbitqError::LogDomainError {
                reason: "too many square roots taken without entering the series region".into(),
            });
        }
    }
    let x = &b - &id;
    let mut result = RMat::zeros(n, n);
    let mut power = id.clone();
    for j in 1..=200 {
        power = &power * &x;
        let term = &power * ((-1.0f64).powi((j + 1) as i32) / (j as f64));
        result += &term;
        if term.norm() < 1e-17 * (1.0 + result.norm()) {
            break;
        }
    }
    Ok(result * (2.0f64).powi(k as i32))
}

/// Complex eigenvalues through a real Schur decomposition.
pub fn complex_eigenvalues(m: &RMat) -> Result<Vec<Complex64>> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-12, 100_000)
        .ok_or_else(|| OrbitqError::LogDomainError {
            reason: "Schur iteration failed to converge".into(),
        })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Real eigenvalues of `m` clustered at `tol`, with an orthonormal basis of
/// each eigenspace. Errors when an eigenvalue has a nonzero imaginary part or
/// when the eigenspaces do not fill the whole dimension (defective matrix).
/// Eigenvalues of a complex matrix via its triangular Schur factor.
pub fn complex_eigenvalues_c(m: &CMat) -> Result<Vec<Complex64>> {
    let schur = nalgebra::Schur::try_new(m.clone(), 1e-12, 100_000).ok_or_else(|| {
        OrbitqError::DefectiveAd {
            reason: "Schur iteration failed to converge".into(),
        }
    })?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

pub fn clustered_real_eigenspaces(m: &RMat, tol: f64) -> Result<Vec<(f64, Vec<RVec>)>> {
    let n = m.nrows();
    let scale = 1.0 + m.norm();
    let eigs = complex_eigenvalues(m)?;
    for lam in &eigs {
        if lam.im.abs() > tol * scale {
            return Err(OrbitqError::NotHyperbolic {
                reason: format!("complex eigenvalue {lam} of the grading operator"),
            });
        }
    }
    let mut reals: Vec<f64> = eigs.iter().map(|l| l.re).collect();
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for r in reals {
        match clusters.last_mut() {
            Some((c, count)) if (r - *c).abs() <= tol * scale => {
                *c = (*c * (*count as f64) + r) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => clusters.push((r, 1)),
        }
    }
    let mut out = Vec::new();
    let mut total = 0usize;
    for (r, mult) in clusters {
        let shifted = m - RMat::identity(n, n) * r;
        let basis = null_space(&shifted, tol.max(1e-10) * 100.0);
        if basis.len() != mult {
            return Err(OrbitqError::NotHyperbolic {
                reason: format!(
                    "eigenvalue {r} has multiplicity {mult} but eigenspace dimension {}",
                    basis.len()
                ),
            });
        }
        total += basis.len();
        out.push((r, basis));
    }
    if total != n {
        return Err(OrbitqError::NotHyperbolic {
            reason: format!("eigenspaces span dimension {total} of {n}"),
        });
    }
    Ok(out)
}

/// Minimum-norm least-squares solution of `a x = b` plus the residual norm.
pub fn lstsq(a: &RMat, b: &RVec) -> (RVec, f64) {
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b.clone(), rank_eps(&svd.singular_values.as_slice()))
        .expect("SVD solve with both factors requested");
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Complex minimum-norm least-squares solution plus residual norm.
pub fn lstsq_c(a: &CMat, b: &CVec) -> (CVec, f64) {
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b.clone(), rank_eps(&svd.singular_values.as_slice()))
        .expect("SVD solve with both factors requested");
    let residual = (a * &x - b).norm();
    (x, residual)
}

fn rank_eps(singular: &&[f64]) -> f64 {
    let max = singular.iter().cloned().fold(0.0f64, f64::max);
    (1e-12 * max).max(1e-300)
}

/// Orthonormal basis of the (right) null space of `a`: singular vectors whose
/// singular value is below `tol` times the largest one.
///
/// Wide inputs are padded with zero rows first; nalgebra's thin SVD would
/// otherwise not expose the trailing right-singular vectors.
pub fn null_space(a: &RMat, tol: f64) -> Vec<RVec> {
    let ncols = a.ncols();
    let rows = a.nrows().max(ncols);
    let mut padded = RMat::zeros(rows, ncols);
    padded.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
    let svd = padded.svd(true, true);
    let v_t = svd.v_t.expect("SVD requested with V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut out = Vec::new();
    for i in 0..ncols {
        if svd.singular_values[i] <= tol * smax.max(1.0) {
            out.push(v_t.row(i).transpose());
        }
    }
    out
}

/// Complex counterpart of [`null_space`].
pub fn null_space_c(a: &CMat, tol: f64) -> Vec<CVec> {
    let ncols = a.ncols();
    let rows = a.nrows().max(ncols);
    let mut padded = CMat::zeros(rows, ncols);
    padded.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
    let svd = padded.svd(true, true);
    let v_t = svd.v_t.expect("SVD requested with V^H");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut out = Vec::new();
    for i in 0..ncols {
        if svd.singular_values[i] <= tol * smax.max(1.0) {
            out.push(v_t.row(i).adjoint());
        }
    }
    out
}

/// Gauss-Newton with central finite-difference Jacobian and step damping.
///
/// `residual` maps parameters to a residual vector; iteration stops when the
/// residual norm drops under `tol`.
pub fn gauss_newton<F>(residual: F, x0: &RVec, tol: f64, max_iter: usize) -> Result<RVec>
where
    F: Fn(&RVec) -> RVec,
{
    let p = x0.len();
    let mut x = x0.clone();
    let mut f = residual(&x);
    for _ in 0..max_iter {
        if f.norm() < tol {
            return Ok(x);
        }
        let q = f.len();
        let mut jac = RMat::zeros(q, p);
        for j in 0..p {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fp = residual(&xp);
            let fm = residual(&xm);
            for i in 0..q {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let (step, _) = lstsq(&jac, &(-&f));
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let candidate = &x + &step * lambda;
            let fc = residual(&candidate);
            if fc.norm() < f.norm() {
                x = candidate;
                f = fc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if f.norm() < tol {
        Ok(x)
    } else {
        Err(OrbitqError::CellEscape {
            reason: format!("nonlinear solve stalled at residual {:.3e}", f.norm()),
        })
    }
}

/// Real matrix promoted to complex entries.
pub fn to_complex(m: &RMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}
