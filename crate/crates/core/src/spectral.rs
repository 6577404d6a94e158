//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form with full accumulation of the
//! orthogonal transform, followed by implicit-shift QL iteration on the
//! tridiagonal matrix. Everything is sequential and deterministic: the same
//! input produces the same bits.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Sweep cap per eigenvalue in the QL iteration.
pub const MAX_SWEEPS: usize = 50;

/// Relative asymmetry tolerated on input.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Tridiagonal form `T = Qᵀ S Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples rows `i` and `i + 1`.
    pub offdiag: Vec<f64>,
    pub q: Matrix,
}

/// Sorted eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    eigenvectors: Matrix,
    residual_bound: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    /// `max_k ‖S v_k − λ_k v_k‖∞` measured after the solve.
    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `‖VᵀV − I‖max`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        v.transpose()
            .matmul(v)
            .max_abs_diff(&Matrix::identity(v.cols()))
    }
}

fn check_symmetric(s: &Matrix) -> Result<()> {
    if !s.is_square() || s.rows() == 0 {
        return Err(Error::BadShape {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let tol = SYMMETRY_TOL * s.max_abs();
    for i in 0..s.rows() {
        for j in (i + 1)..s.cols() {
            if !((s[(i, j)] - s[(j, i)]).abs() <= tol) {
                return Err(Error::Asymmetric {
                    row: i,
                    col: j,
                    upper: s[(i, j)],
                    lower: s[(j, i)],
                });
            }
        }
    }
    Ok(())
}

/// Reduces a symmetric matrix to tridiagonal form by Householder reflections.
///
/// Only the lower triangle is read after the symmetry check.
pub fn tridiagonalize(s: &Matrix) -> Result<Tridiagonal> {
    check_symmetric(s)?;
    let n = s.rows();
    // Work on an exactly symmetric copy built from the lower triangle.
    let mut a = Matrix::from_fn(n, n, |i, j| if i >= j { s[(i, j)] } else { s[(j, i)] });
    let mut q = Matrix::identity(n);

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let scale: f64 = x.iter().map(|v| v.abs()).sum();
        if scale == 0.0 || x[1..].iter().all(|&v| v == 0.0) {
            continue;
        }
        let mut v: Vec<f64> = x.iter().map(|xi| xi / scale).collect();
        let sigma = dot(&v, &v).sqrt();
        let alpha = if v[0] > 0.0 { -sigma } else { sigma };
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        let beta = 2.0 / vtv;

        // p = β A₂₂ v over the trailing block
        let mut p = vec![0.0; m];
        for (r, pr) in p.iter_mut().enumerate() {
            let mut acc = 0.0;
            for c in 0..m {
                acc += a[(k + 1 + r, k + 1 + c)] * v[c];
            }
            *pr = beta * acc;
        }
        let kk = 0.5 * beta * dot(&v, &p);
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for r in 0..m {
            for c in 0..=r {
                let upd = a[(k + 1 + r, k + 1 + c)] - v[r] * w[c] - w[r] * v[c];
                a[(k + 1 + r, k + 1 + c)] = upd;
                a[(k + 1 + c, k + 1 + r)] = upd;
            }
        }
        let head = alpha * scale;
        a[(k + 1, k)] = head;
        a[(k, k + 1)] = head;
        for r in (k + 2)..n {
            a[(r, k)] = 0.0;
            a[(k, r)] = 0.0;
        }

        // Q ← Q H with H = I − β v vᵀ acting on columns k+1..n
        for row in 0..n {
            let mut acc = 0.0;
            for c in 0..m {
                acc += q[(row, k + 1 + c)] * v[c];
            }
            let f = beta * acc;
            if f != 0.0 {
                for c in 0..m {
                    q[(row, k + 1 + c)] -= f * v[c];
                }
            }
        }
    }

    let diag = (0..n).map(|i| a[(i, i)]).collect();
    let offdiag = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
    Ok(Tridiagonal { diag, offdiag, q })
}

/// Implicit-shift QL on a tridiagonal matrix, rotating the columns of `z`.
///
/// On return `diag` holds the (unsorted) eigenvalues and column `k` of `z`
/// the eigenvector for `diag[k]`.
fn tridiagonal_ql(diag: &mut [f64], offdiag: &[f64], z: &mut Matrix) -> Result<()> {
    let n = diag.len();
    let d = diag;
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    index: l,
                    sweeps: MAX_SWEEPS,
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..n {
                    let zi1 = z[(row, i + 1)];
                    let zi = z[(row, i)];
                    z[(row, i + 1)] = s * zi + c * zi1;
                    z[(row, i)] = c * zi - s * zi1;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix: eigenvalues ascending,
/// orthonormal eigenvectors with the sign convention of [`fix_signs`].
pub fn symmetric_eigen(s: &Matrix) -> Result<Spectrum> {
    let Tridiagonal {
        mut diag,
        offdiag,
        mut q,
    } = tridiagonalize(s)?;
    let n = diag.len();
    tridiagonal_ql(&mut diag, &offdiag, &mut q)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, j| q[(i, order[j])]);

    let spectrum = fix_signs(Spectrum {
        eigenvalues,
        eigenvectors,
        residual_bound: 0.0,
    });
    let residual_bound = residual(s, &spectrum);
    Ok(Spectrum {
        residual_bound,
        ..spectrum
    })
}

fn residual(s: &Matrix, spectrum: &Spectrum) -> f64 {
    let sv = s.matmul(&spectrum.eigenvectors);
    let mut worst = 0.0f64;
    for k in 0..spectrum.len() {
        let lambda = spectrum.eigenvalues[k];
        for i in 0..s.rows() {
            worst = worst.max((sv[(i, k)] - lambda * spectrum.eigenvectors[(i, k)]).abs());
        }
    }
    worst
}

/// Flips each eigenvector so its largest-magnitude entry is positive
/// (lowest index wins a tie). Idempotent.
pub fn fix_signs(mut spectrum: Spectrum) -> Spectrum {
    let v = &mut spectrum.eigenvectors;
    for k in 0..v.cols() {
        let mut pivot = 0;
        for i in 1..v.rows() {
            if v[(i, k)].abs() > v[(pivot, k)].abs() {
                pivot = i;
            }
        }
        if v[(pivot, k)] < 0.0 {
            for i in 0..v.rows() {
                v[(i, k)] = -v[(i, k)];
            }
        }
    }
    spectrum
}

/// Builds a spectrum from explicit parts; used by callers that already hold
/// eigenpairs (tests, diagnostics). No validation beyond shapes.
pub fn spectrum_from_parts(eigenvalues: Vec<f64>, eigenvectors: Matrix) -> Result<Spectrum> {
    if eigenvectors.rows() != eigenvalues.len() || eigenvectors.cols() != eigenvalues.len() {
        return Err(Error::DimensionMismatch {
            expected: eigenvalues.len(),
            found: eigenvectors.cols(),
        });
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        residual_bound: f64::NAN,
    })
}
