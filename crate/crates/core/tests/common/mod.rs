//! Independent oracles and fixtures shared by the integration tests.
//!
//! Nothing here calls the library's eigensolver; the oracles work from
//! characteristic polynomials, closed forms, or brute-force enumeration.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trademap::{CountryRoster, FlowMatrix, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(n: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = r.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn codes(n: usize) -> CountryRoster {
    CountryRoster::new((0..n).map(|i| format!("K{i:03}")))
}

/// Random export matrix with all off-diagonal flows in `[lo, hi)`.
pub fn random_flow(n: usize, seed: u64, lo: f64, hi: f64) -> FlowMatrix {
    let mut r = rng(seed);
    let w = Matrix::from_fn(
        n,
        n,
        |i, j| if i == j { 0.0 } else { r.random_range(lo..hi) },
    );
    FlowMatrix::new(codes(n), w).unwrap()
}

/// Two cliques with in-clique weight 1 and cross weight `cross`; the
/// first `n_a` indices form clique A.
pub fn two_cliques(n_a: usize, n_b: usize, cross: f64) -> FlowMatrix {
    let n = n_a + n_b;
    let w = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if (i < n_a) == (j < n_a) {
            1.0
        } else {
            cross
        }
    });
    FlowMatrix::new(codes(n), w).unwrap()
}

/// `D^{-1/2} A D^{-1/2}` by explicit dense matrix products, then `I − ·`.
pub fn brute_force_laplacian(a: &Matrix) -> Matrix {
    let n = a.rows();
    let d: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    let dinv = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 / d[i].sqrt() } else { 0.0 });
    let m = dinv.matmul(a).matmul(&dinv);
    Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - m[(i, j)])
}

/// Coefficients of det(λI − S) (monic, highest degree first) by
/// Faddeev–LeVerrier.
pub fn char_poly(s: &Matrix) -> Vec<f64> {
    let n = s.rows();
    let mut coeffs = vec![1.0];
    let mut m = Matrix::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        // M_k = S M_{k-1} + c_{k-1} I
        let mut next = s.matmul(&m);
        for i in 0..n {
            next[(i, i)] += c;
        }
        m = next;
        c = -s.matmul(&m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Roots of the characteristic polynomial (Durand–Kerner, then Newton
/// polishing on the real axis), sorted ascending. Valid for symmetric input.
pub fn char_poly_eigenvalues(s: &Matrix) -> Vec<f64> {
    let coeffs = char_poly(s);
    let n = coeffs.len() - 1;
    let radius = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let zi = roots[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in roots.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            let step = horner(&coeffs, zi) / denom;
            roots[i] = zi - step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    let deriv: Vec<f64> = coeffs[..n]
        .iter()
        .enumerate()
        .map(|(k, c)| c * (n - k) as f64)
        .collect();
    let mut real: Vec<f64> = roots
        .iter()
        .map(|z| {
            let mut x = z.re;
            for _ in 0..5 {
                let f = horner(&coeffs, Complex64::new(x, 0.0)).re;
                let df = horner(&deriv, Complex64::new(x, 0.0)).re;
                if df == 0.0 {
                    break;
                }
                let nx = x - f / df;
                if (nx - x).abs() > 1e-6 * (1.0 + x.abs()) {
                    break;
                }
                x = nx;
            }
            x
        })
        .collect();
    real.sort_by(f64::total_cmp);
    real
}

/// Eigenvalues of a symmetric 3×3 matrix in closed form (trigonometric
/// solution of the characteristic cubic), ascending.
pub fn closed_form_eigenvalues_3x3(s: &Matrix) -> [f64; 3] {
    let p1 = s[(0, 1)].powi(2) + s[(0, 2)].powi(2) + s[(1, 2)].powi(2);
    let q = s.trace() / 3.0;
    let p2 = (s[(0, 0)] - q).powi(2) + (s[(1, 1)] - q).powi(2) + (s[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = Matrix::from_fn(3, 3, |i, j| (s[(i, j)] - if i == j { q } else { 0.0 }) / p);
    let det_b = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
        - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
        + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit eigenvector of a symmetric 3×3 for a simple eigenvalue: the longest
/// cross product of two rows of `S − λI`.
pub fn closed_form_eigenvector_3x3(s: &Matrix, lambda: f64) -> [f64; 3] {
    let rows: Vec<[f64; 3]> = (0..3)
        .map(|i| {
            let mut r = [s[(i, 0)], s[(i, 1)], s[(i, 2)]];
            r[i] -= lambda;
            r
        })
        .collect();
    let mut best = [0.0; 3];
    let mut best_norm = 0.0;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let c = cross(rows[a], rows[b]);
        let nrm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if nrm > best_norm {
            best_norm = nrm;
            best = c;
        }
    }
    [
        best[0] / best_norm,
        best[1] / best_norm,
        best[2] / best_norm,
    ]
}

/// Normalized-cut value of a 2-partition of the affinity graph.
pub fn normalized_cut(a: &Matrix, side: &[bool]) -> f64 {
    let n = a.rows();
    let (mut cut, mut vol_a, mut vol_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if side[i] {
                vol_a += a[(i, j)];
            } else {
                vol_b += a[(i, j)];
            }
            if side[i] && !side[j] {
                cut += a[(i, j)];
            }
        }
    }
    cut / vol_a + cut / vol_b
}

/// Minimum normalized cut over all 2-partitions with both sides nonempty,
/// by enumeration. Vertex 0 is pinned to the `true` side.
pub fn brute_force_min_ncut(a: &Matrix) -> Vec<bool> {
    let n = a.rows();
    assert!(n <= 20, "enumeration is exponential");
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1 << (n - 1)) {
        let side: Vec<bool> = (0..n)
            .map(|i| i == 0 || mask & (1 << (i - 1)) == 0)
            .collect();
        if side.iter().all(|&s| s) {
            continue;
        }
        let c = normalized_cut(a, &side);
        if c < best.0 {
            best = (c, side);
        }
    }
    best.1
}

/// Same partition up to swapping the two labels.
pub fn same_split(a: &[bool], b: &[bool]) -> bool {
    a == b || a.iter().zip(b).all(|(x, y)| x != y)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}
