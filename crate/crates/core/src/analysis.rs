//! Queries over finished embeddings.

use std::collections::BTreeSet;

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::roster::CountryRoster;

/// Euclidean distances between all pairs of embedded countries.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub roster: CountryRoster,
    pub distances: Matrix,
}

impl DistanceReport {
    pub fn between(&self, a: &str, b: &str) -> Result<f64> {
        let i = self.roster.require(a)?;
        let j = self.roster.require(b)?;
        Ok(self.distances[(i, j)])
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn pairwise_distances(emb: &Embedding) -> DistanceReport {
    let n = emb.len();
    let mut distances = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(emb.point(i), emb.point(j));
            distances[(i, j)] = d;
            distances[(j, i)] = d;
        }
    }
    DistanceReport {
        roster: emb.roster().clone(),
        distances,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub code: String,
    pub distance: f64,
}

/// The `m` countries closest to `code`, nearest first; equal distances are
/// ordered by roster position.
pub fn nearest_neighbors(emb: &Embedding, code: &str, m: usize) -> Result<Vec<Neighbor>> {
    let origin = emb.roster().require(code)?;
    let n = emb.len();
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count must be in 1..{n}, got {m}"
        )));
    }
    let mut others: Vec<(f64, usize)> = (0..n)
        .filter(|&j| j != origin)
        .map(|j| (euclidean(emb.point(origin), emb.point(j)), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(others
        .into_iter()
        .take(m)
        .map(|(distance, j)| Neighbor {
            code: emb.roster().code(j).to_string(),
            distance,
        })
        .collect())
}

/// Split of the roster by the sign of the first embedding coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bipartition {
    pub positive_set: Vec<String>,
    pub negative_set: Vec<String>,
    /// Countries with `|x| <= boundary_tolerance`; they still belong to the
    /// side their sign points to (zero goes positive).
    pub boundary: Vec<String>,
    pub boundary_tolerance: f64,
}

impl Bipartition {
    /// `true` for countries on the positive side, in roster order.
    pub fn sides(&self, roster: &CountryRoster) -> Vec<bool> {
        let pos: BTreeSet<&str> = self.positive_set.iter().map(String::as_str).collect();
        roster
            .codes()
            .iter()
            .map(|c| pos.contains(c.as_str()))
            .collect()
    }
}

/// Fiedler-direction split. One-sided results indicate an upstream bug
/// (a nontrivial eigenvector must change sign) and are an error.
pub fn bipartition(emb: &Embedding, zero_band: f64) -> Result<Bipartition> {
    if !(zero_band >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "zero band must be nonnegative, got {zero_band}"
        )));
    }
    let mut part = Bipartition {
        positive_set: Vec::new(),
        negative_set: Vec::new(),
        boundary: Vec::new(),
        boundary_tolerance: zero_band,
    };
    for i in 0..emb.len() {
        let code = emb.roster().code(i).to_string();
        let x = emb.point(i)[0];
        if x.abs() <= zero_band {
            part.boundary.push(code.clone());
        }
        if x >= 0.0 {
            part.positive_set.push(code);
        } else {
            part.negative_set.push(code);
        }
    }
    if part.positive_set.is_empty() || part.negative_set.is_empty() {
        return Err(Error::OneSidedPartition);
    }
    Ok(part)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProcrustesOptions {
    /// Also fit a uniform scale factor.
    pub scaling: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub aligned: Embedding,
    /// Sum of squared distances between reference and aligned points.
    pub disparity: f64,
    /// `k × k` orthogonal map applied on the right: `aligned = s · target · R`.
    pub rotation: Matrix,
    pub scale: f64,
}

/// Orthogonal (optionally scaled) Procrustes fit of `target` onto `reference`.
pub fn procrustes_align(
    reference: &Embedding,
    target: &Embedding,
    options: ProcrustesOptions,
) -> Result<Alignment> {
    if reference.roster().codes() != target.roster().codes() {
        let a: BTreeSet<&String> = reference.roster().codes().iter().collect();
        let b: BTreeSet<&String> = target.roster().codes().iter().collect();
        return Err(Error::RosterMismatch {
            only_reference: a.difference(&b).map(|s| s.to_string()).collect(),
            only_target: b.difference(&a).map(|s| s.to_string()).collect(),
        });
    }
    if reference.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            found: target.dim(),
        });
    }
    let x = reference.coordinates();
    let t = target.coordinates();
    // M = Tᵀ X, maximize tr(Rᵀ M) over orthogonal R: R = U Vᵀ for M = U Σ Vᵀ.
    let m = t.transpose().matmul(x);
    let (u, sigma, v) = jacobi_svd(&m);
    let rotation = u.matmul(&v.transpose());
    let scale = if options.scaling {
        let tt: f64 = t.as_slice().iter().map(|a| a * a).sum();
        if tt > 0.0 {
            sigma.iter().sum::<f64>() / tt
        } else {
            1.0
        }
    } else {
        1.0
    };
    let aligned = t.matmul(&rotation).scaled(scale);
    let disparity = x
        .as_slice()
        .iter()
        .zip(aligned.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(Alignment {
        aligned: target.with_coordinates(aligned),
        disparity,
        rotation,
        scale,
    })
}

/// One-sided Jacobi SVD of a small square matrix: `a = U diag(σ) Vᵀ`.
///
/// Zero singular directions of `U` are completed to an orthonormal basis.
pub(crate) fn jacobi_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let n = a.cols();
    debug_assert!(a.is_square());
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let cp = w.column(p);
                let cq = w.column(q);
                let alpha = dot(&cp, &cp);
                let beta = dot(&cq, &cq);
                let gamma = dot(&cp, &cq);
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..n {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)];
                        mat[(i, p)] = c * xp - s * xq;
                        mat[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = (0..n)
        .map(|j| dot(&w.column(j), &w.column(j)).sqrt())
        .collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut u = Matrix::zeros(n, n);
    let mut filled = vec![false; n];
    for j in 0..n {
        if sigma[j] > f64::EPSILON * smax * n as f64 && sigma[j] > 0.0 {
            for i in 0..n {
                u[(i, j)] = w[(i, j)] / sigma[j];
            }
            filled[j] = true;
        }
    }
    // Complete U with Gram-Schmidt over the standard basis.
    let mut basis = 0;
    for j in 0..n {
        if filled[j] {
            continue;
        }
        loop {
            let mut cand = vec![0.0; n];
            cand[basis] = 1.0;
            basis += 1;
            for c in (0..n).filter(|&c| filled[c]) {
                let col = u.column(c);
                let proj = dot(&cand, &col);
                for i in 0..n {
                    cand[i] -= proj * col[i];
                }
            }
            let norm = dot(&cand, &cand).sqrt();
            if norm > 1e-8 {
                for i in 0..n {
                    u[(i, j)] = cand[i] / norm;
                }
                filled[j] = true;
                break;
            }
        }
    }
    (u, sigma, v)
}
