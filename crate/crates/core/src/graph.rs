//! Affinity, degree and normalized Laplacian of the complete weighted trade graph.

use crate::error::{Error, Result};
use crate::ingest::FlowMatrix;
use crate::matrix::Matrix;
use crate::roster::CountryRoster;

/// Symmetric total-trade matrix `A = W + Wᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    roster: CountryRoster,
    values: Matrix,
}

impl AffinityMatrix {
    /// Wraps a matrix that is already a valid affinity: square, exactly
    /// symmetric, nonnegative with zero diagonal.
    pub fn from_symmetric(roster: CountryRoster, values: Matrix) -> Result<Self> {
        let n = roster.len();
        if values.rows() != n || values.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.rows(),
            });
        }
        for i in 0..n {
            for j in i..n {
                let v = values[(i, j)];
                if !v.is_finite() || v < 0.0 || (i == j && v != 0.0) {
                    return Err(Error::InvalidFlow {
                        from: roster.code(i).to_string(),
                        to: roster.code(j).to_string(),
                        value: v,
                    });
                }
                if values[(j, i)] != v {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        upper: v,
                        lower: values[(j, i)],
                    });
                }
            }
        }
        Ok(Self { roster, values })
    }

    pub fn roster(&self) -> &CountryRoster {
        &self.roster
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }
}

/// Symmetrizes the export matrix. Each unordered pair is summed once and
/// mirrored, so the result is exactly symmetric.
pub fn affinity(flow: &FlowMatrix) -> Result<AffinityMatrix> {
    let n = flow.len();
    let w = flow.values();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = w[(i, j)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidFlow {
                    from: flow.roster().code(i).to_string(),
                    to: flow.roster().code(j).to_string(),
                    value: v,
                });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let total = w[(i, j)] + w[(j, i)];
            a[(i, j)] = total;
            a[(j, i)] = total;
        }
    }
    Ok(AffinityMatrix {
        roster: flow.roster().clone(),
        values: a,
    })
}

/// Row sums of the affinity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    roster: CountryRoster,
    degrees: Vec<f64>,
}

impl DegreeVector {
    pub fn roster(&self) -> &CountryRoster {
        &self.roster
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.degrees
    }

    /// `√d` scaled to unit Euclidean norm: the trivial eigenvector of `N`.
    pub fn normalized_sqrt(&self) -> Vec<f64> {
        let s: Vec<f64> = self.degrees.iter().map(|d| d.sqrt()).collect();
        let norm = crate::matrix::norm(&s);
        if norm == 0.0 {
            return s;
        }
        s.into_iter().map(|x| x / norm).collect()
    }
}

pub fn degrees(aff: &AffinityMatrix) -> DegreeVector {
    let degrees = (0..aff.len())
        .map(|i| aff.values().row(i).iter().sum())
        .collect();
    DegreeVector {
        roster: aff.roster.clone(),
        degrees,
    }
}

/// `N = I − D^{−1/2} A D^{−1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    roster: CountryRoster,
    values: Matrix,
    degrees: DegreeVector,
}

impl LaplacianMatrix {
    pub fn roster(&self) -> &CountryRoster {
        &self.roster
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }
}

pub fn normalized_laplacian(aff: &AffinityMatrix) -> Result<LaplacianMatrix> {
    let deg = degrees(aff);
    let d = deg.as_slice();
    if let Some(i) = d.iter().position(|&x| x <= 0.0) {
        return Err(Error::IsolatedVertex {
            code: aff.roster.code(i).to_string(),
        });
    }
    let n = aff.len();
    let a = aff.values();
    let mut values = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = -a[(i, j)] / (d[i] * d[j]).sqrt();
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(LaplacianMatrix {
        roster: aff.roster.clone(),
        values,
        degrees: deg,
    })
}

/// Connected components of the graph with edges `aff > edge_threshold`.
///
/// Each component is an ascending index list; components are ordered by
/// their lowest index.
pub fn connected_components(aff: &AffinityMatrix, edge_threshold: f64) -> Vec<Vec<usize>> {
    components_by(aff.len(), |i, j| aff.values()[(i, j)] > edge_threshold)
}

/// Components of the graph underlying a Laplacian (negative off-diagonals).
pub fn laplacian_components(lap: &LaplacianMatrix) -> Vec<Vec<usize>> {
    components_by(lap.len(), |i, j| lap.values()[(i, j)] < 0.0)
}

#[allow(clippy::needless_range_loop)]
fn components_by(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        let mut stack = vec![start];
        label[start] = id;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if v != u && label[v] == usize::MAX && edge(u, v) {
                    label[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Removes zero-degree countries; returns the reduced flow and the removed codes.
pub fn drop_isolated(flow: &FlowMatrix) -> Result<(FlowMatrix, Vec<String>)> {
    let d = degrees(&affinity(flow)?);
    let keep: Vec<usize> = (0..flow.len()).filter(|&i| d.as_slice()[i] > 0.0).collect();
    let removed: Vec<String> = (0..flow.len())
        .filter(|&i| d.as_slice()[i] <= 0.0)
        .map(|i| flow.roster().code(i).to_string())
        .collect();
    if !removed.is_empty() {
        log::warn!("dropping isolated countries: {}", removed.join(","));
    }
    Ok((flow.restrict(&keep), removed))
}

/// Restricts a flow matrix to its largest component (ties: lowest index first).
pub fn largest_component(flow: &FlowMatrix, edge_threshold: f64) -> Result<FlowMatrix> {
    let comps = connected_components(&affinity(flow)?, edge_threshold);
    let mut best: &[usize] = &[];
    for c in &comps {
        if c.len() > best.len() {
            best = c;
        }
    }
    if comps.len() > 1 {
        log::warn!(
            "restricting to largest of {} components ({} of {} countries)",
            comps.len(),
            best.len(),
            flow.len()
        );
    }
    Ok(flow.restrict(best))
}

/// Zeroes affinity entries at or below `edge_threshold` (keeping symmetry).
pub fn threshold_affinity(aff: &AffinityMatrix, edge_threshold: f64) -> AffinityMatrix {
    let n = aff.len();
    let values = Matrix::from_fn(n, n, |i, j| {
        let v = aff.values[(i, j)];
        if v > edge_threshold {
            v
        } else {
            0.0
        }
    });
    AffinityMatrix {
        roster: aff.roster.clone(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(rows: &[&[f64]]) -> FlowMatrix {
        let n = rows.len();
        let roster = CountryRoster::new((0..n).map(|i| format!("C{i}")));
        FlowMatrix::new(roster, Matrix::from_rows(rows)).unwrap()
    }

    fn three_country() -> AffinityMatrix {
        // A-B = 1, B-C = 2, A-C = 0.01 as one-directional exports.
        affinity(&flow(&[
            &[0.0, 1.0, 0.01],
            &[0.0, 0.0, 2.0],
            &[0.0, 0.0, 0.0],
        ]))
        .unwrap()
    }

    #[test]
    fn single_directed_edge_symmetrized() {
        let a = affinity(&flow(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(a.values(), &Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]));
    }

    #[test]
    fn fixture_affinity_and_degrees() {
        let a = three_country();
        assert_eq!(
            a.values(),
            &Matrix::from_rows(&[[0.0, 1.0, 0.01], [1.0, 0.0, 2.0], [0.01, 2.0, 0.0]])
        );
        let d = degrees(&a);
        assert_eq!(d.as_slice(), &[1.01, 3.0, 2.01]);
    }

    #[test]
    fn symmetric_flow_doubles() {
        let a = affinity(&flow(&[
            &[0.0, 1.5, 2.0],
            &[1.5, 0.0, 0.25],
            &[2.0, 0.25, 0.0],
        ]))
        .unwrap();
        assert_eq!(a.values()[(0, 1)], 3.0);
        assert_eq!(a.values()[(1, 2)], 0.5);
        assert_eq!(a.values()[(2, 0)], 4.0);
    }

    #[test]
    fn zero_affinity_zero_degrees() {
        let a = affinity(&flow(&[&[0.0; 3], &[0.0; 3], &[0.0; 3]])).unwrap();
        assert_eq!(degrees(&a).as_slice(), &[0.0; 3]);
        assert!(matches!(
            normalized_laplacian(&a),
            Err(Error::IsolatedVertex { code }) if code == "C0"
        ));
    }

    #[test]
    fn two_node_laplacian() {
        let a = affinity(&flow(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap();
        let n = normalized_laplacian(&a).unwrap();
        assert_eq!(n.values(), &Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]));
    }

    #[test]
    fn fixture_laplacian_entries() {
        let n = normalized_laplacian(&three_country()).unwrap();
        let v = n.values();
        let expect = [
            (0, 1, -1.0 / (1.01f64 * 3.0).sqrt()),
            (0, 2, -0.01 / (1.01f64 * 2.01).sqrt()),
            (1, 2, -2.0 / (3.0f64 * 2.01).sqrt()),
        ];
        for (i, j, e) in expect {
            assert!((v[(i, j)] - e).abs() < 1e-15);
            assert_eq!(v[(i, j)], v[(j, i)]);
        }
        for i in 0..3 {
            assert_eq!(v[(i, i)], 1.0);
        }
    }

    #[test]
    fn components() {
        let full = three_country();
        assert_eq!(connected_components(&full, 0.0), vec![vec![0, 1, 2]]);
        // threshold above the weak A-C edge still leaves a path through B
        assert_eq!(connected_components(&full, 0.5), vec![vec![0, 1, 2]]);
        assert_eq!(connected_components(&full, 1.5), vec![vec![0], vec![1, 2]]);
        let empty = affinity(&flow(&[&[0.0; 3], &[0.0; 3], &[0.0; 3]])).unwrap();
        assert_eq!(
            connected_components(&empty, 0.0),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn block_diagonal_components() {
        let f = flow(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
            &[0.0, 0.0, 2.0, 0.0],
        ]);
        let a = affinity(&f).unwrap();
        assert_eq!(connected_components(&a, 0.0), vec![vec![0, 1], vec![2, 3]]);
        let lap = normalized_laplacian(&a).unwrap();
        assert_eq!(laplacian_components(&lap), vec![vec![0, 1], vec![2, 3]]);
        let big = largest_component(&f, 0.0).unwrap();
        assert_eq!(big.roster().codes(), &["C0", "C1"]);
    }

    #[test]
    fn drops_isolated() {
        let f = flow(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let (kept, removed) = drop_isolated(&f).unwrap();
        assert_eq!(removed, vec!["C2"]);
        assert_eq!(kept.len(), 2);
    }
}
