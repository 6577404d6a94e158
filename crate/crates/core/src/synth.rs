//! Synthetic trade from the gravity equation `F_ij = G · M_i · M_j / D_ij`
//! over planted geometries.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`, which is
//! portable across platforms. Geometry uses stream 0 of the seed and noise
//! uses stream 1, so adding noise never changes the planted points.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analysis::{self, pairwise_distances};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::ingest::FlowMatrix;
use crate::matrix::Matrix;
use crate::roster::CountryRoster;

const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub positions: Vec<[f64; 2]>,
    pub masses: Vec<f64>,
    pub gravity_constant: f64,
    pub labels: Vec<usize>,
    pub seed: u64,
}

impl SyntheticScenario {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Zero-padded codes `S000, S001, ...` whose lexicographic order equals
    /// point order.
    pub fn roster(&self) -> CountryRoster {
        let width = self.len().saturating_sub(1).to_string().len().max(3);
        CountryRoster::new((0..self.len()).map(|i| format!("S{i:0width$}")))
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    /// Checks masses, `G`, lengths, and point distinctness.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.masses.len() != n || self.labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.masses.len().min(self.labels.len()),
            });
        }
        if !(self.gravity_constant > 0.0 && self.gravity_constant.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gravity constant must be positive, got {}",
                self.gravity_constant
            )));
        }
        if let Some(m) = self.masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {m}"
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !(self.distance(i, j) > 0.0) {
                    return Err(Error::DegenerateGeometry {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Gravity-model flows. Each unordered pair gets total `F_ij` split evenly
/// as `W[i][j] = W[j][i] = F_ij / 2`, times one lognormal factor
/// `exp(σ z)` per pair when `noise_level = σ > 0`.
pub fn gravity_flows(scenario: &SyntheticScenario, noise_level: f64) -> Result<FlowMatrix> {
    scenario.validate()?;
    if !(noise_level >= 0.0 && noise_level.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be nonnegative, got {noise_level}"
        )));
    }
    let n = scenario.len();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(NOISE_STREAM);
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let f = scenario.gravity_constant * scenario.masses[i] * scenario.masses[j]
                / scenario.distance(i, j);
            let factor = if noise_level > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                (noise_level * z).exp()
            } else {
                1.0
            };
            let half = 0.5 * f * factor;
            w[(i, j)] = half;
            w[(j, i)] = half;
        }
    }
    FlowMatrix::new(scenario.roster(), w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub n_per_cluster: usize,
    pub centers: Vec<[f64; 2]>,
    pub spread: f64,
    pub mass_range: (f64, f64),
}

/// Points uniform in a disc of radius `spread` around each center, masses
/// uniform in `mass_range`, labels = cluster index. `G = 1`.
pub fn planted_cluster_scenario(seed: u64, spec: &ClusterSpec) -> Result<SyntheticScenario> {
    if spec.centers.is_empty() {
        return Err(Error::InvalidParameter("no cluster centers given".into()));
    }
    if spec.n_per_cluster == 0 {
        return Err(Error::InvalidParameter(
            "n_per_cluster must be positive".into(),
        ));
    }
    if !(spec.spread > 0.0 && spec.spread.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spread must be positive, got {}",
            spec.spread
        )));
    }
    let (lo, hi) = spec.mass_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mass range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
        )));
    }
    let mut min_sep = f64::INFINITY;
    for (a, ca) in spec.centers.iter().enumerate() {
        for (b, cb) in spec.centers.iter().enumerate().skip(a + 1) {
            let d = (ca[0] - cb[0]).hypot(ca[1] - cb[1]);
            if !(d > 0.0) {
                return Err(Error::DegenerateGeometry {
                    first: a,
                    second: b,
                });
            }
            min_sep = min_sep.min(d);
        }
    }
    if spec.spread >= 0.5 * min_sep {
        log::warn!(
            "spread {} is not below half the minimum center separation {}",
            spec.spread,
            min_sep
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_per_cluster * spec.centers.len();
    let mut positions = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (label, center) in spec.centers.iter().enumerate() {
        for _ in 0..spec.n_per_cluster {
            let r = spec.spread * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            positions.push([center[0] + r * theta.cos(), center[1] + r * theta.sin()]);
            masses.push(if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            });
            labels.push(label);
        }
    }
    let scenario = SyntheticScenario {
        positions,
        masses,
        gravity_constant: 1.0,
        labels,
        seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryScore {
    /// Agreement of the sign split with the planted labels, maximized over
    /// the two label assignments; only for two-cluster scenarios.
    pub partition_accuracy: Option<f64>,
    /// Spearman correlation of planted vs. embedded pairwise distances.
    pub distance_rank_correlation: f64,
}

pub fn recovery_score(scenario: &SyntheticScenario, emb: &Embedding) -> Result<RecoveryScore> {
    let n = scenario.len();
    if emb.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: emb.len(),
        });
    }
    let partition_accuracy = if scenario.cluster_count() == 2 {
        let sides: Vec<bool> = match analysis::bipartition(emb, 0.0) {
            Ok(b) => b.sides(emb.roster()),
            Err(Error::OneSidedPartition) => vec![true; n],
            Err(e) => return Err(e),
        };
        let agree = sides
            .iter()
            .zip(&scenario.labels)
            .filter(|(&s, &l)| s == (l == 0))
            .count();
        Some(agree.max(n - agree) as f64 / n as f64)
    } else {
        None
    };

    let embedded = pairwise_distances(emb).distances;
    let mut planted = Vec::with_capacity(n * (n - 1) / 2);
    let mut observed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            planted.push(scenario.distance(i, j));
            observed.push(embedded[(i, j)]);
        }
    }
    Ok(RecoveryScore {
        partition_accuracy,
        distance_rank_correlation: spearman(&planted, &observed),
    })
}

/// Ranks with ties averaged, 1-based.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation; 0 when either side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// One `x,y,mass,label,gravity_constant,seed` row per point; the last two
/// columns repeat on every row.
pub fn write_scenario_csv<W: Write>(scenario: &SyntheticScenario, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["x", "y", "mass", "label", "gravity_constant", "seed"])
        .map_err(err)?;
    for i in 0..scenario.len() {
        w.write_record([
            scenario.positions[i][0].to_string(),
            scenario.positions[i][1].to_string(),
            scenario.masses[i].to_string(),
            scenario.labels[i].to_string(),
            scenario.gravity_constant.to_string(),
            scenario.seed.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scenario_csv<R: Read>(source: R) -> Result<SyntheticScenario> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut scenario = SyntheticScenario {
        positions: Vec::new(),
        masses: Vec::new(),
        gravity_constant: 1.0,
        labels: Vec::new(),
        seed: 0,
    };
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("bad {what}"),
        };
        let num = |c: usize, what: &str| -> Result<f64> {
            row.get(c)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(what))
        };
        scenario.positions.push([num(0, "x")?, num(1, "y")?]);
        scenario.masses.push(num(2, "mass")?);
        scenario.labels.push(
            row.get(3)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("label"))?,
        );
        scenario.gravity_constant = num(4, "gravity_constant")?;
        scenario.seed = row
            .get(5)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("seed"))?;
    }
    scenario.validate()?;
    Ok(scenario)
}
