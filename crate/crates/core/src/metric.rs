//! Finite metric spaces stored as dense symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite set of labelled points with a dense distance matrix.
///
/// Construction only checks that the matrix is square; use
/// [`FiniteMetricSpace::validate`] to check the metric axioms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    n: usize,
    dist: Vec<f64>,
}

/// Which metric axiom produced the worst violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Identity,
    Symmetry,
    Positivity,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    /// Largest violation found. Coincident distinct points count as infinite.
    pub worst_violation: f64,
    pub kind: Option<Violation>,
    /// Offending indices: `[i]`, `[i, j]`, or `[i, j, via]` for triangles.
    pub witness: Vec<usize>,
}

impl FiniteMetricSpace {
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if labels.len() != n {
            return Err(Error::LabelMismatch { labels: labels.len(), size: n });
        }
        let mut dist = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(Error::NonSquare { row, len: r.len(), expected: n });
            }
            dist.extend(r);
        }
        Ok(Self { labels, n, dist })
    }

    /// Rows without labels; points are labelled by index.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::from_rows(labels, rows)
    }

    /// Builds a space from a distance function on `0..n`.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = labels.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = f(i, j);
            }
        }
        Self { labels, n, dist }
    }

    pub(crate) fn from_flat(labels: Vec<String>, dist: Vec<f64>) -> Self {
        let n = labels.len();
        debug_assert_eq!(dist.len(), n * n);
        Self { labels, n, dist }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn eccentricities(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().copied().fold(0.0, f64::max))
            .collect()
    }

    /// Checks identity, symmetry, positivity and the triangle inequality.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.n;
        let mut worst = 0.0;
        let mut kind = None;
        let mut witness = Vec::new();
        let mut record = |v: f64, k: Violation, w: &[usize]| {
            if v > worst {
                worst = v;
                kind = Some(k);
                witness = w.to_vec();
            }
        };
        for i in 0..n {
            record(self.d(i, i).abs(), Violation::Identity, &[i]);
            for j in 0..n {
                if i == j {
                    continue;
                }
                record((self.d(i, j) - self.d(j, i)).abs(), Violation::Symmetry, &[i, j]);
                if i < j && self.d(i, j) <= tol {
                    record(f64::INFINITY, Violation::Positivity, &[i, j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let excess = self.d(i, j) - self.d(i, k) - self.d(k, j);
                    record(excess, Violation::Triangle, &[i, j, k]);
                }
            }
        }
        ValidationReport { ok: worst <= tol, worst_violation: worst, kind, witness }
    }

    /// Restriction to the listed indices, in the given order.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        self.check_indices(subset)?;
        let labels = subset.iter().map(|&i| self.labels[i].clone()).collect();
        let mut dist = Vec::with_capacity(subset.len() * subset.len());
        for &i in subset {
            for &j in subset {
                dist.push(self.d(i, j));
            }
        }
        Ok(Self::from_flat(labels, dist))
    }

    /// Hausdorff distance between two index subsets of this space.
    pub fn hausdorff_distance(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySubset);
        }
        self.check_indices(a)?;
        self.check_indices(b)?;
        Ok(self.directed_hausdorff(a, b).max(self.directed_hausdorff(b, a)))
    }

    fn directed_hausdorff(&self, from: &[usize], to: &[usize]) -> f64 {
        from.iter()
            .map(|&x| to.iter().map(|&y| self.d(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    /// Largest gap between the biggest and second-biggest of the three
    /// pair sums over all quadruples. Zero exactly for 0-hyperbolic spaces.
    pub fn four_point_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        // The three sums are invariant under permuting the quadruple, so
        // multisets i <= j <= k <= l suffice.
        for i in 0..n {
            for j in i..n {
                let dij = self.d(i, j);
                for k in j..n {
                    let dik = self.d(i, k);
                    let djk = self.d(j, k);
                    for l in k..n {
                        let s1 = dij + self.d(k, l);
                        let s2 = dik + self.d(j, l);
                        let s3 = self.d(i, l) + djk;
                        let (hi, mid) = top_two(s1, s2, s3);
                        worst = worst.max(hi - mid);
                    }
                }
            }
        }
        worst
    }

    fn check_indices(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.n) {
            Some(&index) => Err(Error::IndexOutOfRange { index, len: self.n }),
            None => Ok(()),
        }
    }
}

fn top_two(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if c >= hi {
        (c, hi)
    } else {
        (hi, lo.max(c))
    }
}

/// Validates a raw matrix, reporting non-square input as an error.
pub fn validate_metric(rows: Vec<Vec<f64>>, tol: f64) -> Result<ValidationReport> {
    Ok(FiniteMetricSpace::from_matrix(rows)?.validate(tol))
}
