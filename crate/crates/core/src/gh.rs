//! Gromov–Hausdorff distance between finite metric spaces.
//!
//! The distance is half the smallest distortion of a correspondence. For
//! small spaces [`gh_exact`] finds it by depth-first branch and bound; larger
//! spaces only get the cheap bounds. [`gh_tree_interval`] turns either into
//! an interval that contains the distance between the underlying continua of
//! two trees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::tree::MetricTree;

pub const DEFAULT_CAP: usize = 8;

/// A relation between the points of two spaces, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Self { pairs }
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| (i, i)).collect())
    }

    pub fn check_covering(&self, nx: usize, ny: usize) -> Result<()> {
        let mut cx = vec![false; nx];
        let mut cy = vec![false; ny];
        for &(i, j) in &self.pairs {
            if i >= nx {
                return Err(Error::IndexOutOfRange { index: i, len: nx });
            }
            if j >= ny {
                return Err(Error::IndexOutOfRange { index: j, len: ny });
            }
            cx[i] = true;
            cy[j] = true;
        }
        if let Some(index) = cx.iter().position(|c| !c) {
            return Err(Error::NotCovering { side: "first", index });
        }
        if let Some(index) = cy.iter().position(|c| !c) {
            return Err(Error::NotCovering { side: "second", index });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhInterval {
    pub lo: f64,
    pub hi: f64,
    /// Which bound produced `lo`.
    pub lo_witness: String,
    pub hi_witness: Correspondence,
    pub eps: f64,
    pub exact: bool,
}

impl GhInterval {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }
}

/// Largest mismatch of distances over pairs of related points.
pub fn distortion(dx: &FiniteMetricSpace, dy: &FiniteMetricSpace, r: &Correspondence) -> Result<f64> {
    r.check_covering(dx.len(), dy.len())?;
    Ok(raw_distortion(dx, dy, &r.pairs))
}

fn raw_distortion(dx: &FiniteMetricSpace, dy: &FiniteMetricSpace, pairs: &[(usize, usize)]) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let (rx, ry) = (dx.row(i), dy.row(j));
        for &(i2, j2) in &pairs[k + 1..] {
            worst = worst.max((rx[i2] - ry[j2]).abs());
        }
    }
    worst
}

pub fn gh_upper_bound(dx: &FiniteMetricSpace, dy: &FiniteMetricSpace, r: &Correspondence) -> Result<f64> {
    Ok(0.5 * distortion(dx, dy, r)?)
}

/// Half the larger of the diameter gap and the Hausdorff distance between
/// the two sets of eccentricities.
pub fn gh_lower_bound(dx: &FiniteMetricSpace, dy: &FiniteMetricSpace) -> f64 {
    let diam = (dx.diameter() - dy.diameter()).abs();
    let mut ex = dx.eccentricities();
    let mut ey = dy.eccentricities();
    ex.sort_by(f64::total_cmp);
    ey.sort_by(f64::total_cmp);
    0.5 * diam.max(sorted_set_hausdorff(&ex, &ey))
}

fn sorted_set_hausdorff(a: &[f64], b: &[f64]) -> f64 {
    fn directed(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .map(|&x| {
                let pos = b.partition_point(|&y| y < x);
                let right = b.get(pos).map_or(f64::INFINITY, |&y| y - x);
                let left = pos.checked_sub(1).map_or(f64::INFINITY, |p| x - b[p]);
                right.min(left)
            })
            .fold(0.0, f64::max)
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    directed(a, b).max(directed(b, a))
}

/// Pairs every point with the point of the other space whose eccentricity
/// is closest; ties go to the nearest index.
pub fn eccentricity_correspondence(dx: &FiniteMetricSpace, dy: &FiniteMetricSpace) -> Correspondence {
    let (ex, ey) = (dx.eccentricities(), dy.eccentricities());
    let pick = |e: f64, i: usize, other: &[f64]| -> usize {
        (0..other.len())
            .min_by(|&a, &b| {
                let ka = ((e - other[a]).abs(), a.abs_diff(i));
                let kb = ((e - other[b]).abs(), b.abs_diff(i));
                ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(a.cmp(&b))
            })
            .expect("non-empty space")
    };
    let mut pairs: Vec<(usize, usize)> = (0..ex.len()).map(|i| (i, pick(ex[i], i, &ey))).collect();
    pairs.extend((0..ey.len()).map(|j| (pick(ey[j], j, &ex), j)));
    Correspondence::new(pairs)
}

/// Pairs every point with the point of the other space whose distances to
/// the given landmark pairs agree best (sup norm), ties to nearest index.
pub fn landmark_correspondence(
    dx: &FiniteMetricSpace,
    dy: &FiniteMetricSpace,
    landmarks: &[(usize, usize)],
) -> Correspondence {
    if landmarks.is_empty() {
        return eccentricity_correspondence(dx, dy);
    }
    let fx: Vec<Vec<f64>> = (0..dx.len())
        .map(|i| landmarks.iter().map(|&(l, _)| dx.d(i, l)).collect())
        .collect();
    let fy: Vec<Vec<f64>> = (0..dy.len())
        .map(|j| landmarks.iter().map(|&(_, l)| dy.d(j, l)).collect())
        .collect();
    let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let pick = |f: &[f64], i: usize, other: &[Vec<f64>]| -> usize {
        let mut best = (f64::INFINITY, usize::MAX, 0);
        for (j, g) in other.iter().enumerate() {
            let key = (gap(f, g), j.abs_diff(i), j);
            if key.0 < best.0 || (key.0 == best.0 && key.1 < best.1) {
                best = key;
            }
        }
        best.2
    };
    let mut pairs: Vec<(usize, usize)> = landmarks.to_vec();
    pairs.extend((0..fx.len()).map(|i| (i, pick(&fx[i], i, &fy))));
    pairs.extend((0..fy.len()).map(|j| (pick(&fy[j], j, &fx), j)));
    Correspondence::new(pairs)
}

/// Exact distance: half the minimum distortion, by branch and bound.
pub fn gh_exact(dx: &FiniteMetricSpace, dy: &FiniteMetricSpace, cap: usize) -> Result<f64> {
    Ok(gh_exact_with_witness(dx, dy, cap)?.0)
}

/// Exact distance together with a minimizing correspondence.
///
/// Every correspondence contains one of the form "graph of a map X → Y,
/// plus one partner for each Y point the map misses", and dropping pairs
/// never increases distortion, so searching that family is exhaustive. The
/// witness is the first minimizer in lexicographic search order.
pub fn gh_exact_with_witness(
    dx: &FiniteMetricSpace,
    dy: &FiniteMetricSpace,
    cap: usize,
) -> Result<(f64, Correspondence)> {
    let (nx, ny) = (dx.len(), dy.len());
    if nx > cap || ny > cap {
        return Err(Error::CapExceeded { x: nx, y: ny, cap });
    }
    if nx == 0 || ny == 0 {
        return Err(Error::EmptySubset);
    }
    let seed = eccentricity_correspondence(dx, dy);
    let mut search = Search {
        dx,
        dy,
        floor: 2.0 * gh_lower_bound(dx, dy),
        best: raw_distortion(dx, dy, &seed.pairs).next_up(),
        best_pairs: seed.pairs,
        pairs: Vec::with_capacity(nx + ny),
        covered: vec![0; ny],
        done: false,
    };
    search.assign_x(0, 0.0);
    let value = raw_distortion(dx, dy, &search.best_pairs);
    Ok((0.5 * value, Correspondence::new(search.best_pairs)))
}

struct Search<'a> {
    dx: &'a FiniteMetricSpace,
    dy: &'a FiniteMetricSpace,
    floor: f64,
    best: f64,
    best_pairs: Vec<(usize, usize)>,
    pairs: Vec<(usize, usize)>,
    covered: Vec<u32>,
    done: bool,
}

impl Search<'_> {
    fn cost_with(&self, i: usize, j: usize, current: f64) -> f64 {
        let (rx, ry) = (self.dx.row(i), self.dy.row(j));
        let mut worst = current;
        for &(i2, j2) in &self.pairs {
            worst = worst.max((rx[i2] - ry[j2]).abs());
            if worst >= self.best {
                break;
            }
        }
        worst
    }

    fn assign_x(&mut self, i: usize, current: f64) {
        if self.done {
            return;
        }
        if i == self.dx.len() {
            self.repair_y(0, current);
            return;
        }
        for j in 0..self.dy.len() {
            let cost = self.cost_with(i, j, current);
            if cost >= self.best {
                continue;
            }
            self.pairs.push((i, j));
            self.covered[j] += 1;
            self.assign_x(i + 1, cost);
            self.covered[j] -= 1;
            self.pairs.pop();
            if self.done {
                return;
            }
        }
    }

    fn repair_y(&mut self, j: usize, current: f64) {
        if self.done {
            return;
        }
        let Some(j) = (j..self.dy.len()).find(|&y| self.covered[y] == 0) else {
            self.best = current;
            self.best_pairs = self.pairs.clone();
            // nothing can beat the lower bound
            if current <= self.floor {
                self.done = true;
            }
            return;
        };
        for i in 0..self.dx.len() {
            let cost = self.cost_with(i, j, current);
            if cost >= self.best {
                continue;
            }
            self.pairs.push((i, j));
            self.covered[j] += 1;
            self.repair_y(j + 1, cost);
            self.covered[j] -= 1;
            self.pairs.pop();
            if self.done {
                return;
            }
        }
    }
}

/// Interval containing the distance between the continua of two trees.
///
/// Both trees are subdivided to resolution `eps`, so each vertex set is
/// within `eps / 2` of its continuum; the interval is widened by `eps` on
/// each side.
pub fn gh_tree_interval(t1: &MetricTree, t2: &MetricTree, eps: f64, cap: usize) -> Result<GhInterval> {
    gh_tree_interval_guided(t1, t2, eps, cap, &[])
}

/// Like [`gh_tree_interval`], but the upper bound may also use a
/// correspondence guided by known matching vertices (indices into the
/// unsubdivided trees, which subdivision preserves).
pub fn gh_tree_interval_guided(
    t1: &MetricTree,
    t2: &MetricTree,
    eps: f64,
    cap: usize,
    landmarks: &[(usize, usize)],
) -> Result<GhInterval> {
    let s1 = t1.subdivide(eps)?;
    let s2 = t2.subdivide(eps)?;
    let (m1, m2) = (s1.metric(), s2.metric());
    if m1.len() <= cap && m2.len() <= cap {
        let (value, witness) = gh_exact_with_witness(m1, m2, cap)?;
        return Ok(GhInterval {
            lo: (value - eps).max(0.0),
            hi: value + eps,
            lo_witness: "exact".into(),
            hi_witness: witness,
            eps,
            exact: true,
        });
    }
    let lower = gh_lower_bound(m1, m2);
    let mut best = eccentricity_correspondence(m1, m2);
    let mut best_val = raw_distortion(m1, m2, &best.pairs);
    if !landmarks.is_empty() {
        let guided = landmark_correspondence(m1, m2, landmarks);
        let val = raw_distortion(m1, m2, &guided.pairs);
        if val < best_val {
            best = guided;
            best_val = val;
        }
    }
    Ok(GhInterval {
        lo: (lower - eps).max(0.0),
        hi: 0.5 * best_val + eps,
        lo_witness: "eccentricity".into(),
        hi_witness: best,
        eps,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(p: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(vec![vec![0.0, p], vec![p, 0.0]]).unwrap()
    }

    fn one_point() -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(vec![vec![0.0]]).unwrap()
    }

    #[test]
    fn distortion_examples() {
        let x = two_point(1.0);
        assert_eq!(distortion(&x, &x, &Correspondence::identity(2)).unwrap(), 0.0);
        assert_eq!(distortion(&x, &two_point(2.0), &Correspondence::identity(2)).unwrap(), 1.0);
        let forced = Correspondence::new(vec![(0, 0), (1, 0)]);
        assert_eq!(distortion(&x, &one_point(), &forced).unwrap(), 1.0);
        let missing = Correspondence::new(vec![(0, 0)]);
        assert!(matches!(
            distortion(&x, &x, &missing),
            Err(Error::NotCovering { side: "first", index: 1 })
        ));
    }

    #[test]
    fn exact_examples() {
        let x = two_point(1.0);
        assert_eq!(gh_exact(&x, &x, 8).unwrap(), 0.0);
        assert_eq!(gh_exact(&two_point(1.0), &two_point(3.0), 8).unwrap(), 1.0);
        assert_eq!(gh_exact(&one_point(), &x, 8).unwrap(), 0.5);
        let big = FiniteMetricSpace::from_fn((0..9).map(|i| i.to_string()).collect(), |i, j| {
            (i as f64 - j as f64).abs()
        });
        assert!(matches!(gh_exact(&big, &x, 8), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn lower_bound_examples() {
        let x = two_point(1.0);
        assert_eq!(gh_lower_bound(&x, &x), 0.0);
        assert!(gh_lower_bound(&two_point(2.0), &x) >= 0.5);
        assert_eq!(gh_lower_bound(&one_point(), &x), 0.5);
    }

    #[test]
    fn upper_bound_examples() {
        let x = two_point(1.0);
        assert_eq!(gh_upper_bound(&x, &x, &Correspondence::identity(2)).unwrap(), 0.0);
        let y = two_point(2.5);
        let exact = gh_exact(&x, &y, 8).unwrap();
        let all = Correspondence::new(vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        for r in [Correspondence::identity(2), Correspondence::new(vec![(0, 1), (1, 0)]), all] {
            assert!(gh_upper_bound(&x, &y, &r).unwrap() >= exact);
        }
        assert!(gh_upper_bound(&x, &y, &Correspondence::new(vec![(0, 0)])).is_err());
    }

    #[test]
    fn witness_attains_the_value() {
        let x = FiniteMetricSpace::from_matrix(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ])
        .unwrap();
        let y = two_point(1.7);
        let (v, r) = gh_exact_with_witness(&x, &y, 8).unwrap();
        assert_eq!(0.5 * distortion(&x, &y, &r).unwrap(), v);
        let (v2, r2) = gh_exact_with_witness(&x, &y, 8).unwrap();
        assert_eq!((v, r), (v2, r2));
    }

    #[test]
    fn tree_interval_on_identical_and_segments() {
        let unit = MetricTree::from_edge_list(2, &[(0, 1, 1.0)]).unwrap();
        let iv = gh_tree_interval(&unit, &unit, 0.25, 8).unwrap();
        assert!(iv.exact);
        assert_eq!(iv.lo, 0.0);
        assert!(iv.hi <= 0.25);

        let two = MetricTree::from_edge_list(2, &[(0, 1, 2.0)]).unwrap();
        let iv = gh_tree_interval(&unit, &two, 0.25, 10).unwrap();
        assert!(iv.exact);
        assert!(iv.contains(0.5, 1e-12), "{iv:?}");

        let iv = gh_tree_interval(&unit, &two, 0.1, 8).unwrap();
        assert!(!iv.exact);
        assert!(iv.lo <= iv.hi);
        assert!(iv.contains(0.5, 1e-12));
    }

    #[test]
    fn tree_intervals_nest_under_refinement() {
        let a = MetricTree::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        let b = MetricTree::from_edge_list(2, &[(0, 1, 2.0)]).unwrap();
        let coarse = gh_tree_interval(&a, &b, 1.0, 8).unwrap();
        let fine = gh_tree_interval(&a, &b, 0.5, 8).unwrap();
        assert!(coarse.exact && fine.exact);
        assert!(fine.lo >= coarse.lo - 1e-9 && fine.hi <= coarse.hi + 1e-9);
    }
}
