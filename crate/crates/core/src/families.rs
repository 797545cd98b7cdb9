//! Parametrised tree families: comb trees over the unit square and star
//! trees with prescribed branch lengths.
//!
//! Comb points are written `(x, y)`: `x` is the spine coordinate and `y` the
//! height above the spine. Under [`comb_dist`] the square is itself a metric
//! tree, and each comb is a closed subtree of it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Edge, MetricTree, Vertex};

const PARAM_TOL: f64 = 1e-12;

/// Cut-off function: 1 up to `2^-(n+1)`, linear ramp down to 0 at `2^-n`.
pub fn c_fun(n: u32, s: f64) -> f64 {
    let lo = 0.5f64.powi(n as i32 + 1);
    let hi = 2.0 * lo;
    if s <= lo {
        1.0
    } else if s >= hi {
        0.0
    } else {
        (hi - s) / lo
    }
}

/// Comb metric on the unit square: vertical distance on a common fibre,
/// otherwise down, across and up.
pub fn comb_dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    let ((x, s), (y, t)) = (p, q);
    if x == y {
        (s - t).abs()
    } else {
        s + (x - y).abs() + t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombParams {
    pub s: f64,
    pub scale: f64,
    pub depth_cap: u32,
}

impl CombParams {
    pub fn new(s: f64, scale: f64, depth_cap: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParams(format!("comb parameter s = {s} outside [0, 1]")));
        }
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::InvalidParams(format!("comb scale {scale} outside (0, 1]")));
        }
        if depth_cap == 0 {
            return Err(Error::InvalidParams("comb depth cap must be positive".into()));
        }
        Ok(Self { s, scale, depth_cap })
    }

    /// Deepest generation with a tooth of positive length, if any.
    pub fn last_generation(&self) -> Option<u32> {
        if self.s <= 0.0 {
            return None;
        }
        (0..=self.depth_cap).take_while(|&n| c_fun(n, self.s) > 0.0).last()
    }

    /// Height of the tallest dropped tooth (already scaled). Zero unless the
    /// depth cap binds.
    pub fn truncation_error(&self) -> f64 {
        if self.s <= 0.0 {
            return 0.0;
        }
        self.scale * self.s * c_fun(self.depth_cap + 1, self.s)
    }
}

/// Points of a comb in unit-square coordinates with its edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct CombGeometry {
    pub points: Vec<(f64, f64)>,
    pub edges: Vec<(usize, usize)>,
    pub spine_len: usize,
}

/// Smallest generation whose dyadic grid contains `x`.
fn generation_of(x: f64, g: u32) -> u32 {
    (0..=g)
        .find(|&n| {
            let scaled = x * 2f64.powi(n as i32 + 1);
            scaled == scaled.round()
        })
        .unwrap_or(g)
}

pub fn comb_geometry(p: &CombParams) -> CombGeometry {
    let Some(g) = p.last_generation() else {
        return CombGeometry { points: vec![(0.0, 0.0), (1.0, 0.0)], edges: vec![(0, 1)], spine_len: 2 };
    };
    let steps = 1usize << (g + 1);
    let mut points: Vec<(f64, f64)> = (0..=steps).map(|m| (m as f64 / steps as f64, 0.0)).collect();
    let mut edges: Vec<(usize, usize)> = (0..steps).map(|m| (m, m + 1)).collect();
    for m in 0..=steps {
        let x = points[m].0;
        let h = p.s * c_fun(generation_of(x, g), p.s);
        if h > 0.0 {
            points.push((x, h));
            edges.push((m, points.len() - 1));
        }
    }
    CombGeometry { points, edges, spine_len: steps + 1 }
}

fn coord(x: f64) -> String {
    format!("{x}")
}

/// The comb tree: a spine of length `scale` with a tooth at every dyadic
/// point of each active generation. Spine vertices come first, ordered by
/// `x`, so vertex 0 is the left corner and `spine_len - 1` the right one.
pub fn comb_tree(p: &CombParams) -> MetricTree {
    let geo = comb_geometry(p);
    let vertices = geo
        .points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let label = if i < geo.spine_len {
                format!("spine:{}", coord(x))
            } else {
                format!("tooth:{}:{}", coord(x), coord(y))
            };
            Vertex::labelled(i as u64, label)
        })
        .collect();
    let edges = geo
        .edges
        .iter()
        .map(|&(a, b)| Edge::new(a, b, p.scale * comb_dist(geo.points[a], geo.points[b])))
        .collect();
    MetricTree::new(vertices, edges).expect("comb geometry is a tree")
}

/// An `eps`-dense sample of the comb in unit-square coordinates (distances
/// measured by `scale * comb_dist`).
pub fn comb_sample(p: &CombParams, eps: f64) -> Result<Vec<(f64, f64)>> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveResolution(eps));
    }
    let geo = comb_geometry(p);
    let mut out = geo.points.clone();
    for &(a, b) in &geo.edges {
        let (pa, pb) = (geo.points[a], geo.points[b]);
        let len = p.scale * comb_dist(pa, pb);
        let pieces = (len / eps).ceil().max(1.0) as usize;
        for k in 1..pieces {
            let t = k as f64 / pieces as f64;
            out.push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
        }
    }
    Ok(out)
}

/// Bound on the Hausdorff distance between combs at parameters `s` and `t`
/// inside the unit square: the largest change in tooth height.
pub fn comb_height_gap(s: f64, t: f64, generations: u32) -> f64 {
    (0..=generations)
        .map(|i| (s * c_fun(i, s) - t * c_fun(i, t)).abs())
        .fold(0.0, f64::max)
}

/// Dyadic band index `n` with `2^-(n+1) <= s < 2^-n`, for `s` in `(0, 1)`.
pub fn dyadic_band(s: f64) -> Option<u32> {
    if !(s > 0.0 && s < 1.0) {
        return None;
    }
    (0..1075).find(|&n| s >= 0.5f64.powi(n as i32 + 1))
}

/// Lower and upper ends of the admissible interval for the `i`-th
/// coordinate of a star parameter (`i >= 1`).
pub fn cube_interval(i: usize) -> (f64, f64) {
    let lo = 0.5f64.powi(2 * i as i32);
    (lo, 2.0 * lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarParams {
    /// Branch coefficients `a_1..a_N`; `a_0 = 1` is implicit.
    pub a: Vec<f64>,
    pub k: f64,
    pub eps: f64,
}

impl StarParams {
    pub fn new(a: Vec<f64>, k: f64, eps: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidParams("star needs at least one branch coefficient".into()));
        }
        for (idx, &ai) in a.iter().enumerate() {
            let (lo, hi) = cube_interval(idx + 1);
            if ai < lo - PARAM_TOL || ai > hi + PARAM_TOL {
                return Err(Error::InvalidParams(format!(
                    "a_{} = {ai} outside [{lo}, {hi}]",
                    idx + 1
                )));
            }
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidParams(format!("star scale {k} must be finite and nonnegative")));
        }
        if !(eps > 0.0) {
            return Err(Error::NonPositiveResolution(eps));
        }
        Ok(Self { a, k, eps })
    }

    pub fn branches(&self) -> usize {
        self.a.len()
    }

    /// Coefficient of branch `i`, with `a_0 = 1`.
    pub fn coeff(&self, i: usize) -> Result<f64> {
        match i {
            0 => Ok(1.0),
            _ if i <= self.a.len() => Ok(self.a[i - 1]),
            _ => Err(Error::BranchOutOfRange { index: i, max: self.a.len() }),
        }
    }
}

/// Scaled star metric between `(s, i)` and `(t, j)`. A zero parameter means
/// the center, whatever the branch index.
pub fn star_metric(p: &StarParams, (s, i): (f64, usize), (t, j): (f64, usize)) -> Result<f64> {
    let (ai, aj) = (p.coeff(i)?, p.coeff(j)?);
    let r = if i == j {
        ai * (s - t).abs()
    } else {
        // also covers s * t == 0: only the non-center term survives
        ai * s + aj * t
    };
    Ok(p.k * r)
}

/// Star tree with branches `0..=N` of lengths `k * a_i`, each split into
/// pieces no longer than `eps`. Vertex 0 is the center.
pub fn star_tree(p: &StarParams) -> MetricTree {
    let mut vertices = vec![Vertex::labelled(0, "center")];
    if p.k == 0.0 {
        return MetricTree::new(vertices, Vec::new()).expect("single vertex");
    }
    let mut edges = Vec::new();
    for i in 0..=p.branches() {
        let len = p.k * p.coeff(i).expect("branch in range");
        let pieces = (len / p.eps).ceil().max(1.0) as usize;
        let mut prev = 0;
        for step in 1..=pieces {
            let s = step as f64 / pieces as f64;
            let idx = vertices.len();
            vertices.push(Vertex::labelled(idx as u64, format!("branch:{i}:{}", coord(s))));
            edges.push(Edge::new(prev, idx, len / pieces as f64));
            prev = idx;
        }
    }
    MetricTree::new(vertices, edges).expect("star is a tree")
}

/// Sup distance between two truncated sequences.
pub fn tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Injective map from `[0,1]^2 x {1..m}` into truncated star parameters.
///
/// The first three coordinates carry `u1`, `u2` and `k`; the rest sit at
/// their interval midpoints.
pub fn rho_embed(u: (f64, f64), k: usize, m: usize, n: usize) -> Result<Vec<f64>> {
    if k == 0 || k > m {
        return Err(Error::InvalidBranch { k, m });
    }
    for c in [u.0, u.1] {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParams(format!("parameter coordinate {c} outside [0, 1]")));
        }
    }
    let kf = (k - 1) as f64 / (m.max(2) - 1) as f64;
    Ok((1..=n)
        .map(|i| {
            let base = cube_interval(i).0;
            match i {
                1 => base * (1.0 + u.0),
                2 => base * (1.0 + u.1),
                3 => base * (1.0 + kf),
                _ => 1.5 * base,
            }
        })
        .collect())
}

/// Inverse of [`rho_embed`] on its image: `(u1, u2, k)`.
pub fn rho_invert(a: &[f64], m: usize) -> Option<((f64, f64), usize)> {
    if a.len() < 3 {
        return None;
    }
    let u1 = a[0] / cube_interval(1).0 - 1.0;
    let u2 = a[1] / cube_interval(2).0 - 1.0;
    let kf = a[2] / cube_interval(3).0 - 1.0;
    let k = 1 + (kf * (m.max(2) - 1) as f64).round() as usize;
    Some(((u1, u2), k))
}
