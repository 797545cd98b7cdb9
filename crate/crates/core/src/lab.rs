//! Embedding a finite parameter grid into the space of metric trees.
//!
//! For a grid point `u` and branch `k`, [`build_f`] assembles a wedge sum of
//!
//! - each endpoint tree `X_i` with its degree-≤2 chunks replaced by combs
//!   of parameter `phi(u)`, cut down to the ball of radius `sigma_i(u)`
//!   around its basepoint, and
//! - a star tree scaled by `xi(u)` whose branch coefficients encode `(u, k)`,
//!   attached at the tip of its longest branch.
//!
//! At a marked point `v_i` the construction is `X_i` itself. Elsewhere the
//! star can be read back from the degree structure alone
//! ([`star_fingerprint`]), which is what makes the map injective.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{
    comb_height_gap, comb_tree, cube_interval, rho_embed, rho_invert, star_tree, tau, CombParams,
    StarParams,
};
use crate::gh::{gh_tree_interval_guided, DEFAULT_CAP};
use crate::io::TreeDocument;
use crate::metric::FiniteMetricSpace;
use crate::tree::{wedge_sum_with_map, MetricTree, ReplacementEntry, ReplacementPlan};
use crate::DEFAULT_TOL;

pub const DEFAULT_COMB_DEPTH: u32 = 12;
const MAX_LANDMARKS: usize = 32;

/// An endpoint tree with its wedge basepoint.
#[derive(Debug, Clone)]
pub struct Endpoint {
    pub tree: MetricTree,
    pub basepoint: usize,
}

#[derive(Debug, Clone)]
pub struct EmbedConfig {
    pub coords: Vec<(f64, f64)>,
    pub h: FiniteMetricSpace,
    pub marked: Vec<usize>,
    pub endpoints: Vec<Endpoint>,
    pub m: usize,
    pub star_branches: usize,
    pub eps: f64,
    pub tol: f64,
    pub comb_depth: u32,
}

impl EmbedConfig {
    /// Validates and assembles a configuration. `H` carries the Euclidean
    /// metric of the given coordinates.
    pub fn new(
        coords: Vec<(f64, f64)>,
        marked: Vec<usize>,
        endpoints: Vec<Endpoint>,
        m: usize,
        star_branches: usize,
        eps: f64,
    ) -> Result<Self> {
        let labels = (0..coords.len()).map(|i| format!("u{i}")).collect();
        let h = FiniteMetricSpace::from_fn(labels, |i, j| {
            (coords[i].0 - coords[j].0).hypot(coords[i].1 - coords[j].1)
        });
        let cfg = Self {
            coords,
            h,
            marked,
            endpoints,
            m,
            star_branches,
            eps,
            tol: DEFAULT_TOL,
            comb_depth: DEFAULT_COMB_DEPTH,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.marked.len() < 2 {
            return bad("need at least two marked points".into());
        }
        if self.marked.len() != self.endpoints.len() {
            return bad(format!(
                "{} marked points but {} endpoint trees",
                self.marked.len(),
                self.endpoints.len()
            ));
        }
        for (i, &v) in self.marked.iter().enumerate() {
            if v >= self.h.len() {
                return Err(Error::IndexOutOfRange { index: v, len: self.h.len() });
            }
            if self.marked[..i].contains(&v) {
                return bad(format!("marked point {v} listed twice"));
            }
        }
        if !(self.h.diameter() > 0.0) {
            return bad("parameter space has zero diameter".into());
        }
        if self.coords.iter().any(|&(a, b)| !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b)) {
            return bad("parameter coordinates must lie in [0, 1]^2".into());
        }
        if self.m == 0 {
            return bad("branch count m must be positive".into());
        }
        if self.star_branches < 3 {
            return bad("star needs at least three coded branches".into());
        }
        if !(self.eps > 0.0) {
            return Err(Error::NonPositiveResolution(self.eps));
        }
        for (i, e) in self.endpoints.iter().enumerate() {
            if e.basepoint >= e.tree.len() {
                return Err(Error::IndexOutOfRange { index: e.basepoint, len: e.tree.len() });
            }
            if e.tree.degree(e.basepoint) == 2 {
                return bad(format!("basepoint of endpoint {i} must not have degree two"));
            }
            let defect = e.tree.metric().four_point_defect();
            if defect > self.tol {
                return bad(format!("endpoint {i} has four-point defect {defect}"));
            }
        }
        Ok(())
    }

    /// Index of the marked point equal to `u`, if any.
    pub fn marked_index(&self, u: usize) -> Option<usize> {
        self.marked.iter().position(|&v| v == u)
    }

    /// Points of `H` that are not marked.
    pub fn free_points(&self) -> Vec<usize> {
        (0..self.h.len()).filter(|&u| self.marked_index(u).is_none()).collect()
    }
}

/// The scalar fields at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarFields {
    /// Ball radii, one per endpoint; `f64::INFINITY` means the whole tree.
    pub sigma: Vec<f64>,
    pub phi: f64,
    pub xi: f64,
}

pub fn scalar_fields(cfg: &EmbedConfig, u: usize) -> Result<ScalarFields> {
    if u >= cfg.h.len() {
        return Err(Error::IndexOutOfRange { index: u, len: cfg.h.len() });
    }
    let dists: Vec<f64> = cfg.marked.iter().map(|&v| cfg.h.d(u, v)).collect();
    let sigma = (0..dists.len())
        .map(|i| {
            let others = dists
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &d)| d)
                .fold(f64::INFINITY, f64::min);
            if others == 0.0 {
                0.0
            } else if dists[i] == 0.0 {
                f64::INFINITY
            } else {
                others / dists[i]
            }
        })
        .collect();
    let nearest = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let phi = nearest / (2.0 * cfg.h.diameter());
    Ok(ScalarFields { sigma, phi, xi: 32.0 * phi })
}

/// `X` with every degree-≤2 chunk replaced by a comb of parameter `s`
/// scaled to the chunk length. Labels are prefixed with `prefix`.
pub fn replaced_tree(x: &MetricTree, s: f64, depth: u32, prefix: &str) -> Result<MetricTree> {
    let dec = x.decompose_deg2();
    let host = dec.tree.map_labels(|i, _| Some(format!("{prefix}v{}", dec.tree.vertices()[i].id)));
    let mut entries = Vec::new();
    for (l, seg) in dec.segments.iter().enumerate() {
        if seg.length <= 0.0 {
            continue;
        }
        let comb = comb_tree(&CombParams::new(s, seg.length.min(1.0), depth)?);
        let beta = comb
            .index_of_label("spine:1")
            .expect("comb has a right corner");
        let comb = comb.map_labels(|_, label| label.map(|t| format!("{prefix}seg{l}/{t}")));
        entries.push(ReplacementEntry { a: seg.start, b: seg.end, tree: comb, alpha: 0, beta });
    }
    host.replace_edges(&ReplacementPlan::new(entries))
}

/// Labels of the star part of an assembled tree.
pub const STAR_CENTER: &str = "star/center";

/// Assembles `F(u, k)`.
pub fn build_f(cfg: &EmbedConfig, u: usize, k: usize) -> Result<MetricTree> {
    if k == 0 || k > cfg.m {
        return Err(Error::InvalidBranch { k, m: cfg.m });
    }
    if let Some(i) = cfg.marked_index(u) {
        return Ok(cfg.endpoints[i].tree.clone());
    }
    let fields = scalar_fields(cfg, u)?;
    let mut parts = Vec::with_capacity(cfg.endpoints.len() + 1);
    for (i, e) in cfg.endpoints.iter().enumerate() {
        let y = replaced_tree(&e.tree, fields.phi, cfg.comb_depth, &format!("x{i}/"))?;
        let base_id = e.tree.vertices()[e.basepoint].id;
        let p = y.index_of(base_id).expect("basepoints survive replacement");
        let z = y.closed_ball_subtree(p, fields.sigma[i])?;
        let p = z.index_of(base_id).expect("ball contains its center");
        parts.push((z, p));
    }
    let a = rho_embed(cfg.coords[u], k, cfg.m, cfg.star_branches)?;
    let star = star_tree(&StarParams::new(a, fields.xi, cfg.eps)?)
        .map_labels(|_, label| label.map(|t| format!("star/{t}")));
    let tip = star.index_of_label("star/branch:0:1").expect("star has branch 0");
    parts.push((star, tip));
    let refs: Vec<(&MetricTree, usize)> = parts.iter().map(|(t, p)| (t, *p)).collect();
    Ok(wedge_sum_with_map(&refs)?.tree)
}

/// Star parameters recovered from the degree structure of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub xi: f64,
    pub a: Vec<f64>,
    /// Gap separating the two longest components from each other and from
    /// the rest.
    pub margin: f64,
    pub center: usize,
}

/// Finds the star inside a tree: its two longest degree-≤2 components must
/// be unique, meet at a common branch vertex (the star center), and leave a
/// positive gap to everything else.
pub fn star_fingerprint(t: &MetricTree, tol: f64) -> Result<Fingerprint> {
    let mut comps = t.deg2_components();
    comps.sort_by(|a, b| b.closure_diameter.total_cmp(&a.closure_diameter));
    if comps.len() < 2 {
        return Err(Error::NoCertifiedStar("fewer than two degree-two components".into()));
    }
    let (l1, l2) = (comps[0].closure_diameter, comps[1].closure_diameter);
    let l3 = comps.get(2).map_or(0.0, |c| c.closure_diameter);
    if l1 - l2 <= tol {
        return Err(Error::AmbiguousStar);
    }
    let margin = (l1 - l2).min(l2 - l3);
    if margin <= tol {
        return Err(Error::NoCertifiedStar(format!("second component not separated (margin {margin})")));
    }
    let center = comps[0]
        .delimiters
        .iter()
        .copied()
        .find(|d| comps[1].delimiters.contains(d))
        .ok_or_else(|| Error::NoCertifiedStar("two longest components do not meet".into()))?;
    let xi = l1;
    let mut branches: Vec<f64> = comps[1..]
        .iter()
        .filter(|c| c.delimiters.contains(&center))
        .map(|c| c.closure_diameter / xi)
        .collect();
    branches.sort_by(|a, b| b.total_cmp(a));
    for (i, &ai) in branches.iter().enumerate() {
        let (lo, hi) = cube_interval(i + 1);
        if ai < lo - tol || ai > hi + tol {
            return Err(Error::NoCertifiedStar(format!("branch {} ratio {ai} outside [{lo}, {hi}]", i + 1)));
        }
    }
    Ok(Fingerprint { xi, a: branches, margin, center })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityRow {
    pub u: usize,
    pub u1: f64,
    pub u2: f64,
    pub k: usize,
    pub xi: f64,
    pub a: Vec<f64>,
    pub margin: f64,
    /// Sup-distance between the recovered coefficients and the encoded ones.
    pub rho_error: f64,
    pub recovered_u: (f64, f64),
    pub recovered_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub rows: Vec<InjectivityRow>,
    /// Row index pairs whose fingerprints coincide.
    pub collisions: Vec<(usize, usize)>,
    pub min_separation: f64,
    /// Smallest branch whose fingerprints avoid every endpoint tree.
    pub k_star: Option<usize>,
    /// Endpoints that carry a certified star of their own.
    pub endpoint_fingerprints: Vec<Option<Fingerprint>>,
}

fn same_fingerprint(a: &Fingerprint, b: &Fingerprint, tol: f64) -> bool {
    a.a.len() == b.a.len()
        && (a.xi - b.xi).abs() <= tol
        && tau(&a.a, &b.a).is_ok_and(|t| t <= tol)
}

/// Fingerprints every `(u, k)` cell and checks they are pairwise distinct.
pub fn injectivity_scan(cfg: &EmbedConfig, cells: &[(usize, usize)]) -> Result<InjectivityReport> {
    let mut prints = Vec::with_capacity(cells.len());
    let mut rows = Vec::with_capacity(cells.len());
    for &(u, k) in cells {
        if cfg.marked_index(u).is_some() {
            return Err(Error::Precondition(format!("grid point {u} is a marked point")));
        }
        let f = star_fingerprint(&build_f(cfg, u, k)?, cfg.tol)?;
        let encoded = rho_embed(cfg.coords[u], k, cfg.m, cfg.star_branches)?;
        let n = encoded.len().min(f.a.len());
        let rho_error = if f.a.len() == encoded.len() {
            tau(&f.a[..n], &encoded[..n])?
        } else {
            f64::INFINITY
        };
        let (recovered_u, recovered_k) = rho_invert(&f.a, cfg.m).unwrap_or(((f64::NAN, f64::NAN), 0));
        rows.push(InjectivityRow {
            u,
            u1: cfg.coords[u].0,
            u2: cfg.coords[u].1,
            k,
            xi: f.xi,
            a: f.a.clone(),
            margin: f.margin,
            rho_error,
            recovered_u,
            recovered_k,
        });
        prints.push(f);
    }
    let mut collisions = Vec::new();
    let mut min_separation = f64::INFINITY;
    for i in 0..prints.len() {
        for j in i + 1..prints.len() {
            let sep = tau(&prints[i].a, &prints[j].a).unwrap_or(f64::INFINITY);
            min_separation = min_separation.min(sep);
            if same_fingerprint(&prints[i], &prints[j], cfg.tol) {
                collisions.push((i, j));
            }
        }
    }
    let endpoint_fingerprints: Vec<Option<Fingerprint>> = cfg
        .endpoints
        .iter()
        .map(|e| star_fingerprint(&e.tree, cfg.tol).ok())
        .collect();
    let k_star = (1..=cfg.m).find(|&k| {
        cells.iter().zip(&prints).filter(|((_, kk), _)| *kk == k).all(|(_, f)| {
            endpoint_fingerprints
                .iter()
                .flatten()
                .all(|e| !same_fingerprint(e, f, cfg.tol))
        })
    });
    Ok(InjectivityReport { rows, collisions, min_separation, k_star, endpoint_fingerprints })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub u: usize,
    pub u_prime: usize,
    pub u1: f64,
    pub u2: f64,
    pub k: usize,
    pub bound: f64,
    pub lo: f64,
    pub hi: f64,
    /// `bound + 2 eps + tol - hi`; nonnegative when the check passes.
    pub margin: f64,
    pub ok: bool,
}

/// Analytic bound on the distance between `F(u, k)` and `F(u', k)`,
/// assembled from the comb, ball and star moduli.
pub fn continuity_bound(cfg: &EmbedConfig, u: usize, up: usize, k: usize) -> Result<f64> {
    let (f, g) = (scalar_fields(cfg, u)?, scalar_fields(cfg, up)?);
    let gens = cfg.comb_depth + 1;
    let trunc = |s: f64| CombParams::new(s, 1.0, cfg.comb_depth).map_or(0.0, |p| p.truncation_error());
    let comb = comb_height_gap(f.phi, g.phi, gens) + trunc(f.phi) + trunc(g.phi);
    let mut distortions = Vec::with_capacity(cfg.endpoints.len() + 1);
    for (i, e) in cfg.endpoints.iter().enumerate() {
        let reach = e.tree.metric().row(e.basepoint).iter().copied().fold(0.0, f64::max)
            + f.phi.max(g.phi);
        let (r, rp) = (f.sigma[i].min(reach), g.sigma[i].min(reach));
        distortions.push(2.0 * ((r - rp).abs() + 2.0 * comb));
    }
    let a = rho_embed(cfg.coords[u], k, cfg.m, cfg.star_branches)?;
    let b = rho_embed(cfg.coords[up], k, cfg.m, cfg.star_branches)?;
    distortions.push(1.5 * (f.xi - g.xi).abs() + 2.0 * f.xi.max(g.xi) * tau(&a, &b)?);
    distortions.sort_by(|x, y| y.total_cmp(x));
    Ok(0.5 * (distortions[0] + distortions.get(1).copied().unwrap_or(0.0)))
}

/// Vertex pairs whose labels occur exactly once in each tree, thinned to
/// at most `max` evenly spaced pairs.
pub fn shared_landmarks(t1: &MetricTree, t2: &MetricTree, max: usize) -> Vec<(usize, usize)> {
    fn unique(t: &MetricTree) -> HashMap<&str, Option<usize>> {
        let mut m: HashMap<&str, Option<usize>> = HashMap::new();
        for (i, v) in t.vertices().iter().enumerate() {
            if let Some(l) = v.label.as_deref() {
                m.entry(l).and_modify(|e| *e = None).or_insert(Some(i));
            }
        }
        m
    }
    let u2 = unique(t2);
    let all: Vec<(usize, usize)> = t1
        .vertices()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let l = v.label.as_deref()?;
            let j = (*u2.get(l)?)?;
            (t1.vertices().iter().filter(|w| w.label.as_deref() == Some(l)).count() == 1).then_some((i, j))
        })
        .collect();
    if all.len() <= max || max == 0 {
        return all;
    }
    (0..max).map(|k| all[k * all.len() / max]).collect()
}

/// Compares `F(u, k)` with `F(u', k)` for each listed pair.
pub fn continuity_scan(cfg: &EmbedConfig, pairs: &[(usize, usize)], k: usize) -> Result<Vec<ContinuityRow>> {
    pairs
        .iter()
        .map(|&(u, up)| {
            for p in [u, up] {
                if cfg.marked_index(p).is_some() {
                    return Err(Error::Precondition(format!("grid point {p} is a marked point")));
                }
            }
            let (t1, t2) = (build_f(cfg, u, k)?, build_f(cfg, up, k)?);
            let marks = shared_landmarks(&t1, &t2, MAX_LANDMARKS);
            let iv = gh_tree_interval_guided(&t1, &t2, cfg.eps, DEFAULT_CAP, &marks)?;
            let bound = continuity_bound(cfg, u, up, k)?;
            let margin = bound + 2.0 * cfg.eps + cfg.tol - iv.hi;
            Ok(ContinuityRow {
                u,
                u_prime: up,
                u1: cfg.coords[u].0,
                u2: cfg.coords[u].1,
                k,
                bound,
                lo: iv.lo,
                hi: iv.hi,
                margin,
                ok: margin >= 0.0,
            })
        })
        .collect()
}

/// Pairs of free grid points at the smallest positive distance.
pub fn grid_neighbors(cfg: &EmbedConfig) -> Vec<(usize, usize)> {
    let free = cfg.free_points();
    let mut step = f64::INFINITY;
    for (i, &a) in free.iter().enumerate() {
        for &b in &free[i + 1..] {
            let d = cfg.h.d(a, b);
            if d > 0.0 {
                step = step.min(d);
            }
        }
    }
    let mut out = Vec::new();
    for (i, &a) in free.iter().enumerate() {
        for &b in &free[i + 1..] {
            if cfg.h.d(a, b) <= step * (1.0 + 1e-9) {
                out.push((a, b));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct PathStep {
    pub s: f64,
    pub tree: MetricTree,
    /// Upper end of the interval to the previous step.
    pub hi: Option<f64>,
    /// Comb-height bound to the previous step.
    pub bound: Option<f64>,
}

/// The path `s ↦ Y(s)` of comb replacements of `X`, with distances between
/// consecutive steps.
pub fn replacement_path(x: &MetricTree, s_grid: &[f64], eps: f64) -> Result<Vec<PathStep>> {
    if s_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("s grid must be sorted".into()));
    }
    let depth = DEFAULT_COMB_DEPTH;
    let trunc = |s: f64| CombParams::new(s, 1.0, depth).map_or(0.0, |p| p.truncation_error());
    let mut out: Vec<PathStep> = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let tree = replaced_tree(x, s, depth, "")?;
        let (hi, bound) = match out.last() {
            Some(prev) => {
                let marks = shared_landmarks(&prev.tree, &tree, MAX_LANDMARKS);
                let iv = gh_tree_interval_guided(&prev.tree, &tree, eps, DEFAULT_CAP, &marks)?;
                let b = comb_height_gap(prev.s, s, depth + 1) + trunc(prev.s) + trunc(s);
                (Some(iv.hi), Some(b))
            }
            None => (None, None),
        };
        out.push(PathStep { s, tree, hi, bound });
    }
    Ok(out)
}

/// Serialized form of an [`EmbedConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    /// Appends an `n x n` grid of cell centers after `points`.
    #[serde(default)]
    pub grid_side: Option<usize>,
    pub marked: Vec<usize>,
    pub endpoints: Vec<EndpointFile>,
    pub m: usize,
    pub star_branches: usize,
    pub eps: f64,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub comb_depth: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointFile {
    pub tree: TreeDocument,
    /// Vertex id of the basepoint.
    pub basepoint: u64,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn into_config(self) -> Result<EmbedConfig> {
        let mut coords: Vec<(f64, f64)> = self.points.iter().map(|p| (p[0], p[1])).collect();
        if let Some(n) = self.grid_side {
            for i in 0..n {
                for j in 0..n {
                    coords.push(((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64));
                }
            }
        }
        let endpoints = self
            .endpoints
            .iter()
            .map(|e| {
                let tree = e.tree.to_tree()?;
                let basepoint = tree.index_of(e.basepoint).ok_or(Error::UnknownVertex(e.basepoint))?;
                Ok(Endpoint { tree, basepoint })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cfg = EmbedConfig::new(coords, self.marked, endpoints, self.m, self.star_branches, self.eps)?;
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if let Some(d) = self.comb_depth {
            cfg.comb_depth = d;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gh::gh_tree_interval;

    fn endpoints() -> Vec<Endpoint> {
        let seg = MetricTree::from_edge_list(2, &[(0, 1, 1.5)]).unwrap();
        let star = MetricTree::from_edge_list(4, &[(0, 1, 0.5), (0, 2, 0.7), (0, 3, 0.9)]).unwrap();
        vec![Endpoint { tree: seg, basepoint: 0 }, Endpoint { tree: star, basepoint: 0 }]
    }

    fn config(side: usize, m: usize, eps: f64) -> EmbedConfig {
        let mut coords = vec![(0.0, 0.0), (1.0, 1.0)];
        for i in 0..side {
            for j in 0..side {
                coords.push(((i as f64 + 0.5) / side as f64, (j as f64 + 0.5) / side as f64));
            }
        }
        EmbedConfig::new(coords, vec![0, 1], endpoints(), m, 4, eps).unwrap()
    }

    #[test]
    fn scalar_fields_at_marked_points() {
        let cfg = config(2, 2, 0.25);
        let f = scalar_fields(&cfg, 0).unwrap();
        assert_eq!(f.sigma, vec![f64::INFINITY, 0.0]);
        assert_eq!((f.phi, f.xi), (0.0, 0.0));
        for u in cfg.free_points() {
            let f = scalar_fields(&cfg, u).unwrap();
            assert!(f.phi > 0.0 && f.phi <= 0.5);
            assert!(f.sigma.iter().all(|s| s.is_finite() && *s > 0.0));
        }
    }

    #[test]
    fn scalar_fields_at_equidistant_point() {
        // v1, v2 at distance 2D apart; u in the middle; diam H = 2D
        let coords = vec![(0.0, 0.5), (1.0, 0.5), (0.5, 0.5)];
        let cfg = EmbedConfig::new(coords, vec![0, 1], endpoints(), 2, 4, 0.25).unwrap();
        let f = scalar_fields(&cfg, 2).unwrap();
        assert_eq!(f.phi, 0.25);
        assert_eq!(f.xi, 8.0);
        assert_eq!(f.sigma, vec![1.0, 1.0]);
    }

    #[test]
    fn build_f_at_marked_point_is_the_endpoint() {
        let cfg = config(2, 2, 0.25);
        for (i, &v) in cfg.marked.iter().enumerate() {
            for k in 1..=cfg.m {
                let t = build_f(&cfg, v, k).unwrap();
                assert_eq!(t.metric().rows(), cfg.endpoints[i].tree.metric().rows());
            }
        }
        assert_eq!(build_f(&cfg, 2, 3).unwrap_err(), Error::InvalidBranch { k: 3, m: 2 });
    }

    #[test]
    fn build_f_generic_point() {
        let cfg = config(2, 2, 0.5);
        for u in cfg.free_points() {
            let f = scalar_fields(&cfg, u).unwrap();
            let t = build_f(&cfg, u, 2).unwrap();
            assert!(t.metric().four_point_defect() <= 1e-9, "u={u}");
            let center = t.index_of_label(STAR_CENTER).unwrap();
            let p = t.index_of_label("x0/v0").unwrap();
            assert!((t.d(center, p) - f.xi).abs() < 1e-9);
            let a = rho_embed(cfg.coords[u], 2, cfg.m, cfg.star_branches).unwrap();
            for (i, ai) in a.iter().enumerate() {
                let tip = t.index_of_label(&format!("star/branch:{}:1", i + 1)).unwrap();
                assert!((t.d(p, tip) - f.xi * (1.0 + ai)).abs() < 1e-9);
                assert!((t.d(center, tip) - f.xi * ai).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fingerprint_roundtrip_on_raw_star() {
        let a = vec![0.3, 0.1, 0.02, 0.006];
        let t = star_tree(&StarParams::new(a.clone(), 3.5, 0.3).unwrap());
        let f = star_fingerprint(&t, 1e-9).unwrap();
        assert!((f.xi - 3.5).abs() < 1e-9);
        assert!(tau(&f.a, &a).unwrap() < 1e-9);
        assert_eq!(f.center, 0);
    }

    #[test]
    fn fingerprint_of_build_f_recovers_rho() {
        let cfg = config(2, 3, 0.25);
        for u in cfg.free_points() {
            for k in 1..=3 {
                let f = star_fingerprint(&build_f(&cfg, u, k).unwrap(), 1e-9).unwrap();
                let a = rho_embed(cfg.coords[u], k, 3, 4).unwrap();
                assert!(tau(&f.a, &a).unwrap() < 1e-6);
                assert!((f.xi - scalar_fields(&cfg, u).unwrap().xi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fingerprint_errors() {
        let seg = MetricTree::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(star_fingerprint(&seg, 1e-9), Err(Error::NoCertifiedStar(_))));
        let even = MetricTree::from_edge_list(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 0.5)]).unwrap();
        assert_eq!(star_fingerprint(&even, 1e-9).unwrap_err(), Error::AmbiguousStar);
    }

    #[test]
    fn injectivity_on_small_grid() {
        let cfg = config(2, 2, 0.5);
        let cells: Vec<(usize, usize)> =
            cfg.free_points().into_iter().flat_map(|u| (1..=2).map(move |k| (u, k))).collect();
        let report = injectivity_scan(&cfg, &cells).unwrap();
        assert_eq!(report.rows.len(), 8);
        assert!(report.collisions.is_empty());
        assert!(report.min_separation > 0.0);
        assert_eq!(report.k_star, Some(1));
        for r in &report.rows {
            assert!(r.rho_error < 1e-6);
            assert_eq!(r.recovered_k, r.k);
        }
    }

    #[test]
    fn injectivity_flags_duplicates_and_marked_points() {
        let cfg = config(2, 2, 0.5);
        let report = injectivity_scan(&cfg, &[(2, 1), (2, 1)]).unwrap();
        assert_eq!(report.collisions, vec![(0, 1)]);
        assert!(matches!(injectivity_scan(&cfg, &[(0, 1)]), Err(Error::Precondition(_))));
    }

    #[test]
    fn endpoint_identity_interval() {
        let cfg = config(2, 2, 0.125);
        for (i, &v) in cfg.marked.iter().enumerate() {
            let iv = gh_tree_interval(&build_f(&cfg, v, 1).unwrap(), &cfg.endpoints[i].tree, 0.125, 8).unwrap();
            assert_eq!(iv.lo, 0.0);
            assert!(iv.hi <= 0.25);
        }
    }

    #[test]
    fn continuity_scan_respects_bounds() {
        let cfg = config(4, 2, 0.125);
        let mut pairs = grid_neighbors(&cfg);
        pairs.truncate(6);
        pairs.push((5, 5));
        let rows = continuity_scan(&cfg, &pairs, 1).unwrap();
        for r in &rows {
            assert!(r.ok, "{r:?}");
            assert!(r.lo <= r.hi);
        }
        let same = rows.last().unwrap();
        assert!(same.hi <= 2.0 * cfg.eps);
    }

    #[test]
    fn continuity_bound_shrinks_with_spacing() {
        let mut coords = vec![(0.0, 0.0), (1.0, 1.0)];
        for h in [0.08, 0.04, 0.02, 0.01] {
            coords.push((0.4, 0.6));
            coords.push((0.4 + h, 0.6));
        }
        let cfg = EmbedConfig::new(coords, vec![0, 1], endpoints(), 2, 4, 0.1).unwrap();
        let bounds: Vec<f64> = (0..4)
            .map(|i| continuity_bound(&cfg, 2 + 2 * i, 3 + 2 * i, 1).unwrap())
            .collect();
        for w in bounds.windows(2) {
            assert!(w[1] < w[0]);
            assert!(w[1] <= 0.5 * w[0] * (1.0 + 1e-9), "{bounds:?}");
        }
    }

    #[test]
    fn replacement_path_starts_at_x() {
        let x = MetricTree::from_edge_list(4, &[(0, 1, 0.8), (1, 2, 1.3), (1, 3, 0.4)]).unwrap();
        let grid = [0.0, 0.3, 0.31, 0.31];
        let path = replacement_path(&x, &grid, 0.125).unwrap();
        let y0 = &path[0].tree;
        for a in 0..x.len() {
            for b in 0..x.len() {
                let (ia, ib) = (y0.index_of(a as u64).unwrap(), y0.index_of(b as u64).unwrap());
                assert!((y0.d(ia, ib) - x.d(a, b)).abs() < 1e-12);
            }
        }
        for step in &path[1..] {
            let (hi, bound) = (step.hi.unwrap(), step.bound.unwrap());
            assert!(hi <= bound + 2.0 * 0.125 + 1e-9, "s={} hi={hi} bound={bound}", step.s);
            assert!(step.tree.metric().four_point_defect() <= 1e-9);
        }
        assert!(path[3].hi.unwrap() <= 2.0 * 0.125);
        assert!(replacement_path(&x, &[0.5, 0.1], 0.1).is_err());
    }

    #[test]
    fn config_file_roundtrip() {
        let seg = TreeDocument::from_tree(&endpoints()[0].tree, Default::default());
        let star = TreeDocument::from_tree(&endpoints()[1].tree, Default::default());
        let file = ConfigFile {
            points: vec![[0.0, 0.0], [1.0, 1.0]],
            grid_side: Some(3),
            marked: vec![0, 1],
            endpoints: vec![
                EndpointFile { tree: seg, basepoint: 0 },
                EndpointFile { tree: star, basepoint: 0 },
            ],
            m: 3,
            star_branches: 4,
            eps: 0.25,
            tol: None,
            comb_depth: None,
        };
        let text = serde_json::to_string(&file).unwrap();
        let cfg = ConfigFile::parse(&text).unwrap().into_config().unwrap();
        assert_eq!(cfg.h.len(), 11);
        assert_eq!(cfg.free_points().len(), 9);
    }

    #[test]
    fn config_rejects_bad_inputs() {
        let coords = vec![(0.0, 0.0), (1.0, 1.0)];
        assert!(EmbedConfig::new(coords.clone(), vec![0, 0], endpoints(), 2, 4, 0.1).is_err());
        assert!(EmbedConfig::new(coords.clone(), vec![0, 1], endpoints(), 2, 2, 0.1).is_err());
        let mut eps = endpoints();
        eps[0] = Endpoint {
            tree: MetricTree::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap(),
            basepoint: 1,
        };
        assert!(EmbedConfig::new(coords, vec![0, 1], eps, 2, 4, 0.1).is_err());
    }
}
