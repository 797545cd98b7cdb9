//! Finite weighted trees with cached path metrics.
//!
//! A [`MetricTree`] is the combinatorial model of a compact metric tree: its
//! underlying continuum is the union of the edges, and a point of that
//! continuum is only addressable once a vertex has been inserted there (by
//! [`MetricTree::subdivide`], a ball cut, or a decomposition cut).
//!
//! Vertices are addressed by index. Every vertex also carries a stable `id`
//! (preserved by operations that keep the vertex) and an optional label.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Vertex {
    pub fn new(id: u64) -> Self {
        Self { id, label: None }
    }

    pub fn labelled(id: u64, label: impl Into<String>) -> Self {
        Self { id, label: Some(label.into()) }
    }
}

/// An edge between two vertex indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub len: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, len: f64) -> Self {
        Self { a, b, len }
    }
}

#[derive(Debug, Clone)]
pub struct MetricTree {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    dist: FiniteMetricSpace,
}

/// A connected component of the set of points of degree at most two.
///
/// Components are open at branch points: a branch vertex never belongs to a
/// component but may delimit one. An edge joining two branch vertices is a
/// component with no vertices of its own.
#[derive(Debug, Clone, PartialEq)]
pub struct Deg2Component {
    pub vertices: Vec<usize>,
    pub delimiters: Vec<usize>,
    /// Path through the closure, from one end to the other.
    pub closure_path: Vec<usize>,
    pub closure_diameter: f64,
}

/// A closed sub-path of length at most one produced by
/// [`MetricTree::decompose_deg2`].
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub path: Vec<usize>,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// The input tree with cut vertices inserted at chunk boundaries.
    pub tree: MetricTree,
    pub segments: Vec<Segment>,
}

/// One edge replacement: the geodesic `[a, b]` of the host is swapped for
/// `tree`, gluing `alpha` to `a` and `beta` to `b`.
#[derive(Debug, Clone)]
pub struct ReplacementEntry {
    pub a: usize,
    pub b: usize,
    pub tree: MetricTree,
    pub alpha: usize,
    pub beta: usize,
}

#[derive(Debug, Clone)]
pub struct ReplacementPlan {
    pub entries: Vec<ReplacementEntry>,
    pub tol: f64,
}

impl ReplacementPlan {
    pub fn new(entries: Vec<ReplacementEntry>) -> Self {
        Self { entries, tol: DEFAULT_TOL }
    }
}

/// Result of a wedge sum together with where each part's vertices landed.
#[derive(Debug, Clone)]
pub struct Wedge {
    pub tree: MetricTree,
    /// `maps[i][v]` is the index in `tree` of vertex `v` of part `i`.
    pub maps: Vec<Vec<usize>>,
    pub wedge_point: usize,
}

/// Builds a validated tree from vertices and index-based edges.
pub fn tree_from_edges(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<MetricTree> {
    MetricTree::new(vertices, edges)
}

impl MetricTree {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        let n = vertices.len();
        if n == 0 {
            return Err(Error::EmptyTree);
        }
        let mut seen = HashSet::with_capacity(n);
        for v in &vertices {
            if !seen.insert(v.id) {
                return Err(Error::DuplicateVertex(v.id));
            }
        }
        let mut uf = UnionFind::new(n);
        let mut adj = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            for idx in [e.a, e.b] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, len: n });
                }
            }
            let (ia, ib) = (vertices[e.a].id, vertices[e.b].id);
            if !(e.len > 0.0) || !e.len.is_finite() {
                return Err(Error::NonPositiveLength { a: ia, b: ib, len: e.len });
            }
            if !uf.union(e.a, e.b) {
                return Err(Error::Cycle { a: ia, b: ib });
            }
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        if edges.len() + 1 != n {
            let root = uf.find(0);
            let lost = (0..n).find(|&v| uf.find(v) != root).unwrap_or(0);
            return Err(Error::Disconnected(vertices[lost].id));
        }
        let dist = all_pairs(&vertices, &edges, &adj);
        Ok(Self { vertices, edges, adj, dist })
    }

    /// Convenience constructor with ids `0..n` and no labels.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let vertices = (0..n as u64).map(Vertex::new).collect();
        let edges = edges.iter().map(|&(a, b, len)| Edge::new(a, b, len)).collect();
        Self::new(vertices, edges)
    }

    /// A single vertex.
    pub fn point() -> Self {
        Self::new(vec![Vertex::new(0)], Vec::new()).expect("one vertex is a tree")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn metric(&self) -> &FiniteMetricSpace {
        &self.dist
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist.d(i, j)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(w, _)| w)
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.label.as_deref() == Some(label))
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.vertices[v].label.as_deref()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.len).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.len).fold(0.0, f64::max)
    }

    fn next_id(&self) -> u64 {
        self.vertices.iter().map(|v| v.id).max().map_or(0, |m| m + 1)
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: v, len: self.len() })
        }
    }

    /// Returns a copy with every label rewritten by `f`.
    pub fn map_labels(&self, mut f: impl FnMut(usize, Option<&str>) -> Option<String>) -> Self {
        let vertices: Vec<Vertex> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| Vertex { id: v.id, label: f(i, v.label.as_deref()) })
            .collect();
        let labels = vertices.iter().map(display_label).collect();
        Self {
            dist: FiniteMetricSpace::from_flat(labels, flat(&self.dist)),
            vertices,
            edges: self.edges.clone(),
            adj: self.adj.clone(),
        }
    }

    /// Returns a copy with ids renumbered `0..n` in index order.
    pub fn renumbered(&self) -> Self {
        let mut next = 0u64;
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let id = next;
                next += 1;
                Vertex { id, label: v.label.clone() }
            })
            .collect();
        Self::new(vertices, self.edges.clone()).expect("renumbering keeps tree structure")
    }

    /// Parent pointers (neighbour, edge) of a traversal rooted at `root`,
    /// plus the visiting order.
    fn rooted(&self, root: usize) -> (Vec<Option<(usize, usize)>>, Vec<usize>) {
        let mut parent = vec![None; self.len()];
        let mut order = Vec::with_capacity(self.len());
        let mut seen = vec![false; self.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(w, e) in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e));
                    stack.push(w);
                }
            }
        }
        (parent, order)
    }

    /// The unique simple path from `x` to `y`, both included.
    pub fn geodesic(&self, x: usize, y: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        self.check(y)?;
        let (parent, _) = self.rooted(x);
        let mut path = vec![y];
        let mut cur = y;
        while let Some((p, _)) = parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Ok(path)
    }

    pub fn path_length(&self, path: &[usize]) -> f64 {
        path.windows(2).map(|w| self.d(w[0], w[1])).sum()
    }

    /// Components of the degree-≤2 set, one per maximal path between
    /// branch vertices and leaves.
    pub fn deg2_components(&self) -> Vec<Deg2Component> {
        let branch: Vec<usize> = (0..self.len()).filter(|&v| self.degree(v) >= 3).collect();
        if branch.is_empty() {
            let start = (0..self.len()).find(|&v| self.degree(v) <= 1).unwrap_or(0);
            let path = self.walk_path(start);
            return vec![Deg2Component {
                vertices: path.clone(),
                delimiters: Vec::new(),
                closure_diameter: self.sum_along(&path),
                closure_path: path,
            }];
        }
        let mut used = vec![false; self.edges.len()];
        let mut out = Vec::new();
        for &b in &branch {
            for &(first, e0) in &self.adj[b] {
                if used[e0] {
                    continue;
                }
                used[e0] = true;
                let mut path = vec![b];
                let (mut prev, mut cur) = (b, first);
                while self.degree(cur) == 2 {
                    path.push(cur);
                    let &(next, e) = self.adj[cur]
                        .iter()
                        .find(|&&(w, _)| w != prev)
                        .expect("degree two");
                    used[e] = true;
                    prev = cur;
                    cur = next;
                }
                path.push(cur);
                let mut vertices: Vec<usize> = path[1..path.len() - 1].to_vec();
                let mut delimiters = vec![b];
                if self.degree(cur) >= 3 {
                    delimiters.push(cur);
                } else {
                    vertices.push(cur);
                }
                out.push(Deg2Component {
                    vertices,
                    delimiters,
                    closure_diameter: self.sum_along(&path),
                    closure_path: path,
                });
            }
        }
        out
    }

    fn walk_path(&self, start: usize) -> Vec<usize> {
        let mut path = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&(next, _)) = self.adj[cur].iter().find(|&&(w, _)| w != prev) {
            path.push(next);
            prev = cur;
            cur = next;
        }
        path
    }

    fn sum_along(&self, path: &[usize]) -> f64 {
        path.windows(2)
            .map(|w| self.edge_between(w[0], w[1]).map_or(0.0, |e| self.edges[e].len))
            .sum()
    }

    fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a].iter().find(|&&(w, _)| w == b).map(|&(_, e)| e)
    }

    /// Splits every degree-≤2 component closure into consecutive closed
    /// chunks of length one (the last chunk takes the remainder).
    ///
    /// Each closure path is walked from whichever end has the smaller vertex
    /// id; cut vertices are inserted where a chunk boundary falls inside an
    /// edge.
    pub fn decompose_deg2(&self) -> Decomposition {
        self.decompose_with_limit(1.0, DEFAULT_TOL)
    }

    pub fn decompose_with_limit(&self, limit: f64, tol: f64) -> Decomposition {
        let components = self.deg2_components();
        if self.edges.is_empty() {
            return Decomposition {
                tree: self.clone(),
                segments: vec![Segment { start: 0, end: 0, path: vec![0], length: 0.0 }],
            };
        }
        let mut vertices = self.vertices.clone();
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut next_id = self.next_id();
        let mut segments = Vec::new();
        for comp in components {
            let mut path = comp.closure_path;
            if self.vertices[path[path.len() - 1]].id < self.vertices[path[0]].id {
                path.reverse();
            }
            // Walk the path emitting (vertex, position) with cuts inserted.
            let mut current = vec![path[0]];
            let mut seg_start_pos = 0.0;
            let mut pos = 0.0;
            for w in path.windows(2) {
                let e = self.edge_between(w[0], w[1]).expect("path edge");
                let len = self.edges[e].len;
                let mut from = w[0];
                let mut from_pos = pos;
                let end_pos = pos + len;
                loop {
                    let boundary = seg_start_pos + limit;
                    if boundary < end_pos - tol {
                        // cut strictly inside the remaining edge piece
                        let idx = vertices.len();
                        vertices.push(Vertex::new(next_id));
                        next_id += 1;
                        edges.push(Edge::new(from, idx, boundary - from_pos));
                        current.push(idx);
                        segments.push(self.finish_segment(&current, boundary - seg_start_pos));
                        current = vec![idx];
                        seg_start_pos = boundary;
                        from = idx;
                        from_pos = boundary;
                    } else {
                        edges.push(Edge::new(from, w[1], end_pos - from_pos));
                        current.push(w[1]);
                        if (boundary - end_pos).abs() <= tol {
                            segments.push(self.finish_segment(&current, end_pos - seg_start_pos));
                            current = vec![w[1]];
                            seg_start_pos = end_pos;
                        }
                        break;
                    }
                }
                pos = end_pos;
            }
            if current.len() > 1 {
                segments.push(self.finish_segment(&current, pos - seg_start_pos));
            }
        }
        let tree = MetricTree::new(vertices, edges).expect("cutting edges keeps a tree");
        Decomposition { tree, segments }
    }

    fn finish_segment(&self, path: &[usize], length: f64) -> Segment {
        Segment { start: path[0], end: path[path.len() - 1], path: path.to_vec(), length }
    }

    /// Splits edges at the given offsets (measured from `edge.a`). New
    /// vertices are appended after the existing ones.
    fn split_edges(&self, cuts: &[Vec<f64>]) -> MetricTree {
        let mut vertices = self.vertices.clone();
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut next_id = self.next_id();
        for (e, offsets) in self.edges.iter().zip(cuts) {
            let mut prev = e.a;
            let mut prev_off = 0.0;
            for &off in offsets {
                let idx = vertices.len();
                vertices.push(Vertex::new(next_id));
                next_id += 1;
                edges.push(Edge::new(prev, idx, off - prev_off));
                prev = idx;
                prev_off = off;
            }
            edges.push(Edge::new(prev, e.b, e.len - prev_off));
        }
        MetricTree::new(vertices, edges).expect("splitting edges keeps a tree")
    }

    /// Splits each edge into `ceil(len / eps)` equal pieces.
    pub fn subdivide(&self, eps: f64) -> Result<MetricTree> {
        if !(eps > 0.0) {
            return Err(Error::NonPositiveResolution(eps));
        }
        let cuts: Vec<Vec<f64>> = self
            .edges
            .iter()
            .map(|e| {
                let pieces = (e.len / eps).ceil().max(1.0) as usize;
                (1..pieces).map(|k| e.len * k as f64 / pieces as f64).collect()
            })
            .collect();
        Ok(self.split_edges(&cuts))
    }

    /// Inserts a vertex wherever the sphere of radius `r` around `o`
    /// crosses the interior of an edge.
    pub fn refine_at_radius(&self, o: usize, r: f64) -> Result<MetricTree> {
        self.check(o)?;
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeRadius(r));
        }
        let tol = DEFAULT_TOL;
        let cuts: Vec<Vec<f64>> = self
            .edges
            .iter()
            .map(|e| {
                let (da, db) = (self.d(o, e.a), self.d(o, e.b));
                if da < r - tol && db > r + tol {
                    vec![r - da]
                } else if db < r - tol && da > r + tol {
                    vec![e.len - (r - db)]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Ok(self.split_edges(&cuts))
    }

    /// The closed ball of radius `r` around `o` as a subtree. Edges leaving
    /// the ball are cut at exactly distance `r`; `f64::INFINITY` returns the
    /// whole tree.
    pub fn closed_ball_subtree(&self, o: usize, r: f64) -> Result<MetricTree> {
        self.check(o)?;
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeRadius(r));
        }
        if r.is_infinite() {
            return Ok(self.clone());
        }
        let refined = self.refine_at_radius(o, r)?;
        let keep: Vec<usize> = (0..refined.len())
            .filter(|&v| refined.d(o, v) <= r + DEFAULT_TOL)
            .collect();
        Ok(refined.induced(&keep))
    }

    /// Induced subtree on a connected vertex subset, order preserved.
    fn induced(&self, keep: &[usize]) -> MetricTree {
        let mut map = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let vertices = keep.iter().map(|&v| self.vertices[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| map[e.a] != usize::MAX && map[e.b] != usize::MAX)
            .map(|e| Edge::new(map[e.a], map[e.b], e.len))
            .collect();
        MetricTree::new(vertices, edges).expect("balls in trees are connected")
    }

    /// Replaces geodesic segments of this tree by other trees.
    pub fn replace_edges(&self, plan: &ReplacementPlan) -> Result<MetricTree> {
        let mut interiors: Vec<HashSet<usize>> = Vec::with_capacity(plan.entries.len());
        let mut path_sets: Vec<HashSet<usize>> = Vec::with_capacity(plan.entries.len());
        let mut path_edges = vec![false; self.edges.len()];
        let mut removed = vec![false; self.len()];
        for (k, entry) in plan.entries.iter().enumerate() {
            self.check(entry.a)?;
            self.check(entry.b)?;
            entry.tree.check(entry.alpha)?;
            entry.tree.check(entry.beta)?;
            if entry.a == entry.b {
                return Err(Error::Precondition(format!("replacement {k} has a = b")));
            }
            let host = self.d(entry.a, entry.b);
            let marked = entry.tree.d(entry.alpha, entry.beta);
            if (host - marked).abs() > plan.tol {
                return Err(Error::ReplacementLengthMismatch { entry: k, host, marked });
            }
            let path = self.geodesic(entry.a, entry.b)?;
            let interior: HashSet<usize> = path[1..path.len() - 1].iter().copied().collect();
            for &v in &interior {
                if self.degree(v) != 2 {
                    return Err(Error::ReplacementInteriorBranch { entry: k, vertex: self.vertices[v].id });
                }
                removed[v] = true;
            }
            for w in path.windows(2) {
                path_edges[self.edge_between(w[0], w[1]).expect("path edge")] = true;
            }
            interiors.push(interior);
            path_sets.push(path.into_iter().collect());
        }
        for i in 0..path_sets.len() {
            for j in i + 1..path_sets.len() {
                let shared = path_sets[i].intersection(&path_sets[j]).count();
                if shared > 1 {
                    return Err(Error::ReplacementOverlap { first: i, second: j, shared });
                }
            }
        }

        let mut map = vec![usize::MAX; self.len()];
        let mut vertices = Vec::new();
        for v in 0..self.len() {
            if !removed[v] {
                map[v] = vertices.len();
                vertices.push(self.vertices[v].clone());
            }
        }
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .zip(&path_edges)
            .filter(|(_, &on_path)| !on_path)
            .map(|(e, _)| Edge::new(map[e.a], map[e.b], e.len))
            .collect();
        let mut next_id = self.next_id();
        for entry in &plan.entries {
            let t = &entry.tree;
            let mut local = vec![usize::MAX; t.len()];
            local[entry.alpha] = map[entry.a];
            local[entry.beta] = map[entry.b];
            for v in 0..t.len() {
                if v != entry.alpha && v != entry.beta {
                    local[v] = vertices.len();
                    vertices.push(Vertex { id: next_id, label: t.vertices[v].label.clone() });
                    next_id += 1;
                }
            }
            edges.extend(t.edges.iter().map(|e| Edge::new(local[e.a], local[e.b], e.len)));
        }
        MetricTree::new(vertices, edges)
    }
}

/// Wedge sum: disjoint union with all basepoints identified.
///
/// The result lists part 0's vertices first (its basepoint becomes the wedge
/// point), then each later part without its basepoint. Ids are renumbered.
pub fn wedge_sum(parts: &[(&MetricTree, usize)]) -> Result<MetricTree> {
    Ok(wedge_sum_with_map(parts)?.tree)
}

pub fn wedge_sum_with_map(parts: &[(&MetricTree, usize)]) -> Result<Wedge> {
    let Some(&(_, p0)) = parts.first() else {
        return Err(Error::EmptyWedge);
    };
    for &(t, p) in parts {
        t.check(p)?;
    }
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut edges = Vec::new();
    let mut maps = Vec::with_capacity(parts.len());
    let wedge_point = p0;
    for (i, &(t, p)) in parts.iter().enumerate() {
        let mut map = vec![usize::MAX; t.len()];
        for v in 0..t.len() {
            if i > 0 && v == p {
                map[v] = wedge_point;
                continue;
            }
            map[v] = vertices.len();
            vertices.push(Vertex { id: vertices.len() as u64, label: t.vertices[v].label.clone() });
        }
        edges.extend(t.edges.iter().map(|e| Edge::new(map[e.a], map[e.b], e.len)));
        maps.push(map);
    }
    Ok(Wedge { tree: MetricTree::new(vertices, edges)?, maps, wedge_point })
}

fn display_label(v: &Vertex) -> String {
    v.label.clone().unwrap_or_else(|| v.id.to_string())
}

fn flat(m: &FiniteMetricSpace) -> Vec<f64> {
    (0..m.len()).flat_map(|i| m.row(i).to_vec()).collect()
}

fn all_pairs(vertices: &[Vertex], edges: &[Edge], adj: &[Vec<(usize, usize)>]) -> FiniteMetricSpace {
    let n = vertices.len();
    let mut dist = vec![0.0; n * n];
    let mut stack = Vec::with_capacity(n);
    for root in 0..n {
        let row = &mut dist[root * n..(root + 1) * n];
        let mut seen = vec![false; n];
        seen[root] = true;
        stack.push(root);
        while let Some(v) = stack.pop() {
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    row[w] = row[v] + edges[e].len;
                    stack.push(w);
                }
            }
        }
    }
    FiniteMetricSpace::from_flat(vertices.iter().map(display_label).collect(), dist)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{comb_tree, CombParams};

    fn path3() -> MetricTree {
        MetricTree::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn star3(len: f64) -> MetricTree {
        // center 0, leaves 1..=3
        MetricTree::from_edge_list(4, &[(0, 1, len), (0, 2, len), (0, 3, len)]).unwrap()
    }

    pub(crate) fn random_tree(seed: u64, n: usize) -> MetricTree {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<(usize, usize, f64)> =
            (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.1..2.0))).collect();
        MetricTree::from_edge_list(n, &edges).unwrap()
    }

    #[test]
    fn construction_examples() {
        assert_eq!(path3().d(0, 2), 2.0);
        assert_eq!(star3(1.0).d(1, 2), 2.0);
        let err = MetricTree::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]);
        assert_eq!(err.unwrap_err(), Error::Cycle { a: 2, b: 0 });
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            MetricTree::from_edge_list(3, &[(0, 1, 1.0)]).unwrap_err(),
            Error::Disconnected(2)
        );
        assert!(matches!(
            MetricTree::from_edge_list(2, &[(0, 1, 0.0)]),
            Err(Error::NonPositiveLength { .. })
        ));
        assert!(matches!(
            MetricTree::from_edge_list(2, &[(0, 1, -1.0)]),
            Err(Error::NonPositiveLength { .. })
        ));
        let dup = MetricTree::new(vec![Vertex::new(4), Vertex::new(4)], vec![Edge::new(0, 1, 1.0)]);
        assert_eq!(dup.unwrap_err(), Error::DuplicateVertex(4));
    }

    #[test]
    fn geodesic_examples() {
        let s = star3(1.0);
        assert_eq!(s.geodesic(1, 1).unwrap(), vec![1]);
        assert_eq!(s.geodesic(1, 2).unwrap(), vec![1, 0, 2]);
        assert_eq!(path3().geodesic(0, 2).unwrap(), vec![0, 1, 2]);
        assert!(matches!(s.geodesic(0, 9), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn deg2_components_examples() {
        let comps = path3().deg2_components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vertices, vec![0, 1, 2]);
        assert!(comps[0].delimiters.is_empty());
        assert_eq!(comps[0].closure_diameter, 2.0);

        let comps = star3(1.0).deg2_components();
        assert_eq!(comps.len(), 3);
        for c in &comps {
            assert_eq!(c.closure_diameter, 1.0);
            assert_eq!(c.delimiters, vec![0]);
            assert_eq!(c.vertices.len(), 1);
        }
    }

    #[test]
    fn deg2_components_of_half_comb() {
        let t = comb_tree(&CombParams::new(0.5, 1.0, 8).unwrap());
        let mut diam: Vec<f64> = t.deg2_components().iter().map(|c| c.closure_diameter).collect();
        diam.sort_by(f64::total_cmp);
        // two corner components (tooth + half spine) and the middle tooth
        assert_eq!(diam, vec![0.5, 1.0, 1.0]);
    }

    #[test]
    fn edge_between_branch_vertices_is_a_component() {
        // two stars joined center to center
        let t = MetricTree::from_edge_list(
            6,
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 0.7), (3, 4, 1.0), (3, 5, 1.0)],
        )
        .unwrap();
        let comps = t.deg2_components();
        assert_eq!(comps.len(), 5);
        let bridge = comps.iter().find(|c| c.vertices.is_empty()).unwrap();
        assert_eq!(bridge.delimiters, vec![0, 3]);
        assert_eq!(bridge.closure_diameter, 0.7);
    }

    #[test]
    fn decompose_examples() {
        let seg = MetricTree::from_edge_list(2, &[(0, 1, 2.5)]).unwrap();
        let lens: Vec<f64> = seg.decompose_deg2().segments.iter().map(|s| s.length).collect();
        assert_eq!(lens, vec![1.0, 1.0, 0.5]);

        let short = MetricTree::from_edge_list(2, &[(0, 1, 0.5)]).unwrap();
        assert_eq!(short.decompose_deg2().segments.len(), 1);

        let dec = star3(2.0).decompose_deg2();
        assert_eq!(dec.segments.len(), 6);
        for s in &dec.segments {
            assert!((s.length - 1.0).abs() < 1e-12);
            assert!((dec.tree.d(s.start, s.end) - s.length).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_snaps_to_existing_vertices() {
        let t = MetricTree::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 0.75)]).unwrap();
        let dec = t.decompose_deg2();
        assert_eq!(dec.tree.len(), 3);
        assert_eq!(dec.segments.len(), 2);
        assert_eq!(dec.segments[0].path, vec![0, 1]);
    }

    #[test]
    fn decomposition_chunks_are_short_and_almost_disjoint() {
        for seed in 0..20 {
            let t = random_tree(seed, 12).subdivide(0.7).unwrap();
            let dec = t.decompose_deg2();
            let sets: Vec<HashSet<usize>> =
                dec.segments.iter().map(|s| s.path.iter().copied().collect()).collect();
            for s in &dec.segments {
                assert!(s.length <= 1.0 + 1e-9);
            }
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    assert!(sets[i].intersection(&sets[j]).count() <= 1);
                }
            }
            // chunks cover every edge exactly once
            let covered: f64 = dec.segments.iter().map(|s| s.length).sum();
            assert!((covered - t.total_length()).abs() < 1e-9);
            // host distances survive the cuts
            for a in 0..t.len() {
                for b in 0..t.len() {
                    assert!((t.d(a, b) - dec.tree.d(a, b)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ball_examples() {
        let t = star3(1.0);
        let b0 = t.closed_ball_subtree(1, 0.0).unwrap();
        assert_eq!(b0.len(), 1);
        assert_eq!(b0.vertices()[0].id, 1);
        let binf = t.closed_ball_subtree(1, f64::INFINITY).unwrap();
        assert_eq!(binf.metric(), t.metric());

        let seg = MetricTree::from_edge_list(2, &[(0, 1, 2.0)]).unwrap();
        let half = seg.closed_ball_subtree(0, 1.0).unwrap();
        assert_eq!(half.len(), 2);
        assert_eq!(half.d(0, 1), 1.0);
        assert_eq!(half.vertices()[1].id, 2);
        assert_eq!(seg.closed_ball_subtree(0, -1.0).unwrap_err(), Error::NegativeRadius(-1.0));
    }

    #[test]
    fn ball_radius_on_vertex_includes_it() {
        let b = path3().closed_ball_subtree(0, 1.0).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.vertices()[1].id, 1);
    }

    #[test]
    fn wedge_examples() {
        let unit = MetricTree::from_edge_list(2, &[(0, 1, 1.0)]).unwrap();
        let w = wedge_sum(&[(&unit, 1), (&unit, 0)]).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.metric().diameter(), 2.0);
        let single = wedge_sum(&[(&unit, 0)]).unwrap();
        assert_eq!(single.metric().rows(), unit.metric().rows());
        assert_eq!(wedge_sum(&[]).unwrap_err(), Error::EmptyWedge);
    }

    #[test]
    fn wedge_keeps_part_distances_bitwise() {
        let a = random_tree(1, 9);
        let b = random_tree(2, 7);
        let w = wedge_sum_with_map(&[(&a, 3), (&b, 5)]).unwrap();
        for (part, t) in [(0, &a), (1, &b)] {
            let m = &w.maps[part];
            for x in 0..t.len() {
                for y in 0..t.len() {
                    assert_eq!(w.tree.d(m[x], m[y]).to_bits(), t.d(x, y).to_bits());
                }
            }
        }
        let (x, y) = (w.maps[0][0], w.maps[1][0]);
        assert!((w.tree.d(x, y) - (a.d(0, 3) + b.d(5, 0))).abs() < 1e-12);
    }

    #[test]
    fn replace_by_straight_segment_is_isometric() {
        let host = path3();
        let seg = MetricTree::from_edge_list(3, &[(0, 2, 0.25), (2, 1, 0.75)]).unwrap();
        let plan = ReplacementPlan::new(vec![ReplacementEntry { a: 0, b: 1, tree: seg, alpha: 0, beta: 1 }]);
        let y = host.replace_edges(&plan).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!((y.d(a, b) - host.d(a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn replace_by_comb_puts_tips_at_x_plus_half() {
        let host = path3();
        let comb = comb_tree(&CombParams::new(0.5, 1.0, 8).unwrap());
        let alpha = comb.index_of_label("spine:0").unwrap();
        let beta = comb.index_of_label("spine:1").unwrap();
        let plan = ReplacementPlan::new(vec![ReplacementEntry { a: 0, b: 1, tree: comb, alpha, beta }]);
        let y = host.replace_edges(&plan).unwrap();
        for x in ["0", "0.5", "1"] {
            let tip = y.index_of_label(&format!("tooth:{x}:0.5")).unwrap();
            let xv: f64 = x.parse().unwrap();
            assert!((y.d(0, tip) - (xv + 0.5)).abs() < 1e-12);
        }
        assert!(y.metric().four_point_defect() < 1e-9);
    }

    #[test]
    fn replace_errors() {
        let host = path3();
        let short = MetricTree::from_edge_list(2, &[(0, 1, 0.5)]).unwrap();
        let plan = ReplacementPlan::new(vec![ReplacementEntry { a: 0, b: 1, tree: short, alpha: 0, beta: 1 }]);
        assert!(matches!(host.replace_edges(&plan), Err(Error::ReplacementLengthMismatch { .. })));

        let two = MetricTree::from_edge_list(2, &[(0, 1, 2.0)]).unwrap();
        let one = MetricTree::from_edge_list(2, &[(0, 1, 1.0)]).unwrap();
        let plan = ReplacementPlan::new(vec![
            ReplacementEntry { a: 0, b: 2, tree: two, alpha: 0, beta: 1 },
            ReplacementEntry { a: 0, b: 1, tree: one, alpha: 0, beta: 1 },
        ]);
        assert!(matches!(host.replace_edges(&plan), Err(Error::ReplacementOverlap { .. })));

        let s = star3(1.0);
        let two = MetricTree::from_edge_list(2, &[(0, 1, 2.0)]).unwrap();
        let plan = ReplacementPlan::new(vec![ReplacementEntry { a: 1, b: 2, tree: two, alpha: 0, beta: 1 }]);
        assert!(matches!(s.replace_edges(&plan), Err(Error::ReplacementInteriorBranch { .. })));
    }

    #[test]
    fn subdivide_examples() {
        let unit = MetricTree::from_edge_list(2, &[(0, 1, 1.0)]).unwrap();
        let s = unit.subdivide(0.5).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.d(0, 2), 0.5);
        assert_eq!(s.d(0, 1), 1.0);
        let same = unit.subdivide(1.5).unwrap();
        assert_eq!(same.metric(), unit.metric());
        assert_eq!(unit.subdivide(0.0).unwrap_err(), Error::NonPositiveResolution(0.0));
    }

    #[test]
    fn subdivide_preserves_original_distances() {
        let t = random_tree(7, 10);
        let s = t.subdivide(0.3).unwrap();
        assert!(s.max_edge_length() <= 0.3 + 1e-12);
        for a in 0..t.len() {
            for b in 0..t.len() {
                assert!((t.d(a, b) - s.d(a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn common_prefix_of_geodesics_is_a_geodesic() {
        let t = random_tree(11, 14);
        for o in 0..t.len() {
            for x in 0..t.len() {
                for y in 0..t.len() {
                    let gx = t.geodesic(o, x).unwrap();
                    let gy = t.geodesic(o, y).unwrap();
                    let common: Vec<usize> =
                        gx.iter().zip(&gy).take_while(|(a, b)| a == b).map(|(a, _)| *a).collect();
                    let q = *common.last().unwrap();
                    assert_eq!(common, t.geodesic(o, q).unwrap());
                    let sx: HashSet<_> = gx.iter().collect();
                    let shared = gy.iter().filter(|v| sx.contains(v)).count();
                    assert_eq!(shared, common.len());
                }
            }
        }
    }

    #[test]
    fn ball_hausdorff_is_lipschitz_in_radius() {
        for seed in 0..10 {
            let t = random_tree(100 + seed, 10);
            let o = (seed as usize) % t.len();
            for (r, rp) in [(0.3, 1.1), (0.0, 2.5), (1.7, 1.75), (4.0, 0.5)] {
                let fine = t.refine_at_radius(o, r).unwrap().refine_at_radius(o, rp).unwrap();
                let ball = |rad: f64| -> Vec<usize> {
                    (0..fine.len()).filter(|&v| fine.d(o, v) <= rad + 1e-9).collect()
                };
                let h = fine.metric().hausdorff_distance(&ball(r), &ball(rp)).unwrap();
                assert!(h <= (r - rp).abs() + 1e-9);
                let once = t.refine_at_radius(o, r).unwrap();
                let inside = (0..once.len()).filter(|&v| once.d(o, v) <= r + 1e-9).count();
                assert_eq!(t.closed_ball_subtree(o, r).unwrap().len(), inside);
            }
        }
    }

    #[test]
    fn constructed_trees_are_zero_hyperbolic() {
        for seed in 0..10 {
            let t = random_tree(seed, 15);
            assert!(t.metric().four_point_defect() <= 1e-9);
            assert!(t.metric().validate(1e-9).ok);
        }
    }
}
