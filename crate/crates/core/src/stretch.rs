//! Exact stretch factor.
//!
//! The stretch factor of a connected embedded graph is the maximum over unordered
//! pairs of distinct vertices of `d_G(u, v) / d(u, v)`. Adjacent pairs have ratio
//! exactly 1, so only non-adjacent pairs are searched and the result is floored
//! at 1. Ties are broken towards the lexicographically smallest pair.
//!
//! Two search strategies compute the same value:
//!
//! - sparse graphs (mean degree below `n/8`): one Dijkstra run per source;
//! - dense graphs: non-adjacent pairs are visited by increasing Euclidean
//!   distance while the best ratio found so far is kept. A pair is skipped as
//!   soon as a path shorter than `best · d(u, v)` is certified, first through a
//!   common neighbour and otherwise by a goal-directed Dijkstra run (A* with the
//!   Euclidean heuristic) that stops early; pairs not skipped get their exact
//!   graph distance.
//!
//! [`oracle_stretch`] recomputes the value with Floyd–Warshall and shares no
//! shortest-path code with the above.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{euclid, Point};
use crate::model::EmbeddedGraph;

/// All-pairs shortest-path lengths; `+∞` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }
}

/// Stretch factor of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ReportDocument", try_from = "ReportDocument")]
pub enum StretchReport {
    /// The graph is disconnected.
    Undefined,
    Defined {
        value: f64,
        pair: (usize, usize),
        d_graph: f64,
        d_euclid: f64,
    },
}

impl StretchReport {
    pub fn value(&self) -> Option<f64> {
        match self {
            StretchReport::Undefined => None,
            StretchReport::Defined { value, .. } => Some(*value),
        }
    }

    pub fn pair(&self) -> Option<(usize, usize)> {
        match self {
            StretchReport::Undefined => None,
            StretchReport::Defined { pair, .. } => Some(*pair),
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, StretchReport::Defined { .. })
    }
}

/// JSON form `{stretch, defined, pair: [i, j], d_graph, d_euclid}`; numeric
/// fields are `null` when the stretch factor is undefined.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportDocument {
    stretch: Option<f64>,
    defined: bool,
    pair: Option<[usize; 2]>,
    d_graph: Option<f64>,
    d_euclid: Option<f64>,
}

impl From<StretchReport> for ReportDocument {
    fn from(r: StretchReport) -> Self {
        match r {
            StretchReport::Undefined => ReportDocument {
                stretch: None,
                defined: false,
                pair: None,
                d_graph: None,
                d_euclid: None,
            },
            StretchReport::Defined {
                value,
                pair,
                d_graph,
                d_euclid,
            } => ReportDocument {
                stretch: Some(value),
                defined: true,
                pair: Some([pair.0, pair.1]),
                d_graph: Some(d_graph),
                d_euclid: Some(d_euclid),
            },
        }
    }
}

impl TryFrom<ReportDocument> for StretchReport {
    type Error = String;

    fn try_from(d: ReportDocument) -> Result<Self, String> {
        if !d.defined {
            return Ok(StretchReport::Undefined);
        }
        match (d.stretch, d.pair, d.d_graph, d.d_euclid) {
            (Some(value), Some([i, j]), Some(d_graph), Some(d_euclid)) => Ok(StretchReport::Defined {
                value,
                pair: (i, j),
                d_graph,
                d_euclid,
            }),
            _ => Err("defined stretch report is missing fields".into()),
        }
    }
}

/// Min-heap entry keyed by a tentative distance.
#[derive(Clone, Copy, PartialEq)]
struct Entry {
    key: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn is_dense(g: &EmbeddedGraph) -> bool {
    let n = g.n();
    // mean degree 2m/n compared against n/8
    16 * g.edge_count() >= n * n
}

/// Shortest-path lengths from `source` under Euclidean edge weights.
pub fn sssp(g: &EmbeddedGraph, source: usize) -> Result<Vec<f64>> {
    if source >= g.n() {
        return Err(Error::invalid(format!(
            "source {source} out of range for n = {}",
            g.n()
        )));
    }
    Ok(if is_dense(g) {
        dijkstra_scan(g, source)
    } else {
        WeightedLists::new(g).dijkstra(source)
    })
}

/// Adjacency lists with precomputed edge weights.
struct WeightedLists {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl WeightedLists {
    fn new(g: &EmbeddedGraph) -> Self {
        let points = g.points();
        let mut offsets = Vec::with_capacity(g.n() + 1);
        let mut targets = Vec::with_capacity(2 * g.edge_count());
        let mut weights = Vec::with_capacity(2 * g.edge_count());
        offsets.push(0);
        for u in 0..g.n() {
            for v in g.adjacency().neighbours(u) {
                targets.push(v as u32);
                weights.push(euclid(points[u], points[v]));
            }
            offsets.push(targets.len());
        }
        WeightedLists {
            offsets,
            targets,
            weights,
        }
    }

    fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    fn dijkstra(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n()];
        let mut done = vec![false; self.n()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry {
            key: 0.0,
            vertex: source,
        });
        while let Some(Entry { key, vertex: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            let range = self.offsets[u]..self.offsets[u + 1];
            for (&v, &w) in self.targets[range.clone()].iter().zip(&self.weights[range]) {
                let v = v as usize;
                let candidate = key + w;
                if candidate < dist[v] {
                    dist[v] = candidate;
                    heap.push(Entry {
                        key: candidate,
                        vertex: v,
                    });
                }
            }
        }
        dist
    }
}

/// Dijkstra with a linear scan for the next vertex; `O(n²)` per source.
fn dijkstra_scan(g: &EmbeddedGraph, source: usize) -> Vec<f64> {
    let n = g.n();
    let points = g.points();
    let adjacency = g.adjacency();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for (v, (&d, &fixed)) in dist.iter().zip(&done).enumerate() {
            if !fixed && d < best {
                best = d;
                u = v;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for v in adjacency.neighbours(u) {
            if !done[v] {
                let candidate = best + euclid(points[u], points[v]);
                if candidate < dist[v] {
                    dist[v] = candidate;
                }
            }
        }
    }
    dist
}

/// All-pairs shortest paths as one single-source run per vertex.
pub fn apsp(g: &EmbeddedGraph) -> DistanceMatrix {
    let n = g.n();
    let lists = (!is_dense(g)).then(|| WeightedLists::new(g));
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| match &lists {
            Some(lists) => lists.dijkstra(s),
            None => dijkstra_scan(g, s),
        })
        .collect();
    DistanceMatrix {
        n,
        dist: rows.concat(),
    }
}

/// Best ratio found so far, with the lexicographic tie rule.
#[derive(Debug, Clone, Copy)]
struct Best {
    ratio: f64,
    pair: (usize, usize),
    d_graph: f64,
    d_euclid: f64,
}

impl Best {
    fn beats(&self, other: &Option<Best>) -> bool {
        match other {
            None => true,
            Some(o) => self.ratio > o.ratio || (self.ratio == o.ratio && self.pair < o.pair),
        }
    }
}

fn keep_best(slot: &mut Option<Best>, candidate: Best) {
    if candidate.beats(slot) {
        *slot = Some(candidate);
    }
}

fn check_distinct(points: &[Point]) -> Result<()> {
    let mut seen = HashSet::with_capacity(points.len());
    for (i, q) in points.iter().enumerate() {
        if !seen.insert((q.x.to_bits(), q.y.to_bits())) {
            return Err(Error::Internal(format!(
                "vertex {i} coincides with an earlier vertex at ({}, {})",
                q.x, q.y
            )));
        }
    }
    Ok(())
}

/// Combines the best non-adjacent pair with the ratio-1 floor of adjacent pairs.
fn finish(g: &EmbeddedGraph, best: Option<Best>) -> StretchReport {
    let floor = g.edges().first().map(|&(i, j)| {
        let d = euclid(g.point(i), g.point(j));
        Best {
            ratio: 1.0,
            pair: (i, j),
            d_graph: d,
            d_euclid: d,
        }
    });
    let chosen = match (best, floor) {
        (Some(b), Some(f)) => {
            if b.ratio > 1.0 || (b.ratio == 1.0 && b.pair < f.pair) {
                b
            } else {
                f
            }
        }
        (Some(b), None) => b,
        (None, Some(f)) => f,
        (None, None) => unreachable!("a connected graph on n >= 2 vertices has an edge"),
    };
    StretchReport::Defined {
        value: chosen.ratio.max(1.0),
        pair: chosen.pair,
        d_graph: chosen.d_graph,
        d_euclid: chosen.d_euclid,
    }
}

/// Exact stretch factor of `g`, or [`StretchReport::Undefined`] if `g` is disconnected.
pub fn stretch_factor(g: &EmbeddedGraph) -> Result<StretchReport> {
    if g.n() < 2 {
        return Err(Error::invalid("stretch factor needs at least two vertices"));
    }
    check_distinct(g.points())?;
    if !g.is_connected() {
        return Ok(StretchReport::Undefined);
    }
    let best = if is_dense(g) {
        dense_search(g)
    } else {
        sparse_search(g)
    };
    Ok(finish(g, best))
}

fn sparse_search(g: &EmbeddedGraph) -> Option<Best> {
    let n = g.n();
    let points = g.points();
    let lists = WeightedLists::new(g);
    (0..n)
        .into_par_iter()
        .map(|u| {
            let dist = lists.dijkstra(u);
            let mut best = None;
            for v in u + 1..n {
                if g.adjacency().contains(u, v) {
                    continue;
                }
                let d = euclid(points[u], points[v]);
                keep_best(
                    &mut best,
                    Best {
                        ratio: dist[v] / d,
                        pair: (u, v),
                        d_graph: dist[v],
                        d_euclid: d,
                    },
                );
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if x.beats(&Some(y)) { x } else { y }),
                (x, None) => x,
                (None, y) => y,
            },
        )
}

fn dense_search(g: &EmbeddedGraph) -> Option<Best> {
    let n = g.n();
    let points = g.points();
    let adjacency = g.adjacency();

    let mut pairs: Vec<(f64, u32, u32)> = Vec::new();
    for u in 0..n {
        let row = adjacency.row(u);
        for v in u + 1..n {
            if row[v / 64] >> (v % 64) & 1 == 0 {
                pairs.push((euclid(points[u], points[v]), u as u32, v as u32));
            }
        }
    }
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut search = GoalSearch::new(n);
    let mut best: Option<Best> = None;
    for (d, u, v) in pairs {
        let (u, v) = (u as usize, v as usize);
        let threshold = best.map_or(1.0, |b| b.ratio);
        let cutoff = threshold * d;
        if has_short_detour(g, u, v, cutoff) {
            continue;
        }
        if let Some(d_graph) = search.run(g, u, v, cutoff) {
            keep_best(
                &mut best,
                Best {
                    ratio: d_graph / d,
                    pair: (u, v),
                    d_graph,
                    d_euclid: d,
                },
            );
        }
    }
    best
}

/// Whether some common neighbour `w` gives `d(u,w) + d(w,v) < cutoff`.
fn has_short_detour(g: &EmbeddedGraph, u: usize, v: usize, cutoff: f64) -> bool {
    let points = g.points();
    let (pu, pv) = (points[u], points[v]);
    let (ru, rv) = (g.adjacency().row(u), g.adjacency().row(v));
    for (w, (&a, &b)) in ru.iter().zip(rv).enumerate() {
        let mut common = a & b;
        while common != 0 {
            let q = points[w * 64 + common.trailing_zeros() as usize];
            if euclid(pu, q) + euclid(q, pv) < cutoff {
                return true;
            }
            common &= common - 1;
        }
    }
    false
}

/// Reusable state for goal-directed searches between one pair at a time.
struct GoalSearch {
    dist: Vec<f64>,
    stamp: Vec<u32>,
    closed: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Entry>,
}

impl GoalSearch {
    fn new(n: usize) -> Self {
        GoalSearch {
            dist: vec![f64::INFINITY; n],
            stamp: vec![0; n],
            closed: vec![0; n],
            epoch: 0,
            heap: BinaryHeap::new(),
        }
    }

    /// Exact `d_G(source, target)`, or `None` once a path shorter than `cutoff` is found.
    ///
    /// The heuristic `d(x, target)` is consistent for Euclidean edge weights, so a
    /// vertex is final when popped.
    fn run(&mut self, g: &EmbeddedGraph, source: usize, target: usize, cutoff: f64) -> Option<f64> {
        let points = g.points();
        let adjacency = g.adjacency();
        let goal = points[target];
        self.epoch += 1;
        let epoch = self.epoch;
        self.heap.clear();
        self.dist[source] = 0.0;
        self.stamp[source] = epoch;
        self.heap.push(Entry {
            key: euclid(points[source], goal),
            vertex: source,
        });
        while let Some(Entry { vertex: x, .. }) = self.heap.pop() {
            if self.closed[x] == epoch {
                continue;
            }
            if x == target {
                return Some(self.dist[x]);
            }
            self.closed[x] = epoch;
            let gx = self.dist[x];
            for y in adjacency.neighbours(x) {
                if self.closed[y] == epoch {
                    continue;
                }
                let candidate = gx + euclid(points[x], points[y]);
                if self.stamp[y] != epoch || candidate < self.dist[y] {
                    if y == target && candidate < cutoff {
                        return None;
                    }
                    self.stamp[y] = epoch;
                    self.dist[y] = candidate;
                    self.heap.push(Entry {
                        key: candidate + euclid(points[y], goal),
                        vertex: y,
                    });
                }
            }
        }
        Some(f64::INFINITY)
    }
}

/// Independent stretch factor via Floyd–Warshall over all pairs.
pub fn oracle_stretch(g: &EmbeddedGraph) -> Result<StretchReport> {
    let n = g.n();
    if n < 2 {
        return Err(Error::invalid("stretch factor needs at least two vertices"));
    }
    let points = g.points();
    for i in 0..n {
        for j in i + 1..n {
            if points[i] == points[j] {
                return Err(Error::Internal(format!(
                    "vertices {i} and {j} coincide"
                )));
            }
        }
    }
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j && g.is_adjacent(i, j) {
                *cell = euclid(points[i], points[j]);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik == f64::INFINITY {
                continue;
            }
            for j in 0..n {
                let through = dik + d[k][j];
                if through < d[i][j] {
                    d[i][j] = through;
                }
            }
        }
    }
    let mut best: Option<(f64, (usize, usize), f64, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] == f64::INFINITY {
                return Ok(StretchReport::Undefined);
            }
            let e = euclid(points[i], points[j]);
            let ratio = d[i][j] / e;
            if best.is_none_or(|b| ratio > b.0) {
                best = Some((ratio, (i, j), d[i][j], e));
            }
        }
    }
    let (ratio, pair, d_graph, d_euclid) = best.expect("n >= 2");
    Ok(StretchReport::Defined {
        value: ratio.max(1.0),
        pair,
        d_graph,
        d_euclid,
    })
}

/// Pairs `(i, j)`, `i < j`, with `d_G(i, j) > (2λ + 1) · d(i, j)`.
pub fn bad_pairs(g: &EmbeddedGraph, lambda: f64, dm: &DistanceMatrix) -> Result<Vec<(usize, usize)>> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if dm.n() != g.n() {
        return Err(Error::invalid("distance matrix does not match the graph"));
    }
    let factor = 2.0 * lambda + 1.0;
    let points = g.points();
    let mut out = Vec::new();
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            if dm.get(i, j) > factor * euclid(points[i], points[j]) {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Number of vertices adjacent to both `u` and `v`.
pub fn common_neighbours(g: &EmbeddedGraph, u: usize, v: usize) -> Result<usize> {
    if u == v {
        return Err(Error::invalid("common neighbours need two distinct vertices"));
    }
    if u >= g.n() || v >= g.n() {
        return Err(Error::invalid(format!("vertex pair ({u}, {v}) out of range")));
    }
    let adjacency = g.adjacency();
    Ok(adjacency
        .row(u)
        .iter()
        .zip(adjacency.row(v))
        .map(|(a, b)| (a & b).count_ones() as usize)
        .sum())
}
