//! The randomly embedded random graph.
//!
//! Vertices are placed independently and uniformly in the unit square, and every
//! pair is joined independently with probability `p`. Edges are weighted by the
//! Euclidean distance of their end points; weights are always derived from the
//! embedding and never stored.
//!
//! Randomness comes from three documented sub-streams of the master seed
//! (see [`crate::rng`]):
//!
//! - `POINTS`: the `2n` coordinates, vertex by vertex, `x` before `y`;
//! - `EDGES`: one uniform draw per pair `(i, j)`, `i < j`, in lexicographic order;
//!   the pair is joined when the draw is `< p`;
//! - `RESAMPLE[i]`: replacement positions for vertex `i` if it lands exactly on an
//!   earlier vertex.
//!
//! The edge stream never reads point values, so adjacency is independent of the
//! embedding by construction.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{euclid, sample_point, Point};
use crate::rng::{substream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, seed: u64) -> Result<Self> {
        let params = ModelParams { n, p, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!("p = {} is outside [0, 1]", self.p)));
        }
        Ok(())
    }
}

/// Packed symmetric bit matrix over `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        Adjacency {
            n,
            words_per_row,
            bits: vec![0; n * words_per_row],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words_per_row + i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(i))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }
}

/// Indices of the set bits of a packed row, ascending.
pub fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut bits = word;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let tz = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(w * 64 + tz)
        })
    })
}

/// `n` embedded vertices with a symmetric, irreflexive adjacency relation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedGraph {
    params: ModelParams,
    points: Vec<Point>,
    adjacency: Adjacency,
}

impl EmbeddedGraph {
    /// Draws a graph from the model. Fully determined by `params`.
    pub fn generate(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let mut rng = substream(params.seed, tag::POINTS, 0);
        let mut points: Vec<Point> = (0..params.n).map(|_| sample_point(&mut rng)).collect();
        resolve_coincident(&mut points, |i| {
            let mut rng = substream(params.seed, tag::RESAMPLE, i as u64);
            move || sample_point(&mut rng)
        });
        let mut edge_rng = substream(params.seed, tag::EDGES, 0);
        let adjacency = sample_edges(params.n, params.p, &mut edge_rng);
        Ok(EmbeddedGraph {
            params,
            points,
            adjacency,
        })
    }

    /// Assembles a graph from explicit parts. Points must lie in the unit square
    /// and edges must join distinct in-range vertices.
    pub fn from_parts(
        params: ModelParams,
        points: Vec<Point>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        params.validate()?;
        if points.len() != params.n {
            return Err(Error::invalid(format!(
                "expected {} points, got {}",
                params.n,
                points.len()
            )));
        }
        if let Some(q) = points.iter().find(|q| !q.in_unit_square()) {
            return Err(Error::invalid(format!(
                "point ({}, {}) is outside the unit square",
                q.x, q.y
            )));
        }
        let mut adjacency = Adjacency::empty(params.n);
        for (i, j) in edges {
            if i == j || i >= params.n || j >= params.n {
                return Err(Error::invalid(format!("invalid edge ({i}, {j})")));
            }
            adjacency.set(i, j);
        }
        Ok(EmbeddedGraph {
            params,
            points,
            adjacency,
        })
    }

    pub(crate) fn from_sampled(params: ModelParams, points: Vec<Point>, adjacency: Adjacency) -> Self {
        EmbeddedGraph {
            params,
            points,
            adjacency,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        i != j && i < self.n() && j < self.n() && self.adjacency.contains(i, j)
    }

    /// Weight of the edge `ij`, i.e. the Euclidean distance of its end points.
    pub fn edge_weight(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.n() || j >= self.n() {
            return Err(Error::invalid(format!("vertex pair ({i}, {j}) out of range")));
        }
        if i == j {
            return Err(Error::invalid(format!("self pair ({i}, {i}) has no edge")));
        }
        if !self.adjacency.contains(i, j) {
            return Err(Error::invalid(format!("vertices {i} and {j} are not adjacent")));
        }
        Ok(euclid(self.points[i], self.points[j]))
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|i| {
                self.adjacency
                    .neighbours(i)
                    .filter(move |&j| j > i)
                    .map(move |j| (i, j))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.edge_count()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in self.adjacency.neighbours(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// A copy with the edge `ij` added.
    pub fn with_edge(&self, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= self.n() || j >= self.n() {
            return Err(Error::invalid(format!("invalid edge ({i}, {j})")));
        }
        let mut g = self.clone();
        g.adjacency.set(i, j);
        Ok(g)
    }

    /// A copy with every coordinate multiplied by `s`. The result may leave the
    /// unit square; it is meant for computation-level checks only.
    pub fn scaled(&self, s: f64) -> Self {
        let mut g = self.clone();
        for q in &mut g.points {
            *q = q.scaled(s);
        }
        g
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_str(s)?;
        doc.try_into()
    }
}

/// Draws one Bernoulli(`p`) bit per pair in lexicographic pair order.
pub(crate) fn sample_edges<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Adjacency {
    let mut adjacency = Adjacency::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                adjacency.set(i, j);
            }
        }
    }
    adjacency
}

/// Replaces every point that coincides exactly with a lower-indexed point.
///
/// `stream(i)` yields the replacement sampler for vertex `i`; it is drawn from
/// until the position is new.
pub(crate) fn resolve_coincident<F, S>(points: &mut [Point], mut stream: F)
where
    F: FnMut(usize) -> S,
    S: FnMut() -> Point,
{
    let key = |q: &Point| (q.x.to_bits(), q.y.to_bits());
    let mut seen: HashMap<(u64, u64), usize> = HashMap::with_capacity(points.len());
    for i in 0..points.len() {
        if seen.contains_key(&key(&points[i])) {
            let mut next = stream(i);
            loop {
                points[i] = next();
                if !seen.contains_key(&key(&points[i])) {
                    break;
                }
            }
        }
        seen.insert(key(&points[i]), i);
    }
}

/// JSON form `{n, p, seed, points: [[x, y], ...], edges: [[i, j], ...]}` with
/// edges sorted and `i < j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub points: Vec<[f64; 2]>,
    pub edges: Vec<[usize; 2]>,
}

impl From<&EmbeddedGraph> for GraphDocument {
    fn from(g: &EmbeddedGraph) -> Self {
        GraphDocument {
            n: g.params.n,
            p: g.params.p,
            seed: g.params.seed,
            points: g.points.iter().map(|&q| q.into()).collect(),
            edges: g.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }
}

impl TryFrom<GraphDocument> for EmbeddedGraph {
    type Error = Error;

    fn try_from(doc: GraphDocument) -> Result<Self> {
        let params = ModelParams::new(doc.n, doc.p, doc.seed)?;
        let points = doc.points.into_iter().map(Point::from).collect();
        EmbeddedGraph::from_parts(params, points, doc.edges.into_iter().map(|[i, j]| (i, j)))
    }
}
