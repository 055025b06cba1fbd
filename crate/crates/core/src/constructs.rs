//! The lower-bound construction, as runnable code.
//!
//! The first `cn` vertices are embedded and joined whenever they are within
//! `2/√n` of each other (the threshold graph). If at least `cn/2` of them are
//! isolated, the first `m = cn/2` isolated vertices in index order become the
//! primary set `A`, and the discs `C(v, 1/√n)`, `v ∈ A`, are the primary discs.
//! They are pairwise disjoint and contain no other first-stage ("far") vertex.
//!
//! The remaining `n(1−c)` secondary vertices are then embedded in three phases:
//!
//! 1. each is assigned to the exterior region `W` or to a primary disc, with
//!    probability proportional to area;
//! 2. each is placed uniformly inside its region (rejection sampling);
//! 3. every pair of vertices is joined with probability `p`.
//!
//! This produces the same distribution as [`EmbeddedGraph::generate`], conditioned
//! on the first stage. A primary disc holding exactly its centre `u` and one
//! secondary vertex `v` is nice when `d(u, v) < 1/(λ√n)` and `uv` is not an edge;
//! any path from `u` leaves the disc, so a nice disc forces `F > λ`.
//!
//! Random streams (see [`crate::rng`]): `FIRST_STAGE` for the first `cn` points,
//! `PHASE_ONE` for the assignment draws, `PHASE_TWO` for placement, `EDGES` for
//! the edges exactly as in the direct generator, and `RESAMPLE[i]` for vertex `i`
//! if it coincides with an earlier vertex.

use std::cell::RefCell;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{euclid, euclid_sq, sample_point, ClippedDisc, Point};
use crate::model::{resolve_coincident, sample_edges, EmbeddedGraph, ModelParams};
use crate::rng::{substream, tag, StreamRng};
use crate::stretch::stretch_factor;

/// Lower end of the open window for `c`.
pub const C_MIN: f64 = 1.0 / 51.0;
/// Upper end of the open window for `c`.
pub const C_MAX: f64 = 1.0 / (16.0 * PI);

/// Cap on rejection-sampling attempts for one placement.
pub const MAX_REJECTION_ATTEMPTS: usize = 1_000_000;

/// `c = k/n` for the smallest even integer `k` in the open interval `(n/51, n/(16π))`.
pub fn pick_c(n: usize) -> Result<f64> {
    let nf = n as f64;
    let (lo, hi) = (nf * C_MIN, nf * C_MAX);
    let mut k = lo.floor() as usize + 1;
    if k % 2 == 1 {
        k += 1;
    }
    if (k as f64) < hi {
        Ok(k as f64 / nf)
    } else {
        Err(Error::NoValidC { n, lo, hi })
    }
}

/// The constant `c` and the first-stage size `cn` used for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CChoice {
    pub c: f64,
    pub first_stage: usize,
    /// `c` came from an override outside the window `(1/51, 1/(16π))`.
    pub outside_window: bool,
}

impl CChoice {
    pub fn primary_count(&self) -> usize {
        self.first_stage / 2
    }
}

/// Resolves `c` for `n`: [`pick_c`] when `c_override` is `None`, otherwise the
/// override, which must satisfy `0 < c < 1/(16π)` with `cn` an even integer ≥ 2.
pub fn resolve_c(n: usize, c_override: Option<f64>) -> Result<CChoice> {
    let c = match c_override {
        None => pick_c(n)?,
        Some(c) => {
            if !(c > 0.0 && c < C_MAX) {
                return Err(Error::invalid(format!("c override {c} is outside (0, 1/(16 pi))")));
            }
            c
        }
    };
    let cn = c * n as f64;
    let k = cn.round();
    if (cn - k).abs() > 1e-9 * k.max(1.0) || k < 2.0 || k as usize % 2 == 1 {
        return Err(Error::invalid(format!(
            "c = {c} gives cn = {cn} for n = {n}; cn must be an even integer >= 2"
        )));
    }
    Ok(CChoice {
        c,
        first_stage: k as usize,
        outside_window: !(c > C_MIN && c < C_MAX),
    })
}

/// Counts of the threshold graph on a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGraphStats {
    pub m_points: usize,
    pub radius: f64,
    pub edge_count: usize,
    pub isolated_count: usize,
}

/// Joins every pair at distance at most `r` (inclusive) and counts.
pub fn threshold_graph(points: &[Point], r: f64) -> ThresholdGraphStats {
    let (edge_count, isolated) = threshold_isolated(points, r);
    ThresholdGraphStats {
        m_points: points.len(),
        radius: r,
        edge_count,
        isolated_count: isolated.len(),
    }
}

fn threshold_isolated(points: &[Point], r: f64) -> (usize, Vec<usize>) {
    let mut degree = vec![0usize; points.len()];
    let mut edges = 0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if euclid(points[i], points[j]) <= r {
                edges += 1;
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    let isolated = (0..points.len()).filter(|&i| degree[i] == 0).collect();
    (edges, isolated)
}

/// The first `count` points of a three-phase run with master seed `seed`.
pub fn first_stage_points(seed: u64, count: usize) -> Vec<Point> {
    let mut rng = substream(seed, tag::FIRST_STAGE, 0);
    let mut points: Vec<Point> = (0..count).map(|_| sample_point(&mut rng)).collect();
    resolve_coincident(&mut points, |i| {
        let mut rng = substream(seed, tag::RESAMPLE, i as u64);
        move || sample_point(&mut rng)
    });
    points
}

/// Record of one three-phase run.
///
/// `disc_assignment[k]` is the region of vertex `first_stage + k`: `0` for the
/// exterior region and `i` for the `i`-th primary disc (1-based, centred at
/// `primary[i - 1]`). Disc indices in `two_vertex_discs` and `nice_discs` use
/// the same numbering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreePhaseTrace {
    pub c: f64,
    pub first_stage: usize,
    #[serde(rename = "A")]
    pub primary: Vec<usize>,
    pub far: Vec<usize>,
    pub disc_assignment: Vec<usize>,
    pub two_vertex_discs: Vec<usize>,
    pub nice_discs: Vec<usize>,
    pub lambda: f64,
    pub conditioning_ok: bool,
    /// Isolated vertices found in the first-stage threshold graph.
    pub isolated_count: usize,
}

impl ThreePhaseTrace {
    /// Secondary vertex assigned to each disc that holds exactly one, by disc index.
    pub fn sole_occupants(&self) -> Vec<(usize, usize)> {
        let mut count = vec![0usize; self.primary.len() + 1];
        let mut occupant = vec![usize::MAX; self.primary.len() + 1];
        for (k, &region) in self.disc_assignment.iter().enumerate() {
            count[region] += 1;
            occupant[region] = self.first_stage + k;
        }
        (1..=self.primary.len())
            .filter(|&i| count[i] == 1)
            .map(|i| (i, occupant[i]))
            .collect()
    }
}

/// A three-phase run. `graph` is `None` when the first stage had fewer than
/// `cn/2` isolated vertices, in which case `trace.conditioning_ok` is false.
#[derive(Debug, Clone)]
pub struct ThreePhaseRun {
    pub graph: Option<EmbeddedGraph>,
    pub trace: ThreePhaseTrace,
}

/// Radius `1/√n` of the primary discs.
pub fn primary_radius(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// Radius `1/(λ√n)` within which the occupant of a nice disc lies.
pub fn nice_radius(n: usize, lambda: f64) -> f64 {
    1.0 / (lambda * (n as f64).sqrt())
}

struct Partition {
    discs: Vec<ClippedDisc>,
    /// Cumulative areas of `[W, R_1, ..., R_m]`.
    cumulative: Vec<f64>,
}

impl Partition {
    fn new(centres: &[Point], radius: f64) -> Result<Self> {
        let discs = centres
            .iter()
            .map(|&q| ClippedDisc::new(q, radius))
            .collect::<Result<Vec<_>>>()?;
        let disc_total: f64 = discs.iter().map(ClippedDisc::area).sum();
        let mut cumulative = Vec::with_capacity(discs.len() + 1);
        let mut acc = 1.0 - disc_total;
        cumulative.push(acc);
        for d in &discs {
            acc += d.area();
            cumulative.push(acc);
        }
        Ok(Partition { discs, cumulative })
    }

    /// Region index for a uniform draw `u ∈ [0, 1)`.
    fn region_for(&self, u: f64) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let target = u * total;
        self.cumulative
            .iter()
            .position(|&c| target < c)
            .unwrap_or(self.cumulative.len() - 1)
    }

    fn in_any_disc(&self, q: Point) -> bool {
        self.discs.iter().any(|d| d.contains(q))
    }

    fn place<R: Rng + ?Sized>(&self, region: usize, rng: &mut R) -> Result<Point> {
        for _ in 0..MAX_REJECTION_ATTEMPTS {
            let q = if region == 0 {
                let q = sample_point(rng);
                if self.in_any_disc(q) {
                    continue;
                }
                q
            } else {
                let disc = &self.discs[region - 1];
                let (x0, x1, y0, y1) = disc.bounding_box();
                let q = Point {
                    x: x0 + (x1 - x0) * rng.random::<f64>(),
                    y: y0 + (y1 - y0) * rng.random::<f64>(),
                };
                if !disc.contains(q) {
                    continue;
                }
                q
            };
            return Ok(q);
        }
        Err(Error::Internal(format!(
            "rejection sampling in region {region} exceeded {MAX_REJECTION_ATTEMPTS} attempts"
        )))
    }
}

/// Runs the three-phase construction for `params` with constant `c` (validated
/// by [`resolve_c`], which accepts overrides below `1/51`).
pub fn three_phase_generate(params: ModelParams, c: f64, lambda: f64) -> Result<ThreePhaseRun> {
    params.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let choice = resolve_c(params.n, Some(c))?;
    let n = params.n;
    let first = choice.first_stage;
    if first > n {
        return Err(Error::invalid(format!("cn = {first} exceeds n = {n}")));
    }
    let m = choice.primary_count();
    let radius = primary_radius(n);

    let mut points = first_stage_points(params.seed, first);
    let (_, isolated) = threshold_isolated(&points, 2.0 * radius);
    let mut trace = ThreePhaseTrace {
        c,
        first_stage: first,
        primary: Vec::new(),
        far: Vec::new(),
        disc_assignment: Vec::new(),
        two_vertex_discs: Vec::new(),
        nice_discs: Vec::new(),
        lambda,
        conditioning_ok: isolated.len() >= m,
        isolated_count: isolated.len(),
    };
    if !trace.conditioning_ok {
        return Ok(ThreePhaseRun { graph: None, trace });
    }
    trace.primary = isolated[..m].to_vec();
    trace.far = (0..first).filter(|i| !trace.primary.contains(i)).collect();

    let centres: Vec<Point> = trace.primary.iter().map(|&v| points[v]).collect();
    let partition = Partition::new(&centres, radius)?;

    let secondary = n - first;
    let mut phase_one = substream(params.seed, tag::PHASE_ONE, 0);
    trace.disc_assignment = (0..secondary)
        .map(|_| partition.region_for(phase_one.random::<f64>()))
        .collect();

    let mut phase_two = substream(params.seed, tag::PHASE_TWO, 0);
    for &region in &trace.disc_assignment {
        points.push(partition.place(region, &mut phase_two)?);
    }
    let failure = RefCell::new(None);
    resolve_coincident(&mut points, |i| {
        let region = trace.disc_assignment[i - first];
        let mut rng: StreamRng = substream(params.seed, tag::RESAMPLE, i as u64);
        let (partition, failure) = (&partition, &failure);
        move || match partition.place(region, &mut rng) {
            Ok(q) => q,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Point { x: f64::NAN, y: f64::NAN }
            }
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }

    let mut edge_rng = substream(params.seed, tag::EDGES, 0);
    let adjacency = sample_edges(n, params.p, &mut edge_rng);
    let graph = EmbeddedGraph::from_sampled(params, points, adjacency);

    trace.two_vertex_discs = trace.sole_occupants().into_iter().map(|(i, _)| i).collect();
    trace.nice_discs = nice_discs(&trace, &graph);
    Ok(ThreePhaseRun {
        graph: Some(graph),
        trace,
    })
}

fn nice_discs(trace: &ThreePhaseTrace, g: &EmbeddedGraph) -> Vec<usize> {
    let limit = nice_radius(g.n(), trace.lambda);
    trace
        .sole_occupants()
        .into_iter()
        .filter(|&(disc, occupant)| {
            trace.two_vertex_discs.contains(&disc) && {
                let centre = trace.primary[disc - 1];
                euclid(g.point(centre), g.point(occupant)) < limit
                    && !g.is_adjacent(centre, occupant)
            }
        })
        .map(|(disc, _)| disc)
        .collect()
}

/// Number of nice discs of `g`, recomputed from the trace's two-vertex discs.
pub fn nice_disc_count(trace: &ThreePhaseTrace, g: &EmbeddedGraph) -> usize {
    nice_discs(trace, g).len()
}

/// Checks that a trace reporting a nice disc has stretch factor above `λ`.
///
/// Returns `Some(true)` vacuously when the trace lists no nice disc, `None` when
/// the graph is disconnected, and otherwise whether `F > λ`.
pub fn verify_nice_implication(trace: &ThreePhaseTrace, g: &EmbeddedGraph) -> Result<Option<bool>> {
    if trace.nice_discs.is_empty() {
        return Ok(Some(true));
    }
    Ok(stretch_factor(g)?.value().map(|f| f > trace.lambda))
}

/// Geometric checks on a trace: primary discs pairwise disjoint, no far vertex
/// in a primary disc, each assigned secondary inside its region, and
/// `nice_discs ⊆ two_vertex_discs`. Returns a description of the first failure.
pub fn check_trace(trace: &ThreePhaseTrace, g: &EmbeddedGraph) -> std::result::Result<(), String> {
    let r = primary_radius(g.n());
    let r2 = r * r;
    for (a, &u) in trace.primary.iter().enumerate() {
        for &v in &trace.primary[a + 1..] {
            if euclid(g.point(u), g.point(v)) <= 2.0 * r {
                return Err(format!("primary discs around {u} and {v} intersect"));
            }
        }
        for &f in &trace.far {
            if euclid_sq(g.point(u), g.point(f)) <= r2 {
                return Err(format!("far vertex {f} lies in the disc of {u}"));
            }
        }
    }
    for (k, &region) in trace.disc_assignment.iter().enumerate() {
        let q = g.point(trace.first_stage + k);
        let inside: Vec<usize> = trace
            .primary
            .iter()
            .enumerate()
            .filter(|&(_, &c)| euclid_sq(g.point(c), q) <= r2)
            .map(|(i, _)| i + 1)
            .collect();
        let expected = if region == 0 { vec![] } else { vec![region] };
        if inside != expected {
            return Err(format!(
                "vertex {} assigned to region {region} lies in discs {inside:?}",
                trace.first_stage + k
            ));
        }
    }
    if let Some(d) = trace.nice_discs.iter().find(|d| !trace.two_vertex_discs.contains(d)) {
        return Err(format!("nice disc {d} is not a two-vertex disc"));
    }
    Ok(())
}

/// Total area of the partition `W, R_1, ..., R_m` for the primary centres of a trace.
pub fn partition_area(trace: &ThreePhaseTrace, g: &EmbeddedGraph) -> Result<(f64, Vec<f64>)> {
    let centres: Vec<Point> = trace.primary.iter().map(|&v| g.point(v)).collect();
    let partition = Partition::new(&centres, primary_radius(g.n()))?;
    let areas: Vec<f64> = partition.discs.iter().map(ClippedDisc::area).collect();
    Ok((partition.cumulative[0], areas))
}
