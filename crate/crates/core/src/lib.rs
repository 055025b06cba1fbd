//! Stretch factor of randomly embedded random graphs.
//!
//! `n` points are placed uniformly at random in the unit square, each pair is
//! joined independently with probability `p`, and every edge is weighted by the
//! Euclidean distance between its end points. The stretch factor is the maximum,
//! over vertex pairs, of graph distance divided by Euclidean distance.
//!
//! Modules:
//!
//! - [`geom`]: points, distances, and the area of a disc clipped to the unit square.
//! - [`model`]: the seeded graph generator and its JSON form.
//! - [`stretch`]: exact stretch factor, all-pairs distances, and a Floyd–Warshall oracle.
//! - [`bounds`]: closed-form tail and threshold bounds, and the regime classifier.
//! - [`constructs`]: the threshold graph, the three-phase coupled generator, and nice discs.
//! - [`harness`]: declarative Monte Carlo experiments, summaries, reports and file output.

pub mod bounds;
pub mod constructs;
pub mod error;
pub mod geom;
pub mod harness;
pub mod model;
pub mod rng;
pub mod stretch;

pub use error::{Error, Result};
pub use geom::{ClippedDisc, Point};
pub use model::{EmbeddedGraph, ModelParams};
pub use stretch::{DistanceMatrix, StretchReport};
