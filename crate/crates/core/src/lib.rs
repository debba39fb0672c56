//! Bounded generalised min-cut enumeration and lower-bounded valued CSP solving
//! over exact extended rationals.

pub mod approx;
pub mod bgmc;
pub mod classify;
pub mod error;
pub mod gen;
pub mod graph;
pub mod numeric;
pub mod reductions;
pub mod setfn;
pub mod subset;
pub mod vcsp;

pub use error::{Error, ErrorKind, Result};
pub use graph::WeightedGraph;
pub use numeric::{ExtRational, Rational};
pub use setfn::{Budget, Checked, KSetFunction, SetFunction};
pub use subset::VertexSet;
