//! Exact simulation of the stadium billiard map, its first-return map to the
//! arcs, and Monte Carlo checks of the anomalous limit laws of its Birkhoff
//! sums.

pub mod billiard;
pub mod cascade;
pub mod error;
pub mod geometry;
pub mod induced;
pub mod limits;
pub mod observables;
pub mod parallel;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod stats;
pub mod validate;

pub use billiard::{
    backward, forward, macro_backward, macro_forward, tangent_map, CollisionStep, MacroKind,
    MacroStep,
};
pub use error::{Error, Result};
pub use geometry::{BoundaryComponent, PhasePoint, StadiumGeometry, Vec2};
pub use induced::{in_x, induced_backward, induced_forward, ExcursionKind, ExcursionRecord};

/// Library version, recorded in experiment summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
