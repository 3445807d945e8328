//! Set representations and the operations the estimators need on them.

mod constrained;
mod interval;
mod parallelotope;
mod region;
mod strip;
mod support;
mod zonotope;

pub use constrained::{cz_intersect_strip, ConstrainedZonotope};
pub use interval::Interval;
pub use parallelotope::{par_intersect_strip, par_radius, Parallelotope};
pub use region::{Region, Volume};
pub use strip::{strip_propagate, HalfSpace, Sense, Strip};
pub use support::{box_range, box_slab_max, box_slab_range};
pub use zonotope::{zon_intersect_strip, Criterion, Zonotope, CONTAINS_TOL};
