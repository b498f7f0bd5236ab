//! Domain families, the domain metric and their deformation systems.
//!
//! Each family maps a fixed reference region onto every member domain:
//! star domains are images of the unit ball, locally deformed domains are
//! images of a fixed union of two boxes, and annulus-like domains are images
//! of the ring `B(0,1) \ B(0,0.5)`.

mod annulus;
mod boundary;
mod domain;
mod local;
mod polygon;
pub mod random;
mod region;
mod star;

pub use annulus::{annulus_deform, annulus_deform_inverse, AnnulusDomain};
pub use boundary::{interp_periodic, ray_hit_count, AngleFn, Boundary, DirectionFn, StarPolygon};
pub use domain::{Domain, DomainRecord};
pub use local::{local_deform, LocalDomain};
pub use polygon::{polygon_to_star, PolygonDomain};
pub use region::ReferenceRegion;
pub use star::{domain_area_centroid, star_deform, star_deform_inverse, star_metric, StarDomain};

use crate::error::Result;
use crate::scalar::Real;

/// Default number of sampled directions used to approximate a supremum over
/// the unit sphere.
pub const DEFAULT_METRIC_ANGLES: usize = 1024;

/// A bijection from a fixed reference region onto a physical domain.
pub trait Deformation<T: Real> {
    fn dim(&self) -> usize;

    fn reference(&self) -> ReferenceRegion;

    /// Maps an interior reference point into the domain.
    fn deform(&self, x: &[T]) -> Result<Vec<T>>;

    /// Like [`Deformation::deform`] but also accepts reference boundary points.
    fn deform_closed(&self, x: &[T]) -> Result<Vec<T>>;

    /// Maps an interior physical point back to the reference region.
    fn deform_inverse(&self, y: &[T]) -> Result<Vec<T>>;

    /// Like [`Deformation::deform_inverse`] but also accepts boundary points.
    fn deform_inverse_closed(&self, y: &[T]) -> Result<Vec<T>>;

    fn contains(&self, y: &[T]) -> bool {
        self.deform_inverse(y).is_ok()
    }
}
