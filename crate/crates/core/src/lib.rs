//! Neural operators on families of domains: deformation-based encodings of
//! `(domain, function)` pairs, a Poisson data generator, a multi-branch
//! operator network and a hybrid iterative solver that uses it.

pub mod cli;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod him;
pub mod operator;
pub mod pdegen;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type StarDomainF64 = geometry::StarDomain<f64>;
pub type StarDomainF32 = geometry::StarDomain<f32>;
pub type DomainF64 = geometry::Domain<f64>;
pub type DomainF32 = geometry::Domain<f32>;
pub type MioNetF64 = operator::MioNet<f64>;
pub type MioNetF32 = operator::MioNet<f32>;
pub type DatasetF64 = pdegen::Dataset<f64>;
pub type DatasetF32 = pdegen::Dataset<f32>;
