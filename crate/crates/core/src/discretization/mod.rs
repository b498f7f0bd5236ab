//! Finite-dimensional encoders for domains and for functions pulled back to
//! the reference region, their decoders, and the metric on domain/function
//! pairs.

mod directions;
mod encode;
mod nodes;
mod projection;
mod quadrature;

pub use directions::{directions_2d, directions_3d_fibonacci, DirectionScheme};
pub use encode::{
    decode_domain, decode_function, encode_domain, encode_domain_any, encode_function,
    CombinedEncoding, DecodedFunction, DomainEncoding, FunctionEncoder, FunctionEncoding,
    FunctionScheme,
};
pub use nodes::{gauss_legendre, CellPartition, NodeSet};
pub use projection::{project_x, FieldFn, FieldSample, Kappa};
pub use quadrature::{x_metric, Quadrature, DEFAULT_QUADRATURE_NODES};
