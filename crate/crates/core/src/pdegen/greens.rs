use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dirichlet Green's function of the unit disk,
/// `G(x,y) = (ln(√(|x|²|y|² − 2x·y + 1)) − ln|x−y|) / 2π`.
pub fn greens_disk<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != 2 || y.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: x.len().max(y.len()) });
    }
    let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    if d2 == T::zero() {
        return Err(Error::InvalidArgument("Green's function evaluated at coincident points".into()));
    }
    let xx = x[0] * x[0] + x[1] * x[1];
    let yy = y[0] * y[0] + y[1] * y[1];
    let xy = x[0] * y[0] + x[1] * y[1];
    let image = xx * yy - T::two() * xy + T::one();
    Ok((image.ln() - d2.ln()) / (T::two() * T::TAU()))
}
