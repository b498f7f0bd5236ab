use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::encode::{
    decode_annulus, decode_domain, decode_function, encode_domain, encode_domain_any, encode_function,
    FunctionEncoder,
};
use super::nodes::{CellPartition, NodeSet};
use crate::error::Result;
use crate::geometry::{Deformation, Domain, ReferenceRegion};
use crate::scalar::Real;

pub type FieldFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// A domain together with a scalar function defined on it.
#[derive(Clone)]
pub struct FieldSample<T: Real> {
    pub domain: Domain<T>,
    pub f: FieldFn<T>,
    /// When present, the pull-back to the reference region, used instead of
    /// composing `f` with the deformation.
    pullback: Option<FieldFn<T>>,
}

impl<T: Real> fmt::Debug for FieldSample<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSample").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl<T: Real> FieldSample<T> {
    pub fn new(domain: Domain<T>, f: FieldFn<T>) -> Self {
        Self { domain, f, pullback: None }
    }

    /// Builds a sample from a function on the reference region; the physical
    /// function is `g ∘ D[Ω]⁻¹`.
    pub fn from_pullback(domain: Domain<T>, g: FieldFn<T>) -> Self {
        let dom = domain.clone();
        let g2 = g.clone();
        let f: FieldFn<T> = Arc::new(move |y: &[T]| match dom.deform_inverse_closed(y) {
            Ok(x) => g2(&x),
            Err(_) => T::nan(),
        });
        Self { domain, f, pullback: Some(g) }
    }

    /// `(f ∘ D[Ω])(x)` for a reference point `x`.
    pub fn pullback(&self, x: &[T]) -> Result<T> {
        match &self.pullback {
            Some(g) => Ok(g(x)),
            None => Ok((self.f)(&self.domain.deform_closed(x)?)),
        }
    }
}

/// Encoding sizes as functions of the discretization level `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kappa {
    pub domain: usize,
    pub function: usize,
}

impl Default for Kappa {
    fn default() -> Self {
        Self { domain: 1, function: 5 }
    }
}

impl Kappa {
    pub fn domain_len(&self, n: usize) -> usize {
        self.domain * n
    }

    pub fn function_len(&self, n: usize) -> usize {
        self.function * n
    }

    /// The function encoder used at level `n` on the given region.
    pub fn function_encoder<T: Real>(&self, region: ReferenceRegion, n: usize) -> Result<FunctionEncoder<T>> {
        let m = self.function_len(n);
        Ok(match region {
            ReferenceRegion::LocalUnion => FunctionEncoder::PointSample(NodeSet::uniform(region, m, 0)),
            _ => FunctionEncoder::CellAverage(CellPartition::for_region(region, m)?),
        })
    }
}

/// Applies `P_n = ψ_n ∘ φ_n`: the domain is replaced by its reconstruction
/// from `κ₁(n)` radii and the pulled-back function by its decoded
/// `κ₂(n)`-dimensional encoding, then the pair is mapped back to a function
/// on the reconstructed domain.
pub fn project_x<T: Real>(sample: &FieldSample<T>, n: usize) -> Result<FieldSample<T>> {
    project_x_with(sample, n, Kappa::default())
}

pub fn project_x_with<T: Real>(sample: &FieldSample<T>, n: usize, kappa: Kappa) -> Result<FieldSample<T>> {
    let k1 = kappa.domain_len(n);
    let domain = match &sample.domain {
        Domain::Star(s) => Domain::Star(decode_domain(&encode_domain(s, k1, true)?)?),
        Domain::Local(l) => Domain::Local(l.clone()),
        Domain::Annulus(_) => Domain::Annulus(decode_annulus(&encode_domain_any(&sample.domain, k1, true)?)?),
    };
    let encoder = kappa.function_encoder::<T>(sample.domain.reference(), n)?;
    let enc = encode_function(&*sample.f, &sample.domain, &encoder)?;
    let dec = decode_function(&enc, &encoder)?;
    Ok(FieldSample::from_pullback(domain, Arc::new(move |x: &[T]| dec.eval(x))))
}
