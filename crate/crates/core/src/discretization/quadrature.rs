use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::nodes::CellPartition;
use super::projection::FieldSample;
use crate::error::{Error, Result};
use crate::geometry::{Deformation, ReferenceRegion};
use crate::scalar::Real;

pub const DEFAULT_QUADRATURE_NODES: usize = 4096;

/// A fixed weighted node set on a reference region.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature<T: Real> {
    pub points: Vec<Vec<T>>,
    pub weights: Vec<T>,
    pub region: ReferenceRegion,
}

impl<T: Real> Quadrature<T> {
    /// `n` uniform points with equal weights `m(Ω₀)/n`.
    pub fn monte_carlo(region: ReferenceRegion, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = region.sample_uniform(&mut rng, n);
        let w = T::lit(region.measure() / n as f64);
        Ok(Self { points, weights: vec![w; n], region })
    }

    /// Concatenated Gauss rules of every cell of a polar partition.
    pub fn from_partition(p: &CellPartition) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for c in 0..p.len() {
            let (x, w) = p.cell_rule::<T>(c);
            points.extend(x);
            weights.extend(w);
        }
        Self { points, weights, region: p.region() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(&[T]) -> T) -> T {
        self.points.iter().zip(&self.weights).map(|(x, &w)| w * g(x)).sum()
    }

    pub fn l2_norm(&self, g: impl Fn(&[T]) -> T) -> T {
        self.integrate(|x| {
            let v = g(x);
            v * v
        })
        .sqrt()
    }
}

/// `d(Ω₁, Ω₂) + ‖f₁∘D[Ω₁] − f₂∘D[Ω₂]‖_{L²(Ω₀)}` on the given quadrature.
pub fn x_metric<T: Real>(a: &FieldSample<T>, b: &FieldSample<T>, quad: &Quadrature<T>) -> Result<T> {
    let d = a.domain.distance(&b.domain)?;
    if a.domain.reference() != quad.region {
        return Err(Error::InvalidArgument(format!(
            "quadrature lives on {}, samples on {}",
            quad.region.name(),
            a.domain.reference().name()
        )));
    }
    let mut acc = T::zero();
    for (x, &w) in quad.points.iter().zip(&quad.weights) {
        let diff = a.pullback(x)? - b.pullback(x)?;
        acc += w * diff * diff;
    }
    Ok(d + acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, StarDomain};
    use rand::Rng;
    use std::sync::Arc;

    fn disk_sample(c: f64) -> FieldSample<f64> {
        FieldSample::new(Domain::Star(StarDomain::disk([0.0, 0.0], 1.0).unwrap()), Arc::new(move |_| c))
    }

    #[test]
    fn constant_functions() {
        let q = Quadrature::monte_carlo(ReferenceRegion::UnitBall { dim: 2 }, DEFAULT_QUADRATURE_NODES, 3).unwrap();
        let d = x_metric(&disk_sample(1.0), &disk_sample(3.5), &q).unwrap();
        assert!((d - 2.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(x_metric(&disk_sample(1.0), &disk_sample(1.0), &q).unwrap(), 0.0);
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let q = Quadrature::monte_carlo(ReferenceRegion::UnitBall { dim: 2 }, 512, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let make = |rng: &mut ChaCha8Rng| {
            let (a, b, k) = (rng.random_range(0.5..1.5), rng.random_range(0.5..1.5), rng.random_range(0.5..3.0));
            let c = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
            FieldSample::new(
                Domain::Star(StarDomain::ellipse(c, a, b).unwrap()),
                Arc::new(move |y: &[f64]| (k * y[0]).sin() + y[1] * y[1]),
            )
        };
        for _ in 0..100 {
            let (s1, s2, s3) = (make(&mut rng), make(&mut rng), make(&mut rng));
            let d12 = x_metric(&s1, &s2, &q).unwrap();
            let d21 = x_metric(&s2, &s1, &q).unwrap();
            let d13 = x_metric(&s1, &s3, &q).unwrap();
            let d32 = x_metric(&s3, &s2, &q).unwrap();
            assert!(d12 >= 0.0 && (d12 - d21).abs() < 1e-12);
            assert!(d12 <= d13 + d32 + 1e-12);
        }
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let q = Quadrature::monte_carlo(ReferenceRegion::UnitBall { dim: 2 }, 64, 5).unwrap();
        let local = FieldSample::new(
            Domain::Local(crate::geometry::LocalDomain::new(0.5).unwrap()),
            Arc::new(|_: &[f64]| 0.0),
        );
        assert!(matches!(x_metric(&disk_sample(0.0), &local, &q), Err(Error::FamilyMismatch(..))));
    }
}
