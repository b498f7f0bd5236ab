//! Random domain generators used for dataset construction.

use rand::Rng;

use super::annulus::AnnulusDomain;
use super::boundary::Boundary;
use super::polygon::PolygonDomain;
use super::star::{domain_area_centroid, StarDomain};
use crate::error::{Error, Result};
use crate::scalar::{angle_of, Real};

/// Smooth random star domains `b(θ) = r₀ + Σ_k α_k cos kθ + β_k sin kθ`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StarSampler {
    pub r0: f64,
    pub modes: usize,
    pub amplitude: f64,
    pub min_radius: f64,
    pub lipschitz: f64,
    /// Nodes of the stored boundary interpolant.
    pub interp_nodes: usize,
    pub recenter: bool,
}

impl Default for StarSampler {
    fn default() -> Self {
        Self {
            r0: 0.35,
            modes: 5,
            amplitude: 0.04,
            min_radius: 0.1,
            lipschitz: 2.0,
            interp_nodes: 512,
            recenter: true,
        }
    }
}

const MAX_REJECTIONS: usize = 10_000;

impl StarSampler {
    /// Raw Fourier boundary about the origin, after rejection.
    pub fn sample_fourier<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Boundary<T>> {
        for _ in 0..MAX_REJECTIONS {
            let mut draw = || T::lit(rng.random_range(-self.amplitude..=self.amplitude));
            let cos: Vec<T> = (0..self.modes).map(|_| draw()).collect();
            let sin: Vec<T> = (0..self.modes).map(|_| draw()).collect();
            let b = Boundary::Fourier { r0: T::lit(self.r0), cos, sin };
            let min = b
                .sample_uniform(1024)
                .into_iter()
                .fold(T::infinity(), |a, r| a.min(r));
            if min <= T::lit(self.min_radius) {
                continue;
            }
            if b.lipschitz_estimate(1024) > T::lit(self.lipschitz) {
                continue;
            }
            return Ok(b);
        }
        Err(Error::InvalidArgument(
            "star sampler rejected every candidate; loosen the constraints".into(),
        ))
    }

    /// A star domain whose reference point is the quadrature centroid of the
    /// sampled region; the boundary is resampled about that centroid.
    pub fn sample<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StarDomain<T>> {
        let raw = self.sample_fourier::<T, R>(rng)?;
        let origin = StarDomain::new(vec![T::zero(); 2], raw.clone(), T::lit(self.lipschitz))?;
        let (_, c) = domain_area_centroid(&origin, 4096)?;
        let radii = recast_about(&raw, [c[0], c[1]], self.interp_nodes);
        let centroid = if self.recenter { vec![T::zero(); 2] } else { c };
        StarDomain::with_estimated_lipschitz(centroid, Boundary::Samples(radii))
    }
}

/// Radii of the curve `|p| = b(angle p)` seen from `c` at `n` uniform angles,
/// found by bisection along each ray.
pub fn recast_about<T: Real>(b: &Boundary<T>, c: [T; 2], n: usize) -> Vec<T> {
    let max_b = b.sample_uniform(2048).into_iter().fold(T::zero(), |a, r| a.max(r));
    let hi0 = max_b * T::two() + c[0].hypot(c[1]);
    (0..n)
        .map(|k| {
            let t = T::TAU() * T::from_count(k) / T::from_count(n);
            let e = [t.cos(), t.sin()];
            let g = |s: T| {
                let p = [c[0] + s * e[0], c[1] + s * e[1]];
                p[0].hypot(p[1]) - b.radius_at_angle(angle_of(p[0], p[1]))
            };
            let (mut lo, mut hi) = (T::zero(), hi0);
            for _ in 0..80 {
                let mid = (lo + hi) * T::half();
                if g(mid) < T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo + hi) * T::half()
        })
        .collect()
}

/// Random convex polygons inscribed in a circle inside `[0,1]²`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PolygonSampler {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Minimum angular gap between consecutive vertices, as a fraction of `2π/k`.
    pub min_gap: f64,
}

impl Default for PolygonSampler {
    fn default() -> Self {
        Self {
            min_vertices: 4,
            max_vertices: 6,
            radius_min: 0.3,
            radius_max: 0.45,
            min_gap: 0.5,
        }
    }
}

impl PolygonSampler {
    pub fn sample<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PolygonDomain<T>> {
        if self.min_vertices < 3 || self.max_vertices < self.min_vertices {
            return Err(Error::InvalidArgument("polygon vertex range".into()));
        }
        let k = rng.random_range(self.min_vertices..=self.max_vertices);
        let radius = rng.random_range(self.radius_min..=self.radius_max);
        let gap = self.min_gap * std::f64::consts::TAU / k as f64;
        for _ in 0..MAX_REJECTIONS {
            let mut angles: Vec<f64> = (0..k)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ok = (0..k).all(|i| {
                let next = if i + 1 < k { angles[i + 1] } else { angles[0] + std::f64::consts::TAU };
                next - angles[i] >= gap
            });
            if !ok {
                continue;
            }
            let verts = angles
                .iter()
                .map(|t| [T::lit(0.5 + radius * t.cos()), T::lit(0.5 + radius * t.sin())])
                .collect();
            return PolygonDomain::new(verts);
        }
        Err(Error::InvalidArgument("polygon sampler rejected every candidate".into()))
    }
}

/// Annulus-like domains with smooth inner and outer curves about the origin.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnnulusSampler {
    pub inner: StarSampler,
    pub outer: StarSampler,
}

impl Default for AnnulusSampler {
    fn default() -> Self {
        Self {
            inner: StarSampler { r0: 0.15, amplitude: 0.015, min_radius: 0.05, ..Default::default() },
            outer: StarSampler { r0: 0.4, amplitude: 0.03, min_radius: 0.25, ..Default::default() },
        }
    }
}

impl AnnulusSampler {
    /// Inner and outer Fourier curves, both measured from the origin. The
    /// origin is taken as the inner reference point.
    pub fn sample<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<AnnulusDomain<T>> {
        let inner = self.inner.sample_fourier::<T, R>(rng)?;
        let outer = self.outer.sample_fourier::<T, R>(rng)?;
        let n = self.inner.interp_nodes;
        AnnulusDomain::new(
            [T::zero(), T::zero()],
            Boundary::Samples(inner.sample_uniform(n)),
            Boundary::Samples(outer.sample_uniform(n)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn star_sampler_centroid_is_reference_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StarSampler { recenter: false, ..Default::default() };
        for _ in 0..5 {
            let d: StarDomain<f64> = s.sample(&mut rng).unwrap();
            assert!(d.centroid_defect(4096).unwrap() < 1e-4);
            let min = d.boundary().sample_uniform(512).into_iter().fold(f64::MAX, f64::min);
            assert!(min > 0.1);
        }
    }

    #[test]
    fn polygon_sampler_is_star_about_centroid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p: PolygonDomain<f64> = PolygonSampler::default().sample(&mut rng).unwrap();
            assert!(p.vertices().len() >= 4 && p.vertices().len() <= 6);
            for v in p.vertices() {
                assert!(v[0] > 0.0 && v[0] < 1.0 && v[1] > 0.0 && v[1] < 1.0);
            }
            crate::geometry::polygon_to_star(&p, true).unwrap();
        }
    }

    #[test]
    fn annulus_sampler_is_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: AnnulusDomain<f64> = AnnulusSampler::default().sample(&mut rng).unwrap();
        assert!(a.outer().radius_at_angle(1.0) > a.inner().radius_at_angle(1.0));
    }
}
