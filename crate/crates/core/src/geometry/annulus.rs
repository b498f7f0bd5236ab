use super::boundary::Boundary;
use super::region::ReferenceRegion;
use super::star::uniform_unit_circle;
use super::{Deformation, DEFAULT_METRIC_ANGLES};
use crate::error::{point_f64, Error, Result};
use crate::scalar::{norm, Real};

/// Annulus-like domain between two star curves about the inner centroid.
#[derive(Clone, Debug)]
pub struct AnnulusDomain<T: Real> {
    centroid: [T; 2],
    inner: Boundary<T>,
    outer: Boundary<T>,
}

impl<T: Real> AnnulusDomain<T> {
    pub fn new(centroid: [T; 2], inner: Boundary<T>, outer: Boundary<T>) -> Result<Self> {
        if inner.dim() != 2 || outer.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: 3 });
        }
        for (i, e) in uniform_unit_circle::<T>(DEFAULT_METRIC_ANGLES).iter().enumerate() {
            let (ri, ro) = (inner.radius(e), outer.radius(e));
            if !(ri > T::zero()) {
                return Err(Error::NonPositiveRadius { radius: ri.as_f64(), index: i });
            }
            if !(ro > ri) {
                return Err(Error::InvalidDomain(format!(
                    "outer radius {ro} not above inner radius {ri} at direction {i}"
                )));
            }
        }
        Ok(Self { centroid, inner, outer })
    }

    pub fn centroid(&self) -> [T; 2] {
        self.centroid
    }

    pub fn inner(&self) -> &Boundary<T> {
        &self.inner
    }

    pub fn outer(&self) -> &Boundary<T> {
        &self.outer
    }

    /// Centroid distance plus sampled sup-differences of both boundary curves.
    pub fn distance(&self, other: &Self, n_angles: usize) -> T {
        let mut si = T::zero();
        let mut so = T::zero();
        for e in uniform_unit_circle::<T>(n_angles) {
            si = si.max((self.inner.radius(&e) - other.inner.radius(&e)).abs());
            so = so.max((self.outer.radius(&e) - other.outer.radius(&e)).abs());
        }
        crate::scalar::dist(&self.centroid, &other.centroid) + si + so
    }
}

/// Maps ring radius 0.5 to the inner curve and radius 1 to the outer curve,
/// linearly in between. Boundary radii of the ring are accepted.
pub fn annulus_deform<T: Real>(dom: &AnnulusDomain<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
    }
    let r = norm(x);
    let eps = T::lit(1e-12);
    if r < T::half() - eps || r > T::one() + eps {
        return Err(Error::OutsideDomain {
            point: point_f64(x),
            region: "reference ring".into(),
        });
    }
    let e = [x[0] / r, x[1] / r];
    let rho = dom.outer.radius(&e) * (T::two() * r - T::one())
        + dom.inner.radius(&e) * (T::two() - T::two() * r);
    Ok(vec![dom.centroid[0] + rho * e[0], dom.centroid[1] + rho * e[1]])
}

/// Closed-form inverse of [`annulus_deform`].
pub fn annulus_deform_inverse<T: Real>(dom: &AnnulusDomain<T>, y: &[T]) -> Result<Vec<T>> {
    if y.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: y.len() });
    }
    let v = [y[0] - dom.centroid[0], y[1] - dom.centroid[1]];
    let rho = norm(&v);
    let outside = || Error::OutsideDomain {
        point: point_f64(y),
        region: "annulus".into(),
    };
    if rho == T::zero() {
        return Err(outside());
    }
    let e = [v[0] / rho, v[1] / rho];
    let (bi, bo) = (dom.inner.radius(&e), dom.outer.radius(&e));
    let slack = T::lit(1e-12) * bo;
    if rho < bi - slack || rho > bo + slack {
        return Err(outside());
    }
    let r = (rho + bo - T::two() * bi) / (T::two() * (bo - bi));
    Ok(vec![r * e[0], r * e[1]])
}

impl<T: Real> Deformation<T> for AnnulusDomain<T> {
    fn dim(&self) -> usize {
        2
    }

    fn reference(&self) -> ReferenceRegion {
        ReferenceRegion::UnitRing
    }

    fn deform(&self, x: &[T]) -> Result<Vec<T>> {
        annulus_deform(self, x)
    }

    fn deform_closed(&self, x: &[T]) -> Result<Vec<T>> {
        annulus_deform(self, x)
    }

    fn deform_inverse(&self, y: &[T]) -> Result<Vec<T>> {
        annulus_deform_inverse(self, y)
    }

    fn deform_inverse_closed(&self, y: &[T]) -> Result<Vec<T>> {
        annulus_deform_inverse(self, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_ring() {
        let d = AnnulusDomain::<f64>::new([0.0, 0.0], Boundary::Circle(0.5), Boundary::Circle(1.0)).unwrap();
        for x in [[0.6, 0.0], [0.0, -0.9], [0.5, 0.5]] {
            let y = annulus_deform(&d, &x).unwrap();
            assert!((y[0] - x[0]).abs() < 1e-15 && (y[1] - x[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn direct_formula() {
        let d = AnnulusDomain::<f64>::new([0.0, 0.0], Boundary::Circle(1.0), Boundary::Circle(2.0)).unwrap();
        let y = annulus_deform(&d, &[0.75, 0.0]).unwrap();
        assert!((y[0] - 1.5).abs() < 1e-15 && y[1].abs() < 1e-15);
        assert!(annulus_deform(&d, &[0.2, 0.0]).is_err());
    }

    /// Independent inverse: bisection on the reference radius.
    fn bisect_inverse(d: &AnnulusDomain<f64>, y: &[f64]) -> [f64; 2] {
        let c = d.centroid();
        let v = [y[0] - c[0], y[1] - c[1]];
        let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let e = [v[0] / rho, v[1] / rho];
        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let p = annulus_deform(d, &[mid * e[0], mid * e[1]]).unwrap();
            let pr = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
            if pr < rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        [r * e[0], r * e[1]]
    }

    #[test]
    fn round_trip_against_bisection() {
        let inner = Boundary::Fourier { r0: 0.3, cos: vec![0.0, 0.03], sin: vec![0.02] };
        let outer = Boundary::Ellipse { a: 1.0, b: 0.8 };
        let d = AnnulusDomain::<f64>::new([0.1, 0.2], inner, outer).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r = rng.random_range(0.5..1.0);
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let x = [r * t.cos(), r * t.sin()];
            let y = annulus_deform(&d, &x).unwrap();
            let oracle = bisect_inverse(&d, &y);
            let closed = annulus_deform_inverse(&d, &y).unwrap();
            assert!((oracle[0] - x[0]).abs() <= 1e-10 && (oracle[1] - x[1]).abs() <= 1e-10);
            assert!((closed[0] - x[0]).abs() <= 1e-12 && (closed[1] - x[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn radially_monotone() {
        let d = AnnulusDomain::<f64>::new(
            [0.0, 0.0],
            Boundary::Fourier { r0: 0.4, cos: vec![0.05], sin: vec![] },
            Boundary::Circle(1.0),
        )
        .unwrap();
        let mut last = 0.0;
        for k in 0..=50 {
            let r = 0.5 + 0.5 * k as f64 / 50.0;
            let y = annulus_deform(&d, &[r * 0.6, r * 0.8]).unwrap();
            let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
            assert!(rho > last);
            last = rho;
        }
    }
}
