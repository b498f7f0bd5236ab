use super::boundary::Boundary;
use super::region::ReferenceRegion;
use super::Deformation;
use crate::discretization::directions_3d_fibonacci;
use crate::error::{point_f64, Error, Result};
use crate::scalar::{norm, Real};

/// Number of directions used to spot-check positivity and the Lipschitz bound.
const CHECK_DIRECTIONS: usize = 1024;

/// A star domain: every ray from `centroid` meets the boundary once, at the
/// radius given by `boundary`.
#[derive(Clone, Debug)]
pub struct StarDomain<T: Real> {
    centroid: Vec<T>,
    boundary: Boundary<T>,
    lipschitz: T,
}

impl<T: Real> StarDomain<T> {
    pub fn new(centroid: Vec<T>, boundary: Boundary<T>, lipschitz: T) -> Result<Self> {
        let d = boundary.dim();
        if centroid.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: centroid.len(),
            });
        }
        if !(lipschitz > T::zero()) {
            return Err(Error::InvalidDomain(format!(
                "lipschitz bound must be positive, got {lipschitz}"
            )));
        }
        let dom = Self {
            centroid,
            boundary,
            lipschitz,
        };
        for (i, e) in dom.check_directions().iter().enumerate() {
            let r = dom.boundary.radius(e);
            if !(r > T::zero()) || !r.is_finite() {
                return Err(Error::NonPositiveRadius {
                    radius: r.as_f64(),
                    index: i,
                });
            }
        }
        if d == 2 {
            let est = dom.boundary.lipschitz_estimate(CHECK_DIRECTIONS);
            if est > lipschitz * T::lit(1.0 + 1e-9) + T::lit(1e-12) {
                return Err(Error::InvalidDomain(format!(
                    "boundary Lipschitz estimate {est} exceeds bound {lipschitz}"
                )));
            }
        }
        Ok(dom)
    }

    /// Builds a planar domain, taking the Lipschitz bound from a dense estimate.
    pub fn with_estimated_lipschitz(centroid: Vec<T>, boundary: Boundary<T>) -> Result<Self> {
        let est = if boundary.dim() == 2 {
            boundary.lipschitz_estimate(CHECK_DIRECTIONS)
        } else {
            T::zero()
        };
        // small headroom so the constructor's own spot check passes
        let bound = est * T::lit(1.0 + 1e-6) + T::lit(1e-9);
        Self::new(centroid, boundary, bound)
    }

    pub fn disk(center: [T; 2], radius: T) -> Result<Self> {
        Self::new(center.to_vec(), Boundary::Circle(radius), T::lit(1e-9))
    }

    pub fn ball(center: [T; 3], radius: T) -> Result<Self> {
        Self::new(center.to_vec(), Boundary::Sphere(radius), T::lit(1e-9))
    }

    pub fn ellipse(center: [T; 2], a: T, b: T) -> Result<Self> {
        Self::with_estimated_lipschitz(center.to_vec(), Boundary::Ellipse { a, b })
    }

    pub fn dim(&self) -> usize {
        self.centroid.len()
    }

    pub fn centroid(&self) -> &[T] {
        &self.centroid
    }

    pub fn boundary(&self) -> &Boundary<T> {
        &self.boundary
    }

    pub fn lipschitz_bound(&self) -> T {
        self.lipschitz
    }

    /// Boundary radius along the unit direction `e`.
    pub fn radius(&self, e: &[T]) -> T {
        self.boundary.radius(e)
    }

    /// Same domain moved by `shift`; the boundary function is unchanged.
    pub fn translated(&self, shift: &[T]) -> Self {
        Self {
            centroid: self.centroid.iter().zip(shift).map(|(&c, &s)| c + s).collect(),
            boundary: self.boundary.clone(),
            lipschitz: self.lipschitz,
        }
    }

    /// Same domain with its reference point moved to the origin.
    pub fn recentered(&self) -> Self {
        Self {
            centroid: vec![T::zero(); self.dim()],
            boundary: self.boundary.clone(),
            lipschitz: self.lipschitz,
        }
    }

    /// Distance between `centroid` and the quadrature centroid of the region.
    pub fn centroid_defect(&self, n_quad: usize) -> Result<T> {
        let (_, c) = domain_area_centroid(self, n_quad)?;
        Ok(crate::scalar::dist(&c, &self.centroid))
    }

    fn check_directions(&self) -> Vec<Vec<T>> {
        if self.dim() == 2 {
            uniform_unit_circle(CHECK_DIRECTIONS)
        } else {
            directions_3d_fibonacci(CHECK_DIRECTIONS).expect("n >= 4")
        }
    }

    fn radial_parts(&self, y: &[T]) -> Result<(Vec<T>, T)> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        let v: Vec<T> = y.iter().zip(&self.centroid).map(|(&a, &c)| a - c).collect();
        let r = norm(&v);
        Ok((v, r))
    }
}

/// Unit vectors at angles `2πk/n`, `k = 0..n`.
pub(crate) fn uniform_unit_circle<T: Real>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|k| {
            let t = T::TAU() * T::from_count(k) / T::from_count(n);
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn metric_directions<T: Real>(dim: usize, n: usize) -> Result<Vec<Vec<T>>> {
    if dim == 2 {
        Ok(uniform_unit_circle(n))
    } else {
        directions_3d_fibonacci(n)
    }
}

/// Domain distance: centroid distance plus the sampled supremum of the radius
/// difference over `n_angles` directions.
pub fn star_metric<T: Real>(a: &StarDomain<T>, b: &StarDomain<T>, n_angles: usize) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if n_angles < 8 {
        return Err(Error::InvalidArgument(format!(
            "star_metric needs at least 8 directions, got {n_angles}"
        )));
    }
    let mut sup = T::zero();
    for (i, e) in metric_directions::<T>(a.dim(), n_angles)?.iter().enumerate() {
        let ra = a.radius(e);
        let rb = b.radius(e);
        for r in [ra, rb] {
            if !(r > T::zero()) {
                return Err(Error::NonPositiveRadius {
                    radius: r.as_f64(),
                    index: i,
                });
            }
        }
        sup = sup.max((ra - rb).abs());
    }
    Ok(crate::scalar::dist(a.centroid(), b.centroid()) + sup)
}

/// `c + b(x/‖x‖)·x` for `‖x‖ < 1`; the origin maps to the centroid.
pub fn star_deform<T: Real>(dom: &StarDomain<T>, x: &[T]) -> Result<Vec<T>> {
    let r = check_reference(dom, x)?;
    if r >= T::one() {
        return Err(outside_ball(x));
    }
    Ok(deform_unchecked(dom, x, r))
}

/// Inverse of [`star_deform`] for points strictly inside the domain.
pub fn star_deform_inverse<T: Real>(dom: &StarDomain<T>, y: &[T]) -> Result<Vec<T>> {
    let (v, r) = dom.radial_parts(y)?;
    if r == T::zero() {
        return Ok(vec![T::zero(); dom.dim()]);
    }
    let e: Vec<T> = v.iter().map(|&c| c / r).collect();
    let b = dom.radius(&e);
    if r >= b {
        return Err(Error::OutsideDomain {
            point: point_f64(y),
            region: "star domain".into(),
        });
    }
    Ok(v.iter().map(|&c| c / b).collect())
}

fn check_reference<T: Real>(dom: &StarDomain<T>, x: &[T]) -> Result<T> {
    if x.len() != dom.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom.dim(),
            got: x.len(),
        });
    }
    Ok(norm(x))
}

fn outside_ball<T: Real>(x: &[T]) -> Error {
    Error::OutsideDomain {
        point: point_f64(x),
        region: "reference unit ball".into(),
    }
}

fn deform_unchecked<T: Real>(dom: &StarDomain<T>, x: &[T], r: T) -> Vec<T> {
    if r == T::zero() {
        return dom.centroid.clone();
    }
    let e: Vec<T> = x.iter().map(|&c| c / r).collect();
    let b = dom.radius(&e);
    x.iter().zip(&dom.centroid).map(|(&xi, &c)| c + b * xi).collect()
}

impl<T: Real> Deformation<T> for StarDomain<T> {
    fn dim(&self) -> usize {
        self.centroid.len()
    }

    fn reference(&self) -> ReferenceRegion {
        ReferenceRegion::UnitBall { dim: self.dim() }
    }

    fn deform(&self, x: &[T]) -> Result<Vec<T>> {
        star_deform(self, x)
    }

    fn deform_closed(&self, x: &[T]) -> Result<Vec<T>> {
        let r = check_reference(self, x)?;
        if r > T::one() + T::lit(1e-12) {
            return Err(outside_ball(x));
        }
        Ok(deform_unchecked(self, x, r))
    }

    fn deform_inverse(&self, y: &[T]) -> Result<Vec<T>> {
        star_deform_inverse(self, y)
    }

    fn deform_inverse_closed(&self, y: &[T]) -> Result<Vec<T>> {
        let (v, r) = self.radial_parts(y)?;
        if r == T::zero() {
            return Ok(vec![T::zero(); self.dim()]);
        }
        let e: Vec<T> = v.iter().map(|&c| c / r).collect();
        let b = self.radius(&e);
        if r > b * (T::one() + T::lit(1e-10)) {
            return Err(Error::OutsideDomain {
                point: point_f64(y),
                region: "closed star domain".into(),
            });
        }
        let s = (r / b).min(T::one());
        Ok(e.iter().map(|&c| c * s).collect())
    }
}

/// Area (volume in 3-d) and centroid by polar quadrature with `n_quad` nodes.
pub fn domain_area_centroid<T: Real>(dom: &StarDomain<T>, n_quad: usize) -> Result<(T, Vec<T>)> {
    if n_quad < 64 {
        return Err(Error::InvalidArgument(format!(
            "domain_area_centroid needs n_quad >= 64, got {n_quad}"
        )));
    }
    let d = dom.dim();
    let mut measure = T::zero();
    let mut moment = vec![T::zero(); d];
    if d == 2 {
        let step = T::TAU() / T::from_count(n_quad);
        for k in 0..n_quad {
            let t = (T::from_count(k) + T::half()) * step;
            let (s, c) = t.sin_cos();
            let b = dom.boundary.radius_at_angle(t);
            measure += b * b * T::half() * step;
            let m = b * b * b / T::lit(3.0) * step;
            moment[0] += m * c;
            moment[1] += m * s;
        }
    } else {
        let dirs = directions_3d_fibonacci::<T>(n_quad)?;
        let w = T::lit(4.0) * T::PI() / T::from_count(n_quad);
        for e in &dirs {
            let b = dom.radius(e);
            measure += b.powi(3) / T::lit(3.0) * w;
            let m = b.powi(4) / T::lit(4.0) * w;
            for (mi, &ei) in moment.iter_mut().zip(e) {
                *mi += m * ei;
            }
        }
    }
    let centroid = dom
        .centroid
        .iter()
        .zip(&moment)
        .map(|(&c, &m)| c + m / measure)
        .collect();
    Ok((measure, centroid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn metric_examples() {
        let a = StarDomain::<f64>::disk([0.0, 0.0], 1.0).unwrap();
        let b = StarDomain::<f64>::disk([0.0, 0.0], 1.2).unwrap();
        assert!((star_metric(&a, &b, 1024).unwrap() - 0.2).abs() < 1e-14);
        let e = StarDomain::<f64>::ellipse([0.0, 0.0], 0.5, 0.3).unwrap();
        let t = e.translated(&[0.3, 0.4]);
        assert!((star_metric(&e, &t, 1024).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(star_metric(&e, &e, 1024).unwrap(), 0.0);
    }

    #[test]
    fn metric_errors() {
        let a = StarDomain::<f64>::disk([0.0, 0.0], 1.0).unwrap();
        let b = StarDomain::<f64>::ball([0.0, 0.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            star_metric(&a, &b, 64),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(star_metric(&a, &a, 4).is_err());
        assert!(StarDomain::new(vec![0.0, 0.0], Boundary::Circle(-1.0), 1.0).is_err());
    }

    #[test]
    fn deform_examples() {
        let id = StarDomain::<f64>::disk([0.0, 0.0], 1.0).unwrap();
        assert_eq!(star_deform(&id, &[0.3, 0.4]).unwrap(), vec![0.3, 0.4]);
        let d2 = StarDomain::<f64>::disk([1.0, 0.0], 2.0).unwrap();
        assert_eq!(star_deform(&d2, &[0.5, 0.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(star_deform_inverse(&d2, &[2.0, 0.0]).unwrap(), vec![0.5, 0.0]);
        let el = StarDomain::<f64>::ellipse([0.0, 0.0], 2.0, 1.0).unwrap();
        let y = star_deform(&el, &[0.0, 0.9]).unwrap();
        assert!(y[0].abs() < 1e-15 && (y[1] - 0.9).abs() < 1e-15);
        assert_eq!(star_deform(&d2, &[0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(star_deform_inverse(&d2, &[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(star_deform(&d2, &[1.0, 0.0]).is_err());
        assert!(star_deform_inverse(&d2, &[3.0, 0.0]).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let el = StarDomain::<f64>::ellipse([0.2, -0.1], 1.5, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = loop {
                let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if p[0] * p[0] + p[1] * p[1] < 1.0 {
                    break p;
                }
            };
            let y = star_deform(&el, &x).unwrap();
            let back = star_deform_inverse(&el, &y).unwrap();
            assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn area_centroid_examples() {
        let (a, c) = domain_area_centroid(&StarDomain::<f64>::disk([0.0, 0.0], 1.0).unwrap(), 4096).unwrap();
        assert!((a - PI).abs() < 1e-6 && c[0].abs() < 1e-6 && c[1].abs() < 1e-6);
        let (a, c) = domain_area_centroid(&StarDomain::<f64>::disk([1.0, 1.0], 2.0).unwrap(), 4096).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-6 && (c[0] - 1.0).abs() < 1e-6 && (c[1] - 1.0).abs() < 1e-6);
        let (a, _) = domain_area_centroid(&StarDomain::<f64>::ellipse([0.0, 0.0], 2.0, 1.0).unwrap(), 4096).unwrap();
        assert!((a - 2.0 * PI).abs() < 1e-6);
        let (v, c) = domain_area_centroid(&StarDomain::<f64>::ball([0.0, 0.0, 0.0], 1.0).unwrap(), 4096).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-9 && c.iter().all(|x| x.abs() < 1e-3));
        assert!(domain_area_centroid(&StarDomain::<f64>::disk([0.0, 0.0], 1.0).unwrap(), 32).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let d = StarDomain::<f32>::disk([1.0, 0.0], 2.0).unwrap();
        let y = star_deform(&d, &[0.25, 0.0]).unwrap();
        assert!((y[0] - 1.5).abs() < 1e-6);
    }
}
