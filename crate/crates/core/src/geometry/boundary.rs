//! Radius-of-direction boundary descriptions for star-shaped regions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{angle_of, Real};

/// Closure type for a planar boundary given by angle.
pub type AngleFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// Closure type for a spatial boundary given by unit direction.
pub type DirectionFn<T> = Arc<dyn Fn(&[T; 3]) -> T + Send + Sync>;

/// Boundary radius as a function of direction, measured from a reference point.
#[derive(Clone)]
pub enum Boundary<T: Real> {
    /// Constant radius in the plane.
    Circle(T),
    /// Axis-aligned ellipse with semi-axes `a` (along x) and `b` (along y).
    Ellipse { a: T, b: T },
    /// `r0 + Σ_k (cos[k-1]·cos kθ + sin[k-1]·sin kθ)`.
    Fourier { r0: T, cos: Vec<T>, sin: Vec<T> },
    /// Star-shaped polygon around the reference point.
    Polygon(StarPolygon<T>),
    /// Radii at `n` uniform angles starting at θ = 0, periodic linear interpolation.
    Samples(Vec<T>),
    /// Arbitrary planar boundary function of the angle.
    Angular(AngleFn<T>),
    /// Constant radius in space.
    Sphere(T),
    /// Arbitrary spatial boundary function of the unit direction.
    Spatial(DirectionFn<T>),
}

impl<T: Real> fmt::Debug for Boundary<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Circle(r) => write!(f, "Circle({r})"),
            Boundary::Ellipse { a, b } => write!(f, "Ellipse {{ a: {a}, b: {b} }}"),
            Boundary::Fourier { r0, cos, sin } => f
                .debug_struct("Fourier")
                .field("r0", r0)
                .field("cos", cos)
                .field("sin", sin)
                .finish(),
            Boundary::Polygon(p) => write!(f, "Polygon({} vertices)", p.vertices().len()),
            Boundary::Samples(s) => write!(f, "Samples({} nodes)", s.len()),
            Boundary::Angular(_) => write!(f, "Angular(<fn>)"),
            Boundary::Sphere(r) => write!(f, "Sphere({r})"),
            Boundary::Spatial(_) => write!(f, "Spatial(<fn>)"),
        }
    }
}

impl<T: Real> Boundary<T> {
    pub fn dim(&self) -> usize {
        match self {
            Boundary::Sphere(_) | Boundary::Spatial(_) => 3,
            _ => 2,
        }
    }

    /// Radius along the planar direction at angle `theta`.
    ///
    /// Spatial boundaries are evaluated on the equator.
    pub fn radius_at_angle(&self, theta: T) -> T {
        match self {
            Boundary::Circle(r) => *r,
            Boundary::Fourier { r0, cos, sin } => {
                let mut r = *r0;
                for (k, (&a, &b)) in cos.iter().zip(sin).enumerate() {
                    let kt = T::from_count(k + 1) * theta;
                    r += a * kt.cos() + b * kt.sin();
                }
                r
            }
            Boundary::Samples(s) => interp_periodic(s, theta),
            Boundary::Angular(f) => f(theta),
            _ => self.radius(&[theta.cos(), theta.sin()]),
        }
    }

    /// Radius along the unit direction `e` (length 2 or 3).
    pub fn radius(&self, e: &[T]) -> T {
        match self {
            Boundary::Circle(r) | Boundary::Sphere(r) => *r,
            Boundary::Ellipse { a, b } => {
                let (ex, ey) = (e[0], e[1]);
                *a * *b / ((*b * ex).powi(2) + (*a * ey).powi(2)).sqrt()
            }
            Boundary::Polygon(p) => p.radius(e[0], e[1]),
            Boundary::Spatial(f) => f(&[e[0], e[1], e[2]]),
            _ => self.radius_at_angle(angle_of(e[0], e[1])),
        }
    }

    /// Largest `|b(θ_{i+1}) - b(θ_i)| / Δθ` over `n` uniform angles (planar only).
    pub fn lipschitz_estimate(&self, n: usize) -> T {
        let step = T::TAU() / T::from_count(n);
        let mut prev = self.radius_at_angle(T::zero());
        let first = prev;
        let mut best = T::zero();
        for k in 1..=n {
            let cur = if k == n {
                first
            } else {
                self.radius_at_angle(step * T::from_count(k))
            };
            best = best.max((cur - prev).abs() / step);
            prev = cur;
        }
        best
    }

    /// Radii at `n` uniform angles starting at θ = 0.
    pub fn sample_uniform(&self, n: usize) -> Vec<T> {
        let step = T::TAU() / T::from_count(n);
        (0..n)
            .map(|k| self.radius_at_angle(step * T::from_count(k)))
            .collect()
    }
}

/// Periodic piecewise-linear interpolation of samples at `θ_k = 2πk/n`.
pub fn interp_periodic<T: Real>(samples: &[T], theta: T) -> T {
    let n = samples.len();
    let t = theta.wrap_angle() / T::TAU() * T::from_count(n);
    let k = t.floor();
    let frac = t - k;
    let i = k.to_usize().unwrap_or(0) % n;
    let j = (i + 1) % n;
    samples[i] * (T::one() - frac) + samples[j] * frac
}

/// A polygon that is star-shaped with respect to the origin of its vertex
/// coordinates, with counterclockwise vertices sorted by angle for `O(log n)`
/// radius lookup.
#[derive(Clone, Debug)]
pub struct StarPolygon<T: Real> {
    vertices: Vec<[T; 2]>,
    angles: Vec<T>,
    radii: Vec<T>,
}

impl<T: Real> StarPolygon<T> {
    /// Builds the polygon from vertices relative to the reference point.
    ///
    /// Fails unless every ray from the reference point meets the boundary
    /// exactly once.
    pub fn new(vertices: Vec<[T; 2]>) -> Result<Self> {
        let radii = vertices.iter().map(|v| v[0].hypot(v[1])).collect();
        let angles = vertices.iter().map(|v| angle_of(v[0], v[1])).collect();
        Self::build(vertices, angles, radii)
    }

    /// Builds the polygon with vertices `radii[i]·dirs[i]`. The radius along
    /// `dirs[i]` is then exactly `radii[i]`.
    pub fn from_radial(radii: &[T], dirs: &[Vec<T>]) -> Result<Self> {
        let vertices = radii
            .iter()
            .zip(dirs)
            .map(|(&r, e)| [r * e[0], r * e[1]])
            .collect();
        let angles = dirs.iter().map(|e| angle_of(e[0], e[1])).collect();
        Self::build(vertices, angles, radii.to_vec())
    }

    fn build(mut vertices: Vec<[T; 2]>, mut angles: Vec<T>, mut radii: Vec<T>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if signed_area(&vertices) < T::zero() {
            vertices.reverse();
            angles.reverse();
            radii.reverse();
        }
        let n = vertices.len();
        let tiny = T::lit(1e-14);
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            if p[0].hypot(p[1]) <= tiny {
                return Err(Error::NotStarShaped("vertex at reference point".into()));
            }
            if cross(p, q) <= tiny * (T::one() + p[0].hypot(p[1]) * q[0].hypot(q[1])) {
                return Err(Error::NotStarShaped(format!(
                    "edge {i} is not seen counterclockwise from the reference point"
                )));
            }
        }
        let start = (0..n)
            .min_by(|&a, &b| angles[a].partial_cmp(&angles[b]).unwrap())
            .unwrap();
        vertices.rotate_left(start);
        angles.rotate_left(start);
        radii.rotate_left(start);
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NotStarShaped("boundary winds more than once".into()));
        }
        // Exhaustive ray test: the hit count can change only at vertex angles.
        let mut probes: Vec<T> = angles.clone();
        for i in 0..n {
            let a0 = angles[i];
            let a1 = if i + 1 < n { angles[i + 1] } else { angles[0] + T::TAU() };
            probes.push((a0 + a1) * T::half());
        }
        for theta in probes {
            let hits = ray_hit_count(&vertices, [theta.cos(), theta.sin()], T::lit(1e-12));
            if hits != 1 {
                return Err(Error::NotStarShaped(format!(
                    "ray at angle {theta} meets the boundary {hits} times"
                )));
            }
        }
        Ok(Self { vertices, angles, radii })
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    /// Distance from the reference point to the boundary along `(ex, ey)`.
    pub fn radius(&self, ex: T, ey: T) -> T {
        let n = self.vertices.len();
        let theta = angle_of(ex, ey);
        // last vertex with angle <= theta, wrapping to the closing edge
        let k = match self
            .angles
            .partition_point(|&a| a <= theta)
            .checked_sub(1)
        {
            Some(k) => k,
            None => n - 1,
        };
        if theta == self.angles[k] {
            return self.radii[k];
        }
        let p = self.vertices[k];
        let q = self.vertices[(k + 1) % n];
        let d = [q[0] - p[0], q[1] - p[1]];
        cross(p, d) / cross([ex, ey], d)
    }

    pub fn translated(&self, shift: [T; 2]) -> Result<Self> {
        Self::new(
            self.vertices
                .iter()
                .map(|v| [v[0] + shift[0], v[1] + shift[1]])
                .collect(),
        )
    }
}

#[inline]
pub(crate) fn cross<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn signed_area<T: Real>(v: &[[T; 2]]) -> T {
    let n = v.len();
    let mut s = T::zero();
    for i in 0..n {
        s += cross(v[i], v[(i + 1) % n]);
    }
    s * T::half()
}

/// Number of distinct points where the ray `t·e, t > 0` meets the closed
/// polygon. A ray through a vertex counts once.
pub fn ray_hit_count<T: Real>(vertices: &[[T; 2]], e: [T; 2], tol: T) -> usize {
    let n = vertices.len();
    let mut hits: Vec<T> = Vec::new();
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let d = [q[0] - p[0], q[1] - p[1]];
        let det = cross(e, d);
        if det.abs() <= tol * (d[0].hypot(d[1])) {
            continue;
        }
        let t = cross(p, d) / det;
        let s = cross(p, e) / det;
        if s >= -tol && s <= T::one() + tol && t > tol {
            if !hits
                .iter()
                .any(|&h| (h - t).abs() <= tol * (T::one() + t.abs()))
            {
                hits.push(t);
            }
        }
    }
    hits.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_radii() {
        let p = StarPolygon::<f64>::new(vec![[1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
        assert!((p.radius(1.0, 0.0) - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.radius(s, s) - 2f64.sqrt()).abs() < 1e-14);
        assert!((p.radius(-s, -s) - 2f64.sqrt()).abs() < 1e-14);
        assert!((p.radius(0.0, -1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = StarPolygon::<f64>::new(vec![[-1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap();
        assert!((p.radius(0.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_star_polygon() {
        // reference point outside a thin notch
        let verts = vec![
            [1.0, -1.0],
            [1.0, 1.0],
            [-0.5, 0.1],
            [-0.5, 1.0],
            [-1.0, 1.0],
            [-1.0, -1.0],
        ];
        assert!(matches!(StarPolygon::<f64>::new(verts), Err(Error::NotStarShaped(_))));
    }

    #[test]
    fn vertex_ray_counts_once() {
        let v: Vec<[f64; 2]> = vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        assert_eq!(ray_hit_count(&v, [1.0, 0.0], 1e-12), 1);
        assert_eq!(ray_hit_count(&v, [0.6, 0.8], 1e-12), 1);
    }

    #[test]
    fn periodic_interp_wraps() {
        let s: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0];
        let tau = std::f64::consts::TAU;
        assert!((interp_periodic(&s, 0.0) - 1.0).abs() < 1e-15);
        assert!((interp_periodic(&s, tau * 7.0 / 8.0) - 2.5).abs() < 1e-12);
        assert!((interp_periodic(&s, tau) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_radius_matches_closed_form() {
        let b = Boundary::<f64>::Ellipse { a: 2.0, b: 1.0 };
        assert!((b.radius_at_angle(0.0) - 2.0).abs() < 1e-15);
        assert!((b.radius_at_angle(std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
        let t = 0.7f64;
        let expect = 2.0 / (t.cos().powi(2) + 4.0 * t.sin().powi(2)).sqrt();
        assert!((b.radius_at_angle(t) - expect).abs() < 1e-14);
    }
}
