use super::boundary::{cross, signed_area, Boundary, StarPolygon};
use super::star::StarDomain;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A simple planar polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonDomain<T: Real> {
    vertices: Vec<[T; 2]>,
}

impl<T: Real> PolygonDomain<T> {
    pub fn new(mut vertices: Vec<[T; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain("polygon needs 3 or more vertices".into()));
        }
        if signed_area(&vertices) < T::zero() {
            vertices.reverse();
        }
        if !is_simple(&vertices) {
            return Err(Error::InvalidDomain("polygon edges intersect".into()));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> T {
        signed_area(&self.vertices)
    }

    /// Area centroid by the shoelace formula.
    pub fn centroid(&self) -> [T; 2] {
        let v = &self.vertices;
        let n = v.len();
        let (mut cx, mut cy) = (T::zero(), T::zero());
        for i in 0..n {
            let p = v[i];
            let q = v[(i + 1) % n];
            let w = cross(p, q);
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        let a6 = self.area() * T::lit(6.0);
        [cx / a6, cy / a6]
    }
}

fn segments_cross<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> bool {
    let sub = |p: [T; 2], q: [T; 2]| [p[0] - q[0], p[1] - q[1]];
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    (d1 > T::zero()) != (d2 > T::zero()) && (d3 > T::zero()) != (d4 > T::zero())
}

fn is_simple<T: Real>(v: &[[T; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            // skip adjacent edges, which share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Star-domain view of a polygon about its centroid, with exact ray–segment
/// radii. With `recenter` the centroid is moved to the origin.
pub fn polygon_to_star<T: Real>(p: &PolygonDomain<T>, recenter: bool) -> Result<StarDomain<T>> {
    let c = p.centroid();
    let rel: Vec<[T; 2]> = p
        .vertices()
        .iter()
        .map(|v| [v[0] - c[0], v[1] - c[1]])
        .collect();
    let poly = StarPolygon::new(rel)?;
    let centroid = if recenter {
        vec![T::zero(), T::zero()]
    } else {
        c.to_vec()
    };
    StarDomain::with_estimated_lipschitz(centroid, Boundary::Polygon(poly))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{star_deform, star_deform_inverse};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_boundary() {
        let sq = PolygonDomain::<f64>::new(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        let s = polygon_to_star(&sq, false).unwrap();
        assert!((s.boundary().radius_at_angle(0.0) - 1.0).abs() < 1e-14);
        let r = s.boundary().radius_at_angle(std::f64::consts::FRAC_PI_4);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn triangle_vertex_direction_gives_circumradius() {
        let h = 3f64.sqrt() / 2.0;
        let tri = PolygonDomain::<f64>::new(vec![[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap();
        let s = polygon_to_star(&tri, true).unwrap();
        assert_eq!(s.centroid(), &[0.0, 0.0]);
        // apex direction from the centroid is straight up
        let r = s.radius(&[0.0, 1.0]);
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_pentagon_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut angles: Vec<f64> = (0..5).map(|k| k as f64 * 1.2566 + rng.random_range(0.0..0.3)).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let verts = angles.iter().map(|t| [0.5 + 0.4 * t.cos(), 0.5 + 0.4 * t.sin()]).collect();
        let s = polygon_to_star(&PolygonDomain::<f64>::new(verts).unwrap(), false).unwrap();
        for _ in 0..50 {
            let r: f64 = rng.random_range(0.0..0.999);
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let x = [r * t.cos(), r * t.sin()];
            let y = star_deform(&s, &x).unwrap();
            let back = star_deform_inverse(&s, &y).unwrap();
            assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn self_intersecting_rejected() {
        let bow = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(PolygonDomain::<f64>::new(bow).is_err());
    }

    #[test]
    fn non_star_about_centroid_rejected() {
        // thin L-shape whose centroid sees a reflex corner from behind
        let l = vec![[0.0, 0.0], [3.0, 0.0], [3.0, 0.2], [0.2, 0.2], [0.2, 3.0], [0.0, 3.0]];
        let p = PolygonDomain::<f64>::new(l).unwrap();
        assert!(matches!(polygon_to_star(&p, true), Err(Error::NotStarShaped(_))));
    }
}
