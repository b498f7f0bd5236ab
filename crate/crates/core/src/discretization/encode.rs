use serde::{Deserialize, Serialize};

use super::directions::DirectionScheme;
use super::nodes::{CellPartition, NodeSet};
use crate::error::{Error, Result};
use crate::geometry::{AnnulusDomain, Boundary, Deformation, Domain, StarDomain, StarPolygon};
use crate::scalar::Real;

/// Boundary radii of a domain at a fixed direction set, optionally with its
/// centroid. For the locally deformed family the single entry is the offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainEncoding<T: Real> {
    pub radii: Vec<T>,
    pub centroid: Option<Vec<T>>,
    pub direction_set_id: String,
}

impl<T: Real> DomainEncoding<T> {
    /// Network features: centroid (when present) followed by the radii.
    pub fn features(&self) -> Vec<T> {
        let mut v = self.centroid.clone().unwrap_or_default();
        v.extend_from_slice(&self.radii);
        v
    }
}

/// Encodes a star domain on the planar or Fibonacci direction set of size `n`.
pub fn encode_domain<T: Real>(dom: &StarDomain<T>, n: usize, include_centroid: bool) -> Result<DomainEncoding<T>> {
    let scheme = DirectionScheme::for_dim(dom.dim(), n);
    let radii: Vec<T> = scheme.vectors::<T>()?.iter().map(|e| dom.radius(e)).collect();
    if let Some((i, r)) = radii.iter().enumerate().find(|(_, r)| !(**r > T::zero())) {
        return Err(Error::NonPositiveRadius { radius: r.as_f64(), index: i });
    }
    Ok(DomainEncoding {
        radii,
        centroid: include_centroid.then(|| dom.centroid().to_vec()),
        direction_set_id: scheme.id(),
    })
}

/// Family-aware domain encoding: star radii, the local offset, or the inner
/// radii followed by the outer radii of an annulus.
pub fn encode_domain_any<T: Real>(dom: &Domain<T>, n: usize, include_centroid: bool) -> Result<DomainEncoding<T>> {
    match dom {
        Domain::Star(s) => encode_domain(s, n, include_centroid),
        Domain::Local(l) => Ok(DomainEncoding {
            radii: vec![l.offset()],
            centroid: None,
            direction_set_id: "local_offset".into(),
        }),
        Domain::Annulus(a) => {
            let dirs = DirectionScheme::Uniform2d(n).vectors::<T>()?;
            let mut radii: Vec<T> = dirs.iter().map(|e| a.inner().radius(e)).collect();
            radii.extend(dirs.iter().map(|e| a.outer().radius(e)));
            Ok(DomainEncoding {
                radii,
                centroid: include_centroid.then(|| a.centroid().to_vec()),
                direction_set_id: format!("annulus:{}", DirectionScheme::Uniform2d(n).id()),
            })
        }
    }
}

fn scheme_from_id(id: &str) -> Result<DirectionScheme> {
    let (kind, n) = id
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("bad direction set id `{id}`")))?;
    let n: usize = n.parse().map_err(|_| Error::Format(format!("bad direction count in `{id}`")))?;
    match kind {
        "uniform2d" => Ok(DirectionScheme::Uniform2d(n)),
        "fibonacci3d" => Ok(DirectionScheme::Fibonacci3d(n)),
        _ => Err(Error::Format(format!("unknown direction scheme `{kind}`"))),
    }
}

/// Reconstructs the polygon through `c + radii[i]·e_i`. Reconstructions are
/// not re-centred on their own centroid.
pub fn decode_domain<T: Real>(enc: &DomainEncoding<T>) -> Result<StarDomain<T>> {
    let scheme = scheme_from_id(&enc.direction_set_id)?;
    if scheme.dim() != 2 {
        return Err(Error::InvalidArgument(
            "polytope reconstruction is implemented for planar encodings only".into(),
        ));
    }
    if scheme.count() != enc.radii.len() {
        return Err(Error::WidthMismatch(format!(
            "{} radii for direction set of {}",
            enc.radii.len(),
            scheme.count()
        )));
    }
    if let Some((i, r)) = enc.radii.iter().enumerate().find(|(_, r)| !(**r > T::zero())) {
        return Err(Error::NonPositiveRadius { radius: r.as_f64(), index: i });
    }
    let dirs = scheme.vectors::<T>()?;
    let poly = StarPolygon::from_radial(&enc.radii, &dirs)?;
    let centroid = enc.centroid.clone().unwrap_or_else(|| vec![T::zero(); 2]);
    StarDomain::with_estimated_lipschitz(centroid, Boundary::Polygon(poly))
}

pub(crate) fn decode_annulus<T: Real>(enc: &DomainEncoding<T>) -> Result<AnnulusDomain<T>> {
    let n = enc.radii.len() / 2;
    let dirs = DirectionScheme::Uniform2d(n).vectors::<T>()?;
    let inner = StarPolygon::from_radial(&enc.radii[..n], &dirs)?;
    let outer = StarPolygon::from_radial(&enc.radii[n..], &dirs)?;
    let c = enc.centroid.clone().unwrap_or_else(|| vec![T::zero(); 2]);
    AnnulusDomain::new([c[0], c[1]], Boundary::Polygon(inner), Boundary::Polygon(outer))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionScheme {
    PointSample,
    CellAverage,
    BoundarySample,
}

/// How a pulled-back function is turned into a vector.
#[derive(Clone, Debug)]
pub enum FunctionEncoder<T: Real> {
    /// Values at fixed nodes of the reference region.
    PointSample(NodeSet<T>),
    /// Averages over the cells of a polar partition.
    CellAverage(CellPartition),
    /// Values at fixed points of the reference boundary (for boundary data).
    BoundarySample(NodeSet<T>),
}

impl<T: Real> FunctionEncoder<T> {
    pub fn len(&self) -> usize {
        match self {
            FunctionEncoder::PointSample(n) | FunctionEncoder::BoundarySample(n) => n.len(),
            FunctionEncoder::CellAverage(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self) -> String {
        match self {
            FunctionEncoder::PointSample(n) | FunctionEncoder::BoundarySample(n) => n.id().to_string(),
            FunctionEncoder::CellAverage(p) => p.id(),
        }
    }

    pub fn scheme(&self) -> FunctionScheme {
        match self {
            FunctionEncoder::PointSample(_) => FunctionScheme::PointSample,
            FunctionEncoder::CellAverage(_) => FunctionScheme::CellAverage,
            FunctionEncoder::BoundarySample(_) => FunctionScheme::BoundarySample,
        }
    }

    /// Encodes a function already expressed on the reference region.
    pub fn encode_reference(&self, g: &dyn Fn(&[T]) -> Result<T>) -> Result<FunctionEncoding<T>> {
        let values = match self {
            FunctionEncoder::PointSample(nodes) | FunctionEncoder::BoundarySample(nodes) => nodes
                .points()
                .iter()
                .map(|x| g(x))
                .collect::<Result<Vec<T>>>()?,
            FunctionEncoder::CellAverage(p) => (0..p.len())
                .map(|c| {
                    let (pts, w) = p.cell_rule::<T>(c);
                    // accumulating deviations from the first value keeps constants exact
                    let v0 = g(&pts[0])?;
                    let mut acc = T::zero();
                    let mut area = T::zero();
                    for (x, &wi) in pts.iter().zip(&w) {
                        acc += wi * (g(x)? - v0);
                        area += wi;
                    }
                    Ok(v0 + acc / area)
                })
                .collect::<Result<Vec<T>>>()?,
        };
        Ok(FunctionEncoding { values, scheme: self.scheme(), node_set_id: self.id() })
    }
}

/// A pulled-back function sampled by a [`FunctionEncoder`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionEncoding<T: Real> {
    pub values: Vec<T>,
    pub scheme: FunctionScheme,
    pub node_set_id: String,
}

/// Encodes `f ∘ D[Ω]` for a function `f` defined on the physical domain.
pub fn encode_function<T: Real, D: Deformation<T> + ?Sized>(
    f: &dyn Fn(&[T]) -> T,
    dom: &D,
    encoder: &FunctionEncoder<T>,
) -> Result<FunctionEncoding<T>> {
    let region = dom.reference();
    let boundary = matches!(encoder, FunctionEncoder::BoundarySample(_));
    encoder.encode_reference(&|x: &[T]| {
        if boundary {
            Ok(f(&dom.deform_closed(x)?))
        } else {
            if !region.contains(x) {
                return Err(Error::OutsideDomain {
                    point: x.iter().map(|v| v.as_f64()).collect(),
                    region: region.name(),
                });
            }
            Ok(f(&dom.deform(x)?))
        }
    })
}

/// Piecewise-constant reconstruction on the reference region.
#[derive(Clone, Debug)]
pub struct DecodedFunction<T: Real> {
    values: Vec<T>,
    encoder: FunctionEncoder<T>,
}

impl<T: Real> DecodedFunction<T> {
    pub fn eval(&self, x: &[T]) -> T {
        match &self.encoder {
            FunctionEncoder::CellAverage(p) => self.values[p.cell_of(x)],
            FunctionEncoder::PointSample(nodes) | FunctionEncoder::BoundarySample(nodes) => {
                self.values[nodes.nearest(x)]
            }
        }
    }
}

/// Cell averages decode to the piecewise-constant function on the cells;
/// point samples decode to the nearest-node (Voronoi) constant.
pub fn decode_function<T: Real>(enc: &FunctionEncoding<T>, encoder: &FunctionEncoder<T>) -> Result<DecodedFunction<T>> {
    if enc.node_set_id != encoder.id() || enc.values.len() != encoder.len() {
        return Err(Error::WidthMismatch(format!(
            "encoding `{}` ({} values) does not match encoder `{}` ({} values)",
            enc.node_set_id,
            enc.values.len(),
            encoder.id(),
            encoder.len()
        )));
    }
    Ok(DecodedFunction { values: enc.values.clone(), encoder: encoder.clone() })
}

/// The full input of a sample: domain part, one part per input function and
/// optional boundary data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedEncoding<T: Real> {
    pub domain_part: DomainEncoding<T>,
    pub function_parts: Vec<FunctionEncoding<T>>,
    pub boundary_part: Option<FunctionEncoding<T>>,
}

impl<T: Real> CombinedEncoding<T> {
    pub fn total_len(&self) -> usize {
        self.domain_part.features().len()
            + self.function_parts.iter().map(|f| f.values.len()).sum::<usize>()
            + self.boundary_part.as_ref().map_or(0, |b| b.values.len())
    }

    /// One input vector per network branch, in branch order.
    pub fn branch_inputs(&self) -> Vec<Vec<T>> {
        let mut v = vec![self.domain_part.features()];
        v.extend(self.function_parts.iter().map(|f| f.values.clone()));
        if let Some(b) = &self.boundary_part {
            v.push(b.values.clone());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_to_star, star_metric, PolygonDomain, ReferenceRegion};
    use std::f64::consts::PI;

    #[test]
    fn domain_encoding_examples() {
        let disk = StarDomain::<f64>::disk([0.0, 0.0], 0.7).unwrap();
        let e = encode_domain(&disk, 8, false).unwrap();
        assert!(e.radii.iter().all(|&r| r == 0.7));
        let sq = PolygonDomain::<f64>::new(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        let e = encode_domain(&polygon_to_star(&sq, true).unwrap(), 4, false).unwrap();
        for r in e.radii {
            assert!((r - 1.0).abs() < 1e-14);
        }
        let el = StarDomain::<f64>::ellipse([0.0, 0.0], 2.0, 1.0).unwrap();
        let e = encode_domain(&el, 4, true).unwrap();
        let expect = [1.0, 2.0, 1.0, 2.0]; // directions i = 1..4 start at π/2
        for (r, x) in e.radii.iter().zip(expect) {
            assert!((r - x).abs() < 1e-12);
        }
        assert_eq!(e.centroid, Some(vec![0.0, 0.0]));
    }

    #[test]
    fn decode_then_encode_is_exact() {
        let el = StarDomain::<f64>::ellipse([0.3, -0.2], 0.9, 0.4).unwrap();
        for n in [5, 16, 33, 128] {
            let enc = encode_domain(&el, n, true).unwrap();
            let again = encode_domain(&decode_domain(&enc).unwrap(), n, true).unwrap();
            assert_eq!(enc, again);
        }
    }

    /// Independent oracle: distance from the origin to the chord between
    /// adjacent unit-circle vertices, evaluated densely in angle.
    fn inscribed_gap(n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let m = 20000;
        for k in 0..m {
            let t = 2.0 * PI * k as f64 / m as f64;
            let sector = 2.0 * PI / n as f64;
            let local = (t - sector).rem_euclid(sector) - sector / 2.0;
            let r = (PI / n as f64).cos() / local.cos();
            worst = worst.max(1.0 - r);
        }
        worst
    }

    #[test]
    fn disk_projection_gap() {
        let disk = StarDomain::<f64>::disk([0.0, 0.0], 1.0).unwrap();
        for n in [4, 8, 16, 32] {
            let p = decode_domain(&encode_domain(&disk, n, true).unwrap()).unwrap();
            let d = star_metric(&disk, &p, 4096).unwrap();
            let oracle = inscribed_gap(n);
            assert!((d - oracle).abs() < 1e-6, "n={n}: {d} vs {oracle}");
            assert!((d - (1.0 - (PI / n as f64).cos())).abs() < 1e-6);
        }
    }

    #[test]
    fn function_encoding_examples() {
        let region = ReferenceRegion::UnitBall { dim: 2 };
        let nodes = NodeSet::<f64>::uniform(region, 64, 1);
        let enc = FunctionEncoder::PointSample(nodes.clone());
        let disk = StarDomain::<f64>::disk([1.0, -2.0], 2.0).unwrap();
        let c = encode_function(&|_| 3.0, &disk, &enc).unwrap();
        assert!(c.values.iter().all(|&v| v == 3.0));
        let lin = encode_function(&|y| y[0] - 1.0, &disk, &enc).unwrap();
        for (v, x) in lin.values.iter().zip(nodes.points()) {
            assert!((v - 2.0 * x[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn half_disk_cell_average() {
        // analytic: ∫_{x>0} x dA / (π/2) = (2/3) / (π/2)
        let mut p = CellPartition::new(1, 2).unwrap();
        p.angle_offset = PI / 2.0;
        let enc = FunctionEncoder::<f64>::CellAverage(p);
        let unit = StarDomain::<f64>::disk([0.0, 0.0], 1.0).unwrap();
        let e = encode_function(&|y| y[0], &unit, &enc).unwrap();
        let a = 4.0 / (3.0 * PI);
        assert!((e.values[0] + a).abs() < 1e-8 && (e.values[1] - a).abs() < 1e-8, "{:?}", e.values);
    }

    #[test]
    fn decode_mismatch_is_rejected() {
        let e1 = FunctionEncoder::<f64>::CellAverage(CellPartition::with_cells(16).unwrap());
        let e2 = FunctionEncoder::<f64>::CellAverage(CellPartition::with_cells(64).unwrap());
        let enc = e1.encode_reference(&|_| Ok(1.0)).unwrap();
        assert!(decode_function(&enc, &e2).is_err());
        let dec = decode_function(&enc, &e1).unwrap();
        assert_eq!(dec.eval(&[0.3, 0.1]), 1.0);
    }
}
