use serde::{Deserialize, Serialize};

use super::annulus::AnnulusDomain;
use super::boundary::Boundary;
use super::local::LocalDomain;
use super::polygon::{polygon_to_star, PolygonDomain};
use super::region::ReferenceRegion;
use super::star::{star_metric, StarDomain};
use super::{Deformation, DEFAULT_METRIC_ANGLES};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default count of stored boundary samples.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 512;

/// Any member of the supported domain families.
#[derive(Clone, Debug)]
pub enum Domain<T: Real> {
    Star(StarDomain<T>),
    Local(LocalDomain<T>),
    Annulus(AnnulusDomain<T>),
}

impl<T: Real> Domain<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Star(s) if matches!(s.boundary(), Boundary::Polygon(_)) => "polygon",
            Domain::Star(_) => "star",
            Domain::Local(_) => "local",
            Domain::Annulus(_) => "annulus",
        }
    }

    /// Family distance; errors when the two domains belong to different families.
    pub fn distance(&self, other: &Self) -> Result<T> {
        match (self, other) {
            (Domain::Star(a), Domain::Star(b)) => star_metric(a, b, DEFAULT_METRIC_ANGLES),
            (Domain::Local(a), Domain::Local(b)) => Ok(a.distance(b)),
            (Domain::Annulus(a), Domain::Annulus(b)) => Ok(a.distance(b, DEFAULT_METRIC_ANGLES)),
            _ => Err(Error::FamilyMismatch(self.family().into(), other.family().into())),
        }
    }

    /// Family name; polygons and smooth star domains share the star family.
    pub fn family(&self) -> &'static str {
        match self {
            Domain::Star(_) => "star",
            Domain::Local(_) => "local",
            Domain::Annulus(_) => "annulus",
        }
    }

    pub fn to_record(&self) -> DomainRecord {
        let f = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
        match self {
            Domain::Star(s) => {
                let vertices = match s.boundary() {
                    Boundary::Polygon(p) => Some(
                        p.vertices()
                            .iter()
                            .map(|v| {
                                vec![
                                    (v[0] + s.centroid()[0]).as_f64(),
                                    (v[1] + s.centroid()[1]).as_f64(),
                                ]
                            })
                            .collect(),
                    ),
                    _ => None,
                };
                let samples = if s.dim() == 2 {
                    Some(f(&s.boundary().sample_uniform(DEFAULT_BOUNDARY_SAMPLES)))
                } else {
                    None
                };
                DomainRecord {
                    kind: self.kind().into(),
                    centroid: Some(f(s.centroid())),
                    boundary_samples: samples,
                    lipschitz: Some(s.lipschitz_bound().as_f64()),
                    vertices,
                    ..Default::default()
                }
            }
            Domain::Local(l) => DomainRecord {
                kind: "local".into(),
                offset_a: Some(l.offset().as_f64()),
                ..Default::default()
            },
            Domain::Annulus(a) => DomainRecord {
                kind: "annulus".into(),
                centroid: Some(f(&a.centroid())),
                boundary_samples: Some(f(&a.outer().sample_uniform(DEFAULT_BOUNDARY_SAMPLES))),
                inner_samples: Some(f(&a.inner().sample_uniform(DEFAULT_BOUNDARY_SAMPLES))),
                ..Default::default()
            },
        }
    }

    pub fn from_record(rec: &DomainRecord) -> Result<Self> {
        let t = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        let missing = |k: &str| Error::Format(format!("domain record of kind {} lacks `{k}`", rec.kind));
        match rec.kind.as_str() {
            "star" => {
                let c = rec.centroid.as_deref().ok_or_else(|| missing("centroid"))?;
                let b = rec.boundary_samples.as_deref().ok_or_else(|| missing("boundary_samples"))?;
                let boundary = Boundary::Samples(t(b));
                let dom = match rec.lipschitz {
                    Some(l) => StarDomain::new(t(c), boundary, T::lit(l))?,
                    None => StarDomain::with_estimated_lipschitz(t(c), boundary)?,
                };
                Ok(Domain::Star(dom))
            }
            "polygon" => {
                let v = rec.vertices.as_ref().ok_or_else(|| missing("vertices"))?;
                let verts = v
                    .iter()
                    .map(|p| {
                        if p.len() == 2 {
                            Ok([T::lit(p[0]), T::lit(p[1])])
                        } else {
                            Err(Error::Format("polygon vertex must have 2 coordinates".into()))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let poly = PolygonDomain::new(verts)?;
                Ok(Domain::Star(polygon_to_star(&poly, false)?))
            }
            "local" => Ok(Domain::Local(LocalDomain::new(T::lit(
                rec.offset_a.ok_or_else(|| missing("offset_a"))?,
            ))?)),
            "annulus" => {
                let c = rec.centroid.as_deref().ok_or_else(|| missing("centroid"))?;
                if c.len() != 2 {
                    return Err(Error::Format("annulus centroid must be 2-d".into()));
                }
                let outer = rec.boundary_samples.as_deref().ok_or_else(|| missing("boundary_samples"))?;
                let inner = rec.inner_samples.as_deref().ok_or_else(|| missing("inner_samples"))?;
                Ok(Domain::Annulus(AnnulusDomain::new(
                    [T::lit(c[0]), T::lit(c[1])],
                    Boundary::Samples(t(inner)),
                    Boundary::Samples(t(outer)),
                )?))
            }
            other => Err(Error::Format(format!("unknown domain kind `{other}`"))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(s)?)
    }
}

/// JSON form of a domain. Boundary samples are radii at uniform angles from
/// θ = 0, counterclockwise, about `centroid`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl<T: Real> Deformation<T> for Domain<T> {
    fn dim(&self) -> usize {
        match self {
            Domain::Star(d) => d.dim(),
            _ => 2,
        }
    }

    fn reference(&self) -> ReferenceRegion {
        match self {
            Domain::Star(d) => d.reference(),
            Domain::Local(d) => d.reference(),
            Domain::Annulus(d) => d.reference(),
        }
    }

    fn deform(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            Domain::Star(d) => d.deform(x),
            Domain::Local(d) => d.deform(x),
            Domain::Annulus(d) => d.deform(x),
        }
    }

    fn deform_closed(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            Domain::Star(d) => d.deform_closed(x),
            Domain::Local(d) => d.deform_closed(x),
            Domain::Annulus(d) => d.deform_closed(x),
        }
    }

    fn deform_inverse(&self, y: &[T]) -> Result<Vec<T>> {
        match self {
            Domain::Star(d) => d.deform_inverse(y),
            Domain::Local(d) => d.deform_inverse(y),
            Domain::Annulus(d) => d.deform_inverse(y),
        }
    }

    fn deform_inverse_closed(&self, y: &[T]) -> Result<Vec<T>> {
        match self {
            Domain::Star(d) => d.deform_inverse_closed(y),
            Domain::Local(d) => d.deform_inverse_closed(y),
            Domain::Annulus(d) => d.deform_inverse_closed(y),
        }
    }
}
