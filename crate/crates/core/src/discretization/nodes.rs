use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ReferenceRegion;
use crate::scalar::{angle_of, Real};

/// A fixed set of sample points on the reference region.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet<T: Real> {
    points: Vec<Vec<T>>,
    region: ReferenceRegion,
    id: String,
    seed: Option<u64>,
}

impl<T: Real> NodeSet<T> {
    /// `n` pseudo-random points, uniform on the region, reproducible from `seed`.
    pub fn uniform(region: ReferenceRegion, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = region.sample_uniform(&mut rng, n);
        Self {
            points,
            region,
            id: format!("uniform:{}:{n}:{seed}", region.name()),
            seed: Some(seed),
        }
    }

    /// Sunflower layout on the unit disk: `r = √((i+½)/n)`, golden-angle azimuths.
    pub fn fibonacci_disk(n: usize) -> Self {
        let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
        let points = (0..n)
            .map(|i| {
                let r = ((T::from_count(i) + T::half()) / T::from_count(n)).sqrt();
                let t = golden * T::from_count(i);
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        Self {
            points,
            region: ReferenceRegion::UnitBall { dim: 2 },
            id: format!("fibonacci_disk:{n}"),
            seed: None,
        }
    }

    /// Wraps explicit points; each must lie in the closed region.
    pub fn from_points(points: Vec<Vec<T>>, region: ReferenceRegion, id: String) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !region.contains(p)) {
            return Err(Error::OutsideDomain {
                point: p.iter().map(|v| v.as_f64()).collect(),
                region: region.name(),
            });
        }
        Ok(Self { points, region, id, seed: None })
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn region(&self) -> ReferenceRegion {
        self.region
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Index of the closest node (ties resolved to the lowest index).
    pub fn nearest(&self, x: &[T]) -> usize {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (i, p) in self.points.iter().enumerate() {
            let d: T = p.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Polar partition of the disk (or of a ring when `inner > 0`) into
/// `rings × sectors` equal-area cells: rings are uniform in `r²`, sectors
/// uniform in angle starting at `angle_offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub rings: usize,
    pub sectors: usize,
    pub inner: f64,
    pub angle_offset: f64,
    /// Gauss–Legendre order per direction used for cell averages.
    pub order: usize,
}

impl CellPartition {
    pub fn new(rings: usize, sectors: usize) -> Result<Self> {
        if rings == 0 || sectors == 0 {
            return Err(Error::InvalidArgument("partition needs rings, sectors >= 1".into()));
        }
        Ok(Self { rings, sectors, inner: 0.0, angle_offset: 0.0, order: 6 })
    }

    /// `m` cells: the ring count is the largest divisor of `m` not above `√m / 2`.
    pub fn with_cells(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("partition needs at least one cell".into()));
        }
        let cap = ((m as f64).sqrt() / 2.0).floor().max(1.0) as usize;
        let rings = (1..=cap).rev().find(|r| m % r == 0).unwrap_or(1);
        Self::new(rings, m / rings)
    }

    pub fn for_region(region: ReferenceRegion, m: usize) -> Result<Self> {
        let mut p = Self::with_cells(m)?;
        match region {
            ReferenceRegion::UnitBall { dim: 2 } => {}
            ReferenceRegion::UnitRing => p.inner = 0.5,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "polar cell partitions are defined on the disk and ring, not {}",
                    other.name()
                )))
            }
        }
        Ok(p)
    }

    pub fn region(&self) -> ReferenceRegion {
        if self.inner > 0.0 {
            ReferenceRegion::UnitRing
        } else {
            ReferenceRegion::UnitBall { dim: 2 }
        }
    }

    pub fn len(&self) -> usize {
        self.rings * self.sectors
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self) -> String {
        format!(
            "polar:{}x{}:inner={}:offset={}",
            self.rings, self.sectors, self.inner, self.angle_offset
        )
    }

    fn s_bounds(&self, ring: usize) -> (f64, f64) {
        let s0 = self.inner * self.inner;
        let ds = (1.0 - s0) / self.rings as f64;
        (s0 + ds * ring as f64, s0 + ds * (ring + 1) as f64)
    }

    /// Cell index of a point of the region; points outside are clamped.
    pub fn cell_of<T: Real>(&self, x: &[T]) -> usize {
        let s = (x[0] * x[0] + x[1] * x[1]).as_f64();
        let s0 = self.inner * self.inner;
        let ring = (((s - s0) / (1.0 - s0)) * self.rings as f64).floor();
        let ring = (ring.max(0.0) as usize).min(self.rings - 1);
        let mut t = angle_of(x[0], x[1]).as_f64() - self.angle_offset;
        t = t.rem_euclid(std::f64::consts::TAU);
        let sector = ((t / std::f64::consts::TAU) * self.sectors as f64).floor();
        let sector = (sector.max(0.0) as usize).min(self.sectors - 1);
        ring * self.sectors + sector
    }

    /// Tensor Gauss rule on one cell in `(r, θ)`: points and area weights.
    pub fn cell_rule<T: Real>(&self, cell: usize) -> (Vec<Vec<T>>, Vec<T>) {
        let ring = cell / self.sectors;
        let sector = cell % self.sectors;
        let (s0, s1) = self.s_bounds(ring);
        let (r0, r1) = (s0.sqrt(), s1.sqrt());
        let dt = std::f64::consts::TAU / self.sectors as f64;
        let t0 = self.angle_offset + dt * sector as f64;
        let (gx, gw) = gauss_legendre(self.order);
        let mut pts = Vec::with_capacity(self.order * self.order);
        let mut wts = Vec::with_capacity(self.order * self.order);
        for (xi, wi) in gx.iter().zip(&gw) {
            let r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * xi;
            for (xj, wj) in gx.iter().zip(&gw) {
                let t = t0 + 0.5 * dt * (1.0 + xj);
                pts.push(vec![T::lit(r * t.cos()), T::lit(r * t.sin())]);
                wts.push(T::lit(wi * wj * 0.25 * (r1 - r0) * dt * r));
            }
        }
        (pts, wts)
    }
}
