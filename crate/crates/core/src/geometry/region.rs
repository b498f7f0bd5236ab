use rand::Rng;

use crate::scalar::{norm, Real};

/// The reference region `Ω₀` shared by a domain family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceRegion {
    /// Unit ball `B(0,1)` in dimension 2 or 3.
    UnitBall { dim: usize },
    /// The ring `B(0,1) \ B(0,0.5)`.
    UnitRing,
    /// `[0,1]² ∪ [0.35,0.65]×[1,1.3]`.
    LocalUnion,
}

impl ReferenceRegion {
    pub fn dim(&self) -> usize {
        match self {
            ReferenceRegion::UnitBall { dim } => *dim,
            _ => 2,
        }
    }

    /// Closed-set membership.
    pub fn contains<T: Real>(&self, x: &[T]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            ReferenceRegion::UnitBall { .. } => norm(x) <= T::one(),
            ReferenceRegion::UnitRing => {
                let r = norm(x);
                r >= T::half() && r <= T::one()
            }
            ReferenceRegion::LocalUnion => {
                let (a, b) = (x[0].as_f64(), x[1].as_f64());
                let main = (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b);
                let top = (0.35..=0.65).contains(&a) && (1.0..=1.3).contains(&b);
                main || top
            }
        }
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            ReferenceRegion::UnitBall { dim: 3 } => 4.0 * PI / 3.0,
            ReferenceRegion::UnitBall { .. } => PI,
            ReferenceRegion::UnitRing => 0.75 * PI,
            ReferenceRegion::LocalUnion => 1.0 + 0.3 * 0.3,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ReferenceRegion::UnitBall { dim } => (vec![-1.0; *dim], vec![1.0; *dim]),
            ReferenceRegion::UnitRing => (vec![-1.0; 2], vec![1.0; 2]),
            ReferenceRegion::LocalUnion => (vec![0.0, 0.0], vec![1.0, 1.3]),
        }
    }

    /// Draws `n` points uniformly from the region by rejection sampling.
    pub fn sample_uniform<T: Real, R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<T>> {
        let (lo, hi) = self.bounding_box();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let p: Vec<T> = lo
                .iter()
                .zip(&hi)
                .map(|(&l, &h)| T::lit(rng.random_range(l..h)))
                .collect();
            if self.contains_open(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Open-set membership (strict interior for balls and rings).
    pub fn contains_open<T: Real>(&self, x: &[T]) -> bool {
        match self {
            ReferenceRegion::UnitBall { .. } => norm(x) < T::one(),
            ReferenceRegion::UnitRing => {
                let r = norm(x);
                r > T::half() && r < T::one()
            }
            ReferenceRegion::LocalUnion => self.contains(x),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ReferenceRegion::UnitBall { dim } => format!("unit_ball{dim}"),
            ReferenceRegion::UnitRing => "unit_ring".into(),
            ReferenceRegion::LocalUnion => "local_union".into(),
        }
    }
}
