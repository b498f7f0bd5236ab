use super::region::ReferenceRegion;
use super::Deformation;
use crate::error::{point_f64, Error, Result};
use crate::scalar::Real;

/// `Ω(a) = [0,1]² ∪ [a-0.15, a+0.15]×[1,1.3]`: a fixed block with a sliding cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalDomain<T: Real> {
    offset_a: T,
}

impl<T: Real> LocalDomain<T> {
    pub fn new(offset_a: T) -> Result<Self> {
        if !(offset_a >= T::lit(0.3) && offset_a <= T::lit(0.7)) {
            return Err(Error::InvalidDomain(format!(
                "local offset {offset_a} outside [0.3, 0.7]"
            )));
        }
        Ok(Self { offset_a })
    }

    pub fn offset(&self) -> T {
        self.offset_a
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.offset_a - other.offset_a).abs()
    }

    fn shift(&self) -> T {
        self.offset_a - T::half()
    }

    /// Closed-set membership in `Ω(a)`.
    pub fn contains_closed(&self, y: &[T]) -> bool {
        let (a, h) = (self.offset_a, T::lit(0.15));
        let main = in_range(y[0], T::zero(), T::one()) && in_range(y[1], T::zero(), T::one());
        let cap = in_range(y[0], a - h, a + h) && in_range(y[1], T::one(), T::lit(1.3));
        main || cap
    }
}

fn in_range<T: Real>(v: T, lo: T, hi: T) -> bool {
    v >= lo && v <= hi
}

/// Identity on the main block, horizontal shift by `a - 0.5` on the cap.
pub fn local_deform<T: Real>(dom: &LocalDomain<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
    }
    if !ReferenceRegion::LocalUnion.contains(x) {
        return Err(Error::OutsideDomain {
            point: point_f64(x),
            region: "local reference union".into(),
        });
    }
    if x[1] <= T::one() {
        Ok(x.to_vec())
    } else {
        Ok(vec![x[0] + dom.shift(), x[1]])
    }
}

impl<T: Real> Deformation<T> for LocalDomain<T> {
    fn dim(&self) -> usize {
        2
    }

    fn reference(&self) -> ReferenceRegion {
        ReferenceRegion::LocalUnion
    }

    fn deform(&self, x: &[T]) -> Result<Vec<T>> {
        local_deform(self, x)
    }

    fn deform_closed(&self, x: &[T]) -> Result<Vec<T>> {
        local_deform(self, x)
    }

    fn deform_inverse(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: y.len() });
        }
        if !self.contains_closed(y) {
            return Err(Error::OutsideDomain {
                point: point_f64(y),
                region: "locally deformed domain".into(),
            });
        }
        if y[1] <= T::one() {
            Ok(y.to_vec())
        } else {
            Ok(vec![y[0] - self.shift(), y[1]])
        }
    }

    fn deform_inverse_closed(&self, y: &[T]) -> Result<Vec<T>> {
        self.deform_inverse(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let d = LocalDomain::<f64>::new(0.6).unwrap();
        assert_eq!(local_deform(&d, &[0.2, 0.4]).unwrap(), vec![0.2, 0.4]);
        let y = local_deform(&d, &[0.5, 1.1]).unwrap();
        assert!((y[0] - 0.6).abs() < 1e-15 && y[1] == 1.1);
        let r = LocalDomain::<f64>::new(0.5).unwrap();
        for x in [[0.1, 0.9], [0.4, 1.2], [0.65, 1.3]] {
            assert_eq!(local_deform(&r, &x).unwrap(), x.to_vec());
        }
        assert!(local_deform(&d, &[0.9, 1.2]).is_err());
        assert!(LocalDomain::<f64>::new(0.8).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let d = LocalDomain::<f64>::new(0.37).unwrap();
        for x in [[0.3, 0.3], [0.4, 1.05], [0.64, 1.29], [0.5, 1.0]] {
            let y = d.deform(&x).unwrap();
            let back = d.deform_inverse(&y).unwrap();
            assert!((back[0] - x[0]).abs() < 1e-15 && back[1] == x[1]);
        }
    }
}
