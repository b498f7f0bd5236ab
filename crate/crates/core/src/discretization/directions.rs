use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `e_i = (cos 2πi/n, sin 2πi/n)` for `i = 1..=n`.
pub fn directions_2d<T: Real>(n: usize) -> Result<Vec<Vec<T>>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 planar directions, got {n}")));
    }
    Ok((1..=n)
        .map(|i| {
            let t = T::TAU() * T::from_count(i) / T::from_count(n);
            vec![t.cos(), t.sin()]
        })
        .collect())
}

/// Fibonacci lattice on the unit sphere, `i = 1..=n`:
/// `z = 1 - (2i-2)/(n-1)`, azimuth `(√5 - 1)πi`.
pub fn directions_3d_fibonacci<T: Real>(n: usize) -> Result<Vec<Vec<T>>> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 spatial directions, got {n}")));
    }
    let golden = (T::lit(5.0).sqrt() - T::one()) * T::PI();
    Ok((1..=n)
        .map(|i| {
            let z = T::one() - T::from_count(2 * i - 2) / T::from_count(n - 1);
            let rho = (T::one() - z * z).max(T::zero()).sqrt();
            let phi = golden * T::from_count(i);
            vec![rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect())
}

/// Which direction set an encoding was sampled on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionScheme {
    Uniform2d(usize),
    Fibonacci3d(usize),
}

impl DirectionScheme {
    pub fn for_dim(dim: usize, n: usize) -> Self {
        if dim == 3 {
            DirectionScheme::Fibonacci3d(n)
        } else {
            DirectionScheme::Uniform2d(n)
        }
    }

    pub fn count(&self) -> usize {
        match *self {
            DirectionScheme::Uniform2d(n) | DirectionScheme::Fibonacci3d(n) => n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DirectionScheme::Uniform2d(_) => 2,
            DirectionScheme::Fibonacci3d(_) => 3,
        }
    }

    pub fn vectors<T: Real>(&self) -> Result<Vec<Vec<T>>> {
        match *self {
            DirectionScheme::Uniform2d(n) => directions_2d(n),
            DirectionScheme::Fibonacci3d(n) => directions_3d_fibonacci(n),
        }
    }

    pub fn id(&self) -> String {
        match self {
            DirectionScheme::Uniform2d(n) => format!("uniform2d:{n}"),
            DirectionScheme::Fibonacci3d(n) => format!("fibonacci3d:{n}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_set_for_four() {
        let d = directions_2d::<f64>(4).unwrap();
        let expect = [[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]];
        for (v, e) in d.iter().zip(expect) {
            assert!((v[0] - e[0]).abs() < 1e-15 && (v[1] - e[1]).abs() < 1e-15);
        }
        assert!(directions_2d::<f64>(2).is_err());
    }

    #[test]
    fn planar_unit_norm_and_even_gaps() {
        let n = 37;
        let d = directions_2d::<f64>(n).unwrap();
        for (i, v) in d.iter().enumerate() {
            assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0).abs() <= 1e-15);
            let w = &d[(i + 1) % n];
            let gap = (v[0] * w[0] + v[1] * w[1]).clamp(-1.0, 1.0).acos();
            assert!((gap - std::f64::consts::TAU / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn fibonacci_poles() {
        let d = directions_3d_fibonacci::<f64>(100).unwrap();
        assert!((d[0][2] - 1.0).abs() < 1e-15 && d[0][0].abs() < 1e-15 && d[0][1].abs() < 1e-15);
        assert!((d[99][2] + 1.0).abs() < 1e-15);
        for v in &d {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-14);
        }
        assert!(directions_3d_fibonacci::<f64>(3).is_err());
    }

    #[test]
    fn fibonacci_spacing_ratio() {
        // brute-force nearest-neighbour angular distances
        let n = 500;
        let d = directions_3d_fibonacci::<f64>(n).unwrap();
        let nn: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        let c: f64 = (0..3).map(|k| d[i][k] * d[j][k]).sum();
                        c.clamp(-1.0, 1.0).acos()
                    })
                    .fold(f64::MAX, f64::min)
            })
            .collect();
        let max = nn.iter().cloned().fold(0.0, f64::max);
        let min = nn.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 2.5, "ratio {}", max / min);
    }
}
