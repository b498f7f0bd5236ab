use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dist, Real};

/// Largest point count accepted by the dense factorization.
pub const GP_MAX_POINTS: usize = 5000;

/// Squared-exponential Gaussian process `k(x,y) = σ² exp(−|x−y|²/(2ℓ²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpSpec {
    pub variance: f64,
    pub length_scale: f64,
    pub mean: f64,
}

impl Default for GpSpec {
    fn default() -> Self {
        Self { variance: 1.0, length_scale: 0.25, mean: 0.0 }
    }
}

impl GpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance > 0.0 && self.length_scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "GP needs positive variance and length scale, got σ²={} ℓ={}",
                self.variance, self.length_scale
            )));
        }
        Ok(())
    }

    pub fn kernel<T: Real>(&self, x: &[T], y: &[T]) -> T {
        let d = dist(x, y).as_f64();
        T::lit(self.variance * (-d * d / (2.0 * self.length_scale * self.length_scale)).exp())
    }

    fn gram<T: Real>(&self, points: &[Vec<T>]) -> Vec<f64> {
        let n = points.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.kernel(&points[i], &points[j]).as_f64();
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    }
}

/// In-place lower Cholesky of a row-major `n×n` matrix; only the lower
/// triangle is read. Returns the failing pivot on breakdown.
fn cholesky_in_place(a: &mut [f64], n: usize) -> std::result::Result<(), usize> {
    for i in 0..n {
        for j in 0..=i {
            let (ri, rj) = (i * n, j * n);
            let s: f64 = (0..j).map(|k| a[ri + k] * a[rj + k]).sum();
            let v = a[ri + j] - s;
            if i == j {
                if !(v > 0.0) {
                    return Err(i);
                }
                a[ri + i] = v.sqrt();
            } else {
                a[ri + j] = v / a[rj + j];
            }
        }
    }
    Ok(())
}

/// Cholesky factor of the Gram matrix, escalating the diagonal jitter from
/// `1e−10·σ²` by factors of 10 up to `1e−4·σ²`.
fn factor_gram(spec: &GpSpec, gram: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    let mut jitter = 1e-10;
    let mut last_pivot = 0;
    while jitter <= 1e-4 * (1.0 + 1e-9) {
        let mut l = gram.to_vec();
        for i in 0..n {
            l[i * n + i] += jitter * spec.variance;
        }
        match cholesky_in_place(&mut l, n) {
            Ok(()) => return Ok((l, jitter)),
            Err(p) => last_pivot = p,
        }
        jitter *= 10.0;
    }
    Err(Error::Factorization { pivot: last_pivot, jitter: jitter / 10.0 })
}

fn check_points<T: Real>(points: &[Vec<T>]) -> Result<()> {
    if points.len() > GP_MAX_POINTS {
        return Err(Error::InvalidArgument(format!(
            "{} GP points exceed the dense limit {GP_MAX_POINTS}",
            points.len()
        )));
    }
    Ok(())
}

/// One draw from `N(mean, K + jitter·I)` at the points; deterministic in `seed`.
pub fn gp_sample<T: Real>(spec: &GpSpec, points: &[Vec<T>], seed: u64) -> Result<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gp_sample_with(spec, points, &mut rng)
}

pub fn gp_sample_with<T: Real, R: rand::Rng + ?Sized>(spec: &GpSpec, points: &[Vec<T>], rng: &mut R) -> Result<Vec<T>> {
    spec.validate()?;
    check_points(points)?;
    let n = points.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (l, _) = factor_gram(spec, &spec.gram(points), n)?;
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    Ok((0..n)
        .map(|i| {
            let row = &l[i * n..i * n + i + 1];
            T::lit(spec.mean + row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>())
        })
        .collect())
}

/// A GP draw at a set of support points extended everywhere by the kernel
/// interpolant `m + k(x, X) K⁻¹ (v − m)`, which reproduces the draw at the
/// support points.
#[derive(Clone, Debug)]
pub struct GpField<T: Real> {
    spec: GpSpec,
    support: Vec<Vec<T>>,
    alpha: Vec<f64>,
}

impl<T: Real> GpField<T> {
    pub fn sample(spec: &GpSpec, support: Vec<Vec<T>>, seed: u64) -> Result<Self> {
        spec.validate()?;
        check_points(&support)?;
        let n = support.len();
        let (l, _) = factor_gram(spec, &spec.gram(&support), n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        // v − m = L z, and K⁻¹(L z) = L⁻ᵀ z with the jittered factor
        let mut alpha = z;
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[k * n + i] * alpha[k]).sum();
            alpha[i] = (alpha[i] - s) / l[i * n + i];
        }
        Ok(Self { spec: *spec, support, alpha })
    }

    pub fn eval(&self, x: &[T]) -> T {
        let s: f64 = self
            .support
            .iter()
            .zip(&self.alpha)
            .map(|(p, a)| self.spec.kernel(x, p).as_f64() * a)
            .sum();
        T::lit(self.spec.mean + s)
    }
}
