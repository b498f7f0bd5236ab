use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hidden-layer nonlinearity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    fn apply<T: Real>(self, v: T) -> T {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Relu => v.max(T::zero()),
        }
    }

    /// Derivative written in terms of the activation's output.
    fn slope<T: Real>(self, out: T) -> T {
        match self {
            Activation::Tanh => T::one() - out * out,
            Activation::Relu => {
                if out > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Layer widths of a dense network; the last layer has no activation.
/// A `linear` net is a single bias-free matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub sizes: Vec<usize>,
    pub linear: bool,
    #[serde(default)]
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(sizes: Vec<usize>, linear: bool) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("bad layer sizes {sizes:?}")));
        }
        if linear && sizes.len() != 2 {
            return Err(Error::InvalidArgument("a linear branch has exactly one weight matrix".into()));
        }
        Ok(Self { sizes, linear, activation: Activation::Tanh })
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    fn layer_len(&self, l: usize) -> usize {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        i * o + if self.linear { 0 } else { o }
    }

    pub fn n_params(&self) -> usize {
        (0..self.layers()).map(|l| self.layer_len(l)).sum()
    }

    fn offset(&self, l: usize) -> usize {
        (0..l).map(|k| self.layer_len(k)).sum()
    }

    fn weights<'a, T: Real>(&self, p: &'a [T], l: usize) -> (ArrayView2<'a, T>, Option<ArrayView1<'a, T>>) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let off = self.offset(l);
        let w = ArrayView2::from_shape((i, o), &p[off..off + i * o]).expect("layer shape");
        let b = (!self.linear).then(|| ArrayView1::from(&p[off + i * o..off + i * o + o]));
        (w, b)
    }

    fn weights_mut<'a, T: Real>(&self, p: &'a mut [T], l: usize) -> (ArrayViewMut2<'a, T>, Option<ArrayViewMut1<'a, T>>) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let off = self.offset(l);
        let (wpart, rest) = p[off..].split_at_mut(i * o);
        let w = ArrayViewMut2::from_shape((i, o), wpart).expect("layer shape");
        let b = (!self.linear).then(|| ArrayViewMut1::from(&mut rest[..o]));
        (w, b)
    }

    /// Glorot-uniform weights and zero biases.
    pub fn init<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut p = vec![T::zero(); self.n_params()];
        for l in 0..self.layers() {
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            let lim = (6.0 / (i + o) as f64).sqrt();
            let dist = Uniform::new_inclusive(-lim, lim).expect("finite limits");
            let (mut w, _) = self.weights_mut(&mut p, l);
            w.iter_mut().for_each(|v| *v = T::lit(dist.sample(rng)));
        }
        p
    }

    /// Batched forward pass; rows of `x` are inputs. Returns the output and
    /// the input of every layer (post-activation), needed by `backward`.
    pub fn forward<T: Real>(&self, p: &[T], x: ArrayView2<T>) -> (Array2<T>, Vec<Array2<T>>) {
        let mut cache = Vec::with_capacity(self.layers());
        let mut a = x.to_owned();
        for l in 0..self.layers() {
            let (w, b) = self.weights(p, l);
            let mut z = a.dot(&w);
            if let Some(b) = b {
                z += &b;
            }
            if l + 1 < self.layers() {
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            cache.push(a);
            a = z;
        }
        (a, cache)
    }

    pub fn eval<T: Real>(&self, p: &[T], x: ArrayView2<T>) -> Array2<T> {
        let mut a = x.to_owned();
        for l in 0..self.layers() {
            let (w, b) = self.weights(p, l);
            let mut z = a.dot(&w);
            if let Some(b) = b {
                z += &b;
            }
            if l + 1 < self.layers() {
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            a = z;
        }
        a
    }

    /// Accumulates parameter gradients into `grad` for the output sensitivity
    /// `dout`; returns the input sensitivity when `want_input` is set.
    pub fn backward<T: Real>(
        &self,
        p: &[T],
        cache: &[Array2<T>],
        dout: Array2<T>,
        grad: &mut [T],
        want_input: bool,
    ) -> Option<Array2<T>> {
        let mut dz = dout;
        for l in (0..self.layers()).rev() {
            let a = &cache[l];
            let (w, _) = self.weights(p, l);
            {
                let (mut gw, gb) = self.weights_mut(grad, l);
                gw += &a.t().dot(&dz);
                if let Some(mut gb) = gb {
                    gb += &dz.sum_axis(Axis(0));
                }
            }
            if l == 0 && !want_input {
                return None;
            }
            let mut da = dz.dot(&w.t());
            if l > 0 {
                da.zip_mut_with(a, |d, &act| *d *= self.activation.slope(act));
            }
            dz = da;
        }
        Some(dz)
    }

    /// Zeroes the last layer, making the net output identically zero.
    pub fn zero_output<T: Real>(&self, p: &mut [T]) {
        let l = self.layers() - 1;
        let (mut w, b) = self.weights_mut(p, l);
        w.fill(T::zero());
        if let Some(mut b) = b {
            b.fill(T::zero());
        }
    }

    /// Product of the spectral-norm bounds (Frobenius) of all layers: a
    /// Lipschitz constant of the net since both activations are 1-Lipschitz.
    pub fn lipschitz_bound<T: Real>(&self, p: &[T]) -> T {
        (0..self.layers())
            .map(|l| self.weights(p, l).0.iter().map(|&v| v * v).sum::<T>().sqrt())
            .fold(T::one(), |a, b| a * b)
    }
}
