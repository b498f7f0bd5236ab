use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, MlpSpec};
use crate::error::{Error, Result};
use crate::geometry::{Deformation, Domain};
use crate::pdegen::Dataset;
use crate::scalar::Real;

/// Which solution space the network represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framework {
    /// Solutions pulled back to the reference region; prediction composes
    /// with the inverse deformation.
    D2d,
    /// Solutions on a fixed box containing every domain; prediction
    /// evaluates the trunk at physical coordinates.
    D2e,
}

impl Framework {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d2d" => Ok(Framework::D2d),
            "d2e" => Ok(Framework::D2e),
            _ => Err(Error::Config(format!("unknown framework `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Latent width shared by all branches and the trunk.
    pub p: usize,
    /// Number of output components (trunk width is `p · outputs`).
    pub outputs: usize,
    pub domain_hidden: Vec<usize>,
    /// Hidden widths of nonlinear input-function branches.
    pub input_hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    /// Per input function: use a single bias-free matrix. Missing entries
    /// default to nonlinear.
    pub linear_inputs: Vec<bool>,
    #[serde(default)]
    pub activation: Activation,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            p: 128,
            outputs: 1,
            domain_hidden: vec![128, 128, 128],
            input_hidden: vec![128, 128, 128],
            trunk_hidden: vec![128, 128, 128],
            linear_inputs: vec![true],
            activation: Activation::Tanh,
            seed: 0,
        }
    }
}

/// Input and output scaling stored with a model. Linear branches are only
/// scaled, never shifted, so linearity in their input is kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub branch_shift: Vec<Vec<f64>>,
    pub branch_scale: Vec<Vec<f64>>,
    /// Trunk inputs are mapped affinely from this box onto `[−1, 1]^d`.
    pub trunk_lo: Vec<f64>,
    pub trunk_hi: Vec<f64>,
    pub output_scale: f64,
}

impl Normalization {
    pub fn identity(branch_lens: &[usize], dim: usize) -> Self {
        Self {
            branch_shift: branch_lens.iter().map(|&n| vec![0.0; n]).collect(),
            branch_scale: branch_lens.iter().map(|&n| vec![1.0; n]).collect(),
            trunk_lo: vec![-1.0; dim],
            trunk_hi: vec![1.0; dim],
            output_scale: 1.0,
        }
    }
}

/// Multiple-input operator network `Σ_j Π_i b_i(x_i)_j · t(y)_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MioNet<T: Real> {
    pub framework: Framework,
    pub branches: Vec<MlpSpec>,
    pub trunk: MlpSpec,
    pub p: usize,
    pub outputs: usize,
    pub norm: Normalization,
    pub encoder_hash: String,
    pub params: Vec<T>,
}

/// Intermediate values of a forward pass, kept for backpropagation.
pub(crate) struct BranchPass<T: Real> {
    pub outputs: Vec<Array2<T>>,
    pub caches: Vec<Vec<Array2<T>>>,
    pub product: Array2<T>,
}

impl<T: Real> MioNet<T> {
    /// Builds specs from widths and initializes weights from `cfg.seed`.
    pub fn new(framework: Framework, domain_len: usize, input_lens: &[usize], dim: usize, cfg: &ModelConfig) -> Result<Self> {
        if cfg.p == 0 || cfg.outputs == 0 {
            return Err(Error::InvalidArgument("latent width and output count must be positive".into()));
        }
        let with = |input: usize, hidden: &[usize], out: usize| {
            let mut v = vec![input];
            v.extend_from_slice(hidden);
            v.push(out);
            v
        };
        let mut branches = vec![MlpSpec::new(with(domain_len, &cfg.domain_hidden, cfg.p), false)?.with_activation(cfg.activation)];
        for (i, &n) in input_lens.iter().enumerate() {
            let linear = cfg.linear_inputs.get(i).copied().unwrap_or(false);
            let spec = if linear {
                MlpSpec::new(vec![n, cfg.p], true)?
            } else {
                MlpSpec::new(with(n, &cfg.input_hidden, cfg.p), false)?.with_activation(cfg.activation)
            };
            branches.push(spec);
        }
        let trunk = MlpSpec::new(with(dim, &cfg.trunk_hidden, cfg.p * cfg.outputs), false)?.with_activation(cfg.activation);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut params = Vec::new();
        for b in &branches {
            params.extend(b.init::<T, _>(&mut rng));
        }
        params.extend(trunk.init::<T, _>(&mut rng));
        let lens: Vec<usize> = branches.iter().map(|b| b.input_len()).collect();
        Ok(Self {
            framework,
            branches,
            trunk,
            p: cfg.p,
            outputs: cfg.outputs,
            norm: Normalization::identity(&lens, dim),
            encoder_hash: String::new(),
            params,
        })
    }

    /// A model sized for a dataset with normalization fitted on it.
    pub fn for_dataset(framework: Framework, data: &Dataset<T>, cfg: &ModelConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptySplit);
        }
        let h = &data.header;
        let dim = h.reference_region.dim();
        let mut model = Self::new(framework, h.domain_len, &h.input_lens, dim, cfg)?;
        model.encoder_hash = h.encoder_hash.clone();
        model.fit_normalization(data)?;
        Ok(model)
    }

    fn fit_normalization(&mut self, data: &Dataset<T>) -> Result<()> {
        let s = data.len() as f64;
        for (b, spec) in self.branches.iter().enumerate() {
            let rows: Vec<Vec<f64>> = data
                .samples
                .iter()
                .map(|x| branch_raw(x, b).iter().map(|v| v.as_f64()).collect())
                .collect();
            let n = spec.input_len();
            if spec.linear {
                let rms = (rows.iter().flatten().map(|v| v * v).sum::<f64>() / (s * n as f64)).sqrt();
                self.norm.branch_shift[b] = vec![0.0; n];
                self.norm.branch_scale[b] = vec![if rms > 1e-12 { rms } else { 1.0 }; n];
            } else {
                let mean: Vec<f64> = (0..n).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / s).collect();
                let sd: Vec<f64> = (0..n)
                    .map(|k| {
                        let v = rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / s;
                        if v.sqrt() > 1e-8 {
                            v.sqrt()
                        } else {
                            1.0
                        }
                    })
                    .collect();
                self.norm.branch_shift[b] = mean;
                self.norm.branch_scale[b] = sd;
            }
        }
        let (lo, hi) = match self.framework {
            Framework::D2d => data.header.reference_region.bounding_box(),
            Framework::D2e => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for smp in &data.samples {
                    for p in &smp.mesh.nodes {
                        for d in 0..2 {
                            lo[d] = lo[d].min(p[d].as_f64());
                            hi[d] = hi[d].max(p[d].as_f64());
                        }
                    }
                }
                // pad the box V so that unseen domains of the family fit
                for d in 0..2 {
                    let pad = 0.1 * (hi[d] - lo[d]);
                    lo[d] -= pad;
                    hi[d] += pad;
                }
                (lo, hi)
            }
        };
        self.norm.trunk_lo = lo;
        self.norm.trunk_hi = hi;
        let targets = data.samples.iter().flat_map(|x| match self.framework {
            Framework::D2d => x.d2d_target.iter(),
            Framework::D2e => x.solution.iter(),
        });
        let (sum, count) = targets.fold((0.0, 0usize), |(s, c), v| (s + v.as_f64().powi(2), c + 1));
        let rms = (sum / count.max(1) as f64).sqrt();
        self.norm.output_scale = if rms > 1e-12 { rms } else { 1.0 };
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn branch_offset(&self, b: usize) -> usize {
        self.branches[..b].iter().map(|s| s.n_params()).sum()
    }

    pub(crate) fn trunk_offset(&self) -> usize {
        self.branch_offset(self.branches.len())
    }

    pub fn dim(&self) -> usize {
        self.trunk.input_len()
    }

    /// Checks the number and widths of branch inputs.
    pub fn check_inputs(&self, inputs: &[Vec<T>]) -> Result<()> {
        if inputs.len() != self.branches.len() {
            return Err(Error::WidthMismatch(format!(
                "{} input groups for {} branches",
                inputs.len(),
                self.branches.len()
            )));
        }
        for (i, (x, b)) in inputs.iter().zip(&self.branches).enumerate() {
            if x.len() != b.input_len() {
                return Err(Error::WidthMismatch(format!(
                    "branch {i} expects {} inputs, got {}",
                    b.input_len(),
                    x.len()
                )));
            }
        }
        Ok(())
    }

    /// Normalized branch input matrix (one row per sample) for branch `b`.
    pub(crate) fn branch_matrix(&self, b: usize, rows: &[&[T]]) -> Array2<T> {
        let n = self.branches[b].input_len();
        let (shift, scale) = (&self.norm.branch_shift[b], &self.norm.branch_scale[b]);
        Array2::from_shape_fn((rows.len(), n), |(i, k)| (rows[i][k] - T::lit(shift[k])) / T::lit(scale[k]))
    }

    pub(crate) fn trunk_matrix(&self, points: &[Vec<T>]) -> Array2<T> {
        let d = self.dim();
        let (lo, hi) = (&self.norm.trunk_lo, &self.norm.trunk_hi);
        Array2::from_shape_fn((points.len(), d), |(i, k)| {
            T::two() * (points[i][k] - T::lit(lo[k])) / T::lit(hi[k] - lo[k]) - T::one()
        })
    }

    /// Runs every branch on normalized inputs `xs[b]` (rows = samples).
    pub(crate) fn branch_pass(&self, xs: &[Array2<T>]) -> BranchPass<T> {
        let mut outputs = Vec::with_capacity(self.branches.len());
        let mut caches = Vec::with_capacity(self.branches.len());
        for (b, spec) in self.branches.iter().enumerate() {
            let off = self.branch_offset(b);
            let (out, cache) = spec.forward(&self.params[off..off + spec.n_params()], xs[b].view());
            outputs.push(out);
            caches.push(cache);
        }
        let mut product = outputs[0].clone();
        for o in &outputs[1..] {
            product *= o;
        }
        BranchPass { outputs, caches, product }
    }

    pub(crate) fn trunk_params(&self) -> &[T] {
        let off = self.trunk_offset();
        &self.params[off..off + self.trunk.n_params()]
    }

    /// Values on normalized trunk inputs for one sample: `points × outputs`.
    fn combine(&self, product_row: ArrayView1<T>, trunk: ArrayView2<T>) -> Array2<T> {
        let mut out = Array2::zeros((trunk.nrows(), self.outputs));
        for k in 0..self.outputs {
            let block = trunk.slice(ndarray::s![.., k * self.p..(k + 1) * self.p]);
            let col = latent_dot(block, product_row);
            out.column_mut(k).assign(&col);
        }
        out * T::lit(self.norm.output_scale)
    }

    /// All outputs at trunk points given in the model's trunk coordinates
    /// (reference points for D2D, physical points for D2E).
    pub fn forward_multi(&self, inputs: &[Vec<T>], points: &[Vec<T>]) -> Result<Array2<T>> {
        self.check_inputs(inputs)?;
        if let Some(p) = points.iter().find(|p| p.len() != self.dim()) {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        let xs: Vec<Array2<T>> = (0..self.branches.len())
            .map(|b| self.branch_matrix(b, &[inputs[b].as_slice()]))
            .collect();
        let pass = self.branch_pass(&xs);
        let t = self.trunk.eval(self.trunk_params(), self.trunk_matrix(points).view());
        Ok(self.combine(pass.product.row(0), t.view()))
    }

    /// First output at each trunk point.
    pub fn forward(&self, inputs: &[Vec<T>], points: &[Vec<T>]) -> Result<Vec<T>> {
        Ok(self.forward_multi(inputs, points)?.column(0).to_vec())
    }

    /// Trunk outputs at `points` (model trunk coordinates) for reuse with
    /// [`MioNet::combine_trunk`].
    pub fn trunk_features(&self, points: &[Vec<T>]) -> Array2<T> {
        self.trunk.eval(self.trunk_params(), self.trunk_matrix(points).view())
    }

    /// First output given precomputed trunk features.
    pub fn combine_trunk(&self, inputs: &[Vec<T>], trunk: &Array2<T>) -> Result<Vec<T>> {
        self.check_inputs(inputs)?;
        let xs: Vec<Array2<T>> = (0..self.branches.len())
            .map(|b| self.branch_matrix(b, &[inputs[b].as_slice()]))
            .collect();
        let pass = self.branch_pass(&xs);
        Ok(self.combine(pass.product.row(0), trunk.view()).column(0).to_vec())
    }

    /// D2D prediction: the trunk is evaluated at `D[Ω]⁻¹(y)`.
    pub fn predict_d2d(&self, dom: &Domain<T>, inputs: &[Vec<T>], query: &[Vec<T>]) -> Result<Vec<T>> {
        let refs = query.iter().map(|y| dom.deform_inverse(y)).collect::<Result<Vec<_>>>()?;
        self.forward(inputs, &refs)
    }

    /// D2E prediction: the trunk is evaluated at the physical points, which
    /// must lie in the box `V`.
    pub fn predict_d2e(&self, inputs: &[Vec<T>], query: &[Vec<T>]) -> Result<Vec<T>> {
        let (lo, hi) = (&self.norm.trunk_lo, &self.norm.trunk_hi);
        for y in query {
            let inside = y.iter().enumerate().all(|(k, v)| {
                let v = v.as_f64();
                v >= lo[k] && v <= hi[k]
            });
            if !inside {
                return Err(Error::OutsideDomain {
                    point: y.iter().map(|v| v.as_f64()).collect(),
                    region: format!("box V = {lo:?}..{hi:?}"),
                });
            }
        }
        self.forward(inputs, query)
    }

    /// Framework-appropriate prediction at physical points, accepting
    /// boundary points (used for evaluation on mesh nodes).
    pub fn predict_physical(&self, dom: &Domain<T>, inputs: &[Vec<T>], query: &[Vec<T>]) -> Result<Vec<T>> {
        match self.framework {
            Framework::D2d => {
                let refs = query.iter().map(|y| dom.deform_inverse_closed(y)).collect::<Result<Vec<_>>>()?;
                self.forward(inputs, &refs)
            }
            Framework::D2e => self.predict_d2e(inputs, query),
        }
    }

    /// Makes the trunk output identically zero.
    pub fn zero_trunk(&mut self) {
        let off = self.trunk_offset();
        let spec = self.trunk.clone();
        spec.zero_output(&mut self.params[off..]);
    }

    /// Lipschitz bound of the trunk in physical coordinates times the
    /// branch amplitudes for one input; bounds `|∇_y u|`.
    pub fn trunk_lipschitz(&self, inputs: &[Vec<T>]) -> Result<T> {
        self.check_inputs(inputs)?;
        let xs: Vec<Array2<T>> = (0..self.branches.len())
            .map(|b| self.branch_matrix(b, &[inputs[b].as_slice()]))
            .collect();
        let pass = self.branch_pass(&xs);
        let b = pass.product.row(0).iter().map(|&v| v * v).sum::<T>().sqrt();
        let scale = (0..self.dim())
            .map(|k| 2.0 / (self.norm.trunk_hi[k] - self.norm.trunk_lo[k]))
            .fold(0.0, f64::max);
        Ok(self.trunk.lipschitz_bound(self.trunk_params()) * b * T::lit(scale * self.norm.output_scale))
    }
}

/// `Σ_j t[i, j] b[j]` for every row `i`. Training and prediction share this
/// so that a model reproduces its own outputs bitwise.
pub(crate) fn latent_dot<T: Real>(t: ArrayView2<T>, b: ArrayView1<T>) -> Array1<T> {
    (&t * &b).sum_axis(Axis(1))
}

/// Raw branch input `b` of a sample: 0 is the domain encoding, then the
/// input functions in header order.
pub(crate) fn branch_raw<T: Real>(s: &crate::pdegen::Sample<T>, b: usize) -> &[T] {
    if b == 0 {
        &s.domain_enc
    } else {
        &s.inputs[b - 1]
    }
}
