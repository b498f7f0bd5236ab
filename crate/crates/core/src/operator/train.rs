use ndarray::{Array1, Array2, Axis};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mionet::{branch_raw, latent_dot, Framework, MioNet};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::pdegen::{Dataset, Sample};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Learning rate at the last iteration; the rate decays geometrically.
    /// `None` keeps it constant.
    pub lr_final: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub iterations: usize,
    pub seed: u64,
    pub framework: Framework,
    /// D2E only: random nodes drawn per sample and iteration, with weights
    /// rescaled so the loss stays unbiased. `None` uses every node.
    pub points_per_sample: Option<usize>,
    /// Samples per iteration; `None` is full batch.
    pub batch_size: Option<usize>,
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            lr_final: None,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            iterations: 1000,
            seed: 0,
            framework: Framework::D2e,
            points_per_sample: None,
            batch_size: None,
            log_every: 0,
        }
    }
}

/// Loss history of a training run: batch mean of `‖pred − u‖²` in the
/// squared L² norm of the loss quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub framework: Framework,
    pub seed: u64,
    pub losses: Vec<f64>,
}

/// Trunk evaluation points of one loss evaluation.
pub(crate) enum Points<T: Real> {
    /// One set of points for every sample (D2D reference nodes); targets are
    /// `samples × points`.
    Shared { trunk_in: Array2<T>, weights: Array1<T>, targets: Array2<T> },
    /// Per-sample points stacked; `owner[i]` is the batch row of point `i`.
    Stacked { trunk_in: Array2<T>, owner: Vec<usize>, weights: Array1<T>, targets: Array1<T> },
}

pub(crate) struct Batch<T: Real> {
    /// Normalized branch inputs, one row per sample.
    pub xs: Vec<Array2<T>>,
    pub points: Points<T>,
}

/// Mean over the batch of `Σ_i w_i (pred_i − u_i)²` divided by the output
/// scale squared; with `want_grad`, also the gradient.
pub(crate) fn loss_grad<T: Real>(model: &MioNet<T>, batch: &Batch<T>, want_grad: bool) -> (T, Option<Vec<T>>) {
    let s = batch.xs[0].nrows();
    let p = model.p;
    let scale = T::lit(model.norm.output_scale);
    let inv_s = T::one() / T::from_count(s);
    let pass = model.branch_pass(&batch.xs);
    let trunk_in = match &batch.points {
        Points::Shared { trunk_in, .. } | Points::Stacked { trunk_in, .. } => trunk_in,
    };
    let (t, tcache) = model.trunk.forward(model.trunk_params(), trunk_in.view());
    let t = t.slice(ndarray::s![.., ..p]).to_owned();
    let (loss, dprod, dt) = match &batch.points {
        Points::Shared { weights, targets, .. } => {
            let mut pred = Array2::zeros((s, t.nrows()));
            for (i, mut row) in pred.rows_mut().into_iter().enumerate() {
                row.assign(&(latent_dot(t.view(), pass.product.row(i)) * scale));
            }
            let diff = (pred - targets) / scale;
            let wd = &diff * weights;
            let loss = (&wd * &diff).sum() * inv_s;
            if !want_grad {
                return (loss, None);
            }
            // d loss / d pred = 2 w (pred − u) / (S scale²); pred carries one scale
            let r = wd * (T::two() * inv_s);
            (loss, r.dot(&t), r.t().dot(&pass.product))
        }
        Points::Stacked { owner, weights, targets, .. } => {
            let pg = pass.product.select(Axis(0), owner);
            let pred = (&pg * &t).sum_axis(Axis(1)) * scale;
            let diff = (pred - targets) / scale;
            let wd = &diff * weights;
            let loss = (&wd * &diff).sum() * inv_s;
            if !want_grad {
                return (loss, None);
            }
            let r = (wd * (T::two() * inv_s)).insert_axis(Axis(1));
            let dt = &pg * &r;
            let dpg = &t * &r;
            let mut dprod = Array2::zeros((s, p));
            for (i, &o) in owner.iter().enumerate() {
                let mut row = dprod.row_mut(o);
                row += &dpg.row(i);
            }
            (loss, dprod, dt)
        }
    };
    let mut grad = vec![T::zero(); model.n_params()];
    for (b, spec) in model.branches.iter().enumerate() {
        let mut dout = dprod.clone();
        for (c, o) in pass.outputs.iter().enumerate() {
            if c != b {
                dout *= o;
            }
        }
        let off = model.branch_offset(b);
        let n = spec.n_params();
        spec.backward(&model.params[off..off + n], &pass.caches[b], dout, &mut grad[off..off + n], false);
    }
    let off = model.trunk_offset();
    let n = model.trunk.n_params();
    let mut dfull = Array2::zeros((dt.nrows(), model.trunk.output_len()));
    dfull.slice_mut(ndarray::s![.., ..p]).assign(&dt);
    model.trunk.backward(&model.params[off..off + n], &tcache, dfull, &mut grad[off..off + n], false);
    (loss, Some(grad))
}

/// Per-sample data prepared once before training.
struct Prepared<T: Real> {
    xs: Vec<Array2<T>>,
    /// D2D: shared reference nodes and targets.
    shared: Option<(Array2<T>, Array1<T>, Array2<T>)>,
    /// D2E: normalized node coordinates, weights and targets per sample.
    per_sample: Vec<(Array2<T>, Vec<T>, Vec<T>)>,
}

fn check_dataset<T: Real>(model: &MioNet<T>, data: &Dataset<T>) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptySplit);
    }
    if !model.encoder_hash.is_empty() && model.encoder_hash != data.header.encoder_hash {
        return Err(Error::Config(format!(
            "model encoder hash {} does not match dataset {}",
            model.encoder_hash, data.header.encoder_hash
        )));
    }
    let s = &data.samples[0];
    let inputs: Vec<Vec<T>> = (0..model.branches.len().min(s.inputs.len() + 1))
        .map(|b| branch_raw(s, b).to_vec())
        .collect();
    model.check_inputs(&inputs)
}

fn prepare<T: Real>(model: &MioNet<T>, data: &Dataset<T>) -> Result<Prepared<T>> {
    check_dataset(model, data)?;
    let xs = (0..model.branches.len())
        .map(|b| {
            let rows: Vec<&[T]> = data.samples.iter().map(|s| branch_raw(s, b)).collect();
            model.branch_matrix(b, &rows)
        })
        .collect();
    let mut prep = Prepared { xs, shared: None, per_sample: Vec::new() };
    match model.framework {
        Framework::D2d => {
            let nodes = data.d2d_nodes();
            let w = Array1::from(data.d2d_weights());
            let n = nodes.len();
            let mut targets = Array2::zeros((data.len(), n));
            for (i, s) in data.samples.iter().enumerate() {
                if s.d2d_target.len() != n {
                    return Err(Error::WidthMismatch(format!("sample {} has {} targets for {n} nodes", s.index, s.d2d_target.len())));
                }
                targets.row_mut(i).assign(&Array1::from(s.d2d_target.clone()));
            }
            prep.shared = Some((model.trunk_matrix(&nodes), w, targets));
        }
        Framework::D2e => {
            for s in &data.samples {
                let pts = s.mesh.node_points();
                prep.per_sample.push((model.trunk_matrix(&pts), s.mesh.node_weights.clone(), s.solution.clone()));
            }
        }
    }
    Ok(prep)
}

fn make_batch<T: Real, R: Rng>(prep: &Prepared<T>, rows: &[usize], ppp: Option<usize>, rng: &mut R) -> Batch<T> {
    let xs = prep.xs.iter().map(|x| x.select(Axis(0), rows)).collect();
    let points = match &prep.shared {
        Some((trunk_in, weights, targets)) => Points::Shared {
            trunk_in: trunk_in.clone(),
            weights: weights.clone(),
            targets: targets.select(Axis(0), rows),
        },
        None => {
            let (mut coords, mut owner, mut w, mut u) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for (r, &row) in rows.iter().enumerate() {
                let (pts, ws, us) = &prep.per_sample[row];
                let n = ws.len();
                let pick: Vec<usize> = match ppp {
                    Some(k) if k < n => {
                        let mut v = sample_indices(rng, n, k).into_vec();
                        v.sort_unstable();
                        v
                    }
                    _ => (0..n).collect(),
                };
                let factor = T::from_count(n) / T::from_count(pick.len());
                for &i in &pick {
                    coords.extend(pts.row(i).iter().copied());
                    owner.push(r);
                    w.push(ws[i] * factor);
                    u.push(us[i]);
                }
            }
            let d = prep.per_sample[rows[0]].0.ncols();
            Points::Stacked {
                trunk_in: Array2::from_shape_vec((owner.len(), d), coords).expect("stacked shape"),
                owner,
                weights: Array1::from(w),
                targets: Array1::from(u),
            }
        }
    };
    Batch { xs, points }
}

fn full_batch_is_static<T: Real>(prep: &Prepared<T>, cfg: &TrainConfig, n: usize) -> bool {
    let all_samples = cfg.batch_size.is_none_or(|b| b >= n);
    let all_points = prep.shared.is_some()
        || cfg.points_per_sample.is_none_or(|k| prep.per_sample.iter().all(|(_, w, _)| k >= w.len()));
    all_samples && all_points
}

/// Adam on the model's flat parameter vector. Returns the loss before each
/// update.
pub fn train<T: Real>(model: &mut MioNet<T>, data: &Dataset<T>, cfg: &TrainConfig) -> Result<TrainHistory> {
    if cfg.framework != model.framework {
        return Err(Error::Config(format!(
            "train framework {:?} differs from the model's {:?}",
            cfg.framework, model.framework
        )));
    }
    if model.outputs != 1 {
        return Err(Error::InvalidArgument("datasets carry scalar solutions; train with outputs = 1".into()));
    }
    if cfg.learning_rate <= 0.0 || !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
        return Err(Error::Config("learning rate must be positive and betas in [0, 1)".into()));
    }
    let prep = prepare(model, data)?;
    let n = data.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all: Vec<usize> = (0..n).collect();
    let fixed = full_batch_is_static(&prep, cfg, n).then(|| make_batch(&prep, &all, None, &mut rng));
    let np = model.n_params();
    let (mut m, mut v) = (vec![T::zero(); np], vec![T::zero(); np]);
    let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
    let eps = T::lit(cfg.eps);
    let decay = match cfg.lr_final {
        Some(f) if cfg.iterations > 1 => (f / cfg.learning_rate).ln() / (cfg.iterations - 1) as f64,
        _ => 0.0,
    };
    let mut losses = Vec::with_capacity(cfg.iterations);
    let (mut b1t, mut b2t) = (T::one(), T::one());
    for it in 0..cfg.iterations {
        let owned;
        let batch = match &fixed {
            Some(b) => b,
            None => {
                let rows: Vec<usize> = match cfg.batch_size {
                    Some(b) if b < n => {
                        let mut r = sample_indices(&mut rng, n, b).into_vec();
                        r.sort_unstable();
                        r
                    }
                    _ => all.clone(),
                };
                owned = make_batch(&prep, &rows, cfg.points_per_sample, &mut rng);
                &owned
            }
        };
        let (loss, grad) = loss_grad(model, batch, true);
        let grad = grad.expect("gradient requested");
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration: it, last_loss: losses.last().copied().unwrap_or(f64::NAN) });
        }
        let raw = loss.as_f64() * model.norm.output_scale.powi(2);
        losses.push(raw);
        if cfg.log_every > 0 && it % cfg.log_every == 0 {
            eprintln!("iter {it:>6}  loss {raw:.6e}");
        }
        let lr = T::lit(cfg.learning_rate * (decay * it as f64).exp());
        b1t = b1t * b1;
        b2t = b2t * b2;
        for k in 0..np {
            m[k] = b1 * m[k] + (T::one() - b1) * grad[k];
            v[k] = b2 * v[k] + (T::one() - b2) * grad[k] * grad[k];
            let mh = m[k] / (T::one() - b1t);
            let vh = v[k] / (T::one() - b2t);
            model.params[k] = model.params[k] - lr * mh / (vh.sqrt() + eps);
        }
    }
    Ok(TrainHistory { framework: model.framework, seed: cfg.seed, losses })
}

/// Full-batch loss on a dataset, every node included, in the units of
/// [`TrainHistory::losses`].
pub fn dataset_loss<T: Real>(model: &MioNet<T>, data: &Dataset<T>) -> Result<f64> {
    let prep = prepare(model, data)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let loss = loss_grad(model, &make_batch(&prep, &all, None, &mut rng), false).0;
    Ok(loss.as_f64() * model.norm.output_scale.powi(2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub index: usize,
    pub rel_l2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub framework: Framework,
    pub n_samples: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub per_sample: Vec<SampleError>,
}

/// Prediction at every mesh node of a sample. D2D uses the reference nodes
/// directly when the mesh is a deformed copy of the reference mesh.
pub fn predict_sample<T: Real>(model: &MioNet<T>, data: &Dataset<T>, s: &Sample<T>) -> Result<Vec<T>> {
    let inputs: Vec<Vec<T>> = (0..model.branches.len()).map(|b| branch_raw(s, b).to_vec()).collect();
    match model.framework {
        Framework::D2d if !matches!(s.domain, Domain::Local(_)) && s.mesh.len() == data.header.d2d_nodes.len() => {
            model.forward(&inputs, &data.d2d_nodes())
        }
        _ => model.predict_physical(&s.domain, &inputs, &s.mesh.node_points()),
    }
}

/// Relative L² error of `pred` against `u` with node weights.
pub fn relative_l2<T: Real>(pred: &[T], u: &[T], w: &[T]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((p, u), w) in pred.iter().zip(u).zip(w) {
        let (p, u, w) = (p.as_f64(), u.as_f64(), w.as_f64());
        num += w * (p - u) * (p - u);
        den += w * u * u;
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

pub fn evaluate<T: Real>(model: &MioNet<T>, data: &Dataset<T>) -> Result<EvalReport> {
    check_dataset(model, data)?;
    let mut per_sample = Vec::with_capacity(data.len());
    for s in &data.samples {
        let pred = predict_sample(model, data, s)?;
        per_sample.push(SampleError { index: s.index, rel_l2: relative_l2(&pred, &s.solution, &s.mesh.node_weights) });
    }
    Ok(report_from(model.framework, per_sample))
}

pub(crate) fn report_from(framework: Framework, per_sample: Vec<SampleError>) -> EvalReport {
    let mut sorted: Vec<f64> = per_sample.iter().map(|e| e.rel_l2).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    EvalReport {
        framework,
        n_samples: n,
        mean: sorted.iter().sum::<f64>() / n as f64,
        median,
        max: sorted[n - 1],
        per_sample,
    }
}

/// Max relative discrepancy between the analytic gradient of the squared
/// loss at one point `y` and central differences, over `n_check` random
/// parameters.
pub fn grad_check<T: Real>(
    model: &MioNet<T>,
    inputs: &[Vec<T>],
    y: &[T],
    target: T,
    n_check: usize,
    seed: u64,
) -> Result<f64> {
    model.check_inputs(inputs)?;
    if y.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: y.len() });
    }
    let batch = Batch {
        xs: (0..model.branches.len()).map(|b| model.branch_matrix(b, &[inputs[b].as_slice()])).collect(),
        points: Points::Stacked {
            trunk_in: model.trunk_matrix(&[y.to_vec()]),
            owner: vec![0],
            weights: Array1::from(vec![T::one()]),
            targets: Array1::from(vec![target]),
        },
    };
    let (_, grad) = loss_grad(model, &batch, true);
    let grad = grad.expect("gradient requested");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let np = model.n_params();
    let idx = sample_indices(&mut rng, np, n_check.min(np)).into_vec();
    let h = 1e-5;
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for k in idx {
        let p0 = model.params[k];
        probe.params[k] = p0 + T::lit(h);
        let up = loss_grad(&probe, &batch, false).0.as_f64();
        probe.params[k] = p0 - T::lit(h);
        let down = loss_grad(&probe, &batch, false).0.as_f64();
        probe.params[k] = p0;
        let fd = (up - down) / (2.0 * h);
        let a = grad[k].as_f64();
        let disc = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(disc);
    }
    Ok(worst)
}
