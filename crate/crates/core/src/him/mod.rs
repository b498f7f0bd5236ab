//! Gauss-Seidel iteration with periodic operator-network correction.

mod corrector;
mod problem;
mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pdegen::{CholeskyFactor, SparseSystem};
use crate::scalar::Real;

pub use corrector::NeuralCorrector;
pub use problem::{him_problem, HimProblem};
pub use report::{him_report, HimReport, HimRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Sweep,
    Correction,
    Rollback,
}

impl Event {
    pub fn as_str(&self) -> &'static str {
        match self {
            Event::Sweep => "sweep",
            Event::Correction => "correction",
            Event::Rollback => "rollback",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Sweeps done so far.
    pub iteration: usize,
    /// Relative residual `‖b − Au‖/‖b‖` after the event.
    pub residual: f64,
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualTrace {
    pub method: String,
    pub entries: Vec<TraceEntry>,
    pub seconds: f64,
}

impl ResidualTrace {
    pub fn new(method: &str) -> Self {
        Self { method: method.into(), entries: Vec::new(), seconds: 0.0 }
    }

    pub fn sweeps(&self) -> usize {
        self.entries.last().map_or(0, |e| e.iteration)
    }

    pub fn count(&self, event: Event) -> usize {
        self.entries.iter().filter(|e| e.event == event).count()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.entries.last().map(|e| e.residual)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,residual,event\n");
        for e in &self.entries {
            s.push_str(&format!("{},{:e},{}\n", e.iteration, e.residual, e.event.as_str()));
        }
        s
    }

    fn push(&mut self, iteration: usize, residual: f64, event: Event) {
        self.entries.push(TraceEntry { iteration, residual, event });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HimConfig {
    /// Sweeps between corrections.
    pub period: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    /// A correction is kept only if it does not raise the residual above
    /// `safeguard` times its previous value.
    pub safeguard: f64,
    /// Gauss-Seidel sweeps applied to a corrected iterate before the
    /// safeguard test; they are counted. `0` tests the raw correction.
    #[serde(default)]
    pub post_smooth: usize,
}

impl Default for HimConfig {
    fn default() -> Self {
        Self { period: 200, tol: 1e-8, max_sweeps: 1_000_000, safeguard: 1.0, post_smooth: 50 }
    }
}

impl HimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 || !(self.tol > 0.0) || !(self.safeguard > 0.0) {
            return Err(Error::Config("period must be >= 1, tolerance and safeguard > 0".into()));
        }
        Ok(())
    }
}

/// The error-equation solver applied to the residual.
pub enum Corrector<T: Real> {
    None,
    /// Direct solve of `A e = r`.
    ExactOracle(CholeskyFactor<T>),
    Neural(Box<NeuralCorrector<T>>),
}

impl<T: Real> Corrector<T> {
    pub fn exact(sys: &SparseSystem<T>) -> Result<Self> {
        Ok(Corrector::ExactOracle(CholeskyFactor::new(&sys.matrix)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Corrector::None => "none",
            Corrector::ExactOracle(_) => "exact_oracle",
            Corrector::Neural(_) => "neural",
        }
    }

    fn correction(&self, residual: &[T]) -> Result<Option<Vec<T>>> {
        Ok(match self {
            Corrector::None => None,
            Corrector::ExactOracle(f) => Some(f.solve(residual)),
            Corrector::Neural(n) => Some(n.correct(residual)?),
        })
    }
}

#[derive(Clone, Debug)]
pub struct HimOutcome<T: Real> {
    pub solution: Vec<T>,
    pub sweeps: usize,
    pub trace: ResidualTrace,
}

/// One forward Gauss-Seidel sweep in place.
pub fn gauss_seidel_sweep<T: Real>(sys: &SparseSystem<T>, u: &mut [T]) -> Result<()> {
    let a = &sys.matrix;
    for i in 0..a.n {
        let (cols, vals) = a.row(i);
        let mut diag = T::zero();
        let mut s = sys.rhs[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag += v;
            } else {
                s -= v * u[j];
            }
        }
        if diag == T::zero() {
            return Err(Error::ZeroDiagonal(i));
        }
        u[i] = s / diag;
    }
    Ok(())
}

fn check_start<T: Real>(sys: &SparseSystem<T>, u: &[T]) -> Result<()> {
    if u.len() != sys.len() {
        return Err(Error::DimensionMismatch { expected: sys.len(), got: u.len() });
    }
    Ok(())
}

/// Plain Gauss-Seidel until the relative residual reaches `tol`.
pub fn gauss_seidel<T: Real>(sys: &SparseSystem<T>, u0: &[T], tol: f64, max_sweeps: usize) -> Result<HimOutcome<T>> {
    check_start(sys, u0)?;
    let start = Instant::now();
    let mut u = u0.to_vec();
    let mut trace = ResidualTrace::new("gs");
    let initial = sys.relative_residual(&u).as_f64();
    for k in 1..=max_sweeps {
        gauss_seidel_sweep(sys, &mut u)?;
        let res = sys.relative_residual(&u).as_f64();
        trace.push(k, res, Event::Sweep);
        if res <= tol {
            trace.seconds = start.elapsed().as_secs_f64();
            return Ok(HimOutcome { solution: u, sweeps: k, trace });
        }
        if !res.is_finite() || res > 10.0 * initial {
            return Err(Error::Diverged { residual: res, initial });
        }
    }
    trace.seconds = start.elapsed().as_secs_f64();
    let residual = trace.final_residual().unwrap_or(initial);
    Err(Error::IterationLimit { iterations: max_sweeps, residual, trace: Box::new(trace) })
}

/// Gauss-Seidel with a correction from `corrector` every `cfg.period`
/// sweeps. A correction that raises the residual (measured after
/// `cfg.post_smooth` further sweeps) is undone and the period doubles.
pub fn him_solve<T: Real>(sys: &SparseSystem<T>, u0: &[T], cfg: &HimConfig, corrector: &Corrector<T>) -> Result<HimOutcome<T>> {
    cfg.validate()?;
    check_start(sys, u0)?;
    let start = Instant::now();
    let mut u = u0.to_vec();
    let mut trace = ResidualTrace::new(corrector.name());
    let initial = sys.relative_residual(&u).as_f64();
    let bnorm = {
        let b = crate::pdegen::norm2(&sys.rhs);
        if b > T::zero() {
            b
        } else {
            T::one()
        }
    };
    let mut period = cfg.period;
    let mut since = 0;
    let done = |mut trace: ResidualTrace, u: Vec<T>, k: usize| {
        trace.seconds = start.elapsed().as_secs_f64();
        Ok(HimOutcome { solution: u, sweeps: k, trace })
    };
    let mut k = 0;
    while k < cfg.max_sweeps {
        k += 1;
        gauss_seidel_sweep(sys, &mut u)?;
        let r = sys.matrix.residual(&u, &sys.rhs);
        let res = (crate::pdegen::norm2(&r) / bnorm).as_f64();
        trace.push(k, res, Event::Sweep);
        if res <= cfg.tol {
            return done(trace, u, k);
        }
        if !res.is_finite() || res > 10.0 * initial {
            return Err(Error::Diverged { residual: res, initial });
        }
        since += 1;
        if since < period {
            continue;
        }
        since = 0;
        let Some(e) = corrector.correction(&r)? else { continue };
        let mut trial: Vec<T> = u.iter().zip(&e).map(|(&a, &b)| a + b).collect();
        // residual right after the correction, then after each smoothing sweep
        let mut steps = vec![sys.relative_residual(&trial).as_f64()];
        while steps.len() <= cfg.post_smooth && k + steps.len() <= cfg.max_sweeps {
            let last = steps[steps.len() - 1];
            if !last.is_finite() || last <= cfg.tol {
                break;
            }
            gauss_seidel_sweep(sys, &mut trial)?;
            steps.push(sys.relative_residual(&trial).as_f64());
        }
        let after = steps[steps.len() - 1];
        if after.is_finite() && after <= cfg.safeguard * res {
            u = trial;
            trace.push(k, steps[0], Event::Correction);
            for &v in &steps[1..] {
                k += 1;
                trace.push(k, v, Event::Sweep);
            }
            if after <= cfg.tol {
                return done(trace, u, k);
            }
        } else {
            k += steps.len() - 1;
            trace.push(k, res, Event::Rollback);
            period = period.saturating_mul(2);
        }
    }
    trace.seconds = start.elapsed().as_secs_f64();
    let residual = trace.final_residual().unwrap_or(initial);
    Err(Error::IterationLimit { iterations: cfg.max_sweeps, residual, trace: Box::new(trace) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdegen::{assemble_poisson, reference_disk_mesh, CsrMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> SparseSystem<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + rng.random::<f64>()));
            if i + 1 < n {
                let v = -rng.random::<f64>();
                t.push((i, i + 1, v));
                t.push((i + 1, i, v));
            }
            if i + 5 < n {
                let v = -0.5 * rng.random::<f64>();
                t.push((i, i + 5, v));
                t.push((i + 5, i, v));
            }
        }
        let rhs = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        SparseSystem { matrix: CsrMatrix::from_triplets(n, t), rhs, dirichlet_mask: vec![false; n] }
    }

    fn disk_system(h: f64) -> SparseSystem<f64> {
        let mesh = reference_disk_mesh::<f64>(h).unwrap();
        let n = mesh.len();
        assemble_poisson(&mesh, &vec![1.0; n], &vec![1.0; n], &vec![0.0; mesh.boundary_nodes.len()]).unwrap()
    }

    #[test]
    fn diagonal_system_in_one_sweep() {
        let n = 6;
        let t = (0..n).map(|i| (i, i, 1.0 + i as f64)).collect();
        let sys = SparseSystem {
            matrix: CsrMatrix::from_triplets(n, t),
            rhs: (0..n).map(|i| i as f64 - 2.0).collect(),
            dirichlet_mask: vec![false; n],
        };
        let mut u = vec![0.0; n];
        gauss_seidel_sweep(&sys, &mut u).unwrap();
        for i in 0..n {
            assert_eq!(u[i], (i as f64 - 2.0) / (1.0 + i as f64));
        }
    }

    #[test]
    fn zero_diagonal_is_an_error() {
        let sys = SparseSystem {
            matrix: CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 0.5), (1, 0, 0.5)]),
            rhs: vec![1.0, 1.0],
            dirichlet_mask: vec![false; 2],
        };
        assert!(matches!(gauss_seidel_sweep(&sys, &mut [0.0, 0.0]), Err(Error::ZeroDiagonal(1))));
    }

    #[test]
    fn residual_does_not_increase_and_solution_is_fixed() {
        let sys = random_spd(60, 2);
        let mut u = vec![0.0; 60];
        let mut last = sys.relative_residual(&u);
        // monitor until the residual reaches the rounding floor
        while last > 1e-13 {
            gauss_seidel_sweep(&sys, &mut u).unwrap();
            let r = sys.relative_residual(&u);
            assert!(r <= last * (1.0 + 1e-12), "{r} > {last}");
            last = r;
        }
        let exact = CholeskyFactor::new(&sys.matrix).unwrap().solve(&sys.rhs);
        let mut v = exact.clone();
        gauss_seidel_sweep(&sys, &mut v).unwrap();
        for (a, b) in v.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn no_corrector_is_plain_gauss_seidel() {
        let sys = disk_system(0.1);
        let u0 = vec![0.0; sys.len()];
        let plain = gauss_seidel(&sys, &u0, 1e-8, 100_000).unwrap();
        let cfg = HimConfig { period: 7, ..Default::default() };
        let him = him_solve(&sys, &u0, &cfg, &Corrector::None).unwrap();
        assert_eq!(plain.sweeps, him.sweeps);
        assert_eq!(plain.trace.entries, him.trace.entries);
        assert!(plain.solution.iter().zip(&him.solution).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn exact_oracle_converges_at_first_correction() {
        let sys = disk_system(0.1);
        let u0 = vec![0.0; sys.len()];
        let cfg = HimConfig { period: 5, ..Default::default() };
        let out = him_solve(&sys, &u0, &cfg, &Corrector::exact(&sys).unwrap()).unwrap();
        assert_eq!(out.sweeps, 5);
        assert_eq!(out.trace.count(Event::Correction), 1);
        assert_eq!(out.trace.entries.last().unwrap().event, Event::Correction);
    }

    #[test]
    fn smoothing_sweeps_are_counted() {
        let sys = disk_system(0.1);
        let n = sys.len();
        let u0 = vec![0.0; n];
        // 1e4 times the residual: far too large
        let tiny = SparseSystem { matrix: CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, 1e-4)).collect()), rhs: vec![0.0; n], dirichlet_mask: vec![false; n] };
        let wrong = Corrector::exact(&tiny).unwrap();
        let cfg = HimConfig { period: 4, post_smooth: 3, max_sweeps: 300, tol: 1e-14, ..Default::default() };
        let trace = match him_solve(&sys, &u0, &cfg, &wrong) {
            Err(Error::IterationLimit { trace, .. }) => *trace,
            other => panic!("expected the iteration limit, got {:?}", other.map(|o| o.sweeps)),
        };
        let rollbacks = trace.count(Event::Rollback);
        assert!(rollbacks > 0);
        assert_eq!(trace.count(Event::Sweep) + 3 * rollbacks, trace.sweeps());
        let e = &trace.entries;
        for i in 0..e.len() {
            if e[i].event == Event::Correction && i + 3 < e.len() {
                assert!(e[i + 3].residual <= e[i - 1].residual);
                assert_eq!(e[i + 3].iteration, e[i].iteration + 3);
            }
        }
    }

    #[test]
    fn iteration_limit_carries_the_trace() {
        let sys = disk_system(0.1);
        let u0 = vec![0.0; sys.len()];
        let cfg = HimConfig { max_sweeps: 10, ..Default::default() };
        match him_solve(&sys, &u0, &cfg, &Corrector::None) {
            Err(Error::IterationLimit { iterations, trace, .. }) => {
                assert_eq!(iterations, 10);
                assert_eq!(trace.entries.len(), 10);
                assert!(trace.to_csv().starts_with("iteration,residual,event\n1,"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(HimConfig { period: 0, ..Default::default() }.validate().is_err());
    }
}
