//! Empirical discretization and metric checks run by `verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{decode_domain, encode_domain, project_x, x_metric, FieldSample, Quadrature};
use crate::error::Result;
use crate::geometry::random::StarSampler;
use crate::geometry::{star_metric, Domain, ReferenceRegion, StarDomain, DEFAULT_METRIC_ANGLES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n_domains: usize,
    pub levels: Vec<usize>,
    pub min_rate: f64,
    pub triples: usize,
    pub quadrature_nodes: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { n_domains: 20, levels: vec![16, 32, 64, 128], min_rate: 1.8, triples: 100, quadrature_nodes: 2048 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn family(cfg: &VerifyConfig, seed: u64) -> Result<Vec<StarDomain<f64>>> {
    let sampler = StarSampler::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cfg.n_domains).map(|_| sampler.sample(&mut rng)).collect()
}

fn projection_gap(dom: &StarDomain<f64>, n: usize) -> Result<f64> {
    let p = decode_domain(&encode_domain(dom, n, true)?)?;
    star_metric(dom, &p, DEFAULT_METRIC_ANGLES)
}

/// `sup_Ω d_U(Ω, P¹_n Ω)` over the family for each level, and the ratios
/// between consecutive levels.
pub fn domain_convergence(cfg: &VerifyConfig, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let doms = family(cfg, seed)?;
    let mut sups = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        let mut worst: f64 = 0.0;
        for d in &doms {
            worst = worst.max(projection_gap(d, n)?);
        }
        sups.push(worst);
    }
    let rates = sups.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((sups, rates))
}

/// Measured disk gap and `1 − cos(π/n)` per level.
pub fn disk_gaps(levels: &[usize]) -> Result<Vec<(f64, f64)>> {
    let disk = StarDomain::disk([0.0, 0.0], 1.0)?;
    levels.iter().map(|&n| Ok((projection_gap(&disk, n)?, 1.0 - (PI / n as f64).cos()))).collect()
}

fn test_field(y: &[f64]) -> f64 {
    (PI * y[0]).sin() * (1.0 + 0.5 * y[1]) + (2.0 * y[1]).cos()
}

/// `sup ‖(Ω, f) − P_n(Ω, f)‖_X` over the family for each level.
pub fn function_convergence(cfg: &VerifyConfig, seed: u64) -> Result<Vec<f64>> {
    let doms = family(cfg, seed)?;
    let q = Quadrature::monte_carlo(ReferenceRegion::UnitBall { dim: 2 }, cfg.quadrature_nodes, seed ^ 0x5eed)?;
    let samples: Vec<FieldSample<f64>> =
        doms.into_iter().map(|d| FieldSample::new(Domain::Star(d), Arc::new(test_field))).collect();
    let mut sups = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        let mut worst: f64 = 0.0;
        for s in &samples {
            worst = worst.max(x_metric(s, &project_x(s, n)?, &q)?);
        }
        sups.push(worst);
    }
    Ok(sups)
}

/// Worst violations over random triples: `(max |d(a,b) − d(b,a)|, max
/// d(a,c) − d(a,b) − d(b,c), max d(a,a), min d(a,b))`.
pub fn metric_axioms<F>(triples: usize, seed: u64, mut draw: impl FnMut(&mut ChaCha8Rng) -> Result<F>, d: impl Fn(&F, &F) -> Result<f64>) -> Result<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = [0.0, f64::NEG_INFINITY, 0.0, f64::INFINITY];
    for _ in 0..triples {
        let (a, b, c) = (draw(&mut rng)?, draw(&mut rng)?, draw(&mut rng)?);
        let (ab, ba, bc, ac) = (d(&a, &b)?, d(&b, &a)?, d(&b, &c)?, d(&a, &c)?);
        out[0] = f64::max(out[0], (ab - ba).abs());
        out[1] = out[1].max(ac - ab - bc);
        out[2] = out[2].max(d(&a, &a)?.abs());
        out[3] = out[3].min(ab.min(bc).min(ac));
    }
    Ok(out)
}

fn random_field(rng: &mut ChaCha8Rng, sampler: &StarSampler) -> Result<FieldSample<f64>> {
    let dom = sampler.sample(rng)?;
    let (a, b, c): (f64, f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0), rng.random_range(0.5..3.0));
    // translate a little so centroid distances enter
    let shift = [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)];
    let f = Arc::new(move |y: &[f64]| a + b * (c * y[0]).sin() * y[1]);
    Ok(FieldSample::new(Domain::Star(dom.translated(&shift)), f))
}

pub fn run_verify(cfg: &VerifyConfig, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let (sups, rates) = domain_convergence(cfg, seed)?;
    let ok = rates.iter().all(|&r| r >= cfg.min_rate);
    checks.push(Check {
        name: "domain_convergence".into(),
        pass: ok,
        detail: format!("sup d_U [{}], ratios per doubling [{}] (need >= {})", list(&sups), list(&rates), cfg.min_rate),
        values: rates,
    });
    let gaps = disk_gaps(&cfg.levels)?;
    let worst = gaps.iter().map(|(m, o)| (m - o).abs()).fold(0.0, f64::max);
    checks.push(Check {
        name: "disk_gap".into(),
        pass: worst <= 1e-3,
        detail: format!("max |measured − (1 − cos(π/n))| = {worst:.3e}"),
        values: gaps.iter().map(|g| g.0).collect(),
    });
    let fsups = function_convergence(cfg, seed)?;
    checks.push(Check {
        name: "function_convergence".into(),
        pass: fsups.windows(2).all(|w| w[1] < w[0]),
        detail: format!("sup d_X(s, P_n s) [{}]", list(&fsups)),
        values: fsups,
    });
    let sampler = StarSampler::default();
    let du = metric_axioms(
        cfg.triples,
        seed.wrapping_add(1),
        |r| Ok(sampler.sample::<f64, _>(r)?.translated(&[r.random_range(-0.2..0.2), r.random_range(-0.2..0.2)])),
        |a, b| star_metric(a, b, DEFAULT_METRIC_ANGLES),
    )?;
    checks.push(axiom_check("metric_axioms_d_u", du));
    let q = Quadrature::monte_carlo(ReferenceRegion::UnitBall { dim: 2 }, cfg.quadrature_nodes, seed)?;
    let dx = metric_axioms(cfg.triples, seed.wrapping_add(2), |r| random_field(r, &sampler), |a, b| x_metric(a, b, &q))?;
    checks.push(axiom_check("metric_axioms_d_x", dx));
    Ok(VerifyReport { seed, checks })
}

fn axiom_check(name: &str, v: [f64; 4]) -> Check {
    Check {
        name: name.into(),
        pass: v[0] == 0.0 && v[1] <= 1e-12 && v[2] <= 1e-12 && v[3] >= 0.0,
        detail: format!("asymmetry {:.1e}, triangle excess {:.1e}, self-distance {:.1e}, min {:.3e}", v[0], v[1], v[2], v[3]),
        values: v.to_vec(),
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}
