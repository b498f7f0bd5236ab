//! Command-line entry point: `generate`, `train`, `eval`, `him`, `verify`
//! and `encode`, each driven by a `key = value` config.

pub mod config;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{Deformation, Domain, StarDomain};
use crate::him::{gauss_seidel, him_problem, him_report, him_solve, Corrector, HimConfig, NeuralCorrector};
use crate::operator::{evaluate, train, MioNet, ModelConfig, TrainConfig};
use crate::pdegen::{domain_features, generate_dataset, gp_sample, sample_seed, Dataset, DatasetConfig, EncoderSetup};
pub use config::{Resolver, RunConfig};
pub use verify::{run_verify, VerifyConfig, VerifyReport};

#[derive(Debug, Parser)]
#[command(name = "deformnet", version, about = "Operator learning on families of deformed domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run config (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for dataset generation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Extra `key=value` overrides applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate a dataset and its manifest.
    Generate,
    /// Train a model on a dataset.
    Train,
    /// Evaluate a model on a dataset split.
    Eval,
    /// Compare Gauss-Seidel with the hybrid solver.
    Him,
    /// Run the discretization and metric property suites.
    Verify,
    /// Print the encodings of one domain and source as JSON.
    Encode,
}

/// Which samples a command sees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Samples `0..n_train` form the training part; 0 means all.
    pub n_train: usize,
    /// `train`, `test` or `all` (used by `eval`).
    pub part: String,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { n_train: 0, part: "test".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HimRun {
    pub corrector: String,
    pub mesh_h: f64,
    /// Also run plain Gauss-Seidel as the baseline.
    pub compare: bool,
    pub solver: HimConfig,
}

impl Default for HimRun {
    fn default() -> Self {
        Self { corrector: "neural".into(), mesh_h: 1.0 / 81.0, compare: true, solver: HimConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeRun {
    /// `disk`, `ellipse:A,B`, or a path to a domain JSON file.
    pub domain: String,
    /// `none`, `one` or `gp`.
    pub function: String,
}

impl Default for EncodeRun {
    fn default() -> Self {
        Self { domain: "disk".into(), function: "gp".into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Paths {
    pub dataset: String,
    pub model: String,
}

#[derive(Serialize)]
struct ManifestEntry {
    name: String,
    bytes: u64,
    sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn write_manifest(out: &Path, command: &str, seed: u64, files: &[&str]) -> Result<()> {
    let mut entries = Vec::new();
    for f in files {
        let p = out.join(f);
        entries.push(ManifestEntry { name: f.to_string(), bytes: fs::metadata(&p)?.len(), sha256: sha256_file(&p)? });
    }
    let m = json!({ "command": command, "seed": seed, "files": entries });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

fn require(path: &str, what: &str) -> Result<PathBuf> {
    if path.is_empty() {
        return Err(Error::Config(format!("paths.{what} is not set")));
    }
    let p = PathBuf::from(path);
    if !p.exists() {
        return Err(Error::Config(format!("{what} file `{path}` does not exist")));
    }
    Ok(p)
}

fn split_parts(data: Dataset<f64>, split: &SplitConfig) -> (Dataset<f64>, Dataset<f64>) {
    let n = if split.n_train == 0 { data.len() } else { split.n_train };
    data.split(n)
}

/// Runs one command; `Ok(false)` means it ran but a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let mut raw = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        raw.set(k.trim(), v.trim());
    }
    if let Some(s) = cli.seed {
        raw.set("seed", s.to_string());
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    fs::create_dir_all(&cli.out)?;
    let mut r = Resolver::new(raw);
    let seed: u64 = r.scalar("seed", 0u64)?;
    let out = cli.out.as_path();
    let start = Instant::now();
    let ok = match cli.command {
        Command::Generate => {
            let mut cfg: DatasetConfig = r.section("data", &DatasetConfig::default(), &["seed"])?;
            cfg.seed = seed;
            let resolved = r.finish()?;
            let data: Dataset<f64> = generate_dataset(&cfg)?;
            data.write(&out.join("dataset.bin"))?;
            fs::write(out.join("config.resolved"), resolved.to_text())?;
            write_manifest(out, "generate", seed, &["dataset.bin", "config.resolved"])?;
            eprintln!(
                "generated {}/{} samples ({} failed) in {:.1}s",
                data.header.succeeded,
                data.header.requested,
                data.header.failures.len(),
                start.elapsed().as_secs_f64()
            );
            true
        }
        Command::Train => {
            let paths: Paths = r.section("paths", &Paths::default(), &["model"])?;
            let split: SplitConfig = r.section("split", &SplitConfig::default(), &["part"])?;
            let mut mcfg: ModelConfig = r.section("model", &ModelConfig::default(), &["seed"])?;
            let mut tcfg: TrainConfig = r.section("train", &TrainConfig::default(), &["seed"])?;
            mcfg.seed = sample_seed(seed, 1);
            tcfg.seed = sample_seed(seed, 2);
            let resolved = r.finish()?;
            let data = Dataset::<f64>::read(&require(&paths.dataset, "dataset")?)?;
            let (tr, _) = split_parts(data, &split);
            let mut model = MioNet::for_dataset(tcfg.framework, &tr, &mcfg)?;
            let hist = train(&mut model, &tr, &tcfg)?;
            model.write(&out.join("model.bin"))?;
            fs::write(out.join("history.json"), serde_json::to_string(&hist)? + "\n")?;
            fs::write(out.join("config.resolved"), resolved.to_text())?;
            write_manifest(out, "train", seed, &["model.bin", "history.json", "config.resolved"])?;
            eprintln!(
                "trained {} parameters for {} iterations in {:.1}s, final loss {:.4e}",
                model.n_params(),
                hist.losses.len(),
                start.elapsed().as_secs_f64(),
                hist.losses.last().copied().unwrap_or(f64::NAN)
            );
            true
        }
        Command::Eval => {
            let paths: Paths = r.section("paths", &Paths::default(), &[])?;
            let split: SplitConfig = r.section("split", &SplitConfig::default(), &[])?;
            let resolved = r.finish()?;
            let data = Dataset::<f64>::read(&require(&paths.dataset, "dataset")?)?;
            let model = MioNet::<f64>::read(&require(&paths.model, "model")?)?;
            let (tr, te) = split_parts(data, &split);
            let part = match split.part.as_str() {
                "train" => tr,
                "test" => te,
                "all" => Dataset { header: tr.header.clone(), samples: tr.samples.into_iter().chain(te.samples).collect() },
                other => return Err(Error::Config(format!("split.part must be train, test or all, got `{other}`"))),
            };
            let report = evaluate(&model, &part)?;
            fs::write(out.join("metrics.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            fs::write(out.join("config.resolved"), resolved.to_text())?;
            println!(
                "{} samples: mean {:.4} median {:.4} max {:.4}",
                report.n_samples, report.mean, report.median, report.max
            );
            true
        }
        Command::Him => {
            let paths: Paths = r.section("paths", &Paths::default(), &[])?;
            let run: HimRun = r.section("him", &HimRun::default(), &[])?;
            let data_override: DatasetConfig = r.section("data", &DatasetConfig::default(), &["seed"])?;
            let resolved = r.finish()?;
            let (corrector_needs_model, data_cfg, header) = if run.corrector == "neural" {
                let data = Dataset::<f64>::read(&require(&paths.dataset, "dataset")?)?;
                (true, data.header.config.clone(), Some(data.header))
            } else {
                (false, data_override, None)
            };
            let problem = him_problem::<f64>(&data_cfg, seed, run.mesh_h)?;
            let sys = &problem.system;
            let corrector = match run.corrector.as_str() {
                "none" => Corrector::None,
                "exact_oracle" => Corrector::exact(sys)?,
                "neural" if corrector_needs_model => {
                    let model = MioNet::<f64>::read(&require(&paths.model, "model")?)?;
                    let header = header.expect("header read with the dataset");
                    Corrector::Neural(Box::new(NeuralCorrector::new(&model, &header, &problem.domain, &problem.mesh)?))
                }
                other => return Err(Error::Config(format!("unknown corrector `{other}`"))),
            };
            let u0 = vec![0.0; sys.len()];
            let mut traces = Vec::new();
            let mut converged = true;
            if run.compare {
                match gauss_seidel(sys, &u0, run.solver.tol, run.solver.max_sweeps) {
                    Ok(o) => traces.push(o.trace),
                    Err(Error::IterationLimit { trace, .. }) => {
                        converged = false;
                        traces.push(*trace)
                    }
                    Err(e) => return Err(e),
                }
            }
            match him_solve(sys, &u0, &run.solver, &corrector) {
                Ok(o) => traces.push(o.trace),
                Err(Error::IterationLimit { trace, .. }) => {
                    converged = false;
                    traces.push(*trace)
                }
                Err(e) => return Err(e),
            }
            for t in &traces {
                let name = if t.method == "gs" { "gs.csv".to_string() } else { format!("him_{}.csv", t.method) };
                fs::write(out.join(name), t.to_csv())?;
            }
            if traces.len() >= 2 {
                let report = him_report(&traces)?;
                fs::write(out.join("comparison.json"), report.to_json()? + "\n")?;
                fs::write(out.join("comparison.txt"), report.to_text())?;
                print!("{}", report.to_text());
            } else {
                println!("{}: {} sweeps", traces[0].method, traces[0].sweeps());
            }
            fs::write(out.join("config.resolved"), resolved.to_text())?;
            eprintln!("{} unknowns", sys.len());
            converged
        }
        Command::Verify => {
            let vcfg: VerifyConfig = r.section("verify", &VerifyConfig::default(), &[])?;
            let resolved = r.finish()?;
            let report = run_verify(&vcfg, seed)?;
            for c in &report.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            fs::write(out.join("verify.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            fs::write(out.join("config.resolved"), resolved.to_text())?;
            report.all_pass()
        }
        Command::Encode => {
            let cfg: DatasetConfig = r.section("data", &DatasetConfig::default(), &["seed"])?;
            let enc: EncodeRun = r.section("encode", &EncodeRun::default(), &[])?;
            r.finish()?;
            println!("{}", serde_json::to_string_pretty(&encode_one(&cfg, &enc, seed)?)?);
            true
        }
    };
    Ok(ok)
}

fn parse_domain(spec: &str) -> Result<Domain<f64>> {
    if spec == "disk" {
        return Ok(Domain::Star(StarDomain::disk([0.0, 0.0], 1.0)?));
    }
    if let Some(ab) = spec.strip_prefix("ellipse:") {
        let v: Vec<f64> = ab
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("ellipse axes: {e}"))))
            .collect::<Result<_>>()?;
        if v.len() != 2 {
            return Err(Error::Config("ellipse needs two semi-axes".into()));
        }
        return Ok(Domain::Star(StarDomain::ellipse([0.0, 0.0], v[0], v[1])?));
    }
    Domain::from_json(&fs::read_to_string(spec)?)
}

fn encode_one(cfg: &DatasetConfig, enc: &EncodeRun, seed: u64) -> Result<serde_json::Value> {
    let dom = parse_domain(&enc.domain)?;
    let setup = EncoderSetup::<f64>::new(cfg)?;
    let domain = domain_features(cfg, &dom)?;
    let pts: Vec<Vec<f64>> = setup.function_points.iter().map(|x| dom.deform_closed(x)).collect::<Result<_>>()?;
    let values = match enc.function.as_str() {
        "none" => None,
        "one" => Some(vec![1.0; pts.len()]),
        "gp" => Some(gp_sample(&cfg.gp, &pts, seed)?),
        other => return Err(Error::Config(format!("unknown encode.function `{other}`"))),
    };
    Ok(json!({
        "domain_kind": dom.kind(),
        "direction_set_id": setup.direction_set_id,
        "domain": domain,
        "function_node_set_id": setup.function_node_set_id,
        "function": values.map(|v| setup.reduce(&v)),
    }))
}

/// Parses arguments, runs, and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

