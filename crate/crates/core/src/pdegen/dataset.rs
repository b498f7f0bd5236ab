use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fem::assemble_poisson;
use super::gp::{gp_sample_with, GpSpec};
use super::mesh::{deform_mesh, lattice_mesh, reference_disk_mesh, reference_ring_mesh, MeshLocator, TriMesh};
use super::sparse::{solve_sparse, SolveMethod};
use crate::discretization::{
    encode_domain_any, CellPartition, DirectionScheme, FunctionScheme, Kappa, NodeSet,
};
use crate::error::{Error, Result};
use crate::geometry::random::{AnnulusSampler, PolygonSampler, StarSampler};
use crate::geometry::{polygon_to_star, Deformation, Domain, DomainRecord, LocalDomain, ReferenceRegion};
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"DEFDSET1";
pub const DATASET_FORMAT: &str = "deformnet-dataset/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Star,
    Polygon,
    Local,
    Annulus,
}

impl Family {
    pub fn reference(&self) -> ReferenceRegion {
        match self {
            Family::Star | Family::Polygon => ReferenceRegion::UnitBall { dim: 2 },
            Family::Local => ReferenceRegion::LocalUnion,
            Family::Annulus => ReferenceRegion::UnitRing,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Family::Star),
            "polygon" => Ok(Family::Polygon),
            "local" => Ok(Family::Local),
            "annulus" => Ok(Family::Annulus),
            _ => Err(Error::Config(format!("unknown family `{s}`"))),
        }
    }
}

/// Everything that determines a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub family: Family,
    pub n_samples: usize,
    pub seed: u64,
    /// Target edge length of the reference mesh (lattice step for the local family).
    pub mesh_h: f64,
    /// Discretization level `n`; encodings have `κ₁(n)` and `κ₂(n)` entries.
    pub level: usize,
    pub kappa: Kappa,
    pub function_scheme: FunctionScheme,
    pub node_seed: u64,
    /// Gauss order per direction of the cell rules when `function_scheme` is
    /// `cell_average`.
    pub cell_order: usize,
    pub include_centroid: bool,
    pub gp: GpSpec,
    /// Also draw a conductivity `k = 1 + 0.5 tanh(GP)` and boundary data `g = GP`.
    pub parameterized: bool,
    pub solver: SolveMethod,
    pub solver_tol: f64,
    pub star: StarSampler,
    pub polygon: PolygonSampler,
    pub annulus: AnnulusSampler,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            family: Family::Polygon,
            n_samples: 100,
            seed: 0,
            mesh_h: 0.1,
            level: 32,
            kappa: Kappa::default(),
            function_scheme: FunctionScheme::PointSample,
            node_seed: 1,
            cell_order: 2,
            include_centroid: false,
            gp: GpSpec::default(),
            parameterized: false,
            solver: SolveMethod::Direct,
            solver_tol: 1e-10,
            star: StarSampler::default(),
            polygon: PolygonSampler::default(),
            annulus: AnnulusSampler::default(),
        }
    }
}

/// Everything fixed across samples: encoder node sets and the reference mesh.
#[derive(Clone, Debug)]
pub struct EncoderSetup<T: Real> {
    pub region: ReferenceRegion,
    pub direction_set_id: String,
    /// Function encoder sample points in `Ω₀` (cell Gauss points for cell averages).
    pub function_points: Vec<Vec<T>>,
    /// For cell averages: `(cell, weight)` of each function point.
    pub cell_of_point: Option<Vec<(usize, T)>>,
    pub function_len: usize,
    pub function_node_set_id: String,
    pub boundary_points: Option<Vec<Vec<T>>>,
    pub reference_mesh: TriMesh<T>,
}

impl<T: Real> EncoderSetup<T> {
    pub fn new(cfg: &DatasetConfig) -> Result<Self> {
        let region = cfg.family.reference();
        let n = cfg.level;
        let k1 = cfg.kappa.domain_len(n);
        let k2 = cfg.kappa.function_len(n);
        let direction_set_id = match cfg.family {
            Family::Local => "local_offset".to_string(),
            Family::Annulus => format!("annulus:{}", DirectionScheme::Uniform2d(k1).id()),
            _ => DirectionScheme::Uniform2d(k1).id(),
        };
        let (function_points, cell_of_point, function_node_set_id) = match cfg.function_scheme {
            FunctionScheme::PointSample => {
                let nodes = NodeSet::<T>::uniform(region, k2, cfg.node_seed);
                (nodes.points().to_vec(), None, nodes.id().to_string())
            }
            FunctionScheme::CellAverage => {
                let mut p = CellPartition::for_region(region, k2)?;
                p.order = cfg.cell_order.max(1);
                let mut pts = Vec::new();
                let mut owner = Vec::new();
                for c in 0..p.len() {
                    let (x, w) = p.cell_rule::<T>(c);
                    let area: T = w.iter().copied().sum();
                    pts.extend(x);
                    owner.extend(w.into_iter().map(|wi| (c, wi / area)));
                }
                (pts, Some(owner), p.id())
            }
            FunctionScheme::BoundarySample => {
                return Err(Error::Config("boundary sampling is not a source encoder".into()))
            }
        };
        let boundary_points = if cfg.parameterized {
            let dirs = DirectionScheme::Uniform2d(k1).vectors::<T>()?;
            match cfg.family {
                Family::Star | Family::Polygon => Some(dirs),
                Family::Annulus => {
                    let mut v = dirs.clone();
                    v.extend(dirs.iter().map(|e| vec![e[0] * T::half(), e[1] * T::half()]));
                    Some(v)
                }
                Family::Local => {
                    return Err(Error::Config("parameterized inputs are not supported for the local family".into()))
                }
            }
        } else {
            None
        };
        let reference_mesh = reference_mesh(cfg.family, cfg.mesh_h)?;
        Ok(Self {
            region,
            direction_set_id,
            function_points,
            cell_of_point,
            function_len: k2,
            function_node_set_id,
            boundary_points,
            reference_mesh,
        })
    }

    /// Turns values at the function points into the encoding vector.
    pub fn reduce(&self, values: &[T]) -> Vec<T> {
        match &self.cell_of_point {
            None => values.to_vec(),
            Some(owner) => {
                let mut out = vec![T::zero(); self.function_len];
                for (&(c, w), &v) in owner.iter().zip(values) {
                    out[c] += w * v;
                }
                out
            }
        }
    }
}

/// Mesh of the family's reference region with edge length about `h`.
pub fn reference_mesh<T: Real>(family: Family, h: f64) -> Result<TriMesh<T>> {
    match family {
        Family::Star | Family::Polygon => reference_disk_mesh(h),
        Family::Annulus => reference_ring_mesh(h),
        Family::Local => lattice_mesh(&local_rects(0.5), h),
    }
}

fn local_rects(a: f64) -> Vec<[f64; 4]> {
    vec![[0.0, 1.0, 0.0, 1.0], [a - 0.15, a + 0.15, 1.0, 1.3]]
}

/// One generated sample.
#[derive(Clone, Debug)]
pub struct Sample<T: Real> {
    pub index: usize,
    pub seed: u64,
    pub domain: Domain<T>,
    /// Domain branch input.
    pub domain_enc: Vec<T>,
    /// Remaining branch inputs: source, then conductivity and boundary data
    /// when parameterized.
    pub inputs: Vec<Vec<T>>,
    pub mesh: TriMesh<T>,
    pub f_nodes: Vec<T>,
    pub k_nodes: Option<Vec<T>>,
    pub g_boundary: Option<Vec<T>>,
    pub solution: Vec<T>,
    /// `u ∘ D[Ω]` at the reference nodes listed in the header.
    pub d2d_target: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub config: DatasetConfig,
    pub reference_region: ReferenceRegion,
    pub direction_set_id: String,
    pub function_node_set_id: String,
    pub function_points: Vec<Vec<f64>>,
    pub boundary_points: Option<Vec<Vec<f64>>>,
    pub domain_len: usize,
    pub input_names: Vec<String>,
    pub input_lens: Vec<usize>,
    pub d2d_nodes: Vec<[f64; 2]>,
    pub d2d_weights: Vec<f64>,
    pub requested: usize,
    pub succeeded: usize,
    pub failures: Vec<SampleFailure>,
    pub record_fields: Vec<String>,
    pub encoder_hash: String,
}

#[derive(Clone, Debug)]
pub struct Dataset<T: Real> {
    pub header: DatasetHeader,
    pub samples: Vec<Sample<T>>,
}

/// Deterministic per-sample seed.
pub fn sample_seed(master: u64, index: usize) -> u64 {
    let mut z = master ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of everything a trained model's input widths depend on.
pub fn encoder_hash(cfg: &DatasetConfig, direction_set_id: &str, function_node_set_id: &str) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        family: Family,
        level: usize,
        kappa: Kappa,
        scheme: FunctionScheme,
        directions: &'a str,
        nodes: &'a str,
        include_centroid: bool,
        parameterized: bool,
    }
    let key = Key {
        family: cfg.family,
        level: cfg.level,
        kappa: cfg.kappa,
        scheme: cfg.function_scheme,
        directions: direction_set_id,
        nodes: function_node_set_id,
        include_centroid: cfg.include_centroid,
        parameterized: cfg.parameterized,
    };
    hex::encode(Sha256::digest(serde_json::to_vec(&key).expect("serializable key")))
}

/// Draws a domain of the configured family; `h` is the lattice step for
/// the local family.
pub fn draw_domain<T: Real>(cfg: &DatasetConfig, rng: &mut ChaCha8Rng, h: f64) -> Result<Domain<T>> {
    Ok(match cfg.family {
        Family::Star => Domain::Star(cfg.star.sample(rng)?),
        Family::Polygon => Domain::Star(polygon_to_star(&cfg.polygon.sample(rng)?, true)?),
        Family::Annulus => Domain::Annulus(cfg.annulus.sample(rng)?),
        Family::Local => {
            // offsets on the mesh lattice keep the physical mesh conforming
            let steps = (0.4 / h).round() as usize;
            let k = rng.random_range(0..=steps);
            Domain::Local(LocalDomain::new(T::lit(0.3 + k as f64 * h))?)
        }
    })
}

/// Domain branch input of `dom` under the dataset's encoder settings.
pub fn domain_features<T: Real>(cfg: &DatasetConfig, dom: &Domain<T>) -> Result<Vec<T>> {
    Ok(encode_domain_any(dom, cfg.kappa.domain_len(cfg.level), cfg.include_centroid)?.features())
}

/// Runs the full pipeline for one sample.
pub fn generate_sample<T: Real>(cfg: &DatasetConfig, setup: &EncoderSetup<T>, index: usize) -> Result<Sample<T>> {
    let seed = sample_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = draw_domain::<T>(cfg, &mut rng, cfg.mesh_h)?;
    let mesh = match &domain {
        Domain::Local(l) => lattice_mesh(&local_rects(l.offset().as_f64()), cfg.mesh_h)?,
        _ => deform_mesh(&setup.reference_mesh, &domain)?,
    };
    let n_nodes = mesh.len();
    let mut points: Vec<Vec<T>> = mesh.node_points();
    for x in &setup.function_points {
        points.push(domain.deform_closed(x)?);
    }
    let draw = |rng: &mut ChaCha8Rng, pts: &[Vec<T>]| gp_sample_with(&cfg.gp, pts, rng);
    let fv = draw(&mut rng, &points)?;
    let (f_nodes, f_enc) = (fv[..n_nodes].to_vec(), setup.reduce(&fv[n_nodes..]));
    let mut inputs = vec![f_enc];
    let (mut k_nodes, mut g_boundary) = (None, None);
    let mut k = vec![T::one(); n_nodes];
    let mut g = vec![T::zero(); mesh.boundary_nodes.len()];
    if cfg.parameterized {
        let kv: Vec<T> = draw(&mut rng, &points)?
            .into_iter()
            .map(|v| T::one() + T::half() * v.tanh())
            .collect();
        k = kv[..n_nodes].to_vec();
        inputs.push(setup.reduce(&kv[n_nodes..]));
        k_nodes = Some(k.clone());
        let bpts = setup.boundary_points.as_ref().expect("boundary points for parameterized runs");
        let mut gpts: Vec<Vec<T>> = mesh.boundary_nodes.iter().map(|&b| mesh.nodes[b].to_vec()).collect();
        for x in bpts {
            gpts.push(domain.deform_closed(x)?);
        }
        let gv = draw(&mut rng, &gpts)?;
        g = gv[..mesh.boundary_nodes.len()].to_vec();
        inputs.push(gv[mesh.boundary_nodes.len()..].to_vec());
        g_boundary = Some(g.clone());
    }
    let sys = assemble_poisson(&mesh, &k, &f_nodes, &g)?;
    let solution = solve_sparse(&sys, cfg.solver, T::lit(cfg.solver_tol))?;
    let d2d_target = match &domain {
        Domain::Local(_) => {
            let loc = MeshLocator::new(&mesh);
            setup
                .reference_mesh
                .nodes
                .iter()
                .map(|x| loc.interpolate(&solution, &domain.deform_closed(x)?))
                .collect::<Result<Vec<T>>>()?
        }
        _ => solution.clone(),
    };
    let domain_enc = domain_features(cfg, &domain)?;
    Ok(Sample { index, seed, domain, domain_enc, inputs, mesh, f_nodes, k_nodes, g_boundary, solution, d2d_target })
}

fn record_fields(parameterized: bool) -> Vec<String> {
    let mut v = vec!["domain_enc", "f_enc"];
    if parameterized {
        v.extend(["k_enc", "g_enc"]);
    }
    v.extend(["mesh_nodes", "triangles", "boundary_nodes", "f_nodes"]);
    if parameterized {
        v.extend(["k_nodes", "g_boundary"]);
    }
    v.extend(["solution", "node_weights", "d2d_target"]);
    v.into_iter().map(String::from).collect()
}

/// Generates `cfg.n_samples` samples in parallel; failed samples are
/// recorded in the header with their reason.
pub fn generate_dataset<T: Real>(cfg: &DatasetConfig) -> Result<Dataset<T>> {
    cfg.gp.validate()?;
    let setup = EncoderSetup::<T>::new(cfg)?;
    let results: Vec<Result<Sample<T>>> =
        (0..cfg.n_samples).into_par_iter().map(|i| generate_sample(cfg, &setup, i)).collect();
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => failures.push(SampleFailure { index: i, reason: e.to_string() }),
        }
    }
    let header = build_header(cfg, &setup, samples.len(), failures);
    Ok(Dataset { header, samples })
}

fn build_header<T: Real>(cfg: &DatasetConfig, setup: &EncoderSetup<T>, ok: usize, failures: Vec<SampleFailure>) -> DatasetHeader {
    let to64 = |v: &[Vec<T>]| v.iter().map(|p| p.iter().map(|x| x.as_f64()).collect()).collect::<Vec<Vec<f64>>>();
    let k1 = cfg.kappa.domain_len(cfg.level);
    let domain_len = match cfg.family {
        Family::Local => 1,
        Family::Annulus => 2 * k1,
        _ => k1,
    } + if cfg.include_centroid && cfg.family != Family::Local { 2 } else { 0 };
    let mut input_names = vec!["f".to_string()];
    let mut input_lens = vec![setup.function_len];
    if let Some(b) = &setup.boundary_points {
        input_names.extend(["k".to_string(), "g".to_string()]);
        input_lens.extend([setup.function_len, b.len()]);
    }
    DatasetHeader {
        format: DATASET_FORMAT.into(),
        config: cfg.clone(),
        reference_region: setup.region,
        direction_set_id: setup.direction_set_id.clone(),
        function_node_set_id: setup.function_node_set_id.clone(),
        function_points: to64(&setup.function_points),
        boundary_points: setup.boundary_points.as_ref().map(|b| to64(b)),
        domain_len,
        input_names,
        input_lens,
        d2d_nodes: setup.reference_mesh.nodes.iter().map(|p| [p[0].as_f64(), p[1].as_f64()]).collect(),
        d2d_weights: setup.reference_mesh.node_weights.iter().map(|w| w.as_f64()).collect(),
        requested: cfg.n_samples,
        succeeded: ok,
        failures,
        record_fields: record_fields(cfg.parameterized),
        encoder_hash: encoder_hash(cfg, &setup.direction_set_id, &setup.function_node_set_id),
    }
}

impl<T: Real> Dataset<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Splits off the first `n_train` samples; both parts keep the header.
    pub fn split(&self, n_train: usize) -> (Dataset<T>, Dataset<T>) {
        let n = n_train.min(self.samples.len());
        (
            Dataset { header: self.header.clone(), samples: self.samples[..n].to_vec() },
            Dataset { header: self.header.clone(), samples: self.samples[n..].to_vec() },
        )
    }

    pub fn d2d_nodes(&self) -> Vec<Vec<T>> {
        self.header.d2d_nodes.iter().map(|p| vec![T::lit(p[0]), T::lit(p[1])]).collect()
    }

    pub fn d2d_weights(&self) -> Vec<T> {
        self.header.d2d_weights.iter().map(|&w| T::lit(w)).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        write_bytes(w, &serde_json::to_vec(&self.header)?)?;
        w.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        for s in &self.samples {
            let meta = RecordMeta { index: s.index, seed: s.seed, domain: s.domain.to_record() };
            write_bytes(w, &serde_json::to_vec(&meta)?)?;
            for name in &self.header.record_fields {
                write_array(w, &record_field(s, name))?;
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a dataset file (bad magic)".into()));
        }
        let header: DatasetHeader = serde_json::from_slice(&read_bytes(r)?)?;
        if header.format != DATASET_FORMAT {
            return Err(Error::Format(format!("unsupported dataset format `{}`", header.format)));
        }
        let n = read_u64(r)? as usize;
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            let meta: RecordMeta = serde_json::from_slice(&read_bytes(r)?)?;
            let mut fields = std::collections::HashMap::new();
            for name in &header.record_fields {
                fields.insert(name.as_str(), read_array(r)?);
            }
            samples.push(sample_from_fields(meta, &fields, header.config.parameterized)?);
        }
        Ok(Self { header, samples })
    }
}

#[derive(Serialize, Deserialize)]
struct RecordMeta {
    index: usize,
    seed: u64,
    domain: DomainRecord,
}

fn record_field<T: Real>(s: &Sample<T>, name: &str) -> Vec<f64> {
    let f = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
    match name {
        "domain_enc" => f(&s.domain_enc),
        "f_enc" => f(&s.inputs[0]),
        "k_enc" => f(&s.inputs[1]),
        "g_enc" => f(&s.inputs[2]),
        "mesh_nodes" => s.mesh.nodes.iter().flat_map(|p| [p[0].as_f64(), p[1].as_f64()]).collect(),
        "triangles" => s.mesh.triangles.iter().flat_map(|t| t.map(|i| i as f64)).collect(),
        "boundary_nodes" => s.mesh.boundary_nodes.iter().map(|&i| i as f64).collect(),
        "f_nodes" => f(&s.f_nodes),
        "k_nodes" => f(s.k_nodes.as_deref().unwrap_or(&[])),
        "g_boundary" => f(s.g_boundary.as_deref().unwrap_or(&[])),
        "solution" => f(&s.solution),
        "node_weights" => f(&s.mesh.node_weights),
        "d2d_target" => f(&s.d2d_target),
        _ => unreachable!("unknown record field {name}"),
    }
}

fn sample_from_fields<T: Real>(
    meta: RecordMeta,
    fields: &std::collections::HashMap<&str, Vec<f64>>,
    parameterized: bool,
) -> Result<Sample<T>> {
    let get = |k: &str| fields.get(k).ok_or_else(|| Error::Format(format!("record lacks `{k}`")));
    let t = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    let idx = |v: &[f64]| v.iter().map(|&x| x as usize).collect::<Vec<usize>>();
    let nodes = get("mesh_nodes")?.chunks_exact(2).map(|c| [T::lit(c[0]), T::lit(c[1])]).collect();
    let triangles = idx(get("triangles")?).chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    let mesh = TriMesh {
        nodes,
        triangles,
        boundary_nodes: idx(get("boundary_nodes")?),
        node_weights: t(get("node_weights")?),
    };
    let mut inputs = vec![t(get("f_enc")?)];
    let (mut k_nodes, mut g_boundary) = (None, None);
    if parameterized {
        inputs.push(t(get("k_enc")?));
        inputs.push(t(get("g_enc")?));
        k_nodes = Some(t(get("k_nodes")?));
        g_boundary = Some(t(get("g_boundary")?));
    }
    Ok(Sample {
        index: meta.index,
        seed: meta.seed,
        domain: Domain::from_record(&meta.domain)?,
        domain_enc: t(get("domain_enc")?),
        inputs,
        mesh,
        f_nodes: t(get("f_nodes")?),
        k_nodes,
        g_boundary,
        solution: t(get("solution")?),
        d2d_target: t(get("d2d_target")?),
    })
}

pub(crate) fn write_bytes<W: Write>(w: &mut W, b: &[u8]) -> Result<()> {
    w.write_all(&(b.len() as u64).to_le_bytes())?;
    w.write_all(b)?;
    Ok(())
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_bytes<R: Read>(r: &mut R) -> Result<Vec<u8>> {
    let n = read_u64(r)? as usize;
    let mut b = vec![0u8; n];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub(crate) fn write_array<W: Write>(w: &mut W, v: &[f64]) -> Result<()> {
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_array<R: Read>(r: &mut R) -> Result<Vec<f64>> {
    let n = read_u64(r)? as usize;
    let mut b = vec![0u8; 8 * n];
    r.read_exact(&mut b)?;
    Ok(b.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}
