use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::pdegen::{
    assemble_poisson, deform_mesh, draw_domain, reference_mesh, sample_seed, DatasetConfig, GpField, SparseSystem, TriMesh,
};
use crate::scalar::Real;

/// Reference-mesh step of the support on which a large-mesh source is drawn.
const SUPPORT_H: f64 = 0.1;

/// A Poisson system on a fine mesh of one domain drawn from a dataset
/// family, with a Gaussian-process source and zero boundary values.
#[derive(Clone, Debug)]
pub struct HimProblem<T: Real> {
    pub domain: Domain<T>,
    pub mesh: TriMesh<T>,
    pub f_nodes: Vec<T>,
    pub system: SparseSystem<T>,
}

pub fn him_problem<T: Real>(cfg: &DatasetConfig, seed: u64, mesh_h: f64) -> Result<HimProblem<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = draw_domain::<T>(cfg, &mut rng, cfg.mesh_h)?;
    if matches!(domain, Domain::Local(_)) {
        return Err(Error::Config("the hybrid solver needs a family with deformed reference meshes".into()));
    }
    let mesh = deform_mesh(&reference_mesh::<T>(cfg.family, mesh_h)?, &domain)?;
    let support = deform_mesh(&reference_mesh::<T>(cfg.family, SUPPORT_H)?, &domain)?.node_points();
    let field = GpField::sample(&cfg.gp, support, sample_seed(seed, 1))?;
    let f_nodes: Vec<T> = mesh.node_points().iter().map(|p| field.eval(p)).collect();
    let n = mesh.len();
    let system = assemble_poisson(&mesh, &vec![T::one(); n], &f_nodes, &vec![T::zero(); mesh.boundary_nodes.len()])?;
    Ok(HimProblem { domain, mesh, f_nodes, system })
}
