//! Poisson data generation: reference meshes and their deformations, P1
//! finite elements, sparse solvers, Gaussian-process inputs and analytic
//! oracles.

mod dataset;
mod fem;
mod gp;
mod greens;
mod mesh;
mod sparse;

pub use dataset::{
    domain_features, draw_domain, encoder_hash, generate_dataset, generate_sample, sample_seed, Dataset, DatasetConfig, DatasetHeader,
    reference_mesh, EncoderSetup, Family, Sample, SampleFailure, DATASET_FORMAT,
};
pub(crate) use dataset::{read_array, read_bytes, write_array, write_bytes};
pub use fem::{assemble_poisson, assemble_stiffness};
pub use gp::{gp_sample, gp_sample_with, GpField, GpSpec, GP_MAX_POINTS};
pub use greens::greens_disk;
pub use mesh::{
    deform_mesh, lattice_mesh, polar_mesh, reference_disk_mesh, reference_ring_mesh, MeshLocator, TriMesh,
};
pub use sparse::{
    conjugate_gradient, reverse_cuthill_mckee, solve_sparse, CholeskyFactor, CsrMatrix, SolveMethod, SparseSystem,
};
pub(crate) use sparse::norm2;
