use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::{Deformation, Domain};
use crate::operator::{Framework, MioNet};
use crate::pdegen::{domain_features, DatasetHeader, EncoderSetup, MeshLocator, TriMesh};
use crate::scalar::Real;

/// Barycentric snapping tolerance for encoder points near a polygonal mesh
/// boundary.
const SNAP_TOL: f64 = 0.05;

/// Residual correction by a trained network with a linear source branch.
/// Everything that does not depend on the residual is evaluated once.
pub struct NeuralCorrector<T: Real> {
    model: MioNet<T>,
    setup: EncoderSetup<T>,
    domain_input: Vec<T>,
    /// Triangle and barycentric weights of each deformed encoder point.
    stencil: Vec<([usize; 3], [T; 3])>,
    trunk: Array2<T>,
    weights: Vec<T>,
    dirichlet: Vec<bool>,
}

impl<T: Real> NeuralCorrector<T> {
    /// `header` is the training dataset's header: it fixes the encoders.
    pub fn new(model: &MioNet<T>, header: &DatasetHeader, dom: &Domain<T>, mesh: &TriMesh<T>) -> Result<Self> {
        if model.branches.len() != 2 || !model.branches[1].linear {
            return Err(Error::InvalidArgument(
                "residual correction needs exactly a domain branch and a linear source branch".into(),
            ));
        }
        if model.encoder_hash != header.encoder_hash {
            return Err(Error::Config("model and dataset encoders differ".into()));
        }
        let setup = EncoderSetup::<T>::new(&header.config)?;
        let loc = MeshLocator::new(mesh);
        let mut stencil = Vec::with_capacity(setup.function_points.len());
        for x in &setup.function_points {
            let y = dom.deform_closed(x)?;
            let (k, l) = loc.locate(&y, SNAP_TOL).ok_or_else(|| Error::OutsideDomain {
                point: y.iter().map(|v| v.as_f64()).collect(),
                region: "system mesh".into(),
            })?;
            stencil.push((mesh.triangles[k], l.map(T::lit)));
        }
        let points = match model.framework {
            Framework::D2e => mesh.node_points(),
            Framework::D2d => mesh.node_points().iter().map(|y| dom.deform_inverse_closed(y)).collect::<Result<_>>()?,
        };
        let trunk = model.trunk_features(&points);
        let mut dirichlet = vec![false; mesh.len()];
        for &b in &mesh.boundary_nodes {
            dirichlet[b] = true;
        }
        Ok(Self {
            model: model.clone(),
            domain_input: domain_features(&header.config, dom)?,
            setup,
            stencil,
            trunk,
            weights: mesh.node_weights.clone(),
            dirichlet,
        })
    }

    /// Approximate solution of `A e = r` with zero boundary values. The
    /// residual becomes the nodal source `r / w`, normalized to unit L².
    pub fn correct(&self, residual: &[T]) -> Result<Vec<T>> {
        if residual.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), got: residual.len() });
        }
        let s: Vec<T> = residual
            .iter()
            .zip(&self.weights)
            .zip(&self.dirichlet)
            .map(|((&r, &w), &d)| if d { T::zero() } else { r / w })
            .collect();
        let norm = s.iter().zip(&self.weights).map(|(&v, &w)| w * v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return Ok(vec![T::zero(); s.len()]);
        }
        let at_points: Vec<T> = self
            .stencil
            .iter()
            .map(|(t, l)| (0..3).map(|i| l[i] * s[t[i]]).sum::<T>() / norm)
            .collect();
        let inputs = vec![self.domain_input.clone(), self.setup.reduce(&at_points)];
        let e = self.model.combine_trunk(&inputs, &self.trunk)?;
        Ok(e.into_iter()
            .zip(&self.dirichlet)
            .map(|(v, &d)| if d { T::zero() } else { v * norm })
            .collect())
    }
}
