use super::mesh::TriMesh;
use super::sparse::{CsrMatrix, SparseSystem};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// P1 stiffness matrix of `−∇·(k∇u)` with `k` averaged over each triangle's
/// vertices. No boundary conditions are applied.
pub fn assemble_stiffness<T: Real>(mesh: &TriMesh<T>, k: &[T]) -> Result<CsrMatrix<T>> {
    if k.len() != mesh.len() {
        return Err(Error::DimensionMismatch { expected: mesh.len(), got: k.len() });
    }
    if let Some((node, &value)) = k.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
        return Err(Error::NonPositiveCoefficient { node, value: value.as_f64() });
    }
    let third = T::one() / T::lit(3.0);
    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.nodes[i]);
        let area = mesh.triangle_area(t);
        let ke = (k[t[0]] + k[t[1]] + k[t[2]]) * third;
        let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
        let scale = ke / (T::lit(4.0) * area);
        for i in 0..3 {
            for j in 0..3 {
                trip.push((t[i], t[j], scale * (b[i] * b[j] + c[i] * c[j])));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.len(), trip))
}

/// Assembles `−∇·(k∇u) = f` in Ω, `u = g` on ∂Ω. The load is lumped
/// (`f_i w_i`); Dirichlet rows become identity rows and their known columns
/// are moved to the right-hand side, which keeps the matrix symmetric.
/// `g` lists values in the order of `mesh.boundary_nodes`.
pub fn assemble_poisson<T: Real>(mesh: &TriMesh<T>, k: &[T], f: &[T], g: &[T]) -> Result<SparseSystem<T>> {
    if f.len() != mesh.len() {
        return Err(Error::DimensionMismatch { expected: mesh.len(), got: f.len() });
    }
    if g.len() != mesh.boundary_nodes.len() {
        return Err(Error::DimensionMismatch { expected: mesh.boundary_nodes.len(), got: g.len() });
    }
    let a = assemble_stiffness(mesh, k)?;
    let mask = mesh.boundary_mask();
    let mut known = vec![T::zero(); mesh.len()];
    for (&b, &v) in mesh.boundary_nodes.iter().zip(g) {
        known[b] = v;
    }
    let mut rhs: Vec<T> = f.iter().zip(&mesh.node_weights).map(|(&fi, &wi)| fi * wi).collect();
    let mut trip = Vec::with_capacity(a.nnz());
    for i in 0..mesh.len() {
        if mask[i] {
            trip.push((i, i, T::one()));
            rhs[i] = known[i];
            continue;
        }
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if mask[j] {
                rhs[i] -= v * known[j];
            } else {
                trip.push((i, j, v));
            }
        }
    }
    Ok(SparseSystem { matrix: CsrMatrix::from_triplets(mesh.len(), trip), rhs, dirichlet_mask: mask })
}
