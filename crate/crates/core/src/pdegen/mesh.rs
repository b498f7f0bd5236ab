use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::Deformation;
use crate::scalar::Real;

/// P1 triangulation with lumped-mass node weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh<T: Real> {
    pub nodes: Vec<[T; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Sorted indices of nodes on the boundary.
    pub boundary_nodes: Vec<usize>,
    pub node_weights: Vec<T>,
}

pub(crate) fn signed_area<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) * T::half()
}

impl<T: Real> TriMesh<T> {
    /// Builds a mesh, orienting every triangle counterclockwise and deriving
    /// boundary nodes (endpoints of edges used by a single triangle) and
    /// lumped node weights.
    pub fn new(nodes: Vec<[T; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        for (k, t) in triangles.iter_mut().enumerate() {
            if t.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::InvalidArgument(format!("triangle {k} references a missing node")));
            }
            let a = signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            if a < T::zero() {
                t.swap(1, 2);
            } else if a == T::zero() {
                return Err(Error::InvertedTriangle { triangle: k, area: 0.0 });
            }
        }
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &triangles {
            for e in 0..3 {
                let (i, j) = (t[e], t[(e + 1) % 3]);
                *edges.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
        let mut on_boundary = vec![false; nodes.len()];
        for (&(i, j), &c) in &edges {
            if c == 1 {
                on_boundary[i] = true;
                on_boundary[j] = true;
            }
        }
        let boundary_nodes = (0..nodes.len()).filter(|&i| on_boundary[i]).collect();
        let mut mesh = Self { nodes, triangles, boundary_nodes, node_weights: Vec::new() };
        mesh.node_weights = mesh.lumped_weights();
        Ok(mesh)
    }

    fn lumped_weights(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.nodes.len()];
        let third = T::one() / T::lit(3.0);
        for t in &self.triangles {
            let a = self.triangle_area(t);
            for &i in t {
                w[i] += a * third;
            }
        }
        w
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> T {
        signed_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]])
    }

    pub fn area(&self) -> T {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.nodes.len()];
        for &i in &self.boundary_nodes {
            m[i] = true;
        }
        m
    }

    pub fn max_edge(&self) -> T {
        let mut worst = T::zero();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (self.nodes[t[e]], self.nodes[t[(e + 1) % 3]]);
                worst = worst.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        worst
    }

    /// Node coordinates as `Vec<Vec<T>>`, the layout the deformation API takes.
    pub fn node_points(&self) -> Vec<Vec<T>> {
        self.nodes.iter().map(|p| p.to_vec()).collect()
    }

    /// `(Σ w_i v_i²)^{1/2}`.
    pub fn l2_norm(&self, v: &[T]) -> T {
        self.node_weights.iter().zip(v).map(|(&w, &x)| w * x * x).sum::<T>().sqrt()
    }
}

/// Triangulates concentric rings joined by a "zipper" that walks both rings
/// in angle order. `counts[k]` nodes sit on the circle of radius `radii[k]`
/// at angles `2πj/counts[k]`; with `center` a node at the origin is joined to
/// the first ring by a fan.
pub fn polar_mesh<T: Real>(radii: &[f64], counts: &[usize], center: bool) -> Result<TriMesh<T>> {
    if radii.len() != counts.len() || radii.is_empty() || counts.iter().any(|&c| c < 3) {
        return Err(Error::InvalidArgument("polar mesh needs matching radii and counts >= 3".into()));
    }
    let tau = std::f64::consts::TAU;
    let mut nodes = Vec::new();
    let mut starts = Vec::new();
    if center {
        nodes.push([T::zero(), T::zero()]);
    }
    for (&r, &c) in radii.iter().zip(counts) {
        starts.push(nodes.len());
        for j in 0..c {
            let t = tau * j as f64 / c as f64;
            if j == 0 {
                nodes.push([T::lit(r), T::zero()]);
            } else {
                nodes.push([T::lit(r * t.cos()), T::lit(r * t.sin())]);
            }
        }
    }
    let mut tris = Vec::new();
    if center {
        let c = counts[0];
        for j in 0..c {
            tris.push([0, starts[0] + j, starts[0] + (j + 1) % c]);
        }
    }
    for k in 1..radii.len() {
        let (na, nb) = (counts[k - 1], counts[k]);
        let (sa, sb) = (starts[k - 1], starts[k]);
        let (mut i, mut j) = (0usize, 0usize);
        while i < na || j < nb {
            // advance the ring whose new diagonal is shorter
            let len = |p: usize, q: usize| {
                let (a, b) = (nodes[p], nodes[q]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            };
            let adv_b = j < nb && (i == na || len(sa + i % na, sb + (j + 1) % nb) <= len(sa + (i + 1) % na, sb + j % nb));
            if adv_b {
                tris.push([sa + i % na, sb + j % nb, sb + (j + 1) % nb]);
                j += 1;
            } else {
                tris.push([sa + i % na, sb + j % nb, sa + (i + 1) % na]);
                i += 1;
            }
        }
    }
    TriMesh::new(nodes, tris)
}

/// Structured mesh of the unit disk: `n = ⌈1/h⌉` equally spaced rings with
/// `6k` nodes on ring `k`, and a centre fan.
pub fn reference_disk_mesh<T: Real>(h: f64) -> Result<TriMesh<T>> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidArgument(format!("mesh size h={h} outside (0, 0.5)")));
    }
    let n = (1.0 / h).ceil() as usize;
    let radii: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let counts: Vec<usize> = (1..=n).map(|k| 6 * k).collect();
    polar_mesh(&radii, &counts, true)
}

/// Structured mesh of the ring `0.5 ≤ r ≤ 1`.
pub fn reference_ring_mesh<T: Real>(h: f64) -> Result<TriMesh<T>> {
    if !(h > 0.0 && h < 0.25) {
        return Err(Error::InvalidArgument(format!("mesh size h={h} outside (0, 0.25)")));
    }
    let n = (0.5 / h).ceil() as usize;
    let radii: Vec<f64> = (0..=n).map(|k| 0.5 + 0.5 * k as f64 / n as f64).collect();
    let counts: Vec<usize> = radii
        .iter()
        .map(|r| ((std::f64::consts::TAU * r / (0.5 / n as f64)).round() as usize).max(6))
        .collect();
    polar_mesh(&radii, &counts, false)
}

/// Lattice mesh of a union of axis-aligned rectangles `[x0, x1, y0, y1]`
/// whose sides lie on the lattice `hℤ²`. Each lattice square inside the
/// union is split along its diagonal.
pub fn lattice_mesh<T: Real>(rects: &[[f64; 4]], h: f64) -> Result<TriMesh<T>> {
    if !(h > 0.0) || rects.is_empty() {
        return Err(Error::InvalidArgument("lattice mesh needs h > 0 and a rectangle".into()));
    }
    let snap = |v: f64| -> Result<i64> {
        let k = (v / h).round();
        if (k * h - v).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::InvalidArgument(format!("{v} is not on the lattice of step {h}")));
        }
        Ok(k as i64)
    };
    let mut boxes = Vec::new();
    for r in rects {
        boxes.push([snap(r[0])?, snap(r[1])?, snap(r[2])?, snap(r[3])?]);
    }
    let cell_inside = |i: i64, j: i64| boxes.iter().any(|b| i >= b[0] && i < b[1] && j >= b[2] && j < b[3]);
    let (x0, x1) = (boxes.iter().map(|b| b[0]).min().unwrap(), boxes.iter().map(|b| b[1]).max().unwrap());
    let (y0, y1) = (boxes.iter().map(|b| b[2]).min().unwrap(), boxes.iter().map(|b| b[3]).max().unwrap());
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut tris = Vec::new();
    let mut id = |i: i64, j: i64, nodes: &mut Vec<[T; 2]>| {
        *index.entry((i, j)).or_insert_with(|| {
            nodes.push([T::lit(i as f64 * h), T::lit(j as f64 * h)]);
            nodes.len() - 1
        })
    };
    for j in y0..y1 {
        for i in x0..x1 {
            if cell_inside(i, j) {
                let a = id(i, j, &mut nodes);
                let b = id(i + 1, j, &mut nodes);
                let c = id(i + 1, j + 1, &mut nodes);
                let d = id(i, j + 1, &mut nodes);
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
    }
    TriMesh::new(nodes, tris)
}

/// Pushes every node through the deformation (closed variant, so boundary
/// nodes are accepted). Connectivity is kept.
pub fn deform_mesh<T: Real, D: Deformation<T> + ?Sized>(reference: &TriMesh<T>, dom: &D) -> Result<TriMesh<T>> {
    let mut nodes = Vec::with_capacity(reference.nodes.len());
    for p in &reference.nodes {
        let y = dom.deform_closed(p)?;
        nodes.push([y[0], y[1]]);
    }
    let mut mesh = TriMesh {
        nodes,
        triangles: reference.triangles.clone(),
        boundary_nodes: reference.boundary_nodes.clone(),
        node_weights: Vec::new(),
    };
    for (k, t) in mesh.triangles.iter().enumerate() {
        let a = mesh.triangle_area(t);
        if !(a > T::zero()) {
            return Err(Error::InvertedTriangle { triangle: k, area: a.as_f64() });
        }
    }
    mesh.node_weights = mesh.lumped_weights();
    Ok(mesh)
}

/// Point location by a uniform bucket grid over the mesh bounding box.
#[derive(Clone, Debug)]
pub struct MeshLocator<T: Real> {
    mesh: TriMesh<T>,
    lo: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<T: Real> MeshLocator<T> {
    pub fn new(mesh: &TriMesh<T>) -> Self {
        let f = |v: T| v.as_f64();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &mesh.nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(f(p[d]));
                hi[d] = hi[d].max(f(p[d]));
            }
        }
        let n_side = ((mesh.triangles.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let cell = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / n_side as f64).max(1e-12);
        let dims = [
            ((hi[0] - lo[0]) / cell).floor() as usize + 1,
            ((hi[1] - lo[1]) / cell).floor() as usize + 1,
        ];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        for (k, t) in mesh.triangles.iter().enumerate() {
            let xs = t.map(|i| f(mesh.nodes[i][0]));
            let ys = t.map(|i| f(mesh.nodes[i][1]));
            let bx0 = ((xs.iter().cloned().fold(f64::INFINITY, f64::min) - lo[0]) / cell).floor() as usize;
            let bx1 = ((xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - lo[0]) / cell).floor() as usize;
            let by0 = ((ys.iter().cloned().fold(f64::INFINITY, f64::min) - lo[1]) / cell).floor() as usize;
            let by1 = ((ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - lo[1]) / cell).floor() as usize;
            for by in by0..=by1.min(dims[1] - 1) {
                for bx in bx0..=bx1.min(dims[0] - 1) {
                    buckets[by * dims[0] + bx].push(k);
                }
            }
        }
        Self { mesh: mesh.clone(), lo, cell, dims, buckets }
    }

    pub fn mesh(&self) -> &TriMesh<T> {
        &self.mesh
    }

    fn barycentric(&self, k: usize, p: [f64; 2]) -> [f64; 3] {
        let t = self.mesh.triangles[k];
        let v = t.map(|i| [self.mesh.nodes[i][0].as_f64(), self.mesh.nodes[i][1].as_f64()]);
        let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        let l1 = ((p[0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (p[1] - v[0][1])) / det;
        let l2 = ((v[1][0] - v[0][0]) * (p[1] - v[0][1]) - (p[0] - v[0][0]) * (v[1][1] - v[0][1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Containing triangle and barycentric coordinates. Points within `tol`
    /// (in barycentric units) of the mesh are snapped onto the closest triangle.
    pub fn locate(&self, p: &[T], tol: f64) -> Option<(usize, [f64; 3])> {
        let q = [p[0].as_f64(), p[1].as_f64()];
        let bx = ((q[0] - self.lo[0]) / self.cell).floor();
        let by = ((q[1] - self.lo[1]) / self.cell).floor();
        if bx < 0.0 || by < 0.0 || bx as usize >= self.dims[0] || by as usize >= self.dims[1] {
            return None;
        }
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &k in &self.buckets[by as usize * self.dims[0] + bx as usize] {
            let l = self.barycentric(k, q);
            let worst = l.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Some((k, l));
            }
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((k, l, worst));
            }
        }
        match best {
            Some((k, l, w)) if w >= -tol => {
                let l = l.map(|v| v.max(0.0));
                let s: f64 = l.iter().sum();
                Some((k, l.map(|v| v / s)))
            }
            _ => None,
        }
    }

    /// P1 interpolation of nodal values.
    pub fn interpolate(&self, values: &[T], p: &[T]) -> Result<T> {
        self.interpolate_with_tol(values, p, 1e-6)
    }

    /// Like [`MeshLocator::interpolate`] with a custom snapping tolerance.
    pub fn interpolate_with_tol(&self, values: &[T], p: &[T], tol: f64) -> Result<T> {
        let (k, l) = self.locate(p, tol).ok_or_else(|| Error::OutsideDomain {
            point: p.iter().map(|v| v.as_f64()).collect(),
            region: "mesh".into(),
        })?;
        let t = self.mesh.triangles[k];
        Ok((0..3).map(|i| T::lit(l[i]) * values[t[i]]).sum())
    }
}
