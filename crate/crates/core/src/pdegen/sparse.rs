use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square sparse matrix in compressed row form with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T: Real> {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Sums duplicate `(row, col, value)` entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Self { n, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, T::one())).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `b − A x`.
    pub fn residual(&self, x: &[T], b: &[T]) -> Vec<T> {
        let ax = self.matvec(x);
        b.iter().zip(ax).map(|(&bi, ai)| bi - ai).collect()
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// A linear system with its Dirichlet row set.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem<T: Real> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub dirichlet_mask: Vec<bool>,
}

impl<T: Real> SparseSystem<T> {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// `‖b − A u‖₂ / ‖b‖₂` (absolute when `b = 0`).
    pub fn relative_residual(&self, u: &[T]) -> T {
        let r = norm2(&self.matrix.residual(u, &self.rhs));
        let b = norm2(&self.rhs);
        if b > T::zero() {
            r / b
        } else {
            r
        }
    }
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Direct,
    Cg,
}

/// Solves an SPD system. The direct path factors once with an envelope
/// Cholesky; `tol` then only bounds the reported residual check.
pub fn solve_sparse<T: Real>(sys: &SparseSystem<T>, method: SolveMethod, tol: T) -> Result<Vec<T>> {
    let u = match method {
        SolveMethod::Direct => CholeskyFactor::new(&sys.matrix)?.solve(&sys.rhs),
        SolveMethod::Cg => return conjugate_gradient(&sys.matrix, &sys.rhs, tol, 20 * sys.len() + 100),
    };
    let res = sys.relative_residual(&u);
    if !(res <= tol) {
        return Err(Error::NotConverged { iterations: 1, residual: res.as_f64() });
    }
    Ok(u)
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
pub fn conjugate_gradient<T: Real>(a: &CsrMatrix<T>, b: &[T], tol: T, max_iter: usize) -> Result<Vec<T>> {
    let n = a.n;
    let mut inv_diag = Vec::with_capacity(n);
    for (i, d) in a.diagonal().into_iter().enumerate() {
        if d == T::zero() {
            return Err(Error::ZeroDiagonal(i));
        }
        inv_diag.push(T::one() / d);
    }
    let bnorm = norm2(b);
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 0..max_iter {
        a.matvec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm2(&r) / bnorm;
        if rel <= tol {
            // guard against drift of the recursive residual
            let true_rel = norm2(&a.residual(&x, b)) / bnorm;
            if true_rel <= tol {
                return Ok(x);
            }
            r = a.residual(&x, b);
        }
        if !rel.is_finite() {
            return Err(Error::NotConverged { iterations: it + 1, residual: rel.as_f64() });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual: (norm2(&a.residual(&x, b)) / bnorm).as_f64() })
}

/// Reverse Cuthill–McKee ordering; `perm[k]` is the original index placed at `k`.
pub fn reverse_cuthill_mckee<T: Real>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_last = |start: usize, visited: &[bool]| -> usize {
        let mut seen = visited.to_vec();
        let mut q = VecDeque::from([start]);
        seen[start] = true;
        let mut last = start;
        while let Some(v) = q.pop_front() {
            last = v;
            for &w in a.row(v).0 {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        last
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: the last node reached by a BFS
        let start = bfs_last(bfs_last(seed, &visited), &visited);
        let mut q = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (variable band) Cholesky factor `P A Pᵀ = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor<T: Real> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> CholeskyFactor<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (k, &i) in perm.iter().enumerate() {
            for &j in a.row(i).0 {
                first[k] = first[k].min(inv[j]);
            }
        }
        let mut start = vec![0; n + 1];
        for k in 0..n {
            start[k + 1] = start[k] + (k - first[k] + 1);
        }
        let mut data = vec![T::zero(); start[n]];
        for (k, &i) in perm.iter().enumerate() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let c = inv[j];
                if c <= k {
                    data[start[k] + c - first[k]] = v;
                }
            }
        }
        for k in 0..n {
            let fk = first[k];
            for j in fk..k {
                let fj = first[j];
                let lo = fk.max(fj);
                let mut s = data[start[k] + j - fk];
                let rk = &data[start[k] + lo - fk..start[k] + j - fk];
                let rj = &data[start[j] + lo - fj..start[j] + j - fj];
                s -= dot(rk, rj);
                data[start[k] + j - fk] = s / data[start[j] + j - fj];
            }
            let row = &data[start[k]..start[k] + k - fk];
            let d = data[start[k] + k - fk] - dot(row, row);
            if !(d > T::zero()) {
                return Err(Error::Factorization { pivot: k, jitter: 0.0 });
            }
            data[start[k] + k - fk] = d.sqrt();
        }
        Ok(Self { perm, first, start, data })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut y: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        for k in 0..n {
            let fk = self.first[k];
            let row = &self.data[self.start[k]..self.start[k] + k - fk];
            let s = y[k] - dot(row, &y[fk..k]);
            y[k] = s / self.data[self.start[k] + k - fk];
        }
        for k in (0..n).rev() {
            let fk = self.first[k];
            y[k] /= self.data[self.start[k] + k - fk];
            let yk = y[k];
            for j in fk..k {
                y[j] -= self.data[self.start[k] + j - fk] * yk;
            }
        }
        let mut x = vec![T::zero(); n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }

    /// Stored entries of the envelope.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random sparse SPD matrix: diagonally dominant with a random pattern.
    fn random_spd(n: usize, seed: u64) -> CsrMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        let mut diag = vec![1.0; n];
        for _ in 0..3 * n {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i != j {
                let v: f64 = rng.random_range(-1.0..0.0);
                t.push((i, j, v));
                t.push((j, i, v));
                diag[i] += v.abs();
                diag[j] += v.abs();
            }
        }
        t.extend(diag.into_iter().enumerate().map(|(i, d)| (i, i, d)));
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn identity_returns_rhs() {
        let sys = SparseSystem {
            matrix: CsrMatrix::identity(5),
            rhs: vec![1.0, -2.0, 3.0, 0.5, 0.0],
            dirichlet_mask: vec![false; 5],
        };
        assert_eq!(solve_sparse(&sys, SolveMethod::Direct, 1e-12).unwrap(), sys.rhs);
        assert_eq!(solve_sparse(&sys, SolveMethod::Cg, 1e-12).unwrap(), sys.rhs);
    }

    #[test]
    fn direct_and_cg_agree() {
        let a = random_spd(300, 4);
        let b: Vec<f64> = (0..300).map(|i| (i as f64).sin()).collect();
        let sys = SparseSystem { matrix: a, rhs: b, dirichlet_mask: vec![false; 300] };
        let tol = 1e-10;
        let x1 = solve_sparse(&sys, SolveMethod::Direct, tol).unwrap();
        let x2 = solve_sparse(&sys, SolveMethod::Cg, tol).unwrap();
        let diff = norm2(&x1.iter().zip(&x2).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm2(&x1);
        assert!(diff <= 10.0 * tol, "{diff}");
        assert!(sys.relative_residual(&x1) < 1e-13);
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = random_spd(200, 5);
        let b = vec![1.0; 200];
        match conjugate_gradient(&a, &b, 1e-14, 2) {
            Err(Error::NotConverged { iterations: 2, residual }) => assert!(residual > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = random_spd(100, 6);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }
}
