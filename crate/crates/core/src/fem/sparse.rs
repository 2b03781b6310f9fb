//! Symmetric sparse matrices, reverse Cuthill–McKee ordering, envelope
//! Cholesky and preconditioned conjugate gradients.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Envelope size beyond which factorisation is refused.
pub const MAX_ENVELOPE: usize = 400_000_000;

/// Symmetric matrix in compressed-row form with both triangles stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSpd {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseSpd {
    /// Sums duplicate triplets. Accumulation order is the sorted order, so the
    /// result does not depend on how the triplets were produced.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= dim || j >= dim) {
            return Err(Error::Dimension(format!("entry ({i}, {j}) outside a {dim}×{dim} matrix")));
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseSpd { dim, row_ptr, cols, vals })
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `a·self + b·other` on the union pattern.
    pub fn combine(&self, a: f64, other: &SparseSpd, b: f64) -> Result<SparseSpd> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.dim {
            t.extend(self.row(i).map(|(j, v)| (i, j, a * v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, b * v)));
        }
        SparseSpd::from_triplets(self.dim, t)
    }

    pub fn dot_form(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dim).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }
}

/// Cuthill–McKee order of one component, neighbours by increasing degree.
fn cuthill_mckee(a: &SparseSpd, start: usize, seen: &mut [bool], order: &mut Vec<usize>) {
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = q.pop_front() {
        order.push(v);
        let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !seen[j]).collect();
        nbrs.sort_by_key(|&j| (degree(a, j), j));
        for j in nbrs {
            seen[j] = true;
            q.push_back(j);
        }
    }
}

fn eccentric_vertex(a: &SparseSpd, start: usize) -> (usize, usize) {
    let mut level = vec![usize::MAX; a.dim];
    level[start] = 0;
    let mut q = VecDeque::from([start]);
    let mut far = (start, 0);
    while let Some(v) = q.pop_front() {
        let l = level[v];
        if l > far.1 || (l == far.1 && degree(a, v) < degree(a, far.0)) {
            far = (v, l);
        }
        for (j, _) in a.row(v) {
            if level[j] == usize::MAX {
                level[j] = l + 1;
                q.push_back(j);
            }
        }
    }
    far
}

fn degree(a: &SparseSpd, v: usize) -> usize {
    a.row_ptr[v + 1] - a.row_ptr[v]
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSpd) -> Vec<usize> {
    let n = a.dim;
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        // Pseudo-peripheral start: hop to the farthest vertex until the eccentricity stops growing.
        let (mut v, mut ecc) = eccentric_vertex(a, s);
        for _ in 0..4 {
            let (w, e) = eccentric_vertex(a, v);
            if e <= ecc {
                break;
            }
            v = w;
            ecc = e;
        }
        cuthill_mckee(a, v, &mut seen, &mut order);
    }
    order.reverse();
    order
}

/// Cholesky factor of a permuted SPD matrix stored by rows over its envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseSpd) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &SparseSpd, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim;
        if perm.len() != n {
            return Err(Error::Dimension(format!("permutation of length {} for dimension {n}", perm.len())));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for i in 0..n {
            first[i] = a.row(perm[i]).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        if start[n] > MAX_ENVELOPE {
            return Err(Error::Resource(format!("envelope of {} entries exceeds {MAX_ENVELOPE}", start[n])));
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jj = inv[j];
                if jj <= i {
                    data[start[i] + jj - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let ri = &data[start[i] + lo - fi..start[i] + j - fi];
                let rj = &data[start[j] + lo - fj..start[j] + j - fj];
                let s: f64 = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
                let idx = start[i] + j - fi;
                if j < i {
                    data[idx] = (data[idx] - s) / data[start[j + 1] - 1];
                } else {
                    let d = data[idx] - s;
                    if !(d > 0.0) {
                        return Err(Error::IllConditioned {
                            condition: f64::INFINITY,
                            hint: format!("non-positive pivot {d:e} at row {i}; matrix not positive definite"),
                        });
                    }
                    data[idx] = d.sqrt();
                }
            }
        }
        Ok(EnvelopeCholesky { perm, first, start, data })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (l, v) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *v -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradients. Returns the solution and the
/// final relative residual.
pub fn conjugate_gradient(a: &SparseSpd, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64)> {
    let n = a.dim;
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Domain("Jacobi preconditioner needs a positive diagonal".into()));
    }
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0.0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul_vec(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if rel <= tol {
            return Ok((x, rel));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
    Err(Error::Convergence(format!("CG stopped after {max_iter} iterations at relative residual {rel:e}")))
}
