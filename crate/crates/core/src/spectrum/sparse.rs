//! Compressed-row sparse matrices and an envelope LDLᵀ factorization.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::{Result, SpectrumError};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates
    /// and dropping exact zeros.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut slots = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[slots[r]] = c;
            vals[slots[r]] = v;
            slots[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        for r in 0..nrows {
            let mut row: Vec<(usize, f64)> = (counts[r]..counts[r + 1]).map(|i| (cols[i], vals[i])).collect();
            row.sort_unstable_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = 0.0;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let t: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(values.len(), values.len(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn mul_dvec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(self.mul_vec(x.as_slice()))
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for c in touched.drain(..) {
                triplets.push((r, c, acc[c]));
            }
        }
        Self::from_triplets(self.nrows, other.ncols, &triplets)
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale(&self, left: Option<&[f64]>, right: Option<&[f64]>) -> Self {
        let mut out = self.clone();
        for r in 0..self.nrows {
            for i in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[i];
                out.values[i] *= left.map_or(1.0, |l| l[r]) * right.map_or(1.0, |s| s[c]);
            }
        }
        out
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &CsrMatrix) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(r, c, v)| (r, c, s * v)));
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest absolute row sum, an upper bound on the spectral norm of a
    /// symmetric matrix.
    pub fn inf_norm(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }
}

/// Reverse Cuthill–McKee ordering of the symmetric sparsity graph.
/// `order[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|r| a.row(r).map(|(c, _)| c).filter(|&c| c != r).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| (degree[v], v));
    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Node of (near) maximal eccentricity in the component of `seed`.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut current = seed;
    let mut ecc = 0;
    loop {
        let levels = bfs_levels(current, adj);
        let depth = *levels.iter().flatten().max().unwrap_or(&0);
        if depth <= ecc && current != seed {
            return current;
        }
        ecc = depth;
        let candidate = levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(depth))
            .map(|(v, _)| v)
            .min_by_key(|&v| (degree[v], v))
            .unwrap();
        if candidate == current {
            return current;
        }
        current = candidate;
    }
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let next = level[v].unwrap() + 1;
        for &u in &adj[v] {
            if level[u].is_none() {
                level[u] = Some(next);
                queue.push_back(u);
            }
        }
    }
    level
}

/// `LDLᵀ` of a symmetric positive definite matrix stored by rows within its
/// envelope, after a bandwidth-reducing permutation.
#[derive(Debug, Clone)]
pub struct EnvelopeLdlt {
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// First stored column of each permuted row.
    first: Vec<usize>,
    /// Offsets of each row's strictly-lower segment in `lower`.
    offsets: Vec<usize>,
    lower: Vec<f64>,
    d: Vec<f64>,
}

impl EnvelopeLdlt {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inverse = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inverse[old];
            for (c, _) in a.row(old) {
                let j = inverse[c];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; offsets[n]];
        let mut d = vec![0.0; n];
        for old in 0..n {
            let i = inverse[old];
            for (c, v) in a.row(old) {
                let j = inverse[c];
                if j == i {
                    d[i] = v;
                } else if j < i {
                    lower[offsets[i] + j - first[i]] = v;
                }
            }
        }
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let fi = first[i];
            let (before, rest) = lower.split_at_mut(offsets[i]);
            let row = &mut rest[..i - fi];
            // row[j - fi] turns into L_ij · d_j for j < i
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &before[offsets[j]..offsets[j + 1]];
                let s: f64 = (k0..j).map(|k| row[k - fi] * lj[k - fj]).sum();
                row[j - fi] -= s;
            }
            let mut pivot = d[i];
            for j in fi..i {
                let t = row[j - fi];
                let l = t / d[j];
                pivot -= t * l;
                row[j - fi] = l;
            }
            if !(pivot > 1e-14 * scale) {
                return Err(SpectrumError::NotPositiveDefinite { pivot: i, value: pivot });
            }
            d[i] = pivot;
        }
        Ok(Self {
            perm,
            first,
            offsets,
            lower,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Stored entries of the factor, a measure of fill.
    pub fn envelope_size(&self) -> usize {
        self.lower.len() + self.d.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.lower[self.offsets[i]..self.offsets[i + 1]];
            for (l, v) in row.iter().zip(&mut y[fi..i]) {
                *v -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
