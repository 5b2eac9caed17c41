//! Hodge Laplacians of closed triangulated surfaces in discrete exterior
//! calculus.
//!
//! With incidence matrices `d0` (edges × vertices) and `d1` (faces × edges) and
//! diagonal Hodge stars, the weak-form Laplacians are
//!
//! ```text
//! K0 = d0ᵀ ⋆1 d0                                  mass ⋆0
//! K1 = ⋆1 d0 ⋆0⁻¹ d0ᵀ ⋆1  +  d1ᵀ ⋆2 d1            mass ⋆1
//! K2 = ⋆2 d1 ⋆1⁻¹ d1ᵀ ⋆2                          mass ⋆2
//! ```
//!
//! Because `d1 d0 = 0`, `d0` maps 0-form eigenvectors to exact 1-form
//! eigenvectors with the same eigenvalue, and `⋆1⁻¹ d1ᵀ ⋆2` maps 2-form
//! eigenvectors to co-exact ones.

pub mod eigen;
pub mod sparse;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::multi_index::binomial;
use crate::mesh::{MeshComplex, MeshStats};
pub use eigen::{smallest_eigenpairs, EigenOptions, EigenPairs, SolverKind};
pub use sparse::{CsrMatrix, EnvelopeLdlt};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("{star} weight of {simplex_kind} {index} {vertices:?} is {value:e}, not positive")]
    NonPositiveWeight {
        star: &'static str,
        simplex_kind: &'static str,
        index: usize,
        vertices: Vec<usize>,
        value: f64,
    },
    #[error("expected a closed surface mesh")]
    NotASurface,
    #[error("eigensolver did not converge with a basis of {basis}; residuals {residuals:?}")]
    NotConverged { basis: usize, residuals: Vec<f64> },
    #[error("factorization hit non-positive pivot {value:e} at row {pivot}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("degree must satisfy 1 <= p <= n, got p={p}, n={n}")]
    BadDegree { p: usize, n: usize },
    #[error("{0}")]
    BadRequest(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SpectrumError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Raise non-positive weights to `1e-10` of the local scale.
    #[default]
    Clamp,
    /// Reject non-positive weights.
    Strict,
}

/// Relative floor used when clamping non-positive star weights.
pub const CLAMP_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DecOperators {
    pub d0: CsrMatrix,
    pub d1: CsrMatrix,
    pub star0: Vec<f64>,
    pub star1: Vec<f64>,
    pub star2: Vec<f64>,
    /// `(star, simplex index)` of every weight raised by clamping.
    pub clamped: Vec<(usize, usize)>,
}

impl DecOperators {
    pub fn k0(&self) -> CsrMatrix {
        self.d0.transpose().matmul(&self.d0.scale(Some(&self.star1), None))
    }

    /// Co-differential part of the 1-form operator, `⋆1 d0 ⋆0⁻¹ d0ᵀ ⋆1`.
    pub fn k1_down(&self) -> CsrMatrix {
        let inv0: Vec<f64> = self.star0.iter().map(|w| 1.0 / w).collect();
        let left = self.d0.scale(Some(&self.star1), Some(&inv0));
        left.matmul(&self.d0.transpose().scale(None, Some(&self.star1)))
    }

    /// Differential part of the 1-form operator, `d1ᵀ ⋆2 d1`.
    pub fn k1_up(&self) -> CsrMatrix {
        self.d1.transpose().matmul(&self.d1.scale(Some(&self.star2), None))
    }

    pub fn k1(&self) -> CsrMatrix {
        self.k1_down().add_scaled(1.0, &self.k1_up())
    }

    pub fn k2(&self) -> CsrMatrix {
        let inv1: Vec<f64> = self.star1.iter().map(|w| 1.0 / w).collect();
        let left = self.d1.scale(Some(&self.star2), Some(&inv1));
        left.matmul(&self.d1.transpose().scale(None, Some(&self.star2)))
    }

    pub fn operator(&self, degree: usize) -> (CsrMatrix, Vec<f64>) {
        match degree {
            0 => (self.k0(), self.star0.clone()),
            1 => (self.k1(), self.star1.clone()),
            _ => (self.k2(), self.star2.clone()),
        }
    }

    pub fn primal_area(&self) -> f64 {
        self.star2.iter().map(|w| 1.0 / w).sum()
    }

    pub fn dual_area(&self) -> f64 {
        self.star0.iter().sum()
    }
}

/// Per-triangle cotangents at the three corners.
fn corner_cotangents(p: [nalgebra::Vector3<f64>; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3] - p[i];
        let b = p[(i + 2) % 3] - p[i];
        out[i] = a.dot(&b) / a.cross(&b).norm();
    }
    out
}

/// Assembles incidence matrices and circumcentric Hodge stars.
pub fn assemble_dec(mesh: &MeshComplex, mode: WeightMode) -> Result<DecOperators> {
    if !mesh.is_surface() {
        return Err(SpectrumError::NotASurface);
    }
    let verts = mesh.vertices();
    let edges = mesh.edges();
    let tris = mesh.triangles();
    let edge_index = |a: usize, b: usize| -> (usize, f64) {
        let key = [a.min(b), a.max(b)];
        let i = edges.binary_search(&key).expect("triangle edge missing from edge table");
        (i, if a < b { 1.0 } else { -1.0 })
    };

    let mut d0t = Vec::with_capacity(2 * edges.len());
    for (e, &[a, b]) in edges.iter().enumerate() {
        d0t.push((e, a, -1.0));
        d0t.push((e, b, 1.0));
    }
    let d0 = CsrMatrix::from_triplets(edges.len(), verts.len(), &d0t);

    // per-face contributions are independent; accumulate afterwards
    let local: Vec<_> = tris
        .par_iter()
        .map(|t| {
            let p = t.map(|i| verts[i]);
            let cot = corner_cotangents(p);
            let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
            // edge opposite corner i joins corners i+1 and i+2
            let mut star1 = [(0usize, 0.0f64); 3];
            let mut d1 = [(0usize, 0.0f64); 3];
            let mut star0 = [0.0; 3];
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                star1[i] = (edge_index(t[j], t[k]).0, 0.5 * cot[i]);
                d1[i] = edge_index(t[i], t[j]);
                let lij = (p[j] - p[i]).norm_squared();
                let lik = (p[k] - p[i]).norm_squared();
                star0[i] = (lij * cot[k] + lik * cot[j]) / 8.0;
            }
            (area, star0, star1, d1)
        })
        .collect();

    let mut star0 = vec![0.0; verts.len()];
    let mut star1 = vec![0.0; edges.len()];
    let mut star2 = Vec::with_capacity(tris.len());
    let mut d1t = Vec::with_capacity(3 * tris.len());
    let mut vertex_scale = vec![0.0f64; verts.len()];
    for (f, (t, (area, s0, s1, d1))) in tris.iter().zip(&local).enumerate() {
        star2.push(1.0 / area);
        for i in 0..3 {
            star0[t[i]] += s0[i];
            vertex_scale[t[i]] = vertex_scale[t[i]].max(*area);
            star1[s1[i].0] += s1[i].1;
            d1t.push((f, d1[i].0, d1[i].1));
        }
    }
    let d1 = CsrMatrix::from_triplets(tris.len(), edges.len(), &d1t);

    let mut clamped = Vec::new();
    for (i, w) in star0.iter_mut().enumerate() {
        if *w <= 0.0 {
            if mode == WeightMode::Strict {
                return Err(SpectrumError::NonPositiveWeight {
                    star: "star0",
                    simplex_kind: "vertex",
                    index: i,
                    vertices: vec![i],
                    value: *w,
                });
            }
            *w = CLAMP_FLOOR * vertex_scale[i];
            clamped.push((0, i));
        }
    }
    for (e, w) in star1.iter_mut().enumerate() {
        if *w <= 0.0 {
            if mode == WeightMode::Strict {
                return Err(SpectrumError::NonPositiveWeight {
                    star: "star1",
                    simplex_kind: "edge",
                    index: e,
                    vertices: edges[e].to_vec(),
                    value: *w,
                });
            }
            // cotangent weights are dimensionless
            *w = CLAMP_FLOOR;
            clamped.push((1, e));
        }
    }
    Ok(DecOperators {
        d0,
        d1,
        star0,
        star1,
        star2,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Exact,
    Coexact,
    Harmonic,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Exact => "exact",
            Family::Coexact => "coexact",
            Family::Harmonic => "harmonic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Number of eigenvalues reported.
    pub k: usize,
    /// Neighbouring eigenvalues closer than this fraction share a cluster.
    pub cluster_rel_gap: f64,
    pub weights: WeightMode,
    pub eigen: EigenOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            k: 10,
            cluster_rel_gap: 1e-3,
            weights: WeightMode::Clamp,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub degree: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub families: Vec<Family>,
    /// Index into `clusters` for each eigenvalue.
    pub cluster_ids: Vec<usize>,
    pub clusters: Vec<Cluster>,
    pub cluster_rel_gap: f64,
    /// Eigenvalues below this are treated as zero.
    pub zero_tol: f64,
    pub residuals: Vec<f64>,
    pub solver: SolverKind,
    pub clamped_weights: usize,
    pub mesh: MeshStats,
}

impl SpectrumReport {
    /// Smallest eigenvalue of the given family among those computed.
    pub fn lowest(&self, family: Family) -> Option<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.families)
            .find(|(_, f)| **f == family)
            .map(|(v, _)| *v)
    }

    pub fn values_of(&self, family: Family) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.families)
            .filter(|(_, f)| **f == family)
            .map(|(v, _)| *v)
            .collect()
    }

    pub fn count(&self, family: Family) -> usize {
        self.families.iter().filter(|f| **f == family).count()
    }

    /// Smallest nonzero eigenvalue and its cluster multiplicity.
    pub fn first_positive_cluster(&self) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.value > self.zero_tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per eigenvalue: `index,value,family,cluster`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| SpectrumError::Io(e.to_string());
        w.write_record(["index", "value", "family", "cluster"]).map_err(err)?;
        for (i, ((v, f), c)) in self.eigenvalues.iter().zip(&self.families).zip(&self.cluster_ids).enumerate() {
            w.write_record([i.to_string(), format!("{v:.17e}"), f.as_str().to_string(), c.to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| SpectrumError::Io(e.to_string()))
    }
}

/// Groups ascending values: a new cluster starts when the gap to the previous
/// value exceeds `rel_gap` times its magnitude and `zero_tol`.
pub fn cluster_values(values: &[f64], rel_gap: f64, zero_tol: f64) -> (Vec<Cluster>, Vec<usize>) {
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut ids = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let joins = i > 0 && {
            let prev = values[i - 1];
            let gap = v - prev;
            gap <= zero_tol || gap <= rel_gap * v.abs().max(prev.abs())
        };
        if !joins {
            clusters.push((0.0, 0));
        }
        let last = clusters.last_mut().unwrap();
        last.0 += v;
        last.1 += 1;
        ids.push(clusters.len() - 1);
    }
    let clusters = clusters
        .into_iter()
        .map(|(sum, m)| Cluster {
            value: sum / m as f64,
            multiplicity: m,
        })
        .collect();
    (clusters, ids)
}

/// Absolute threshold below which an eigenvalue counts as zero.
fn zero_threshold(k_mat: &CsrMatrix, m_diag: &[f64]) -> f64 {
    let scale = k_mat
        .diag()
        .iter()
        .zip(m_diag)
        .map(|(a, m)| a / m)
        .fold(0.0, f64::max);
    1e-8 * scale.max(f64::MIN_POSITIVE)
}

/// Extra eigenpairs computed beyond `k` so the last reported cluster is
/// usually complete before it is classified.
const CLUSTER_MARGIN: usize = 6;

fn report(
    mesh: &MeshComplex,
    dec: &DecOperators,
    degree: usize,
    values: Vec<f64>,
    families: Vec<Family>,
    residuals: Vec<f64>,
    solver: SolverKind,
    zero_tol: f64,
    opts: &SpectrumOptions,
) -> SpectrumReport {
    let k = opts.k.min(values.len());
    let mut pairs: Vec<(f64, Family, f64)> = values
        .into_iter()
        .zip(families)
        .zip(residuals.into_iter().chain(std::iter::repeat(f64::NAN)))
        .map(|((v, f), r)| (v, f, r))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(k);
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let families = pairs.iter().map(|p| p.1).collect();
    let residuals = pairs.iter().map(|p| p.2).filter(|r| !r.is_nan()).collect();
    let (clusters, cluster_ids) = cluster_values(&eigenvalues, opts.cluster_rel_gap, zero_tol);
    SpectrumReport {
        degree,
        eigenvalues,
        families,
        cluster_ids,
        clusters,
        cluster_rel_gap: opts.cluster_rel_gap,
        zero_tol,
        residuals,
        solver,
        clamped_weights: dec.clamped.len(),
        mesh: mesh.stats(),
    }
}

/// Lowest eigenvalues of the Laplacian on functions.
pub fn spectrum_functions(mesh: &MeshComplex, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let dec = assemble_dec(mesh, opts.weights)?;
    let (k0, m0) = dec.operator(0);
    let zero_tol = zero_threshold(&k0, &m0);
    let pairs = smallest_eigenpairs(&k0, &m0, opts.k.min(m0.len()), false, &opts.eigen)?;
    let families = pairs
        .values
        .iter()
        .map(|&v| if v.abs() <= zero_tol { Family::Harmonic } else { Family::Coexact })
        .collect();
    Ok(report(mesh, &dec, 0, pairs.values, families, pairs.residuals, pairs.solver, zero_tol, opts))
}

/// Lowest eigenvalues on 2-forms; nonzero ones are exact.
pub fn spectrum_two_forms(mesh: &MeshComplex, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let dec = assemble_dec(mesh, opts.weights)?;
    let (k2, m2) = dec.operator(2);
    let zero_tol = zero_threshold(&k2, &m2);
    let pairs = smallest_eigenpairs(&k2, &m2, opts.k.min(m2.len()), false, &opts.eigen)?;
    let families = pairs
        .values
        .iter()
        .map(|&v| if v.abs() <= zero_tol { Family::Harmonic } else { Family::Exact })
        .collect();
    Ok(report(mesh, &dec, 2, pairs.values, families, pairs.residuals, pairs.solver, zero_tol, opts))
}

/// Lowest eigenvalues on 1-forms, each tagged exact, co-exact or harmonic.
///
/// Inside each eigenvalue cluster the `M`-orthonormal eigenvectors are rotated
/// to diagonalize the co-differential energy `‖δω‖²`; directions carrying the
/// cluster's full energy there are exact, the rest co-exact. Each part is then
/// re-solved by Rayleigh–Ritz so mixed clusters yield clean values.
pub fn spectrum_one_forms(mesh: &MeshComplex, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let dec = assemble_dec(mesh, opts.weights)?;
    let (k1, m1) = dec.operator(1);
    let down = dec.k1_down();
    let zero_tol = zero_threshold(&k1, &m1);
    let wanted = (opts.k + CLUSTER_MARGIN).min(m1.len());
    let pairs = smallest_eigenpairs(&k1, &m1, wanted, true, &opts.eigen)?;
    let vectors = pairs.vectors.as_ref().expect("vectors requested");
    let (clusters, ids) = cluster_values(&pairs.values, opts.cluster_rel_gap, zero_tol);

    let mut values = Vec::with_capacity(pairs.values.len());
    let mut families = Vec::with_capacity(pairs.values.len());
    for (c, cluster) in clusters.iter().enumerate() {
        let cols: Vec<usize> = (0..ids.len()).filter(|&i| ids[i] == c).collect();
        if cluster.value.abs() <= zero_tol {
            for &i in &cols {
                values.push(pairs.values[i]);
                families.push(Family::Harmonic);
            }
            continue;
        }
        let q = DMatrix::from_fn(vectors.nrows(), cols.len(), |r, j| vectors[(r, cols[j])]);
        let energy = gram(&down, &q);
        let split = energy.symmetric_eigen();
        for (part, family) in [(true, Family::Exact), (false, Family::Coexact)] {
            let dirs: Vec<usize> = (0..cols.len())
                .filter(|&j| (split.eigenvalues[j] > 0.5 * cluster.value) == part)
                .collect();
            if dirs.is_empty() {
                continue;
            }
            let basis = &q * DMatrix::from_fn(cols.len(), dirs.len(), |r, j| split.eigenvectors[(r, dirs[j])]);
            let proj = gram(&k1, &basis);
            for v in proj.symmetric_eigenvalues().iter() {
                values.push(*v);
                families.push(family);
            }
        }
    }
    Ok(report(mesh, &dec, 1, values, families, pairs.residuals, pairs.solver, zero_tol, opts))
}

/// `Qᵀ A Q`, symmetrized.
fn gram(a: &CsrMatrix, q: &DMatrix<f64>) -> DMatrix<f64> {
    let aq = DMatrix::from_columns(
        &(0..q.ncols())
            .map(|j| a.mul_dvec(&DVector::from_column_slice(q.column(j).as_slice())))
            .collect::<Vec<_>>(),
    );
    let g = q.transpose() * aq;
    (&g + g.transpose()) * 0.5
}

/// First eigenvalue of the Hodge Laplacian on exact `p`-forms of the unit
/// sphere `Sⁿ`, with its multiplicity.
pub fn sphere_hodge_oracle(n: usize, p: usize) -> Result<(f64, usize)> {
    if p == 0 || p > n {
        return Err(SpectrumError::BadDegree { p, n });
    }
    Ok(((p * (n - p + 1)) as f64, binomial(n + 1, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{disjoint_union, generate_icosphere, generate_torus, Vec3};

    #[test]
    fn incidence_and_areas() {
        let mesh = generate_icosphere(0, 1.0);
        let dec = assemble_dec(&mesh, WeightMode::Strict).unwrap();
        assert_eq!((dec.d0.nrows(), dec.d0.ncols()), (30, 12));
        assert_eq!((dec.d1.nrows(), dec.d1.ncols()), (20, 30));
        for m in [generate_icosphere(2, 1.0), generate_torus(2.0, 0.7, 12, 8)] {
            let dec = assemble_dec(&m, WeightMode::Clamp).unwrap();
            assert_eq!(dec.d1.matmul(&dec.d0).nnz(), 0);
            assert!((dec.dual_area() - dec.primal_area()).abs() < 1e-10 * dec.primal_area());
            assert!((dec.primal_area() - m.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn strict_mode_names_the_offending_edge() {
        // a flat square with a very obtuse triangle pair makes a negative cotan weight
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.5, 0.05, 0.0),
            Vec3::new(0.5, -0.05, 0.0),
            Vec3::new(0.5, 0.0, 1.0),
        ];
        // double pyramid over the thin quad 0-3-1-2, apexes 4 and the quad itself
        let faces = vec![[0, 3, 1], [0, 1, 2], [0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4]];
        let mesh = MeshComplex::surface(v, faces).unwrap();
        let err = assemble_dec(&mesh, WeightMode::Strict).unwrap_err();
        match err {
            SpectrumError::NonPositiveWeight { star, .. } => assert!(star == "star1" || star == "star0"),
            other => panic!("unexpected {other:?}"),
        }
        let dec = assemble_dec(&mesh, WeightMode::Clamp).unwrap();
        assert!(!dec.clamped.is_empty());
        assert!(dec.star1.iter().all(|&w| w > 0.0) && dec.star0.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn clustering() {
        let (c, ids) = cluster_values(&[0.0, 1e-14, 2.0, 2.0005, 2.1], 1e-3, 1e-9);
        assert_eq!(ids, vec![0, 0, 1, 1, 2]);
        assert_eq!(c[1].multiplicity, 2);
    }

    #[test]
    fn oracle_values() {
        assert_eq!(sphere_hodge_oracle(2, 1).unwrap(), (2.0, 3));
        assert_eq!(sphere_hodge_oracle(3, 2).unwrap(), (4.0, 6));
        for p in 1..6 {
            assert_eq!(sphere_hodge_oracle(2 * p - 1, p).unwrap(), ((p * p) as f64, binomial(2 * p, p)));
        }
        assert!(sphere_hodge_oracle(2, 3).is_err());
    }

    #[test]
    fn sphere_function_spectrum() {
        let mesh = generate_icosphere(2, 1.0);
        let rep = spectrum_functions(&mesh, &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.clusters[0].multiplicity, 1);
        assert!(rep.eigenvalues[0].abs() < 1e-10);
        let first = rep.first_positive_cluster().unwrap();
        assert_eq!(first.multiplicity, 3);
        assert!((first.value - 2.0).abs() < 0.05, "{}", first.value);
        // scaling by r multiplies eigenvalues by r⁻²
        let big = spectrum_functions(&generate_icosphere(2, 2.0), &SpectrumOptions::default()).unwrap();
        assert!((big.eigenvalues[1] * 4.0 - rep.eigenvalues[1]).abs() < 1e-10);
    }

    #[test]
    fn refinement_shrinks_sphere_error() {
        // second nonzero cluster on the unit sphere is 6 with multiplicity 5
        let mut prev = f64::INFINITY;
        for s in 1..=3 {
            let rep = spectrum_functions(&generate_icosphere(s, 1.0), &SpectrumOptions::default()).unwrap();
            let second = rep.clusters.iter().filter(|c| c.value > rep.zero_tol).nth(1).unwrap();
            assert_eq!(second.multiplicity, 5);
            let err = (second.value - 6.0).abs();
            assert!(err < prev / 3.0, "s={s}: error {err} after {prev}");
            prev = err;
        }
    }

    #[test]
    fn two_spheres_have_two_constants() {
        let a = generate_icosphere(1, 1.0);
        let b = a.translated(Vec3::new(4.0, 0.0, 0.0));
        let mesh = disjoint_union(&[a, b]).unwrap();
        let rep = spectrum_functions(&mesh, &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.clusters[0].multiplicity, 2);
        assert_eq!(rep.count(Family::Harmonic), 2);
    }

    #[test]
    fn one_form_families_on_sphere() {
        let mesh = generate_icosphere(2, 1.0);
        let opts = SpectrumOptions {
            k: 12,
            ..Default::default()
        };
        let f = spectrum_functions(&mesh, &opts).unwrap();
        let one = spectrum_one_forms(&mesh, &opts).unwrap();
        assert_eq!(one.count(Family::Harmonic), 0);
        let exact = one.values_of(Family::Exact);
        let nonzero: Vec<f64> = f.eigenvalues.iter().copied().filter(|v| *v > f.zero_tol).collect();
        for (a, b) in exact.iter().zip(&nonzero) {
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
        }
        let two = spectrum_two_forms(&mesh, &opts).unwrap();
        let coexact = one.values_of(Family::Coexact);
        let two_exact = two.values_of(Family::Exact);
        for (a, b) in coexact.iter().zip(&two_exact) {
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
        }
        assert_eq!(two.count(Family::Harmonic), 1);
    }

    #[test]
    fn torus_has_two_harmonic_one_forms() {
        let mesh = generate_torus(2.0, 0.8, 24, 12);
        let opts = SpectrumOptions {
            k: 6,
            ..Default::default()
        };
        let rep = spectrum_one_forms(&mesh, &opts).unwrap();
        assert_eq!(rep.count(Family::Harmonic), 2);
        assert!(rep.eigenvalues.iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn report_csv_rows() {
        let mesh = generate_icosphere(1, 1.0);
        let rep = spectrum_functions(&mesh, &SpectrumOptions { k: 4, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(1).unwrap().ends_with(",harmonic,0"));
        let back: SpectrumReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back.eigenvalues, rep.eigenvalues);
    }
}
