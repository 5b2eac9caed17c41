//! Per-vertex shape operators from osculating quadrics.
//!
//! Around each vertex the two-ring is expressed in a tangent frame `(t1, t2)`
//! with height `z` measured along the inner normal, and
//! `z = ½(a x² + 2b xy + c y²) + d x + e y` is fitted by least squares. The
//! linear part tilts the normal; after one refit in the corrected frame the
//! Hessian `[[a, b], [b, c]]` is the shape matrix.

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;

use super::{MeshComplex, MeshError, Result, Vec3};
use crate::curvature::ShapeData;
use crate::exterior::tangent_frame;

/// Smallest singular value, relative to the largest, accepted in the fit.
const CONDITION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadricFit {
    /// Inner unit normal.
    pub normal: Vec3,
    /// Tangent frame with `(t1, t2, normal)` positively oriented.
    pub frame: [Vec3; 2],
    pub shape: ShapeData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteShape {
    pub normals: Vec<Vec3>,
    pub frames: Vec<[Vec3; 2]>,
    pub shapes: Vec<ShapeData>,
    /// Barycentric area: a third of each incident triangle.
    pub area_weights: Vec<f64>,
}

impl DiscreteShape {
    pub fn shape_matrices(&self) -> Vec<Matrix2<f64>> {
        self.shapes
            .iter()
            .map(|s| Matrix2::from_fn(|i, j| s.shape_matrix[(i, j)]))
            .collect()
    }

    pub fn mean_curvatures(&self) -> Vec<f64> {
        self.shapes.iter().map(|s| s.mean).collect()
    }
}

fn frame_for(normal: &Vec3) -> [Vec3; 2] {
    let f = tangent_frame(normal.as_slice()).expect("normal is unit");
    [Vec3::from_column_slice(&f[0]), Vec3::from_column_slice(&f[1])]
}

fn solve_quadric(
    vertex: usize,
    origin: &Vec3,
    normal: &Vec3,
    frame: &[Vec3; 2],
    points: &[Vec3],
) -> Result<[f64; 5]> {
    if points.len() < 5 {
        return Err(MeshError::DegenerateNeighborhood { vertex });
    }
    // rescale by the neighbourhood size so the normal equations stay balanced
    let scale = points.iter().map(|q| (q - origin).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(MeshError::DegenerateNeighborhood { vertex });
    }
    let rows = points.len();
    let mut a = DMatrix::zeros(rows, 5);
    let mut z = DVector::zeros(rows);
    for (r, q) in points.iter().enumerate() {
        let d = (q - origin) / scale;
        let (x, y) = (d.dot(&frame[0]), d.dot(&frame[1]));
        a[(r, 0)] = 0.5 * x * x;
        a[(r, 1)] = x * y;
        a[(r, 2)] = 0.5 * y * y;
        a[(r, 3)] = x;
        a[(r, 4)] = y;
        z[r] = d.dot(normal);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= CONDITION_FLOOR * smax {
        return Err(MeshError::DegenerateNeighborhood { vertex });
    }
    let sol = svd
        .solve(&z, 0.0)
        .map_err(|_| MeshError::DegenerateNeighborhood { vertex })?;
    // undo the scaling: second-order terms carry 1/scale, linear terms none
    Ok([sol[0] / scale, sol[1] / scale, sol[2] / scale, sol[3], sol[4]])
}

/// Fits an osculating quadric to `neighbors` around `origin`, starting from an
/// approximate inner normal.
pub fn fit_osculating_quadric(
    vertex: usize,
    origin: &Vec3,
    normal_guess: &Vec3,
    neighbors: &[Vec3],
) -> Result<QuadricFit> {
    let mut normal = normal_guess.normalize();
    let mut frame = frame_for(&normal);
    let mut coeffs = solve_quadric(vertex, origin, &normal, &frame, neighbors)?;
    for _ in 0..2 {
        let tilted = normal - frame[0] * coeffs[3] - frame[1] * coeffs[4];
        normal = tilted.normalize();
        frame = frame_for(&normal);
        coeffs = solve_quadric(vertex, origin, &normal, &frame, neighbors)?;
    }
    // residual slope after refitting is tiny; still divide by the graph's
    // normal length so the Hessian is a shape operator rather than a height
    // Hessian
    let w = (1.0 + coeffs[3] * coeffs[3] + coeffs[4] * coeffs[4]).sqrt();
    let m = DMatrix::from_row_slice(2, 2, &[coeffs[0], coeffs[1], coeffs[1], coeffs[2]]) / w;
    let shape = ShapeData::from_matrix(&m).map_err(|_| MeshError::DegenerateNeighborhood { vertex })?;
    Ok(QuadricFit { normal, frame, shape })
}

fn two_rings(mesh: &MeshComplex) -> Vec<Vec<usize>> {
    let one = mesh.vertex_neighbors();
    (0..one.len())
        .map(|v| {
            let mut ring: Vec<usize> = one[v].iter().flat_map(|&u| one[u].iter().copied().chain([u])).collect();
            ring.sort_unstable();
            ring.dedup();
            ring.retain(|&u| u != v);
            ring
        })
        .collect()
}

/// Shape operators at every vertex of a closed surface.
pub fn discrete_shape(mesh: &MeshComplex) -> Result<DiscreteShape> {
    if !mesh.is_surface() {
        return Err(MeshError::WrongKind { expected: "surface" });
    }
    let verts = mesh.vertices();
    let mut outward = vec![Vec3::zeros(); verts.len()];
    let mut area_weights = vec![0.0; verts.len()];
    for t in mesh.triangles() {
        let [a, b, c] = t.map(|i| verts[i]);
        let n = (b - a).cross(&(c - a));
        for &v in t {
            outward[v] += n;
            area_weights[v] += n.norm() / 6.0;
        }
    }
    let rings = two_rings(mesh);
    let fits: Vec<QuadricFit> = (0..verts.len())
        .into_par_iter()
        .map(|v| {
            let guess = -outward[v];
            if guess.norm() == 0.0 {
                return Err(MeshError::DegenerateNeighborhood { vertex: v });
            }
            let pts: Vec<Vec3> = rings[v].iter().map(|&u| verts[u]).collect();
            fit_osculating_quadric(v, &verts[v], &guess, &pts)
        })
        .collect::<Result<_>>()?;
    let mut out = DiscreteShape {
        normals: Vec::with_capacity(fits.len()),
        frames: Vec::with_capacity(fits.len()),
        shapes: Vec::with_capacity(fits.len()),
        area_weights,
    };
    for f in fits {
        out.normals.push(f.normal);
        out.frames.push(f.frame);
        out.shapes.push(f.shape);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::analytic::AnalyticSurface;
    use crate::mesh::{generate_ellipsoid, generate_icosphere};

    #[test]
    fn sphere_mean_curvature() {
        let mesh = generate_icosphere(4, 1.0);
        let shape = discrete_shape(&mesh).unwrap();
        let etas: Vec<f64> = shape.shapes.iter().flat_map(|s| s.principal.clone()).collect();
        let mean = etas.iter().sum::<f64>() / etas.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        for (n, v) in shape.normals.iter().zip(mesh.vertices()) {
            assert!((n.norm() - 1.0).abs() < 1e-8);
            assert!(n.dot(v) < 0.0, "normal must point inward");
        }
        let total: f64 = shape.area_weights.iter().sum();
        assert!((total - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn sphere_error_decreases_with_refinement() {
        let r = 2.0;
        let mut prev: Option<(f64, f64)> = None;
        for s in 1..=4 {
            let mesh = generate_icosphere(s, r);
            let shape = discrete_shape(&mesh).unwrap();
            let err = shape
                .shapes
                .iter()
                .flat_map(|d| d.principal.iter().map(|e| (e - 1.0 / r).abs()))
                .fold(0.0, f64::max);
            let h = mesh.mean_edge_length();
            if let Some((pe, ph)) = prev {
                let order = (pe / err).ln() / (ph / h).ln();
                assert!(order >= 1.0, "s={s}: order {order}, err {err}");
            }
            prev = Some((err, h));
        }
    }

    #[test]
    fn ellipsoid_matches_closed_form() {
        let (a, b, c) = (1.0, 1.0, 2.0);
        let mesh = generate_ellipsoid(a, b, c, 4);
        let shape = discrete_shape(&mesh).unwrap();
        let oracle = AnalyticSurface::ellipsoid(vec![a, b, c]);
        let mut worst: f64 = 0.0;
        for (v, s) in mesh.vertices().iter().zip(&shape.shapes) {
            let exact = oracle.local_geometry(v.as_slice()).unwrap();
            for (x, y) in s.principal.iter().zip(&exact.shape.principal) {
                worst = worst.max((x - y).abs());
            }
        }
        assert!(worst < 0.05, "worst principal curvature error {worst}");
        // the pole (0,0,2) has η₁ = η₂ = c/a² = 2
        let pole = mesh
            .vertices()
            .iter()
            .position(|v| (v - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-12)
            .unwrap();
        for eta in &shape.shapes[pole].principal {
            assert!((eta - 2.0).abs() < 0.02, "pole curvature {eta}");
        }
    }

    #[test]
    fn flat_patch_has_zero_curvature() {
        let pts: Vec<Vec3> = (-2..=2)
            .flat_map(|i| (-2..=2).map(move |j| Vec3::new(i as f64 * 0.1, j as f64 * 0.1, 0.0)))
            .filter(|p| p.norm() > 0.0)
            .collect();
        let fit = fit_osculating_quadric(0, &Vec3::zeros(), &Vec3::new(0.1, 0.0, 1.0), &pts).unwrap();
        for eta in &fit.shape.principal {
            assert!(eta.abs() < 1e-12);
        }
        assert!((fit.normal - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn colinear_neighbors_are_rejected() {
        let pts: Vec<Vec3> = (1..8).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let err = fit_osculating_quadric(7, &Vec3::zeros(), &Vec3::z(), &pts).unwrap_err();
        assert_eq!(err, MeshError::DegenerateNeighborhood { vertex: 7 });
    }
}
