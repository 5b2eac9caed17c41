//! Quadrature samples on the boundary of a solid mesh.

use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Result;
use crate::curvature::AnalyticSurface;
use crate::exterior::tangent_frame;
use crate::mesh::{discrete_shape, MeshComplex, Vec3};

/// Where boundary geometry (normal, shape operator) comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryModel {
    /// Quadrature points are projected onto a closed-form surface; weights
    /// include the Jacobian of the projection.
    Analytic { surface: AnalyticSurface },
    /// Points stay on the flat faces; normals and shape operators are
    /// interpolated from per-vertex quadric fits.
    Fitted,
    /// Flat faces with their own normals and zero shape operator. Exact for
    /// divergence-type identities on the polyhedron, useless for curvature.
    Flat,
}

impl BoundaryModel {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryModel::Analytic { .. } => "analytic",
            BoundaryModel::Fitted => "fitted",
            BoundaryModel::Flat => "flat",
        }
    }
}

/// Geometry of the boundary at one quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub point: Vec<f64>,
    /// Inner unit normal.
    pub normal: Vec<f64>,
    /// Orthonormal tangent frame with `(frame, normal)` positive.
    pub frame: Vec<Vec<f64>>,
    /// Shape operator in `frame`.
    pub shape: DMatrix<f64>,
    pub weight: f64,
}

impl SurfaceSample {
    pub fn mean_curvature_times_dim(&self) -> f64 {
        self.shape.trace()
    }

    /// `S(X)` for a tangent vector given in frame coordinates.
    pub fn shape_apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.frame.len())
            .map(|i| (0..self.frame.len()).map(|j| self.shape[(i, j)] * x[j]).sum())
            .collect()
    }
}

/// Barycentric coordinates and weights of the degree-2 triangle rule.
pub const TRIANGLE_RULE: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

/// Point and normal evaluator for the boundary, shared by the face rule and
/// the edge samples used by the discrete cross term.
pub(crate) struct BoundaryGeometry<'a> {
    vertices: &'a [Vec3],
    model: &'a BoundaryModel,
    /// Ambient shape tensors and normals per mesh vertex (fitted model).
    fitted: Option<(Vec<Vec3>, Vec<Matrix3<f64>>)>,
}

impl<'a> BoundaryGeometry<'a> {
    pub(crate) fn new(mesh: &'a MeshComplex, model: &'a BoundaryModel) -> Result<Self> {
        let fitted = match model {
            BoundaryModel::Fitted => {
                let (surface, map) = mesh.boundary_surface()?;
                let shape = discrete_shape(&surface)?;
                let mut normals = vec![Vec3::zeros(); mesh.vertices().len()];
                let mut tensors = vec![Matrix3::zeros(); mesh.vertices().len()];
                for (local, &global) in map.iter().enumerate() {
                    let [t1, t2] = shape.frames[local];
                    let s = &shape.shapes[local].shape_matrix;
                    let frame = [t1, t2];
                    let mut a = Matrix3::zeros();
                    for i in 0..2 {
                        for j in 0..2 {
                            a += frame[i] * frame[j].transpose() * s[(i, j)];
                        }
                    }
                    normals[global] = shape.normals[local];
                    tensors[global] = a;
                }
                Some((normals, tensors))
            }
            _ => None,
        };
        Ok(Self {
            vertices: mesh.vertices(),
            model,
            fitted,
        })
    }

    /// Sample at barycentric coordinates `bary` of the outward-wound face.
    /// `weight` is the flat-triangle quadrature weight before any Jacobian.
    pub(crate) fn sample(&self, face: &[usize; 3], bary: [f64; 3], weight: f64) -> SurfaceSample {
        let [a, b, c] = face.map(|i| self.vertices[i]);
        let q = a * bary[0] + b * bary[1] + c * bary[2];
        let cross = (b - a).cross(&(c - a));
        match self.model {
            BoundaryModel::Flat => {
                let n = -cross.normalize();
                sample_with(q.as_slice().to_vec(), n, Matrix3::zeros(), weight)
            }
            BoundaryModel::Fitted => {
                let (normals, tensors) = self.fitted.as_ref().expect("built for the fitted model");
                let mut n = Vec3::zeros();
                let mut t = Matrix3::zeros();
                for k in 0..3 {
                    n += normals[face[k]] * bary[k];
                    t += tensors[face[k]] * bary[k];
                }
                sample_with(q.as_slice().to_vec(), n.normalize(), t, weight)
            }
            BoundaryModel::Analytic { surface } => {
                let (y, jac) = project_with_jacobian(surface, &q, &(b - a), &(c - a));
                let geo = surface.local_geometry(&y).expect("analytic surfaces are regular");
                SurfaceSample {
                    point: geo.point,
                    normal: geo.normal,
                    frame: geo.frame,
                    shape: geo.shape.shape_matrix,
                    weight: weight * jac,
                }
            }
        }
    }
}

fn sample_with(point: Vec<f64>, normal: Vec3, tensor: Matrix3<f64>, weight: f64) -> SurfaceSample {
    let frame = tangent_frame(normal.as_slice()).expect("normal is unit");
    let shape = DMatrix::from_fn(2, 2, |i, j| {
        let ti = Vec3::from_column_slice(&frame[i]);
        let tj = Vec3::from_column_slice(&frame[j]);
        let v = ti.dot(&(tensor * tj));
        let w = tj.dot(&(tensor * ti));
        0.5 * (v + w)
    });
    SurfaceSample {
        point,
        normal: normal.as_slice().to_vec(),
        frame,
        shape,
        weight,
    }
}

/// Radial projection `P(q) = c + (q - c) F(q)^(-1/2)` of a point on a flat
/// triangle, and the area ratio of `dP` restricted to the triangle plane.
fn project_with_jacobian(surface: &AnalyticSurface, q: &Vec3, u: &Vec3, v: &Vec3) -> (Vec<f64>, f64) {
    let c = Vec3::from_column_slice(surface.center());
    let ax = surface.semi_axes();
    let r = q - c;
    let f: f64 = (0..3).map(|k| (r[k] / ax[k]).powi(2)).sum();
    let g = f.powf(-0.5);
    // ∇g = -½ F^(-3/2) ∇F
    let grad_g = Vec3::from_fn(|k, _| -0.5 * f.powf(-1.5) * 2.0 * r[k] / (ax[k] * ax[k]));
    let dp = |w: &Vec3| w * g + r * grad_g.dot(w);
    let jac = dp(u).cross(&dp(v)).norm() / u.cross(v).norm();
    let y = c + r * g;
    (y.as_slice().to_vec(), jac)
}

/// All face samples of the boundary of `mesh`, in face order.
pub fn boundary_samples(mesh: &MeshComplex, model: &BoundaryModel) -> Result<Vec<SurfaceSample>> {
    let geometry = BoundaryGeometry::new(mesh, model)?;
    let faces = mesh.boundary_faces();
    Ok(faces
        .par_iter()
        .flat_map_iter(|face| {
            let area = mesh.triangle_area(face);
            let geometry = &geometry;
            TRIANGLE_RULE
                .iter()
                .map(move |(bary, w)| geometry.sample(face, *bary, area * w))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_ball;
    use std::f64::consts::PI;

    fn total_weight(samples: &[SurfaceSample]) -> f64 {
        samples.iter().map(|s| s.weight).sum()
    }

    #[test]
    fn analytic_weights_integrate_sphere_area() {
        let sphere = AnalyticSurface::sphere(vec![0.0; 3], 1.0);
        let model = BoundaryModel::Analytic { surface: sphere };
        let mut prev = f64::INFINITY;
        for s in 0..3 {
            let samples = boundary_samples(&generate_ball(s), &model).unwrap();
            let err = (total_weight(&samples) - 4.0 * PI).abs();
            assert!(err < prev / 4.0, "level {s}: {err}");
            prev = err;
            for x in &samples {
                assert!((x.shape.clone() - DMatrix::identity(2, 2)).amax() < 1e-12);
                let radial: f64 = x.point.iter().zip(&x.normal).map(|(p, n)| p * n).sum();
                assert!((radial + 1.0).abs() < 1e-12, "normal must point inward");
            }
        }
        assert!(prev < 2e-3);
    }

    #[test]
    fn fitted_and_flat_models_agree_on_polyhedral_area() {
        let ball = generate_ball(2);
        let area = ball.boundary_surface().unwrap().0.area();
        for model in [BoundaryModel::Fitted, BoundaryModel::Flat] {
            let samples = boundary_samples(&ball, &model).unwrap();
            assert!((total_weight(&samples) - area).abs() < 1e-12);
        }
        let ball = generate_ball(3);
        let area = ball.boundary_surface().unwrap().0.area();
        let fitted = boundary_samples(&ball, &BoundaryModel::Fitted).unwrap();
        let mean: f64 = fitted.iter().map(|s| s.weight * s.mean_curvature_times_dim()).sum::<f64>() / area;
        assert!((mean - 2.0).abs() < 0.05, "mean of nH = {mean}");
    }
}
