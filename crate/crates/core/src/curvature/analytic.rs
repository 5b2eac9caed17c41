//! Closed-form hypersurfaces: round spheres and axis-aligned ellipsoids.
//!
//! Both are level sets `F(x) = Σ (x_i - c_i)² / a_i² = 1`. With the inner unit
//! normal `N = -∇F / |∇F|`, the shape operator `S(X) = -∇_X N` has matrix
//! `t_iᵀ ∇²F t_j / |∇F|` in an orthonormal tangent frame `t`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Result, ShapeData};
use crate::exterior::tangent_frame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSurface {
    center: Vec<f64>,
    semi_axes: Vec<f64>,
}

impl AnalyticSurface {
    /// Round sphere of the given radius in `center.len()`-dimensional space.
    pub fn sphere(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0, "radius must be positive");
        let dim = center.len();
        Self {
            center,
            semi_axes: vec![radius; dim],
        }
    }

    /// Centered ellipsoid with the given semi-axes.
    pub fn ellipsoid(semi_axes: Vec<f64>) -> Self {
        assert!(semi_axes.iter().all(|&a| a > 0.0), "semi-axes must be positive");
        Self {
            center: vec![0.0; semi_axes.len()],
            semi_axes,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_round(&self) -> bool {
        self.semi_axes.windows(2).all(|w| w[0] == w[1])
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn level(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .zip(&self.semi_axes)
            .map(|((xi, ci), ai)| (xi - ci).powi(2) / (ai * ai))
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .zip(&self.semi_axes)
            .map(|((xi, ci), ai)| 2.0 * (xi - ci) / (ai * ai))
            .collect()
    }

    /// Radial projection from the center onto the surface.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let s = self.level(y).sqrt();
        y.iter()
            .zip(&self.center)
            .map(|(yi, ci)| ci + (yi - ci) / s)
            .collect()
    }

    /// Unit normal pointing into the enclosed domain.
    pub fn inner_normal(&self, x: &[f64]) -> Vec<f64> {
        let g = self.gradient(x);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        g.iter().map(|v| -v / norm).collect()
    }

    /// Shape operator in the given orthonormal tangent frame.
    pub fn shape_in_frame(&self, x: &[f64], frame: &[Vec<f64>]) -> DMatrix<f64> {
        let g = self.gradient(x);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n = frame.len();
        DMatrix::from_fn(n, n, |i, j| {
            (0..self.ambient_dim())
                .map(|k| frame[i][k] * frame[j][k] * 2.0 / (self.semi_axes[k] * self.semi_axes[k]))
                .sum::<f64>()
                / gnorm
        })
    }

    /// Normal, tangent frame and shape data at a surface point.
    pub fn local_geometry(&self, x: &[f64]) -> Result<LocalGeometry> {
        let normal = self.inner_normal(x);
        let frame = tangent_frame(&normal).expect("normal is unit by construction");
        let shape = ShapeData::from_matrix(&self.shape_in_frame(x, &frame))?;
        Ok(LocalGeometry {
            point: x.to_vec(),
            normal,
            frame,
            shape,
        })
    }

    /// Uniformly distributed directions, projected radially onto the surface.
    pub fn sample_points<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let dim = self.ambient_dim();
        (0..count)
            .map(|_| {
                let dir = random_unit_vector(dim, rng);
                let y: Vec<f64> = dir.iter().zip(&self.center).map(|(d, c)| c + d).collect();
                self.project(&y)
            })
            .collect()
    }

    /// Radius, when the surface is a round sphere.
    pub fn sphere_radius(&self) -> Option<f64> {
        self.is_round().then(|| self.semi_axes[0])
    }
}

/// Geometry of a hypersurface at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGeometry {
    pub point: Vec<f64>,
    /// Inner unit normal.
    pub normal: Vec<f64>,
    /// Orthonormal tangent frame, `(frame, normal)` positively oriented.
    pub frame: Vec<Vec<f64>>,
    pub shape: ShapeData,
}

pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    #[test]
    fn sphere_curvatures_are_inverse_radius() {
        let s = AnalyticSurface::sphere(vec![0.5, -1.0, 2.0], 2.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for x in s.sample_points(20, &mut rng) {
            let g = s.local_geometry(&x).unwrap();
            for eta in &g.shape.principal {
                assert_abs_diff_eq!(*eta, 0.5, epsilon = 1e-12);
            }
            let to_center: Vec<f64> = s.center().iter().zip(&x).map(|(c, xi)| (c - xi) / 2.0).collect();
            for (a, b) in g.normal.iter().zip(&to_center) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ellipsoid_vertex_curvatures() {
        // at (a,0,0) the principal curvatures are a/b² and a/c²
        let e = AnalyticSurface::ellipsoid(vec![1.0, 1.0, 1.2]);
        let g = e.local_geometry(&[1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g.shape.principal[0], 1.0 / 1.44, epsilon = 1e-12);
        assert_abs_diff_eq!(g.shape.principal[1], 1.0, epsilon = 1e-12);
        let pole = e.local_geometry(&[0.0, 0.0, 1.2]).unwrap();
        assert_abs_diff_eq!(pole.shape.principal[0], 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(pole.shape.principal[1], 1.2, epsilon = 1e-12);
    }

    #[test]
    fn projection_lands_on_surface() {
        let e = AnalyticSurface::ellipsoid(vec![1.0, 2.0, 0.5]);
        let x = e.project(&[0.3, -0.7, 1.1]);
        assert_abs_diff_eq!(e.level(&x), 1.0, epsilon = 1e-14);
    }
}
