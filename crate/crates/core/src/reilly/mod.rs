//! Term-by-term evaluation of the integrated Bochner identity for forms on
//! solid meshes:
//!
//! `∫‖dω‖² + ‖δω‖² = ∫‖∇ω‖² + ⟨W^[p]ω,ω⟩ + 2∫_Σ⟨i_Nω, δ^Σ(J*ω)⟩ + ∫_Σ B(ω,ω)`
//!
//! and its scalar version for `ω = df`,
//!
//! `∫(Δf)² = ∫‖∇²f‖² + Ric(∇f,∇f) + ∫_Σ 2 f_N Δ^Σf + ⟨S∇^Σf,∇^Σf⟩ + nH f_N²`,
//!
//! with `N` the inner normal and `Δ` the positive Laplacian.

pub mod boundary;
pub mod field;
pub mod pointwise;

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{CurvatureError, CurvatureTerm};
use crate::exterior::{AlternatingForm, ExteriorError};
use crate::mesh::{discrete_shape, MeshComplex, MeshError, Vec3};
use crate::spectrum::{assemble_dec, SpectrumError, WeightMode};
pub use boundary::{boundary_samples, BoundaryModel, SurfaceSample};
use boundary::TRIANGLE_RULE;
pub use field::{
    builtin_form, builtin_function, ClosureForm, Derivatives, FormField, Polynomial, PolynomialForm, ScalarField,
};
use field::{gradient_of, hessian_of, partials_of};
pub use pointwise::{
    check_commutation, check_derivative_formulas, check_parallel_restriction, point_terms, IdentityResiduals,
    LocalQuadric, PointTerms, SurfacePatch,
};
use pointwise::{codifferential, differential};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReillyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("field `{0}` has no closed-form derivatives and finite differences are disabled")]
    MissingDerivatives(String),
    #[error("{0}")]
    BadField(String),
    #[error("expected a solid (tetrahedral) mesh")]
    NotASolid,
    #[error("curvature term {0} cannot be evaluated on a solid")]
    UnsupportedCurvature(String),
    #[error("surface is not totally umbilic")]
    NotUmbilic,
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ReillyError>;

/// Interior quadrature rule per tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TetRule {
    Midpoint,
    /// Symmetric four-point rule, exact for quadratics.
    #[default]
    FourPoint,
}

impl TetRule {
    /// Barycentric points and weights (fractions of the volume).
    fn points(self) -> Vec<([f64; 4], f64)> {
        match self {
            TetRule::Midpoint => vec![([0.25; 4], 1.0)],
            TetRule::FourPoint => {
                let a = 0.585_410_196_624_968_5;
                let b = 0.138_196_601_125_010_5;
                (0..4)
                    .map(|k| {
                        let mut w = [b; 4];
                        w[k] = a;
                        (w, 0.25)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReillyOptions {
    pub rule: TetRule,
    pub boundary: BoundaryModel,
    /// Allow central differences (step `1e-5 · diameter`) for fields
    /// without closed-form derivatives.
    pub finite_differences: bool,
    /// `None` for flat solids.
    pub curvature: Option<CurvatureTerm>,
    /// Also evaluate the surface codifferential (or Laplacian) with DEC.
    pub dec_cross_term: bool,
}

impl Default for ReillyOptions {
    fn default() -> Self {
        Self {
            rule: TetRule::FourPoint,
            boundary: BoundaryModel::Fitted,
            finite_differences: true,
            curvature: None,
            dec_cross_term: true,
        }
    }
}

impl ReillyOptions {
    pub fn with_boundary(boundary: BoundaryModel) -> Self {
        Self {
            boundary,
            ..Self::default()
        }
    }

    fn derivatives(&self, mesh: &MeshComplex) -> Derivatives {
        if self.finite_differences {
            Derivatives::FiniteDifference {
                step: 1e-5 * mesh.diameter(),
            }
        } else {
            Derivatives::AnalyticOnly
        }
    }

    /// Scalar multiplying `∫‖ω‖²` in the curvature term.
    fn curvature_factor(&self, p: usize) -> Result<f64> {
        match self.curvature {
            None => Ok(0.0),
            Some(term @ CurvatureTerm::ConstantCurvature { .. }) => Ok(term.evaluate(3, p)?.value),
            Some(other) => Err(ReillyError::UnsupportedCurvature(format!("{other:?}"))),
        }
    }
}

/// Size of the discretization a ledger was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub vertices: usize,
    pub tets: usize,
    pub boundary_faces: usize,
    pub mean_edge_length: f64,
    pub volume: f64,
    pub boundary_area: f64,
    pub rule: TetRule,
    pub boundary_model: String,
}

impl Resolution {
    fn of(mesh: &MeshComplex, samples: &[SurfaceSample], opts: &ReillyOptions) -> Self {
        Self {
            vertices: mesh.vertices().len(),
            tets: mesh.tets().len(),
            boundary_faces: mesh.boundary_faces().len(),
            mean_edge_length: mesh.mean_edge_length(),
            volume: mesh.volume(),
            boundary_area: pairwise_sum(&samples.iter().map(|s| s.weight).collect::<Vec<_>>()),
            rule: opts.rule,
            boundary_model: opts.boundary.name().to_string(),
        }
    }
}

/// Every integral of the p-form identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReillyLedger {
    pub degree: usize,
    pub field: String,
    /// `∫‖dω‖² + ‖δω‖²`.
    pub lhs: f64,
    pub lhs_differential: f64,
    pub lhs_codifferential: f64,
    /// `∫‖∇ω‖²`.
    pub dirichlet: f64,
    /// `∫⟨W^[p]ω,ω⟩`.
    pub curvature_term: f64,
    /// `∫‖ω‖²`.
    pub mass: f64,
    /// `2∫_Σ⟨i_Nω, δ^Σ(J*ω)⟩` with the surface codifferential from the
    /// commutation rule.
    pub cross_term: f64,
    /// Same, with the surface codifferential from DEC (degrees 1 and 2).
    pub cross_term_dec: Option<f64>,
    /// `∫_Σ B(ω,ω)` written with `S^[n+1-p]` acting on `J*⋆ω`.
    pub boundary_term: f64,
    /// `∫_Σ B(ω,ω)` written with `nH‖i_Nω‖² - ⟨S^[p-1]i_Nω,i_Nω⟩`.
    pub boundary_term_alt: f64,
    /// `max |B_star - B_normal|` over the boundary samples.
    pub boundary_forms_pointwise_gap: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `|residual|` over the largest term magnitude.
    pub relative_residual: f64,
    pub residual_dec: Option<f64>,
    pub resolution: Resolution,
}

impl ReillyLedger {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes")
    }

    /// Largest of the three interior integrals that vanish for parallel forms.
    pub fn interior_max(&self) -> f64 {
        self.lhs.abs().max(self.dirichlet.abs())
    }
}

/// Every integral of the scalar identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLedger {
    pub field: String,
    /// `∫(Δf)²`.
    pub laplacian_sq: f64,
    /// `∫‖∇²f‖²`.
    pub hessian_sq: f64,
    /// `∫Ric(∇f,∇f)`.
    pub ricci_term: f64,
    /// `2∫_Σ f_N Δ^Σf` with `Δ^Σf = Δf + ∇²f(N,N) - nH f_N`.
    pub boundary_laplacian: f64,
    /// Same, with `Δ^Σ` the DEC Laplacian of the boundary surface.
    pub boundary_laplacian_dec: Option<f64>,
    /// `∫_Σ ⟨S∇^Σf, ∇^Σf⟩`.
    pub boundary_shape: f64,
    /// `∫_Σ nH f_N²`.
    pub boundary_mean: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub residual_dec: Option<f64>,
    pub resolution: Resolution,
}

impl ClassicalLedger {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes")
    }
}

/// Sum with pairwise splitting; the result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn column_sums<const K: usize>(rows: &[[f64; K]]) -> [f64; K] {
    let mut out = [0.0; K];
    let mut column = Vec::with_capacity(rows.len());
    for (k, slot) in out.iter_mut().enumerate() {
        column.clear();
        column.extend(rows.iter().map(|r| r[k]));
        *slot = pairwise_sum(&column);
    }
    out
}

fn relative(residual: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        0.0
    } else {
        residual.abs() / scale
    }
}

/// Quadrature points and weights over the tetrahedra.
fn interior_points(mesh: &MeshComplex, rule: TetRule) -> Vec<(Vec<f64>, f64)> {
    let verts = mesh.vertices();
    let pts = rule.points();
    mesh.tets()
        .par_iter()
        .flat_map_iter(|t| {
            let corners = t.map(|i| verts[i]);
            let vol = crate::mesh::signed_tet_volume(verts, t).abs();
            pts.iter()
                .map(move |(bary, w)| {
                    let q: Vec3 = (0..4).map(|k| corners[k] * bary[k]).sum();
                    (q.as_slice().to_vec(), vol * w)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn require_solid(mesh: &MeshComplex) -> Result<()> {
    if mesh.is_surface() {
        return Err(ReillyError::NotASolid);
    }
    Ok(())
}

/// Evaluates every term of the p-form identity on a solid mesh.
pub fn evaluate_reilly(mesh: &MeshComplex, field: &dyn FormField, opts: &ReillyOptions) -> Result<ReillyLedger> {
    require_solid(mesh)?;
    let p = field.degree();
    if field.dim() != 3 || !(1..=3).contains(&p) {
        return Err(ReillyError::BadField(format!(
            "need a 1-, 2- or 3-form on 3-space, got degree {p} in dimension {}",
            field.dim()
        )));
    }
    let curvature_factor = opts.curvature_factor(p)?;
    let derivatives = opts.derivatives(mesh);

    let interior: Vec<[f64; 4]> = interior_points(mesh, opts.rule)
        .par_iter()
        .map(|(x, w)| {
            let value = field.value(x);
            let partials = partials_of(field, x, derivatives)?;
            let d = differential(&partials)?.norm_squared();
            let delta = codifferential(&partials)?.norm_squared();
            let grad: f64 = partials.iter().map(AlternatingForm::norm_squared).sum();
            Ok([w * d, w * delta, w * grad, w * value.norm_squared()])
        })
        .collect::<Result<_>>()?;
    let [lhs_d, lhs_delta, dirichlet, mass] = column_sums(&interior);

    let samples = boundary_samples(mesh, &opts.boundary)?;
    let boundary: Vec<[f64; 4]> = samples
        .par_iter()
        .map(|s| {
            let partials = partials_of(field, &s.point, derivatives)?;
            let t = point_terms(s, &field.value(&s.point), &partials)?;
            let gap = (t.boundary_star - t.boundary_normal).abs();
            Ok([s.weight * t.cross, s.weight * t.boundary_star, s.weight * t.boundary_normal, gap])
        })
        .collect::<Result<_>>()?;
    let [cross, b_star, b_normal, _] = column_sums(&boundary);
    let gap = boundary.iter().fold(0.0f64, |m, r| m.max(r[3]));

    let lhs = lhs_d + lhs_delta;
    let curvature_term = curvature_factor * mass;
    let rhs = dirichlet + curvature_term + cross + b_star;
    let residual = lhs - rhs;
    let cross_dec = if opts.dec_cross_term {
        dec_cross_term(mesh, field, &opts.boundary)?
    } else {
        None
    };
    Ok(ReillyLedger {
        degree: p,
        field: field.name(),
        lhs,
        lhs_differential: lhs_d,
        lhs_codifferential: lhs_delta,
        dirichlet,
        curvature_term,
        mass,
        cross_term: cross,
        cross_term_dec: cross_dec,
        boundary_term: b_star,
        boundary_term_alt: b_normal,
        boundary_forms_pointwise_gap: gap,
        rhs,
        residual,
        relative_residual: relative(residual, &[lhs, dirichlet, curvature_term, cross, b_star]),
        residual_dec: cross_dec.map(|c| lhs - (dirichlet + curvature_term + c + b_star)),
        resolution: Resolution::of(mesh, &samples, opts),
    })
}

/// Unit inner normals at the vertices of the boundary surface.
fn vertex_normals(surface: &MeshComplex, model: &BoundaryModel) -> Result<Vec<Vec3>> {
    Ok(match model {
        BoundaryModel::Analytic { surface: s } => surface
            .vertices()
            .iter()
            .map(|v| Vec3::from_column_slice(&s.inner_normal(&s.project(v.as_slice()))))
            .collect(),
        BoundaryModel::Fitted => discrete_shape(surface)?.normals,
        BoundaryModel::Flat => {
            let verts = surface.vertices();
            let mut n = vec![Vec3::zeros(); verts.len()];
            for t in surface.triangles() {
                let [a, b, c] = t.map(|i| verts[i]);
                let w = (b - a).cross(&(c - a));
                for &v in t {
                    n[v] -= w;
                }
            }
            n.into_iter().map(|v| v.normalize()).collect()
        }
    })
}

/// Simpson samples on a segment: `(parameter, weight)`.
const SIMPSON: [(f64, f64); 3] = [(0.0, 1.0 / 6.0), (0.5, 4.0 / 6.0), (1.0, 1.0 / 6.0)];

/// Cross term with `δ^Σ` from DEC on the boundary surface. Degree 1 pairs
/// vertex values; degree 2 pairs edge integrals. Other degrees give `None`.
fn dec_cross_term(mesh: &MeshComplex, field: &dyn FormField, model: &BoundaryModel) -> Result<Option<f64>> {
    let p = field.degree();
    if p != 1 && p != 2 {
        return Ok(None);
    }
    let (surface, _) = mesh.boundary_surface()?;
    let dec = assemble_dec(&surface, WeightMode::Clamp)?;
    let verts = surface.vertices();
    let normals = vertex_normals(&surface, model)?;
    let edge_integral = |a: Vec3, b: Vec3, f: &dyn Fn(&Vec3, f64) -> Result<AlternatingForm>| -> Result<f64> {
        let tangent = b - a;
        let mut total = 0.0;
        for (s, w) in SIMPSON {
            let q = a + tangent * s;
            let form = f(&q, s)?;
            total += w * form.evaluate(&[tangent.as_slice()])?;
        }
        Ok(total)
    };
    let value = |q: &Vec3| field.value(q.as_slice());

    if p == 1 {
        let theta: Vec<f64> = surface
            .edges()
            .iter()
            .map(|&[a, b]| edge_integral(verts[a], verts[b], &|q, _| Ok(value(q))))
            .collect::<Result<_>>()?;
        let flux: Vec<f64> = theta.iter().zip(&dec.star1).map(|(t, w)| t * w).collect();
        let div = dec.d0.transpose().mul_vec(&flux);
        let terms: Vec<f64> = (0..verts.len())
            .map(|v| {
                let psi = value(&verts[v]).interior_product(normals[v].as_slice())?;
                // ⋆0 (⋆0⁻¹ d0ᵀ ⋆1 θ) ψ
                Ok(2.0 * div[v] * psi.coeffs()[0])
            })
            .collect::<Result<_>>()?;
        return Ok(Some(pairwise_sum(&terms)));
    }

    let theta: Vec<f64> = surface
        .triangles()
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| verts[i]);
            let (u, v) = (b - a, c - a);
            let mut total = 0.0;
            for (bary, w) in TRIANGLE_RULE {
                let q = a * bary[0] + b * bary[1] + c * bary[2];
                total += w * 0.5 * value(&q).evaluate(&[u.as_slice(), v.as_slice()])?;
            }
            Ok(total)
        })
        .collect::<Result<_>>()?;
    let density: Vec<f64> = theta.iter().zip(&dec.star2).map(|(t, w)| t * w).collect();
    let div = dec.d1.transpose().mul_vec(&density);
    let terms: Vec<f64> = surface
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &[a, b])| {
            let (na, nb) = (normals[a], normals[b]);
            let psi = edge_integral(verts[a], verts[b], &|q, s| {
                let n = (na * (1.0 - s) + nb * s).normalize();
                Ok(value(q).interior_product(n.as_slice())?)
            })?;
            // ⋆1 (⋆1⁻¹ d1ᵀ ⋆2 θ) ψ
            Ok(2.0 * div[e] * psi)
        })
        .collect::<Result<_>>()?;
    Ok(Some(pairwise_sum(&terms)))
}

/// Evaluates every term of the scalar identity for a function `f`.
pub fn evaluate_classical_reilly(
    mesh: &MeshComplex,
    f: &dyn ScalarField,
    opts: &ReillyOptions,
) -> Result<ClassicalLedger> {
    require_solid(mesh)?;
    if f.dim() != 3 {
        return Err(ReillyError::BadField(format!("need a function on 3-space, got dimension {}", f.dim())));
    }
    let ricci_factor = opts.curvature_factor(1)?;
    let derivatives = opts.derivatives(mesh);

    let interior: Vec<[f64; 3]> = interior_points(mesh, opts.rule)
        .par_iter()
        .map(|(x, w)| {
            let g = gradient_of(f, x, derivatives)?;
            let h = hessian_of(f, x, derivatives)?;
            let lap = -h.trace();
            let grad_sq: f64 = g.iter().map(|v| v * v).sum();
            Ok([w * lap * lap, w * h.norm_squared(), w * grad_sq])
        })
        .collect::<Result<_>>()?;
    let [laplacian_sq, hessian_sq, grad_sq] = column_sums(&interior);

    let samples = boundary_samples(mesh, &opts.boundary)?;
    let boundary: Vec<[f64; 3]> = samples
        .par_iter()
        .map(|s| {
            let g = gradient_of(f, &s.point, derivatives)?;
            let h = hessian_of(f, &s.point, derivatives)?;
            let n = nalgebra::DVector::from_column_slice(&s.normal);
            let f_n: f64 = g.iter().zip(&s.normal).map(|(a, b)| a * b).sum();
            let n_h = s.mean_curvature_times_dim();
            let surface_lap = -h.trace() + (n.transpose() * &h * &n)[(0, 0)] - n_h * f_n;
            let tangential: Vec<f64> = s.frame.iter().map(|t| t.iter().zip(&g).map(|(a, b)| a * b).sum()).collect();
            let tg = nalgebra::DVector::from_vec(tangential);
            let shape = (tg.transpose() * &s.shape * &tg)[(0, 0)];
            Ok([
                s.weight * 2.0 * f_n * surface_lap,
                s.weight * shape,
                s.weight * n_h * f_n * f_n,
            ])
        })
        .collect::<Result<_>>()?;
    let [boundary_laplacian, boundary_shape, boundary_mean] = column_sums(&boundary);

    let ricci_term = ricci_factor * grad_sq;
    let rhs = hessian_sq + ricci_term + boundary_laplacian + boundary_shape + boundary_mean;
    let residual = laplacian_sq - rhs;
    let dec = if opts.dec_cross_term {
        Some(dec_boundary_laplacian(mesh, f, &opts.boundary, derivatives)?)
    } else {
        None
    };
    Ok(ClassicalLedger {
        field: f.name(),
        laplacian_sq,
        hessian_sq,
        ricci_term,
        boundary_laplacian,
        boundary_laplacian_dec: dec,
        boundary_shape,
        boundary_mean,
        rhs,
        residual,
        relative_residual: relative(
            residual,
            &[laplacian_sq, hessian_sq, ricci_term, boundary_laplacian, boundary_shape, boundary_mean],
        ),
        residual_dec: dec.map(|d| laplacian_sq - (rhs - boundary_laplacian + d)),
        resolution: Resolution::of(mesh, &samples, opts),
    })
}

/// `2 Σ_v ⋆0_v f_N(v) (Δ^Σ f)_v` with the cotangent Laplacian.
fn dec_boundary_laplacian(
    mesh: &MeshComplex,
    f: &dyn ScalarField,
    model: &BoundaryModel,
    derivatives: Derivatives,
) -> Result<f64> {
    let (surface, _) = mesh.boundary_surface()?;
    let dec = assemble_dec(&surface, WeightMode::Clamp)?;
    let normals = vertex_normals(&surface, model)?;
    let values: Vec<f64> = surface.vertices().iter().map(|v| f.value(v.as_slice())).collect();
    // ⋆0 Δf = K0 f
    let weak_lap = dec.k0().mul_vec(&values);
    let terms: Vec<f64> = surface
        .vertices()
        .iter()
        .zip(&normals)
        .zip(&weak_lap)
        .map(|((v, n), l)| {
            let g = gradient_of(f, v.as_slice(), derivatives)?;
            let f_n: f64 = g.iter().zip(n.iter()).map(|(a, b)| a * b).sum();
            Ok(2.0 * f_n * l)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}

/// Integrated Green formula `∫⟨dω,φ⟩ = ∫⟨ω,δφ⟩ - ∫_Σ⟨J*ω, i_Nφ⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesLedger {
    pub lhs: f64,
    pub interior: f64,
    pub boundary: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

/// Checks the Green formula for a `(p-1)`-form `omega` and a `p`-form `phi`.
pub fn check_stokes(
    mesh: &MeshComplex,
    omega: &dyn FormField,
    phi: &dyn FormField,
    opts: &ReillyOptions,
) -> Result<StokesLedger> {
    require_solid(mesh)?;
    if phi.degree() != omega.degree() + 1 || phi.dim() != 3 || omega.dim() != 3 {
        return Err(ReillyError::BadField("need a (p-1)-form and a p-form on 3-space".into()));
    }
    let derivatives = opts.derivatives(mesh);
    let interior: Vec<[f64; 2]> = interior_points(mesh, opts.rule)
        .par_iter()
        .map(|(x, w)| {
            let d_omega = differential(&partials_of(omega, x, derivatives)?)?;
            let delta_phi = codifferential(&partials_of(phi, x, derivatives)?)?;
            let phi_x = phi.value(x);
            Ok([w * d_omega.dot(&phi_x)?, w * omega.value(x).dot(&delta_phi)?])
        })
        .collect::<Result<_>>()?;
    let [lhs, inner] = column_sums(&interior);
    let samples = boundary_samples(mesh, &opts.boundary)?;
    let boundary: Vec<f64> = samples
        .par_iter()
        .map(|s| {
            let restricted = omega.value(&s.point).pullback(&s.frame)?;
            let normal = phi.value(&s.point).interior_product(&s.normal)?.pullback(&s.frame)?;
            Ok(s.weight * restricted.dot(&normal)?)
        })
        .collect::<Result<_>>()?;
    let boundary = pairwise_sum(&boundary);
    let residual = lhs - (inner - boundary);
    Ok(StokesLedger {
        lhs,
        interior: inner,
        boundary,
        residual,
        relative_residual: relative(residual, &[lhs, inner, boundary]),
    })
}

/// One row of a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub vertices: usize,
    pub tets: usize,
    pub mean_edge_length: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub residual_dec: Option<f64>,
}

impl ConvergenceRow {
    pub fn from_reilly(level: usize, l: &ReillyLedger) -> Self {
        Self {
            level,
            vertices: l.resolution.vertices,
            tets: l.resolution.tets,
            mean_edge_length: l.resolution.mean_edge_length,
            lhs: l.lhs,
            rhs: l.rhs,
            residual: l.residual,
            relative_residual: l.relative_residual,
            residual_dec: l.residual_dec,
        }
    }

    pub fn from_classical(level: usize, l: &ClassicalLedger) -> Self {
        Self {
            level,
            vertices: l.resolution.vertices,
            tets: l.resolution.tets,
            mean_edge_length: l.resolution.mean_edge_length,
            lhs: l.laplacian_sq,
            rhs: l.rhs,
            residual: l.residual,
            relative_residual: l.relative_residual,
            residual_dec: l.residual_dec,
        }
    }
}

pub fn write_convergence_csv<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| ReillyError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| ReillyError::Io(e.to_string()))
}

/// `true` when `|residual|` never grows by more than `floor` between
/// consecutive rows. Residuals already at rounding level do not count as
/// growth.
pub fn residuals_nonincreasing(rows: &[ConvergenceRow], floor: f64) -> bool {
    rows.windows(2)
        .all(|w| w[1].residual.abs() <= w[0].residual.abs().max(floor))
}

/// Frame-coordinate shape matrix helper for tests and callers building
/// quadric patches.
pub fn shape_matrix(rows: &[&[f64]]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::AnalyticSurface;
    use crate::mesh::generate_ball;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn analytic() -> ReillyOptions {
        ReillyOptions::with_boundary(BoundaryModel::Analytic {
            surface: AnalyticSurface::sphere(vec![0.0; 3], 1.0),
        })
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn parallel_covector_on_ball() {
        let mesh = generate_ball(3);
        let ledger = evaluate_reilly(&mesh, &builtin_form("dx1").unwrap(), &analytic()).unwrap();
        assert!(ledger.interior_max() < 1e-12);
        assert!((ledger.cross_term + 16.0 * PI / 3.0).abs() < 0.01 * 16.0 * PI / 3.0);
        assert!((ledger.boundary_term - 16.0 * PI / 3.0).abs() < 0.01 * 16.0 * PI / 3.0);
        assert!((ledger.boundary_term - ledger.boundary_term_alt).abs() < 1e-10);
        assert!(ledger.boundary_forms_pointwise_gap < 1e-8);
        assert!(ledger.residual.abs() < 0.05 * ledger.boundary_term);
    }

    #[test]
    fn parallel_forms_of_every_degree_balance() {
        let mesh = generate_ball(2);
        for name in ["dx1", "dx1^dx2", "dx1^dx2^dx3"] {
            for opts in [analytic(), ReillyOptions::default()] {
                let l = evaluate_reilly(&mesh, &builtin_form(name).unwrap(), &opts).unwrap();
                assert!(l.interior_max() < 1e-3 * l.resolution.volume);
                let scale = l.cross_term.abs().max(l.boundary_term.abs());
                assert!((l.cross_term + l.boundary_term).abs() <= 0.05 * scale, "{name}: {l:?}");
            }
        }
    }

    #[test]
    fn x2dx1_ledger() {
        let mesh = generate_ball(3);
        let l = evaluate_reilly(&mesh, &builtin_form("x2dx1").unwrap(), &analytic()).unwrap();
        let vol = mesh.volume();
        assert!((l.lhs - vol).abs() < 1e-12);
        assert!((l.dirichlet - vol).abs() < 1e-12);
        assert!((l.lhs - 4.0 * PI / 3.0).abs() < 0.02 * 4.0 * PI / 3.0);
        assert!((l.cross_term + 8.0 * PI / 5.0).abs() < 0.01 * 8.0 * PI / 5.0);
        assert!((l.boundary_term - 8.0 * PI / 5.0).abs() < 0.01 * 8.0 * PI / 5.0);
        assert!(l.relative_residual < 0.05, "{l:?}");
        let dec = l.cross_term_dec.unwrap();
        assert!((dec - l.cross_term).abs() < 0.05 * l.cross_term.abs(), "dec {dec} vs {}", l.cross_term);
    }

    #[test]
    fn dec_cross_term_for_two_forms() {
        let mesh = generate_ball(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let field = PolynomialForm::random(3, 2, 2, &mut rng);
        let l = evaluate_reilly(&mesh, &field, &analytic()).unwrap();
        let dec = l.cross_term_dec.unwrap();
        assert!((dec - l.cross_term).abs() < 0.05 * l.cross_term.abs().max(1.0), "dec {dec} vs {}", l.cross_term);
    }

    #[test]
    fn classical_closed_forms() {
        let mesh = generate_ball(3);
        let opts = analytic();
        let c = evaluate_classical_reilly(&mesh, &builtin_function("const").unwrap(), &opts).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert_eq!(c.residual, 0.0);

        let x1 = evaluate_classical_reilly(&mesh, &builtin_function("x1").unwrap(), &opts).unwrap();
        assert_eq!(x1.laplacian_sq, 0.0);
        assert_eq!(x1.hessian_sq, 0.0);
        assert!(x1.residual.abs() < 0.05 * 4.0 * PI);
        // ∫ -4x₁², ∫ 1 - x₁², ∫ 2x₁²
        assert!((x1.boundary_laplacian + 16.0 * PI / 3.0).abs() < 0.01 * 16.0 * PI / 3.0);
        assert!((x1.boundary_shape - 8.0 * PI / 3.0).abs() < 0.01 * 8.0 * PI / 3.0);
        assert!((x1.boundary_mean - 8.0 * PI / 3.0).abs() < 0.01 * 8.0 * PI / 3.0);

        let q = evaluate_classical_reilly(&mesh, &builtin_function("half_norm_sq").unwrap(), &opts).unwrap();
        let vol = 4.0 * PI / 3.0;
        assert!((q.laplacian_sq - 9.0 * vol).abs() < 0.05 * 9.0 * vol);
        assert!((q.hessian_sq - 3.0 * vol).abs() < 0.05 * 3.0 * vol);
        assert!(q.boundary_laplacian.abs() < 1e-10);
        assert!(q.boundary_shape.abs() < 1e-10);
        assert!((q.boundary_mean - 8.0 * PI).abs() < 0.05 * 8.0 * PI);
        assert!(q.relative_residual < 0.05);
    }

    #[test]
    fn classical_dec_residual_shrinks() {
        let opts = analytic();
        let f = builtin_function("x1").unwrap();
        let rows: Vec<ConvergenceRow> = (1..=3)
            .map(|s| {
                let l = evaluate_classical_reilly(&generate_ball(s), &f, &opts).unwrap();
                ConvergenceRow::from_classical(s, &l)
            })
            .collect();
        for w in rows.windows(2) {
            assert!(w[1].residual_dec.unwrap().abs() < w[0].residual_dec.unwrap().abs(), "{rows:?}");
        }
        assert!(residuals_nonincreasing(&rows, 1e-12));
        let mut buf = Vec::new();
        write_convergence_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("level,vertices,tets,mean_edge_length,lhs,rhs,residual"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn random_polynomial_residual_decreases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let opts = analytic();
        for p in 1..=2 {
            let field = PolynomialForm::random(3, p, 2, &mut rng);
            let rows: Vec<ConvergenceRow> = (1..=3)
                .map(|s| ConvergenceRow::from_reilly(s, &evaluate_reilly(&generate_ball(s), &field, &opts).unwrap()))
                .collect();
            assert!(
                rows.windows(2).all(|w| w[1].relative_residual <= w[0].relative_residual),
                "p={p}: {rows:?}"
            );
        }
    }

    #[test]
    fn stokes_on_ball() {
        let mesh = generate_ball(3);
        let x1 = PolynomialForm::new(3, 0, vec![Polynomial::coordinate(3, 0)], "x1").unwrap();
        let dx1 = builtin_form("dx1").unwrap();
        let flat = ReillyOptions::with_boundary(BoundaryModel::Flat);
        let s = check_stokes(&mesh, &x1, &dx1, &flat).unwrap();
        assert!((s.lhs - mesh.volume()).abs() < 1e-12);
        assert!(s.relative_residual < 1e-12, "{s:?}");
        let s = check_stokes(&mesh, &x1, &dx1, &analytic()).unwrap();
        assert!((s.boundary + 4.0 * PI / 3.0).abs() < 0.01 * 4.0 * PI / 3.0);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for p in 1..=3 {
            let omega = PolynomialForm::random(3, p - 1, 2, &mut rng);
            let phi = PolynomialForm::random(3, p, 2, &mut rng);
            let s = check_stokes(&mesh, &omega, &phi, &analytic()).unwrap();
            assert!(s.relative_residual < 0.03, "p={p}: {s:?}");
            let s = check_stokes(&mesh, &omega, &phi, &flat).unwrap();
            assert!(s.relative_residual < 1e-3, "p={p}: {s:?}");
        }
    }

    #[test]
    fn errors_are_reported() {
        let ball = generate_ball(0);
        let surface = crate::mesh::generate_icosphere(1, 1.0);
        let dx1 = builtin_form("dx1").unwrap();
        assert_eq!(evaluate_reilly(&surface, &dx1, &analytic()).unwrap_err(), ReillyError::NotASolid);
        let opaque = ClosureForm::new(3, 1, |x: &[f64]| AlternatingForm::covector(&[x[1], 0.0, 0.0]), "opaque");
        let strict = ReillyOptions {
            finite_differences: false,
            ..analytic()
        };
        assert!(matches!(evaluate_reilly(&ball, &opaque, &strict), Err(ReillyError::MissingDerivatives(_))));
        let curved = ReillyOptions {
            curvature: Some(CurvatureTerm::GallotMeyerLowerBound { gamma: 1.0 }),
            ..analytic()
        };
        assert!(matches!(evaluate_reilly(&ball, &dx1, &curved), Err(ReillyError::UnsupportedCurvature(_))));
        // differenced derivatives reproduce the closed-form ledger
        let exact = evaluate_reilly(&ball, &builtin_form("x2dx1").unwrap(), &analytic()).unwrap();
        let fd = evaluate_reilly(&ball, &opaque, &analytic()).unwrap();
        assert!((exact.lhs - fd.lhs).abs() < 1e-8 && (exact.cross_term - fd.cross_term).abs() < 1e-8);
    }

    #[test]
    fn constant_curvature_term_scales_mass() {
        let ball = generate_ball(1);
        let opts = ReillyOptions {
            curvature: Some(CurvatureTerm::ConstantCurvature { kappa: 2.0 }),
            ..analytic()
        };
        let l = evaluate_reilly(&ball, &builtin_form("dx1").unwrap(), &opts).unwrap();
        // p(N-p)κ = 1·2·2
        assert!((l.curvature_term - 4.0 * l.mass).abs() < 1e-12);
        assert!((l.mass - ball.volume()).abs() < 1e-12);
    }

    #[test]
    fn ledger_json_has_labeled_terms() {
        let l = evaluate_reilly(&generate_ball(1), &builtin_form("dx1").unwrap(), &analytic()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&l.to_json()).unwrap();
        for key in ["lhs", "dirichlet", "curvature_term", "cross_term", "boundary_term", "boundary_term_alt", "residual"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
