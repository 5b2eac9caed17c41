//! Pointwise boundary quantities and the restriction/commutation identities.
//!
//! At a boundary point with inner normal `N` and tangent frame `t`, a form
//! splits as `ω = θ + ν∧ψ` with `θ = J*ω` tangential and `ψ = i_N ω`.
//! Surface derivatives are computed two ways: through the closed-form
//! commutation rules (from ambient derivatives and the shape operator), and
//! by differentiating the tangential extensions `θ̃ = ω - ν∧i_N ω` and
//! `ψ̃ = i_N ω` along curves in the surface.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::boundary::SurfaceSample;
use super::field::{partials_of, Derivatives, FormField};
use super::{ReillyError, Result};
use crate::curvature::AnalyticSurface;
use crate::exterior::{induced_endomorphism, tangent_frame, AlternatingForm};

/// Boundary integrands of the integrated Bochner identity at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTerms {
    /// `2⟨i_N ω, δ^Σ(J*ω)⟩` with `δ^Σ` from the commutation rule.
    pub cross: f64,
    /// `⟨S^[p]J*ω, J*ω⟩ + ⟨S^[n+1-p] J*⋆ω, J*⋆ω⟩`.
    pub boundary_star: f64,
    /// `⟨S^[p]J*ω, J*ω⟩ + nH‖i_N ω‖² - ⟨S^[p-1] i_N ω, i_N ω⟩`.
    pub boundary_normal: f64,
    /// `‖i_N ω‖²` and `‖J*⋆ω‖²`, equal up to rounding.
    pub normal_sq: f64,
    pub star_restriction_sq: f64,
}

fn axis(dim: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[k] = 1.0;
    e
}

/// `δω = -Σ i_{e_k} ∂_k ω`.
pub fn codifferential(partials: &[AlternatingForm]) -> Result<AlternatingForm> {
    let dim = partials[0].dim();
    let mut out = AlternatingForm::zero(dim, partials[0].degree().saturating_sub(1))?;
    if partials[0].degree() == 0 {
        return Ok(out);
    }
    for (k, dk) in partials.iter().enumerate() {
        out = out.add_scaled(-1.0, &dk.interior_product(&axis(dim, k))?)?;
    }
    Ok(out)
}

/// `dω = Σ e_k ∧ ∂_k ω`.
pub fn differential(partials: &[AlternatingForm]) -> Result<AlternatingForm> {
    let dim = partials[0].dim();
    let mut out = AlternatingForm::zero(dim, (partials[0].degree() + 1).min(dim))?;
    if partials[0].degree() == dim {
        return Ok(out);
    }
    for (k, dk) in partials.iter().enumerate() {
        out = out.add_scaled(1.0, &AlternatingForm::covector(&axis(dim, k)).wedge(dk)?)?;
    }
    Ok(out)
}

/// `∇_X ω = Σ X_k ∂_k ω`.
pub fn directional(partials: &[AlternatingForm], x: &[f64]) -> Result<AlternatingForm> {
    let mut out = AlternatingForm::zero(partials[0].dim(), partials[0].degree())?;
    for (dk, xk) in partials.iter().zip(x) {
        out = out.add_scaled(*xk, dk)?;
    }
    Ok(out)
}

fn quadratic(shape: &DMatrix<f64>, form: &AlternatingForm) -> Result<f64> {
    if form.degree() == 0 {
        return Ok(0.0);
    }
    Ok(induced_endomorphism(shape, form.degree())?.quadratic_form(form)?)
}

fn apply(shape: &DMatrix<f64>, form: &AlternatingForm) -> Result<AlternatingForm> {
    if form.degree() == 0 {
        return Ok(form.scaled(0.0));
    }
    Ok(induced_endomorphism(shape, form.degree())?.apply(form)?)
}

/// `J*ω`, or `None` when the degree exceeds the surface dimension.
fn restrict(form: &AlternatingForm, frame: &[Vec<f64>]) -> Result<Option<AlternatingForm>> {
    if form.degree() > frame.len() {
        return Ok(None);
    }
    Ok(Some(form.pullback(frame)?))
}

/// `δ^Σ(J*ω) = J*(δω) + J*(i_N ∇_N ω) + S^[p-1](i_N ω) - nH i_N ω`.
pub fn surface_codifferential_rule(
    sample: &SurfaceSample,
    value: &AlternatingForm,
    partials: &[AlternatingForm],
) -> Result<AlternatingForm> {
    let frame = &sample.frame;
    let psi = value.interior_product(&sample.normal)?.pullback(frame)?;
    let nabla_n = directional(partials, &sample.normal)?;
    let mut out = codifferential(partials)?.pullback(frame)?;
    out = out.add_scaled(1.0, &nabla_n.interior_product(&sample.normal)?.pullback(frame)?)?;
    out = out.add_scaled(1.0, &apply(&sample.shape, &psi)?)?;
    out.add_scaled(-sample.mean_curvature_times_dim(), &psi)
        .map_err(Into::into)
}

/// `d^Σ(i_N ω) = -J*(i_N dω) + J*(∇_N ω) - S^[p](J*ω)`; `None` when the
/// degree exceeds the surface dimension.
pub fn surface_differential_rule(
    sample: &SurfaceSample,
    value: &AlternatingForm,
    partials: &[AlternatingForm],
) -> Result<Option<AlternatingForm>> {
    let frame = &sample.frame;
    let Some(theta) = restrict(value, frame)? else {
        return Ok(None);
    };
    let d_omega = differential(partials)?;
    let nabla_n = directional(partials, &sample.normal)?;
    let out = d_omega
        .interior_product(&sample.normal)?
        .pullback(frame)?
        .scaled(-1.0)
        .add_scaled(1.0, &nabla_n.pullback(frame)?)?
        .add_scaled(-1.0, &apply(&sample.shape, &theta)?)?;
    Ok(Some(out))
}

/// Boundary integrands at one sample.
pub fn point_terms(sample: &SurfaceSample, value: &AlternatingForm, partials: &[AlternatingForm]) -> Result<PointTerms> {
    let frame = &sample.frame;
    let n_h = sample.mean_curvature_times_dim();
    let psi = value.interior_product(&sample.normal)?.pullback(frame)?;
    let delta_sigma = surface_codifferential_rule(sample, value, partials)?;
    let tangential = match restrict(value, frame)? {
        Some(theta) => quadratic(&sample.shape, &theta)?,
        None => 0.0,
    };
    let star_restricted = value.hodge_star().pullback(frame)?;
    Ok(PointTerms {
        cross: 2.0 * psi.dot(&delta_sigma)?,
        boundary_star: tangential + quadratic(&sample.shape, &star_restricted)?,
        boundary_normal: tangential + n_h * psi.norm_squared() - quadratic(&sample.shape, &psi)?,
        normal_sq: psi.norm_squared(),
        star_restriction_sq: star_restricted.norm_squared(),
    })
}

/// Osculating quadric `y = x + u + ½ uᵀSu N` over the tangent plane at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalQuadric {
    pub origin: Vec<f64>,
    pub normal: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    pub shape: DMatrix<f64>,
}

impl LocalQuadric {
    pub fn new(origin: Vec<f64>, normal: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let frame = tangent_frame(&normal)?;
        if shape.nrows() != frame.len() || shape.ncols() != frame.len() {
            return Err(ReillyError::BadField(format!(
                "shape operator must be {0}x{0}",
                frame.len()
            )));
        }
        Ok(Self {
            origin,
            normal,
            frame,
            shape,
        })
    }

    fn tangent_coords(&self, v: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|t| dot(t, v)).collect()
    }

    fn point(&self, u: &[f64]) -> Vec<f64> {
        let su: Vec<f64> = (0..u.len()).map(|i| (0..u.len()).map(|j| self.shape[(i, j)] * u[j]).sum()).collect();
        let h = 0.5 * dot(u, &su);
        let mut y = self.origin.clone();
        for (k, yk) in y.iter_mut().enumerate() {
            *yk += self.frame.iter().zip(u).map(|(t, ui)| t[k] * ui).sum::<f64>() + h * self.normal[k];
        }
        y
    }

    fn normal_at(&self, y: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = y.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        let u = self.tangent_coords(&diff);
        let mut g = self.normal.clone();
        for (i, t) in self.frame.iter().enumerate() {
            let su: f64 = (0..u.len()).map(|j| self.shape[(i, j)] * u[j]).sum();
            for (gk, tk) in g.iter_mut().zip(t) {
                *gk -= su * tk;
            }
        }
        let norm = dot(&g, &g).sqrt();
        g.iter().map(|v| v / norm).collect()
    }
}

/// A surface near a base point, with curves and normals for differencing.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfacePatch {
    Analytic(AnalyticSurface),
    Quadric(LocalQuadric),
}

impl SurfacePatch {
    /// Sample at `x`; analytic patches project `x` onto the surface first.
    pub fn base(&self, x: &[f64]) -> Result<SurfaceSample> {
        Ok(match self {
            SurfacePatch::Analytic(s) => {
                let geo = s.local_geometry(&s.project(x))?;
                SurfaceSample {
                    point: geo.point,
                    normal: geo.normal,
                    frame: geo.frame,
                    shape: geo.shape.shape_matrix,
                    weight: 1.0,
                }
            }
            SurfacePatch::Quadric(q) => SurfaceSample {
                point: q.origin.clone(),
                normal: q.normal.clone(),
                frame: q.frame.clone(),
                shape: q.shape.clone(),
                weight: 1.0,
            },
        })
    }

    /// Point at parameter `t` of a surface curve through the base point with
    /// velocity `v` (tangent).
    fn curve(&self, base: &[f64], v: &[f64], t: f64) -> Vec<f64> {
        match self {
            SurfacePatch::Analytic(s) => {
                let y: Vec<f64> = base.iter().zip(v).map(|(b, vi)| b + t * vi).collect();
                s.project(&y)
            }
            SurfacePatch::Quadric(q) => {
                let u: Vec<f64> = q.tangent_coords(v).iter().map(|c| c * t).collect();
                q.point(&u)
            }
        }
    }

    fn normal_at(&self, y: &[f64]) -> Vec<f64> {
        match self {
            SurfacePatch::Analytic(s) => s.inner_normal(y),
            SurfacePatch::Quadric(q) => q.normal_at(y),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Step of the five-point difference stencil along surface curves.
pub const CURVE_STEP: f64 = 1e-3;

/// Ambient derivative along `v` of a form-valued function on the surface.
fn curve_derivative(
    patch: &SurfacePatch,
    base: &[f64],
    v: &[f64],
    f: impl Fn(&[f64], &[f64]) -> Result<AlternatingForm>,
) -> Result<AlternatingForm> {
    let h = CURVE_STEP;
    let at = |t: f64| {
        let y = patch.curve(base, v, t);
        let n = patch.normal_at(&y);
        f(&y, &n)
    };
    let stencil = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let mut out: Option<AlternatingForm> = None;
    for (t, w) in stencil {
        let term = at(t * h)?.scaled(w / (12.0 * h));
        out = Some(match out {
            None => term,
            Some(acc) => acc.add_scaled(1.0, &term)?,
        });
    }
    Ok(out.expect("stencil is non-empty"))
}

/// `θ̃ = ω - ν∧i_N ω`, the tangential part of `ω` in ambient coordinates.
fn tangential_extension(omega: &AlternatingForm, normal: &[f64]) -> Result<AlternatingForm> {
    if omega.degree() == 0 {
        return Ok(omega.clone());
    }
    let nu = AlternatingForm::covector(normal);
    Ok(omega.add_scaled(-1.0, &nu.wedge(&omega.interior_product(normal)?)?)?)
}

/// `∇^Σ_X(J*ω)` and `∇^Σ_X(i_N ω)` by differencing along the surface.
fn surface_derivatives_fd(
    patch: &SurfacePatch,
    sample: &SurfaceSample,
    field: &dyn FormField,
    v: &[f64],
) -> Result<(Option<AlternatingForm>, AlternatingForm)> {
    let frame = &sample.frame;
    let theta = if field.degree() <= frame.len() {
        let d = curve_derivative(patch, &sample.point, v, |y, n| tangential_extension(&field.value(y), n))?;
        Some(d.pullback(frame)?)
    } else {
        None
    };
    let d = curve_derivative(patch, &sample.point, v, |y, n| Ok(field.value(y).interior_product(n)?))?;
    Ok((theta, d.pullback(frame)?))
}

/// Residual norms of a pair of identities, with the size of the sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub first: f64,
    pub second: f64,
    /// Largest norm among the compared sides.
    pub scale: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.first.max(self.second)
    }
}

fn diff_norm(a: &AlternatingForm, b: &AlternatingForm) -> Result<f64> {
    Ok(a.add_scaled(-1.0, b)?.norm())
}

/// Surface codifferential of `J*ω` and differential of `i_N ω`, both by
/// differencing along the surface.
fn surface_operators_fd(
    patch: &SurfacePatch,
    sample: &SurfaceSample,
    field: &dyn FormField,
) -> Result<(AlternatingForm, Option<AlternatingForm>)> {
    let n = sample.frame.len();
    let p = field.degree();
    let mut delta = AlternatingForm::zero(n, p - 1)?;
    let mut d = if p <= n { Some(AlternatingForm::zero(n, p)?) } else { None };
    for (i, t) in sample.frame.iter().enumerate() {
        let (theta_i, psi_i) = surface_derivatives_fd(patch, sample, field, t)?;
        if let Some(th) = theta_i {
            delta = delta.add_scaled(-1.0, &th.interior_product(&axis(n, i))?)?;
        }
        if let Some(acc) = d.as_mut() {
            let wedge = AlternatingForm::covector(&axis(n, i)).wedge(&psi_i)?;
            *acc = acc.add_scaled(1.0, &wedge)?;
        }
    }
    Ok((delta, d))
}

fn require_degree(field: &dyn FormField, n: usize) -> Result<()> {
    if field.degree() == 0 || field.degree() > n + 1 {
        return Err(ReillyError::BadField(format!(
            "degree {} outside 1..={} for a surface of dimension {n}",
            field.degree(),
            n + 1
        )));
    }
    Ok(())
}

/// Residuals of the two commutation rules at `x`:
/// `δ^Σ(J*ω) = J*(δω) + J*(i_N∇_Nω) + S^[p-1] i_Nω - nH i_Nω` and
/// `d^Σ(i_Nω) = -J*(i_N dω) + J*(∇_Nω) - S^[p] J*ω`.
/// Left sides are differenced along the patch, right sides use the field's
/// derivatives and the patch's shape operator.
pub fn check_commutation(
    patch: &SurfacePatch,
    x: &[f64],
    field: &dyn FormField,
    derivatives: Derivatives,
) -> Result<IdentityResiduals> {
    let sample = patch.base(x)?;
    require_degree(field, sample.frame.len())?;
    let value = field.value(&sample.point);
    let partials = partials_of(field, &sample.point, derivatives)?;
    let (delta_fd, d_fd) = surface_operators_fd(patch, &sample, field)?;
    let delta_rule = surface_codifferential_rule(&sample, &value, &partials)?;
    let d_rule = surface_differential_rule(&sample, &value, &partials)?;
    let mut scale = delta_fd.norm().max(delta_rule.norm());
    let second = match (d_fd, d_rule) {
        (Some(a), Some(b)) => {
            scale = scale.max(a.norm()).max(b.norm());
            diff_norm(&a, &b)?
        }
        _ => 0.0,
    };
    Ok(IdentityResiduals {
        first: diff_norm(&delta_fd, &delta_rule)?,
        second,
        scale,
    })
}

/// Residuals of `∇^Σ_X(J*ω) = J*(∇_Xω) + S(X)*∧ i_Nω` and
/// `∇^Σ_X(i_Nω) = J*(i_N ∇_Xω) - i_{S(X)} J*ω` for a tangent direction `v`
/// (its normal component is discarded).
pub fn check_derivative_formulas(
    patch: &SurfacePatch,
    x: &[f64],
    field: &dyn FormField,
    v: &[f64],
    derivatives: Derivatives,
) -> Result<IdentityResiduals> {
    let sample = patch.base(x)?;
    require_degree(field, sample.frame.len())?;
    let frame = &sample.frame;
    let coords: Vec<f64> = frame.iter().map(|t| dot(t, v)).collect();
    let tangent: Vec<f64> = (0..sample.point.len())
        .map(|k| frame.iter().zip(&coords).map(|(t, c)| t[k] * c).sum())
        .collect();
    let value = field.value(&sample.point);
    let partials = partials_of(field, &sample.point, derivatives)?;
    let nabla_x = directional(&partials, &tangent)?;
    let psi = value.interior_product(&sample.normal)?.pullback(frame)?;
    let s_x = sample.shape_apply(&coords);

    let (theta_fd, psi_fd) = surface_derivatives_fd(patch, &sample, field, &tangent)?;
    let psi_rule = {
        let base = nabla_x.interior_product(&sample.normal)?.pullback(frame)?;
        match restrict(&value, frame)? {
            Some(theta) if theta.degree() > 0 => base.add_scaled(-1.0, &theta.interior_product(&s_x)?)?,
            _ => base,
        }
    };
    let mut scale = psi_fd.norm().max(psi_rule.norm());
    let first = match theta_fd {
        Some(fd) => {
            let rule = nabla_x
                .pullback(frame)?
                .add_scaled(1.0, &AlternatingForm::covector(&s_x).wedge(&psi)?)?;
            scale = scale.max(fd.norm()).max(rule.norm());
            diff_norm(&fd, &rule)?
        }
        None => 0.0,
    };
    Ok(IdentityResiduals {
        first,
        second: diff_norm(&psi_fd, &psi_rule)?,
        scale,
    })
}

/// For a constant-coefficient form `ξ` on a round sphere, compares
/// `δ^Σ(J*ξ)` with `-(n-p+1)H i_Nξ` and `d^Σ(i_Nξ)` with `-pH J*ξ`. Each
/// residual is the larger discrepancy of the differenced surface operator
/// and of the commutation rule against the closed form.
pub fn check_parallel_restriction(surface: &AnalyticSurface, x: &[f64], xi: &AlternatingForm) -> Result<IdentityResiduals> {
    let Some(_) = surface.sphere_radius() else {
        return Err(ReillyError::NotUmbilic);
    };
    let field = super::field::PolynomialForm::parallel(xi, "parallel");
    let patch = SurfacePatch::Analytic(surface.clone());
    let sample = patch.base(x)?;
    let n = sample.frame.len();
    let p = xi.degree();
    require_degree(&field, n)?;
    let h = sample.mean_curvature_times_dim() / n as f64;
    let psi = xi.interior_product(&sample.normal)?.pullback(&sample.frame)?;
    let partials = field.partials(&sample.point).expect("polynomial forms have derivatives");

    let delta_closed = psi.scaled(-((n + 1 - p) as f64) * h);
    let (delta_fd, d_fd) = surface_operators_fd(&patch, &sample, &field)?;
    let delta_rule = surface_codifferential_rule(&sample, xi, &partials)?;
    let first = diff_norm(&delta_fd, &delta_closed)?.max(diff_norm(&delta_rule, &delta_closed)?);
    let mut scale = delta_closed.norm();

    let second = match (restrict(xi, &sample.frame)?, d_fd) {
        (Some(theta), Some(d_fd)) => {
            let d_closed = theta.scaled(-(p as f64) * h);
            let d_rule = surface_differential_rule(&sample, xi, &partials)?.expect("degree fits the surface");
            scale = scale.max(d_closed.norm());
            diff_norm(&d_fd, &d_closed)?.max(diff_norm(&d_rule, &d_closed)?)
        }
        _ => 0.0,
    };
    Ok(IdentityResiduals { first, second, scale })
}
