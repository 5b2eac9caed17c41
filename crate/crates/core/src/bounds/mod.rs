//! Eigenvalue inequalities for hypersurfaces bounding Euclidean domains,
//! evaluated on closed-form spheres and on meshes.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{s_norm_p, sigma_global, AnalyticSurface, CurvatureError, ShapeData};
use crate::exterior::{induced_endomorphism, AlternatingForm, ExteriorError};
use crate::mesh::{discrete_shape, generate_ellipsoid, MeshComplex, MeshError};
use crate::reilly::{check_parallel_restriction, IdentityResiduals, ReillyError};
use crate::spectrum::{
    spectrum_functions, spectrum_one_forms, sphere_hodge_oracle, Family, SpectrumError, SpectrumOptions, SpectrumReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("degree {p} outside {range} for n = {n}")]
    BadDegree { p: usize, n: usize, range: &'static str },
    #[error("Betti number b_{degree} of {geometry} is unknown")]
    MissingTopology { geometry: String, degree: usize },
    #[error("special Killing number must be non-negative, got {0}")]
    NegativeConstant(f64),
    #[error("{0} is not available for this geometry")]
    Unavailable(String),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Reilly(#[from] ReillyError),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    /// Fraction of `max(|lhs|, |rhs|)`.
    Relative(f64),
}

impl Tolerance {
    pub fn threshold(&self, lhs: f64, rhs: f64) -> f64 {
        match *self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(t) => t * lhs.abs().max(rhs.abs()),
        }
    }
}

/// Default tolerance for closed-form geometry.
pub const ANALYTIC_TOLERANCE: Tolerance = Tolerance::Relative(1e-12);
/// Default tolerance for mesh geometry (curvature and spectrum error).
pub const MESH_TOLERANCE: Tolerance = Tolerance::Relative(0.03);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictState {
    Satisfied,
    Violated,
    /// A hypothesis fails; `lhs` and `rhs` are still reported when defined.
    Inapplicable,
}

/// Outcome of evaluating one inequality on one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub name: String,
    pub formula: String,
    pub geometry: String,
    pub p: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// Oriented so that `slack >= 0` means the inequality holds.
    pub slack: f64,
    /// `|slack| / max(|lhs|, |rhs|)`.
    pub tightness: f64,
    pub state: VerdictState,
    pub satisfied: bool,
    pub tolerance: Tolerance,
    pub note: Option<String>,
}

impl BoundVerdict {
    fn new(name: &str, formula: &str, case: &str, p: Option<usize>, lhs: f64, rhs: f64, slack: f64, tol: Tolerance) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let tightness = if scale == 0.0 { 0.0 } else { slack.abs() / scale };
        let satisfied = slack >= -tol.threshold(lhs, rhs);
        Self {
            name: name.into(),
            formula: formula.into(),
            geometry: case.into(),
            p,
            lhs,
            rhs,
            slack,
            tightness,
            state: if satisfied { VerdictState::Satisfied } else { VerdictState::Violated },
            satisfied,
            tolerance: tol,
            note: None,
        }
    }

    /// `lhs >= rhs`.
    pub fn at_least(name: &str, formula: &str, case: &str, p: Option<usize>, lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        Self::new(name, formula, case, p, lhs, rhs, lhs - rhs, tol)
    }

    /// `lhs <= rhs`.
    pub fn at_most(name: &str, formula: &str, case: &str, p: Option<usize>, lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        Self::new(name, formula, case, p, lhs, rhs, rhs - lhs, tol)
    }

    fn inapplicable(mut self, why: impl Into<String>) -> Self {
        self.state = VerdictState::Inapplicable;
        self.satisfied = false;
        self.note = Some(why.into());
        self
    }

    /// Re-judges the verdict under another tolerance. Inapplicable verdicts
    /// stay inapplicable.
    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tolerance = tol;
        if self.state != VerdictState::Inapplicable {
            self.satisfied = self.slack >= -tol.threshold(self.lhs, self.rhs);
            self.state = if self.satisfied { VerdictState::Satisfied } else { VerdictState::Violated };
        }
        self
    }

    pub fn is_violation(&self) -> bool {
        self.state == VerdictState::Violated
    }

    /// Satisfied with `tightness <= tol`.
    pub fn is_equality(&self, tol: f64) -> bool {
        self.state == VerdictState::Satisfied && self.tightness <= tol
    }
}

/// Area of the unit sphere `Sⁿ ⊂ ℝⁿ⁺¹`.
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n - 1) as f64 * unit_sphere_area(n - 2),
    }
}

/// A closed surface mesh with everything the bounds need.
#[derive(Debug, Clone)]
pub struct MeshCase {
    pub label: String,
    pub shapes: Vec<ShapeData>,
    pub area_weights: Vec<f64>,
    pub functions: SpectrumReport,
    pub one_forms: Option<SpectrumReport>,
    pub area: f64,
    pub enclosed_volume: f64,
    pub genus: Option<usize>,
    pub components: usize,
}

impl MeshCase {
    /// Curvature and the function spectrum; the 1-form spectrum only when
    /// `with_one_forms` is set.
    pub fn build(label: impl Into<String>, mesh: &MeshComplex, opts: &SpectrumOptions, with_one_forms: bool) -> Result<Self> {
        let surface = if mesh.is_surface() {
            mesh.clone()
        } else {
            mesh.boundary_surface()?.0
        };
        let shape = discrete_shape(&surface)?;
        let functions = spectrum_functions(&surface, opts)?;
        let one_forms = if with_one_forms {
            Some(spectrum_one_forms(&surface, opts)?)
        } else {
            None
        };
        Ok(Self {
            label: label.into(),
            shapes: shape.shapes,
            area_weights: shape.area_weights,
            functions,
            one_forms,
            area: surface.area(),
            enclosed_volume: if mesh.is_surface() { surface.volume() } else { mesh.volume() },
            genus: surface.genus(),
            components: surface.component_count(),
        })
    }
}

/// Geometry on which the inequalities are evaluated.
#[derive(Debug, Clone)]
pub enum GeometryCase {
    /// Round `Sⁿ` of the given radius bounding a ball in `ℝⁿ⁺¹`.
    Sphere { n: usize, radius: f64 },
    Mesh(Box<MeshCase>),
}

impl GeometryCase {
    pub fn sphere(n: usize, radius: f64) -> Self {
        assert!(n >= 1 && radius > 0.0);
        GeometryCase::Sphere { n, radius }
    }

    pub fn label(&self) -> String {
        match self {
            GeometryCase::Sphere { n, radius } => format!("sphere(n={n}, r={radius})"),
            GeometryCase::Mesh(m) => m.label.clone(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            GeometryCase::Sphere { n, .. } => *n,
            GeometryCase::Mesh(_) => 2,
        }
    }

    pub fn tolerance(&self) -> Tolerance {
        match self {
            GeometryCase::Sphere { .. } => ANALYTIC_TOLERANCE,
            GeometryCase::Mesh(_) => MESH_TOLERANCE,
        }
    }

    /// `σ_p(Σ)`: the smallest sum of `p` principal curvatures over `Σ`.
    pub fn sigma(&self, p: usize) -> Result<f64> {
        match self {
            GeometryCase::Sphere { n, radius } => {
                if p == 0 || p > *n {
                    return Err(BoundsError::BadDegree { p, n: *n, range: "1..=n" });
                }
                Ok(p as f64 / radius)
            }
            GeometryCase::Mesh(m) => Ok(sigma_global(&m.shapes, p)?),
        }
    }

    /// `∫_Σ ‖S‖²_q / Vol(Σ)`.
    pub fn mean_squared_norm(&self, q: usize) -> Result<f64> {
        match self {
            GeometryCase::Sphere { radius, .. } => Ok(q as f64 / (radius * radius)),
            GeometryCase::Mesh(m) => {
                let mut total = 0.0;
                for (s, w) in m.shapes.iter().zip(&m.area_weights) {
                    total += w * s_norm_p(&s.principal, q)?;
                }
                Ok(total / m.area_weights.iter().sum::<f64>())
            }
        }
    }

    /// `λ'_{1,p}`: first eigenvalue on exact p-forms.
    pub fn exact_eigenvalue(&self, p: usize) -> Result<f64> {
        match self {
            GeometryCase::Sphere { n, radius } => Ok(sphere_hodge_oracle(*n, p)?.0 / (radius * radius)),
            GeometryCase::Mesh(m) => match p {
                // exact 1-forms are differentials of eigenfunctions; exact
                // 2-forms are their Hodge duals
                1 | 2 => m
                    .functions
                    .lowest(Family::Coexact)
                    .ok_or_else(|| BoundsError::Unavailable("a positive function eigenvalue".into())),
                _ => Err(BoundsError::BadDegree { p, n: 2, range: "1..=2" }),
            },
        }
    }

    /// `λ_{1,p} = min(λ'_{1,p}, λ''_{1,p})`.
    pub fn first_eigenvalue(&self, p: usize) -> Result<f64> {
        match self {
            GeometryCase::Sphere { n, radius } => {
                let exact = self.exact_eigenvalue(p)?;
                let coexact = if p < *n {
                    sphere_hodge_oracle(*n, p + 1)?.0 / (radius * radius)
                } else {
                    f64::INFINITY
                };
                Ok(exact.min(coexact))
            }
            GeometryCase::Mesh(m) => match (p, &m.one_forms) {
                (1, Some(r)) => {
                    let exact = r.lowest(Family::Exact).unwrap_or(f64::INFINITY);
                    let coexact = r.lowest(Family::Coexact).unwrap_or(f64::INFINITY);
                    Ok(exact.min(coexact))
                }
                (1, None) => Err(BoundsError::Unavailable("the 1-form spectrum".into())),
                _ => self.exact_eigenvalue(p),
            },
        }
    }

    /// `b_p(Σ)` when known.
    pub fn betti(&self, p: usize) -> Option<usize> {
        match self {
            GeometryCase::Sphere { n, .. } => Some(usize::from(p == 0 || p == *n)),
            GeometryCase::Mesh(m) => match p {
                0 | 2 => Some(m.components),
                1 => m.genus.map(|g| 2 * g),
                _ => Some(0),
            },
        }
    }

    fn require_betti(&self, p: usize) -> Result<usize> {
        self.betti(p).ok_or_else(|| BoundsError::MissingTopology {
            geometry: self.label(),
            degree: p,
        })
    }

    pub fn area(&self) -> f64 {
        match self {
            GeometryCase::Sphere { n, radius } => unit_sphere_area(*n) * radius.powi(*n as i32),
            GeometryCase::Mesh(m) => m.area,
        }
    }

    pub fn enclosed_volume(&self) -> f64 {
        match self {
            GeometryCase::Sphere { n, radius } => {
                unit_sphere_area(*n) / (*n + 1) as f64 * radius.powi(*n as i32 + 1)
            }
            GeometryCase::Mesh(m) => m.enclosed_volume,
        }
    }
}

fn check_lower_range(n: usize, p: usize) -> Result<()> {
    if p == 0 || 2 * p > n + 1 {
        return Err(BoundsError::BadDegree { p, n, range: "1..=(n+1)/2" });
    }
    Ok(())
}

/// Right side `σ_p σ_{n-p+1}` of the lower bound.
pub fn main_lower_bound_rhs(case: &GeometryCase, p: usize) -> Result<f64> {
    let n = case.n();
    Ok(case.sigma(p)? * case.sigma(n + 1 - p)?)
}

/// The same right side written from the dual degree `q = n-p+1`.
pub fn main_lower_bound_rhs_dual(case: &GeometryCase, p: usize) -> Result<f64> {
    let n = case.n();
    let q = n + 1 - p;
    Ok(case.sigma(n + 1 - q)? * case.sigma(q)?)
}

/// `λ'_{1,p}(Σ) >= σ_p(Σ) σ_{n-p+1}(Σ)` for `1 <= p <= (n+1)/2`; needs
/// `σ_p > 0`. The ambient Bochner term is non-negative in Euclidean space.
pub fn main_lower_bound(case: &GeometryCase, p: usize) -> Result<BoundVerdict> {
    let n = case.n();
    check_lower_range(n, p)?;
    let sigma_p = case.sigma(p)?;
    let v = BoundVerdict::at_least(
        "main_lower_bound",
        "λ'_{1,p} >= σ_p · σ_{n-p+1}",
        &case.label(),
        Some(p),
        case.exact_eigenvalue(p)?,
        main_lower_bound_rhs(case, p)?,
        case.tolerance(),
    );
    if sigma_p <= 0.0 {
        return Ok(v.inapplicable(format!("σ_{p} = {sigma_p:e} is not positive")));
    }
    Ok(v)
}

/// `λ₁(Σ) >= n c²` with `c > 0` the smallest principal curvature.
pub fn xia_bound(case: &GeometryCase) -> Result<BoundVerdict> {
    let n = case.n();
    let c = case.sigma(1)?;
    let v = BoundVerdict::at_least(
        "xia_bound",
        "λ_1 >= n c^2",
        &case.label(),
        None,
        case.exact_eigenvalue(1)?,
        n as f64 * c * c,
        case.tolerance(),
    );
    if c <= 0.0 {
        return Ok(v.inapplicable(format!("smallest principal curvature {c:e} is not positive")));
    }
    Ok(v)
}

/// `λ₁(Σ) <= n ∫‖S‖² / Vol(Σ)`, valid when `b₁(Σ) = 0` (a Euclidean domain
/// always carries parallel 1-forms).
pub fn upper_bound_degree_one(case: &GeometryCase) -> Result<BoundVerdict> {
    let n = case.n();
    let b1 = case.require_betti(1)?;
    let v = BoundVerdict::at_most(
        "upper_bound_degree_one",
        "λ_1 <= n ∫‖S‖² / Vol(Σ)",
        &case.label(),
        None,
        case.exact_eigenvalue(1)?,
        n as f64 * case.mean_squared_norm(n)?,
        case.tolerance(),
    );
    if b1 != 0 {
        return Ok(v.inapplicable(format!(
            "b_1 = {b1}: the bound needs H^1(Σ) = 0"
        )));
    }
    Ok(v)
}

/// `α(p) = max(p, n-p+1)`.
pub fn alpha(n: usize, p: usize) -> usize {
    p.max(n + 1 - p)
}

/// `c(n,p) = max(p(n-p), (p-1)(n-p+1)) / n`, the constant for minimal
/// hypersurfaces.
pub fn minimal_constant(n: usize, p: usize) -> f64 {
    (p * (n - p)).max((p - 1) * (n + 1 - p)) as f64 / n as f64
}

/// `λ'_{1,p}(Σ) <= α(p) ∫‖S‖²_{α(p)} / Vol(Σ)` for `2 <= p <= n-1` with
/// `b_p = b_{n-p+1} = 0`.
pub fn upper_bound_degree_p(case: &GeometryCase, p: usize) -> Result<BoundVerdict> {
    let n = case.n();
    if p < 2 || p + 1 > n {
        return Err(BoundsError::BadDegree { p, n, range: "2..=n-1" });
    }
    let a = alpha(n, p);
    let (bp, bq) = (case.require_betti(p)?, case.require_betti(n + 1 - p)?);
    let v = BoundVerdict::at_most(
        "upper_bound_degree_p",
        "λ'_{1,p} <= α(p) ∫‖S‖²_{α(p)} / Vol(Σ)",
        &case.label(),
        Some(p),
        case.exact_eigenvalue(p)?,
        a as f64 * case.mean_squared_norm(a)?,
        case.tolerance(),
    );
    if bp != 0 || bq != 0 {
        return Ok(v.inapplicable(format!("b_{p} = {bp}, b_{} = {bq}", n + 1 - p)));
    }
    Ok(v)
}

/// Eigenvalue `c(p+1)(n-p)` of a special Killing p-form with number `c`,
/// compared with the first coexact eigenvalue of the sphere of radius
/// `c^(-1/2)`, where such forms exist (equality expected).
pub fn special_killing_relation(c: f64, p: usize, n: usize) -> Result<(f64, BoundVerdict)> {
    if c < 0.0 {
        return Err(BoundsError::NegativeConstant(c));
    }
    if p + 1 > n {
        return Err(BoundsError::BadDegree { p, n, range: "0..=n-1" });
    }
    let value = c * ((p + 1) * (n - p)) as f64;
    let label = if c > 0.0 {
        format!("sphere(n={n}, r={})", 1.0 / c.sqrt())
    } else {
        "none".to_string()
    };
    // coexact p-forms pair with exact (p+1)-forms
    let coexact = sphere_hodge_oracle(n, p + 1)?.0 * c;
    let v = BoundVerdict::at_most(
        "special_killing_relation",
        "λ''_{1,p} <= c (p+1)(n-p)",
        &label,
        Some(p),
        coexact,
        value,
        ANALYTIC_TOLERANCE,
    );
    if c == 0.0 {
        return Ok((value, v.inapplicable("c = 0: no compact model carries such a form")));
    }
    Ok((value, v))
}

/// Largest residuals of the parallel-form restriction identities over
/// `samples` random points of a round sphere.
pub fn parallel_restriction_check<R: rand::Rng>(
    surface: &AnalyticSurface,
    xi: &AlternatingForm,
    samples: usize,
    rng: &mut R,
) -> Result<IdentityResiduals> {
    let points = surface.sample_points(samples, rng);
    let mut worst = IdentityResiduals {
        first: 0.0,
        second: 0.0,
        scale: 0.0,
    };
    for x in points {
        let r = check_parallel_restriction(surface, &x, xi)?;
        worst.first = worst.first.max(r.first);
        worst.second = worst.second.max(r.second);
        worst.scale = worst.scale.max(r.scale);
    }
    Ok(worst)
}

/// Ball of radius `radius` in `ℝⁿ⁺¹`, closed-form or meshed.
#[derive(Debug, Clone, Copy)]
pub enum BallCase<'a> {
    Analytic { n: usize, radius: f64 },
    Mesh { mesh: &'a MeshComplex, radius: f64 },
}

/// Volume relations that hold in the equality case of the lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityDiagnostics {
    pub p: usize,
    pub boundary_volume: f64,
    pub volume: f64,
    /// `Vol(Σ)/Vol(Ω)`.
    pub volume_ratio: f64,
    /// `σ_p + σ_{n-p+1}`, which the ratio must equal.
    pub curvature_sum: f64,
    pub ratio_gap: f64,
    /// `H` against `Vol(Σ) / ((n+1) Vol(Ω))`.
    pub mean_curvature: f64,
    pub mean_curvature_gap: f64,
    /// `σ_p Vol(Σ) / (λ'_{1,p} + σ_p²)`, which must equal `Vol(Ω)`.
    pub predicted_volume: f64,
    pub volume_gap: f64,
}

pub fn equality_case_diagnostics(ball: BallCase<'_>, p: usize) -> Result<EqualityDiagnostics> {
    let (n, radius, area, volume) = match ball {
        BallCase::Analytic { n, radius } => {
            let s = GeometryCase::sphere(n, radius);
            (n, radius, s.area(), s.enclosed_volume())
        }
        BallCase::Mesh { mesh, radius } => {
            if mesh.is_surface() {
                return Err(BoundsError::Mesh(MeshError::WrongKind { expected: "solid" }));
            }
            (2, radius, mesh.boundary_surface()?.0.area(), mesh.volume())
        }
    };
    check_lower_range(n, p)?;
    let sphere = GeometryCase::sphere(n, radius);
    let sigma_p = sphere.sigma(p)?;
    let sum = sigma_p + sphere.sigma(n + 1 - p)?;
    let h = 1.0 / radius;
    let ratio = area / volume;
    let lambda = sphere.exact_eigenvalue(p)?;
    let predicted = sigma_p * area / (lambda + sigma_p * sigma_p);
    Ok(EqualityDiagnostics {
        p,
        boundary_volume: area,
        volume,
        volume_ratio: ratio,
        curvature_sum: sum,
        ratio_gap: (ratio - sum).abs() / sum,
        mean_curvature: h,
        mean_curvature_gap: (h - ratio / (n + 1) as f64).abs() / h,
        predicted_volume: predicted,
        volume_gap: (predicted - volume).abs() / volume,
    })
}

/// `(‖S^[p]φ‖², p ‖S‖²_p ‖φ‖²)`.
pub fn induced_norm_bound(s: &DMatrix<f64>, phi: &AlternatingForm) -> Result<(f64, f64)> {
    let p = phi.degree();
    let lhs = induced_endomorphism(s, p)?.apply(phi)?.norm_squared();
    if p == 0 {
        return Ok((lhs, 0.0));
    }
    let eta = s.clone().symmetric_eigen().eigenvalues;
    let rhs = p as f64 * s_norm_p(eta.as_slice(), p)? * phi.norm_squared();
    Ok((lhs, rhs))
}

/// `(‖S^[p]φ‖², p(n-p)/n ‖S‖² ‖φ‖²)` for trace-free `S`.
pub fn trace_free_norm_bound(s: &DMatrix<f64>, phi: &AlternatingForm) -> Result<(f64, f64)> {
    let n = s.nrows();
    let p = phi.degree();
    let lhs = induced_endomorphism(s, p)?.apply(phi)?.norm_squared();
    let rhs = (p * (n - p)) as f64 / n as f64 * s.norm_squared() * phi.norm_squared();
    Ok((lhs, rhs))
}

/// Inequality selector for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    MainLowerBound,
    XiaBound,
    UpperBoundDegreeOne,
    UpperBoundDegreeP,
    SpecialKillingRelation,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::MainLowerBound,
        Theorem::XiaBound,
        Theorem::UpperBoundDegreeOne,
        Theorem::UpperBoundDegreeP,
        Theorem::SpecialKillingRelation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::MainLowerBound => "main_lower_bound",
            Theorem::XiaBound => "xia_bound",
            Theorem::UpperBoundDegreeOne => "upper_bound_degree_one",
            Theorem::UpperBoundDegreeP => "upper_bound_degree_p",
            Theorem::SpecialKillingRelation => "special_killing_relation",
        }
    }

    /// Short aliases accepted besides the full names.
    pub fn alias(self) -> &'static str {
        match self {
            Theorem::MainLowerBound => "main",
            Theorem::XiaBound => "xia",
            Theorem::UpperBoundDegreeOne => "upper-one",
            Theorem::UpperBoundDegreeP => "upper-p",
            Theorem::SpecialKillingRelation => "killing",
        }
    }
}

impl std::str::FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s || t.alias() == s || (s == "boundpi" && *t == Theorem::UpperBoundDegreeP))
            .ok_or_else(|| {
                let names: Vec<String> = Theorem::ALL.iter().map(|t| format!("{} ({})", t.name(), t.alias())).collect();
                format!("unknown theorem `{s}`; known: {}", names.join(", "))
            })
    }
}

/// Evaluates `theorems` on `case` at every admissible degree, or only at
/// `only_p` when given. Degree-free inequalities ignore `only_p`. The Killing
/// relation only applies to spheres, with `c = 1/r²`.
pub fn evaluate_theorems(case: &GeometryCase, theorems: &[Theorem], only_p: Option<usize>) -> Result<Vec<BoundVerdict>> {
    let n = case.n();
    let degrees = |range: std::ops::RangeInclusive<usize>| -> Vec<usize> {
        match only_p {
            Some(p) => range.contains(&p).then_some(p).into_iter().collect(),
            None => range.collect(),
        }
    };
    let mut out = Vec::new();
    for &t in theorems {
        match t {
            Theorem::MainLowerBound => {
                for p in degrees(1..=(n + 1) / 2) {
                    out.push(main_lower_bound(case, p)?);
                }
            }
            Theorem::XiaBound => out.push(xia_bound(case)?),
            Theorem::UpperBoundDegreeOne => out.push(upper_bound_degree_one(case)?),
            Theorem::UpperBoundDegreeP => {
                if n >= 3 {
                    for p in degrees(2..=n - 1) {
                        out.push(upper_bound_degree_p(case, p)?);
                    }
                }
            }
            Theorem::SpecialKillingRelation => {
                if let GeometryCase::Sphere { radius, .. } = case {
                    for p in degrees(0..=n - 1) {
                        out.push(special_killing_relation(1.0 / (radius * radius), p, n)?.1);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Every closed-form check on round spheres of dimension `1..=max_n`.
pub fn sphere_suite(max_n: usize, radii: &[f64]) -> Result<Vec<BoundVerdict>> {
    sphere_sweep(max_n, radii, &Theorem::ALL, None)
}

/// Parallel sweep of `theorems` over spheres of dimension `1..=max_n`.
pub fn sphere_sweep(max_n: usize, radii: &[f64], theorems: &[Theorem], only_p: Option<usize>) -> Result<Vec<BoundVerdict>> {
    let cases: Vec<GeometryCase> = (1..=max_n)
        .flat_map(|n| radii.iter().map(move |&r| GeometryCase::sphere(n, r)))
        .collect();
    let per_case: Vec<Vec<BoundVerdict>> = cases
        .par_iter()
        .map(|c| evaluate_theorems(c, theorems, only_p))
        .collect::<Result<_>>()?;
    Ok(per_case.into_iter().flatten().collect())
}

/// Semi-axes of the convex ellipsoids used for mesh sweeps.
pub const ELLIPSOID_FAMILY: [[f64; 3]; 5] = [
    [1.0, 1.0, 1.2],
    [1.0, 1.0, 0.8],
    [1.0, 1.1, 1.25],
    [1.2, 1.0, 0.9],
    [0.9, 1.0, 1.1],
];

/// Mesh cases for [`ELLIPSOID_FAMILY`] at the given subdivision level.
pub fn ellipsoid_cases(subdivisions: usize, opts: &SpectrumOptions) -> Result<Vec<GeometryCase>> {
    ELLIPSOID_FAMILY
        .iter()
        .map(|&[a, b, c]| {
            let mesh = generate_ellipsoid(a, b, c, subdivisions);
            let label = format!("ellipsoid({a},{b},{c};s={subdivisions})");
            Ok(GeometryCase::Mesh(Box::new(MeshCase::build(label, &mesh, opts, false)?)))
        })
        .collect()
}

/// Mesh checks that apply to closed surfaces in `ℝ³`.
pub fn mesh_suite(case: &GeometryCase) -> Result<Vec<BoundVerdict>> {
    Ok(vec![main_lower_bound(case, 1)?, xia_bound(case)?, upper_bound_degree_one(case)?])
}

pub fn verdicts_to_json(verdicts: &[BoundVerdict]) -> String {
    serde_json::to_string_pretty(verdicts).expect("verdicts serialize")
}

/// One line per verdict: bound, geometry, p, state, lhs, rhs, tightness.
pub fn summary_table(verdicts: &[BoundVerdict]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<26} {:<32} {:>2} {:<12} {:>14} {:>14} {:>10}",
        "bound", "geometry", "p", "state", "lhs", "rhs", "tightness"
    );
    for v in verdicts {
        let state = match v.state {
            VerdictState::Satisfied => "satisfied",
            VerdictState::Violated => "VIOLATED",
            VerdictState::Inapplicable => "inapplicable",
        };
        let p = v.p.map_or("-".to_string(), |p| p.to_string());
        let _ = writeln!(
            out,
            "{:<26} {:<32} {:>2} {:<12} {:>14.8} {:>14.8} {:>10.2e}",
            v.name, v.geometry, p, state, v.lhs, v.rhs, v.tightness
        );
    }
    out
}
