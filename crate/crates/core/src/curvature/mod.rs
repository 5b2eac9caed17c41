//! p-curvatures, convexity predicates and curvature-term rules.

pub mod analytic;

pub use analytic::{random_unit_vector, AnalyticSurface, LocalGeometry};

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::{binomial, multi_index};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("degree {p} outside 1..={n}")]
    DegreeOutOfRange { p: usize, n: usize },
    #[error("empty sample collection")]
    EmptySamples,
    #[error("shape matrix must be square and non-empty, got {rows}x{cols}")]
    BadShapeMatrix { rows: usize, cols: usize },
    #[error("samples have mixed dimensions ({0} and {1})")]
    MixedDimensions(usize, usize),
    #[error("{term} is not available in degree {p} of a {dim}-dimensional ambient space")]
    UnsupportedTerm {
        term: &'static str,
        p: usize,
        dim: usize,
    },
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, CurvatureError>;

/// Principal curvature data at one point of a hypersurface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeData {
    /// Principal curvatures, ascending.
    pub principal: Vec<f64>,
    /// Symmetric shape operator in an orthonormal tangent frame.
    pub shape_matrix: DMatrix<f64>,
    /// `H = tr(S) / n`.
    pub mean: f64,
    /// `sigma[p-1] = η_1 + ... + η_p`.
    pub sigma: Vec<f64>,
}

impl ShapeData {
    /// Builds shape data from a shape matrix, symmetrizing it first.
    pub fn from_matrix(shape: &DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = shape.shape();
        if rows != cols || rows == 0 {
            return Err(CurvatureError::BadShapeMatrix { rows, cols });
        }
        let sym = (shape + shape.transpose()) * 0.5;
        let mut principal: Vec<f64> = sym.clone().symmetric_eigenvalues().iter().copied().collect();
        principal.sort_by(f64::total_cmp);
        Ok(Self::assemble(principal, sym))
    }

    /// Shape data of a diagonal shape operator.
    pub fn from_principal(principal: &[f64]) -> Result<Self> {
        if principal.is_empty() {
            return Err(CurvatureError::BadShapeMatrix { rows: 0, cols: 0 });
        }
        let mut sorted = principal.to_vec();
        sorted.sort_by(f64::total_cmp);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(principal));
        Ok(Self::assemble(sorted, diag))
    }

    fn assemble(principal: Vec<f64>, shape_matrix: DMatrix<f64>) -> Self {
        let n = principal.len();
        let sigma: Vec<f64> = principal
            .iter()
            .scan(0.0, |acc, &eta| {
                *acc += eta;
                Some(*acc)
            })
            .collect();
        Self {
            mean: shape_matrix.trace() / n as f64,
            principal,
            shape_matrix,
            sigma,
        }
    }

    pub fn dim(&self) -> usize {
        self.principal.len()
    }

    /// Lowest p-curvature `σ_p(x)`.
    pub fn sigma_p(&self, p: usize) -> Result<f64> {
        check_degree(p, self.dim())?;
        Ok(self.sigma[p - 1])
    }

    /// `Σ η²`, the squared norm of the shape operator.
    pub fn norm_squared(&self) -> f64 {
        self.principal.iter().map(|e| e * e).sum()
    }
}

fn check_degree(p: usize, n: usize) -> Result<()> {
    if p == 0 || p > n {
        Err(CurvatureError::DegreeOutOfRange { p, n })
    } else {
        Ok(())
    }
}

/// All p-fold sums of distinct principal curvatures, ascending.
pub fn p_curvature_list(principal: &[f64], p: usize) -> Result<Vec<f64>> {
    let n = principal.len();
    check_degree(p, n)?;
    let mut sums: Vec<f64> = multi_index::all(n, p)
        .iter()
        .map(|idx| idx.iter().map(|&i| principal[i]).sum())
        .collect();
    sums.sort_by(f64::total_cmp);
    debug_assert_eq!(sums.len(), binomial(n, p));
    Ok(sums)
}

/// `σ_p(Σ)` approximated by the minimum over the sample points.
pub fn sigma_global(samples: &[ShapeData], p: usize) -> Result<f64> {
    let first = samples.first().ok_or(CurvatureError::EmptySamples)?;
    let n = first.dim();
    let mut lowest = f64::INFINITY;
    for s in samples {
        if s.dim() != n {
            return Err(CurvatureError::MixedDimensions(n, s.dim()));
        }
        lowest = lowest.min(s.sigma_p(p)?);
    }
    Ok(lowest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convexity {
    /// `σ_p ≥ 0`.
    NonStrict,
    /// `σ_p > 0`.
    Strict,
}

pub fn is_p_convex(samples: &[ShapeData], p: usize, kind: Convexity) -> Result<bool> {
    let s = sigma_global(samples, p)?;
    Ok(match kind {
        Convexity::NonStrict => s >= 0.0,
        Convexity::Strict => s > 0.0,
    })
}

/// `‖S‖²_p`: the sum of the largest p squared principal curvatures.
pub fn s_norm_p(principal: &[f64], p: usize) -> Result<f64> {
    check_degree(p, principal.len())?;
    let mut squares: Vec<f64> = principal.iter().map(|e| e * e).collect();
    squares.sort_by(|a, b| b.total_cmp(a));
    Ok(squares[..p].iter().sum())
}

/// Lower bound `p(n+1-p)γ` for `⟨W^[p]ω, ω⟩ / ‖ω‖²` when the curvature
/// operator is bounded below by `γ`.
pub fn gallot_meyer_bound(gamma: f64, ambient_dim: usize, p: usize) -> Result<f64> {
    check_degree(p, ambient_dim.saturating_sub(1))?;
    Ok((p * (ambient_dim - p)) as f64 * gamma)
}

/// `⟨W^[m]ω, ω⟩ / ‖ω‖² = m R / (2(2m-1))` on a locally conformally flat
/// manifold of dimension `2m` with scalar curvature `R`.
pub fn bourguignon_w(scalar_curvature: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(CurvatureError::DegreeOutOfRange { p: 0, n: 0 });
    }
    Ok(m as f64 * scalar_curvature / (2 * (2 * m - 1)) as f64)
}

/// The curvature terms of the Bochner formula this crate can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureTerm {
    /// Constant sectional curvature `κ`: `W^[p] = p(n+1-p)κ` exactly.
    ConstantCurvature { kappa: f64 },
    /// Curvature operator bounded below by `γ`: a lower bound only.
    GallotMeyerLowerBound { gamma: f64 },
    /// Locally conformally flat, even dimension `2m`, degree `m` only.
    LcfMiddleDegree { scalar_curvature: f64 },
}

/// Scalar value of a curvature term on p-forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureValue {
    pub value: f64,
    /// `false` when `value` is only a lower bound for `⟨W^[p]ω,ω⟩/‖ω‖²`.
    pub exact: bool,
}

impl CurvatureTerm {
    pub fn evaluate(&self, ambient_dim: usize, p: usize) -> Result<CurvatureValue> {
        match *self {
            CurvatureTerm::ConstantCurvature { kappa } => Ok(CurvatureValue {
                value: gallot_meyer_bound(kappa, ambient_dim, p)?,
                exact: true,
            }),
            CurvatureTerm::GallotMeyerLowerBound { gamma } => Ok(CurvatureValue {
                value: gallot_meyer_bound(gamma, ambient_dim, p)?,
                exact: false,
            }),
            CurvatureTerm::LcfMiddleDegree { scalar_curvature } => {
                if ambient_dim % 2 != 0 || 2 * p != ambient_dim {
                    return Err(CurvatureError::UnsupportedTerm {
                        term: "locally conformally flat middle-degree term",
                        p,
                        dim: ambient_dim,
                    });
                }
                Ok(CurvatureValue {
                    value: bourguignon_w(scalar_curvature, p)?,
                    exact: true,
                })
            }
        }
    }
}

/// Writes one CSV row per sample: index, principal curvatures, H, σ_1..σ_n.
pub fn write_vertex_csv<W: Write>(out: W, samples: &[ShapeData]) -> Result<()> {
    let n = samples.first().map_or(0, ShapeData::dim);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["vertex".to_string()];
    header.extend((1..=n).map(|i| format!("eta{i}")));
    header.push("mean".into());
    header.extend((1..=n).map(|p| format!("sigma{p}")));
    w.write_record(&header).map_err(|e| CurvatureError::Csv(e.to_string()))?;
    for (i, s) in samples.iter().enumerate() {
        if s.dim() != n {
            return Err(CurvatureError::MixedDimensions(n, s.dim()));
        }
        let mut row = vec![i.to_string()];
        row.extend(s.principal.iter().map(|v| format!("{v:.12e}")));
        row.push(format!("{:.12e}", s.mean));
        row.extend(s.sigma.iter().map(|v| format!("{v:.12e}")));
        w.write_record(&row).map_err(|e| CurvatureError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| CurvatureError::Csv(e.to_string()))?;
    Ok(())
}
