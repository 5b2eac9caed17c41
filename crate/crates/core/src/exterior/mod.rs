//! Finite-dimensional exterior algebra over an oriented inner-product space.
//!
//! Forms are stored by their coefficients in an orthonormal frame, indexed by
//! strictly increasing multi-indices in lexicographic order. The Hodge star
//! follows `e_I ∧ ⋆e_I = e_1 ∧ ... ∧ e_dim`.

pub mod multi_index;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use multi_index::binomial;

/// Tolerance used by the exact-algebra identities.
pub const ALGEBRA_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExteriorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("interior product of a degree-0 form is undefined")]
    ZeroDegreeContraction,
    #[error("base endomorphism is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("base endomorphism must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("normal vector has norm {norm}, expected 1")]
    NonUnitNormal { norm: f64 },
    #[error("invalid multi-index {indices:?} for dimension {dim}")]
    InvalidIndex { indices: Vec<usize>, dim: usize },
    #[error("tangent frame is not orthonormal and orthogonal to the normal")]
    BadFrame,
}

pub type Result<T> = std::result::Result<T, ExteriorError>;

/// A p-form on a `dim`-dimensional inner-product space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawForm", into = "RawForm")]
pub struct AlternatingForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<RawForm> for AlternatingForm {
    type Error = ExteriorError;
    fn try_from(raw: RawForm) -> Result<Self> {
        AlternatingForm::new(raw.dim, raw.degree, raw.coeffs)
    }
}

impl From<AlternatingForm> for RawForm {
    fn from(f: AlternatingForm) -> Self {
        RawForm {
            dim: f.dim,
            degree: f.degree,
            coeffs: f.coeffs,
        }
    }
}

impl AlternatingForm {
    pub fn new(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if degree > dim {
            return Err(ExteriorError::DegreeOverflow { degree, dim });
        }
        let expected = binomial(dim, degree);
        if coeffs.len() != expected {
            return Err(ExteriorError::CoefficientCount {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { dim, degree, coeffs })
    }

    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        Self::new(dim, degree, vec![0.0; binomial(dim, degree)])
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Self {
            dim,
            degree: 0,
            coeffs: vec![value],
        }
    }

    /// The 1-form `v*` dual to a vector.
    pub fn covector(v: &[f64]) -> Self {
        Self {
            dim: v.len(),
            degree: 1,
            coeffs: v.to_vec(),
        }
    }

    /// The basis form `e_{i_1} ∧ ... ∧ e_{i_p}` for a strictly increasing multi-index.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let valid = indices.windows(2).all(|w| w[0] < w[1]) && indices.iter().all(|&i| i < dim);
        if !valid {
            return Err(ExteriorError::InvalidIndex {
                indices: indices.to_vec(),
                dim,
            });
        }
        let mut f = Self::zero(dim, indices.len())?;
        f.coeffs[multi_index::rank(dim, indices)] = 1.0;
        Ok(f)
    }

    /// The volume form `e_1 ∧ ... ∧ e_dim`.
    pub fn volume(dim: usize) -> Self {
        Self {
            dim,
            degree: dim,
            coeffs: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient on a strictly increasing multi-index.
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        self.coeffs[multi_index::rank(self.dim, indices)]
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        Ok(out)
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(ExteriorError::DimensionMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    /// Iterates `(multi_index, coefficient)` over the lexicographic basis.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        multi_index::all(self.dim, self.degree)
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(ExteriorError::DegreeOverflow {
                degree,
                dim: self.dim,
            });
        }
        let mut out = Self::zero(self.dim, degree)?;
        let right: Vec<_> = other.terms().filter(|(_, c)| *c != 0.0).collect();
        for (i, a) in self.terms() {
            if a == 0.0 {
                continue;
            }
            for (j, b) in &right {
                let mut merged: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
                if let Some(sign) = multi_index::sort_with_sign(&mut merged) {
                    out.coeffs[multi_index::rank(self.dim, &merged)] += sign * a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn hodge_star(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zero(n, n - self.degree).expect("complementary degree is valid");
        for (i, a) in self.terms() {
            let (target, sign) = star_of_basis(n, &i);
            out.coeffs[multi_index::rank(n, &target)] += sign * a;
        }
        out
    }

    /// Interior product `i_v self`.
    pub fn interior_product(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(ExteriorError::DimensionMismatch {
                left: v.len(),
                right: self.dim,
            });
        }
        if self.degree == 0 {
            return Err(ExteriorError::ZeroDegreeContraction);
        }
        let mut out = Self::zero(self.dim, self.degree - 1)?;
        for (i, a) in self.terms() {
            if a == 0.0 {
                continue;
            }
            for (slot, &k) in i.iter().enumerate() {
                let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
                let mut rest = i.clone();
                rest.remove(slot);
                out.coeffs[multi_index::rank(self.dim, &rest)] += sign * v[k] * a;
            }
        }
        Ok(out)
    }

    /// Evaluates the form on `degree` vectors.
    pub fn evaluate(&self, vectors: &[&[f64]]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(ExteriorError::DimensionMismatch {
                left: vectors.len(),
                right: self.degree,
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
            return Err(ExteriorError::DimensionMismatch {
                left: v.len(),
                right: self.dim,
            });
        }
        let p = self.degree;
        let mut total = 0.0;
        for (i, a) in self.terms() {
            if a == 0.0 {
                continue;
            }
            let minor = DMatrix::from_fn(p, p, |r, c| vectors[c][i[r]]);
            total += a * minor.determinant();
        }
        Ok(total)
    }

    /// Pull back along the linear map sending `e_k` of an `m`-space to `frame[k]`,
    /// i.e. the form `(X_1..X_p) ↦ self(frame X_1, ..., frame X_p)`.
    pub fn pullback(&self, frame: &[Vec<f64>]) -> Result<Self> {
        let m = frame.len();
        if self.degree > m {
            return Err(ExteriorError::DegreeOverflow {
                degree: self.degree,
                dim: m,
            });
        }
        let mut out = Self::zero(m, self.degree)?;
        for (r, k) in multi_index::all(m, self.degree).iter().enumerate() {
            let vecs: Vec<&[f64]> = k.iter().map(|&j| frame[j].as_slice()).collect();
            out.coeffs[r] = self.evaluate(&vecs)?;
        }
        Ok(out)
    }

    /// Push forward a form on an `m`-space into the ambient space through an
    /// orthonormal frame: the unique form vanishing on the frame's orthogonal
    /// complement whose pullback is `self`.
    pub fn push_forward(&self, frame: &[Vec<f64>], ambient_dim: usize) -> Result<Self> {
        if frame.len() != self.dim {
            return Err(ExteriorError::DimensionMismatch {
                left: frame.len(),
                right: self.dim,
            });
        }
        let covectors: Vec<Self> = frame.iter().map(|v| Self::covector(v)).collect();
        let mut out = Self::zero(ambient_dim, self.degree)?;
        for (k, a) in self.terms() {
            if a == 0.0 {
                continue;
            }
            let mut term = Self::scalar(ambient_dim, a);
            for &j in &k {
                term = term.wedge(&covectors[j])?;
            }
            out = out.add_scaled(1.0, &term)?;
        }
        Ok(out)
    }
}

impl Add for &AlternatingForm {
    type Output = AlternatingForm;
    fn add(self, rhs: Self) -> AlternatingForm {
        self.add_scaled(1.0, rhs).expect("forms live in the same space")
    }
}

impl Sub for &AlternatingForm {
    type Output = AlternatingForm;
    fn sub(self, rhs: Self) -> AlternatingForm {
        self.add_scaled(-1.0, rhs).expect("forms live in the same space")
    }
}

impl Mul<f64> for &AlternatingForm {
    type Output = AlternatingForm;
    fn mul(self, rhs: f64) -> AlternatingForm {
        self.scaled(rhs)
    }
}

impl Neg for &AlternatingForm {
    type Output = AlternatingForm;
    fn neg(self) -> AlternatingForm {
        self.scaled(-1.0)
    }
}

/// `⋆e_I = sign(I, I^c) e_{I^c}`.
fn star_of_basis(n: usize, indices: &[usize]) -> (Vec<usize>, f64) {
    let comp = multi_index::complement(n, indices);
    let mut perm: Vec<usize> = indices.iter().chain(comp.iter()).copied().collect();
    let sign = multi_index::sort_with_sign(&mut perm).expect("disjoint by construction");
    (comp, sign)
}

/// Matrix of the Hodge star `Λ^p → Λ^{dim-p}` in lexicographic bases.
pub fn hodge_star_matrix(dim: usize, p: usize) -> Result<DMatrix<f64>> {
    if p > dim {
        return Err(ExteriorError::DegreeOverflow { degree: p, dim });
    }
    let mut m = DMatrix::zeros(binomial(dim, dim - p), binomial(dim, p));
    for (col, i) in multi_index::all(dim, p).iter().enumerate() {
        let (target, sign) = star_of_basis(dim, i);
        m[(multi_index::rank(dim, &target), col)] = sign;
    }
    Ok(m)
}

/// Sign `(-1)^{p(dim-p)}` of `⋆⋆` on p-forms.
pub fn double_star_sign(dim: usize, p: usize) -> f64 {
    if (p * (dim - p)) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The derivation extension of a symmetric endomorphism to `Λ^p`:
/// `(A^[p] ω)(X_1..X_p) = Σ_j ω(X_1, .., A X_j, .., X_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedEndomorphism {
    base: DMatrix<f64>,
    degree: usize,
    matrix: DMatrix<f64>,
}

impl InducedEndomorphism {
    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn apply(&self, form: &AlternatingForm) -> Result<AlternatingForm> {
        if form.dim() != self.dim() || form.degree() != self.degree {
            return Err(ExteriorError::DimensionMismatch {
                left: form.degree(),
                right: self.degree,
            });
        }
        let v = nalgebra::DVector::from_column_slice(form.coeffs());
        let out = &self.matrix * v;
        AlternatingForm::new(self.dim(), self.degree, out.as_slice().to_vec())
    }

    /// `⟨A^[p] ω, ω⟩`.
    pub fn quadratic_form(&self, form: &AlternatingForm) -> Result<f64> {
        self.apply(form)?.dot(form)
    }

    /// Eigenvalues in ascending order.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Largest absolute entry of `A - Aᵀ`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn induced_endomorphism(base: &DMatrix<f64>, p: usize) -> Result<InducedEndomorphism> {
    let (rows, cols) = base.shape();
    if rows != cols {
        return Err(ExteriorError::NotSquare { rows, cols });
    }
    let n = rows;
    if p > n {
        return Err(ExteriorError::DegreeOverflow { degree: p, dim: n });
    }
    let scale = base.amax().max(1.0);
    let asym = asymmetry(base);
    if asym > 1e-12 * scale {
        return Err(ExteriorError::NotSymmetric { asymmetry: asym });
    }
    let size = binomial(n, p);
    let mut matrix = DMatrix::zeros(size, size);
    if p > 0 {
        // (A^[p] ω)_J = Σ_slots Σ_k A[k][J_slot] ω(J with slot replaced by k)
        for (row, j) in multi_index::all(n, p).iter().enumerate() {
            for slot in 0..p {
                for k in 0..n {
                    let a = base[(k, j[slot])];
                    if a == 0.0 {
                        continue;
                    }
                    let mut replaced = j.clone();
                    replaced[slot] = k;
                    if let Some(sign) = multi_index::sort_with_sign(&mut replaced) {
                        matrix[(row, multi_index::rank(n, &replaced))] += sign * a;
                    }
                }
            }
        }
    }
    Ok(InducedEndomorphism {
        base: base.clone(),
        degree: p,
        matrix,
    })
}

/// Tangential restriction and normal contraction of a form at a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitForm {
    /// `J*ω` in the tangent frame; `None` when the degree exceeds the tangent
    /// dimension (the restriction is then identically zero).
    pub tangential: Option<AlternatingForm>,
    /// `i_N ω` in the tangent frame; `None` for 0-forms.
    pub normal: Option<AlternatingForm>,
}

/// An orthonormal basis `t_1..t_{dim-1}` of the complement of a unit vector,
/// oriented so that `(t_1, .., t_{dim-1}, normal)` is positive.
pub fn tangent_frame(normal: &[f64]) -> Result<Vec<Vec<f64>>> {
    let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(ExteriorError::NonUnitNormal { norm });
    }
    let dim = normal.len();
    // Householder reflection exchanging the last axis with ±normal
    let last = dim - 1;
    let s = if normal[last] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = normal.to_vec();
    v[last] += s;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut frame: Vec<Vec<f64>> = (0..last)
        .map(|k| {
            (0..dim)
                .map(|i| {
                    let e = if i == k { 1.0 } else { 0.0 };
                    e - 2.0 * v[i] * v[k] / vv
                })
                .collect()
        })
        .collect();
    let mut cols: Vec<Vec<f64>> = frame.clone();
    cols.push(normal.to_vec());
    let det = DMatrix::from_fn(dim, dim, |r, c| cols[c][r]).determinant();
    if det < 0.0 && !frame.is_empty() {
        for x in frame[0].iter_mut() {
            *x = -*x;
        }
    }
    Ok(frame)
}

/// Splits `form` at a boundary point with unit normal `normal`, using the
/// frame from [`tangent_frame`].
pub fn split_at_boundary(form: &AlternatingForm, normal: &[f64]) -> Result<SplitForm> {
    let frame = tangent_frame(normal)?;
    split_with_frame(form, normal, &frame)
}

/// Splits `form` using a caller-supplied orthonormal tangent frame.
pub fn split_with_frame(
    form: &AlternatingForm,
    normal: &[f64],
    frame: &[Vec<f64>],
) -> Result<SplitForm> {
    if normal.len() != form.dim() {
        return Err(ExteriorError::DimensionMismatch {
            left: normal.len(),
            right: form.dim(),
        });
    }
    let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(ExteriorError::NonUnitNormal { norm });
    }
    check_frame(normal, frame)?;
    let tangential = if form.degree() > frame.len() {
        None
    } else {
        Some(form.pullback(frame)?)
    };
    let normal_part = if form.degree() == 0 {
        None
    } else {
        Some(form.interior_product(normal)?.pullback(frame)?)
    };
    Ok(SplitForm {
        tangential,
        normal: normal_part,
    })
}

impl SplitForm {
    pub fn tangential_norm_squared(&self) -> f64 {
        self.tangential.as_ref().map_or(0.0, AlternatingForm::norm_squared)
    }

    pub fn normal_norm_squared(&self) -> f64 {
        self.normal.as_ref().map_or(0.0, AlternatingForm::norm_squared)
    }
}

fn check_frame(normal: &[f64], frame: &[Vec<f64>]) -> Result<()> {
    let dim = normal.len();
    if frame.len() + 1 != dim || frame.iter().any(|t| t.len() != dim) {
        return Err(ExteriorError::BadFrame);
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for (i, t) in frame.iter().enumerate() {
        if dot(t, normal).abs() > 1e-10 {
            return Err(ExteriorError::BadFrame);
        }
        for (j, u) in frame.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (dot(t, u) - expect).abs() > 1e-10 {
                return Err(ExteriorError::BadFrame);
            }
        }
    }
    Ok(())
}

/// Operator-norm residual of `⋆ S^[p] + S^[n-p] ⋆ - tr(S) ⋆` on `Λ^p`.
pub fn duality_identity_residual(s: &DMatrix<f64>, p: usize) -> Result<f64> {
    let n = s.nrows();
    let star = hodge_star_matrix(n, p)?;
    let sp = induced_endomorphism(s, p)?;
    let sq = induced_endomorphism(s, n - p)?;
    let defect = &star * sp.matrix() + sq.matrix() * &star - &star * s.trace();
    Ok(operator_norm(&defect))
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(dim: usize, idx: &[usize]) -> AlternatingForm {
        AlternatingForm::basis(dim, idx).unwrap()
    }

    #[test]
    fn wedge_basis_cases() {
        assert_eq!(e(3, &[0]).wedge(&e(3, &[1])).unwrap(), e(3, &[0, 1]));
        assert_eq!(e(3, &[1]).wedge(&e(3, &[0])).unwrap(), -&e(3, &[0, 1]));
        assert_eq!(e(3, &[0]).wedge(&e(3, &[0])).unwrap().norm(), 0.0);
        let sum = &e(3, &[0]) + &e(3, &[1]);
        assert_eq!(sum.wedge(&e(3, &[1])).unwrap(), e(3, &[0, 1]));
    }

    #[test]
    fn wedge_errors() {
        assert!(matches!(
            e(3, &[0]).wedge(&e(2, &[0])),
            Err(ExteriorError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            e(3, &[0, 1]).wedge(&e(3, &[1, 2])),
            Err(ExteriorError::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn star_conventions() {
        assert_eq!(e(3, &[0]).hodge_star(), e(3, &[1, 2]));
        assert_eq!(e(3, &[1]).hodge_star(), -&e(3, &[0, 2]));
        assert_eq!(e(2, &[0]).hodge_star().hodge_star(), -&e(2, &[0]));
        assert_eq!(AlternatingForm::scalar(4, 2.0).hodge_star(), AlternatingForm::volume(4).scaled(2.0));
        // e_I ∧ ⋆e_I = vol for every basis element
        for dim in 1..=5 {
            for p in 0..=dim {
                for idx in multi_index::all(dim, p) {
                    let b = e(dim, &idx);
                    assert_eq!(b.wedge(&b.hodge_star()).unwrap(), AlternatingForm::volume(dim));
                }
            }
        }
    }

    #[test]
    fn interior_basis_cases() {
        assert_eq!(e(2, &[0, 1]).interior_product(&[1.0, 0.0]).unwrap(), e(2, &[1]));
        assert_eq!(e(2, &[0, 1]).interior_product(&[0.0, 1.0]).unwrap(), -&e(2, &[0]));
        assert_eq!(
            AlternatingForm::scalar(3, 1.0).interior_product(&[1.0, 0.0, 0.0]),
            Err(ExteriorError::ZeroDegreeContraction)
        );
    }

    #[test]
    fn induced_examples() {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let s2 = induced_endomorphism(&s, 2).unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 4.0, 5.0]));
        assert_eq!(s2.matrix(), &expect);
        let s3 = induced_endomorphism(&s, 3).unwrap();
        assert_eq!(s3.matrix()[(0, 0)], 6.0);
        let s0 = induced_endomorphism(&s, 0).unwrap();
        assert_eq!(s0.matrix(), &DMatrix::zeros(1, 1));
        let off = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(induced_endomorphism(&off, 2).unwrap().matrix()[(0, 0)], 0.0);
    }

    #[test]
    fn induced_rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            induced_endomorphism(&a, 1),
            Err(ExteriorError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn split_examples() {
        let s = split_at_boundary(&e(3, &[0]), &[1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.tangential_norm_squared(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.normal.unwrap().coeffs()[0].abs(), 1.0, epsilon = 1e-15);

        let s = split_at_boundary(&e(3, &[0, 1]), &[0.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s.tangential_norm_squared(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.normal_norm_squared(), 0.0, epsilon = 1e-15);

        let top = split_at_boundary(&AlternatingForm::volume(3), &[0.0, 0.0, 1.0]).unwrap();
        assert!(top.tangential.is_none());
        assert_abs_diff_eq!(top.normal_norm_squared(), 1.0, epsilon = 1e-15);

        assert!(matches!(
            split_at_boundary(&e(3, &[0]), &[2.0, 0.0, 0.0]),
            Err(ExteriorError::NonUnitNormal { .. })
        ));
    }

    #[test]
    fn frame_is_positively_oriented() {
        for normal in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.6, 0.0, 0.8], [0.0, -0.6, -0.8]] {
            let frame = tangent_frame(&normal).unwrap();
            let m = DMatrix::from_fn(3, 3, |r, c| if c < 2 { frame[c][r] } else { normal[r] });
            assert_abs_diff_eq!(m.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn duality_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(duality_identity_residual(&id, 1).unwrap() < 1e-15);
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(duality_identity_residual(&s, 1).unwrap() <= 1e-12);
    }

    #[test]
    fn push_forward_inverts_pullback() {
        let normal = [0.0, 0.6, 0.8];
        let frame = tangent_frame(&normal).unwrap();
        let f = AlternatingForm::new(2, 1, vec![0.3, -1.2]).unwrap();
        let amb = f.push_forward(&frame, 3).unwrap();
        let back = amb.pullback(&frame).unwrap();
        assert_abs_diff_eq!((&back - &f).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(amb.interior_product(&normal).unwrap().norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn json_roundtrip_validates() {
        let f = AlternatingForm::new(3, 2, vec![1.0, -2.0, 0.5]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"dim":3,"degree":2,"coeffs":[1.0,-2.0,0.5]}"#);
        let back: AlternatingForm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<AlternatingForm>(r#"{"dim":3,"degree":2,"coeffs":[1.0]}"#).is_err());
    }
}
