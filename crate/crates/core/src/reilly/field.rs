//! Differential forms and functions sampled at points of Euclidean space.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{ReillyError, Result};
use crate::exterior::multi_index::binomial;
use crate::exterior::AlternatingForm;

/// Sparse multivariate polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: usize,
    /// `(coefficient, exponents)` pairs.
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(dim, c, &vec![0; dim])
    }

    /// The coordinate function `x_k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut e = vec![0; dim];
        e[k] = 1;
        Self::monomial(dim, 1.0, &e)
    }

    pub fn monomial(dim: usize, c: f64, exponents: &[u32]) -> Self {
        assert_eq!(exponents.len(), dim);
        Self {
            dim,
            terms: vec![(c, exponents.to_vec())],
        }
    }

    /// `‖x‖² / 2`.
    pub fn half_norm_squared(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for k in 0..dim {
            let mut e = vec![0; dim];
            e[k] = 2;
            p.terms.push((0.5, e));
        }
        p
    }

    /// Random polynomial of total degree at most `degree` with coefficients
    /// in `[-1, 1]`.
    pub fn random<R: Rng>(dim: usize, degree: u32, rng: &mut R) -> Self {
        let mut p = Self::zero(dim);
        let mut e = vec![0u32; dim];
        loop {
            if e.iter().sum::<u32>() <= degree {
                p.terms.push((rng.random_range(-1.0..1.0), e.clone()));
            }
            // odometer over exponent vectors
            let mut k = 0;
            while k < dim {
                e[k] += 1;
                if e[k] <= degree {
                    break;
                }
                e[k] = 0;
                k += 1;
            }
            if k == dim {
                return p;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, k: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[k] > 0)
            .map(|(c, e)| {
                let mut d = e.clone();
                d[k] -= 1;
                (c * e[k] as f64, d)
            })
            .collect();
        Self { dim: self.dim, terms }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(c, e)| (c * s, e.clone())).collect(),
        }
    }
}

/// A function on Euclidean space with optional closed-form derivatives.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
    fn name(&self) -> String;
}

impl ScalarField for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some((0..self.dim).map(|k| self.derivative(k).eval(x)).collect())
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_fn(self.dim, self.dim, |i, j| self.derivative(i).derivative(j).eval(x)))
    }

    fn name(&self) -> String {
        format!("polynomial(dim={}, degree={})", self.dim, self.total_degree())
    }
}

/// A `p`-form field on Euclidean space with optional closed-form partial
/// derivatives `∂ω/∂x_k` (the covariant derivatives along the axes).
pub trait FormField: Send + Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn value(&self, x: &[f64]) -> AlternatingForm;
    fn partials(&self, _x: &[f64]) -> Option<Vec<AlternatingForm>> {
        None
    }
    fn name(&self) -> String;
}

/// Form whose coefficients are polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<Polynomial>,
    label: String,
}

impl PolynomialForm {
    pub fn new(dim: usize, degree: usize, coeffs: Vec<Polynomial>, label: impl Into<String>) -> Result<Self> {
        if degree > dim || coeffs.len() != binomial(dim, degree) || coeffs.iter().any(|c| c.dim() != dim) {
            return Err(ReillyError::BadField(format!(
                "a {degree}-form in dimension {dim} needs {} polynomial coefficients",
                binomial(dim, degree)
            )));
        }
        Ok(Self {
            dim,
            degree,
            coeffs,
            label: label.into(),
        })
    }

    /// Constant-coefficient (parallel) form.
    pub fn parallel(form: &AlternatingForm, label: impl Into<String>) -> Self {
        let coeffs = form.coeffs().iter().map(|&c| Polynomial::constant(form.dim(), c)).collect();
        Self {
            dim: form.dim(),
            degree: form.degree(),
            coeffs,
            label: label.into(),
        }
    }

    /// The exact 1-form `df`.
    pub fn differential_of(f: &Polynomial) -> Self {
        let coeffs = (0..f.dim()).map(|k| f.derivative(k)).collect();
        Self {
            dim: f.dim(),
            degree: 1,
            coeffs,
            label: "d(polynomial)".into(),
        }
    }

    pub fn random<R: Rng>(dim: usize, degree: usize, poly_degree: u32, rng: &mut R) -> Self {
        let coeffs = (0..binomial(dim, degree))
            .map(|_| Polynomial::random(dim, poly_degree, rng))
            .collect();
        Self {
            dim,
            degree,
            coeffs,
            label: format!("random {degree}-form, coefficients of degree {poly_degree}"),
        }
    }

    pub fn coefficients(&self) -> &[Polynomial] {
        &self.coeffs
    }
}

impl FormField for PolynomialForm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn value(&self, x: &[f64]) -> AlternatingForm {
        let c = self.coeffs.iter().map(|p| p.eval(x)).collect();
        AlternatingForm::new(self.dim, self.degree, c).expect("coefficient count checked at construction")
    }

    fn partials(&self, x: &[f64]) -> Option<Vec<AlternatingForm>> {
        Some(
            (0..self.dim)
                .map(|k| {
                    let c = self.coeffs.iter().map(|p| p.derivative(k).eval(x)).collect();
                    AlternatingForm::new(self.dim, self.degree, c).expect("same shape as the value")
                })
                .collect(),
        )
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

/// A form given only by a closure; derivatives come from finite differences.
pub struct ClosureForm<F> {
    dim: usize,
    degree: usize,
    eval: F,
    label: String,
}

impl<F: Fn(&[f64]) -> AlternatingForm + Send + Sync> ClosureForm<F> {
    pub fn new(dim: usize, degree: usize, eval: F, label: impl Into<String>) -> Self {
        Self {
            dim,
            degree,
            eval,
            label: label.into(),
        }
    }
}

impl<F: Fn(&[f64]) -> AlternatingForm + Send + Sync> FormField for ClosureForm<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn value(&self, x: &[f64]) -> AlternatingForm {
        (self.eval)(x)
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

/// How derivatives are obtained when a field has no closed form for them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Derivatives {
    AnalyticOnly,
    /// Central differences with the given step.
    FiniteDifference { step: f64 },
}

/// Axis partial derivatives of a form field.
pub fn partials_of(field: &dyn FormField, x: &[f64], mode: Derivatives) -> Result<Vec<AlternatingForm>> {
    if let Some(p) = field.partials(x) {
        return Ok(p);
    }
    let Derivatives::FiniteDifference { step } = mode else {
        return Err(ReillyError::MissingDerivatives(field.name()));
    };
    let mut y = x.to_vec();
    (0..field.dim())
        .map(|k| {
            y[k] = x[k] + step;
            let plus = field.value(&y);
            y[k] = x[k] - step;
            let minus = field.value(&y);
            y[k] = x[k];
            Ok(plus.add_scaled(-1.0, &minus)?.scaled(0.5 / step))
        })
        .collect()
}

pub fn gradient_of(f: &dyn ScalarField, x: &[f64], mode: Derivatives) -> Result<Vec<f64>> {
    if let Some(g) = f.gradient(x) {
        return Ok(g);
    }
    let Derivatives::FiniteDifference { step } = mode else {
        return Err(ReillyError::MissingDerivatives(f.name()));
    };
    let mut y = x.to_vec();
    Ok((0..f.dim())
        .map(|k| {
            y[k] = x[k] + step;
            let plus = f.value(&y);
            y[k] = x[k] - step;
            let minus = f.value(&y);
            y[k] = x[k];
            (plus - minus) / (2.0 * step)
        })
        .collect())
}

pub fn hessian_of(f: &dyn ScalarField, x: &[f64], mode: Derivatives) -> Result<DMatrix<f64>> {
    if let Some(h) = f.hessian(x) {
        return Ok(h);
    }
    let Derivatives::FiniteDifference { step } = mode else {
        return Err(ReillyError::MissingDerivatives(f.name()));
    };
    let n = f.dim();
    let mut y = x.to_vec();
    let mut h = DMatrix::zeros(n, n);
    if f.gradient(x).is_some() {
        for k in 0..n {
            y[k] = x[k] + step;
            let plus = f.gradient(&y).unwrap();
            y[k] = x[k] - step;
            let minus = f.gradient(&y).unwrap();
            y[k] = x[k];
            for j in 0..n {
                h[(j, k)] = (plus[j] - minus[j]) / (2.0 * step);
            }
        }
    } else {
        // second differences of values lose precision as step², so widen it
        let s = step * 10.0;
        let f0 = f.value(x);
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    y[i] = x[i] + s;
                    let a = f.value(&y);
                    y[i] = x[i] - s;
                    let b = f.value(&y);
                    y[i] = x[i];
                    (a - 2.0 * f0 + b) / (s * s)
                } else {
                    let mut at = |di: f64, dj: f64| {
                        y[i] = x[i] + di;
                        y[j] = x[j] + dj;
                        let v = f.value(&y);
                        y[i] = x[i];
                        y[j] = x[j];
                        v
                    };
                    (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4.0 * s * s)
                };
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
    }
    Ok(h)
}

/// Forms available by name from the command line.
pub const BUILTIN_FORMS: &[&str] = &["dx1", "dx1^dx2", "dx1^dx2^dx3", "x2dx1", "dx1_of_x1sq", "random1:<seed>", "random2:<seed>"];

/// Functions available by name from the command line.
pub const BUILTIN_FUNCTIONS: &[&str] = &["x1", "half_norm_sq", "const", "random:<seed>"];

pub fn builtin_form(name: &str) -> Result<PolynomialForm> {
    let dim = 3;
    let unknown = || ReillyError::BadField(format!("unknown form `{name}`; known: {}", BUILTIN_FORMS.join(", ")));
    if let Some((kind, seed)) = name.split_once(':') {
        let seed: u64 = seed.parse().map_err(|_| unknown())?;
        let degree = match kind {
            "random1" => 1,
            "random2" => 2,
            _ => return Err(unknown()),
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = PolynomialForm::random(dim, degree, 2, &mut rng);
        f.label = name.to_string();
        return Ok(f);
    }
    let basis = |idx: &[usize]| AlternatingForm::basis(dim, idx).expect("valid basis index");
    Ok(match name {
        "dx1" => PolynomialForm::parallel(&basis(&[0]), name),
        "dx1^dx2" => PolynomialForm::parallel(&basis(&[0, 1]), name),
        "dx1^dx2^dx3" => PolynomialForm::parallel(&basis(&[0, 1, 2]), name),
        "x2dx1" => PolynomialForm::new(
            dim,
            1,
            vec![Polynomial::coordinate(dim, 1), Polynomial::zero(dim), Polynomial::zero(dim)],
            name,
        )?,
        "dx1_of_x1sq" => {
            let mut f = PolynomialForm::differential_of(&Polynomial::monomial(dim, 0.5, &[2, 0, 0]));
            f.label = name.to_string();
            f
        }
        _ => return Err(unknown()),
    })
}

pub fn builtin_function(name: &str) -> Result<Polynomial> {
    let dim = 3;
    let unknown = || ReillyError::BadField(format!("unknown function `{name}`; known: {}", BUILTIN_FUNCTIONS.join(", ")));
    if let Some(seed) = name.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|_| unknown())?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        return Ok(Polynomial::random(dim, 3, &mut rng));
    }
    Ok(match name {
        "x1" => Polynomial::coordinate(dim, 0),
        "half_norm_sq" => Polynomial::half_norm_squared(dim),
        "const" => Polynomial::constant(dim, 1.0),
        _ => return Err(unknown()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        // p = 3 x² y - z + 2
        let mut p = Polynomial::monomial(3, 3.0, &[2, 1, 0]);
        p.terms.push((-1.0, vec![0, 0, 1]));
        p.terms.push((2.0, vec![0, 0, 0]));
        let x = [1.5, -2.0, 0.5];
        assert_eq!(p.eval(&x), 3.0 * 2.25 * -2.0 - 0.5 + 2.0);
        assert_eq!(p.derivative(0).eval(&x), 6.0 * 1.5 * -2.0);
        assert_eq!(p.derivative(2).eval(&x), -1.0);
        let h = p.hessian(&x).unwrap();
        assert_eq!(h[(0, 1)], 6.0 * 1.5);
        assert_eq!(p.total_degree(), 3);
    }

    #[test]
    fn finite_differences_match_analytic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let form = PolynomialForm::random(3, 2, 2, &mut rng);
        let wrapped = ClosureForm::new(3, 2, |x: &[f64]| form.value(x), "wrapped");
        let x = [0.3, -0.2, 0.7];
        let exact = form.partials(&x).unwrap();
        let fd = partials_of(&wrapped, &x, Derivatives::FiniteDifference { step: 1e-5 }).unwrap();
        for (a, b) in exact.iter().zip(&fd) {
            assert!((a - b).norm() < 1e-8);
        }
        assert!(matches!(
            partials_of(&wrapped, &x, Derivatives::AnalyticOnly),
            Err(ReillyError::MissingDerivatives(_))
        ));

        let f = Polynomial::random(3, 3, &mut rng);
        struct Opaque(Polynomial);
        impl ScalarField for Opaque {
            fn dim(&self) -> usize {
                3
            }
            fn value(&self, x: &[f64]) -> f64 {
                self.0.eval(x)
            }
            fn name(&self) -> String {
                "opaque".into()
            }
        }
        let opaque = Opaque(f.clone());
        let mode = Derivatives::FiniteDifference { step: 1e-5 };
        let g = gradient_of(&opaque, &x, mode).unwrap();
        for (a, b) in g.iter().zip(f.gradient(&x).unwrap()) {
            assert!((a - b).abs() < 1e-8);
        }
        let h = hessian_of(&opaque, &x, mode).unwrap();
        assert!((h - f.hessian(&x).unwrap()).amax() < 1e-4);
    }

    #[test]
    fn builtins_resolve() {
        for name in ["dx1", "dx1^dx2", "dx1^dx2^dx3", "x2dx1", "dx1_of_x1sq", "random1:4", "random2:9"] {
            let f = builtin_form(name).unwrap();
            assert_eq!(f.name(), name);
        }
        for name in ["x1", "half_norm_sq", "const", "random:3"] {
            builtin_function(name).unwrap();
        }
        assert!(builtin_form("dx4").is_err());
        let x2dx1 = builtin_form("x2dx1").unwrap();
        assert_eq!(x2dx1.value(&[0.0, 2.0, 0.0]).coeffs(), &[2.0, 0.0, 0.0]);
    }
}
