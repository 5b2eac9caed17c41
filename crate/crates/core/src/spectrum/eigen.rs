//! Smallest eigenpairs of `K x = λ M x` with `K` symmetric positive
//! semidefinite and `M` diagonal positive.
//!
//! Small problems are solved densely. Larger ones use block Lanczos on the
//! shift-inverted operator `(K - σM)⁻¹ M` with `σ < 0`, which is self-adjoint in
//! the `M` inner product; the Krylov basis is kept `M`-orthonormal with full
//! reorthogonalization and eigenpairs are extracted by Rayleigh–Ritz with `K`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::sparse::{CsrMatrix, EnvelopeLdlt};
use super::{Result, SpectrumError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Problems with fewer unknowns are solved densely.
    pub dense_limit: usize,
    /// Dense threshold when eigenvectors are wanted; forming them costs about
    /// ten times the eigenvalues alone.
    pub dense_vector_limit: usize,
    /// Relative residual `‖Kx - θMx‖ / (‖K‖ ‖x‖)` required of every pair.
    pub tol: f64,
    /// Cap on the Krylov basis size; exceeding it is a convergence failure.
    pub max_basis: usize,
    /// Shift for the Lanczos path; defaults to `-1e-3 · max_i K_ii / M_ii`.
    pub shift: Option<f64>,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 3000,
            dense_vector_limit: 800,
            tol: 1e-10,
            max_basis: 1500,
            shift: None,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dense,
    ShiftInvertLanczos,
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// `M`-orthonormal eigenvectors as columns, when requested.
    pub vectors: Option<DMatrix<f64>>,
    /// Relative residual per pair; empty when vectors were not formed.
    pub residuals: Vec<f64>,
    pub solver: SolverKind,
}

/// The `k` smallest eigenpairs of the pencil `(K, diag(m))`.
pub fn smallest_eigenpairs(
    k_mat: &CsrMatrix,
    m_diag: &[f64],
    k: usize,
    want_vectors: bool,
    opts: &EigenOptions,
) -> Result<EigenPairs> {
    let n = k_mat.nrows();
    assert_eq!(m_diag.len(), n);
    if k == 0 || k > n {
        return Err(SpectrumError::BadRequest(format!("requested {k} eigenvalues of a {n}-dimensional problem")));
    }
    let limit = if want_vectors {
        opts.dense_limit.min(opts.dense_vector_limit)
    } else {
        opts.dense_limit
    };
    if n < limit {
        dense(k_mat, m_diag, k, want_vectors)
    } else {
        lanczos(k_mat, m_diag, k, opts)
    }
}

fn relative_residual(k_mat: &CsrMatrix, m_diag: &[f64], x: &DVector<f64>, theta: f64, knorm: f64) -> f64 {
    let kx = k_mat.mul_dvec(x);
    let r: f64 = kx
        .iter()
        .zip(x.iter().zip(m_diag))
        .map(|(a, (b, m))| (a - theta * m * b).powi(2))
        .sum::<f64>()
        .sqrt();
    r / (knorm * x.norm()).max(f64::MIN_POSITIVE)
}

fn dense(k_mat: &CsrMatrix, m_diag: &[f64], k: usize, want_vectors: bool) -> Result<EigenPairs> {
    let inv_sqrt: Vec<f64> = m_diag.iter().map(|m| 1.0 / m.sqrt()).collect();
    let a = k_mat.scale(Some(&inv_sqrt), Some(&inv_sqrt)).to_dense();
    let a = (&a + a.transpose()) * 0.5;
    if !want_vectors {
        let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values.truncate(k);
        return Ok(EigenPairs {
            values,
            vectors: None,
            residuals: Vec::new(),
            solver: SolverKind::Dense,
        });
    }
    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(k);
    let n = m_diag.len();
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, k, |r, c| eig.eigenvectors[(r, order[c])] * inv_sqrt[r]);
    let knorm = k_mat.inf_norm();
    let residuals = (0..k)
        .map(|c| relative_residual(k_mat, m_diag, &vectors.column(c).into_owned(), values[c], knorm))
        .collect();
    Ok(EigenPairs {
        values,
        vectors: Some(vectors),
        residuals,
        solver: SolverKind::Dense,
    })
}

fn m_dot(m: &[f64], a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).zip(m).map(|((x, y), w)| x * y * w).sum()
}

/// Orthogonalizes `w` against `basis` and `pending` twice (DGKS) in the `M` inner product
/// and normalizes it. Returns `None` when `w` lies in their span.
fn m_orthonormalize(
    m: &[f64],
    basis: &[DVector<f64>],
    pending: &[DVector<f64>],
    mut w: DVector<f64>,
) -> Option<DVector<f64>> {
    let before = m_dot(m, &w, &w).sqrt();
    for _ in 0..2 {
        for q in basis.iter().chain(pending) {
            let c = m_dot(m, q, &w);
            w.axpy(-c, q, 1.0);
        }
    }
    let after = m_dot(m, &w, &w).sqrt();
    (after > 1e-10 * before && after > 0.0).then(|| w / after)
}

fn lanczos(k_mat: &CsrMatrix, m_diag: &[f64], k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = k_mat.nrows();
    let scale = k_mat
        .diag()
        .iter()
        .zip(m_diag)
        .map(|(a, m)| a / m)
        .fold(0.0, f64::max);
    let sigma = opts.shift.unwrap_or(-1e-3 * scale.max(f64::MIN_POSITIVE));
    let shifted = k_mat.add_scaled(-sigma, &CsrMatrix::diagonal(m_diag));
    let factor = EnvelopeLdlt::factor(&shifted)?;
    let knorm = k_mat.inf_norm();
    let block = (k + 4).min(n);
    let max_basis = opts.max_basis.max(2 * block).min(n);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut rand_chacha::ChaCha8Rng| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));

    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut k_basis: Vec<DVector<f64>> = Vec::new();
    let mut current: Vec<DVector<f64>> = Vec::new();
    while current.len() < block {
        if let Some(q) = m_orthonormalize(m_diag, &basis, &current, random_vec(&mut rng)) {
            current.push(q);
        }
    }

    let mut last_residuals = Vec::new();
    loop {
        for q in &current {
            k_basis.push(k_mat.mul_dvec(q));
        }
        basis.extend(current.iter().cloned());
        let size = basis.len();

        if size >= k + block || size == max_basis {
            // Rayleigh–Ritz with K on the M-orthonormal basis
            let proj = DMatrix::from_fn(size, size, |i, j| basis[i].dot(&k_basis[j]));
            let proj = (&proj + proj.transpose()) * 0.5;
            let eig = proj.symmetric_eigen();
            let mut order: Vec<usize> = (0..size).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            order.truncate(k);
            let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let mut vectors = DMatrix::zeros(n, k);
            let mut residuals = Vec::with_capacity(k);
            for (c, &i) in order.iter().enumerate() {
                let y = eig.eigenvectors.column(i);
                let mut x = DVector::zeros(n);
                let mut kx = DVector::zeros(n);
                for (j, (q, kq)) in basis.iter().zip(&k_basis).enumerate() {
                    x.axpy(y[j], q, 1.0);
                    kx.axpy(y[j], kq, 1.0);
                }
                let r: f64 = kx
                    .iter()
                    .zip(x.iter().zip(m_diag))
                    .map(|(a, (b, m))| (a - values[c] * m * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                residuals.push(r / (knorm * x.norm()).max(f64::MIN_POSITIVE));
                vectors.set_column(c, &x);
            }
            if residuals.iter().all(|&r| r <= opts.tol) || size == n {
                return Ok(EigenPairs {
                    values,
                    vectors: Some(vectors),
                    residuals,
                    solver: SolverKind::ShiftInvertLanczos,
                });
            }
            last_residuals = residuals;
        }
        if size >= max_basis {
            return Err(SpectrumError::NotConverged {
                basis: size,
                residuals: last_residuals,
            });
        }

        // next block: apply the shift-inverted operator to the newest block
        let room = (max_basis - size).min(block);
        let mut next = Vec::with_capacity(room);
        for q in &current {
            if next.len() == room {
                break;
            }
            let mq: Vec<f64> = q.iter().zip(m_diag).map(|(a, m)| a * m).collect();
            let w = DVector::from_vec(factor.solve(&mq));
            if let Some(v) = m_orthonormalize(m_diag, &basis, &next, w) {
                next.push(v);
            }
        }
        // an invariant subspace was found; continue with fresh directions
        let mut attempts = 0;
        while next.len() < room && attempts < 10 * room {
            attempts += 1;
            if let Some(v) = m_orthonormalize(m_diag, &basis, &next, random_vec(&mut rng)) {
                next.push(v);
            }
        }
        if next.is_empty() {
            return Err(SpectrumError::NotConverged {
                basis: size,
                residuals: last_residuals,
            });
        }
        current = next;
    }
}
