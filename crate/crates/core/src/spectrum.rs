//! Dense eigendecomposition of a real symmetric Hamiltonian.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Gap below which the ground space is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Eigenpairs sorted by ascending eigenvalue. Each eigenvector's
/// largest-magnitude component (first one on ties) is positive.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: Real> {
    values: Vec<T>,
    vectors: DMatrix<T>,
}

impl<T: Real> Eigensystem<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Usage(
                "eigendecomposition of non-square matrix".into(),
            ));
        }
        let dim = matrix.nrows();
        let eig = SymmetricEigen::new(matrix);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::zeros(dim, dim);
        for (col, &k) in order.iter().enumerate() {
            let src = eig.eigenvectors.column(k);
            let mut pivot = 0;
            for r in 1..dim {
                if src[r].abs() > src[pivot].abs() {
                    pivot = r;
                }
            }
            let sign = if src[pivot] < T::zero() {
                -T::one()
            } else {
                T::one()
            };
            for r in 0..dim {
                vectors[(r, col)] = src[r] * sign;
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        Ok(Eigensystem { values, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Eigenvectors as columns, in the order of [`Self::values`].
    pub fn vectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// Lowest eigenvalue and its eigenvector.
    pub fn ground(&self) -> (T, Vec<T>) {
        (self.values[0], self.vector(0))
    }

    /// `λ₁ − λ₀`, or zero for a one-dimensional space.
    pub fn ground_gap(&self) -> T {
        if self.values.len() < 2 {
            T::zero()
        } else {
            self.values[1] - self.values[0]
        }
    }

    pub fn ground_is_degenerate(&self) -> bool {
        self.values.len() > 1 && self.ground_gap() < T::lit(DEGENERACY_GAP)
    }

    /// Coefficients `⟨ψ_k|v⟩` in the eigenbasis.
    pub fn project(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check(v.len())?;
        let dim = self.dimension();
        let mut out = vec![real(T::zero()); dim];
        for (k, o) in out.iter_mut().enumerate() {
            let col = self.vectors.column(k);
            let mut acc = real(T::zero());
            for r in 0..dim {
                acc += v[r].scale(col[r]);
            }
            *o = acc;
        }
        Ok(out)
    }

    /// `Σ_k coeffs[k] |ψ_k⟩`.
    pub fn synthesize(&self, coeffs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check(coeffs.len())?;
        let dim = self.dimension();
        let mut out = vec![real(T::zero()); dim];
        for (k, c) in coeffs.iter().enumerate() {
            if *c == real(T::zero()) {
                continue;
            }
            let col = self.vectors.column(k);
            for r in 0..dim {
                out[r] += c.scale(col[r]);
            }
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dimension() {
            return Err(Error::Usage(format!(
                "vector of length {len} against {}-dimensional eigensystem",
                self.dimension()
            )));
        }
        Ok(())
    }
}
