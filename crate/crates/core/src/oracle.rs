//! Exact evolution of the discretized system and the comparison metrics.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fd::FdOperator;
use crate::scalar::Real;
use crate::spectrum::Eigensystem;
use crate::state::StateVector;

/// Eigen-expansion of an initial state under a fixed Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpectralSolution<T: Real> {
    eigen: Eigensystem<T>,
    coefficients: Vec<Complex<T>>,
    weight: T,
}

impl<T: Real> SpectralSolution<T> {
    pub fn new(h: &FdOperator<T>, initial: &StateVector<T>) -> Result<Self> {
        Self::from_eigensystem(h.try_eigensystem()?.clone(), initial)
    }

    pub fn from_eigensystem(eigen: Eigensystem<T>, initial: &StateVector<T>) -> Result<Self> {
        initial.require_normalized("spectral solution")?;
        let coefficients = eigen.project(initial.amplitudes())?;
        let weight = coefficients.iter().fold(T::zero(), |a, c| a + c.norm_sqr());
        Ok(SpectralSolution {
            eigen,
            coefficients,
            weight,
        })
    }

    pub fn eigensystem(&self) -> &Eigensystem<T> {
        &self.eigen
    }

    /// `⟨ψ_k|f̄(0)⟩` for every eigenvector.
    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    /// Squared norm at time `t` relative to `t = 0`.
    pub fn norm_factor(&self, t: T) -> T {
        let two = T::lit(2.0);
        self.coefficients
            .iter()
            .zip(self.eigen.values())
            .fold(T::zero(), |a, (c, &l)| {
                a + (-two * l * t).exp() * c.norm_sqr()
            })
            / self.weight
    }

    /// Normalized state `f̄(t)` and `C_f(t)`.
    pub fn evolve(&self, t: T) -> Result<(StateVector<T>, T)> {
        if t < T::zero() {
            return Err(Error::Usage("evolution time must be nonnegative".into()));
        }
        let decayed: Vec<Complex<T>> = self
            .coefficients
            .iter()
            .zip(self.eigen.values())
            .map(|(c, &l)| c.scale((-l * t).exp()))
            .collect();
        let state = StateVector::new(self.eigen.synthesize(&decayed)?)?.normalized()?;
        Ok((state, self.norm_factor(t)))
    }
}

/// `F = Re⟨a|b⟩`.
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    Ok(a.inner(b)?.re)
}

/// `r = √(C_ψ / C_f)`.
pub fn norm_ratio<T: Real>(c_psi: T, c_f: T) -> Result<T> {
    if !(c_f > T::zero()) {
        return Err(Error::UndefinedRatio(c_f.as_f64()));
    }
    Ok((c_psi / c_f).sqrt())
}

/// `(2 C_f / N) · [(1 + r²)/2 − rF]`, with `C_f` the squared norm of the exact solution.
pub fn mse_factored<T: Real>(c_f: T, r: T, fidelity: T, samples: usize) -> T {
    let n = T::from_usize(samples).expect("sample count");
    let two = T::lit(2.0);
    two * c_f / n * ((T::one() + r * r) / two - r * fidelity)
}

/// `‖f − ψ‖² / N` on unnormalized vectors.
pub fn mse_direct<T: Real>(f: &StateVector<T>, psi: &StateVector<T>) -> Result<T> {
    let d = f.distance(psi)?;
    Ok(d * d / T::from_usize(f.dimension()).expect("dimension"))
}

/// `√scale · state`, the unnormalized vector a normalized state and its squared norm stand for.
pub fn rescaled<T: Real>(state: &StateVector<T>, squared_norm: T) -> StateVector<T> {
    state.scaled(squared_norm.max(T::zero()).sqrt())
}
