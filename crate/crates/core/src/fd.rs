//! Finite-difference Hamiltonians in Pauli and dense form.
//!
//! The second-difference operator on `n` qubits is built by the block
//! recursion `D0(n) = I ⊗ D0(n−1) + A↙(1) ⊗ A↗(n−1) + A↗(1) ⊗ A↙(n−1)`,
//! with `D0(1) = −2I + X`; the periodic variant adds the corner ladders
//! `A↙(n) + A↗(n)`. Pauli sums keep the integer-structured decomposition and
//! the physical prefactor `−α/h²` is stored separately in [`FdOperator`].

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::scalar::{real, Real};
use crate::spectrum::Eigensystem;
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Ghost samples `f(a−h) = f(b) = 0`.
    Zero,
    /// Wrap-around samples.
    Periodic,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(BoundaryCondition::Zero),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => Err(Error::Usage(format!(
                "unknown boundary condition '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderDirection {
    /// `((X − iY)/2)^⊗n`: the single entry at row `2^n−1`, column `0`.
    SouthWest,
    /// `((X + iY)/2)^⊗n`: the single entry at row `0`, column `2^n−1`.
    NorthEast,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Usage("operator needs at least one qubit".into()));
    }
    Ok(())
}

/// Corner ladder operator on `n` qubits.
pub fn ladder<T: Real>(n: usize, dir: LadderDirection) -> Result<PauliSum<T>> {
    check_qubits(n)?;
    let half = T::lit(0.5);
    let y = match dir {
        LadderDirection::SouthWest => Complex::new(T::zero(), -half),
        LadderDirection::NorthEast => Complex::new(T::zero(), half),
    };
    let one = PauliSum::from_terms(
        1,
        [
            (PauliString::new(&[Pauli::X])?, real(half)),
            (PauliString::new(&[Pauli::Y])?, y),
        ],
    )?;
    let mut out = one.clone();
    for _ in 1..n {
        out = one.tensor(&out)?;
    }
    Ok(out)
}

/// Zero-boundary second difference `D0(n)` (unit spacing).
pub fn d0<T: Real>(n: usize) -> Result<PauliSum<T>> {
    check_qubits(n)?;
    let mut d = PauliSum::from_terms(
        1,
        [
            (PauliString::new(&[Pauli::I])?, real(T::lit(-2.0))),
            (PauliString::new(&[Pauli::X])?, real(T::one())),
        ],
    )?;
    let id1 = PauliSum::identity(1, real(T::one()))?;
    let sw1 = ladder::<T>(1, LadderDirection::SouthWest)?;
    let ne1 = ladder::<T>(1, LadderDirection::NorthEast)?;
    let mut sw = sw1.clone();
    let mut ne = ne1.clone();
    for _ in 1..n {
        let next = id1
            .tensor(&d)?
            .add(&sw1.tensor(&ne)?)?
            .add(&ne1.tensor(&sw)?)?;
        sw = sw1.tensor(&sw)?;
        ne = ne1.tensor(&ne)?;
        d = next;
    }
    Ok(d)
}

/// Periodic second difference `Dp(n) = D0(n) + A↙(n) + A↗(n)`.
pub fn dp<T: Real>(n: usize) -> Result<PauliSum<T>> {
    check_qubits(n)?;
    if n == 1 {
        return Err(Error::UnsupportedConfiguration(
            "periodic boundary on a single qubit overlaps the nearest-neighbour coupling".into(),
        ));
    }
    d0::<T>(n)?
        .add(&ladder(n, LadderDirection::SouthWest)?)?
        .add(&ladder(n, LadderDirection::NorthEast)?)
}

/// Unit-spacing second difference for one axis.
pub fn second_difference<T: Real>(n: usize, bc: BoundaryCondition) -> Result<PauliSum<T>> {
    match bc {
        BoundaryCondition::Zero => d0(n),
        BoundaryCondition::Periodic => dp(n),
    }
}

/// Direct tridiagonal (or circulant) stencil matrix with unit spacing.
pub fn stencil_matrix_1d<T: Real>(n: usize, bc: BoundaryCondition) -> Result<DMatrix<T>> {
    check_qubits(n)?;
    if bc == BoundaryCondition::Periodic && n == 1 {
        return Err(Error::UnsupportedConfiguration(
            "periodic boundary on a single qubit".into(),
        ));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        m[(k, k)] = T::lit(-2.0);
        for nb in neighbours(k, dim, bc) {
            m[(k, nb)] += T::one();
        }
    }
    Ok(m)
}

fn neighbours(k: usize, dim: usize, bc: BoundaryCondition) -> Vec<usize> {
    let mut out = Vec::with_capacity(2);
    match bc {
        BoundaryCondition::Zero => {
            if k > 0 {
                out.push(k - 1);
            }
            if k + 1 < dim {
                out.push(k + 1);
            }
        }
        BoundaryCondition::Periodic => {
            out.push((k + dim - 1) % dim);
            out.push((k + 1) % dim);
        }
    }
    out
}

/// Direct five-point Laplacian stencil on a `2^n1 × 2^n2` grid, x-index most significant.
pub fn stencil_matrix_2d<T: Real>(
    n1: usize,
    n2: usize,
    h1: T,
    h2: T,
    bc_x: BoundaryCondition,
    bc_y: BoundaryCondition,
) -> Result<DMatrix<T>> {
    check_qubits(n1)?;
    check_qubits(n2)?;
    for (n, bc) in [(n1, bc_x), (n2, bc_y)] {
        if bc == BoundaryCondition::Periodic && n == 1 {
            return Err(Error::UnsupportedConfiguration(
                "periodic boundary on a single qubit".into(),
            ));
        }
    }
    let (nx, ny) = (1usize << n1, 1usize << n2);
    let (wx, wy) = (T::one() / (h1 * h1), T::one() / (h2 * h2));
    let mut m = DMatrix::zeros(nx * ny, nx * ny);
    for k1 in 0..nx {
        for k2 in 0..ny {
            let row = k1 * ny + k2;
            m[(row, row)] = T::lit(-2.0) * (wx + wy);
            for nb in neighbours(k1, nx, bc_x) {
                m[(row, nb * ny + k2)] += wx;
            }
            for nb in neighbours(k2, ny, bc_y) {
                m[(row, k1 * ny + nb)] += wy;
            }
        }
    }
    Ok(m)
}

/// A finite-difference Hamiltonian `scale · pauli`.
#[derive(Clone, Debug)]
pub struct FdOperator<T: Real> {
    pauli: PauliSum<T>,
    scale: T,
    axis_qubits: Vec<usize>,
    boundaries: Vec<BoundaryCondition>,
    dense: OnceLock<DMatrix<T>>,
    eigen: OnceLock<Eigensystem<T>>,
}

impl<T: Real> FdOperator<T> {
    /// Wraps an arbitrary Pauli sum; mostly useful for tests.
    pub fn from_pauli(pauli: PauliSum<T>, scale: T) -> Self {
        let n = pauli.qubit_count();
        FdOperator {
            pauli,
            scale,
            axis_qubits: vec![n],
            boundaries: vec![BoundaryCondition::Zero],
            dense: OnceLock::new(),
            eigen: OnceLock::new(),
        }
    }

    /// Integer-structured Pauli decomposition (without the scale).
    pub fn pauli(&self) -> &PauliSum<T> {
        &self.pauli
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn qubit_count(&self) -> usize {
        self.pauli.qubit_count()
    }

    pub fn axis_qubits(&self) -> &[usize] {
        &self.axis_qubits
    }

    pub fn boundaries(&self) -> &[BoundaryCondition] {
        &self.boundaries
    }

    /// `scale · pauli` as a single sum.
    pub fn scaled_pauli(&self) -> PauliSum<T> {
        self.pauli.scaled(real(self.scale))
    }

    /// Real dense matrix of the Hamiltonian (cached).
    pub fn dense(&self) -> Result<&DMatrix<T>> {
        if let Some(d) = self.dense.get() {
            return Ok(d);
        }
        let c = self.pauli.dense()?;
        let m = c.map(|z| z.re * self.scale);
        Ok(self.dense.get_or_init(|| m))
    }

    /// Eigendecomposition of the dense Hamiltonian (cached).
    ///
    /// Panics if the register is too large for dense realization; use
    /// [`Self::try_eigensystem`] to get an error instead.
    pub fn eigensystem(&self) -> &Eigensystem<T> {
        self.try_eigensystem().expect("dense eigensystem")
    }

    pub fn try_eigensystem(&self) -> Result<&Eigensystem<T>> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = Eigensystem::new(self.dense()?.clone())?;
        Ok(self.eigen.get_or_init(|| e))
    }

    /// `⟨s|H|s⟩` from Pauli-term expectations.
    pub fn expectation(&self, s: &StateVector<T>) -> Result<T> {
        Ok(crate::pauli::sum_expectation(s, &self.pauli)?.re * self.scale)
    }

    /// `H|s⟩`.
    pub fn apply(&self, s: &StateVector<T>) -> Result<StateVector<T>> {
        Ok(crate::state::apply_pauli_sum(&self.pauli, s)?.scaled(self.scale))
    }
}

fn check_physical<T: Real>(h: T, alpha: T) -> Result<()> {
    if !(h > T::zero()) || !(alpha > T::zero()) {
        return Err(Error::Usage(format!(
            "spacing ({}) and diffusivity ({}) must be positive",
            h.as_f64(),
            alpha.as_f64()
        )));
    }
    Ok(())
}

/// `H = −(α/h²) · D(n)` for the 1D heat equation.
pub fn heat_hamiltonian_1d<T: Real>(
    n: usize,
    h: T,
    alpha: T,
    bc: BoundaryCondition,
) -> Result<FdOperator<T>> {
    check_physical(h, alpha)?;
    Ok(FdOperator {
        pauli: second_difference(n, bc)?,
        scale: -alpha / (h * h),
        axis_qubits: vec![n],
        boundaries: vec![bc],
        dense: OnceLock::new(),
        eigen: OnceLock::new(),
    })
}

/// `H = −α [D(n1)/h1² ⊗ I + I ⊗ D(n2)/h2²]`, x register on the leading qubits.
///
/// The stored sum is `D(n1) ⊗ I + (h1/h2)² · I ⊗ D(n2)` with scale `−α/h1²`,
/// which stays integer-exact for equal spacings.
pub fn laplace_hamiltonian_2d<T: Real>(
    n1: usize,
    n2: usize,
    h1: T,
    h2: T,
    alpha: T,
    bc_x: BoundaryCondition,
    bc_y: BoundaryCondition,
) -> Result<FdOperator<T>> {
    check_physical(h1, alpha)?;
    check_physical(h2, alpha)?;
    let dx = second_difference::<T>(n1, bc_x)?;
    let dy = second_difference::<T>(n2, bc_y)?;
    let ix = PauliSum::identity(n1, real(T::one()))?;
    let iy = PauliSum::identity(n2, real(T::one()))?;
    let ratio = (h1 * h1) / (h2 * h2);
    let pauli = dx.tensor(&iy)?.add(&ix.tensor(&dy)?.scaled(real(ratio)))?;
    Ok(FdOperator {
        pauli,
        scale: -alpha / (h1 * h1),
        axis_qubits: vec![n1, n2],
        boundaries: vec![bc_x, bc_y],
        dense: OnceLock::new(),
        eigen: OnceLock::new(),
    })
}
