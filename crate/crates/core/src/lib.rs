//! Heat-equation solver built on emulated quantum imaginary time evolution.
//!
//! Function samples are amplitude-encoded into a statevector, the
//! finite-difference Hamiltonian is expressed in the Pauli basis, and each
//! normalized non-unitary step `exp(−HΔt)` is approximated by a product of
//! unitaries fitted on qubit windows. The physical scale of the solution is
//! tracked alongside the normalized trajectory and compared against the exact
//! spectral evolution of the discretized system.

pub mod error;
pub mod experiment;
pub mod fd;
pub mod grid;
pub mod norm;
pub mod oracle;
pub mod pauli;
pub mod qite;
pub mod scalar;
pub mod spectrum;
pub mod state;

pub use error::{Error, Result};
pub use fd::{BoundaryCondition, FdOperator, LadderDirection};
pub use grid::{AxisSpec, GridSpec, InitialCondition, SampleField};
pub use norm::{GroundStateInfo, GroundStateSource, NormTracker};
pub use oracle::SpectralSolution;
pub use pauli::{Pauli, PauliString, PauliSum, PauliTerm, Phase};
pub use qite::{
    DomainLayout, FitSolver, GeneratorBasis, QiteConfig, QiteEvolver, StepReport, WindowFit,
};
pub use scalar::Real;
pub use spectrum::Eigensystem;
pub use state::{QubitDomain, StateVector};

/// Double-precision aliases used by the experiment runner.
pub type PauliSum64 = PauliSum<f64>;
pub type StateVector64 = StateVector<f64>;
pub type FdOperator64 = FdOperator<f64>;
pub type StepReport64 = StepReport<f64>;
