//! Statevector storage and the kernels imaginary-time evolution needs.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::scalar::{abs_c, real, Real};
use crate::spectrum::Eigensystem;

/// Largest qubit domain for which a reduced density matrix is formed.
pub const MAX_DOMAIN_QUBITS: usize = 12;

/// Tolerance used when a caller promises a unit-norm state.
pub const NORMALIZED_TOL: f64 = 1e-10;

/// `2^n` complex amplitudes. Index bit `n-1-q` belongs to qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
    qubit_count: usize,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Usage(format!(
                "statevector length {dim} is not a power of two >= 2"
            )));
        }
        if amplitudes
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::Numerical("non-finite amplitude".into()));
        }
        Ok(StateVector {
            qubit_count: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| real(v)).collect())
    }

    pub fn basis(qubit_count: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubit_count;
        if index >= dim {
            return Err(Error::Usage(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![real(T::zero()); dim];
        amps[index] = real(T::one());
        Self::new(amps)
    }

    /// Equal superposition over all basis states.
    pub fn uniform(qubit_count: usize) -> Result<Self> {
        let dim = 1usize << qubit_count;
        let a = T::one() / T::from_usize(dim).unwrap().sqrt();
        Self::new(vec![real(a); dim])
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return Err(Error::DegenerateInput("zero statevector".into()));
        }
        Ok(self.scaled(T::one() / n))
    }

    pub fn scaled(&self, factor: T) -> Self {
        StateVector {
            amplitudes: self.amplitudes.iter().map(|a| a.scale(factor)).collect(),
            qubit_count: self.qubit_count,
        }
    }

    pub fn is_normalized(&self, tol: T) -> bool {
        (self.norm() - T::one()).abs() <= tol
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector<T>) -> Result<Complex<T>> {
        self.check_same(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(real(T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &StateVector<T>) -> Result<T> {
        self.check_same(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
            .sqrt())
    }

    /// Largest `|Im a_k|` over the amplitudes.
    pub fn max_imag(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |m, a| m.max(a.im.abs()))
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.re).collect()
    }

    fn check_same(&self, other: &StateVector<T>) -> Result<()> {
        if self.dimension() != other.dimension() {
            return Err(Error::Usage(format!(
                "state dimensions {} and {} differ",
                self.dimension(),
                other.dimension()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_normalized(&self, what: &str) -> Result<()> {
        if !self.is_normalized(T::tol(NORMALIZED_TOL)) {
            return Err(Error::Usage(format!(
                "{what}: state norm {} is not 1",
                self.norm().as_f64()
            )));
        }
        Ok(())
    }
}

/// Ordered set of distinct qubits a local operator acts on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QubitDomain {
    qubits: Vec<usize>,
}

impl QubitDomain {
    pub fn new(qubits: Vec<usize>) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::Usage("empty qubit domain".into()));
        }
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != qubits.len() {
            return Err(Error::Usage(format!("repeated qubit in domain {qubits:?}")));
        }
        Ok(QubitDomain { qubits })
    }

    /// Domain `start..start+size`.
    pub fn range(start: usize, size: usize) -> Result<Self> {
        Self::new((start..start + size).collect())
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn contains(&self, q: usize) -> bool {
        self.qubits.contains(&q)
    }

    pub(crate) fn check_register(&self, n: usize) -> Result<()> {
        if let Some(&q) = self.qubits.iter().find(|&&q| q >= n) {
            return Err(Error::Usage(format!(
                "domain qubit {q} outside {n}-qubit register"
            )));
        }
        Ok(())
    }
}

/// Index bookkeeping for a domain embedded in a register: every global index
/// is `env + offsets[local]`.
pub(crate) struct DomainIndex {
    pub offsets: Vec<usize>,
    pub envs: Vec<usize>,
}

impl DomainIndex {
    pub fn new(dom: &QubitDomain, n: usize) -> Result<Self> {
        dom.check_register(n)?;
        let d = dom.len();
        let bit = |q: usize| 1usize << (n - 1 - q);
        let offsets = (0..1usize << d)
            .map(|l| {
                dom.qubits()
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| (l >> (d - 1 - p)) & 1 == 1)
                    .fold(0, |acc, (_, &q)| acc | bit(q))
            })
            .collect();
        let mask = dom.qubits().iter().fold(0, |acc, &q| acc | bit(q));
        let envs = (0..1usize << n).filter(|g| g & mask == 0).collect();
        Ok(DomainIndex { offsets, envs })
    }
}

/// `P|s⟩`, term by term, without forming a dense matrix.
pub fn apply_pauli_sum<T: Real>(op: &PauliSum<T>, s: &StateVector<T>) -> Result<StateVector<T>> {
    if op.qubit_count() != s.qubit_count() {
        return Err(Error::Usage(format!(
            "operator on {} qubits applied to {}-qubit state",
            op.qubit_count(),
            s.qubit_count()
        )));
    }
    let amps = s.amplitudes();
    let mut out = vec![real(T::zero()); amps.len()];
    for t in op.terms() {
        let act = t.string.basis_action();
        for (j, a) in amps.iter().enumerate() {
            out[j ^ act.flip] += t.coefficient * act.factor::<T>(j) * a;
        }
    }
    StateVector::new(out)
}

/// `σ|s⟩` for a bare string.
pub fn apply_pauli_string<T: Real>(p: &PauliString, s: &StateVector<T>) -> Result<StateVector<T>> {
    if p.len() != s.qubit_count() {
        return Err(Error::Usage("string/state qubit count mismatch".into()));
    }
    let act = p.basis_action();
    let amps = s.amplitudes();
    let mut out = vec![real(T::zero()); amps.len()];
    for (j, a) in amps.iter().enumerate() {
        out[j ^ act.flip] = act.factor::<T>(j) * a;
    }
    StateVector::new(out)
}

/// `Tr_env |ket⟩⟨bra|` restricted to `dom`: entry `(j,k)` is
/// `Σ_e ket[e,j] · conj(bra[e,k])`.
pub fn reduced_cross<T: Real>(
    ket: &StateVector<T>,
    bra: &StateVector<T>,
    dom: &QubitDomain,
) -> Result<DMatrix<Complex<T>>> {
    if ket.dimension() != bra.dimension() {
        return Err(Error::Usage("reduced_cross: dimension mismatch".into()));
    }
    if dom.len() > MAX_DOMAIN_QUBITS {
        return Err(Error::Resource(format!(
            "domain of {} qubits exceeds {MAX_DOMAIN_QUBITS}",
            dom.len()
        )));
    }
    let idx = DomainIndex::new(dom, ket.qubit_count())?;
    Ok(reduced_cross_indexed(
        ket.amplitudes(),
        bra.amplitudes(),
        &idx,
    ))
}

pub(crate) fn reduced_cross_indexed<T: Real>(
    ket: &[Complex<T>],
    bra: &[Complex<T>],
    idx: &DomainIndex,
) -> DMatrix<Complex<T>> {
    let d = idx.offsets.len();
    let mut m = DMatrix::from_element(d, d, real(T::zero()));
    let mut kv = vec![real(T::zero()); d];
    let mut bv = vec![real(T::zero()); d];
    for &e in &idx.envs {
        for (l, &o) in idx.offsets.iter().enumerate() {
            kv[l] = ket[e + o];
            bv[l] = bra[e + o].conj();
        }
        for k in 0..d {
            let b = bv[k];
            if b == real(T::zero()) {
                continue;
            }
            for j in 0..d {
                m[(j, k)] += kv[j] * b;
            }
        }
    }
    m
}

/// Reduced density matrix of a normalized state on `dom`.
pub fn reduced_density<T: Real>(
    s: &StateVector<T>,
    dom: &QubitDomain,
) -> Result<DMatrix<Complex<T>>> {
    s.require_normalized("reduced_density")?;
    reduced_cross(s, s, dom)
}

/// Applies a `2^D × 2^D` matrix on `dom`.
pub fn apply_domain_matrix<T: Real>(
    s: &StateVector<T>,
    dom: &QubitDomain,
    m: &DMatrix<Complex<T>>,
) -> Result<StateVector<T>> {
    let idx = DomainIndex::new(dom, s.qubit_count())?;
    let d = idx.offsets.len();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Usage(format!(
            "domain matrix is {}x{}, expected {d}x{d}",
            m.nrows(),
            m.ncols()
        )));
    }
    let amps = s.amplitudes();
    let mut out = vec![real(T::zero()); amps.len()];
    let mut local = vec![real(T::zero()); d];
    for &e in &idx.envs {
        for (l, &o) in idx.offsets.iter().enumerate() {
            local[l] = amps[e + o];
        }
        for (j, &oj) in idx.offsets.iter().enumerate() {
            let mut acc = real(T::zero());
            for (k, lk) in local.iter().enumerate() {
                acc += m[(j, k)] * lk;
            }
            out[e + oj] = acc;
        }
    }
    StateVector::new(out)
}

/// Max-abs deviation of `m` from its conjugate transpose.
pub fn hermiticity_defect<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let mut worst = T::zero();
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            worst = worst.max(abs_c(m[(j, k)] - m[(k, j)].conj()));
        }
    }
    worst
}

/// `exp(−i·A·dt)` for Hermitian `A`, via its eigendecomposition.
pub fn hermitian_unitary<T: Real>(a: &DMatrix<Complex<T>>, dt: T) -> Result<DMatrix<Complex<T>>> {
    if !a.is_square() {
        return Err(Error::Usage("generator must be square".into()));
    }
    let defect = hermiticity_defect(a);
    if defect > T::tol(1e-10) {
        return Err(Error::Usage(format!(
            "generator is not Hermitian (defect {:e})",
            defect.as_f64()
        )));
    }
    let eig = SymmetricEigen::new(a.clone());
    let phases: Vec<Complex<T>> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let th = l * dt;
            Complex::new(th.cos(), -th.sin())
        })
        .collect();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (c, ph) in phases.iter().enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= ph;
        }
    }
    Ok(scaled * v.adjoint())
}

/// Applies `exp(−i·A·dt)` on `dom`.
pub fn apply_domain_unitary<T: Real>(
    s: &StateVector<T>,
    dom: &QubitDomain,
    generator: &DMatrix<Complex<T>>,
    dt: T,
) -> Result<StateVector<T>> {
    let u = hermitian_unitary(generator, dt)?;
    apply_domain_matrix(s, dom, &u)
}

/// Normalized `exp(−H·dt)|s⟩` together with `c = ⟨s|exp(−2H·dt)|s⟩`.
pub fn exact_nonunitary_step<T: Real>(
    s: &StateVector<T>,
    eig: &Eigensystem<T>,
    dt: T,
) -> Result<(StateVector<T>, T)> {
    s.require_normalized("exact_nonunitary_step")?;
    if dt <= T::zero() {
        return Err(Error::Usage("time step must be positive".into()));
    }
    let mut coeffs = eig.project(s.amplitudes())?;
    let mut c = T::zero();
    for (k, w) in coeffs.iter_mut().enumerate() {
        let decay = (-eig.values()[k] * dt).exp();
        *w = w.scale(decay);
        c += w.norm_sqr();
    }
    let target = eig.synthesize(&coeffs)?;
    let target = StateVector::new(target)?.scaled(T::one() / c.sqrt());
    Ok((target, c))
}
