//! Pauli strings and weighted Pauli sums.
//!
//! A [`PauliString`] packs one 2-bit code per qubit (`I=0, X=1, Z=2, Y=3`), so
//! the product of two strings is the bitwise XOR of their codes and the phase
//! is accumulated from a per-qubit lookup table. Qubit `0` is the most
//! significant bit of a computational-basis index.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{abs_c, real, Real};
use crate::state::StateVector;

/// Largest register a [`PauliString`] can describe.
pub const MAX_QUBITS: usize = 32;

/// Largest register for which [`PauliSum::dense`] will materialize a matrix.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Coefficients at or below this magnitude are dropped when merging terms.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    const fn code(self) -> u64 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Z => 2,
            Pauli::Y => 3,
        }
    }

    const fn from_code(code: u64) -> Pauli {
        match code & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Z,
            _ => Pauli::Y,
        }
    }

    // lexicographic rank I < X < Y < Z
    const fn rank(code: u64) -> u8 {
        match code & 3 {
            0 => 0,
            1 => 1,
            3 => 2,
            _ => 3,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A power of `i`: the phase picked up when multiplying Pauli strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn to_complex<T: Real>(self) -> Complex<T> {
        let (o, z) = (T::one(), T::zero());
        match self.0 {
            0 => Complex::new(o, z),
            1 => Complex::new(z, o),
            2 => Complex::new(-o, z),
            _ => Complex::new(z, -o),
        }
    }

    /// Real part of the phase as a small integer.
    pub fn re(self) -> i8 {
        match self.0 {
            0 => 1,
            2 => -1,
            _ => 0,
        }
    }
}

// PHASE_TABLE[a][b] = power of i in single-qubit code product a·b.
const PHASE_TABLE: [[u8; 4]; 4] = [
    // a = I
    [0, 0, 0, 0],
    // a = X: X·X=I, X·Z=-iY, X·Y=iZ
    [0, 0, 3, 1],
    // a = Z: Z·X=iY, Z·Z=I, Z·Y=-iX
    [0, 1, 0, 3],
    // a = Y: Y·X=-iZ, Y·Z=iX, Y·Y=I
    [0, 3, 1, 0],
];

/// Tensor product of single-qubit Paulis on a fixed number of qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    codes: u64,
    len: u8,
}

/// How a Pauli string acts on computational-basis index `j`:
/// `σ|j⟩ = phase · (−1)^{popcount(j & sign_mask)} |j ^ flip⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisAction {
    pub flip: usize,
    pub sign_mask: usize,
    pub phase: Phase,
}

impl BasisAction {
    #[inline]
    pub fn sign(&self, j: usize) -> bool {
        (j & self.sign_mask).count_ones() % 2 == 1
    }

    /// Full phase factor of the matrix element `⟨j ^ flip|σ|j⟩`.
    #[inline]
    pub fn factor<T: Real>(&self, j: usize) -> Complex<T> {
        let p = self.phase.to_complex::<T>();
        if self.sign(j) {
            -p
        } else {
            p
        }
    }
}

impl PauliString {
    pub fn identity(len: usize) -> Result<Self> {
        if len == 0 || len > MAX_QUBITS {
            return Err(Error::Usage(format!(
                "Pauli string length {len} outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(PauliString {
            codes: 0,
            len: len as u8,
        })
    }

    pub fn new(paulis: &[Pauli]) -> Result<Self> {
        let mut s = Self::identity(paulis.len())?;
        for (q, p) in paulis.iter().enumerate() {
            s.codes |= p.code() << (2 * q);
        }
        Ok(s)
    }

    /// Builds a string from its raw packed codes (qubit `q` at bits `2q..2q+2`).
    pub fn from_codes(codes: u64, len: usize) -> Result<Self> {
        let mut s = Self::identity(len)?;
        if len < MAX_QUBITS && codes >> (2 * len) != 0 {
            return Err(Error::Usage(format!(
                "codes {codes:#x} exceed {len} qubits"
            )));
        }
        s.codes = codes;
        Ok(s)
    }

    pub fn codes(&self) -> u64 {
        self.codes
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_code(self.codes >> (2 * qubit))
    }

    pub fn paulis(&self) -> Vec<Pauli> {
        (0..self.len()).map(|q| self.get(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.codes == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        (0..self.len()).filter(|&q| self.get(q) != Pauli::I).count()
    }

    pub fn y_count(&self) -> usize {
        (0..self.len()).filter(|&q| self.get(q) == Pauli::Y).count()
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| self.get(q) != Pauli::I)
            .collect()
    }

    /// `self ⊗ other`, with `self` on the leading (more significant) qubits.
    pub fn tensor(&self, other: &PauliString) -> Result<PauliString> {
        let len = self.len() + other.len();
        let mut s = Self::identity(len)?;
        s.codes = self.codes | (other.codes << (2 * self.len()));
        Ok(s)
    }

    /// Places a string defined on `qubits.len()` local positions onto a register of `len` qubits.
    pub fn embed(&self, qubits: &[usize], len: usize) -> Result<PauliString> {
        if qubits.len() != self.len() {
            return Err(Error::Usage(format!(
                "embedding {} local qubits into {} positions",
                self.len(),
                qubits.len()
            )));
        }
        let mut s = Self::identity(len)?;
        for (local, &q) in qubits.iter().enumerate() {
            if q >= len {
                return Err(Error::Usage(format!("qubit {q} outside register of {len}")));
            }
            s.codes |= ((self.codes >> (2 * local)) & 3) << (2 * q);
        }
        Ok(s)
    }

    /// Product `self · other = phase · result`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        if self.len != other.len {
            return Err(Error::Usage(format!(
                "multiplying Pauli strings of lengths {} and {}",
                self.len, other.len
            )));
        }
        Ok(self.multiply_unchecked(other))
    }

    #[inline]
    pub(crate) fn multiply_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        let mut power = 0u32;
        let (mut a, mut b) = (self.codes, other.codes);
        while a != 0 && b != 0 {
            power += PHASE_TABLE[(a & 3) as usize][(b & 3) as usize] as u32;
            a >>= 2;
            b >>= 2;
        }
        (
            Phase::from_power(power),
            PauliString {
                codes: self.codes ^ other.codes,
                len: self.len,
            },
        )
    }

    /// Action on computational-basis indices of a `len()`-qubit register.
    pub fn basis_action(&self) -> BasisAction {
        let n = self.len();
        let mut flip = 0usize;
        let mut sign_mask = 0usize;
        let mut ys = 0u32;
        for q in 0..n {
            let code = (self.codes >> (2 * q)) & 3;
            let bit = 1usize << (n - 1 - q);
            if code & 1 == 1 {
                flip |= bit;
            }
            if code & 2 == 2 {
                sign_mask |= bit;
            }
            if code == 3 {
                ys += 1;
            }
        }
        BasisAction {
            flip,
            sign_mask,
            phase: Phase::from_power(ys),
        }
    }

    /// Dense `2^n × 2^n` matrix of the bare string.
    pub fn dense<T: Real>(&self) -> Result<DMatrix<Complex<T>>> {
        check_dense(self.len())?;
        let dim = 1usize << self.len();
        let act = self.basis_action();
        let mut m = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        for j in 0..dim {
            m[(j ^ act.flip, j)] = act.factor(j);
        }
        Ok(m)
    }

    fn sort_key(&self) -> u64 {
        let n = self.len();
        let mut key = 0u64;
        for q in 0..n {
            key = (key << 2) | Pauli::rank(self.codes >> (2 * q)) as u64;
        }
        key
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len() {
            write!(f, "{}", self.get(q).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let paulis = s
            .trim()
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Usage(format!("bad Pauli '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(&paulis)
    }
}

/// Axis-wise product of two strings (free-function form).
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    a.multiply(b)
}

fn check_dense(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Resource(format!(
            "dense realization of {n} qubits exceeds limit of {MAX_DENSE_QUBITS}"
        )));
    }
    Ok(())
}

/// A single weighted Pauli string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm<T> {
    pub string: PauliString,
    pub coefficient: Complex<T>,
}

impl<T: Real> PauliTerm<T> {
    pub fn new(string: PauliString, coefficient: Complex<T>) -> Result<Self> {
        if !(coefficient.re.is_finite() && coefficient.im.is_finite()) {
            return Err(Error::Usage("non-finite Pauli coefficient".into()));
        }
        Ok(PauliTerm {
            string,
            coefficient,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.string.len()
    }
}

/// Canonical (merged, lexicographically ordered) linear combination of Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum<T> {
    qubit_count: usize,
    terms: BTreeMap<PauliString, Complex<T>>,
}

impl<T: Real> PauliSum<T> {
    pub fn zero(qubit_count: usize) -> Result<Self> {
        PauliString::identity(qubit_count)?;
        Ok(PauliSum {
            qubit_count,
            terms: BTreeMap::new(),
        })
    }

    pub fn identity(qubit_count: usize, coefficient: Complex<T>) -> Result<Self> {
        let mut s = Self::zero(qubit_count)?;
        s.add_term(PauliString::identity(qubit_count)?, coefficient)?;
        Ok(s)
    }

    pub fn from_terms<I>(qubit_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex<T>)>,
    {
        let mut s = Self::zero(qubit_count)?;
        for (p, c) in terms {
            s.add_term(p, c)?;
        }
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = PauliTerm<T>> + '_ {
        self.terms.iter().map(|(s, c)| PauliTerm {
            string: *s,
            coefficient: *c,
        })
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex<T> {
        self.terms
            .get(string)
            .copied()
            .unwrap_or_else(|| real(T::zero()))
    }

    pub fn add_term(&mut self, string: PauliString, coefficient: Complex<T>) -> Result<()> {
        if string.len() != self.qubit_count {
            return Err(Error::Usage(format!(
                "term on {} qubits added to sum on {}",
                string.len(),
                self.qubit_count
            )));
        }
        PauliTerm::new(string, coefficient)?;
        let threshold = T::lit(PRUNE_THRESHOLD);
        let entry = self.terms.entry(string).or_insert_with(|| real(T::zero()));
        *entry += coefficient;
        if abs_c(*entry) <= threshold {
            self.terms.remove(&string);
        }
        Ok(())
    }

    pub fn add(&self, other: &PauliSum<T>) -> Result<PauliSum<T>> {
        let mut out = self.clone();
        for t in other.terms() {
            out.add_term(t.string, t.coefficient)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: Complex<T>) -> PauliSum<T> {
        let mut out = PauliSum {
            qubit_count: self.qubit_count,
            terms: BTreeMap::new(),
        };
        for t in self.terms() {
            // qubit counts match by construction
            let _ = out.add_term(t.string, t.coefficient * factor);
        }
        out
    }

    /// `self ⊗ other`, `self` on the leading qubits.
    pub fn tensor(&self, other: &PauliSum<T>) -> Result<PauliSum<T>> {
        let mut out = PauliSum::zero(self.qubit_count + other.qubit_count)?;
        for a in self.terms() {
            for b in other.terms() {
                out.add_term(a.string.tensor(&b.string)?, a.coefficient * b.coefficient)?;
            }
        }
        Ok(out)
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliSum<T>) -> Result<PauliSum<T>> {
        if self.qubit_count != other.qubit_count {
            return Err(Error::Usage(format!(
                "multiplying sums on {} and {} qubits",
                self.qubit_count, other.qubit_count
            )));
        }
        let mut out = PauliSum::zero(self.qubit_count)?;
        for a in self.terms() {
            for b in other.terms() {
                let (phase, s) = a.string.multiply_unchecked(&b.string);
                out.add_term(s, a.coefficient * b.coefficient * phase.to_complex())?;
            }
        }
        Ok(out)
    }

    /// Hermitian adjoint (Pauli strings are Hermitian, so coefficients conjugate).
    pub fn adjoint(&self) -> PauliSum<T> {
        PauliSum {
            qubit_count: self.qubit_count,
            terms: self.terms.iter().map(|(s, c)| (*s, c.conj())).collect(),
        }
    }

    /// True when every coefficient is real, i.e. the operator is Hermitian.
    pub fn has_real_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.im == T::zero())
    }

    /// Qubits touched by at least one non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        let mut touched = vec![false; self.qubit_count];
        for s in self.terms.keys() {
            for q in s.support() {
                touched[q] = true;
            }
        }
        (0..self.qubit_count).filter(|&q| touched[q]).collect()
    }

    /// Dense matrix `Σ c · σ₁⊗…⊗σₙ`.
    pub fn dense(&self) -> Result<DMatrix<Complex<T>>> {
        check_dense(self.qubit_count)?;
        let dim = 1usize << self.qubit_count;
        let mut m = DMatrix::from_element(dim, dim, real(T::zero()));
        for t in self.terms() {
            let act = t.string.basis_action();
            for j in 0..dim {
                m[(j ^ act.flip, j)] += t.coefficient * act.factor::<T>(j);
            }
        }
        Ok(m)
    }
}

impl<T: Real> fmt::Display for PauliSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.terms() {
            let c = t.coefficient;
            if c.im == T::zero() {
                writeln!(f, "{:?} * {}", c.re.as_f64(), t.string)?;
            } else {
                writeln!(
                    f,
                    "({:?},{:?}) * {}",
                    c.re.as_f64(),
                    c.im.as_f64(),
                    t.string
                )?;
            }
        }
        Ok(())
    }
}

fn parse_coefficient<T: Real>(s: &str) -> Result<Complex<T>> {
    let bad = || Error::Usage(format!("bad coefficient '{s}'"));
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (re, im) = inner.split_once(',').ok_or_else(bad)?;
        let re: f64 = re.trim().parse().map_err(|_| bad())?;
        let im: f64 = im.trim().parse().map_err(|_| bad())?;
        Ok(Complex::new(T::lit(re), T::lit(im)))
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(real(T::lit(re)))
    }
}

impl<T: Real> FromStr for PauliSum<T> {
    type Err = Error;

    /// Parses the `coeff * STRING` line format written by `Display`.
    fn from_str(text: &str) -> Result<Self> {
        let mut sum: Option<PauliSum<T>> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coeff, string) = line.rsplit_once('*').ok_or_else(|| {
                Error::Usage(format!("line {}: expected 'coeff * STRING'", lineno + 1))
            })?;
            let string: PauliString = string.parse()?;
            let coeff = parse_coefficient::<T>(coeff)?;
            let target = match &mut sum {
                Some(s) => s,
                None => sum.insert(PauliSum::zero(string.len())?),
            };
            target.add_term(string, coeff)?;
        }
        sum.ok_or_else(|| Error::Usage("empty Pauli sum text".into()))
    }
}

/// `⟨s| σ |s⟩ · coefficient`, evaluated in one pass over the amplitudes.
pub fn expectation<T: Real>(state: &StateVector<T>, term: &PauliTerm<T>) -> Result<Complex<T>> {
    if term.qubit_count() != state.qubit_count() {
        return Err(Error::Usage(format!(
            "term on {} qubits applied to {}-qubit state",
            term.qubit_count(),
            state.qubit_count()
        )));
    }
    let amps = state.amplitudes();
    let act = term.string.basis_action();
    let mut acc = real(T::zero());
    for (j, a) in amps.iter().enumerate() {
        acc += amps[j ^ act.flip].conj() * act.factor::<T>(j) * *a;
    }
    Ok(acc * term.coefficient)
}

/// `⟨s| P |s⟩` for a whole sum.
pub fn sum_expectation<T: Real>(state: &StateVector<T>, sum: &PauliSum<T>) -> Result<Complex<T>> {
    let mut acc = real(T::zero());
    for t in sum.terms() {
        acc += expectation(state, &t)?;
    }
    Ok(acc)
}
