//! Inexact imaginary-time steps: windowed generator fits and their unitaries.
//!
//! Each step computes the exact normalized target `exp(−HΔt)|s⟩/‖·‖`, then
//! walks the layout windows in order. On every window a real-coefficient
//! generator `A = Σ a_I σ_I` is fitted so that `−iAΔt|s⟩` matches the
//! remaining displacement `target − s`, and `exp(−iAΔt)` is applied before
//! moving to the next window.
//!
//! Two algebraically identical solvers are available. The normal route forms
//! `S_IJ = Re⟨s|σ_Iσ_J|s⟩` from the window's reduced density matrix; the
//! kernel route works in the `2·2^n` dimensional space of real and imaginary
//! amplitude parts and is cheaper when the basis outgrows it.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::FdOperator;
use crate::pauli::{BasisAction, PauliString};
use crate::scalar::{real, Real};
use crate::state::{
    apply_domain_unitary, exact_nonunitary_step, reduced_cross_indexed, DomainIndex, QubitDomain,
    StateVector,
};

/// Largest window a generator is fitted on.
pub const MAX_FIT_QUBITS: usize = 8;

pub const DEFAULT_REGULARIZATION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorBasis {
    /// Strings with an odd number of `Y` factors; keeps real states real.
    #[default]
    OddY,
    /// Every non-identity string.
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSolver {
    /// Kernel route when the basis is larger than `2·2^n`, normal route otherwise.
    #[default]
    Auto,
    Normal,
    Kernel,
}

fn default_regularization() -> f64 {
    DEFAULT_REGULARIZATION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QiteConfig {
    pub domain_size: usize,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_regularization")]
    pub regularization: f64,
    #[serde(default)]
    pub basis: GeneratorBasis,
    #[serde(default)]
    pub solver: FitSolver,
    /// Explicit windows; the default sliding layout is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<Vec<usize>>>,
}

impl QiteConfig {
    pub fn new(domain_size: usize, dt: f64, steps: usize) -> Self {
        QiteConfig {
            domain_size,
            dt,
            steps,
            regularization: DEFAULT_REGULARIZATION,
            basis: GeneratorBasis::OddY,
            solver: FitSolver::Auto,
            layout: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain_size < 2 {
            return Err(Error::Usage(format!(
                "domain size {} is below 2",
                self.domain_size
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Usage(format!(
                "time step {} must be positive",
                self.dt
            )));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::Usage(format!(
                "regularization {} must be nonnegative",
                self.regularization
            )));
        }
        Ok(())
    }
}

/// Ordered fitting windows.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainLayout {
    windows: Vec<QubitDomain>,
}

impl DomainLayout {
    pub fn new(windows: Vec<QubitDomain>) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::Usage("layout has no windows".into()));
        }
        Ok(DomainLayout { windows })
    }

    pub fn windows(&self) -> &[QubitDomain] {
        &self.windows
    }

    pub fn max_window(&self) -> usize {
        self.windows.iter().map(QubitDomain::len).max().unwrap_or(0)
    }

    /// Fails unless every qubit in `support` lies in some window of size at most `d`.
    pub fn check(&self, n: usize, d: usize, support: &[usize]) -> Result<()> {
        for w in &self.windows {
            w.check_register(n)?;
            if w.len() > d {
                return Err(Error::Usage(format!(
                    "window {:?} is larger than domain size {d}",
                    w.qubits()
                )));
            }
        }
        if let Some(q) = support
            .iter()
            .find(|q| !self.windows.iter().any(|w| w.contains(**q)))
        {
            return Err(Error::Usage(format!(
                "qubit {q} is not covered by any window"
            )));
        }
        Ok(())
    }
}

/// Sliding windows of `d` adjacent qubits within each axis group.
///
/// A group no wider than `d` gets one window. Otherwise windows start every
/// `max(1, d/2)` qubits and the last one is right-aligned to the group end.
pub fn default_layout(n: usize, d: usize, groups: &[usize]) -> Result<DomainLayout> {
    if d < 2 {
        return Err(Error::Usage(format!("domain size {d} is below 2")));
    }
    if groups.iter().sum::<usize>() != n || groups.contains(&0) {
        return Err(Error::Usage(format!(
            "axis groups {groups:?} do not partition {n} qubits"
        )));
    }
    let mut windows = Vec::new();
    let mut base = 0;
    for &g in groups {
        let w = d.min(g);
        if w < d {
            log::warn!("domain size {d} clipped to {w} on a {g}-qubit axis");
        }
        if w == g {
            windows.push(QubitDomain::range(base, g)?);
        } else {
            let stride = (w / 2).max(1);
            let mut start = 0;
            while start + w < g {
                windows.push(QubitDomain::range(base + start, w)?);
                start += stride;
            }
            windows.push(QubitDomain::range(base + g - w, w)?);
        }
        base += g;
    }
    DomainLayout::new(windows)
}

/// Generator strings on `d` local qubits, in canonical order.
pub fn generator_basis(d: usize, basis: GeneratorBasis) -> Result<Vec<PauliString>> {
    if d == 0 || d > MAX_FIT_QUBITS {
        return Err(Error::Resource(format!(
            "generator basis on {d} qubits (supported: 1..={MAX_FIT_QUBITS})"
        )));
    }
    let mut out: Vec<PauliString> = (1..1u64 << (2 * d))
        .map(|c| PauliString::from_codes(c, d).expect("valid codes"))
        .filter(|s| match basis {
            GeneratorBasis::OddY => s.y_count() % 2 == 1,
            GeneratorBasis::Full => true,
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Solves `(M + δI) x = rhs` for symmetric positive semidefinite `M`.
///
/// Falls back to an eigenvalue pseudo-inverse when the Cholesky factorization breaks down.
fn solve_psd<T: Real>(mut m: DMatrix<T>, rhs: &DVector<T>, delta: T) -> Result<DVector<T>> {
    for k in 0..m.nrows() {
        m[(k, k)] += delta;
    }
    if let Some(ch) = Cholesky::new(m.clone()) {
        let x = ch.solve(rhs);
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    log::debug!(
        "cholesky failed on {}x{} system; using pseudo-inverse",
        m.nrows(),
        m.ncols()
    );
    let eig = SymmetricEigen::new(m);
    let top = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |a, &v| a.max(v.abs()));
    let cut = top * T::tol(1e-12);
    let proj = eig.eigenvectors.transpose() * rhs;
    let mut scaled = proj.clone();
    for (k, v) in scaled.iter_mut().enumerate() {
        let l = eig.eigenvalues[k];
        *v = if l.abs() > cut { *v / l } else { T::zero() };
    }
    let x = &eig.eigenvectors * scaled;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite generator coefficients".into()));
    }
    Ok(x)
}

/// Precomputed data for fitting on one window.
struct Window<T> {
    domain: QubitDomain,
    index: DomainIndex,
    local: Vec<PauliString>,
    global: Vec<BasisAction>,
    _scalar: std::marker::PhantomData<T>,
}

/// Outcome of fitting one window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowFit<T> {
    pub coefficients: Vec<T>,
    /// `Δt · ‖v − M a‖`, the linear-model miss in state units.
    pub model_residual: T,
}

impl<T: Real> Window<T> {
    fn new(domain: QubitDomain, n: usize, basis: GeneratorBasis) -> Result<Self> {
        let local = generator_basis(domain.len(), basis)?;
        let global = local
            .iter()
            .map(|s| s.embed(domain.qubits(), n).map(|g| g.basis_action()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Window {
            index: DomainIndex::new(&domain, n)?,
            domain,
            local,
            global,
            _scalar: std::marker::PhantomData,
        })
    }

    fn use_kernel(&self, solver: FitSolver, dim: usize) -> bool {
        match solver {
            FitSolver::Normal => false,
            FitSolver::Kernel => true,
            FitSolver::Auto => self.local.len() > 2 * dim,
        }
    }

    fn fit(
        &self,
        s: &StateVector<T>,
        target: &StateVector<T>,
        dt: T,
        delta: T,
        solver: FitSolver,
    ) -> Result<WindowFit<T>> {
        let inv_dt = T::one() / dt;
        let v: Vec<Complex<T>> = target
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .map(|(t, a)| (t - a).scale(inv_dt))
            .collect();
        let (a, miss) = if self.use_kernel(solver, s.dimension()) {
            self.fit_kernel(s.amplitudes(), &v, delta)?
        } else {
            self.fit_normal(s.amplitudes(), &v, delta)?
        };
        let coefficients: Vec<T> = a.iter().copied().collect();
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite generator coefficients".into()));
        }
        Ok(WindowFit {
            coefficients,
            model_residual: miss * dt,
        })
    }

    /// `Tr(ρ σ)` for every local code.
    fn local_expectations(&self, rho: &DMatrix<Complex<T>>) -> Vec<Complex<T>> {
        let d = self.domain.len();
        (0..1u64 << (2 * d))
            .map(|c| {
                let act = PauliString::from_codes(c, d)
                    .expect("valid codes")
                    .basis_action();
                (0..rho.nrows())
                    .map(|j| rho[(j, j ^ act.flip)] * act.factor::<T>(j))
                    .fold(real(T::zero()), |a, b| a + b)
            })
            .collect()
    }

    fn fit_normal(&self, s: &[Complex<T>], v: &[Complex<T>], delta: T) -> Result<(DVector<T>, T)> {
        let m = self.local.len();
        let rho = reduced_cross_indexed(s, s, &self.index);
        let cross = reduced_cross_indexed(v, s, &self.index);
        let e = self.local_expectations(&rho);
        let mut gram = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let (ph, p) = self.local[i].multiply_unchecked(&self.local[j]);
                let val = (ph.to_complex::<T>() * e[p.codes() as usize]).re;
                gram[(i, j)] = val;
                gram[(j, i)] = val;
            }
        }
        let rhs = DVector::from_iterator(
            m,
            self.local.iter().map(|p| {
                let act = p.basis_action();
                let tr = (0..cross.nrows())
                    .map(|j| cross[(j, j ^ act.flip)] * act.factor::<T>(j))
                    .fold(real(T::zero()), |a, b| a + b);
                -tr.im
            }),
        );
        let a = solve_psd(gram.clone(), &rhs, delta)?;
        let vv = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let quad = (&gram * &a).dot(&a);
        let miss = (vv - T::lit(2.0) * a.dot(&rhs) + quad)
            .max(T::zero())
            .sqrt();
        Ok((a, miss))
    }

    /// Real `2N × m` matrix whose columns are `−iσ_I|s⟩` split into real and imaginary parts.
    fn design(&self, s: &[Complex<T>]) -> DMatrix<T> {
        let dim = s.len();
        let mut mat = DMatrix::zeros(2 * dim, self.global.len());
        let minus_i = Complex::new(T::zero(), -T::one());
        for (col, act) in self.global.iter().enumerate() {
            for (g, a) in s.iter().enumerate() {
                let u = minus_i * act.factor::<T>(g) * a;
                let row = g ^ act.flip;
                mat[(row, col)] = u.re;
                mat[(dim + row, col)] = u.im;
            }
        }
        mat
    }

    fn fit_kernel(&self, s: &[Complex<T>], v: &[Complex<T>], delta: T) -> Result<(DVector<T>, T)> {
        let dim = s.len();
        let mat = self.design(s);
        let vr = DVector::from_iterator(
            2 * dim,
            v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)),
        );
        let kernel = &mat * mat.transpose();
        let y = solve_psd(kernel, &vr, delta)?;
        let a = mat.transpose() * y;
        let miss = (&vr - &mat * &a).norm();
        Ok((a, miss))
    }

    /// Dense local generator `Σ a_I σ_I`.
    fn generator(&self, a: &[T]) -> DMatrix<Complex<T>> {
        let dim = 1usize << self.domain.len();
        let mut m = DMatrix::from_element(dim, dim, real(T::zero()));
        for (p, &c) in self.local.iter().zip(a) {
            if c == T::zero() {
                continue;
            }
            let act = p.basis_action();
            for j in 0..dim {
                m[(j ^ act.flip, j)] += act.factor::<T>(j).scale(c);
            }
        }
        m
    }
}

/// Result of one inexact step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<T> {
    /// Fitted coefficients per window, in [`generator_basis`] order.
    pub coefficients: Vec<Vec<T>>,
    pub window_residuals: Vec<T>,
    /// `‖target − state_after‖` after all windows are applied.
    pub residual: T,
    /// `⟨s|exp(−2HΔt)|s⟩` from the exact step.
    pub c_exact: T,
    pub state_after: StateVector<T>,
}

/// A configured evolver for one Hamiltonian.
pub struct QiteEvolver<'h, T: Real> {
    hamiltonian: &'h FdOperator<T>,
    config: QiteConfig,
    layout: DomainLayout,
    windows: Vec<Window<T>>,
}

impl<'h, T: Real> QiteEvolver<'h, T> {
    pub fn new(hamiltonian: &'h FdOperator<T>, config: &QiteConfig) -> Result<Self> {
        config.validate()?;
        let n = hamiltonian.qubit_count();
        let d = config.domain_size.min(n);
        if config.domain_size > n {
            log::warn!("domain size {} clipped to {n} qubits", config.domain_size);
        }
        let layout = match &config.layout {
            Some(ws) => DomainLayout::new(
                ws.iter()
                    .map(|w| QubitDomain::new(w.clone()))
                    .collect::<Result<_>>()?,
            )?,
            None => default_layout(n, d, hamiltonian.axis_qubits())?,
        };
        layout.check(n, config.domain_size, &hamiltonian.pauli().support())?;
        let windows = layout
            .windows()
            .iter()
            .map(|w| Window::new(w.clone(), n, config.basis))
            .collect::<Result<_>>()?;
        hamiltonian.try_eigensystem()?;
        Ok(QiteEvolver {
            hamiltonian,
            config: config.clone(),
            layout,
            windows,
        })
    }

    pub fn layout(&self) -> &DomainLayout {
        &self.layout
    }

    pub fn config(&self) -> &QiteConfig {
        &self.config
    }

    pub fn step(&self, s: &StateVector<T>) -> Result<StepReport<T>> {
        s.require_normalized("qite step")?;
        let dt = T::lit(self.config.dt);
        let delta = T::lit(self.config.regularization);
        let eig = self.hamiltonian.try_eigensystem()?;
        let (target, c_exact) = exact_nonunitary_step(s, eig, dt)?;
        let mut cur = s.clone();
        let mut coefficients = Vec::with_capacity(self.windows.len());
        let mut window_residuals = Vec::with_capacity(self.windows.len());
        for w in &self.windows {
            let fit = w.fit(&cur, &target, dt, delta, self.config.solver)?;
            if fit.coefficients.iter().any(|&c| c != T::zero()) {
                cur = apply_domain_unitary(&cur, &w.domain, &w.generator(&fit.coefficients), dt)?;
            }
            coefficients.push(fit.coefficients);
            window_residuals.push(fit.model_residual);
        }
        let residual = cur.distance(&target)?;
        Ok(StepReport {
            coefficients,
            window_residuals,
            residual,
            c_exact,
            state_after: cur,
        })
    }

    /// Runs `config.steps` steps from `initial`, calling `on_step(k, report)` after step `k`.
    ///
    /// Any failure is reported as [`Error::StepFailure`] for the step that raised it.
    pub fn run<F>(&self, initial: &StateVector<T>, mut on_step: F) -> Result<StateVector<T>>
    where
        F: FnMut(usize, &StepReport<T>) -> Result<()>,
    {
        initial.require_normalized("qite run")?;
        let mut s = initial.clone();
        for k in 1..=self.config.steps {
            let fail = |e: Error| match e {
                Error::StepFailure { .. } => e,
                other => Error::StepFailure {
                    step: k,
                    reason: other.to_string(),
                },
            };
            let report = self.step(&s).map_err(fail)?;
            on_step(k, &report).map_err(fail)?;
            s = report.state_after;
        }
        Ok(s)
    }
}

/// Fits a single window generator against `target`.
pub fn fit_generator<T: Real>(
    s: &StateVector<T>,
    target: &StateVector<T>,
    dom: &QubitDomain,
    cfg: &QiteConfig,
) -> Result<WindowFit<T>> {
    s.require_normalized("fit_generator")?;
    target.require_normalized("fit_generator")?;
    if s.dimension() != target.dimension() {
        return Err(Error::Usage("state and target dimensions differ".into()));
    }
    let w = Window::new(dom.clone(), s.qubit_count(), cfg.basis)?;
    w.fit(
        s,
        target,
        T::lit(cfg.dt),
        T::lit(cfg.regularization),
        cfg.solver,
    )
}

/// One step of [`QiteEvolver`] without keeping the evolver.
pub fn qite_step<T: Real>(
    s: &StateVector<T>,
    h: &FdOperator<T>,
    cfg: &QiteConfig,
) -> Result<StepReport<T>> {
    QiteEvolver::new(h, cfg)?.step(s)
}
