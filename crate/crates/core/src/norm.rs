//! Scale tracking for the normalized trajectory.
//!
//! A unitary evolution discards the squared norm of the true solution. It is
//! recovered from per-step linear factors `c′ = 1 − 2Δt⟨H⟩`, whose running
//! product drifts, and from a ground-state estimate
//! `C* = e^{−2λ₀t} ⟨ψ₀|f̄(0)⟩² / ⟨ψ₀|ψ̄(t)⟩²` that is exact when the
//! normalized trajectory is. [`NormTracker`] multiplies factors between
//! corrections and resets to `C*` every `period` steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::FdOperator;
use crate::qite::{QiteConfig, QiteEvolver};
use crate::scalar::Real;
use crate::state::StateVector;

/// Overlaps below this magnitude make `C*` unavailable.
pub const MIN_OVERLAP: f64 = 1e-12;

pub const DEFAULT_LONG_HORIZON: f64 = 10.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundStateSource {
    #[default]
    ExactEigen,
    LongQite,
}

#[derive(Clone, Debug)]
pub struct GroundStateInfo<T> {
    pub state: StateVector<T>,
    pub eigenvalue: T,
    pub source: GroundStateSource,
    /// Set when the lowest gap is below the degeneracy threshold.
    pub degenerate: bool,
}

/// `c′ = 1 − 2Δt⟨s|H|s⟩`.
pub fn linear_factor<T: Real>(s: &StateVector<T>, h: &FdOperator<T>, dt: T) -> Result<T> {
    s.require_normalized("linear_factor")?;
    Ok(T::one() - T::lit(2.0) * dt * h.expectation(s)?)
}

pub fn running_product<T: Real>(prev: T, factor: T) -> Result<T> {
    if !(prev > T::zero()) || !(factor > T::zero()) {
        return Err(Error::Usage(format!(
            "running product needs positive inputs, got {} and {}",
            prev.as_f64(),
            factor.as_f64()
        )));
    }
    Ok(prev * factor)
}

/// `C*(t)` from the initial ground-state overlap and the current state.
pub fn corrected_norm<T: Real>(
    t: T,
    initial_overlap: T,
    ground: &GroundStateInfo<T>,
    current: &StateVector<T>,
) -> Result<T> {
    let now = ground.state.inner(current)?.re;
    let tiny = T::lit(MIN_OVERLAP);
    if now.abs() < tiny || initial_overlap.abs() < tiny {
        return Err(Error::CorrectionUnavailable {
            overlap: now.abs().min(initial_overlap.abs()).as_f64(),
        });
    }
    let ratio = initial_overlap / now;
    Ok((-T::lit(2.0) * ground.eigenvalue * t).exp() * ratio * ratio)
}

/// One step of the hybrid estimator.
///
/// Returns `c_star` on correction steps (`k % period == 0`) and
/// `prev · c′` otherwise, or when no correction is available.
pub fn hybrid_update<T: Real>(
    prev: T,
    k: usize,
    period: Option<usize>,
    factor: T,
    c_star: Option<T>,
) -> T {
    match (period, c_star) {
        (Some(p), Some(c)) if p > 0 && k % p == 0 => c,
        _ => prev * factor,
    }
}

/// Values produced by one [`NormTracker::update`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormUpdate<T> {
    pub c_psi: T,
    pub c_prime_product: T,
    /// `C*` when this was a correction step and one could be formed.
    pub c_star: Option<T>,
}

/// Running scale estimates for one trajectory.
#[derive(Clone, Debug)]
pub struct NormTracker<T> {
    period: Option<usize>,
    c_psi: T,
    c_prime_product: T,
    initial_overlap: T,
    initial_norm: T,
    step: usize,
}

impl<T: Real> NormTracker<T> {
    /// `period = None` never corrects. `initial_norm` is `‖|f(0)⟩‖`.
    pub fn new(
        period: Option<usize>,
        ground: &GroundStateInfo<T>,
        initial: &StateVector<T>,
        initial_norm: T,
    ) -> Result<Self> {
        if period == Some(0) {
            return Err(Error::Usage("correction period must be at least 1".into()));
        }
        Ok(NormTracker {
            period,
            c_psi: T::one(),
            c_prime_product: T::one(),
            initial_overlap: ground.state.inner(initial)?.re,
            initial_norm,
            step: 0,
        })
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn c_psi(&self) -> T {
        self.c_psi
    }

    pub fn c_prime_product(&self) -> T {
        self.c_prime_product
    }

    pub fn initial_overlap(&self) -> T {
        self.initial_overlap
    }

    pub fn initial_norm(&self) -> T {
        self.initial_norm
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Advances one step. `factor` is `c′` of the state the step started from;
    /// `current` is the state at time `t` after the step.
    pub fn update(
        &mut self,
        factor: T,
        t: T,
        current: &StateVector<T>,
        ground: &GroundStateInfo<T>,
    ) -> Result<NormUpdate<T>> {
        let k = self.step + 1;
        let product = running_product(self.c_prime_product, factor)?;
        let due = self.period.is_some_and(|p| k % p == 0);
        let c_star = if due {
            match corrected_norm(t, self.initial_overlap, ground, current) {
                Ok(c) => Some(c),
                Err(Error::CorrectionUnavailable { overlap }) => {
                    log::warn!(
                        "step {k}: ground-state overlap {overlap:e}, keeping running product"
                    );
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let c_psi = hybrid_update(self.c_psi, k, self.period, factor, c_star);
        if !(c_psi > T::zero()) {
            return Err(Error::Numerical(format!(
                "norm estimate became nonpositive ({})",
                c_psi.as_f64()
            )));
        }
        self.step = k;
        self.c_prime_product = product;
        self.c_psi = c_psi;
        Ok(NormUpdate {
            c_psi,
            c_prime_product: product,
            c_star,
        })
    }
}

/// Lowest eigenpair of `h`, either exactly or from a long QITE run.
///
/// `long` supplies the QITE configuration, the horizon and the starting state
/// for [`GroundStateSource::LongQite`]; the step count of the configuration is
/// replaced by `horizon / dt`.
pub fn ground_state<T: Real>(
    h: &FdOperator<T>,
    source: GroundStateSource,
    long: Option<(&QiteConfig, f64, &StateVector<T>)>,
) -> Result<GroundStateInfo<T>> {
    let eig = h.try_eigensystem()?;
    let degenerate = eig.ground_is_degenerate();
    if degenerate {
        log::warn!(
            "ground space is degenerate (gap {:e}); using the first eigenvector",
            eig.ground_gap().as_f64()
        );
    }
    match source {
        GroundStateSource::ExactEigen => {
            let (l0, v) = eig.ground();
            Ok(GroundStateInfo {
                state: StateVector::from_real(&v)?,
                eigenvalue: l0,
                source,
                degenerate,
            })
        }
        GroundStateSource::LongQite => {
            let (cfg, horizon, start) = long.ok_or_else(|| {
                Error::Usage("long-run ground state needs a configuration and start state".into())
            })?;
            if !(horizon > 0.0) {
                return Err(Error::Usage(format!("horizon {horizon} must be positive")));
            }
            let mut cfg = cfg.clone();
            cfg.steps = (horizon / cfg.dt).round() as usize;
            let end = QiteEvolver::new(h, &cfg)?.run(start, |_, _| Ok(()))?;
            let end = if end.inner(start)?.re < T::zero() {
                end.scaled(-T::one())
            } else {
                end
            };
            Ok(GroundStateInfo {
                eigenvalue: h.expectation(&end)?,
                state: end,
                source,
                degenerate,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{heat_hamiltonian_1d, BoundaryCondition};
    use crate::oracle::SpectralSolution;
    use crate::pauli::PauliSum;
    use crate::state::{exact_nonunitary_step, NORMALIZED_TOL};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_nonneg(n: usize, rng: &mut ChaCha8Rng) -> StateVector<f64> {
        let v: Vec<f64> = (0..1usize << n)
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        StateVector::from_real(&v).unwrap().normalized().unwrap()
    }

    fn exact(h: &FdOperator<f64>) -> GroundStateInfo<f64> {
        ground_state(h, GroundStateSource::ExactEigen, None).unwrap()
    }

    #[test]
    fn linear_factor_examples() {
        let zero = FdOperator::from_pauli(PauliSum::<f64>::zero(3).unwrap(), 1.0);
        let s = StateVector::<f64>::uniform(3).unwrap();
        assert_eq!(linear_factor(&s, &zero, 1e-3).unwrap(), 1.0);

        let h = heat_hamiltonian_1d::<f64>(6, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
        let g = exact(&h);
        let c = linear_factor(&g.state, &h, 1e-3).unwrap();
        assert!((c - (1.0 - 3.73687e-4)).abs() < 1e-9);
    }

    #[test]
    fn linear_factor_tracks_exact_factor() {
        let h = heat_hamiltonian_1d::<f64>(5, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &dt in &[1e-3, 5e-4, 1e-4] {
            for _ in 0..20 {
                let s = random_nonneg(5, &mut rng);
                let (_, c) = exact_nonunitary_step(&s, h.eigensystem(), dt).unwrap();
                let cp = linear_factor(&s, &h, dt).unwrap();
                let hs = h.apply(&s).unwrap();
                let h2 = hs.norm_sqr();
                assert!((cp - c).abs() <= 4.0 * dt * dt * h2);
                assert!(c <= 1.0 && cp <= 1.0 && cp <= c);
            }
        }
    }

    #[test]
    fn running_product_examples() {
        let mut p = 1.0;
        for _ in 0..10 {
            p = running_product(p, 1.0).unwrap();
        }
        assert_eq!(p, 1.0);
        let mut p = 1.0;
        for _ in 0..7 {
            p = running_product(p, 0.9).unwrap();
        }
        assert!((p - 0.9f64.powi(7)).abs() < 1e-15);
        assert!(running_product(1.0, 0.0).is_err());
        assert!(running_product(-1.0, 0.5).is_err());
    }

    #[test]
    fn corrected_norm_examples() {
        let h = heat_hamiltonian_1d::<f64>(4, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
        let g = exact(&h);
        let c = corrected_norm(0.3, 1.0, &g, &g.state).unwrap();
        assert!((c - (-2.0 * g.eigenvalue * 0.3f64).exp()).abs() < 1e-14);

        let p = heat_hamiltonian_1d::<f64>(4, 0.1, 0.8, BoundaryCondition::Periodic).unwrap();
        let gp = exact(&p);
        assert!(gp.eigenvalue.abs() < 1e-10);
        let u = StateVector::<f64>::uniform(4).unwrap();
        assert!(gp.state.distance(&u).unwrap() < 1e-10);
        for t in [0.0, 0.5, 3.0] {
            assert!((corrected_norm(t, 1.0, &gp, &u).unwrap() - 1.0).abs() < 1e-10);
        }

        let g1 = StateVector::from_real(&h.eigensystem().vector(1)).unwrap();
        assert!(matches!(
            corrected_norm(0.1, 1.0, &g, &g1),
            Err(Error::CorrectionUnavailable { .. })
        ));
    }

    #[test]
    fn corrected_norm_is_exact_on_the_exact_trajectory() {
        let h = heat_hamiltonian_1d::<f64>(5, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
        let g = exact(&h);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f0 = random_nonneg(5, &mut rng);
        let sol = SpectralSolution::new(&h, &f0).unwrap();
        let overlap = g.state.inner(&f0).unwrap().re;
        for k in 1..=20 {
            let t = 0.05 * k as f64;
            let (ft, cf) = sol.evolve(t).unwrap();
            let cs = corrected_norm(t, overlap, &g, &ft).unwrap();
            assert!(((cs - cf) / cf).abs() < 1e-10);
        }
    }

    #[test]
    fn hybrid_cases() {
        assert_eq!(hybrid_update(0.5, 3, Some(1), 0.9, Some(0.7)), 0.7);
        assert_eq!(hybrid_update(0.5, 3, Some(2), 0.9, Some(0.7)), 0.5 * 0.9);
        assert_eq!(hybrid_update(0.5, 4, Some(2), 0.9, None), 0.5 * 0.9);
        assert_eq!(hybrid_update(0.5, 4, None, 0.9, Some(0.7)), 0.5 * 0.9);
    }

    #[test]
    fn tracker_limits() {
        let h = heat_hamiltonian_1d::<f64>(4, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
        let g = exact(&h);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f0 = random_nonneg(4, &mut rng);
        let sol = SpectralSolution::new(&h, &f0).unwrap();
        let dt = 1e-3;
        let mut never = NormTracker::new(None, &g, &f0, 1.0).unwrap();
        let mut every = NormTracker::new(Some(1), &g, &f0, 1.0).unwrap();
        let mut s = f0.clone();
        for k in 1..=100 {
            let cp = linear_factor(&s, &h, dt).unwrap();
            let (next, _) = exact_nonunitary_step(&s, h.eigensystem(), dt).unwrap();
            let t = k as f64 * dt;
            let a = never.update(cp, t, &next, &g).unwrap();
            let b = every.update(cp, t, &next, &g).unwrap();
            assert_eq!(a.c_psi, a.c_prime_product);
            let cf = sol.norm_factor(t);
            assert!(((b.c_psi - cf) / cf).abs() < 1e-8);
            s = next;
        }
        assert_eq!(never.step(), 100);
        assert!(NormTracker::new(Some(0), &g, &f0, 1.0).is_err());
        assert!(s.is_normalized(NORMALIZED_TOL));
    }

    #[test]
    fn long_run_ground_state() {
        let h = heat_hamiltonian_1d::<f64>(4, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
        let g = exact(&h);
        let start = StateVector::<f64>::uniform(4).unwrap();
        let cfg = QiteConfig::new(4, 1e-3, 1);
        let est = ground_state(&h, GroundStateSource::LongQite, Some((&cfg, 3.0, &start))).unwrap();
        assert!((est.eigenvalue - g.eigenvalue).abs() < 1e-6);
        assert!(est.state.inner(&g.state).unwrap().re > 0.9999);
        assert!(ground_state(&h, GroundStateSource::LongQite, None).is_err());
    }

    #[test]
    fn exact_ground_state_is_an_eigenvector() {
        let h = heat_hamiltonian_1d::<f64>(6, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
        let g = exact(&h);
        let hg = h.apply(&g.state).unwrap();
        assert!(hg.distance(&g.state.scaled(g.eigenvalue)).unwrap() < 1e-8);
        assert!((g.eigenvalue - 0.186844).abs() < 1e-6);
        assert!(!g.degenerate);
        // sine profile: symmetric, positive, peaked in the middle
        let v = g.state.real_parts();
        assert!(v.iter().all(|&x| x > 0.0));
        assert!((v[0] - v[63]).abs() < 1e-10 && v[31] > v[0]);
    }

    proptest! {
        #[test]
        fn exact_factor_never_exceeds_one(seed in 0u64..500) {
            let h = heat_hamiltonian_1d::<f64>(4, 0.1, 0.8, BoundaryCondition::Periodic).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_nonneg(4, &mut rng);
            let (_, c) = exact_nonunitary_step(&s, h.eigensystem(), 1e-3).unwrap();
            prop_assert!(c <= 1.0 + 1e-15);
            prop_assert!(linear_factor(&s, &h, 1e-3).unwrap() <= 1.0 + 1e-15);
        }
    }
}
