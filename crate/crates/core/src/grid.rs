//! Grid geometry, initial waveforms and amplitude encoding.
//!
//! A zero-boundary axis of `N = 2^n` samples has ghost points one spacing
//! below the first sample and one spacing above the last, so its physical
//! length is `(N+1)h`; a periodic axis has length `Nh`. The default interval
//! start is `h` for zero boundaries and `0` for periodic ones, which puts the
//! lower ghost point at the origin in both cases.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::BoundaryCondition;
use crate::scalar::Real;
use crate::state::StateVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub qubits: usize,
    pub spacing: f64,
    pub bc: BoundaryCondition,
    /// First sample coordinate `a`; defaults per boundary kind when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

impl AxisSpec {
    pub fn new(qubits: usize, spacing: f64, bc: BoundaryCondition) -> Self {
        AxisSpec {
            qubits,
            spacing,
            bc,
            start: None,
        }
    }

    pub fn samples(&self) -> usize {
        1usize << self.qubits
    }

    pub fn start(&self) -> f64 {
        self.start.unwrap_or(match self.bc {
            BoundaryCondition::Zero => self.spacing,
            BoundaryCondition::Periodic => 0.0,
        })
    }

    /// Physical length `L` including the ghost interval for zero boundaries.
    pub fn length(&self) -> f64 {
        let n = self.samples() as f64;
        match self.bc {
            BoundaryCondition::Zero => (n + 1.0) * self.spacing,
            BoundaryCondition::Periodic => n * self.spacing,
        }
    }

    pub fn coordinate(&self, k: usize) -> f64 {
        self.start() + k as f64 * self.spacing
    }

    /// Lower end of the physical interval (the ghost point for zero boundaries).
    pub fn origin(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Zero => self.start() - self.spacing,
            BoundaryCondition::Periodic => self.start(),
        }
    }

    /// Position of sample `k` as a fraction of the axis length.
    pub fn fraction(&self, k: usize) -> f64 {
        (self.coordinate(k) - self.origin()) / self.length()
    }
}

/// Discretization geometry: one or two axes, x-axis on the leading qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
}

impl GridSpec {
    pub fn new_1d(axis: AxisSpec) -> Self {
        GridSpec { axes: vec![axis] }
    }

    pub fn new_2d(x: AxisSpec, y: AxisSpec) -> Self {
        GridSpec { axes: vec![x, y] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Usage(format!(
                "grid dimension {} not supported (1 or 2)",
                self.axes.len()
            )));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.qubits == 0 {
                return Err(Error::Usage(format!("axis {i}: zero qubits")));
            }
            if !(a.spacing > 0.0 && a.spacing.is_finite()) {
                return Err(Error::Usage(format!("axis {i}: spacing must be positive")));
            }
        }
        if self.qubit_count() > crate::pauli::MAX_DENSE_QUBITS {
            return Err(Error::Resource(format!(
                "{} qubits exceed the dense limit",
                self.qubit_count()
            )));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn qubit_count(&self) -> usize {
        self.axes.iter().map(|a| a.qubits).sum()
    }

    pub fn qubits_per_axis(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.qubits).collect()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(AxisSpec::samples).collect()
    }

    pub fn total_samples(&self) -> usize {
        1usize << self.qubit_count()
    }

    /// Per-axis sample indices of flat index `flat` (x index most significant).
    pub fn axis_indices(&self, flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut out = vec![0; shape.len()];
        let mut rest = flat;
        for (i, n) in shape.iter().enumerate().rev() {
            out[i] = rest % n;
            rest /= n;
        }
        out
    }

    pub fn flat_index(&self, indices: &[usize]) -> usize {
        self.shape()
            .iter()
            .zip(indices)
            .fold(0, |acc, (n, k)| acc * n + k)
    }
}

/// One-dimensional waveform evaluated along a single axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// 1 on samples `N/4 .. 3N/4`, 0 elsewhere.
    SquareWave,
    /// One period across the axis: `offset` at the ends, `offset + height` at the centre.
    TriangleWave { height: f64, offset: f64 },
    /// `max_height · (1 − (2u − 1)²)` with `u` the fractional position on the axis.
    InvertedParabola { max_height: f64 },
    /// `x_factor(x) · y_factor(y)` on a 2D grid.
    Product {
        x_factor: Box<InitialCondition>,
        y_factor: Box<InitialCondition>,
    },
    /// Explicit samples in flat order (x index most significant).
    Samples { values: Vec<f64> },
}

impl InitialCondition {
    fn axis_values(&self, axis: &AxisSpec) -> Result<Vec<f64>> {
        let n = axis.samples();
        let v = match self {
            InitialCondition::SquareWave => (0..n)
                .map(|k| {
                    if k >= n / 4 && k < 3 * n / 4 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            InitialCondition::TriangleWave { height, offset } => (0..n)
                .map(|k| offset + height * (1.0 - (2.0 * axis.fraction(k) - 1.0).abs()))
                .collect(),
            InitialCondition::InvertedParabola { max_height } => (0..n)
                .map(|k| {
                    let w = 2.0 * axis.fraction(k) - 1.0;
                    max_height * (1.0 - w * w)
                })
                .collect(),
            InitialCondition::Samples { values } => {
                if values.len() != n {
                    return Err(Error::Usage(format!(
                        "{} samples given for an axis of {n}",
                        values.len()
                    )));
                }
                values.clone()
            }
            InitialCondition::Product { .. } => {
                return Err(Error::Usage(
                    "product initial condition needs a two-dimensional grid".into(),
                ))
            }
        };
        Ok(v)
    }

    /// Flat samples on `grid`.
    pub fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        grid.validate()?;
        match (grid.dimension(), self) {
            (1, _) => self.axis_values(&grid.axes[0]),
            (2, InitialCondition::Product { x_factor, y_factor }) => {
                let fx = x_factor.axis_values(&grid.axes[0])?;
                let fy = y_factor.axis_values(&grid.axes[1])?;
                Ok(fx
                    .iter()
                    .flat_map(|x| fy.iter().map(move |y| x * y))
                    .collect())
            }
            (2, InitialCondition::Samples { values }) => {
                if values.len() != grid.total_samples() {
                    return Err(Error::Usage(format!(
                        "{} samples given for a grid of {}",
                        values.len(),
                        grid.total_samples()
                    )));
                }
                Ok(values.clone())
            }
            _ => Err(Error::Usage(
                "two-dimensional grids take a product or explicit samples".into(),
            )),
        }
    }
}

/// Reads a single column of reals from CSV (a header row is skipped if not numeric).
pub fn samples_from_csv(path: &std::path::Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = rec.get(0).unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Usage(format!(
                    "{}: row {} is not a number: '{field}'",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Amplitude-encodes `f` on `grid`: returns the unit state and `‖|f⟩‖`.
pub fn encode<T: Real>(f: &InitialCondition, grid: &GridSpec) -> Result<(StateVector<T>, T)> {
    encode_samples(&f.sample(grid)?)
}

pub fn encode_samples<T: Real>(samples: &[f64]) -> Result<(StateVector<T>, T)> {
    if let Some((k, v)) = samples
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(Error::UnsupportedFunction(format!(
            "sample {k} = {v} is negative or not finite"
        )));
    }
    if samples.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInput("all samples are zero".into()));
    }
    let raw = StateVector::from_real(&samples.iter().map(|&v| T::lit(v)).collect::<Vec<_>>())?;
    let norm = raw.norm();
    Ok((raw.scaled(T::one() / norm), norm))
}

/// Sample values on the grid: `scale · Re(amplitude)`, flat order.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleField<T> {
    pub shape: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Copy> SampleField<T> {
    pub fn get(&self, indices: &[usize]) -> T {
        let flat = self
            .shape
            .iter()
            .zip(indices)
            .fold(0, |acc, (n, k)| acc * n + k);
        self.values[flat]
    }
}

pub fn decode<T: Real>(
    state: &StateVector<T>,
    scale: T,
    grid: &GridSpec,
) -> Result<SampleField<T>> {
    if state.dimension() != grid.total_samples() {
        return Err(Error::Usage(format!(
            "state of dimension {} does not match grid of {} samples",
            state.dimension(),
            grid.total_samples()
        )));
    }
    Ok(SampleField {
        shape: grid.shape(),
        values: state.amplitudes().iter().map(|a| a.re * scale).collect(),
    })
}

/// Computational-basis outcome probabilities, exact or estimated from `shots` samples.
pub fn readout_probabilities<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<Vec<T>> {
    state.require_normalized("readout_probabilities")?;
    let exact: Vec<T> = state.amplitudes().iter().map(Complex::norm_sqr).collect();
    let Some(shots) = shots else {
        return Ok(exact);
    };
    if shots == 0 {
        return Err(Error::Usage("shot count must be positive".into()));
    }
    // multinomial via sequential conditional binomials
    let mut counts = vec![0u64; exact.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (k, p) in exact.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.as_f64();
        let q = if mass_left > 0.0 {
            (p / mass_left).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let draw = if k + 1 == exact.len() {
            remaining
        } else {
            Binomial::new(remaining, q)
                .map_err(|e| Error::Numerical(format!("binomial sampling: {e}")))?
                .sample(rng)
        };
        counts[k] = draw;
        remaining -= draw;
        mass_left -= p;
    }
    let total = T::from_u64(shots).unwrap();
    Ok(counts
        .into_iter()
        .map(|c| T::from_u64(c).unwrap() / total)
        .collect())
}

/// Nonnegative real amplitudes from probabilities, `a_k = √p_k`.
pub fn amplitudes_from_probabilities<T: Real>(p: &[T]) -> Result<StateVector<T>> {
    StateVector::from_real(
        &p.iter()
            .map(|&v| v.max(T::zero()).sqrt())
            .collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lengths_match_reported_boundaries() {
        let z = AxisSpec::new(6, 0.1, BoundaryCondition::Zero);
        let p = AxisSpec::new(6, 0.1, BoundaryCondition::Periodic);
        assert!((z.length() - 6.5).abs() < 1e-12);
        assert!((p.length() - 6.4).abs() < 1e-12);
        assert!((AxisSpec::new(5, 0.1, BoundaryCondition::Zero).length() - 3.3).abs() < 1e-12);
        assert!((AxisSpec::new(5, 0.1, BoundaryCondition::Periodic).length() - 3.2).abs() < 1e-12);
        assert_eq!(z.start(), 0.1);
        assert_eq!(p.start(), 0.0);
    }

    #[test]
    fn simple_encodings() {
        let grid = GridSpec::new_1d(AxisSpec {
            qubits: 1,
            spacing: 1.0,
            bc: BoundaryCondition::Periodic,
            start: Some(0.0),
        });
        let f = InitialCondition::Samples {
            values: vec![0.0, 1.0],
        };
        let (s, n) = encode::<f64>(&f, &grid).unwrap();
        assert_eq!(n, 1.0);
        assert_eq!(s.real_parts(), vec![0.0, 1.0]);

        let (s, n) = encode_samples::<f64>(&[1.0; 16]).unwrap();
        assert!((n - 4.0).abs() < 1e-15);
        assert!(s.real_parts().iter().all(|&a| (a - 0.25).abs() < 1e-15));

        let (s, n) = encode_samples::<f64>(&[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!((n - 10f64.sqrt()).abs() < 1e-15);
        assert!((s.real_parts()[1] - 2.0 / 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn encoding_errors() {
        assert!(matches!(
            encode_samples::<f64>(&[0.0, 0.0]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            encode_samples::<f64>(&[1.0, -0.5]),
            Err(Error::UnsupportedFunction(_))
        ));
    }

    #[test]
    fn waveforms_respect_boundaries() {
        let z = GridSpec::new_1d(AxisSpec::new(6, 0.1, BoundaryCondition::Zero));
        let sq = InitialCondition::SquareWave.sample(&z).unwrap();
        assert_eq!(sq.iter().filter(|&&v| v == 1.0).count(), 32);
        assert_eq!(sq[15], 0.0);
        assert_eq!(sq[16], 1.0);
        assert_eq!(sq[47], 1.0);
        assert_eq!(sq[48], 0.0);

        let par = InitialCondition::InvertedParabola { max_height: 1.5 }
            .sample(&z)
            .unwrap();
        assert!(par.iter().all(|&v| v > 0.0 && v <= 1.5));
        // symmetric about the centre of the (N+1)h interval
        assert!((par[0] - par[63]).abs() < 1e-12);

        let p = GridSpec::new_1d(AxisSpec::new(6, 0.1, BoundaryCondition::Periodic));
        let tri = InitialCondition::TriangleWave {
            height: 1.0,
            offset: 1.0,
        }
        .sample(&p)
        .unwrap();
        assert_eq!(tri[0], 1.0);
        assert!((tri[32] - 2.0).abs() < 1e-12);
        let mn = tri.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(mn >= 1.0);
    }

    #[test]
    fn product_encoding_factorizes() {
        let x = AxisSpec::new(3, 0.1, BoundaryCondition::Zero);
        let y = AxisSpec::new(2, 0.1, BoundaryCondition::Periodic);
        let grid = GridSpec::new_2d(x.clone(), y.clone());
        let fx = InitialCondition::InvertedParabola { max_height: 1.5 };
        let fy = InitialCondition::TriangleWave {
            height: 1.0,
            offset: 0.5,
        };
        let prod = InitialCondition::Product {
            x_factor: Box::new(fx.clone()),
            y_factor: Box::new(fy.clone()),
        };
        let (s, n) = encode::<f64>(&prod, &grid).unwrap();
        let (sx, nx) = encode::<f64>(&fx, &GridSpec::new_1d(x)).unwrap();
        let (sy, ny) = encode::<f64>(&fy, &GridSpec::new_1d(y)).unwrap();
        assert!((n - nx * ny).abs() < 1e-12);
        for k1 in 0..8 {
            for k2 in 0..4 {
                let a = s.amplitudes()[grid.flat_index(&[k1, k2])].re;
                let b = sx.amplitudes()[k1].re * sy.amplitudes()[k2].re;
                assert!((a - b).abs() < 1e-15);
            }
        }
        assert!(InitialCondition::SquareWave.sample(&grid).is_err());
    }

    #[test]
    fn decode_indexing() {
        let grid = GridSpec::new_2d(
            AxisSpec::new(2, 0.1, BoundaryCondition::Periodic),
            AxisSpec::new(2, 0.1, BoundaryCondition::Periodic),
        );
        let vals: Vec<f64> = (0..16).map(|k| k as f64).collect();
        let (s, n) = encode_samples::<f64>(&vals).unwrap();
        let field = decode(&s, n, &grid).unwrap();
        assert!((field.get(&[1, 3]) - 7.0).abs() < 1e-12);
        assert_eq!(grid.flat_index(&[1, 3]), 7);
        assert_eq!(grid.axis_indices(7), vec![1, 3]);
        assert!(decode(&s, 0.0, &grid)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn readout_exact_and_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let s = StateVector::from_real(&[0.25f64.sqrt(), 0.75f64.sqrt()]).unwrap();
        let p = readout_probabilities(&s, None, &mut rng).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
        let back = amplitudes_from_probabilities(&p).unwrap();
        assert!(back.distance(&s).unwrap() < 1e-15);

        let h = StateVector::from_real(&[0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        let p = readout_probabilities(&h, Some(1_000_000), &mut rng).unwrap();
        assert!((p[0] - 0.5).abs() < 0.002);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
        assert!(readout_probabilities(&h, Some(0), &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(vals in proptest::collection::vec(0.0f64..10.0, 8)) {
            prop_assume!(vals.iter().any(|&v| v > 0.0));
            let grid = GridSpec::new_1d(AxisSpec::new(3, 0.1, BoundaryCondition::Zero));
            let f = InitialCondition::Samples { values: vals.clone() };
            let (s, n) = encode::<f64>(&f, &grid).unwrap();
            let back = decode(&s, n, &grid).unwrap();
            for (a, b) in back.values.iter().zip(&vals) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
