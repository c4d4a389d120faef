//! Dense statevector engine for image states.
//!
//! Layout: the grey-level qubit is the most significant index, so for an image
//! with `2^{2n}` pixels `amps[j]` is the `|0⟩ ⊗ |j⟩` amplitude and
//! `amps[2^{2n} + j]` is the `|1⟩ ⊗ |j⟩` amplitude.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phasecore::{PhaseImage, PhaseMap, MAX_N};
use crate::synthesis::DiagonalUnitary;

/// Tolerance used to decide whether the `|0⟩` branch is uniform.
const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within `1e-9`).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Validation("empty statevector".into()));
        }
        let state = Self { amps };
        let norm = state.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("statevector norm is {norm}")));
        }
        Ok(state)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Validation(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Hadamard on qubit `qubit` (0 = least significant).
    fn hadamard(&mut self, qubit: u32) {
        let stride = 1usize << qubit;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for base in (0..self.amps.len()).step_by(2 * stride) {
            for k in base..base + stride {
                let (a, b) = (self.amps[k], self.amps[k + stride]);
                self.amps[k] = (a + b) * s;
                self.amps[k + stride] = (a - b) * s;
            }
        }
    }

    /// Image exponent `n` for a state of dimension `2^{2n+1}`.
    fn image_exponent(&self) -> Result<u32> {
        let dim = self.dim();
        if !dim.is_power_of_two() || dim.trailing_zeros() % 2 != 1 {
            return Err(Error::MalformedState(format!(
                "dimension {dim} is not of the form 2^(2n+1)"
            )));
        }
        Ok((dim.trailing_zeros() - 1) / 2)
    }

    fn check_reference_branch(&self) -> Result<usize> {
        let half = self.dim() / 2;
        let reference = self.amps[0];
        if reference.norm() < STRUCTURE_TOL {
            return Err(Error::MalformedState("zero |0⟩-branch amplitude".into()));
        }
        if let Some(j) = self.amps[..half]
            .iter()
            .position(|a| (a - reference).norm() > STRUCTURE_TOL)
        {
            return Err(Error::MalformedState(format!(
                "|0⟩-branch amplitude at pixel {j} differs from pixel 0"
            )));
        }
        Ok(half)
    }
}

/// Gate counts emitted by a preparation routine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateTrace {
    pub hadamard_count: usize,
    pub controlled_rotation_count: usize,
}

fn check_cap(n: u32) -> Result<()> {
    if n > MAX_N {
        return Err(Error::ResourceCap(format!(
            "image exponent n = {n} exceeds the limit {MAX_N}"
        )));
    }
    Ok(())
}

/// Prepares `(1/(2^n√2)) Σ_j (|0⟩ + e^{iθ_j}|1⟩) ⊗ |j⟩` gate by gate.
///
/// A Hadamard layer on all `2n+1` qubits yields the uniform superposition; each
/// pixel then receives a phase gate `diag(1, e^{iθ_j})` on the grey qubit,
/// controlled on the position register being `|j⟩`.
pub fn prepare_image_state(image: &PhaseImage) -> Result<(StateVector, GateTrace)> {
    let n = image.n();
    check_cap(n)?;
    let pixels = image.len();
    let mut state = StateVector::basis(2 * pixels, 0)?;
    let mut trace = GateTrace::default();
    for qubit in 0..=2 * n {
        state.hadamard(qubit);
        trace.hadamard_count += 1;
    }
    for (j, &theta) in image.phases().iter().enumerate() {
        state.amps[pixels + j] *= Complex64::cis(theta);
        trace.controlled_rotation_count += 1;
    }
    Ok((state, trace))
}

/// Prepares the angle-encoded state `(1/2^n) Σ_j (cos β_j|0⟩ + sin β_j|1⟩) ⊗ |j⟩`.
///
/// Hadamards on the `2n` position qubits, then one controlled `R_y(2β_j)` per pixel.
pub fn prepare_frqi_angle_state(angles: &PhaseMap) -> Result<(StateVector, GateTrace)> {
    let n = angles.n;
    check_cap(n)?;
    if let Some((j, bad)) = angles
        .phases
        .iter()
        .enumerate()
        .find(|(_, &b)| !(0.0..=FRAC_PI_2).contains(&b))
    {
        return Err(Error::Validation(format!(
            "angle {bad} at pixel {j} is outside [0, π/2]"
        )));
    }
    let pixels = angles.len();
    let mut state = StateVector::basis(2 * pixels, 0)?;
    let mut trace = GateTrace::default();
    for qubit in 0..2 * n {
        state.hadamard(qubit);
        trace.hadamard_count += 1;
    }
    for (j, &beta) in angles.phases.iter().enumerate() {
        let (s, c) = beta.sin_cos();
        let (a0, a1) = (state.amps[j], state.amps[pixels + j]);
        state.amps[j] = a0 * c - a1 * s;
        state.amps[pixels + j] = a0 * s + a1 * c;
        trace.controlled_rotation_count += 1;
    }
    Ok((state, trace))
}

/// Collapses the `|0⟩` branch of an image state into one reference basis state,
/// producing `(1/√d)(|0⟩ + Σ_{j≥1} e^{iθ_{j−1}}|j⟩)` with `d = 2^{2n} + 1`.
pub fn reindex_to_mpe_form(state: &StateVector) -> Result<StateVector> {
    state.image_exponent()?;
    let half = state.check_reference_branch()?;
    let reference_phase = state.amps[0].arg();
    let d = half + 1;
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = Vec::with_capacity(d);
    amps.push(Complex64::new(scale, 0.0));
    amps.extend(
        state.amps[half..]
            .iter()
            .map(|a| Complex64::from_polar(scale, a.arg() - reference_phase)),
    );
    Ok(StateVector { amps })
}

/// Applies `diag(e^{i·angle[k]})`.
pub fn apply_diagonal(op: &DiagonalUnitary, state: &StateVector) -> Result<StateVector> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            actual: op.dim(),
        });
    }
    let amps = state
        .amps
        .iter()
        .zip(op.angles())
        .map(|(a, &angle)| a * Complex64::cis(angle))
        .collect();
    Ok(StateVector { amps })
}

/// Reads the relative phase of each pixel, `arg(amps[2^{2n}+j]) − arg(amps[j])`,
/// wrapped to `[0, 2π)`.
pub fn extract_phases_exact(state: &StateVector) -> Result<PhaseMap> {
    let n = state.image_exponent()?;
    let half = state.dim() / 2;
    let phases = (0..half)
        .map(|j| {
            let (a0, a1) = (state.amps[j], state.amps[half + j]);
            if a0.norm() < STRUCTURE_TOL || a1.norm() < STRUCTURE_TOL {
                return Err(Error::MalformedState(format!(
                    "pixel {j} has a vanishing branch amplitude"
                )));
            }
            Ok((a1 * a0.conj()).arg().rem_euclid(TAU))
        })
        .collect::<Result<Vec<_>>>()?;
    PhaseMap::new(n, phases)
}
