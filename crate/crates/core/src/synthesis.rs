//! Rotation operators and the three-step synthesis pipeline.
//!
//! The carrier image `φ` is prepared as a state; the embedder `θ` is folded in
//! by a diagonal rotation built from phase estimates. The corrected operator
//! puts `e^{i[(π/2)tanh(θ'_j + φ'_j) − φ'_j]}` on pixel `j` of the grey branch,
//! so the carrier's phase becomes `(π/2)tanh(θ'_j + φ'_j) + (φ_j − φ'_j)`. The
//! naive operator adds `θ'_j` directly and can overflow past `π/2`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, MetricsReport};
use crate::error::{Error, Result};
use crate::mpe::{estimate_phases_with_floor, EstimationMode, PhaseEstimate};
use crate::phasecore::{PhaseImage, PhaseMap, DEFAULT_EPSILON};
use crate::rng::derive_seed;
use crate::statevec::{apply_diagonal, extract_phases_exact, prepare_image_state, StateVector};

const CARRIER_STREAM: u64 = 1;
const EMBEDDER_STREAM: u64 = 2;

/// `(π/2)·tanh(x)`: maps `(0, π)` strictly into `(0, π/2)`.
pub fn squash(x: f64) -> f64 {
    FRAC_PI_2 * x.tanh()
}

/// Diagonal unitary `diag(e^{i·angle[k]})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalUnitary {
    angles: Vec<f64>,
}

impl DiagonalUnitary {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Validation("operator dimension must be positive".into()));
        }
        if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::Validation(format!("non-finite rotation angle {bad}")));
        }
        Ok(Self { angles })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            angles: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Diagonal entries `e^{i·angle[k]}`.
    pub fn entries(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&a| Complex64::cis(a)).collect()
    }

    /// Conjugate transpose.
    pub fn inverse(&self) -> Self {
        Self {
            angles: self.angles.iter().map(|a| -a).collect(),
        }
    }

    /// Largest deviation of `U·U†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        self.entries()
            .iter()
            .map(|e| (e * e.conj() - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    /// Squashed operator built from both estimates.
    Corrected,
    /// Embedder-only operator with no overflow control.
    Naive,
}

impl OperatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Corrected => "corrected",
            Self::Naive => "naive",
        }
    }
}

fn image_operator(grey_angles: impl ExactSizeIterator<Item = f64>) -> DiagonalUnitary {
    let half = grey_angles.len();
    let mut angles = vec![0.0; half];
    angles.extend(grey_angles);
    DiagonalUnitary { angles }
}

fn check_estimate_len(n: u32, est: &PhaseEstimate) -> Result<()> {
    let expected = 1usize << (2 * n);
    if est.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: est.len(),
        });
    }
    Ok(())
}

/// Corrected operator: identity on the `|0⟩` branch,
/// `(π/2)tanh(θ'_j + φ'_j) − φ'_j` on grey-branch pixel `j`.
pub fn build_corrected_operator(
    embedder_est: &PhaseEstimate,
    carrier_est: &PhaseEstimate,
    n: u32,
) -> Result<DiagonalUnitary> {
    check_estimate_len(n, embedder_est)?;
    check_estimate_len(n, carrier_est)?;
    Ok(image_operator(
        embedder_est
            .estimates
            .iter()
            .zip(&carrier_est.estimates)
            .map(|(&theta, &phi)| squash(theta + phi) - phi),
    ))
}

/// Naive operator: identity on the `|0⟩` branch, `θ'_j` on grey-branch pixel `j`.
pub fn build_naive_operator(embedder_est: &PhaseEstimate, n: u32) -> Result<DiagonalUnitary> {
    check_estimate_len(n, embedder_est)?;
    Ok(image_operator(embedder_est.estimates.iter().copied()))
}

/// Wraps a phase from `[0, 2π)` into the reporting interval `(−π/2, π)`
/// (values past `5π/4` are read as negative).
pub fn to_reporting_interval(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p > 1.25 * PI {
        p - TAU
    } else {
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisParams {
    pub resource_carrier: u32,
    pub resource_embedder: u32,
    pub mode: EstimationMode,
    pub seed: u64,
    pub operator_kind: OperatorKind,
    /// Guard band used when restricting estimates.
    pub floor: f64,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            resource_carrier: 16,
            resource_embedder: 16,
            mode: EstimationMode::Analytic,
            seed: 0,
            operator_kind: OperatorKind::Corrected,
            floor: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisRun {
    pub carrier: PhaseImage,
    pub embedder: PhaseImage,
    /// `None` for the naive operator, which never measures the carrier.
    pub carrier_estimate: Option<PhaseEstimate>,
    pub embedder_estimate: PhaseEstimate,
    pub operator_kind: OperatorKind,
    pub operator: DiagonalUnitary,
    pub result_state: StateVector,
    /// Synthesized phases in the reporting interval `(−π/2, π)`.
    pub result_image: PhaseMap,
    pub metrics: MetricsReport,
}

impl SynthesisRun {
    /// `θ'_j + φ'_j` for the corrected operator, `θ'_j + φ_j` for the naive one.
    pub fn input_sums(&self) -> Vec<f64> {
        let carrier = self
            .carrier_estimate
            .as_ref()
            .map_or(self.carrier.phases(), |e| &e.estimates[..]);
        self.embedder_estimate
            .estimates
            .iter()
            .zip(carrier)
            .map(|(t, p)| t + p)
            .collect()
    }

    /// `δ_j = φ_j − φ'_j` (zero for the naive operator).
    pub fn deltas(&self) -> Vec<f64> {
        match &self.carrier_estimate {
            Some(est) => self
                .carrier
                .phases()
                .iter()
                .zip(&est.estimates)
                .map(|(p, e)| p - e)
                .collect(),
            None => vec![0.0; self.carrier.len()],
        }
    }
}

/// Estimates the phases needed by `kind`, builds its operator, prepares the
/// carrier state and applies the operator.
pub fn synthesize(
    carrier: &PhaseImage,
    embedder: &PhaseImage,
    params: &SynthesisParams,
) -> Result<SynthesisRun> {
    if carrier.n() != embedder.n() {
        return Err(Error::Validation(format!(
            "carrier has n = {} but embedder has n = {}",
            carrier.n(),
            embedder.n()
        )));
    }
    let n = carrier.n();
    let estimate = |img: &PhaseImage, resource: u32, tag: u64| {
        if params.mode == EstimationMode::Exact {
            Ok(PhaseEstimate::exact(img))
        } else {
            estimate_phases_with_floor(
                img,
                resource,
                params.mode,
                derive_seed(params.seed, tag),
                params.floor,
            )
        }
    };

    let embedder_estimate = estimate(embedder, params.resource_embedder, EMBEDDER_STREAM)?;
    let (carrier_estimate, operator) = match params.operator_kind {
        OperatorKind::Corrected => {
            let est = estimate(carrier, params.resource_carrier, CARRIER_STREAM)?;
            let op = build_corrected_operator(&embedder_estimate, &est, n)?;
            (Some(est), op)
        }
        OperatorKind::Naive => (None, build_naive_operator(&embedder_estimate, n)?),
    };

    let (carrier_state, _) = prepare_image_state(carrier)?;
    let result_state = apply_diagonal(&operator, &carrier_state)?;
    let extracted = extract_phases_exact(&result_state)?;
    let result_image = PhaseMap {
        n,
        phases: extracted
            .phases
            .iter()
            .map(|&p| to_reporting_interval(p))
            .collect(),
    };

    let mut run = SynthesisRun {
        carrier: carrier.clone(),
        embedder: embedder.clone(),
        carrier_estimate,
        embedder_estimate,
        operator_kind: params.operator_kind,
        operator,
        result_state,
        result_image,
        metrics: MetricsReport::default(),
    };
    run.metrics = analysis::metrics_report(&run, params)?;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::OverflowClass;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn estimate_of(phases: &[f64]) -> PhaseEstimate {
        PhaseEstimate::from_phases(phases, DEFAULT_EPSILON)
    }

    #[test]
    fn squash_examples() {
        assert_eq!(squash(0.0), 0.0);
        // 30-digit references
        assert_abs_diff_eq!(squash(3.0), 1.563_028_352_050_916_8, epsilon = 1e-14);
        assert!((FRAC_PI_2 - squash(3.0)) / FRAC_PI_2 < 0.005);
        assert_abs_diff_eq!(squash(PI / 10.0), 0.477_861_678_338_026_1, epsilon = 1e-14);
    }

    #[test]
    fn corrected_operator_examples() {
        let eps = 0.01;
        let op = build_corrected_operator(&estimate_of(&[eps]), &estimate_of(&[eps]), 0).unwrap();
        assert_eq!(op.angles()[0], 0.0);
        assert_abs_diff_eq!(op.angles()[1], eps * (PI - 1.0), epsilon = 1e-5);

        let op = build_corrected_operator(&estimate_of(&[0.9]), &estimate_of(&[0.4]), 0).unwrap();
        assert_abs_diff_eq!(op.angles()[1], 0.953_591_573_363_435_1, epsilon = 1e-14);
        assert!(op.unitarity_defect() < 1e-12);

        assert!(matches!(
            build_corrected_operator(&estimate_of(&[0.9]), &estimate_of(&[0.4, 0.4]), 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn naive_operator_examples() {
        let op = build_naive_operator(&estimate_of(&[1e-300; 4]), 1).unwrap();
        assert!(op.entries().iter().all(|e| (e - 1.0).norm() < 1e-12));

        let run = synthesize(
            &PhaseImage::new(0, vec![0.9]).unwrap(),
            &PhaseImage::new(0, vec![0.8]).unwrap(),
            &SynthesisParams {
                mode: EstimationMode::Exact,
                operator_kind: OperatorKind::Naive,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(run.result_image.phases[0], 1.7, epsilon = 1e-12);
        assert_eq!(run.metrics.per_pixel[0].overflow_class, OverflowClass::Overflow);
        assert!(run.carrier_estimate.is_none());
        assert!(build_naive_operator(&estimate_of(&[0.3]), 1).is_err());
    }

    #[test]
    fn exact_single_pixel_synthesis() {
        let run = synthesize(
            &PhaseImage::new(0, vec![0.7]).unwrap(),
            &PhaseImage::new(0, vec![0.6]).unwrap(),
            &SynthesisParams {
                mode: EstimationMode::Exact,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(run.result_image.phases[0], 1.353_591_573_363_435_1, epsilon = 1e-12);
        assert_eq!(run.metrics.per_pixel[0].overflow_class, OverflowClass::Ok);
    }

    #[test]
    fn image_sizes_must_agree() {
        let a = PhaseImage::uniform(1, 0.3).unwrap();
        let b = PhaseImage::uniform(2, 0.3).unwrap();
        assert!(matches!(
            synthesize(&a, &b, &SynthesisParams::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn reporting_interval() {
        assert_abs_diff_eq!(to_reporting_interval(TAU - 0.1), -0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(to_reporting_interval(1.7), 1.7);
        assert_abs_diff_eq!(to_reporting_interval(-0.3), -0.3, epsilon = 1e-12);
    }

    fn pair_strategy() -> impl Strategy<Value = (PhaseImage, PhaseImage, u64, u32)> {
        (0u32..=2).prop_flat_map(|n| {
            let len = 1usize << (2 * n);
            (
                proptest::collection::vec(0.01f64..FRAC_PI_2 - 0.01, len),
                proptest::collection::vec(0.01f64..FRAC_PI_2 - 0.01, len),
                any::<u64>(),
                1u32..64,
            )
                .prop_map(move |(c, e, seed, res)| {
                    (
                        PhaseImage::new(n, c).unwrap(),
                        PhaseImage::new(n, e).unwrap(),
                        seed,
                        res,
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn corrected_result_has_closed_form((carrier, embedder, seed, res) in pair_strategy()) {
            let run = synthesize(&carrier, &embedder, &SynthesisParams {
                resource_carrier: res,
                resource_embedder: res,
                seed,
                ..Default::default()
            }).unwrap();
            let c_est = run.carrier_estimate.as_ref().unwrap();
            for j in 0..carrier.len() {
                let (t, p) = (run.embedder_estimate.estimates[j], c_est.estimates[j]);
                let expected = squash(t + p) + (carrier.phases()[j] - p);
                prop_assert!((run.result_image.phases[j] - expected).abs() < 1e-10);
            }
            prop_assert!(run.operator.unitarity_defect() < 1e-12);
            prop_assert!(run.operator.angles()[..carrier.len()].iter().all(|&a| a == 0.0));
            prop_assert!((run.result_state.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn exact_estimates_stay_in_range((carrier, embedder, _seed, _res) in pair_strategy()) {
            let run = synthesize(&carrier, &embedder, &SynthesisParams {
                mode: EstimationMode::Exact,
                ..Default::default()
            }).unwrap();
            for &p in &run.result_image.phases {
                prop_assert!(p > 0.0 && p < FRAC_PI_2);
            }
        }
    }
}
