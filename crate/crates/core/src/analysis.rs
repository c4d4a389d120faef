//! Synthesis diagnostics: compression ratios, overflow classification and
//! uncertainty products.
//!
//! Two compression ratios are reported because they answer different
//! questions. [`interval_ratio`] compares the length of the output phase range
//! with the length of the input-sum range; with exact estimates over sums
//! spanning `(0, π)` it tends to `1/2`. [`pointwise_ratio`] is the per-pixel
//! quotient `((π/2)tanh(s) + δ)/s`, which tends to `π/2` as `s → 0`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpe::{
    circular_spread, mpe_fidelity, number_spread, sample_errors, wrap_to_pi, ErrorModel,
    EstimationMode,
};
use crate::phasecore::restrict_phase;
use crate::rng::{self, derive_seed};
use crate::synthesis::{squash, OperatorKind, SynthesisParams, SynthesisRun};

/// Measurement draws per stream used for a run's uncertainty block.
pub const UNCERTAINTY_DRAWS: usize = 4096;

/// Smallest stream accepted by [`uncertainty_report`].
pub const MIN_UNCERTAINTY_SAMPLES: usize = 1000;

/// Lower bound `tanh(1) + 1/2` of the joint uncertainty of a synthesized pixel.
pub fn joint_bound() -> f64 {
    1f64.tanh() + 0.5
}

/// `tanh(p1 + p2) + p1` for the two single-system products.
pub fn joint_lhs(product1: f64, product2: f64) -> f64 {
    (product1 + product2).tanh() + product1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverflowClass {
    Underflow,
    Ok,
    Overflow,
}

impl OverflowClass {
    pub fn is_exception(self) -> bool {
        self != Self::Ok
    }
}

/// `phase ≤ 0` underflows, `phase ≥ π/2` overflows.
pub fn classify_overflow(phase: f64) -> OverflowClass {
    if phase <= 0.0 {
        OverflowClass::Underflow
    } else if phase >= FRAC_PI_2 {
        OverflowClass::Overflow
    } else {
        OverflowClass::Ok
    }
}

/// `((π/2)tanh(θ' + φ') + δ) / (θ' + φ')`.
pub fn pointwise_ratio(theta_e: f64, phi_e: f64, delta: f64) -> Result<f64> {
    let sum = theta_e + phi_e;
    if !(sum > 1e-9) {
        return Err(Error::Validation(format!(
            "pointwise ratio needs θ' + φ' > 1e-9, got {sum}"
        )));
    }
    Ok((squash(sum) + delta) / sum)
}

/// Length removed from a pixel's phase, `(θ' + φ') − output`. Zero exactly
/// when [`pointwise_ratio`] is one.
pub fn removed_length(input_sum: f64, output_phase: f64) -> f64 {
    input_sum - output_phase
}

/// Output range over input range, skipping exception pixels.
pub fn interval_ratio_from(input_sums: &[f64], outputs: &[f64]) -> Result<f64> {
    if input_sums.len() != outputs.len() {
        return Err(Error::DimensionMismatch {
            expected: input_sums.len(),
            actual: outputs.len(),
        });
    }
    let kept: Vec<(f64, f64)> = input_sums
        .iter()
        .zip(outputs)
        .filter(|(_, &o)| !classify_overflow(o).is_exception())
        .map(|(&s, &o)| (s, o))
        .collect();
    let range = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
    };
    let (in_lo, in_hi) = range(&mut kept.iter().map(|p| p.0));
    let (out_lo, out_hi) = range(&mut kept.iter().map(|p| p.1));
    let span = in_hi - in_lo;
    if kept.len() < 2 || !(span > 0.0) {
        return Err(Error::Validation(
            "interval ratio needs at least two non-exception pixels with distinct input sums"
                .into(),
        ));
    }
    Ok((out_hi - out_lo) / span)
}

pub fn interval_ratio(run: &SynthesisRun) -> Result<f64> {
    interval_ratio_from(&run.input_sums(), &run.result_image.phases)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PixelMetrics {
    pub pixel: usize,
    pub input_sum: f64,
    pub output_phase: f64,
    pub delta: f64,
    pub pointwise_ratio: Option<f64>,
    pub overflow_class: OverflowClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub delta_phi: f64,
    pub delta_theta: f64,
    pub delta_n1: f64,
    pub delta_n2: f64,
    pub product1: f64,
    pub product2: f64,
    pub product1_se: f64,
    pub product2_se: f64,
    pub joint_lhs: f64,
    pub joint_lhs_se: f64,
    pub joint_bound: f64,
}

impl UncertaintyReport {
    /// Builds the block from already-known spreads and their standard errors.
    pub fn from_products(
        delta_phi: (f64, f64),
        delta_theta: (f64, f64),
        resource1: u32,
        resource2: u32,
    ) -> Self {
        let (delta_n1, delta_n2) = (number_spread(resource1), number_spread(resource2));
        let (product1, product2) = (delta_phi.0 * delta_n1, delta_theta.0 * delta_n2);
        let (product1_se, product2_se) = (delta_phi.1 * delta_n1, delta_theta.1 * delta_n2);
        let sech2 = 1.0 - (product1 + product2).tanh().powi(2);
        let joint_lhs_se =
            ((sech2 + 1.0).powi(2) * product1_se.powi(2) + sech2.powi(2) * product2_se.powi(2))
                .sqrt();
        Self {
            delta_phi: delta_phi.0,
            delta_theta: delta_theta.0,
            delta_n1,
            delta_n2,
            product1,
            product2,
            product1_se,
            product2_se,
            joint_lhs: joint_lhs(product1, product2),
            joint_lhs_se,
            joint_bound: joint_bound(),
        }
    }
}

/// Holevo spreads of two phase streams, their products with `ΔN_i = √N_i/2`
/// and the joint quantity `tanh(p1 + p2) + p1`.
pub fn uncertainty_report(
    samples_phi: &[f64],
    samples_theta: &[f64],
    resource1: u32,
    resource2: u32,
) -> Result<UncertaintyReport> {
    for (name, s) in [("φ", samples_phi), ("θ", samples_theta)] {
        if s.len() < MIN_UNCERTAINTY_SAMPLES {
            return Err(Error::Validation(format!(
                "{name} stream has {} samples, need at least {MIN_UNCERTAINTY_SAMPLES}",
                s.len()
            )));
        }
    }
    let phi = circular_spread(samples_phi)?;
    let theta = circular_spread(samples_theta)?;
    Ok(UncertaintyReport::from_products(
        (phi.deviation, phi.standard_error),
        (theta.deviation, theta.standard_error),
        resource1,
        resource2,
    ))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AggregateMetrics {
    pub interval_ratio: Option<f64>,
    pub overflow_rate: f64,
    pub underflow_rate: f64,
    pub ok_rate: f64,
    pub exception_rate: f64,
    pub mean_pointwise_ratio: Option<f64>,
    /// Fidelity of the synthesized state against the same operator's
    /// noiseless output.
    pub fidelity: Option<f64>,
    pub uncertainty: Option<UncertaintyReport>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    pub per_pixel: Vec<PixelMetrics>,
    pub aggregate: AggregateMetrics,
}

/// Neumaier-compensated mean.
fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut comp, mut count) = (0.0f64, 0.0f64, 0usize);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
        count += 1;
    }
    (count > 0).then(|| (sum + comp) / count as f64)
}

pub(crate) fn metrics_report(run: &SynthesisRun, params: &SynthesisParams) -> Result<MetricsReport> {
    let sums = run.input_sums();
    let deltas = run.deltas();
    let outputs = &run.result_image.phases;
    let per_pixel: Vec<PixelMetrics> = (0..sums.len())
        .map(|j| PixelMetrics {
            pixel: j,
            input_sum: sums[j],
            output_phase: outputs[j],
            delta: deltas[j],
            pointwise_ratio: match run.operator_kind {
                OperatorKind::Corrected => (sums[j] > 1e-9).then(|| (squash(sums[j]) + deltas[j]) / sums[j]),
                OperatorKind::Naive => (sums[j] > 1e-9).then(|| outputs[j] / sums[j]),
            },
            overflow_class: classify_overflow(outputs[j]),
        })
        .collect();

    let total = per_pixel.len() as f64;
    let rate = |class| per_pixel.iter().filter(|p| p.overflow_class == class).count() as f64 / total;
    let (overflow_rate, underflow_rate, ok_rate) = (
        rate(OverflowClass::Overflow),
        rate(OverflowClass::Underflow),
        rate(OverflowClass::Ok),
    );

    let targets: Vec<f64> = run
        .carrier
        .phases()
        .iter()
        .zip(run.embedder.phases())
        .map(|(&phi, &theta)| match run.operator_kind {
            OperatorKind::Corrected => squash(theta + phi),
            OperatorKind::Naive => theta + phi,
        })
        .collect();
    let fidelity = mpe_fidelity(&targets, outputs, targets.len() + 1).ok();

    let uncertainty = match (params.mode, run.operator_kind) {
        (EstimationMode::Exact, _) | (_, OperatorKind::Naive) => None,
        (mode, OperatorKind::Corrected) => {
            let draws = |resource, tag| {
                sample_errors(resource, mode, derive_seed(params.seed, tag), 0, UNCERTAINTY_DRAWS)
            };
            let phi = draws(params.resource_carrier, 0x100)?;
            let theta = draws(params.resource_embedder, 0x200)?;
            uncertainty_report(&phi, &theta, params.resource_carrier, params.resource_embedder).ok()
        }
    };

    Ok(MetricsReport {
        aggregate: AggregateMetrics {
            interval_ratio: interval_ratio_from(&sums, outputs).ok(),
            overflow_rate,
            underflow_rate,
            ok_rate,
            exception_rate: overflow_rate + underflow_rate,
            mean_pointwise_ratio: mean(
                per_pixel
                    .iter()
                    .filter(|p| !p.overflow_class.is_exception())
                    .filter_map(|p| p.pointwise_ratio),
            ),
            fidelity,
            uncertainty,
        },
        per_pixel,
    })
}

/// Phase-error spread of a single estimation system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleTrend {
    pub resource: u32,
    pub delta_n: f64,
    pub spread: f64,
    pub spread_se: f64,
    pub product: f64,
    pub product_se: f64,
}

/// Error spread of a synthesized pixel for one `(N1, N2)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTrend {
    pub resource_carrier: u32,
    pub resource_embedder: u32,
    pub joint_spread: f64,
    pub joint_spread_se: f64,
    pub exception_rate: f64,
    pub uncertainty: UncertaintyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendTable {
    pub mode: EstimationMode,
    pub trials: usize,
    pub seed: u64,
    pub single: Vec<SingleTrend>,
    pub joint: Vec<JointTrend>,
}

/// Empirical precision as a function of the estimation resources.
///
/// Single rows: the Holevo spread of `trials` measurement errors per resource.
/// Joint rows: for every `(N1, N2)` pair, `trials` random pixel pairs are
/// estimated and synthesized with the corrected operator; the spread is that
/// of the synthesized phase around its noiseless value.
pub fn trend_table(
    resources: &[u32],
    trials: usize,
    seed: u64,
    mode: EstimationMode,
    floor: f64,
) -> Result<TrendTable> {
    if resources.is_empty() {
        return Err(Error::Config("trend table needs at least one resource".into()));
    }
    if mode == EstimationMode::Exact {
        return Err(Error::Config("trend table needs a noisy estimation mode".into()));
    }

    let mut single = Vec::with_capacity(resources.len());
    for &resource in resources {
        let errors = sample_errors(resource, mode, derive_seed(seed, u64::from(resource)), 0, trials)?;
        let spread = circular_spread(&errors)?;
        let delta_n = number_spread(resource);
        single.push(SingleTrend {
            resource,
            delta_n,
            spread: spread.deviation,
            spread_se: spread.standard_error,
            product: spread.deviation * delta_n,
            product_se: spread.standard_error * delta_n,
        });
    }

    let mut joint = Vec::with_capacity(resources.len() * resources.len());
    for (i, &n1) in resources.iter().enumerate() {
        for (k, &n2) in resources.iter().enumerate() {
            let carrier_model = ErrorModel::new(n1, mode)?;
            let embedder_model = ErrorModel::new(n2, mode)?;
            let pair_seed = derive_seed(seed, (u64::from(n1) << 32) | u64::from(n2));
            let mut errors = Vec::with_capacity(trials);
            let mut exceptions = 0usize;
            for t in 0..trials {
                let mut rng = rng::stream(pair_seed, t as u64);
                use rand::Rng;
                let phi = floor + rng.random::<f64>() * (FRAC_PI_2 - 2.0 * floor);
                let theta = floor + rng.random::<f64>() * (FRAC_PI_2 - 2.0 * floor);
                let phi_e = restrict_phase(phi + carrier_model.draw(&mut rng), floor).phase;
                let theta_e = restrict_phase(theta + embedder_model.draw(&mut rng), floor).phase;
                let output = squash(theta_e + phi_e) + (phi - phi_e);
                exceptions += usize::from(classify_overflow(output).is_exception());
                errors.push(wrap_to_pi(output - squash(theta + phi)));
            }
            let spread = circular_spread(&errors)?;
            joint.push(JointTrend {
                resource_carrier: n1,
                resource_embedder: n2,
                joint_spread: spread.deviation,
                joint_spread_se: spread.standard_error,
                exception_rate: exceptions as f64 / trials as f64,
                uncertainty: UncertaintyReport::from_products(
                    (single[i].spread, single[i].spread_se),
                    (single[k].spread, single[k].spread_se),
                    n1,
                    n2,
                ),
            });
        }
    }

    Ok(TrendTable {
        mode,
        trials,
        seed,
        single,
        joint,
    })
}
