//! Phase-estimation simulation.
//!
//! Two noise laws are provided. The covariant oracle samples the canonical
//! phase-measurement density of an `N`-qubit symmetric probe whose number
//! distribution is binomial(`N`, 1/2):
//!
//! ```text
//! p(δ) = (1/2π) |Σ_{m=0}^{N} c_m e^{imδ}|²,   c_m = √(C(N, m) / 2^N)
//! ```
//!
//! The analytic law is a wrapped normal with `σ = 1/(2ΔN) = 1/√N`, its cheap
//! large-`N` surrogate. Each pixel is estimated independently from its own
//! counter-based stream, so results do not depend on evaluation order.

use std::f64::consts::{FRAC_1_PI, PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasecore::{restrict_phase, PhaseImage, DEFAULT_EPSILON};
use crate::rng;

/// Grid resolution of the inverse-CDF table used by the covariant oracle.
pub const POVM_GRID_POINTS: usize = 1 << 14;

/// Largest probe size accepted by the covariant oracle.
pub const MAX_POVM_RESOURCE: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMode {
    /// Wrapped-normal errors with `σ = 1/√N`.
    Analytic,
    /// Errors drawn from the covariant phase-measurement density.
    PovmOracle,
    /// Infinite precision: estimates equal the true phases.
    Exact,
}

impl EstimationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::PovmOracle => "povm-oracle",
            Self::Exact => "exact",
        }
    }
}

/// Spread `ΔN = √N/2` of the number operator for the binomial probe.
pub fn number_spread(resource: u32) -> f64 {
    f64::from(resource).sqrt() / 2.0
}

fn check_resource(resource: u32) -> Result<()> {
    if resource == 0 {
        return Err(Error::Config("estimation resource N must be at least 1".into()));
    }
    Ok(())
}

/// Probe amplitudes `c_m = √(C(N, m)/2^N)`, computed in log space.
fn probe_amplitudes(resource: u32) -> Vec<f64> {
    let n = f64::from(resource);
    let half_log = -n * std::f64::consts::LN_2 / 2.0;
    let mut log_binom = 0.0;
    (0..=resource)
        .map(|m| {
            let c = (half_log + log_binom / 2.0).exp();
            let m = f64::from(m);
            log_binom += ((n - m) / (m + 1.0)).ln();
            c
        })
        .collect()
}

/// Density of the covariant phase-measurement error `δ` for an `N`-qubit probe.
pub fn povm_density(resource: u32, delta: f64) -> Result<f64> {
    check_resource(resource)?;
    let amp: num_complex::Complex64 = probe_amplitudes(resource)
        .iter()
        .enumerate()
        .map(|(m, &c)| num_complex::Complex64::from_polar(c, m as f64 * delta))
        .sum();
    Ok(amp.norm_sqr() / TAU)
}

/// Inverse-CDF sampler for [`povm_density`].
///
/// The CDF is tabulated exactly on a uniform grid over `(−π, π]` using the
/// Fourier form `p(δ) = (1/2π)(1 + 2Σ_k a_k cos kδ)` with autocorrelations
/// `a_k = Σ_m c_m c_{m+k}`, then inverted by linear interpolation.
#[derive(Debug, Clone)]
pub struct PovmSampler {
    resource: u32,
    cdf: Vec<f64>,
}

impl PovmSampler {
    pub fn new(resource: u32) -> Result<Self> {
        check_resource(resource)?;
        if resource > MAX_POVM_RESOURCE {
            return Err(Error::ResourceCap(format!(
                "covariant oracle supports N ≤ {MAX_POVM_RESOURCE}, got {resource}"
            )));
        }
        let c = probe_amplitudes(resource);
        let autocorr: Vec<f64> = (1..c.len())
            .map(|k| c.iter().zip(&c[k..]).map(|(a, b)| a * b).sum())
            .collect();
        let step = TAU / POVM_GRID_POINTS as f64;
        let mut cdf: Vec<f64> = (0..=POVM_GRID_POINTS)
            .map(|i| {
                let delta = -PI + step * i as f64;
                let harmonics: f64 = autocorr
                    .iter()
                    .enumerate()
                    .map(|(k, a)| {
                        let k = (k + 1) as f64;
                        a * (k * delta).sin() / k
                    })
                    .sum();
                (delta + PI) / TAU + FRAC_1_PI * harmonics
            })
            .collect();
        // Pin the endpoints and remove rounding-level non-monotonicity.
        cdf[0] = 0.0;
        cdf[POVM_GRID_POINTS] = 1.0;
        for i in 1..cdf.len() {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        Ok(Self { resource, cdf })
    }

    pub fn resource(&self) -> u32 {
        self.resource
    }

    /// Tabulated CDF at grid point `i` (`δ_i = −π + 2πi/G`).
    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    /// Maps a uniform variate in `[0, 1)` to an error in `(−π, π]`.
    pub fn invert(&self, u: f64) -> f64 {
        let upper = self.cdf.partition_point(|&c| c <= u).clamp(1, POVM_GRID_POINTS);
        let lower = upper - 1;
        let (c0, c1) = (self.cdf[lower], self.cdf[upper]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        let step = TAU / POVM_GRID_POINTS as f64;
        -PI + step * (lower as f64 + frac.clamp(0.0, 1.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.invert(rng.random::<f64>())
    }
}

/// Error law for one estimation resource and mode.
#[derive(Debug, Clone)]
pub enum ErrorModel {
    Exact,
    Analytic { sigma: f64 },
    Povm(PovmSampler),
}

impl ErrorModel {
    pub fn new(resource: u32, mode: EstimationMode) -> Result<Self> {
        check_resource(resource)?;
        Ok(match mode {
            EstimationMode::Exact => Self::Exact,
            EstimationMode::Analytic => Self::Analytic {
                sigma: 1.0 / f64::from(resource).sqrt(),
            },
            EstimationMode::PovmOracle => Self::Povm(PovmSampler::new(resource)?),
        })
    }

    /// One measurement error, wrapped to `(−π, π]`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exact => 0.0,
            Self::Analytic { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                wrap_to_pi(sigma * z)
            }
            Self::Povm(sampler) => sampler.sample(rng),
        }
    }
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Draws `count` measurement errors from stream `stream` of `seed`.
pub fn sample_errors(
    resource: u32,
    mode: EstimationMode,
    seed: u64,
    stream: u64,
    count: usize,
) -> Result<Vec<f64>> {
    let model = ErrorModel::new(resource, mode)?;
    let mut rng = rng::stream(seed, stream);
    Ok((0..count).map(|_| model.draw(&mut rng)).collect())
}

/// Estimated phases of one image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseEstimate {
    /// Restricted estimates, each in `(0, π/2]`.
    pub estimates: Vec<f64>,
    /// Measurement error of each pixel before restriction, in `(−π, π]`.
    pub raw_errors: Vec<f64>,
    /// Pixels whose restriction hit an exact multiple of `π/2`.
    pub floored: Vec<bool>,
    pub resource: u32,
    pub mode: EstimationMode,
    pub seed: u64,
}

impl PhaseEstimate {
    /// Infinite-precision estimate: the true phases themselves.
    pub fn exact(image: &PhaseImage) -> Self {
        Self {
            estimates: image.phases().to_vec(),
            raw_errors: vec![0.0; image.len()],
            floored: vec![false; image.len()],
            resource: u32::MAX,
            mode: EstimationMode::Exact,
            seed: 0,
        }
    }

    /// Builds an estimate from caller-provided phases, restricting each into
    /// `(0, π/2]`.
    pub fn from_phases(phases: &[f64], floor: f64) -> Self {
        let restricted: Vec<_> = phases.iter().map(|&p| restrict_phase(p, floor)).collect();
        Self {
            estimates: restricted.iter().map(|r| r.phase).collect(),
            raw_errors: vec![0.0; phases.len()],
            floored: restricted.iter().map(|r| r.floored).collect(),
            resource: u32::MAX,
            mode: EstimationMode::Exact,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}

/// Estimates every pixel phase of `image`.
///
/// Pixel `j` uses the first draw of stream `j` of `seed`; the estimate is
/// `restrict_phase(θ_j + ε_j)` with the guard band `floor`.
pub fn estimate_phases_with_floor(
    image: &PhaseImage,
    resource: u32,
    mode: EstimationMode,
    seed: u64,
    floor: f64,
) -> Result<PhaseEstimate> {
    let model = ErrorModel::new(resource, mode)?;
    let mut estimates = Vec::with_capacity(image.len());
    let mut raw_errors = Vec::with_capacity(image.len());
    let mut floored = Vec::with_capacity(image.len());
    for (j, &theta) in image.phases().iter().enumerate() {
        let err = model.draw(&mut rng::stream(seed, j as u64));
        let r = restrict_phase(theta + err, floor);
        estimates.push(r.phase);
        raw_errors.push(err);
        floored.push(r.floored);
    }
    Ok(PhaseEstimate {
        estimates,
        raw_errors,
        floored,
        resource,
        mode,
        seed,
    })
}

/// [`estimate_phases_with_floor`] with the default guard band.
pub fn estimate_phases(
    image: &PhaseImage,
    resource: u32,
    mode: EstimationMode,
    seed: u64,
) -> Result<PhaseEstimate> {
    estimate_phases_with_floor(image, resource, mode, seed, DEFAULT_EPSILON)
}

/// Circular dispersion of a phase sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircularSpread {
    /// `D{e^{iφ}} / |E{e^{iφ}}|²`.
    pub variance: f64,
    /// Square root of `variance`.
    pub deviation: f64,
    /// `|E{e^{iφ}}|`.
    pub resultant: f64,
    /// Circular mean direction.
    pub mean_direction: f64,
    /// Delta-method standard error of `deviation`.
    pub standard_error: f64,
    pub samples: usize,
}

/// Holevo circular variance of a phase sample.
pub fn holevo_variance(samples: &[f64]) -> Result<f64> {
    circular_spread(samples).map(|s| s.variance)
}

pub fn circular_spread(samples: &[f64]) -> Result<CircularSpread> {
    if samples.len() < 2 {
        return Err(Error::Validation(format!(
            "circular variance needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let count = samples.len() as f64;
    let (sum_c, sum_s) = samples
        .iter()
        .fold((0.0, 0.0), |(c, s), &p| (c + p.cos(), s + p.sin()));
    let (mean_c, mean_s) = (sum_c / count, sum_s / count);
    let resultant = mean_c.hypot(mean_s);
    if resultant <= 1e-9 {
        return Err(Error::DegenerateDistribution(resultant));
    }
    let dispersion = samples
        .iter()
        .map(|&p| (p.cos() - mean_c).powi(2) + (p.sin() - mean_s).powi(2))
        .sum::<f64>()
        / count;
    let variance = dispersion / (resultant * resultant);
    let deviation = variance.sqrt();
    let mean_direction = mean_s.atan2(mean_c);

    // Var(R̂) ≈ Var(cos(φ − μ))/n and dΔ/dR = −1/(R³Δ).
    let projected_var = samples
        .iter()
        .map(|&p| ((p - mean_direction).cos() - resultant).powi(2))
        .sum::<f64>()
        / (count - 1.0);
    let resultant_se = (projected_var / count).sqrt();
    let standard_error = if deviation > 0.0 {
        resultant_se / (resultant.powi(3) * deviation)
    } else {
        0.0
    };
    Ok(CircularSpread {
        variance,
        deviation,
        resultant,
        mean_direction,
        standard_error,
        samples: samples.len(),
    })
}

/// Fidelity `|⟨ψ_0|ψ(r)⟩|²` between the reference multi-phase state and one
/// whose phases are off by the residuals `r_j = est_j − true_j`:
///
/// `(1/d²)[d + 2Σ_j cos r_j + 2Σ_{j>k} cos(r_j − r_k)]`.
pub fn mpe_fidelity(true_phases: &[f64], est_phases: &[f64], d: usize) -> Result<f64> {
    if true_phases.len() != est_phases.len() {
        return Err(Error::DimensionMismatch {
            expected: true_phases.len(),
            actual: est_phases.len(),
        });
    }
    if d == 0 || true_phases.len() != d - 1 {
        return Err(Error::DimensionMismatch {
            expected: d.saturating_sub(1),
            actual: true_phases.len(),
        });
    }
    let residuals: Vec<f64> = est_phases
        .iter()
        .zip(true_phases)
        .map(|(e, t)| e - t)
        .collect();
    let singles: f64 = residuals.iter().map(|r| r.cos()).sum();
    let pairs: f64 = residuals
        .iter()
        .enumerate()
        .map(|(j, rj)| residuals[..j].iter().map(|rk| (rj - rk).cos()).sum::<f64>())
        .sum();
    let d = d as f64;
    Ok(((d + 2.0 * singles + 2.0 * pairs) / (d * d)).clamp(0.0, 1.0))
}
