//! Browser bindings for three interactive views: the squashing curve,
//! the covariant estimation noise at a chosen resource, and synthesis of two
//! generated patterns.
//!
//! Every export is a thin wrapper over a plain Rust function so the logic can
//! be tested natively.

use std::f64::consts::PI;

use qimage_core::analysis::OverflowClass;
use qimage_core::mpe::{
    circular_spread, number_spread, povm_density, sample_errors, EstimationMode,
};
use qimage_core::synthesis::{squash, synthesize, SynthesisParams};
use qimage_core::{GrayImage, OperatorKind, PhaseCodec};
use wasm_bindgen::prelude::*;

const MAX_DEMO_SIDE_LOG2: u32 = 5;

fn js_err(e: qimage_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[x, squash(x), squash(x)/x]` triples for `points` samples of `x ∈ (0, hi]`.
pub fn squash_table(hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (1..=points)
        .flat_map(|i| {
            let x = hi * i as f64 / points as f64;
            let y = squash(x);
            [x, y, y / x]
        })
        .collect()
}

/// Mean compression of the interval `[a, b]`: `(π/2)(tanh b − tanh a)/(b − a)`.
pub fn interval_compression(a: f64, b: f64) -> f64 {
    if (b - a).abs() < 1e-12 {
        return squash(a) / a;
    }
    (squash(b) - squash(a)) / (b - a)
}

/// `[δ, p(δ)]` pairs over `[−π, π]`.
pub fn density_table(resource: u32, points: usize) -> qimage_core::Result<Vec<f64>> {
    let points = points.max(2);
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let delta = -PI + 2.0 * PI * i as f64 / (points - 1) as f64;
        out.push(delta);
        out.push(povm_density(resource, delta)?);
    }
    Ok(out)
}

/// `[Δφ, ΔN, Δφ·ΔN]` from `draws` covariant-measurement samples.
pub fn noise_summary(resource: u32, draws: usize, seed: u64) -> qimage_core::Result<Vec<f64>> {
    let errors = sample_errors(resource, EstimationMode::PovmOracle, seed, 0, draws)?;
    let spread = circular_spread(&errors)?;
    let dn = number_spread(resource);
    Ok(vec![spread.deviation, dn, spread.deviation * dn])
}

fn pattern(side: usize, f: impl Fn(f64, f64) -> f64) -> qimage_core::Result<GrayImage> {
    let scale = (side.max(2) - 1) as f64;
    let pixels = (0..side * side)
        .map(|k| {
            let (x, y) = ((k % side) as f64 / scale, (k / side) as f64 / scale);
            (255.0 * f(x, y).clamp(0.0, 1.0)).round() as u8
        })
        .collect();
    GrayImage::new(side, side, pixels)
}

/// Diagonal gradient carrier.
pub fn carrier_pattern(side: usize) -> qimage_core::Result<GrayImage> {
    pattern(side, |x, y| (x + y) / 2.0)
}

/// Radial embedder, bright at the centre.
pub fn embedder_pattern(side: usize) -> qimage_core::Result<GrayImage> {
    pattern(side, |x, y| {
        let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
        1.0 - r * std::f64::consts::SQRT_2
    })
}

/// Outcome of one synthesis of the generated patterns.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct DemoRun {
    side: usize,
    carrier: Vec<u8>,
    embedder: Vec<u8>,
    output: Vec<u8>,
    exceptions: Vec<u8>,
    overflow_rate: f64,
    underflow_rate: f64,
    fidelity: f64,
}

#[wasm_bindgen]
impl DemoRun {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn carrier(&self) -> Vec<u8> {
        self.carrier.clone()
    }

    pub fn embedder(&self) -> Vec<u8> {
        self.embedder.clone()
    }

    /// Decoded output grey levels, clamped to the codec range.
    pub fn output(&self) -> Vec<u8> {
        self.output.clone()
    }

    /// 1 where the output phase left `(0, π/2)`, else 0.
    pub fn exceptions(&self) -> Vec<u8> {
        self.exceptions.clone()
    }

    #[wasm_bindgen(getter, js_name = overflowRate)]
    pub fn overflow_rate(&self) -> f64 {
        self.overflow_rate
    }

    #[wasm_bindgen(getter, js_name = underflowRate)]
    pub fn underflow_rate(&self) -> f64 {
        self.underflow_rate
    }

    /// Fidelity against the same operator's noiseless output.
    #[wasm_bindgen(getter)]
    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }
}

/// Synthesizes the radial embedder into the gradient carrier.
pub fn run_synthesis(
    side_log2: u32,
    resource_carrier: u32,
    resource_embedder: u32,
    naive: bool,
    seed: u64,
) -> qimage_core::Result<DemoRun> {
    if side_log2 > MAX_DEMO_SIDE_LOG2 {
        return Err(qimage_core::Error::ResourceCap(format!(
            "demo images are at most {0}×{0}",
            1 << MAX_DEMO_SIDE_LOG2
        )));
    }
    let side = 1usize << side_log2;
    let codec = PhaseCodec::default();
    let carrier = carrier_pattern(side)?;
    let embedder = embedder_pattern(side)?;
    let params = SynthesisParams {
        resource_carrier,
        resource_embedder,
        mode: EstimationMode::PovmOracle,
        seed,
        operator_kind: if naive {
            OperatorKind::Naive
        } else {
            OperatorKind::Corrected
        },
        floor: codec.epsilon(),
    };
    let run = synthesize(
        &codec.encode_image(&carrier),
        &codec.encode_image(&embedder),
        &params,
    )?;
    let (output, _) = codec.decode_map(&run.result_image);
    let aggregate = &run.metrics.aggregate;
    Ok(DemoRun {
        side,
        carrier: carrier.pixels().to_vec(),
        embedder: embedder.pixels().to_vec(),
        output: output.pixels().to_vec(),
        exceptions: run
            .metrics
            .per_pixel
            .iter()
            .map(|m| u8::from(m.overflow_class != OverflowClass::Ok))
            .collect(),
        overflow_rate: aggregate.overflow_rate,
        underflow_rate: aggregate.underflow_rate,
        fidelity: aggregate.fidelity.unwrap_or(f64::NAN),
    })
}

#[wasm_bindgen(js_name = squashTable)]
pub fn squash_table_js(hi: f64, points: usize) -> Vec<f64> {
    squash_table(hi, points)
}

#[wasm_bindgen(js_name = intervalCompression)]
pub fn interval_compression_js(a: f64, b: f64) -> f64 {
    interval_compression(a, b)
}

#[wasm_bindgen(js_name = densityTable)]
pub fn density_table_js(resource: u32, points: usize) -> Result<Vec<f64>, JsError> {
    density_table(resource, points).map_err(js_err)
}

#[wasm_bindgen(js_name = noiseSummary)]
pub fn noise_summary_js(resource: u32, draws: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    noise_summary(resource, draws, seed).map_err(js_err)
}

#[wasm_bindgen(js_name = runSynthesis)]
pub fn run_synthesis_js(
    side_log2: u32,
    resource_carrier: u32,
    resource_embedder: u32,
    naive: bool,
    seed: u64,
) -> Result<DemoRun, JsError> {
    run_synthesis(side_log2, resource_carrier, resource_embedder, naive, seed).map_err(js_err)
}
