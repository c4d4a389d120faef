use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use qimage_core::analysis::{joint_bound, trend_table, TrendTable};
use qimage_core::mpe::EstimationMode;
use qimage_core::phasecore::MAX_N;
use qimage_core::pgm::{self, PgmFormat};
use qimage_core::statevec::{extract_phases_exact, prepare_image_state, reindex_to_mpe_form};
use qimage_core::synthesis::{synthesize, SynthesisParams};
use qimage_core::{GrayImage, OperatorKind, PhaseCodec, PhaseImage};

use crate::config::{CommandKind, PgmArg, RunConfig};
use crate::error::CliError;
use crate::report::{
    write_atomic, Aggregate, BoundCheck, BoundChecks, Comparison, EncodingSummary, PixelRecord,
    Report,
};

/// Runs one command and writes its outputs.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let report = build_report(config)?;
    let bytes = report.to_json()?;
    match &config.report_path {
        Some(path) => write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

/// Runs one command, writing any images, and returns its report.
pub fn build_report(config: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report {
        command: config.command,
        config: config.clone(),
        per_pixel: Vec::new(),
        aggregate: Aggregate::default(),
    };
    match config.command {
        CommandKind::Encode => encode(config, &mut report)?,
        CommandKind::Synthesize => synthesize_images(config, &mut report, true)?,
        CommandKind::Analyze => analyze(config, &mut report)?,
        CommandKind::MpeBench => mpe_bench(config, &mut report)?,
    }
    Ok(report)
}

fn read_image(path: Option<&PathBuf>, flag: &str) -> Result<GrayImage, CliError> {
    let path = path.ok_or_else(|| CliError::Validation(format!("--{flag} is required")))?;
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let raster = pgm::read(BufReader::new(file))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let image = raster.into_image()?;
    if image.n() > MAX_N {
        return Err(CliError::ResourceCap(format!(
            "{} is {}×{}; the limit is {}×{}",
            path.display(),
            image.width(),
            image.height(),
            1 << MAX_N,
            1 << MAX_N
        )));
    }
    Ok(image)
}

fn write_image(path: &Path, image: &GrayImage, format: PgmArg) -> Result<(), CliError> {
    let format = match format {
        PgmArg::P2 => PgmFormat::Ascii,
        PgmArg::P5 => PgmFormat::Binary,
    };
    write_atomic(path, &pgm::encode(image, format))
}

/// `out.pgm` → `out.corrected.pgm` when several operators share one output path.
pub fn output_path_for(base: &Path, kind: OperatorKind, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.{}.{}", kind.as_str(), ext.to_string_lossy()),
        None => format!("{stem}.{}", kind.as_str()),
    };
    base.with_file_name(name)
}

fn encode(config: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let codec = PhaseCodec::new(config.epsilon)?;
    let gray = read_image(config.carrier_path.as_ref(), "carrier")?;
    let phases = codec.encode_image(&gray);
    let (state, trace) = prepare_image_state(&phases)?;
    let mpe_state = reindex_to_mpe_form(&state)?;
    let extracted = extract_phases_exact(&state)?;
    let (decoded, clamped_pixels) = codec.decode_map(&extracted);

    let max_phase_error = extracted
        .phases
        .iter()
        .zip(phases.phases())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mismatched_pixels = decoded
        .pixels()
        .iter()
        .zip(gray.pixels())
        .filter(|(a, b)| a != b)
        .count();
    if let Some(out) = &config.output_path {
        write_image(out, &decoded, config.format)?;
    }
    report.aggregate.encoding = Some(EncodingSummary {
        n: gray.n(),
        side: gray.width(),
        pixels: phases.len(),
        state_dim: state.dim(),
        mpe_dim: mpe_state.dim(),
        norm_error: (state.norm() - 1.0).abs(),
        mpe_norm_error: (mpe_state.norm() - 1.0).abs(),
        hadamard_count: trace.hadamard_count,
        controlled_rotation_count: trace.controlled_rotation_count,
        max_phase_error,
        mismatched_pixels,
        clamped_pixels,
    });
    Ok(())
}

fn load_pair(config: &RunConfig) -> Result<(PhaseCodec, PhaseImage, PhaseImage), CliError> {
    let codec = PhaseCodec::new(config.epsilon)?;
    let carrier = read_image(config.carrier_path.as_ref(), "carrier")?;
    let embedder = read_image(config.embedder_path.as_ref(), "embedder")?;
    if carrier.width() != embedder.width() {
        return Err(CliError::Validation(format!(
            "carrier is {}×{} but embedder is {}×{}",
            carrier.width(),
            carrier.height(),
            embedder.width(),
            embedder.height()
        )));
    }
    Ok((codec, codec.encode_image(&carrier), codec.encode_image(&embedder)))
}

fn params(config: &RunConfig, kind: OperatorKind, mode: EstimationMode) -> SynthesisParams {
    SynthesisParams {
        resource_carrier: config.n1,
        resource_embedder: config.n2,
        mode,
        seed: config.seed,
        operator_kind: kind,
        floor: config.epsilon,
    }
}

fn synthesize_images(
    config: &RunConfig,
    report: &mut Report,
    write_outputs: bool,
) -> Result<(), CliError> {
    let (codec, carrier, embedder) = load_pair(config)?;
    let kinds = config.operator_kind.kinds();
    for &kind in &kinds {
        let run = synthesize(&carrier, &embedder, &params(config, kind, config.mode))?;
        let (gray, _) = codec.decode_map(&run.result_image);
        report.per_pixel.extend(
            run.metrics
                .per_pixel
                .iter()
                .zip(gray.pixels())
                .map(|(m, &g)| PixelRecord::new(kind, m, g)),
        );
        if write_outputs {
            if let Some(out) = &config.output_path {
                write_image(&output_path_for(out, kind, kinds.len() > 1), &gray, config.format)?;
            }
        }
        let slot = match kind {
            OperatorKind::Corrected => &mut report.aggregate.corrected,
            OperatorKind::Naive => &mut report.aggregate.naive,
        };
        *slot = Some(run.metrics.aggregate);
    }
    if let (Some(c), Some(n)) = (&report.aggregate.corrected, &report.aggregate.naive) {
        report.aggregate.comparison = Some(Comparison {
            corrected_exception_rate: c.exception_rate,
            naive_exception_rate: n.exception_rate,
            corrected_overflow_rate: c.overflow_rate,
            naive_overflow_rate: n.overflow_rate,
            corrected_not_worse: c.exception_rate <= n.exception_rate,
        });
    }
    Ok(())
}

fn analyze(config: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    synthesize_images(config, report, false)?;
    let (_, carrier, embedder) = load_pair(config)?;
    let noiseless = synthesize(
        &carrier,
        &embedder,
        &params(config, OperatorKind::Corrected, EstimationMode::Exact),
    )?;
    report.aggregate.noiseless = Some(noiseless.metrics.aggregate);
    if config.mode != EstimationMode::Exact {
        let mut resources = vec![config.n1, config.n2];
        resources.dedup();
        let table = trend_table(&resources, config.trials, config.seed, config.mode, config.epsilon)?;
        report.aggregate.bounds = Some(bound_checks(&table));
        report.aggregate.trend = Some(table);
    }
    Ok(())
}

fn mpe_bench(config: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    if config.mode == EstimationMode::Exact {
        return Err(CliError::Validation("mpe-bench needs a noisy --mode".into()));
    }
    let table = trend_table(
        &config.resources,
        config.trials,
        config.seed,
        config.mode,
        config.epsilon,
    )?;
    report.aggregate.bounds = Some(bound_checks(&table));
    report.aggregate.trend = Some(table);
    Ok(())
}

/// Single-system products against `1/2`, joint quantities against `tanh(1) + 1/2`,
/// each with a three-standard-error allowance.
pub fn bound_checks(table: &TrendTable) -> BoundChecks {
    let check = |n1, n2, value: f64, se: f64, bound: f64| BoundCheck {
        resource_carrier: n1,
        resource_embedder: n2,
        value,
        standard_error: se,
        bound,
        holds: value >= bound - 3.0 * se,
    };
    let single: Vec<BoundCheck> = table
        .single
        .iter()
        .map(|r| check(r.resource, None, r.product, r.product_se, 0.5))
        .collect();
    let joint: Vec<BoundCheck> = table
        .joint
        .iter()
        .map(|r| {
            check(
                r.resource_carrier,
                Some(r.resource_embedder),
                r.uncertainty.joint_lhs,
                r.uncertainty.joint_lhs_se,
                joint_bound(),
            )
        })
        .collect();
    let all_hold = single.iter().chain(&joint).all(|c| c.holds);
    BoundChecks {
        single,
        joint,
        all_hold,
    }
}
