//! Report document: `{command, config, per_pixel[], aggregate}`.
//!
//! Every key is always present; metrics that do not apply to a command are
//! `null`. Floats are written with 17 significant digits.

use std::io::{self, Write};
use std::path::Path;

use qimage_core::analysis::{AggregateMetrics, OverflowClass, PixelMetrics, TrendTable};
use qimage_core::OperatorKind;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::config::{CommandKind, RunConfig};
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: CommandKind,
    pub config: RunConfig,
    pub per_pixel: Vec<PixelRecord>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Serialize)]
pub struct PixelRecord {
    pub operator: OperatorKind,
    pub pixel: usize,
    pub input_sum: f64,
    pub output_phase: f64,
    pub delta: f64,
    pub pointwise_ratio: Option<f64>,
    pub overflow_class: OverflowClass,
    pub output_gray: u8,
}

impl PixelRecord {
    pub fn new(operator: OperatorKind, m: &PixelMetrics, output_gray: u8) -> Self {
        Self {
            operator,
            pixel: m.pixel,
            input_sum: m.input_sum,
            output_phase: m.output_phase,
            delta: m.delta,
            pointwise_ratio: m.pointwise_ratio,
            overflow_class: m.overflow_class,
            output_gray,
        }
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Aggregate {
    pub corrected: Option<AggregateMetrics>,
    pub naive: Option<AggregateMetrics>,
    /// Corrected operator with exact estimates.
    pub noiseless: Option<AggregateMetrics>,
    pub comparison: Option<Comparison>,
    pub encoding: Option<EncodingSummary>,
    pub trend: Option<TrendTable>,
    pub bounds: Option<BoundChecks>,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub corrected_exception_rate: f64,
    pub naive_exception_rate: f64,
    pub corrected_overflow_rate: f64,
    pub naive_overflow_rate: f64,
    pub corrected_not_worse: bool,
}

#[derive(Debug, Serialize)]
pub struct EncodingSummary {
    pub n: u32,
    pub side: usize,
    pub pixels: usize,
    pub state_dim: usize,
    pub mpe_dim: usize,
    pub norm_error: f64,
    pub mpe_norm_error: f64,
    pub hadamard_count: usize,
    pub controlled_rotation_count: usize,
    pub max_phase_error: f64,
    pub mismatched_pixels: usize,
    pub clamped_pixels: usize,
}

#[derive(Debug, Serialize)]
pub struct BoundCheck {
    pub resource_carrier: u32,
    pub resource_embedder: Option<u32>,
    pub value: f64,
    pub standard_error: f64,
    pub bound: f64,
    /// `value ≥ bound − 3·standard_error`.
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct BoundChecks {
    pub single: Vec<BoundCheck>,
    pub joint: Vec<BoundCheck>,
    pub all_hold: bool,
}

/// JSON formatter writing finite floats as `{:.16e}` (17 significant digits).
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

impl Report {
    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits);
        self.serialize(&mut ser)
            .map_err(|e| CliError::Io(format!("report serialization failed: {e}")))?;
        out.push(b'\n');
        Ok(out)
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
