//! Phase images, the grey-level ↔ phase codec and phase restriction.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default guard band keeping encoded phases away from `0` and `π/2`.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Largest supported image exponent (`2^6 × 2^6` pixels, statevector dim 8192).
pub const MAX_N: u32 = 6;

/// Monotone affine map between 8-bit grey levels and phases in
/// `[ε, π/2 − ε] ⊂ (0, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCodec {
    epsilon: f64,
}

impl Default for PhaseCodec {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl PhaseCodec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < FRAC_PI_8) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, π/8), got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn span(&self) -> f64 {
        FRAC_PI_2 - 2.0 * self.epsilon
    }

    /// `ε + (g/255)(π/2 − 2ε)`.
    pub fn encode(&self, gray: u8) -> f64 {
        self.epsilon + f64::from(gray) / 255.0 * self.span()
    }

    /// Inverse of [`encode`](Self::encode). Out-of-range phases are clamped to
    /// the codec range first; the flag reports whether clamping happened.
    pub fn decode(&self, theta: f64) -> (u8, bool) {
        let lo = self.epsilon;
        let hi = FRAC_PI_2 - self.epsilon;
        let clamped = theta.clamp(lo, hi);
        let level = ((clamped - lo) / self.span() * 255.0).round_ties_even();
        (level.clamp(0.0, 255.0) as u8, clamped != theta)
    }

    /// Maps a phase produced by [`restrict_phase`] into the image domain.
    pub fn restrict(&self, phi: f64) -> RestrictedPhase {
        restrict_phase(phi, self.epsilon)
    }

    pub fn encode_image(&self, image: &GrayImage) -> PhaseImage {
        let phases = image.pixels.iter().map(|&g| self.encode(g)).collect();
        PhaseImage {
            n: image.n(),
            phases,
        }
    }

    /// Decodes a phase map into a grey image, returning the number of clamped pixels.
    pub fn decode_map(&self, map: &PhaseMap) -> (GrayImage, usize) {
        let mut clamped = 0;
        let pixels = map
            .phases
            .iter()
            .map(|&theta| {
                let (g, c) = self.decode(theta);
                clamped += usize::from(c);
                g
            })
            .collect();
        let side = 1usize << map.n;
        (
            GrayImage {
                width: side,
                height: side,
                pixels,
            },
            clamped,
        )
    }
}

/// Result of [`restrict_phase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedPhase {
    pub phase: f64,
    /// The reduction landed on an exact multiple of `π/2` and was lifted to the
    /// guard-band floor.
    pub floored: bool,
}

/// Reduces an arbitrary phase into `(0, π/2]`.
///
/// Phases in `(0, π/2]` pass through unchanged. Larger phases are reduced
/// modulo `π/2`; non-positive phases are first wrapped into `[0, 2π)`. A result
/// of exactly zero is replaced by `floor` and flagged.
pub fn restrict_phase(phi: f64, floor: f64) -> RestrictedPhase {
    let in_range = |x: f64| x > 0.0 && x <= FRAC_PI_2;
    if in_range(phi) {
        return RestrictedPhase {
            phase: phi,
            floored: false,
        };
    }
    let wrapped = if phi <= 0.0 { phi.rem_euclid(TAU) } else { phi };
    let reduced = if wrapped > FRAC_PI_2 {
        wrapped.rem_euclid(FRAC_PI_2)
    } else {
        wrapped
    };
    if in_range(reduced) {
        RestrictedPhase {
            phase: reduced,
            floored: false,
        }
    } else {
        RestrictedPhase {
            phase: floor,
            floored: true,
        }
    }
}

/// 8-bit grayscale raster of `2^n × 2^n` pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || width != height || !width.is_power_of_two() {
            return Err(Error::Validation(format!(
                "image must be square with a power-of-two side, got {width}×{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Validation(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Exponent `n` with `width == 2^n`.
    pub fn n(&self) -> u32 {
        self.width.trailing_zeros()
    }
}

fn check_len(n: u32, len: usize) -> Result<()> {
    if n > 31 {
        return Err(Error::ResourceCap(format!("image exponent {n} is too large")));
    }
    let expected = 1usize << (2 * n);
    if len != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: len,
        });
    }
    Ok(())
}

/// Pixel phases with no range restriction: synthesized outputs, raw
/// measurement outcomes, rotation angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMap {
    pub n: u32,
    pub phases: Vec<f64>,
}

impl PhaseMap {
    pub fn new(n: u32, phases: Vec<f64>) -> Result<Self> {
        check_len(n, phases.len())?;
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::Validation(format!("non-finite phase {bad}")));
        }
        Ok(Self { n, phases })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Phase-encoded image: `2^{2n}` phases, each strictly inside `(0, π/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseImage {
    n: u32,
    phases: Vec<f64>,
}

impl PhaseImage {
    pub fn new(n: u32, phases: Vec<f64>) -> Result<Self> {
        check_len(n, phases.len())?;
        if let Some((j, bad)) = phases
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p > 0.0 && p < FRAC_PI_2))
        {
            return Err(Error::Validation(format!(
                "phase {bad} at pixel {j} is outside (0, π/2)"
            )));
        }
        Ok(Self { n, phases })
    }

    /// Constant image, mostly useful in tests and demos.
    pub fn uniform(n: u32, phase: f64) -> Result<Self> {
        Self::new(n, vec![phase; 1usize << (2 * n)])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn to_map(&self) -> PhaseMap {
        PhaseMap {
            n: self.n,
            phases: self.phases.clone(),
        }
    }
}

impl TryFrom<PhaseMap> for PhaseImage {
    type Error = Error;

    fn try_from(map: PhaseMap) -> Result<Self> {
        Self::new(map.n, map.phases)
    }
}

/// [`PhaseCodec::encode`] with an explicit guard band.
pub fn gray_to_phase(gray: u8, epsilon: f64) -> Result<f64> {
    Ok(PhaseCodec::new(epsilon)?.encode(gray))
}

/// [`PhaseCodec::decode`] with an explicit guard band, discarding the clamp flag.
pub fn phase_to_gray(theta: f64, epsilon: f64) -> Result<u8> {
    Ok(PhaseCodec::new(epsilon)?.decode(theta).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn encode_boundaries() {
        assert_abs_diff_eq!(gray_to_phase(0, 0.01).unwrap(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(
            gray_to_phase(255, 0.01).unwrap(),
            FRAC_PI_2 - 0.01,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(gray_to_phase(255, 0.01).unwrap(), 1.560796, epsilon = 1e-6);
    }

    #[test]
    fn encode_midpoint_matches_reference() {
        // 30-digit reference evaluation of the affine map.
        assert_abs_diff_eq!(
            gray_to_phase(128, 0.01).unwrap(),
            0.788_438_940_508_810_9,
            epsilon = 1e-14
        );
    }

    #[test]
    fn decode_examples() {
        let g37 = gray_to_phase(37, 0.01).unwrap();
        assert_eq!(phase_to_gray(g37, 0.01).unwrap(), 37);
        assert_eq!(phase_to_gray(0.0, 0.01).unwrap(), 0);
        assert_eq!(phase_to_gray(0.788394, 0.01).unwrap(), 128);
        assert_eq!(phase_to_gray(10.0, 0.01).unwrap(), 255);
    }

    #[test]
    fn decode_reports_clamping() {
        let codec = PhaseCodec::default();
        assert_eq!(codec.decode(-0.2), (0, true));
        assert_eq!(codec.decode(1.7), (255, true));
        assert!(!codec.decode(0.5).1);
    }

    #[test]
    fn epsilon_out_of_range() {
        for eps in [0.0, -0.1, FRAC_PI_8, 1.0, f64::NAN] {
            assert!(matches!(PhaseCodec::new(eps), Err(Error::Config(_))));
        }
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(restrict_phase(0.7, 0.01).phase, 0.7);
        let r = restrict_phase(FRAC_PI_2 + 0.3, 0.01);
        assert_abs_diff_eq!(r.phase, 0.3, epsilon = 1e-12);
        assert!(!r.floored);
        let r = restrict_phase(PI, 0.01);
        assert_eq!(r.phase, 0.01);
        assert!(r.floored);
        assert_eq!(restrict_phase(FRAC_PI_2, 0.01).phase, FRAC_PI_2);
        assert!(restrict_phase(0.0, 0.01).floored);
    }

    #[test]
    fn restrict_wraps_negative_phases() {
        // −0.2 → 2π − 0.2 → (2π − 0.2) mod π/2 = π/2 − 0.2
        let r = restrict_phase(-0.2, 0.01);
        assert_abs_diff_eq!(r.phase, FRAC_PI_2 - 0.2, epsilon = 1e-12);
    }

    #[test]
    fn image_invariants() {
        assert!(PhaseImage::new(1, vec![0.3; 4]).is_ok());
        assert!(matches!(
            PhaseImage::new(1, vec![0.3; 3]),
            Err(Error::DimensionMismatch { expected: 4, actual: 3 })
        ));
        assert!(PhaseImage::new(0, vec![0.0]).is_err());
        assert!(PhaseImage::new(0, vec![FRAC_PI_2]).is_err());
        assert!(GrayImage::new(4, 2, vec![0; 8]).is_err());
        assert!(GrayImage::new(3, 3, vec![0; 9]).is_err());
        assert_eq!(GrayImage::new(8, 8, vec![0; 64]).unwrap().n(), 3);
    }

    proptest! {
        #[test]
        fn gray_round_trip(g in 0u8..=255, eps in 1e-4f64..0.39) {
            let codec = PhaseCodec::new(eps).unwrap();
            prop_assert_eq!(codec.decode(codec.encode(g)), (g, false));
        }

        #[test]
        fn encode_is_strictly_monotone(g in 0u8..255, eps in 1e-4f64..0.39) {
            let codec = PhaseCodec::new(eps).unwrap();
            prop_assert!(codec.encode(g) < codec.encode(g + 1));
            prop_assert!(codec.encode(g) > 0.0 && codec.encode(g + 1) < FRAC_PI_2);
        }

        #[test]
        fn restrict_lands_in_range_and_is_idempotent(phi in -20.0f64..20.0) {
            let once = restrict_phase(phi, 0.01).phase;
            prop_assert!(once > 0.0 && once <= FRAC_PI_2);
            prop_assert_eq!(restrict_phase(once, 0.01).phase, once);
        }
    }
}
