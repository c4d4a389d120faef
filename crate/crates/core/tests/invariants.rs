use std::f64::consts::{FRAC_PI_2, PI};

use qimage_core::analysis::interval_ratio;
use qimage_core::mpe::{circular_spread, sample_errors, EstimationMode};
use qimage_core::rng;
use qimage_core::synthesis::{synthesize, OperatorKind, SynthesisParams};
use qimage_core::PhaseImage;
use rand::Rng;

fn random_image<R: Rng>(rng: &mut R, n: u32) -> PhaseImage {
    let phases = (0..1usize << (2 * n))
        .map(|_| 0.01 + rng.random::<f64>() * (FRAC_PI_2 - 0.02))
        .collect();
    PhaseImage::new(n, phases).unwrap()
}

#[test]
fn spread_shrinks_as_resource_doubles() {
    for mode in [EstimationMode::Analytic, EstimationMode::PovmOracle] {
        let spreads: Vec<f64> = [1u32, 2, 4, 8, 16, 32]
            .iter()
            .map(|&n| {
                let e = sample_errors(n, mode, 41, u64::from(n), 100_000).unwrap();
                circular_spread(&e).unwrap().deviation
            })
            .collect();
        assert!(spreads.windows(2).all(|w| w[1] < w[0]), "{mode:?}: {spreads:?}");
    }
}

#[test]
fn covariant_errors_are_unbiased() {
    for n in [1u32, 4, 16, 32] {
        let e = sample_errors(n, EstimationMode::PovmOracle, 5, 0, 100_000).unwrap();
        let spread = circular_spread(&e).unwrap();
        // standard error of the mean direction ≈ circular std / √n_samples
        let se = spread.deviation / (e.len() as f64).sqrt();
        assert!(spread.mean_direction.abs() < 3.0 * se, "N={n}: {spread:?}");
    }
}

#[test]
fn corrected_beats_naive_on_every_batch() {
    let mut rng = rng::stream(123, 0);
    for resource in [4u32, 16, 64] {
        for batch in 0..5u64 {
            let (mut corrected, mut naive) = (0.0, 0.0);
            for pair in 0..100u64 {
                let carrier = random_image(&mut rng, 2);
                let embedder = random_image(&mut rng, 2);
                for (kind, acc) in [
                    (OperatorKind::Corrected, &mut corrected),
                    (OperatorKind::Naive, &mut naive),
                ] {
                    let run = synthesize(
                        &carrier,
                        &embedder,
                        &SynthesisParams {
                            resource_carrier: resource,
                            resource_embedder: resource,
                            seed: batch * 1000 + pair,
                            operator_kind: kind,
                            ..Default::default()
                        },
                    )
                    .unwrap();
                    *acc += run.metrics.aggregate.exception_rate;
                }
            }
            assert!(corrected <= naive, "N={resource} batch {batch}: {corrected} > {naive}");
        }
    }
}

#[test]
fn interval_ratio_matches_tanh_secant() {
    // 64×64 grid of sums over (a, b) split evenly between carrier and embedder.
    for (a, b) in [(0.05, PI - 0.05), (0.2, 1.0), (2.0, 3.0)] {
        let count = 4096;
        let half: Vec<f64> = (0..count)
            .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64) / 2.0)
            .collect();
        let img = PhaseImage::new(6, half).unwrap();
        let run = synthesize(
            &img,
            &img,
            &SynthesisParams {
                mode: EstimationMode::Exact,
                ..Default::default()
            },
        )
        .unwrap();
        let expected = FRAC_PI_2 * (b.tanh() - a.tanh()) / (b - a);
        assert!((interval_ratio(&run).unwrap() - expected).abs() < 1e-9);
    }
}

#[test]
fn two_sided_bound_holds_on_noisy_runs() {
    let mut rng = rng::stream(9, 0);
    for seed in 0..50u64 {
        let carrier = random_image(&mut rng, 2);
        let embedder = random_image(&mut rng, 2);
        let run = synthesize(
            &carrier,
            &embedder,
            &SynthesisParams {
                resource_carrier: 1,
                resource_embedder: 1,
                mode: EstimationMode::PovmOracle,
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        for &p in &run.result_image.phases {
            assert!(p > -FRAC_PI_2 && p < PI, "{p}");
        }
    }
}
