//! Over-the-air model aggregation.
//!
//! Channel inversion at the transmitters makes the received superposition
//! an unweighted sum of the uploaded models plus receiver noise, so the
//! aggregation is modeled post-equalization: sum, add i.i.d. Gaussian
//! noise per entry, divide by the participant count.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::model::ModelParams;
use crate::Result;

/// The averaged model and the norm of the noise that landed on it.
#[derive(Debug, Clone)]
pub struct AggregationResult {
    pub mean_model: ModelParams,
    pub noise_draw_norm: f64,
}

/// Averages the uploaded models through the analog channel:
/// `(sum_i w_i + z) / K` with `z ~ N(0, noise_std^2 I)` and `K` the
/// number of models in the list.
pub fn aggregate<R: Rng>(
    models: &[ModelParams],
    noise_std: f64,
    rng: &mut R,
) -> Result<AggregationResult> {
    assert!(
        noise_std.is_finite() && noise_std >= 0.0,
        "noise std must be a non-negative real"
    );
    let first = models.first().ok_or_else(|| {
        Error::Data("cannot aggregate an empty model list".into())
    })?;
    let dim = first.len();
    let mut sum = vec![0.0f64; dim];
    for model in models {
        if model.len() != dim {
            return Err(Error::ShapeMismatch {
                expected: dim,
                got: model.len(),
            });
        }
        for (acc, &w) in sum.iter_mut().zip(model.as_slice()) {
            *acc += w;
        }
    }

    let mut noise_sq = 0.0;
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std).expect("positive std");
        for acc in &mut sum {
            let z = normal.sample(rng);
            noise_sq += z * z;
            *acc += z;
        }
    }

    let k = models.len() as f64;
    for acc in &mut sum {
        *acc /= k;
    }
    let mean_model = ModelParams::from_vec(sum, first.n_features(), first.n_classes())?;
    Ok(AggregationResult {
        mean_model,
        noise_draw_norm: noise_sq.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded_rng, STREAM_NOISE};

    fn params(values: &[f64]) -> ModelParams {
        // d = len-1, c = 1 keeps the flat length equal to values.len()
        ModelParams::from_vec(values.to_vec(), values.len() - 1, 1).unwrap()
    }

    #[test]
    fn noiseless_aggregation_is_the_exact_mean() {
        let mut rng = seeded_rng(1, STREAM_NOISE);
        let out = aggregate(&[params(&[1.0, 1.0]), params(&[3.0, 3.0])], 0.0, &mut rng).unwrap();
        assert_eq!(out.mean_model.as_slice(), &[2.0, 2.0]);
        assert_eq!(out.noise_draw_norm, 0.0);
    }

    #[test]
    fn single_model_passes_through() {
        let mut rng = seeded_rng(2, STREAM_NOISE);
        let model = params(&[0.25, -1.5, 4.0]);
        let out = aggregate(std::slice::from_ref(&model), 0.0, &mut rng).unwrap();
        assert_eq!(out.mean_model, model);
    }

    #[test]
    fn aggregation_is_linear_in_the_inputs() {
        let mut rng = seeded_rng(3, STREAM_NOISE);
        let a = params(&[1.0, -2.0, 0.5]);
        let b = params(&[0.0, 4.0, 2.5]);
        let base = aggregate(&[a.clone(), b.clone()], 0.0, &mut rng).unwrap();
        let alpha = 3.0;
        let scaled_inputs: Vec<ModelParams> = [a, b]
            .iter()
            .map(|m| params(&m.as_slice().iter().map(|w| alpha * w).collect::<Vec<_>>()))
            .collect();
        let scaled = aggregate(&scaled_inputs, 0.0, &mut rng).unwrap();
        for (s, b) in scaled.mean_model.as_slice().iter().zip(base.mean_model.as_slice()) {
            assert!((s - alpha * b).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut rng = seeded_rng(4, STREAM_NOISE);
        let result = aggregate(&[params(&[1.0, 2.0]), params(&[1.0, 2.0, 3.0])], 0.0, &mut rng);
        assert!(matches!(result, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn empty_list_is_rejected() {
        let mut rng = seeded_rng(5, STREAM_NOISE);
        assert!(aggregate(&[], 0.0, &mut rng).is_err());
    }

    #[test]
    fn noise_scale_shrinks_with_the_participant_count() {
        // std of z/K per coordinate should be noise_std / K = 0.25
        let k = 4usize;
        let dim = 10_000usize;
        let trials = 100usize;
        let zeros: Vec<ModelParams> = (0..k).map(|_| params(&vec![0.0; dim])).collect();
        let mut rng = seeded_rng(6, STREAM_NOISE);
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let out = aggregate(&zeros, 1.0, &mut rng).unwrap();
            for &v in out.mean_model.as_slice() {
                sum_sq += v * v;
            }
        }
        let std = (sum_sq / (trials * dim) as f64).sqrt();
        assert!(
            (std - 0.25).abs() < 0.25 * 0.05,
            "empirical std {std}, expected 0.25 within 5%"
        );
    }

    #[test]
    fn noise_draw_ignores_model_contents() {
        let dim = 64;
        let a: Vec<ModelParams> = vec![params(&vec![0.0; dim]); 2];
        let b: Vec<ModelParams> = vec![params(&vec![123.0; dim]); 2];
        let out_a = aggregate(&a, 1.0, &mut seeded_rng(7, STREAM_NOISE)).unwrap();
        let out_b = aggregate(&b, 1.0, &mut seeded_rng(7, STREAM_NOISE)).unwrap();
        // subtracting the exact means must leave the identical noise draw
        for (va, vb) in out_a
            .mean_model
            .as_slice()
            .iter()
            .zip(out_b.mean_model.as_slice())
        {
            let noise_a = va - 0.0;
            let noise_b = vb - 123.0;
            assert!((noise_a - noise_b).abs() < 1e-12);
        }
        assert_eq!(out_a.noise_draw_norm, out_b.noise_draw_norm);
    }
}
