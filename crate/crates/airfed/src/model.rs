//! Multinomial logistic regression over flat parameter vectors.
//!
//! Parameters are stored class-major: class `k` owns the slice
//! `[k*(d+1), (k+1)*(d+1))`, whose last entry is the bias (the input is
//! implicitly extended by a constant 1). All arithmetic runs in f64 with
//! log-sum-exp stabilized losses.

use crate::data::Dataset;
use crate::error::Error;
use crate::Result;

/// Flat model parameters with their (features, classes) shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    weights: Vec<f64>,
    n_features: usize,
    n_classes: usize,
}

impl ModelParams {
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        ModelParams {
            weights: vec![0.0; (n_features + 1) * n_classes],
            n_features,
            n_classes,
        }
    }

    pub fn from_vec(weights: Vec<f64>, n_features: usize, n_classes: usize) -> Result<Self> {
        let expected = (n_features + 1) * n_classes;
        if weights.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: weights.len(),
            });
        }
        Ok(ModelParams {
            weights,
            n_features,
            n_classes,
        })
    }

    /// Total parameter count `M = (d+1) * c`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    fn class_slice(&self, class: usize) -> &[f64] {
        let stride = self.n_features + 1;
        &self.weights[class * stride..(class + 1) * stride]
    }

    /// Per-class scores for one sample.
    fn logits(&self, x: &[f32]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_features);
        (0..self.n_classes)
            .map(|k| {
                let row = self.class_slice(k);
                let mut z = row[self.n_features]; // bias
                for (w, &xi) in row[..self.n_features].iter().zip(x) {
                    z += w * f64::from(xi);
                }
                z
            })
            .collect()
    }
}

fn check_shape(w: &ModelParams, ds: &Dataset) {
    assert_eq!(
        (w.n_features, w.n_classes),
        (ds.n_features(), ds.n_classes()),
        "model shape does not match dataset shape"
    );
}

/// Log of the softmax normalizer, shifted by the max logit.
fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&z| (z - max).exp()).sum();
    max + sum.ln()
}

/// Mean softmax cross-entropy over the batch.
pub fn loss(w: &ModelParams, batch: &[usize], ds: &Dataset) -> Result<f64> {
    check_shape(w, ds);
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for &i in batch {
        let logits = w.logits(ds.features_of(i));
        total += log_sum_exp(&logits) - logits[ds.label(i)];
    }
    Ok(total / batch.len() as f64)
}

/// Analytic gradient of [`loss`]: mean over the batch of
/// `(softmax(z) - onehot(y)) (x; 1)^T`, flattened in the parameter layout.
pub fn gradient(w: &ModelParams, batch: &[usize], ds: &Dataset) -> Result<ModelParams> {
    check_shape(w, ds);
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let d = w.n_features;
    let stride = d + 1;
    let mut grad = vec![0.0; w.len()];
    for &i in batch {
        let x = ds.features_of(i);
        let logits = w.logits(x);
        let lse = log_sum_exp(&logits);
        for k in 0..w.n_classes {
            let p = (logits[k] - lse).exp();
            let coef = if k == ds.label(i) { p - 1.0 } else { p };
            let row = &mut grad[k * stride..(k + 1) * stride];
            for (g, &xi) in row[..d].iter_mut().zip(x) {
                *g += coef * f64::from(xi);
            }
            row[d] += coef;
        }
    }
    let inv = 1.0 / batch.len() as f64;
    for g in &mut grad {
        *g *= inv;
    }
    ModelParams::from_vec(grad, d, w.n_classes)
}

/// One SGD step: `w - lr * gradient(w, batch, ds)`. The input is left
/// unmodified.
pub fn local_step(w: &ModelParams, lr: f64, batch: &[usize], ds: &Dataset) -> Result<ModelParams> {
    assert!(lr >= 0.0, "learning rate must be non-negative");
    let grad = gradient(w, batch, ds)?;
    let weights = w
        .as_slice()
        .iter()
        .zip(grad.as_slice())
        .map(|(wi, gi)| wi - lr * gi)
        .collect();
    ModelParams::from_vec(weights, w.n_features, w.n_classes)
}

/// Fraction of argmax-correct predictions; argmax ties break toward the
/// lowest class id.
pub fn accuracy(w: &ModelParams, indices: &[usize], ds: &Dataset) -> Result<f64> {
    check_shape(w, ds);
    if indices.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut correct = 0usize;
    for &i in indices {
        let logits = w.logits(ds.features_of(i));
        let mut best = 0usize;
        for k in 1..logits.len() {
            if logits[k] > logits[best] {
                best = k;
            }
        }
        if best == ds.label(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / indices.len() as f64)
}
