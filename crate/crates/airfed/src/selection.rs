//! Client-selection mathematics: the bias-configurable channel PMF, the
//! product-of-experts combination with the robustness weights, weighted
//! sampling without replacement, Euclidean simplex projection, and the
//! ascent update of the robustness weights.
//!
//! Everything that touches the bias exponent `C` runs in log space.
//! Raising channels to powers like `C = 1e4` overflows (and underflows)
//! f64 immediately, so a [`SelectionDistribution`] keeps the
//! unnormalized log weights alongside the normalized probabilities and
//! the sampler renormalizes in log space at every draw. The normalized
//! `values` view may round tiny probabilities to zero while the log
//! weights still rank them, which is exactly what keeps the extreme-`C`
//! greedy limit intact.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::Error;
use crate::Result;

/// A point on the probability simplex: the robustness weights `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights {
    values: Vec<f64>,
}

impl SimplexWeights {
    /// The symmetric starting point, 1/N everywhere.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "simplex dimension must be positive");
        SimplexWeights {
            values: vec![1.0 / n as f64; n],
        }
    }

    /// Wraps a vector after checking non-negativity and unit sum (1e-9).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(Error::Data("simplex entries must be non-negative".into()));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Data(format!("simplex entries sum to {sum}, not 1")));
        }
        Ok(SimplexWeights { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// What produced a selection distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    /// Uniform over all clients.
    Uniform,
    /// The robustness weights alone.
    Robustness,
    /// The channel-bias PMF alone.
    ChannelBias,
    /// Product of the robustness and channel-bias experts.
    ProductOfExperts,
}

/// A probability vector over clients plus the log-domain weights it was
/// normalized from.
#[derive(Debug, Clone)]
pub struct SelectionDistribution {
    values: Vec<f64>,
    log_weights: Vec<f64>,
    kind: DistributionKind,
}

impl SelectionDistribution {
    /// Builds from unnormalized log weights (`-inf` marks zero mass).
    pub fn from_log_weights(log_weights: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        assert!(!log_weights.is_empty(), "distribution must be non-empty");
        assert!(
            log_weights.iter().all(|w| !w.is_nan() && *w != f64::INFINITY),
            "log weights must be finite or -inf"
        );
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateDistribution);
        }
        let terms: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
        // Summing in sorted order makes the normalizer depend only on the
        // multiset of weights, so permuting the inputs permutes the
        // outputs bit-for-bit.
        let mut sorted = terms.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("terms are finite"));
        let total: f64 = sorted.iter().sum();
        let values = terms.iter().map(|t| t / total).collect();
        Ok(SelectionDistribution {
            values,
            log_weights,
            kind,
        })
    }

    /// Builds from an already-normalized probability vector.
    pub fn from_probabilities(values: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(Error::Data(
                "probabilities must be non-negative reals".into(),
            ));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Data(format!("probabilities sum to {sum}, not 1")));
        }
        let log_weights = values.iter().map(|&v| v.ln()).collect();
        Ok(SelectionDistribution {
            values,
            log_weights,
            kind,
        })
    }

    pub fn uniform(n: usize) -> Self {
        SelectionDistribution::from_log_weights(vec![0.0; n], DistributionKind::Uniform)
            .expect("uniform weights are valid")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Normalized probabilities. Entries whose true mass is below the
    /// smallest representable f64 round to zero here; [`Self::log_weights`]
    /// keeps the full ranking.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The unnormalized log-domain weights (`-inf` marks zero mass).
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Number of clients with non-zero mass.
    pub fn support(&self) -> usize {
        self.log_weights
            .iter()
            .filter(|w| **w > f64::NEG_INFINITY)
            .count()
    }

    fn all_values_equal(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

/// The bias-configurable PMF: `y_i = h_i^C / sum_j h_j^C`, evaluated in
/// log space. `C = 0` is exactly uniform; growing `C` concentrates mass
/// on the strongest channels.
pub fn bias_pmf(channels: &[f64], c_factor: f64) -> Result<SelectionDistribution> {
    assert!(
        c_factor.is_finite() && c_factor >= 0.0,
        "bias factor must be finite and non-negative"
    );
    if let Some(&bad) = channels.iter().find(|&&h| h <= 0.0) {
        return Err(Error::NonPositiveChannel(bad));
    }
    let log_weights = channels.iter().map(|&h| c_factor * h.ln()).collect();
    SelectionDistribution::from_log_weights(log_weights, DistributionKind::ChannelBias)
}

/// Product-of-experts combination: `rho_i = lambda_i y_i / sum_j lambda_j y_j`.
///
/// A uniform expert gates itself out exactly: uniform `y` returns
/// `lambda` unchanged and uniform `lambda` returns `y` unchanged.
pub fn poe_combine(
    lambda: &SimplexWeights,
    y: &SelectionDistribution,
) -> Result<SelectionDistribution> {
    assert_eq!(lambda.len(), y.len(), "expert dimensions must match");
    if y.all_values_equal() {
        let log_weights = lambda.values().iter().map(|&v| v.ln()).collect();
        return Ok(SelectionDistribution {
            values: lambda.values().to_vec(),
            log_weights,
            kind: DistributionKind::ProductOfExperts,
        });
    }
    if lambda.values().windows(2).all(|w| w[0] == w[1]) {
        return Ok(SelectionDistribution {
            values: y.values.clone(),
            log_weights: y.log_weights.clone(),
            kind: DistributionKind::ProductOfExperts,
        });
    }
    let log_weights: Vec<f64> = lambda
        .values()
        .iter()
        .zip(&y.log_weights)
        .map(|(&l, &w)| l.ln() + w)
        .collect();
    SelectionDistribution::from_log_weights(log_weights, DistributionKind::ProductOfExperts)
}

/// Samples `k` distinct client ids, returned in draw order. The first
/// draw follows `rho`; each later draw renormalizes over the remaining
/// ids. Renormalization happens in log space so extreme weight ratios
/// keep their ranking.
pub fn sample_without_replacement<R: Rng>(
    rho: &SelectionDistribution,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = rho.len();
    if k > n {
        return Err(Error::SampleSize { k, n });
    }
    let support = rho.support();
    if k > support {
        return Err(Error::InsufficientSupport { support, k });
    }

    let mut remaining: Vec<usize> = (0..n)
        .filter(|&i| rho.log_weights[i] > f64::NEG_INFINITY)
        .collect();
    let mut selected = Vec::with_capacity(k);
    for _ in 0..k {
        let max = remaining
            .iter()
            .map(|&i| rho.log_weights[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let terms: Vec<f64> = remaining
            .iter()
            .map(|&i| (rho.log_weights[i] - max).exp())
            .collect();
        let total: f64 = terms.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = remaining.len() - 1;
        for (pos, &term) in terms.iter().enumerate() {
            acc += term;
            if target < acc {
                chosen = pos;
                break;
            }
        }
        selected.push(remaining.swap_remove(chosen));
    }
    Ok(selected)
}

/// Euclidean projection onto the probability simplex by sort-and-
/// threshold: sort descending, find the largest prefix whose running
/// threshold keeps its last coordinate positive, subtract, clip at zero.
pub fn project_simplex(v: &[f64]) -> SimplexWeights {
    assert!(!v.is_empty(), "cannot project an empty vector");
    assert!(v.iter().all(|x| x.is_finite()), "entries must be finite");
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("entries are finite"));

    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    let values = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    SimplexWeights { values }
}

/// The ascent step on the robustness weights: add `gamma * loss` to each
/// sampled client's entry, then project back onto the simplex.
pub fn ascent_update(
    lambda: &SimplexWeights,
    losses: &BTreeMap<usize, f64>,
    gamma: f64,
) -> Result<SimplexWeights> {
    assert!(gamma >= 0.0, "ascent step size must be non-negative");
    let mut shifted = lambda.values().to_vec();
    for (&client, &loss) in losses {
        if client >= shifted.len() {
            return Err(Error::UnknownClient(client));
        }
        shifted[client] += gamma * loss;
    }
    Ok(project_simplex(&shifted))
}
