//! Truncated Rayleigh block fading and channel-inversion energy
//! accounting.
//!
//! Per-subcarrier magnitudes are |CN(0,1)| draws, i.e. Rayleigh with
//! mean-square one, conditioned on exceeding the truncation floor by
//! rejection (clamping would pile an atom onto the floor and skew the
//! energy statistics). One independent realization is drawn per round
//! and shared by the scheduler and the transmission it pays for.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::config::SimConfig;
use crate::error::Error;
use crate::Result;

/// One round's channel state: per-subcarrier magnitudes and the
/// per-client effective channel reduced over subcarriers.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    per_subcarrier: Vec<f64>,
    effective: Vec<f64>,
    n_subcarriers: usize,
}

impl ChannelRealization {
    /// Builds a realization from explicit per-subcarrier magnitudes,
    /// row-major over clients.
    pub fn from_magnitudes(per_subcarrier: Vec<f64>, n_subcarriers: usize) -> Result<Self> {
        assert!(
            n_subcarriers > 0 && per_subcarrier.len().is_multiple_of(n_subcarriers),
            "magnitudes must fill whole client rows"
        );
        let n_clients = per_subcarrier.len() / n_subcarriers;
        let effective = (0..n_clients)
            .map(|i| effective_channel(&per_subcarrier[i * n_subcarriers..(i + 1) * n_subcarriers]))
            .collect::<Result<Vec<f64>>>()?;
        Ok(ChannelRealization {
            per_subcarrier,
            effective,
            n_subcarriers,
        })
    }

    pub fn n_clients(&self) -> usize {
        self.effective.len()
    }

    pub fn subcarriers_of(&self, client: usize) -> &[f64] {
        let start = client * self.n_subcarriers;
        &self.per_subcarrier[start..start + self.n_subcarriers]
    }

    /// Effective channel magnitudes, one per client.
    pub fn effective(&self) -> &[f64] {
        &self.effective
    }
}

/// Draws one block-fading realization: `n_clients * n_subcarriers`
/// i.i.d. truncated Rayleigh magnitudes plus the per-client effective
/// channels.
pub fn draw_channels<R: Rng>(
    n_clients: usize,
    n_subcarriers: usize,
    floor: f64,
    rng: &mut R,
) -> ChannelRealization {
    assert!(
        (0.0..1.0).contains(&floor),
        "truncation floor must lie in [0, 1)"
    );
    // |CN(0,1)|^2 is Exp(1), so the Rayleigh magnitude with unit mean
    // square is the square root of an exponential draw
    let mut per_subcarrier = Vec::with_capacity(n_clients * n_subcarriers);
    for _ in 0..n_clients * n_subcarriers {
        let h = loop {
            let energy: f64 = Exp1.sample(rng);
            let draw = energy.sqrt();
            if draw >= floor {
                break draw;
            }
        };
        per_subcarrier.push(h);
    }
    let effective = (0..n_clients)
        .map(|i| {
            effective_channel(&per_subcarrier[i * n_subcarriers..(i + 1) * n_subcarriers])
                .expect("truncated magnitudes are positive")
        })
        .collect();
    ChannelRealization {
        per_subcarrier,
        effective,
        n_subcarriers,
    }
}

/// Reduces one client's per-subcarrier magnitudes to the effective
/// channel: the reciprocal root of the mean reciprocal square,
/// `(mean_b 1/h_b^2)^(-1/2)`.
pub fn effective_channel(row: &[f64]) -> Result<f64> {
    assert!(!row.is_empty(), "subcarrier row must be non-empty");
    let mut sum = 0.0;
    for &h in row {
        if h <= 0.0 {
            return Err(Error::NonPositiveChannel(h));
        }
        sum += 1.0 / (h * h);
    }
    Ok((sum / row.len() as f64).powf(-0.5))
}

/// Energy in joules to upload `model_dim` symbols with channel
/// inversion: `psi * M * tau / h^2`.
pub fn upload_energy(
    effective_h: f64,
    psi_w: f64,
    model_dim: usize,
    symbol_period_s: f64,
) -> Result<f64> {
    if effective_h <= 0.0 {
        return Err(Error::NonPositiveChannel(effective_h));
    }
    Ok(psi_w * model_dim as f64 * symbol_period_s / (effective_h * effective_h))
}

/// Energy spent in one round, itemized per client.
#[derive(Debug, Clone)]
pub struct RoundEnergy {
    pub round: usize,
    pub per_client: Vec<(usize, f64)>,
    pub total_j: f64,
}

/// Cumulative channel-inversion energy over a run.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    per_round: Vec<RoundEnergy>,
    cumulative_j: f64,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charges every selected client for its upload at this round's
    /// effective channel and rolls the round total into the cumulative sum.
    pub fn record_round(
        &mut self,
        round: usize,
        selected: &[usize],
        realization: &ChannelRealization,
        cfg: &SimConfig,
    ) -> Result<f64> {
        let mut per_client = Vec::with_capacity(selected.len());
        let mut total = 0.0;
        for &client in selected {
            if client >= realization.n_clients() {
                return Err(Error::UnknownClient(client));
            }
            let energy = upload_energy(
                realization.effective()[client],
                cfg.scaling_factor_watts,
                cfg.model_dim,
                cfg.symbol_period_s,
            )?;
            per_client.push((client, energy));
            total += energy;
        }
        self.per_round.push(RoundEnergy {
            round,
            per_client,
            total_j: total,
        });
        self.cumulative_j += total;
        Ok(total)
    }

    pub fn rounds(&self) -> &[RoundEnergy] {
        &self.per_round
    }

    pub fn cumulative_j(&self) -> f64 {
        self.cumulative_j
    }
}
