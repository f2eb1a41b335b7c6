//! Experiment configuration: parsing, defaults, validation.
//!
//! Configs are flat TOML documents. Every key is optional; absent keys
//! take the defaults listed on [`SimConfig::default`]. `parse_config`
//! reports constraint violations with the offending key name.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::Error;
use crate::Result;

/// Client-selection policy for the descent step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Uniform sampling of `K` clients without replacement.
    Fedavg,
    /// Sampling by the robustness weights `lambda` alone.
    Afl,
    /// Product-of-experts sampling: robustness weights times the
    /// channel-bias PMF with exponent `bias_factor`.
    CaAfl,
    /// Deterministic top-`K` selection by effective channel.
    GreedyTopk,
}

impl Policy {
    /// Whether the policy maintains the robustness weights `lambda`.
    pub fn uses_lambda(self) -> bool {
        matches!(self, Policy::Afl | Policy::CaAfl)
    }

    pub fn name(self) -> &'static str {
        match self {
            Policy::Fedavg => "fedavg",
            Policy::Afl => "afl",
            Policy::CaAfl => "ca_afl",
            Policy::GreedyTopk => "greedy_topk",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fedavg" => Ok(Policy::Fedavg),
            "afl" => Ok(Policy::Afl),
            "ca_afl" => Ok(Policy::CaAfl),
            "greedy_topk" => Ok(Policy::GreedyTopk),
            other => Err(Error::config(
                "policy",
                format!("unknown policy `{other}` (expected fedavg, afl, ca_afl, greedy_topk)"),
            )),
        }
    }
}

/// Where training data comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// IDX image/label file pairs (`train_images_path` etc. must be set).
    IdxFiles,
    /// Class-conditional Gaussian blobs generated from the `data` stream.
    Synthetic,
}

/// Full experiment configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Total number of clients `N`.
    pub n_clients: usize,
    /// Clients selected per round `K`.
    pub k_selected: usize,
    /// Number of communication rounds `T`.
    pub rounds: usize,
    /// Energy-conservation exponent `C` of the channel-bias PMF.
    pub bias_factor: f64,
    pub policy: Policy,
    /// Initial descent learning rate.
    pub lr_init: f64,
    /// Per-round multiplicative learning-rate decay, in (0, 1].
    pub lr_decay: f64,
    /// Ascent step size `gamma` for the robustness weights.
    pub ascent_lr: f64,
    /// Descent mini-batch size per selected client.
    pub batch_size: usize,
    /// Batch size for the ascent-step loss evaluations.
    pub ascent_batch_size: usize,
    /// Subcarriers per upload; the effective channel reduces over these.
    pub n_subcarriers: usize,
    /// Model length `M`. Derived from the dataset shape when the config
    /// document leaves it unset.
    pub model_dim: usize,
    /// Transmit scaling factor `psi` in watts.
    pub scaling_factor_watts: f64,
    /// Symbol period `tau` in seconds.
    pub symbol_period_s: f64,
    /// Truncation floor for per-subcarrier channel magnitudes.
    pub channel_floor: f64,
    /// Standard deviation of the receiver noise added per model entry.
    pub aircomp_noise_std: f64,
    pub seed: u64,
    pub dataset: DatasetKind,
    /// Contiguous label-sorted shards dealt to each client.
    pub shards_per_client: usize,
    pub output_path: PathBuf,

    /// IDX file locations, used when `dataset = "idx_files"`.
    pub train_images_path: Option<PathBuf>,
    pub train_labels_path: Option<PathBuf>,
    pub test_images_path: Option<PathBuf>,
    pub test_labels_path: Option<PathBuf>,

    /// Synthetic dataset shape, used when `dataset = "synthetic"`.
    pub synth_train_samples: usize,
    pub synth_test_samples: usize,
    pub synth_features: usize,
    pub synth_classes: usize,

    /// Evaluate per-client accuracy every this many rounds (the final
    /// round is always evaluated; intermediate records carry the last
    /// evaluated values forward).
    pub eval_every: usize,
    /// Evaluate every client on the full test set instead of the
    /// label-matched per-client subsets.
    pub eval_on_full_test: bool,
}

impl Default for SimConfig {
    /// Defaults follow the headline experiment: `N=100`, `K=40`, `T=500`,
    /// `C=2`, initial learning rate 0.1 decaying by 0.998, ascent step
    /// 8e-3, batch sizes 50, 64 subcarriers, 0.5 mW scaling, 1 ms symbol
    /// period, channel floor 0.05, noiseless aggregation, seed 1.
    fn default() -> Self {
        SimConfig {
            n_clients: 100,
            k_selected: 40,
            rounds: 500,
            bias_factor: 2.0,
            policy: Policy::CaAfl,
            lr_init: 0.1,
            lr_decay: 0.998,
            ascent_lr: 8e-3,
            batch_size: 50,
            ascent_batch_size: 50,
            n_subcarriers: 64,
            model_dim: 0,
            scaling_factor_watts: 0.5e-3,
            symbol_period_s: 1e-3,
            channel_floor: 0.05,
            aircomp_noise_std: 0.0,
            seed: 1,
            dataset: DatasetKind::Synthetic,
            shards_per_client: 1,
            output_path: PathBuf::from("airfed_out.csv"),
            train_images_path: None,
            train_labels_path: None,
            test_images_path: None,
            test_labels_path: None,
            synth_train_samples: 10_000,
            synth_test_samples: 2_000,
            synth_features: 20,
            synth_classes: 10,
            eval_every: 1,
            eval_on_full_test: false,
        }
        .with_derived_model_dim()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_clients: Option<usize>,
    k_selected: Option<usize>,
    rounds: Option<usize>,
    bias_factor: Option<f64>,
    policy: Option<Policy>,
    lr_init: Option<f64>,
    lr_decay: Option<f64>,
    ascent_lr: Option<f64>,
    batch_size: Option<usize>,
    ascent_batch_size: Option<usize>,
    n_subcarriers: Option<usize>,
    model_dim: Option<usize>,
    scaling_factor_watts: Option<f64>,
    symbol_period_s: Option<f64>,
    channel_floor: Option<f64>,
    aircomp_noise_std: Option<f64>,
    seed: Option<u64>,
    dataset: Option<DatasetKind>,
    shards_per_client: Option<usize>,
    output_path: Option<PathBuf>,
    train_images_path: Option<PathBuf>,
    train_labels_path: Option<PathBuf>,
    test_images_path: Option<PathBuf>,
    test_labels_path: Option<PathBuf>,
    synth_train_samples: Option<usize>,
    synth_test_samples: Option<usize>,
    synth_features: Option<usize>,
    synth_classes: Option<usize>,
    eval_every: Option<usize>,
    eval_on_full_test: Option<bool>,
}

/// Parses a TOML config document, filling defaults for absent keys and
/// validating every constraint.
pub fn parse_config(source: &str) -> Result<SimConfig> {
    let raw: RawConfig =
        toml::from_str(source).map_err(|e| Error::ConfigSyntax(e.to_string()))?;
    let d = SimConfig::default();

    let mut cfg = SimConfig {
        n_clients: raw.n_clients.unwrap_or(d.n_clients),
        k_selected: raw.k_selected.unwrap_or(d.k_selected),
        rounds: raw.rounds.unwrap_or(d.rounds),
        bias_factor: raw.bias_factor.unwrap_or(d.bias_factor),
        policy: raw.policy.unwrap_or(d.policy),
        lr_init: raw.lr_init.unwrap_or(d.lr_init),
        lr_decay: raw.lr_decay.unwrap_or(d.lr_decay),
        ascent_lr: raw.ascent_lr.unwrap_or(d.ascent_lr),
        batch_size: raw.batch_size.unwrap_or(d.batch_size),
        ascent_batch_size: raw.ascent_batch_size.unwrap_or(d.ascent_batch_size),
        n_subcarriers: raw.n_subcarriers.unwrap_or(d.n_subcarriers),
        model_dim: raw.model_dim.unwrap_or(0),
        scaling_factor_watts: raw.scaling_factor_watts.unwrap_or(d.scaling_factor_watts),
        symbol_period_s: raw.symbol_period_s.unwrap_or(d.symbol_period_s),
        channel_floor: raw.channel_floor.unwrap_or(d.channel_floor),
        aircomp_noise_std: raw.aircomp_noise_std.unwrap_or(d.aircomp_noise_std),
        seed: raw.seed.unwrap_or(d.seed),
        dataset: raw.dataset.unwrap_or(d.dataset),
        shards_per_client: raw.shards_per_client.unwrap_or(d.shards_per_client),
        output_path: raw.output_path.unwrap_or_else(|| d.output_path.clone()),
        train_images_path: raw.train_images_path,
        train_labels_path: raw.train_labels_path,
        test_images_path: raw.test_images_path,
        test_labels_path: raw.test_labels_path,
        synth_train_samples: raw.synth_train_samples.unwrap_or(d.synth_train_samples),
        synth_test_samples: raw.synth_test_samples.unwrap_or(d.synth_test_samples),
        synth_features: raw.synth_features.unwrap_or(d.synth_features),
        synth_classes: raw.synth_classes.unwrap_or(d.synth_classes),
        eval_every: raw.eval_every.unwrap_or(d.eval_every),
        eval_on_full_test: raw.eval_on_full_test.unwrap_or(d.eval_on_full_test),
    };
    if cfg.model_dim == 0 {
        cfg = cfg.with_derived_model_dim();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config(&text)
}

impl SimConfig {
    /// Fills `model_dim` from the dataset shape when it was left unset.
    /// Synthetic shapes are known up front; for IDX files the Fashion-MNIST
    /// shape (785 x 10) is assumed until the files are actually loaded.
    fn with_derived_model_dim(mut self) -> Self {
        if self.model_dim == 0 {
            self.model_dim = match self.dataset {
                DatasetKind::Synthetic => (self.synth_features + 1) * self.synth_classes,
                DatasetKind::IdxFiles => 7850,
            };
        }
        self
    }

    /// Checks every config constraint, reporting the offending key.
    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(Error::config(key, "must be a positive integer"));
            }
            Ok(())
        }
        fn positive_real(key: &str, v: f64) -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be a positive real, got {v}")));
            }
            Ok(())
        }

        positive("n_clients", self.n_clients)?;
        positive("k_selected", self.k_selected)?;
        positive("rounds", self.rounds)?;
        positive("batch_size", self.batch_size)?;
        positive("ascent_batch_size", self.ascent_batch_size)?;
        positive("n_subcarriers", self.n_subcarriers)?;
        positive("model_dim", self.model_dim)?;
        positive("shards_per_client", self.shards_per_client)?;
        positive("eval_every", self.eval_every)?;
        positive_real("lr_init", self.lr_init)?;
        positive_real("ascent_lr", self.ascent_lr)?;
        positive_real("scaling_factor_watts", self.scaling_factor_watts)?;
        positive_real("symbol_period_s", self.symbol_period_s)?;

        if self.k_selected > self.n_clients {
            return Err(Error::config(
                "k_selected",
                format!(
                    "k_selected ({}) must not exceed n_clients ({})",
                    self.k_selected, self.n_clients
                ),
            ));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::config(
                "lr_decay",
                format!("must lie in (0, 1], got {}", self.lr_decay),
            ));
        }
        if !(self.bias_factor.is_finite() && self.bias_factor >= 0.0) {
            return Err(Error::config(
                "bias_factor",
                format!("must be a finite non-negative real, got {}", self.bias_factor),
            ));
        }
        if !(0.0..1.0).contains(&self.channel_floor) {
            return Err(Error::config(
                "channel_floor",
                format!("must lie in [0, 1), got {}", self.channel_floor),
            ));
        }
        if !(self.aircomp_noise_std.is_finite() && self.aircomp_noise_std >= 0.0) {
            return Err(Error::config(
                "aircomp_noise_std",
                format!("must be a non-negative real, got {}", self.aircomp_noise_std),
            ));
        }
        if self.dataset == DatasetKind::IdxFiles {
            for (key, path) in [
                ("train_images_path", &self.train_images_path),
                ("train_labels_path", &self.train_labels_path),
                ("test_images_path", &self.test_images_path),
                ("test_labels_path", &self.test_labels_path),
            ] {
                if path.is_none() {
                    return Err(Error::config(key, "required when dataset = \"idx_files\""));
                }
            }
        } else {
            positive("synth_train_samples", self.synth_train_samples)?;
            positive("synth_test_samples", self.synth_test_samples)?;
            positive("synth_features", self.synth_features)?;
            positive("synth_classes", self.synth_classes)?;
            let expected = (self.synth_features + 1) * self.synth_classes;
            if self.model_dim != expected {
                return Err(Error::config(
                    "model_dim",
                    format!(
                        "must equal (synth_features+1) x synth_classes = {expected}, got {}",
                        self.model_dim
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_paper_scale_counts() {
        let cfg = parse_config("n_clients = 100\nk_selected = 40\n").unwrap();
        assert_eq!(cfg.n_clients, 100);
        assert_eq!(cfg.k_selected, 40);
    }

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = parse_config("").unwrap();
        let d = SimConfig::default();
        assert_eq!(cfg.n_clients, d.n_clients);
        assert_eq!(cfg.k_selected, d.k_selected);
        assert_eq!(cfg.rounds, d.rounds);
        assert_eq!(cfg.bias_factor, d.bias_factor);
        assert_eq!(cfg.policy, d.policy);
        assert_eq!(cfg.lr_init, d.lr_init);
        assert_eq!(cfg.lr_decay, d.lr_decay);
        assert_eq!(cfg.ascent_lr, d.ascent_lr);
        assert_eq!(cfg.n_subcarriers, 64);
        assert_eq!(cfg.channel_floor, 0.05);
        assert_eq!(cfg.seed, 1);
    }

    #[test]
    fn k_greater_than_n_is_rejected_naming_the_key() {
        let err = parse_config("n_clients = 10\nk_selected = 50\n").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "k_selected"),
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn malformed_document_is_a_syntax_error() {
        assert!(matches!(
            parse_config("n_clients = = 3"),
            Err(Error::ConfigSyntax(_))
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config("n_cleints = 100").is_err());
    }

    #[test]
    fn model_dim_derived_for_synthetic() {
        let cfg = parse_config("synth_features = 5\nsynth_classes = 3\n").unwrap();
        assert_eq!(cfg.model_dim, 18);
    }

    #[test]
    fn idx_dataset_requires_paths() {
        let err = parse_config("dataset = \"idx_files\"").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "train_images_path"),
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn policy_round_trip() {
        for name in ["fedavg", "afl", "ca_afl", "greedy_topk"] {
            assert_eq!(name.parse::<Policy>().unwrap().name(), name);
        }
        assert!("bogus".parse::<Policy>().is_err());
    }

    #[test]
    fn lambda_usage_by_policy() {
        assert!(!Policy::Fedavg.uses_lambda());
        assert!(Policy::Afl.uses_lambda());
        assert!(Policy::CaAfl.uses_lambda());
        assert!(!Policy::GreedyTopk.uses_lambda());
    }
}
