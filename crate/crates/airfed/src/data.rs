//! Dataset ingestion and the label-sorted shard partition that creates
//! client heterogeneity.
//!
//! Two sources: IDX image/label file pairs (gzip-transparent), and
//! synthetic class-conditional Gaussian blobs for desk-scale runs. The
//! blob generator spreads class-pair separations from easy to hard so
//! that worst-client metrics have something to disagree about.

use std::io::Read;
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};
use flate2::read::GzDecoder;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::Result;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// An in-memory classification dataset, features stored row-major.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f32>,
    labels: Vec<usize>,
    n_features: usize,
    n_classes: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f32>,
        labels: Vec<usize>,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self> {
        if n_features == 0 || features.len() != labels.len() * n_features {
            return Err(Error::Data(format!(
                "feature matrix ({} values, {} per row) does not match {} labels",
                features.len(),
                n_features,
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        Ok(Dataset {
            features,
            labels,
            n_features,
            n_classes,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn label(&self, sample: usize) -> usize {
        self.labels[sample]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features_of(&self, sample: usize) -> &[f32] {
        let start = sample * self.n_features;
        &self.features[start..start + self.n_features]
    }

    /// Raises the class count, e.g. to unify a train/test pair whose
    /// label files cover different ranges.
    pub fn widen_classes(&mut self, n_classes: usize) {
        assert!(
            n_classes >= self.n_classes,
            "cannot shrink the class count"
        );
        self.n_classes = n_classes;
    }
}

/// Reads a whole file, transparently gunzipping when the gzip magic is
/// present.
fn read_file_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn idx_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::IdxFormat {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Loads an IDX image/label file pair. Pixel bytes are scaled to [0, 1];
/// the class count is one past the largest label seen.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = read_file_bytes(images_path)?;
    let mut cur = std::io::Cursor::new(&images);
    let magic = cur
        .read_u32::<BigEndian>()
        .map_err(|_| idx_error(images_path, "truncated header"))?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(idx_error(
            images_path,
            format!("magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"),
        ));
    }
    let n_images = cur
        .read_u32::<BigEndian>()
        .map_err(|_| idx_error(images_path, "truncated header"))? as usize;
    let rows = cur
        .read_u32::<BigEndian>()
        .map_err(|_| idx_error(images_path, "truncated header"))? as usize;
    let cols = cur
        .read_u32::<BigEndian>()
        .map_err(|_| idx_error(images_path, "truncated header"))? as usize;
    let n_features = rows * cols;
    let pixels = &images[cur.position() as usize..];
    if pixels.len() != n_images * n_features {
        return Err(idx_error(
            images_path,
            format!(
                "expected {} pixel bytes for {} images of {}x{}, found {}",
                n_images * n_features,
                n_images,
                rows,
                cols,
                pixels.len()
            ),
        ));
    }
    let features: Vec<f32> = pixels.iter().map(|&b| f32::from(b) / 255.0).collect();

    let labels_bytes = read_file_bytes(labels_path)?;
    let mut cur = std::io::Cursor::new(&labels_bytes);
    let magic = cur
        .read_u32::<BigEndian>()
        .map_err(|_| idx_error(labels_path, "truncated header"))?;
    if magic != IDX_LABELS_MAGIC {
        return Err(idx_error(
            labels_path,
            format!("magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"),
        ));
    }
    let n_labels = cur
        .read_u32::<BigEndian>()
        .map_err(|_| idx_error(labels_path, "truncated header"))? as usize;
    let label_bytes = &labels_bytes[cur.position() as usize..];
    if label_bytes.len() != n_labels {
        return Err(idx_error(
            labels_path,
            format!("expected {n_labels} label bytes, found {}", label_bytes.len()),
        ));
    }
    if n_labels != n_images {
        return Err(idx_error(
            labels_path,
            format!("{n_labels} labels for {n_images} images"),
        ));
    }
    let labels: Vec<usize> = label_bytes.iter().map(|&b| b as usize).collect();
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    Dataset::new(features, labels, n_features, n_classes)
}

/// Generates class-conditional Gaussian blobs with balanced labels.
///
/// Classes are paired on shared axes; pair separations shrink from 4 to 1
/// noise standard deviations across the class list, so low-numbered
/// classes are nearly separable and high-numbered ones overlap. A linear
/// model is Bayes-competitive on every pair (equal-covariance Gaussians).
pub fn synthesize<R: Rng>(
    n_samples: usize,
    d: usize,
    n_classes: usize,
    rng: &mut R,
) -> Dataset {
    assert!(n_samples > 0 && d > 0 && n_classes > 0, "arguments must be positive");
    let means = blob_means(d, n_classes);

    let mut features = Vec::with_capacity(n_samples * d);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = i % n_classes;
        for &mean in &means[label] {
            let noise: f64 = StandardNormal.sample(rng);
            features.push((mean + noise) as f32);
        }
        labels.push(label);
    }
    Dataset::new(features, labels, d, n_classes).expect("construction is consistent")
}

/// Class means for the blob generator.
///
/// Pair 2j/2j+1 splits at +-sep/2 around zero on axis `j mod d`, with a
/// separation decaying linearly from 4 to 1 noise standard deviations
/// across pairs. When a spare axis exists, both members of the pair also
/// carry a +3 marker on it, which keeps different pairs far apart while
/// every within-pair boundary passes through the origin (fast to learn
/// from zero weights).
fn blob_means(d: usize, n_classes: usize) -> Vec<Vec<f64>> {
    let n_pairs = n_classes.div_ceil(2);
    let mut means = vec![vec![0.0; d]; n_classes];
    for pair in 0..n_pairs {
        let split_axis = pair % d;
        let carrier_axis = (n_pairs + pair) % d;
        let t = if n_pairs > 1 {
            pair as f64 / (n_pairs - 1) as f64
        } else {
            0.0
        };
        let separation = 4.0 - 3.0 * t;
        for class in [2 * pair, 2 * pair + 1] {
            if class >= n_classes {
                continue;
            }
            let side = if class % 2 == 0 { -1.0 } else { 1.0 };
            means[class][split_axis] += side * separation / 2.0;
            if carrier_axis != split_axis {
                means[class][carrier_axis] += 3.0 * (1.0 + (pair / d) as f64);
            }
        }
    }
    means
}

/// Per-client sample assignments into a train and a test dataset.
#[derive(Debug, Clone)]
pub struct ClientShards {
    /// Training sample indices per client; disjoint across clients.
    pub assignments: Vec<Vec<usize>>,
    /// Test sample indices per client: the subset of the test set whose
    /// labels occur in the client's training shards.
    pub test_assignments: Vec<Vec<usize>>,
}

/// Sorts training samples by label (stable, original index tiebreak),
/// splits them into `n_clients * shards_per_client` contiguous
/// equal-sized shards, and deals shards to clients in order. Remainder
/// samples are dropped with a warning so shards stay exactly equal.
pub fn shard_by_label(
    ds: &Dataset,
    test_ds: &Dataset,
    n_clients: usize,
    shards_per_client: usize,
) -> Result<ClientShards> {
    if ds.n_samples() == 0 || test_ds.n_samples() == 0 {
        return Err(Error::Data("cannot shard an empty dataset".into()));
    }
    let n_shards = n_clients * shards_per_client;
    let shard_size = ds.n_samples() / n_shards;
    if shard_size == 0 {
        return Err(Error::Data(format!(
            "{} samples cannot fill {} shards",
            ds.n_samples(),
            n_shards
        )));
    }
    let dropped = ds.n_samples() - n_shards * shard_size;
    if dropped > 0 {
        log::warn!(
            "dropping {dropped} of {} samples so {n_shards} shards stay equal-sized",
            ds.n_samples()
        );
    }

    let mut order: Vec<usize> = (0..ds.n_samples()).collect();
    order.sort_by_key(|&i| ds.label(i));

    let mut assignments = Vec::with_capacity(n_clients);
    for client in 0..n_clients {
        let mut indices = Vec::with_capacity(shards_per_client * shard_size);
        for s in 0..shards_per_client {
            let shard = client * shards_per_client + s;
            indices.extend_from_slice(&order[shard * shard_size..(shard + 1) * shard_size]);
        }
        assignments.push(indices);
    }

    let mut test_assignments = Vec::with_capacity(n_clients);
    for (client, indices) in assignments.iter().enumerate() {
        let mut present = vec![false; ds.n_classes()];
        for &i in indices {
            present[ds.label(i)] = true;
        }
        let matched: Vec<usize> = (0..test_ds.n_samples())
            .filter(|&i| test_ds.label(i) < present.len() && present[test_ds.label(i)])
            .collect();
        if matched.is_empty() {
            return Err(Error::Data(format!(
                "client {client} has no test samples matching its training labels"
            )));
        }
        test_assignments.push(matched);
    }

    Ok(ClientShards {
        assignments,
        test_assignments,
    })
}
