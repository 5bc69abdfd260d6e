//! MNIST as a tournament of pairwise binary tasks.
//!
//! Pixels are scaled to `[0, 1]` before PCA.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pca_fit_transform, Matrix, PcaFit};
use crate::rng::{purpose, KeyedRng};
use crate::task::{LabeledExample, MultiTaskDataset, ProblemKind};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels of every image, back to back.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn len(&self) -> usize {
        self.pixels.len() / self.pixel_count().max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let p = self.pixel_count();
        &self.pixels[i * p..(i + 1) * p]
    }

    /// One image as a vector in `[0, 1]`.
    pub fn scaled(&self, i: usize) -> Vec<f64> {
        self.image(i).iter().map(|&v| f64::from(v) / 255.0).collect()
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx("truncated header".into()))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Idx(format!("image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let body = &bytes[16..];
    if body.len() != n * rows * cols {
        return Err(Error::Idx(format!(
            "expected {} pixel bytes, found {}",
            n * rows * cols,
            body.len()
        )));
    }
    Ok(IdxImages { rows, cols, pixels: body.to_vec() })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::Idx(format!("label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(Error::Idx(format!("expected {n} labels, found {}", body.len())));
    }
    Ok(body.to_vec())
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    parse_idx_images(&std::fs::read(path)?)
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    parse_idx_labels(&std::fs::read(path)?)
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGE_MAGIC, images.len() as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn write_idx_images(path: &Path, images: &IdxImages) -> Result<()> {
    Ok(std::fs::write(path, encode_idx_images(images))?)
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    Ok(std::fs::write(path, encode_idx_labels(labels))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TournamentSpec {
    pub n_classes: usize,
    pub pca_dim: usize,
    /// Share of each class kept for training, from the front of the file.
    pub train_fraction: f64,
}

impl Default for TournamentSpec {
    fn default() -> Self {
        Self { n_classes: 10, pca_dim: 50, train_fraction: 0.02 }
    }
}

impl TournamentSpec {
    /// Unordered class pairs `(a, b)`, `a < b`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_classes;
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::InvalidParameter("a tournament needs at least two classes".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train_fraction must lie in (0, 1], got {}",
                self.train_fraction
            )));
        }
        if self.pca_dim == 0 {
            return Err(Error::InvalidParameter("pca_dim must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MnistTournament {
    /// One binary task per pair: first class `+1`, second `-1`.
    pub data: MultiTaskDataset,
    pub pca: PcaFit,
    /// Indices of the retained training images, ascending.
    pub retained: Vec<usize>,
}

impl MnistTournament {
    /// `d x k` projection applied after centering.
    pub fn pca_projection(&self) -> &Matrix {
        &self.pca.projection
    }
}

fn check_labels(labels: &[u8], n_classes: usize) -> Result<()> {
    match labels.iter().find(|&&l| usize::from(l) >= n_classes) {
        Some(l) => Err(Error::Idx(format!("label {l} outside 0..{n_classes}"))),
        None => Ok(()),
    }
}

/// PCA on the full training set, then per class the first
/// `ceil(train_fraction * class size)` images in file order.
pub fn build_mnist_tournament(
    images: &IdxImages,
    labels: &[u8],
    spec: &TournamentSpec,
) -> Result<MnistTournament> {
    spec.validate()?;
    if images.len() != labels.len() {
        return Err(Error::Idx(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    check_labels(labels, spec.n_classes)?;
    let n = images.len();
    let p = images.pixel_count();
    let full = Matrix::from_vec(n, p, images.pixels.iter().map(|&v| f64::from(v) / 255.0).collect())?;
    let pca = pca_fit_transform(&full, spec.pca_dim)?;

    let mut class_size = vec![0usize; spec.n_classes];
    labels.iter().for_each(|&l| class_size[usize::from(l)] += 1);
    let quota: Vec<usize> = class_size
        .iter()
        .map(|&s| (spec.train_fraction * s as f64 - 1e-9).ceil() as usize)
        .collect();
    let mut taken = vec![0usize; spec.n_classes];
    let mut retained = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        let c = usize::from(l);
        if taken[c] < quota[c] {
            taken[c] += 1;
            retained.push(i);
        }
    }
    if let Some(c) = taken.iter().position(|&k| k == 0) {
        return Err(Error::ClassAbsent(c));
    }

    let tasks = spec
        .pairs()
        .into_iter()
        .map(|(a, b)| {
            retained
                .iter()
                .filter_map(|&i| {
                    let c = usize::from(labels[i]);
                    let y = if c == a {
                        1.0
                    } else if c == b {
                        -1.0
                    } else {
                        return None;
                    };
                    Some(LabeledExample::new(pca.reduced.row(i).to_vec(), y))
                })
                .collect()
        })
        .collect();
    let data = MultiTaskDataset::from_examples(tasks, pca.dim(), ProblemKind::Classification)?;
    Ok(MnistTournament { data, pca, retained })
}

/// Round-robin vote: each pair votes for its first class when the score is
/// nonnegative, else its second. Most votes wins, ties to the lower class.
pub fn tournament_decode(scores: &[f64], n_classes: usize) -> Result<usize> {
    let pairs = TournamentSpec { n_classes, ..Default::default() }.pairs();
    if scores.len() != pairs.len() {
        return Err(Error::LengthMismatch { expected: pairs.len(), found: scores.len() });
    }
    let mut votes = vec![0usize; n_classes];
    for (&(a, b), &s) in pairs.iter().zip(scores) {
        votes[if s >= 0.0 { a } else { b }] += 1;
    }
    let best = *votes.iter().max().expect("at least two classes");
    Ok(votes.iter().position(|&v| v == best).expect("max exists"))
}

/// Digit-like images for running the pipeline without the MNIST files.
///
/// Each class gets a fixed prototype of three thick random strokes; samples
/// shift the prototype by up to two pixels, rescale its intensity and add
/// pixel noise. `stream` separates training from test draws.
pub fn synthetic_digits(per_class: usize, n_classes: usize, seed: u64, stream: u64) -> (IdxImages, Vec<u8>) {
    const SIDE: usize = 28;
    let prototypes: Vec<Vec<f64>> = (0..n_classes)
        .map(|c| {
            let mut rng = KeyedRng::new(seed, &[c as u64, 0, purpose::SYNTH]);
            let mut img = vec![0.0; SIDE * SIDE];
            for _ in 0..3 {
                let (x0, y0): (f64, f64) = (rng.random_range(6.0..22.0), rng.random_range(6.0..22.0));
                let (x1, y1): (f64, f64) = (rng.random_range(6.0..22.0), rng.random_range(6.0..22.0));
                for s in 0..=40 {
                    let u = s as f64 / 40.0;
                    let (cx, cy) = (x0 + u * (x1 - x0), y0 + u * (y1 - y0));
                    for r in 0..SIDE {
                        for q in 0..SIDE {
                            let d2 = (q as f64 - cx).powi(2) + (r as f64 - cy).powi(2);
                            let v = (-d2 / 2.0).exp();
                            img[r * SIDE + q] = f64::max(img[r * SIDE + q], v);
                        }
                    }
                }
            }
            img
        })
        .collect();

    let mut pixels = Vec::with_capacity(per_class * n_classes * SIDE * SIDE);
    let mut labels = Vec::with_capacity(per_class * n_classes);
    let mut rng = KeyedRng::new(seed, &[stream, 1, purpose::SYNTH]);
    // interleave classes so file order mixes them
    for _ in 0..per_class {
        for (c, proto) in prototypes.iter().enumerate() {
            let dx: i64 = rng.random_range(-2..=2);
            let dy: i64 = rng.random_range(-2..=2);
            let gain: f64 = rng.random_range(0.6..1.0);
            for r in 0..SIDE as i64 {
                for q in 0..SIDE as i64 {
                    let (sr, sq) = (r - dy, q - dx);
                    let base = if (0..SIDE as i64).contains(&sr) && (0..SIDE as i64).contains(&sq) {
                        proto[sr as usize * SIDE + sq as usize]
                    } else {
                        0.0
                    };
                    let noise: f64 = rng.sample(StandardNormal);
                    let v = 255.0 * (gain * base + 0.15 * noise);
                    pixels.push(v.clamp(0.0, 255.0).round() as u8);
                }
            }
            labels.push(c as u8);
        }
    }
    (IdxImages { rows: SIDE, cols: SIDE, pixels }, labels)
}
