//! Synthetic regression tasks drawn around two opposite modes.
//!
//! The first `n_type1` tasks have parameters near `mu`, the remaining
//! `n_type2` near `-2 mu`, where `mu` is uniform on the sphere of radius
//! `mode_radius`. Inputs are standard normal and targets are linear plus
//! Gaussian noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{purpose, KeyedRng};
use crate::task::{dot, norm, LabeledExample, MultiTaskDataset, ProblemKind, SplitDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoModesConfig {
    pub d: usize,
    pub n_type1: usize,
    pub n_type2: usize,
    pub mode_radius: f64,
    pub sigma_task: f64,
    pub sigma_noise: f64,
    pub m_train: usize,
    pub m_test: usize,
    pub seed: u64,
}

impl Default for TwoModesConfig {
    fn default() -> Self {
        Self {
            d: 10,
            n_type1: 50,
            n_type2: 5,
            mode_radius: 5.0,
            sigma_task: 0.1,
            sigma_noise: 0.5,
            m_train: 5,
            m_test: 15,
            seed: 0,
        }
    }
}

impl TwoModesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n_type1 == 0 || self.n_type2 == 0 || self.m_train == 0 || self.m_test == 0 {
            return Err(Error::InvalidParameter(
                "two-modes dimension, task counts and sample sizes must be at least 1".into(),
            ));
        }
        if !(self.sigma_task >= 0.0) || !(self.sigma_noise >= 0.0) {
            return Err(Error::InvalidParameter("two-modes sigmas must be nonnegative".into()));
        }
        if !(self.mode_radius > 0.0) {
            return Err(Error::InvalidParameter("mode_radius must be positive".into()));
        }
        Ok(())
    }

    pub fn num_tasks(&self) -> usize {
        self.n_type1 + self.n_type2
    }
}

/// One draw of the generator.
#[derive(Debug, Clone)]
pub struct TwoModes {
    pub data: SplitDataset,
    /// `T x d`, row `t` is task `t`'s true parameter.
    pub true_params: Matrix,
    pub mu: Vec<f64>,
}

fn gaussian(rng: &mut KeyedRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn sample_task(
    cfg: &TwoModesConfig,
    w: &[f64],
    m: usize,
    rng: &mut KeyedRng,
) -> Vec<LabeledExample> {
    (0..m)
        .map(|_| {
            let x = gaussian(rng, cfg.d, 1.0);
            let noise: f64 = rng.sample(StandardNormal);
            let y = dot(w, &x) + cfg.sigma_noise * noise;
            LabeledExample::new(x, y)
        })
        .collect()
}

/// Draws tasks for the given mode centres. `streams` selects the
/// (params, train, test) purposes so training and transfer tasks never share
/// randomness.
fn draw_tasks(
    cfg: &TwoModesConfig,
    replicate: u64,
    mu: &[f64],
    n1: usize,
    n2: usize,
    streams: [u64; 3],
) -> Result<(SplitDataset, Matrix)> {
    let centre2: Vec<f64> = mu.iter().map(|v| -2.0 * v).collect();
    let mut params = Vec::with_capacity(n1 + n2);
    let mut train = Vec::with_capacity(n1 + n2);
    let mut test = Vec::with_capacity(n1 + n2);
    for t in 0..n1 + n2 {
        let centre = if t < n1 { mu } else { &centre2 };
        let mut prng = KeyedRng::new(cfg.seed, &[replicate, t as u64, streams[0]]);
        let offset = gaussian(&mut prng, cfg.d, cfg.sigma_task);
        let w: Vec<f64> = centre.iter().zip(&offset).map(|(c, o)| c + o).collect();
        let mut trng = KeyedRng::new(cfg.seed, &[replicate, t as u64, streams[1]]);
        train.push(sample_task(cfg, &w, cfg.m_train, &mut trng));
        let mut erng = KeyedRng::new(cfg.seed, &[replicate, t as u64, streams[2]]);
        test.push(sample_task(cfg, &w, cfg.m_test, &mut erng));
        params.push(w);
    }
    let data = SplitDataset::new(
        MultiTaskDataset::from_examples(train, cfg.d, ProblemKind::Regression)?,
        MultiTaskDataset::from_examples(test, cfg.d, ProblemKind::Regression)?,
    )?;
    Ok((data, Matrix::from_rows(&params)?))
}

/// Mode centre `mu`: a normalized Gaussian scaled to `mode_radius`.
pub fn draw_mode(cfg: &TwoModesConfig, replicate: u64) -> Vec<f64> {
    let mut rng = KeyedRng::new(cfg.seed, &[replicate, 0, purpose::MODE]);
    loop {
        let g = gaussian(&mut rng, cfg.d, 1.0);
        let n = norm(&g);
        if n > 0.0 {
            return g.iter().map(|v| cfg.mode_radius * v / n).collect();
        }
    }
}

pub fn generate_two_modes(cfg: &TwoModesConfig, replicate: u64) -> Result<TwoModes> {
    cfg.validate()?;
    let mu = draw_mode(cfg, replicate);
    let (data, true_params) = draw_tasks(
        cfg,
        replicate,
        &mu,
        cfg.n_type1,
        cfg.n_type2,
        [purpose::TASK_PARAMS, purpose::TRAIN, purpose::TEST],
    )?;
    Ok(TwoModes { data, true_params, mu })
}

/// Fresh tasks around the same modes, in the configured type proportions
/// (type-1 count rounded to nearest).
pub fn generate_ltl_two_modes_test_tasks(
    cfg: &TwoModesConfig,
    replicate: u64,
    mu: &[f64],
    n_tasks: usize,
) -> Result<(SplitDataset, Matrix)> {
    cfg.validate()?;
    if mu.len() != cfg.d {
        return Err(Error::DimensionMismatch { expected: cfg.d, found: mu.len() });
    }
    if n_tasks == 0 {
        return Err(Error::InvalidParameter("n_tasks must be at least 1".into()));
    }
    let share = cfg.n_type1 as f64 / cfg.num_tasks() as f64;
    let n1 = ((n_tasks as f64 * share).round() as usize).min(n_tasks);
    draw_tasks(
        cfg,
        replicate,
        mu,
        n1,
        n_tasks - n1,
        [purpose::LTL_PARAMS, purpose::LTL_TRAIN, purpose::LTL_TEST],
    )
}
