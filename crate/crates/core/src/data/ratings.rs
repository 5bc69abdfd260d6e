//! A synthetic conjoint-ratings table: every subject rates the same set of
//! products described by binary attributes, with low-rank preferences.
//!
//! Shaped like the personal-computer survey (189 subjects, 20 products, 13
//! attributes, 0-10 ratings) so that loaders and sweeps can run without the
//! original file.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::table::{read_task_table, HoldoutRule, TableSchema, TaskTable};
use crate::error::{Error, Result};
use crate::rng::{purpose, KeyedRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatingsSpec {
    pub subjects: usize,
    pub products: usize,
    pub attributes: usize,
    /// Rank of the subject preference matrix.
    pub rank: usize,
    pub noise_sd: f64,
    /// Products per subject held out, from the end.
    pub test_products: usize,
    pub seed: u64,
}

impl Default for RatingsSpec {
    fn default() -> Self {
        Self { subjects: 189, products: 20, attributes: 13, rank: 2, noise_sd: 1.0, test_products: 4, seed: 0 }
    }
}

impl RatingsSpec {
    /// Columns `subject`, `a1..aK`, `bias`, `rating`; the constant `bias`
    /// column is a feature.
    pub fn schema(&self) -> TableSchema {
        let mut features: Vec<String> = (1..=self.attributes).map(|i| format!("a{i}")).collect();
        features.push("bias".into());
        TableSchema { task_column: "subject".into(), feature_columns: features, target_column: "rating".into() }
    }

    pub fn holdout(&self) -> HoldoutRule {
        HoldoutRule::LastN { n: self.test_products }
    }

    fn validate(&self) -> Result<()> {
        if self.subjects == 0 || self.attributes == 0 || self.rank == 0 {
            return Err(Error::InvalidParameter("subjects, attributes and rank must be positive".into()));
        }
        if self.test_products == 0 || self.test_products >= self.products {
            return Err(Error::InvalidParameter("need at least one train and one test product".into()));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidParameter("noise_sd must be nonnegative".into()));
        }
        Ok(())
    }
}

/// The table as CSV text, one row per (subject, product) in subject-major
/// order.
pub fn synthetic_ratings_csv(spec: &RatingsSpec) -> Result<String> {
    spec.validate()?;
    let k = spec.attributes;
    let mut rng = KeyedRng::new(spec.seed, &[0, 0, purpose::SYNTH]);
    let products: Vec<Vec<f64>> = (0..spec.products)
        .map(|_| (0..k).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect())
        .collect();
    let basis: Vec<Vec<f64>> = (0..spec.rank)
        .map(|_| (0..k).map(|_| rng.sample::<f64, _>(StandardNormal) / (k as f64).sqrt()).collect())
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    let schema = spec.schema();
    let mut header = vec![schema.task_column.clone()];
    header.extend(schema.feature_columns.iter().cloned());
    header.push(schema.target_column.clone());
    w.write_record(&header)?;
    for s in 0..spec.subjects {
        let mut srng = KeyedRng::new(spec.seed, &[s as u64, 1, purpose::SYNTH]);
        let coef: Vec<f64> = (0..spec.rank).map(|_| 2.0 * srng.sample::<f64, _>(StandardNormal)).collect();
        let pref: Vec<f64> = (0..k).map(|j| basis.iter().zip(&coef).map(|(b, c)| b[j] * c).sum()).collect();
        let base = 5.0 + srng.sample::<f64, _>(StandardNormal);
        for x in &products {
            let noise: f64 = srng.sample(StandardNormal);
            let score = base + x.iter().zip(&pref).map(|(a, b)| a * b).sum::<f64>() + spec.noise_sd * noise;
            let rating = score.round().clamp(0.0, 10.0);
            let mut rec = vec![format!("s{:03}", s + 1)];
            rec.extend(x.iter().map(|v| format!("{v}")));
            rec.push("1".into());
            rec.push(format!("{rating}"));
            w.write_record(&rec)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Table(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Table(e.to_string()))
}

pub fn synthetic_ratings(spec: &RatingsSpec) -> Result<TaskTable> {
    let text = synthetic_ratings_csv(spec)?;
    read_task_table(&mut csv::Reader::from_reader(text.as_bytes()), &spec.schema(), &spec.holdout())
}
