//! Monte Carlo drivers and statistical checks.
//!
//! Replica `r` of a run with master seed `s` reads the realization
//! `RealizationStore::new(s, r)` at every parameter value, so curves in `h`
//! use common random numbers and every estimate is reproducible bit for bit
//! from `(s, config)`. Replicas run on the rayon pool and are collected in
//! replica order.

mod crossing;
mod diagnostics;
mod tails;

pub use crossing::*;
pub use diagnostics::*;
pub use tails::*;

use crate::error::{Error, Result};
use crate::field::{Spin, SpinField};
use crate::ising::{sample_window, sample_window_store, IsingModel, IsingParams, DEFAULT_T_MAX};
use crate::lattice::{Rect, Vertex};
use crate::models::{bernoulli_field, bernoulli_p, BernoulliModel, MajorityWindowModel};
use crate::representation::{logit_half, FinitaryModel, Realization, RealizationStore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::Instant;

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bernoulli,
    Majority,
    Ising,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bernoulli" => Ok(ModelKind::Bernoulli),
            "majority" => Ok(ModelKind::Majority),
            "ising" => Ok(ModelKind::Ising),
            _ => Err(format!("unknown model {s:?}; expected bernoulli, majority or ising")),
        }
    }
}

/// A sampler for one of the shipped models at a free field parameter `h`.
#[derive(Clone, Copy, Debug)]
pub enum Model {
    Bernoulli,
    Majority(MajorityWindowModel),
    Ising(IsingModel),
}

impl Model {
    pub fn ising(beta: f64) -> Result<Self> {
        Ok(Model::Ising(IsingModel::new(beta, DEFAULT_T_MAX)?))
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Bernoulli => ModelKind::Bernoulli,
            Model::Majority(_) => ModelKind::Majority,
            Model::Ising(_) => ModelKind::Ising,
        }
    }

    pub fn name(&self) -> &'static str {
        self.finitary().name()
    }

    pub fn finitary(&self) -> &dyn FinitaryModel {
        match self {
            Model::Bernoulli => &BernoulliModel,
            Model::Majority(m) => m,
            Model::Ising(m) => m,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            Model::Ising(m) => Some(m.levels.beta),
            _ => None,
        }
    }

    /// The field on `rect` for one replica.
    pub fn sample(&self, rect: Rect, store: &RealizationStore, h: f64) -> Result<SpinField> {
        match self {
            Model::Bernoulli => Ok(bernoulli_field(rect, store, h)),
            Model::Majority(m) => m.field(rect, store, h),
            Model::Ising(m) => sample_window_store(rect, store, &m.params(h), m.t_max),
        }
    }

    /// [`Model::sample`] over an arbitrary realization, e.g. one with forced indices.
    pub fn sample_with(&self, rect: Rect, store: &dyn Realization, h: f64) -> Result<SpinField> {
        match self {
            Model::Bernoulli => Ok(bernoulli_field(rect, store, h)),
            Model::Majority(m) => m.field(rect, store, h),
            Model::Ising(m) => sample_window(rect, store, &m.params(h), m.t_max),
        }
    }

    /// A single spin, computed on its own. Agrees with [`Model::sample`].
    pub fn spin_at(&self, v: Vertex, store: &RealizationStore, h: f64) -> Result<Spin> {
        match self {
            Model::Bernoulli => Ok(BernoulliModel::spin_at(store, v, bernoulli_p(h))),
            Model::Majority(m) => m.sigma(v, store, h),
            Model::Ising(m) => {
                let params = IsingParams { beta: m.levels.beta, h };
                Ok(sample_window_store(Rect::single(v), store, &params, m.t_max)?.get(v))
            }
        }
    }

    /// Bracket for critical-point searches, in `h`.
    pub fn default_bracket(&self) -> (f64, f64) {
        match self {
            Model::Bernoulli => (logit_half(0.3), logit_half(0.9)),
            _ => (-1.0, 1.0),
        }
    }
}

/// Everything needed to rerun an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub beta: f64,
    pub h_grid: Vec<f64>,
    pub sizes: Vec<u32>,
    pub replicas: u64,
    pub seed: u64,
    pub t_max: u32,
    pub majority_threshold: u32,
    pub out_dir: Option<std::path::PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Bernoulli,
            beta: 0.3,
            h_grid: vec![0.0],
            sizes: vec![16],
            replicas: 1000,
            seed: 1,
            t_max: DEFAULT_T_MAX,
            majority_threshold: 5,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::InvalidParams("replicas must be ≥ 1".into()));
        }
        if self.h_grid.is_empty() || self.sizes.is_empty() {
            return Err(Error::InvalidParams("parameter grid and size list must be non-empty".into()));
        }
        if self.h_grid.iter().any(|h| !h.is_finite()) {
            return Err(Error::InvalidParams("h grid must be finite".into()));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<Model> {
        self.validate()?;
        Ok(match self.model {
            ModelKind::Bernoulli => Model::Bernoulli,
            ModelKind::Majority => Model::Majority(MajorityWindowModel::new(self.majority_threshold, 1 << 14)?),
            ModelKind::Ising => Model::Ising(IsingModel::new(self.beta, self.t_max)?),
        })
    }
}

/// One estimated quantity at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    /// What was estimated, e.g. `H`, `H*`, `V`.
    pub quantity: String,
    pub h: f64,
    /// Box `[0, n] × [0, m]` or window half-size, depending on the quantity.
    pub n: u32,
    pub m: u32,
    pub estimate: f64,
    pub std_error: f64,
    pub replicas: u64,
    pub wall_time_s: f64,
}

impl EstimateRow {
    /// Indicator estimate with binomial standard error `sqrt(p̂(1−p̂)/N)`.
    pub fn indicator(quantity: &str, h: f64, n: u32, m: u32, hits: u64, replicas: u64, started: Instant) -> Self {
        let p = hits as f64 / replicas as f64;
        EstimateRow {
            quantity: quantity.to_string(),
            h,
            n,
            m,
            estimate: p,
            std_error: (p * (1.0 - p) / replicas as f64).sqrt(),
            replicas,
            wall_time_s: started.elapsed().as_secs_f64(),
        }
    }

    pub fn wilson(&self) -> (f64, f64) {
        wilson_interval(self.estimate, self.replicas, Z95)
    }

    pub const CSV_HEADER: &'static str = "quantity,h,n,m,estimate,std_error,replicas,wall_time_s";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3}",
            self.quantity, self.h, self.n, self.m, self.estimate, self.std_error, self.replicas, self.wall_time_s
        )
    }
}

pub fn rows_csv(rows: &[EstimateRow]) -> String {
    let mut out = String::from(EstimateRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    out
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(p_hat: f64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if p_hat <= 0.0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if p_hat >= 1.0 { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Runs `f` for every replica id and returns the results in replica order.
pub fn run_replicas<T, F>(replicas: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..replicas).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z95_is_the_normal_quantile() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let q = Normal::standard().inverse_cdf(0.975);
        assert!((q - Z95).abs() < 1e-9);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0.0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.0370).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0.5, 10_000, Z95);
        assert!((lo - 0.4902).abs() < 1e-3 && (hi - 0.5098).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.replicas = 0;
        assert!(c.validate().is_err());
        let c = ExperimentConfig { h_grid: vec![], ..Default::default() };
        assert!(c.build_model().is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"model":"ising","beta":0.25}"#).unwrap();
        assert!(matches!(c.build_model().unwrap(), Model::Ising(_)));
    }

    #[test]
    fn spin_at_agrees_with_sample() {
        let store = RealizationStore::new(5, 9);
        let rect = Rect::new(-2, -2, 2, 2);
        for model in [Model::Bernoulli, Model::Majority(MajorityWindowModel::default()), Model::ising(0.3).unwrap()] {
            let f = model.sample(rect, &store, 0.1).unwrap();
            for v in rect.vertices() {
                assert_eq!(f.get(v), model.spin_at(v, &store, 0.1).unwrap(), "{}", model.name());
            }
        }
    }

    #[test]
    fn csv_layout() {
        let r = EstimateRow::indicator("H", 0.5, 8, 8, 3, 4, Instant::now());
        assert_eq!(r.estimate, 0.75);
        assert!((r.std_error - (0.75f64 * 0.25 / 4.0).sqrt()).abs() < 1e-15);
        let csv = rows_csv(&[r]);
        assert!(csv.starts_with("quantity,h,n,m,estimate,std_error,replicas,wall_time_s\nH,0.5,8,8,0.75,"));
    }
}
