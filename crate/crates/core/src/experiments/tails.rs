//! Tail experiments: origin cluster sizes and CFTP coalescence times.

use super::{run_replicas, Model};
use crate::clusters::{explore_cluster, fit_exponential_tail, TailFit};
use crate::error::{Error, Result};
use crate::field::Spin;
use crate::ising::{cftp_vertex_with, CoupledStore, IsingParams};
use crate::lattice::{Adjacency, Rect, Vertex};
use crate::models::bernoulli_p;
use crate::representation::{IndexId, Realization, RealizationStore};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterKind {
    /// `C⁺`: plus cluster, ordinary adjacency.
    PlusOrdinary,
    /// `C^{−*}`: minus cluster, star adjacency.
    MinusStar,
}

impl ClusterKind {
    fn spin(self) -> Spin {
        match self {
            ClusterKind::PlusOrdinary => Spin::Plus,
            ClusterKind::MinusStar => Spin::Minus,
        }
    }

    fn adjacency(self) -> Adjacency {
        match self {
            ClusterKind::PlusOrdinary => Adjacency::Ordinary,
            ClusterKind::MinusStar => Adjacency::Star,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSide {
    pub kind: ClusterKind,
    /// Origin cluster size → count over untruncated replicas (size 0 when the
    /// origin has the other spin).
    pub hist: BTreeMap<u64, u64>,
    /// Replicas whose cluster reached the window border, discarded.
    pub truncated: u64,
    pub fit: Option<TailFit>,
    pub fit_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterTailReport {
    pub h: f64,
    pub window_half: u32,
    pub replicas: u64,
    pub fit_range: (u64, u64),
    pub sides: Vec<TailSide>,
}

impl ClusterTailReport {
    pub fn side(&self, kind: ClusterKind) -> Option<&TailSide> {
        self.sides.iter().find(|s| s.kind == kind)
    }
}

/// Spins read on demand, each computed once per replica.
struct LazyField<'a> {
    model: &'a Model,
    store: RealizationStore,
    h: f64,
    p: f64,
    cache: HashMap<Vertex, Spin>,
}

impl LazyField<'_> {
    fn spin(&mut self, v: Vertex) -> Result<Spin> {
        match self.model {
            Model::Bernoulli => Ok(Spin::from_bool(self.store.uniform(IndexId::Site(v)) < self.p)),
            _ => {
                if let Some(&s) = self.cache.get(&v) {
                    return Ok(s);
                }
                let s = self.model.spin_at(v, &self.store, self.h)?;
                self.cache.insert(v, s);
                Ok(s)
            }
        }
    }
}

/// Histograms of the origin cluster sizes in the window `[-w, w]²` and
/// exponential fits of their survival functions over `fit_range`.
///
/// Clusters are explored lazily from the origin, so only the spins they
/// touch are sampled. With `w ≥ s_max` no cluster of size at most `s_max`
/// can reach the border, so truncation only removes sizes beyond the fit
/// range; it biases the tail down, never up.
pub fn cluster_tail_experiment(
    model: &Model,
    h: f64,
    window_half: u32,
    replicas: u64,
    fit_range: (u64, u64),
    seed: u64,
    kinds: &[ClusterKind],
) -> Result<ClusterTailReport> {
    if fit_range.0 > fit_range.1 || fit_range.0 == 0 {
        return Err(Error::InvalidParams(format!("bad fit range {fit_range:?}")));
    }
    if (window_half as u64) < fit_range.1 {
        return Err(Error::Precondition(format!("window half-size {window_half} below the top of the fit range {}", fit_range.1)));
    }
    let window = Rect::centered(window_half);
    let samples = run_replicas(replicas, |r| {
        let mut lazy = LazyField { model, store: RealizationStore::new(seed, r), h, p: bernoulli_p(h), cache: HashMap::new() };
        kinds
            .iter()
            .map(|k| explore_cluster(Vertex::ORIGIN, k.spin(), k.adjacency(), &window, usize::MAX, |w| lazy.spin(w)))
            .collect::<Result<Vec<_>>>()
    })?;
    let sides = kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let mut hist = BTreeMap::new();
            let mut truncated = 0;
            for s in &samples {
                if s[i].truncated {
                    truncated += 1;
                } else {
                    *hist.entry(s[i].size as u64).or_insert(0) += 1;
                }
            }
            let (fit, fit_error) = match fit_exponential_tail(&hist, fit_range) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            TailSide { kind, hist, truncated, fit, fit_error }
        })
        .collect();
    Ok(ClusterTailReport { h, window_half, replicas, fit_range, sides })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub beta: f64,
    pub h: f64,
    pub samples: u64,
    /// `|τ|` → count.
    pub hist: BTreeMap<u64, u64>,
    pub fit: Option<TailFit>,
    pub fit_error: Option<String>,
    /// Replicas whose rerun gave a different `(spin, τ)`.
    pub rerun_mismatches: u64,
    pub plus_fraction: f64,
}

/// Largest `s` with at least `min_count` samples at or above it.
pub fn survival_cutoff(hist: &BTreeMap<u64, u64>, min_count: u64) -> u64 {
    let mut above = 0;
    for (&s, &c) in hist.iter().rev() {
        above += c;
        if above >= min_count {
            return s;
        }
    }
    0
}

/// Coalescence times of single-vertex CFTP at the origin. Each sample is
/// rerun from scratch to confirm it is a deterministic function of its seed.
/// The fit range defaults to `[1, s]` with `s` the largest `|τ|` that at
/// least 20 samples reach.
pub fn tau_tail(beta: f64, h: f64, samples: u64, seed: u64, t_max: u32, fit_range: Option<(u64, u64)>) -> Result<TauReport> {
    let params = IsingParams::new(beta, h)?;
    let results = run_replicas(samples, |r| {
        let store = RealizationStore::new(seed, r);
        let a = cftp_vertex_with(Vertex::ORIGIN, &CoupledStore(&store), &params, t_max)?;
        let again = RealizationStore::new(seed, r);
        let b = cftp_vertex_with(Vertex::ORIGIN, &CoupledStore(&again), &params, t_max)?;
        Ok((a.spin, a.tau, (a.spin, a.tau) != (b.spin, b.tau)))
    })?;
    let mut hist = BTreeMap::new();
    for &(_, tau, _) in &results {
        *hist.entry(tau.unsigned_abs() as u64).or_insert(0) += 1;
    }
    let range = fit_range.unwrap_or((1, survival_cutoff(&hist, 20)));
    let (fit, fit_error) = match fit_exponential_tail(&hist, range) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(TauReport {
        beta,
        h,
        samples,
        hist,
        fit,
        fit_error,
        rerun_mismatches: results.iter().filter(|r| r.2).count() as u64,
        plus_fraction: results.iter().filter(|r| r.0.is_plus()).count() as f64 / samples as f64,
    })
}
