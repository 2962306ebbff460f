//! Influence scans, the single-site conditional (DLR) check and mixing
//! diagnostics.

use super::crossing::covariance_report;
use super::{run_replicas, wilson_interval, CrossingEvent, EstimateRow, Model, Z95};
use crate::clusters::{has_crossing, label_clusters, CrossingScratch, Direction};
use crate::error::{Error, Result};
use crate::field::{Spin, SpinField};
use crate::ising::{finite_box_gibbs_with, heat_bath_prob, sample_window_store, BoundaryCondition, CoupledStore, IsingParams};
use crate::lattice::{neighbors, Adjacency, Rect, Vertex};
use crate::representation::{IndexId, Overlay, RealizationStore, SpaceTimeIndex, U_BOTTOM};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Which underlying indices an influence scan visits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum IndexSample {
    /// Every site of the box. For the Bernoulli model all pivotal indices
    /// are found in one pass per replica.
    BoxSites,
    Explicit(Vec<IndexId>),
}

impl IndexSample {
    /// Box sites for Bernoulli; for the Ising model, space-time indices with
    /// `|t| ≤ depth` on the sublattice of spacing `step`; for the majority
    /// model, sites on that sublattice.
    pub fn default_for(model: &Model, rect: &Rect, step: u32, depth: u32) -> IndexSample {
        let step = step.max(1) as usize;
        let coarse = rect.vertices().filter(|v| (v.x - rect.x0) as usize % step == 0 && (v.y - rect.y0) as usize % step == 0);
        match model {
            Model::Bernoulli => IndexSample::BoxSites,
            Model::Majority(_) => IndexSample::Explicit(coarse.map(IndexId::Site).collect()),
            Model::Ising(_) => IndexSample::Explicit(
                coarse.flat_map(|v| (1..=depth as i32).map(move |t| IndexId::SpaceTime(SpaceTimeIndex::new(v, -t)))).collect(),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceRow {
    pub index: IndexId,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceScan {
    pub n: u32,
    pub h: f64,
    /// `P̂(H(3n, n))`.
    pub event: EstimateRow,
    pub rows: Vec<InfluenceRow>,
    /// The largest row, as an indicator estimate.
    pub max: EstimateRow,
    pub max_index: Option<IndexId>,
    /// Replicas where forcing an index to 0 created the crossing.
    pub creation_violations: u64,
}

/// Plus sites whose removal destroys the horizontal `+` crossing of `rect`:
/// exactly those whose star neighbourhood of `-*` clusters, together with
/// the site itself, joins the bottom and top rows. Empty when the crossing
/// does not occur.
pub fn pivotal_sites(field: &SpinField, rect: &Rect) -> Result<Vec<Vertex>> {
    let sub = field.restrict(rect)?;
    if !has_crossing(&sub, rect, Direction::Horizontal, Spin::Plus, Adjacency::Ordinary)? {
        return Ok(Vec::new());
    }
    let lab = label_clusters(&sub, Spin::Minus, Adjacency::Star);
    let mut bottom = vec![false; lab.component_count()];
    let mut top = vec![false; lab.component_count()];
    for x in rect.x0..=rect.x1 {
        if let Some(id) = lab.id_at(Vertex::new(x, rect.y0)) {
            bottom[id as usize] = true;
        }
        if let Some(id) = lab.id_at(Vertex::new(x, rect.y1)) {
            top[id as usize] = true;
        }
    }
    let mut out = Vec::new();
    for v in rect.vertices() {
        if sub.get(v) != Spin::Plus {
            continue;
        }
        let (mut b, mut t) = (v.y == rect.y0, v.y == rect.y1);
        for w in neighbors(v, Adjacency::Star) {
            if let Some(id) = lab.id_at(w) {
                b |= bottom[id as usize];
                t |= top[id as usize];
            }
        }
        if b && t {
            out.push(v);
        }
    }
    Ok(out)
}

/// Estimates `P((H(3n, n))_j)`: the crossing of `[0, 3n] × [0, n]` occurs
/// but fails once index `j` is forced to level 0.
pub fn influence_scan(model: &Model, n: u32, h: f64, sample: &IndexSample, replicas: u64, seed: u64) -> Result<InfluenceScan> {
    if n == 0 || replicas == 0 {
        return Err(Error::InvalidParams("need n ≥ 1 and at least one replica".into()));
    }
    let started = Instant::now();
    let rect = Rect::box_nm(3 * n, n);
    let indices: Vec<IndexId> = match sample {
        IndexSample::BoxSites => rect.vertices().map(IndexId::Site).collect(),
        IndexSample::Explicit(v) => v.clone(),
    };
    let fast = matches!((model, sample), (Model::Bernoulli, IndexSample::BoxSites));
    let per_replica = run_replicas(replicas, |r| {
        let store = RealizationStore::new(seed, r);
        let field = model.sample(rect, &store, h)?;
        let mut scratch = CrossingScratch::default();
        scratch.duality_audit(&field, &rect)?;
        let hit = CrossingEvent::H.occurs(&mut scratch, &field, &rect)?;
        let mut piv = Vec::new();
        let mut created = false;
        if fast {
            if hit {
                piv = pivotal_sites(&field, &rect)?.into_iter().map(|v| rect.index_of(v).unwrap()).collect();
            }
        } else {
            for (k, &j) in indices.iter().enumerate() {
                let forced = Overlay::new(&store).with(j, U_BOTTOM);
                let f2 = model.sample_with(rect, &forced, h)?;
                let hit2 = CrossingEvent::H.occurs(&mut scratch, &f2, &rect)?;
                if hit && !hit2 {
                    piv.push(k);
                }
                created |= !hit && hit2;
            }
        }
        Ok((hit, piv, created))
    })?;
    let mut counts = vec![0u64; indices.len()];
    for (_, piv, _) in &per_replica {
        for &k in piv {
            counts[k] += 1;
        }
    }
    let rows: Vec<InfluenceRow> = indices
        .iter()
        .zip(&counts)
        .map(|(&index, &c)| {
            let p = c as f64 / replicas as f64;
            InfluenceRow { index, estimate: p, std_error: (p * (1.0 - p) / replicas as f64).sqrt() }
        })
        .collect();
    let (max_k, max_c) =
        counts.iter().enumerate().max_by_key(|&(k, &c)| (c, std::cmp::Reverse(k))).map(|(k, &c)| (Some(k), c)).unwrap_or((None, 0));
    let hits = per_replica.iter().filter(|r| r.0).count() as u64;
    Ok(InfluenceScan {
        n,
        h,
        event: EstimateRow::indicator("H", h, 3 * n, n, hits, replicas, started),
        rows,
        max: EstimateRow::indicator("max_j P(H_j)", h, 3 * n, n, max_c, replicas, started),
        max_index: max_k.map(|k| indices[k]),
        creation_violations: per_replica.iter().filter(|r| r.2).count() as u64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlrBin {
    /// Number of plus neighbours.
    pub m: u32,
    pub occurrences: u64,
    pub plus: u64,
    /// `q^(m)(+1)`.
    pub expected: f64,
    pub empirical: f64,
    pub z: Option<f64>,
    pub tested: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlrReport {
    pub beta: f64,
    pub h: f64,
    pub samples: u64,
    pub window: Rect,
    pub observed_per_sample: usize,
    pub bins: Vec<DlrBin>,
    pub max_abs_z: f64,
}

/// Bins with fewer occurrences are reported as untested.
pub const DLR_MIN_OCCURRENCES: u64 = 200;

/// Compares the empirical frequency of `σ_v = +1` given `m` plus neighbours
/// with `q^(m)(+1)`.
///
/// Observed vertices are the interior vertices of the window's center
/// parity. Given the spins of the other parity they are independent, each
/// with its single-site conditional law, so every bin count is exactly
/// binomial and its z-score is standard normal under the model.
pub fn dlr_check(beta: f64, h: f64, window: Rect, samples: u64, seed: u64, t_max: u32) -> Result<DlrReport> {
    if window.width() < 3 || window.height() < 3 {
        return Err(Error::Precondition(format!("window {window} has no interior vertex")));
    }
    let params = IsingParams::new(beta, h)?;
    let center = Vertex::new((window.x0 + window.x1).div_euclid(2), (window.y0 + window.y1).div_euclid(2));
    let interior = Rect::new(window.x0 + 1, window.y0 + 1, window.x1 - 1, window.y1 - 1);
    let observed: Vec<Vertex> = interior.vertices().filter(|v| v.parity() == center.parity()).collect();
    let per_sample = run_replicas(samples, |r| {
        let store = RealizationStore::new(seed, r);
        let f = sample_window_store(window, &store, &params, t_max)?;
        let mut occ = [0u64; 5];
        let mut plus = [0u64; 5];
        for &v in &observed {
            let m = neighbors(v, Adjacency::Ordinary).into_iter().filter(|&w| f.get(w).is_plus()).count();
            occ[m] += 1;
            plus[m] += u64::from(f.get(v).is_plus());
        }
        Ok((occ, plus))
    })?;
    let mut bins = Vec::new();
    for m in 0..5usize {
        let occurrences: u64 = per_sample.iter().map(|s| s.0[m]).sum();
        let plus: u64 = per_sample.iter().map(|s| s.1[m]).sum();
        let q = heat_bath_prob(m as u32, Spin::Plus, &params)?;
        let tested = occurrences >= DLR_MIN_OCCURRENCES;
        let z = tested.then(|| {
            let n = occurrences as f64;
            (plus as f64 - n * q) / (n * q * (1.0 - q)).sqrt()
        });
        let empirical = if occurrences > 0 { plus as f64 / occurrences as f64 } else { f64::NAN };
        bins.push(DlrBin { m: m as u32, occurrences, plus, expected: q, empirical, z, tested });
    }
    let max_abs_z = bins.iter().filter_map(|b| b.z).map(f64::abs).fold(0.0, f64::max);
    Ok(DlrReport { beta, h, samples, window, observed_per_sample: observed.len(), bins, max_abs_z })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMixingRow {
    pub n: u32,
    /// `P̂(σ_0 = + | + boundary) − P̂(σ_0 = + | − boundary)` on `[-n, n]²`.
    pub delta: f64,
    pub std_error: f64,
    /// 95% Wilson interval.
    pub ci: (f64, f64),
    pub replicas: u64,
    /// Replicas with the `−` boundary sample above the `+` one at the origin.
    pub order_violations: u64,
}

/// Boundary influence at the origin. Both boundary conditions read the same
/// space-time randomness, so the per-replica difference is 0 or 1 and `Δ̂`
/// is a binomial proportion.
pub fn mixing_boundary(beta: f64, h: f64, ns: &[u32], replicas: u64, seed: u64, t_max: u32) -> Result<Vec<BoundaryMixingRow>> {
    let params = IsingParams::new(beta, h)?;
    ns.iter()
        .map(|&n| {
            let rect = Rect::centered(n);
            let diffs = run_replicas(replicas, |r| {
                let store = RealizationStore::new(seed, r);
                let src = CoupledStore(&store);
                let plus = finite_box_gibbs_with(rect, &BoundaryCondition::AllPlus, &src, &params, t_max)?.0;
                let minus = finite_box_gibbs_with(rect, &BoundaryCondition::AllMinus, &src, &params, t_max)?.0;
                Ok((plus.get(Vertex::ORIGIN), minus.get(Vertex::ORIGIN)))
            })?;
            let ones = diffs.iter().filter(|(p, m)| p.is_plus() && !m.is_plus()).count() as u64;
            let violations = diffs.iter().filter(|(p, m)| !p.is_plus() && m.is_plus()).count() as u64;
            let d = ones as f64 / replicas as f64;
            Ok(BoundaryMixingRow {
                n,
                delta: d,
                std_error: (d * (1.0 - d) / replicas as f64).sqrt(),
                ci: wilson_interval(d, replicas, Z95),
                replicas,
                order_violations: violations,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventPairRow {
    /// L1 distance between the two boxes; 0 means the same box.
    pub distance: u32,
    pub p_a: f64,
    pub p_b: f64,
    pub covariance: f64,
    pub std_error: f64,
    /// `false` at distance 0, where the covariance is `P(1−P)` by construction.
    pub compared: bool,
    /// `|cov| < 3·SE`, when compared.
    pub below_3se: Option<bool>,
}

/// Covariance of horizontal `+` crossings of two `size × size` boxes side by
/// side at the given distances.
pub fn mixing_event_pair(model: &Model, h: f64, size: u32, distances: &[u32], replicas: u64, seed: u64) -> Result<Vec<EventPairRow>> {
    if size < 1 {
        return Err(Error::InvalidParams("box size must be ≥ 1".into()));
    }
    let a = Rect::box_nm(size - 1, size - 1);
    distances
        .iter()
        .map(|&k| {
            let b = if k == 0 { a } else { a.translate((size - 1 + k) as i32, 0) };
            let window = Rect::new(a.x0, a.y0, b.x1, b.y1);
            let pairs = run_replicas(replicas, |r| {
                let store = RealizationStore::new(seed, r);
                let f = model.sample(window, &store, h)?;
                let mut s = CrossingScratch::default();
                s.duality_audit(&f, &a)?;
                Ok((CrossingEvent::H.occurs(&mut s, &f, &a)?, CrossingEvent::H.occurs(&mut s, &f, &b)?))
            })?;
            let rep = covariance_report(&pairs);
            let compared = k > 0;
            Ok(EventPairRow {
                distance: k,
                p_a: rep.p_a,
                p_b: rep.p_b,
                covariance: rep.covariance,
                std_error: rep.std_error,
                compared,
                below_3se: compared.then(|| rep.covariance.abs() < 3.0 * rep.std_error),
            })
        })
        .collect()
}
