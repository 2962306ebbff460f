//! Crossing probabilities, critical-point bisection and the related
//! diagnostics.

use super::{run_replicas, EstimateRow, Model};
use crate::clusters::{CrossingScratch, Direction};
use crate::error::{Error, Result};
use crate::field::{Spin, SpinField};
use crate::lattice::{Adjacency, Rect};
use crate::models::bernoulli_p;
use crate::representation::{logistic, logit_half, realize, IndexId, RealizationStore, SpaceTimeIndex};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// A crossing of a box by spin-`spin` vertices under `adj`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub dir: Direction,
    pub spin: Spin,
    pub adj: Adjacency,
}

impl CrossingEvent {
    /// Horizontal `+` crossing, ordinary adjacency.
    pub const H: CrossingEvent = CrossingEvent { dir: Direction::Horizontal, spin: Spin::Plus, adj: Adjacency::Ordinary };
    pub const V: CrossingEvent = CrossingEvent { dir: Direction::Vertical, spin: Spin::Plus, adj: Adjacency::Ordinary };
    /// Horizontal `+` crossing, star adjacency.
    pub const H_STAR: CrossingEvent = CrossingEvent { dir: Direction::Horizontal, spin: Spin::Plus, adj: Adjacency::Star };

    pub fn label(&self) -> String {
        let d = match self.dir {
            Direction::Horizontal => "H",
            Direction::Vertical => "V",
        };
        let star = if self.adj == Adjacency::Star { "*" } else { "" };
        format!("{d}{star}{}", self.spin)
    }

    pub fn occurs(&self, scratch: &mut CrossingScratch, field: &SpinField, rect: &Rect) -> Result<bool> {
        scratch.has_crossing(field, rect, self.dir, self.spin, self.adj)
    }
}

/// Samples the field on `rect`, audits duality on it and evaluates the event.
fn sample_and_test(model: &Model, rect: Rect, event: CrossingEvent, store: &RealizationStore, h: f64) -> Result<(SpinField, bool)> {
    let field = model.sample(rect, store, h)?;
    let mut scratch = CrossingScratch::default();
    scratch.duality_audit(&field, &rect)?;
    let hit = event.occurs(&mut scratch, &field, &rect)?;
    Ok((field, hit))
}

/// Estimate of `P^(h)(event)` on `rect`.
pub fn crossing_probability(model: &Model, rect: Rect, event: CrossingEvent, h: f64, replicas: u64, seed: u64) -> Result<EstimateRow> {
    let started = Instant::now();
    let hits = run_replicas(replicas, |r| {
        let store = RealizationStore::new(seed, r);
        sample_and_test(model, rect, event, &store, h).map(|x| x.1)
    })?;
    let count = hits.iter().filter(|&&b| b).count() as u64;
    Ok(EstimateRow::indicator(&event.label(), h, rect.width() as u32 - 1, rect.height() as u32 - 1, count, replicas, started))
}

/// Violation counts of the monotone coupling along an increasing `h` grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneAudit {
    pub level_checks: u64,
    pub level_violations: u64,
    pub spin_checks: u64,
    pub spin_violations: u64,
    pub event_checks: u64,
    pub event_violations: u64,
}

impl MonotoneAudit {
    pub fn violations(&self) -> u64 {
        self.level_violations + self.spin_violations + self.event_violations
    }

    fn merge(&mut self, o: &MonotoneAudit) {
        self.level_checks += o.level_checks;
        self.level_violations += o.level_violations;
        self.spin_checks += o.spin_checks;
        self.spin_violations += o.spin_violations;
        self.event_checks += o.event_checks;
        self.event_violations += o.event_violations;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingCurve {
    pub rows: Vec<EstimateRow>,
    pub audit: MonotoneAudit,
}

/// Underlying indices whose realized levels are compared across `h`.
fn audited_indices(model: &Model, rect: &Rect) -> Vec<IndexId> {
    match model {
        Model::Ising(_) => rect.vertices().flat_map(|v| [-1, -2].map(|t| IndexId::SpaceTime(SpaceTimeIndex::new(v, t)))).collect(),
        _ => rect.vertices().map(IndexId::Site).collect(),
    }
}

/// `P^(h)(event)` along `h_grid` with common random numbers. Every replica
/// is checked for monotonicity of levels, spins and the event indicator
/// along the sorted grid.
pub fn crossing_curve(model: &Model, rect: Rect, event: CrossingEvent, h_grid: &[f64], replicas: u64, seed: u64) -> Result<CrossingCurve> {
    if h_grid.is_empty() || replicas == 0 {
        return Err(Error::InvalidParams("need a non-empty grid and at least one replica".into()));
    }
    let started = Instant::now();
    let mut order: Vec<usize> = (0..h_grid.len()).collect();
    order.sort_by(|&a, &b| h_grid[a].total_cmp(&h_grid[b]));
    let indices = audited_indices(model, &rect);
    let family = model.finitary().family();
    let per_replica = run_replicas(replicas, |r| {
        let store = RealizationStore::new(seed, r);
        let mut hits = vec![false; h_grid.len()];
        let mut audit = MonotoneAudit::default();
        let mut prev: Option<(SpinField, bool, Vec<u32>)> = None;
        for &g in &order {
            let h = h_grid[g];
            let (field, hit) = sample_and_test(model, rect, event, &store, h)?;
            let levels: Vec<u32> = indices.iter().map(|&i| realize(&store, i, family, h)).collect();
            if let Some((pf, phit, plevels)) = &prev {
                audit.event_checks += 1;
                audit.event_violations += u64::from(*phit && !hit);
                audit.spin_checks += rect.len() as u64;
                audit.spin_violations += pf.spins().iter().zip(field.spins()).filter(|(a, b)| a > b).count() as u64;
                audit.level_checks += levels.len() as u64;
                audit.level_violations += plevels.iter().zip(&levels).filter(|(a, b)| a > b).count() as u64;
            }
            hits[g] = hit;
            prev = Some((field, hit, levels));
        }
        Ok((hits, audit))
    })?;
    let mut audit = MonotoneAudit::default();
    for (_, a) in &per_replica {
        audit.merge(a);
    }
    let rows = h_grid
        .iter()
        .enumerate()
        .map(|(g, &h)| {
            let count = per_replica.iter().filter(|(hits, _)| hits[g]).count() as u64;
            EstimateRow::indicator(&event.label(), h, rect.width() as u32 - 1, rect.height() as u32 - 1, count, replicas, started)
        })
        .collect();
    Ok(CrossingCurve { rows, audit })
}

/// The variable bisected by [`estimate_critical`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    H,
    /// `p = logistic(h)`, for the Bernoulli model.
    P,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub h_hat: f64,
    pub p_hat: Option<f64>,
    /// Final bracket in `h`.
    pub lo: f64,
    pub hi: f64,
    pub n: u32,
    pub target: f64,
    pub replicas: u64,
    pub scale: Scale,
    pub event: String,
    pub probes: Vec<EstimateRow>,
}

/// Bisection for the `h` where the crossing probability of the box
/// `[0, n]²` meets `target`. Probes share replica seeds, so the estimated
/// curve is monotone and the bisection is well defined.
#[allow(clippy::too_many_arguments)]
pub fn estimate_critical(
    model: &Model,
    n: u32,
    event: CrossingEvent,
    target: f64,
    tol: f64,
    replicas: u64,
    seed: u64,
    bracket: Option<(f64, f64)>,
    scale: Scale,
) -> Result<CriticalEstimate> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Precondition(format!("target {target} outside (0, 1)")));
    }
    let (h_lo, h_hi) = bracket.unwrap_or_else(|| model.default_bracket());
    if !(h_lo < h_hi) {
        return Err(Error::Precondition(format!("empty bracket [{h_lo}, {h_hi}]")));
    }
    let rect = Rect::box_nm(n, n);
    let to_h = |x: f64| match scale {
        Scale::H => x,
        Scale::P => logit_half(x),
    };
    let (mut lo, mut hi) = match scale {
        Scale::H => (h_lo, h_hi),
        Scale::P => (logistic(h_lo), logistic(h_hi)),
    };
    let mut probes = Vec::new();
    let probe = |x: f64, probes: &mut Vec<EstimateRow>| -> Result<f64> {
        let row = crossing_probability(model, rect, event, to_h(x), replicas, seed)?;
        let p = row.estimate;
        probes.push(row);
        Ok(p)
    };
    let p_lo = probe(lo, &mut probes)?;
    let p_hi = probe(hi, &mut probes)?;
    if !(p_lo < target && target < p_hi) {
        return Err(Error::BracketFailure { lo: h_lo, hi: h_hi, p_lo, p_hi, target });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut probes)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_hat = 0.5 * (lo + hi);
    Ok(CriticalEstimate {
        h_hat: to_h(x_hat),
        p_hat: (scale == Scale::P).then_some(x_hat),
        lo: to_h(lo),
        hi: to_h(hi),
        n,
        target,
        replicas,
        scale,
        event: event.label(),
        probes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub ordinary: CriticalEstimate,
    pub star: CriticalEstimate,
    /// `ĥ_c + ĥ*_c`.
    pub h_sum: f64,
    /// `p̂_c + p̂*_c` on the `p` scale.
    pub p_sum: Option<f64>,
    /// Standard errors of the two estimates by the delta method, from the
    /// local slope of each estimated curve.
    pub se_ordinary: f64,
    pub se_star: f64,
    /// `sqrt(se_ordinary² + se_star²)`, in the units of the reported sum.
    pub joint_se: f64,
    pub low_confidence: bool,
}

fn delta_se(model: &Model, est: &CriticalEstimate, event: CrossingEvent, half_width: f64, seed: u64) -> Result<f64> {
    let rect = Rect::box_nm(est.n, est.n);
    let (x_lo, x_hi) = match est.scale {
        Scale::H => (est.h_hat - half_width, est.h_hat + half_width),
        Scale::P => (est.p_hat.unwrap() - half_width, est.p_hat.unwrap() + half_width),
    };
    let to_h = |x: f64| if est.scale == Scale::P { logit_half(x) } else { x };
    let a = crossing_probability(model, rect, event, to_h(x_lo), est.replicas, seed)?;
    let b = crossing_probability(model, rect, event, to_h(x_hi), est.replicas, seed)?;
    let slope = (b.estimate - a.estimate) / (2.0 * half_width);
    let t = est.target;
    let se_p = (t * (1.0 - t) / est.replicas as f64).sqrt();
    Ok(if slope > 0.0 { se_p / slope } else { f64::INFINITY })
}

/// Estimates the critical points of `+` crossings with ordinary and with star
/// adjacency; for spin-flip symmetric models they sum to zero in `h`
/// (to one in `p`).
pub fn matching_relation_check(
    model: &Model,
    n: u32,
    tol: f64,
    replicas: u64,
    seed: u64,
    bracket: Option<(f64, f64)>,
    scale: Scale,
) -> Result<MatchingReport> {
    let ordinary = estimate_critical(model, n, CrossingEvent::H, 0.5, tol, replicas, seed, bracket, scale)?;
    let star_bracket = bracket.map(|(a, b)| (-b, -a)).or_else(|| {
        let (a, b) = model.default_bracket();
        Some((-b, -a))
    });
    let star = estimate_critical(model, n, CrossingEvent::H_STAR, 0.5, tol, replicas, seed, star_bracket, scale)?;
    let half_width = (4.0 * tol).max(0.02);
    let se_ordinary = delta_se(model, &ordinary, CrossingEvent::H, half_width, seed)?;
    let se_star = delta_se(model, &star, CrossingEvent::H_STAR, half_width, seed)?;
    let joint_se = se_ordinary.hypot(se_star);
    let p_sum = ordinary.p_hat.zip(star.p_hat).map(|(a, b)| a + b);
    Ok(MatchingReport {
        h_sum: ordinary.h_hat + star.h_hat,
        p_sum,
        se_ordinary,
        se_star,
        joint_se,
        low_confidence: n < 8 || !(joint_se < 0.05),
        ordinary,
        star,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RswRow {
    pub rho: f64,
    pub n: u32,
    pub width: u32,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RswTrend {
    TowardZero,
    TowardOne,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RswReport {
    pub h: f64,
    pub rows: Vec<RswRow>,
    /// Direction shared by every aspect ratio between the smallest and largest `n`.
    pub trend: RswTrend,
}

/// `P̂(H(⌈ρn⌉, n))` for every `(ρ, n)`.
pub fn rsw_scan(model: &Model, h: f64, rhos: &[f64], ns: &[u32], replicas: u64, seed: u64) -> Result<RswReport> {
    if rhos.iter().any(|&r| !(r > 0.0)) || rhos.is_empty() || ns.is_empty() {
        return Err(Error::InvalidParams("need positive aspect ratios and a non-empty size list".into()));
    }
    let mut rows = Vec::new();
    for &rho in rhos {
        for &n in ns {
            let width = (rho * n as f64).ceil() as u32;
            let est = crossing_probability(model, Rect::box_nm(width, n), CrossingEvent::H, h, replicas, seed)?;
            rows.push(RswRow { rho, n, width, estimate: est.estimate, std_error: est.std_error });
        }
    }
    let (n_min, n_max) = (*ns.iter().min().unwrap(), *ns.iter().max().unwrap());
    let mut dirs = rhos.iter().map(|&rho| {
        let at = |n| rows.iter().find(|r| r.rho == rho && r.n == n).unwrap().estimate;
        (at(n_max) - at(n_min)).signum()
    });
    let first = dirs.next().unwrap();
    let trend = if n_min == n_max || !dirs.all(|d| d == first) || first == 0.0 {
        RswTrend::Mixed
    } else if first < 0.0 {
        RswTrend::TowardZero
    } else {
        RswTrend::TowardOne
    };
    Ok(RswReport { h, rows, trend })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSizeReport {
    /// `P̂(V(3N, N))`.
    pub crossing: EstimateRow,
    pub eps_hat: f64,
    pub fires: bool,
    pub tail: Option<super::ClusterTailReport>,
}

/// Settings of the corroborating tail run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    pub window_half: u32,
    pub replicas: u64,
    pub fit_range: (u64, u64),
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { window_half: 50, replicas: 20_000, fit_range: (5, 25) }
    }
}

/// If `P̂(V(3N, N)) < eps_hat`, the `+` cluster tail is expected to be
/// exponential; the tail run is attached as evidence.
pub fn finite_size_check(
    model: &Model,
    h: f64,
    big_n: u32,
    eps_hat: f64,
    replicas: u64,
    seed: u64,
    tail: TailOptions,
) -> Result<FiniteSizeReport> {
    if big_n == 0 {
        return Err(Error::Precondition("N must be ≥ 1".into()));
    }
    let crossing = crossing_probability(model, Rect::box_nm(3 * big_n, big_n), CrossingEvent::V, h, replicas, seed)?;
    let fires = crossing.estimate < eps_hat;
    let tail = if fires {
        Some(super::cluster_tail_experiment(
            model,
            h,
            tail.window_half,
            tail.replicas,
            tail.fit_range,
            seed,
            &[super::ClusterKind::PlusOrdinary],
        )?)
    } else {
        None
    };
    Ok(FiniteSizeReport { crossing, eps_hat, fires, tail })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociationReport {
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
    pub covariance: f64,
    pub std_error: f64,
    /// `P̂(A∩B) ≥ P̂(A)P̂(B) − 3·SE`.
    pub consistent: bool,
}

/// Horizontal `+` crossings of the stacked boxes `[0,n]×[0,n]` and
/// `[0,n]×[n+1, 2n+1]`, two increasing events on disjoint sets.
pub fn positive_association_check(model: &Model, h: f64, n: u32, replicas: u64, seed: u64) -> Result<AssociationReport> {
    let window = Rect::box_nm(n, 2 * n + 1);
    let a_rect = Rect::box_nm(n, n);
    let b_rect = a_rect.translate(0, n as i32 + 1);
    let pairs = run_replicas(replicas, |r| {
        let store = RealizationStore::new(seed, r);
        let field = model.sample(window, &store, h)?;
        let mut s = CrossingScratch::default();
        s.duality_audit(&field, &window)?;
        Ok((CrossingEvent::H.occurs(&mut s, &field, &a_rect)?, CrossingEvent::H.occurs(&mut s, &field, &b_rect)?))
    })?;
    Ok(covariance_report(&pairs))
}

pub(crate) fn covariance_report(pairs: &[(bool, bool)]) -> AssociationReport {
    let n = pairs.len() as f64;
    let pa = pairs.iter().filter(|p| p.0).count() as f64 / n;
    let pb = pairs.iter().filter(|p| p.1).count() as f64 / n;
    let pab = pairs.iter().filter(|p| p.0 && p.1).count() as f64 / n;
    let cov = pab - pa * pb;
    let var = pairs
        .iter()
        .map(|&(a, b)| {
            let x = (a as u8 as f64 - pa) * (b as u8 as f64 - pb) - cov;
            x * x
        })
        .sum::<f64>()
        / n;
    let se = (var / n).sqrt();
    AssociationReport { p_a: pa, p_b: pb, p_ab: pab, covariance: cov, std_error: se, consistent: cov >= -3.0 * se }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub fields: u64,
    pub violations: u64,
    pub horizontal_plus: u64,
}

/// Audits duality on `replicas` sampled fields over `rect`, counting violations.
pub fn duality_audit_run(model: &Model, rect: Rect, h: f64, replicas: u64, seed: u64) -> Result<AuditSummary> {
    let results = run_replicas(replicas, |r| {
        let store = RealizationStore::new(seed, r);
        let field = model.sample(rect, &store, h)?;
        match CrossingScratch::default().duality_audit(&field, &rect) {
            Ok(rep) => Ok((false, rep.h)),
            Err(Error::DualityViolation { .. }) => Ok((true, false)),
            Err(e) => Err(e),
        }
    })?;
    Ok(AuditSummary {
        fields: replicas,
        violations: results.iter().filter(|r| r.0).count() as u64,
        horizontal_plus: results.iter().filter(|r| r.1).count() as u64,
    })
}

/// Intervals `[lo, hi]` of two estimates do not overlap.
pub fn separated(a: &EstimateRow, b: &EstimateRow) -> bool {
    let (alo, ahi) = a.wilson();
    let (blo, bhi) = b.wilson();
    ahi < blo || bhi < alo
}

/// Bernoulli success probability at the estimate, for reports.
pub fn p_of(h: f64) -> f64 {
    bernoulli_p(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::MajorityWindowModel;

    #[test]
    fn curve_extremes_and_monotone() {
        let grid = [-30.0, -0.2, 0.0, 0.4, 0.2, 30.0];
        for model in [Model::Bernoulli, Model::Majority(MajorityWindowModel::default()), Model::ising(0.3).unwrap()] {
            let c = crossing_curve(&model, Rect::box_nm(8, 8), CrossingEvent::H, &grid, 40, 3).unwrap();
            assert_eq!(c.rows[0].estimate, 0.0);
            assert_eq!(c.rows[5].estimate, 1.0);
            assert_eq!(c.audit.violations(), 0, "{}", model.name());
            assert!(c.audit.event_checks == 40 * 5 && c.audit.level_checks > 0);
            assert!(c.rows[1].estimate <= c.rows[2].estimate && c.rows[2].estimate <= c.rows[4].estimate);
        }
    }

    #[test]
    fn critical_bracket_and_precondition() {
        let flat = Model::ising(0.0).unwrap();
        let r = estimate_critical(&flat, 8, CrossingEvent::H, 0.5, 0.05, 50, 1, None, Scale::H);
        assert!(matches!(r, Err(Error::BracketFailure { .. })));
        let r = estimate_critical(&Model::Bernoulli, 8, CrossingEvent::H, 0.5, 0.0, 50, 1, None, Scale::P);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn critical_bernoulli_small() {
        let e = estimate_critical(&Model::Bernoulli, 16, CrossingEvent::H, 0.5, 0.01, 400, 2, None, Scale::P).unwrap();
        assert!(e.lo <= e.h_hat && e.h_hat <= e.hi);
        let p = e.p_hat.unwrap();
        assert!(p > 0.5 && p < 0.7, "{p}");
        assert!((p_of(e.h_hat) - p).abs() < 1e-12);
    }

    #[test]
    fn matching_degenerate_box_is_low_confidence() {
        let r = matching_relation_check(&Model::Bernoulli, 2, 0.02, 200, 4, None, Scale::P).unwrap();
        assert!(r.low_confidence);
    }

    #[test]
    fn rsw_extremes() {
        let hi = rsw_scan(&Model::Bernoulli, logit_half(0.9), &[0.5, 1.0, 2.0], &[4, 8], 200, 1).unwrap();
        assert!(hi.rows.iter().all(|r| r.estimate > 0.8));
        let lo = rsw_scan(&Model::Bernoulli, logit_half(0.1), &[0.5, 1.0, 2.0], &[4, 8], 200, 1).unwrap();
        assert!(lo.rows.iter().all(|r| r.estimate < 0.05));
        let curve = crossing_curve(&Model::Bernoulli, Rect::box_nm(8, 8), CrossingEvent::H, &[logit_half(0.9)], 200, 1).unwrap();
        let square = hi.rows.iter().find(|r| r.rho == 1.0 && r.n == 8).unwrap();
        assert_eq!(square.estimate, curve.rows[0].estimate);
    }

    #[test]
    fn finite_size_cases() {
        let sub = finite_size_check(
            &Model::Bernoulli,
            logit_half(0.2),
            16,
            0.01,
            500,
            1,
            TailOptions { window_half: 40, replicas: 20_000, fit_range: (2, 12) },
        )
        .unwrap();
        assert!(sub.fires);
        let fit = sub.tail.unwrap().sides[0].fit.unwrap();
        assert!(fit.lambda > 0.0);
        let sup = finite_size_check(&Model::Bernoulli, logit_half(0.9), 16, 0.01, 200, 1, TailOptions::default()).unwrap();
        assert!(!sup.fires && sup.tail.is_none());
        let never = finite_size_check(&Model::Bernoulli, logit_half(0.2), 4, 0.0, 200, 1, TailOptions::default()).unwrap();
        assert!(!never.fires);
    }

    #[test]
    fn association_smoke() {
        let r = positive_association_check(&Model::Bernoulli, logit_half(0.6), 8, 2000, 3).unwrap();
        assert!(r.consistent);
        let r = positive_association_check(&Model::ising(0.3).unwrap(), 0.0, 6, 300, 3).unwrap();
        assert!(r.consistent);
    }

    #[test]
    fn audit_run_counts() {
        let s = duality_audit_run(&Model::Bernoulli, Rect::box_nm(15, 15), 0.0, 500, 9).unwrap();
        assert_eq!((s.fields, s.violations), (500, 0));
    }
}
