//! Ising model through monotone parity dynamics driven by i.i.d. space-time
//! variables, sampled exactly by coupling from the past.
//!
//! Time runs over negative integers. The step at time `t` updates the
//! vertices whose parity equals that of `t`, producing the configuration at
//! `t + 1`; the other parity is copied. Vertex `v` at time `t` draws
//! `Y'_v(t) ∈ {0..5}` with `P(Y' ≥ m) = q^(5-m)(+1)` and becomes `+1` iff
//! `(#minus neighbours) + 1 ≤ Y'`. With `U` the deviate behind `(v, t)` this
//! is the single comparison `U < q^(m)(+1)`, `m` the number of plus
//! neighbours, and `P(+1 | m) = q^(m)(+1)` exactly.
//!
//! The shifted support `Y' = Y + 1` keeps `P(Y' ≥ 0) = 1`; with the unshifted
//! `Y ∈ {0..4}` the tail at 0 would be `q^(4)(+1) < 1`.

use crate::error::{Error, Result};
use crate::field::{FieldTag, Spin, SpinField};
use crate::lattice::{boundary, Parity, Rect, Vertex};
use crate::representation::{
    logistic, FinitaryModel, IndexId, LevelDistribution, Realization, RealizationStore, RepresentationProfile, SpaceTimeIndex, U_BOTTOM,
    U_TOP,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Courtesy threshold, just above the square-lattice critical inverse temperature.
pub const BETA_WARN: f64 = 0.44;

pub const DEFAULT_T_MAX: u32 = 1 << 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub beta: f64,
    pub h: f64,
}

impl IsingParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() || !h.is_finite() {
            return Err(Error::InvalidParams(format!("need finite beta ≥ 0 and finite h, got beta={beta}, h={h}")));
        }
        if beta >= BETA_WARN {
            log::warn!("beta = {beta} is not below the critical point; CFTP may not coalesce");
        }
        Ok(IsingParams { beta, h })
    }

    /// `q^(m)(+1)` for `m = 0..=4`.
    pub fn plus_probs(&self) -> [f64; 5] {
        std::array::from_fn(|m| q_plus(m as u32, self))
    }
}

#[inline]
fn q_plus(m: u32, p: &IsingParams) -> f64 {
    let s = 2.0 * m as f64 - 4.0;
    logistic(p.beta * (p.h + s))
}

/// `q^(m)(η; β, h)`: single-site conditional probability of `σ_v = η` given
/// `m` plus neighbours.
pub fn heat_bath_prob(m: u32, eta: Spin, params: &IsingParams) -> Result<f64> {
    if m > 4 {
        return Err(Error::InvalidParams(format!("neighbour count {m} outside 0..=4")));
    }
    let s = 2.0 * m as f64 - 4.0;
    Ok(logistic(params.beta * eta.value() as f64 * (params.h + s)))
}

/// Law of the shifted update variable `Y' ∈ {0..5}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YDistribution {
    /// `tail[m] = P(Y' ≥ m)`, `m = 0..=6`.
    pub tail: [f64; 7],
    pub pmf: [f64; 6],
}

impl YDistribution {
    /// A deviate realizing level `y`, for tests and hand-built cases.
    pub fn uniform_for(&self, y: usize) -> f64 {
        0.5 * (self.tail[y] + self.tail[y + 1])
    }

    pub fn level_of(&self, u: f64) -> usize {
        (1..=5).take_while(|&m| u < self.tail[m]).count()
    }
}

pub fn y_pmf(params: &IsingParams) -> Result<YDistribution> {
    let mut tail = [0.0; 7];
    tail[0] = 1.0;
    for (m, t) in tail.iter_mut().enumerate().take(6).skip(1) {
        *t = q_plus(5 - m as u32, params);
    }
    for m in 0..6 {
        if tail[m + 1] > tail[m] {
            return Err(Error::NonMonotoneTails { level: m + 1 });
        }
    }
    let pmf = std::array::from_fn(|m| tail[m] - tail[m + 1]);
    Ok(YDistribution { tail, pmf })
}

/// The `k = 5` level family of the update variables at fixed `β`, with `h`
/// the external field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingLevels {
    pub beta: f64,
}

impl IsingLevels {
    pub fn new(beta: f64) -> Result<Self> {
        IsingParams::new(beta, 0.0)?;
        Ok(IsingLevels { beta })
    }
}

impl LevelDistribution for IsingLevels {
    fn top(&self) -> u32 {
        5
    }

    fn tail(&self, h: f64, j: u32) -> f64 {
        q_plus(5 - j, &IsingParams { beta: self.beta, h })
    }

    fn tail_derivative(&self, h: f64, j: u32) -> f64 {
        let p = self.tail(h, j);
        2.0 * self.beta * p * (1.0 - p)
    }
}

/// Deviates for the upper and lower chain at a space-time point.
pub trait PairSource: Sync {
    /// Per-time key for the fast path, if the source has one.
    fn layer(&self, t: i32) -> Option<u64>;
    fn pair(&self, layer: Option<u64>, v: Vertex, t: i32) -> (f64, f64);
}

/// Both chains read the same realization.
pub struct Coupled<'a, R: ?Sized>(pub &'a R);

impl<R: Realization + ?Sized> PairSource for Coupled<'_, R> {
    #[inline]
    fn layer(&self, _t: i32) -> Option<u64> {
        None
    }

    #[inline]
    fn pair(&self, _layer: Option<u64>, v: Vertex, t: i32) -> (f64, f64) {
        let u = self.0.uniform(IndexId::SpaceTime(SpaceTimeIndex { v, t }));
        (u, u)
    }
}

/// Fast path for the keyed store.
pub struct CoupledStore<'a>(pub &'a RealizationStore);

impl PairSource for CoupledStore<'_> {
    #[inline]
    fn layer(&self, t: i32) -> Option<u64> {
        Some(self.0.time_key(t))
    }

    #[inline]
    fn pair(&self, layer: Option<u64>, v: Vertex, t: i32) -> (f64, f64) {
        let u = match layer {
            Some(k) => RealizationStore::uniform_with_key(k, v),
            None => self.0.uniform(IndexId::SpaceTime(SpaceTimeIndex { v, t })),
        };
        (u, u)
    }
}

const UPPER: u8 = 1;
const LOWER: u8 = 16;

/// Dense two-chain grid. Each byte stores the upper chain's spin in bit 0
/// and the lower chain's in bit 4, so one sum over four neighbours yields both
/// plus-counts.
struct Grid {
    rect: Rect,
    cells: Vec<u8>,
}

impl Grid {
    fn new(rect: Rect, fill: u8) -> Self {
        Grid { rect, cells: vec![fill; rect.len()] }
    }

    #[inline]
    fn idx(&self, x: i32, y: i32) -> usize {
        (y - self.rect.y0) as usize * self.rect.width() + (x - self.rect.x0) as usize
    }

    #[inline]
    fn update_site<P: PairSource>(&mut self, x: i32, y: i32, t: i32, layer: Option<u64>, q: &[f64; 5], src: &P) {
        let w = self.rect.width();
        let i = self.idx(x, y);
        let s = self.cells[i - 1] + self.cells[i + 1] + self.cells[i - w] + self.cells[i + w];
        let (uu, ul) = src.pair(layer, Vertex::new(x, y), t);
        let up = uu < q[(s & 0x0f) as usize];
        let lo = ul < q[(s >> 4) as usize];
        self.cells[i] = ((up as u8) * UPPER) | ((lo as u8) * LOWER);
    }

    fn chains(&self, target: &Rect) -> (Vec<Spin>, Vec<Spin>) {
        let mut upper = Vec::with_capacity(target.len());
        let mut lower = Vec::with_capacity(target.len());
        for v in target.vertices() {
            let c = self.cells[self.idx(v.x, v.y)];
            upper.push(Spin::from_bool(c & UPPER != 0));
            lower.push(Spin::from_bool(c & LOWER != 0));
        }
        (upper, lower)
    }
}

#[inline]
fn first_of_parity(x: i32, y: i32, t: i32) -> i32 {
    if Parity::of(x as i64 + y as i64) == Parity::of(t as i64) {
        x
    } else {
        x + 1
    }
}

#[inline]
fn dist_to_interval(y: i32, lo: i32, hi: i32) -> i32 {
    if y < lo {
        lo - y
    } else if y > hi {
        y - hi
    } else {
        0
    }
}

/// Runs the upper and lower chains from time `-depth` to 0 in infinite
/// volume and returns both configurations on `target`.
///
/// The step at time `t = -depth + j` only needs the sites within L1
/// distance `depth - j - 1` of `target`, so the simulated region is the
/// shrinking L1 neighbourhood of the target (the backward light cone).
fn run_cone<P: PairSource>(target: &Rect, depth: u32, q: &[f64; 5], src: &P, init: u8) -> (Vec<Spin>, Vec<Spin>) {
    let mut grid = Grid::new(target.expand(depth + 1), init);
    for j in 0..depth {
        let t = -(depth as i32) + j as i32;
        let radius = (depth - j - 1) as i32;
        let layer = src.layer(t);
        for y in target.y0 - radius..=target.y1 + radius {
            let rx = radius - dist_to_interval(y, target.y0, target.y1);
            let x_end = target.x1 + rx;
            let mut x = first_of_parity(target.x0 - rx, y, t);
            while x <= x_end {
                grid.update_site(x, y, t, layer, q, src);
                x += 2;
            }
        }
    }
    grid.chains(target)
}

/// Sandwich from all-plus over all-minus at depth `depth`.
fn sandwich<P: PairSource>(target: &Rect, depth: u32, q: &[f64; 5], src: &P) -> (Vec<Spin>, Vec<Spin>) {
    run_cone(target, depth, q, src, UPPER)
}

/// One synchronous update of the parity class of `t`, producing the
/// configuration at `t + 1` on `config.rect()` shrunk by one.
pub fn parallel_update(config: &SpinField, t: i32, store: &dyn Realization, params: &IsingParams) -> Result<SpinField> {
    let r = config.rect();
    if r.width() < 3 || r.height() < 3 {
        return Err(Error::RegionTooSmall { region: r, needed: Rect::new(0, 0, 2, 2) });
    }
    let inner = Rect::new(r.x0 + 1, r.y0 + 1, r.x1 - 1, r.y1 - 1);
    let q = params.plus_probs();
    let active = Parity::of(t as i64);
    let out = SpinField::from_fn(inner, |v| {
        if v.parity() != active {
            return config.get(v);
        }
        let plus =
            crate::lattice::neighbors(v, crate::lattice::Adjacency::Ordinary).into_iter().filter(|&w| config.get(w).is_plus()).count();
        let u = store.uniform(IndexId::SpaceTime(SpaceTimeIndex::new(v, t)));
        Spin::from_bool(u < q[plus])
    });
    Ok(out.with_tag(config.tag.clone()))
}

/// Exact sample at one vertex together with its coalescence time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CftpResult {
    pub spin: Spin,
    /// Latest start time (negative) from which both chains agree at the vertex.
    pub tau: i32,
    /// Depths simulated, in order.
    pub probes: Vec<u32>,
}

/// Depth schedule `2, 4, 8, …` capped at (and ending with) `t_max`.
fn doubling(t_max: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(2u32.min(t_max.max(1)));
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur >= t_max { None } else { Some(cur.saturating_mul(2).min(t_max)) };
        Some(cur)
    })
}

/// Coupling from the past for a single vertex, with `τ(v)` refined exactly by
/// bisection between the last disagreeing and first agreeing depth.
pub fn cftp_vertex_with<P: PairSource>(v: Vertex, src: &P, params: &IsingParams, t_max: u32) -> Result<CftpResult> {
    if t_max == 0 {
        return Err(Error::Precondition("t_max must be ≥ 1".into()));
    }
    let q = params.plus_probs();
    let target = Rect::single(v);
    let mut probes = Vec::new();
    let agree_at = |depth: u32, probes: &mut Vec<u32>| {
        probes.push(depth);
        let (up, lo) = sandwich(&target, depth, &q, src);
        (up[0] == lo[0]).then_some(up[0])
    };
    let mut lo = 0u32;
    let mut found = None;
    for depth in doubling(t_max) {
        if let Some(s) = agree_at(depth, &mut probes) {
            found = Some((depth, s));
            break;
        }
        lo = depth;
    }
    let (mut hi, mut spin) = found.ok_or(Error::NotCoalesced { depth: t_max })?;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match agree_at(mid, &mut probes) {
            Some(s) => {
                hi = mid;
                spin = s;
            }
            None => lo = mid,
        }
    }
    Ok(CftpResult { spin, tau: -(hi as i32), probes })
}

pub fn cftp_vertex(v: Vertex, store: &dyn Realization, params: &IsingParams, t_max: u32) -> Result<CftpResult> {
    cftp_vertex_with(v, &Coupled(store), params, t_max)
}

/// Joint CFTP on a window; returns the field and the coalescence depth.
pub fn sample_window_with<P: PairSource>(rect: Rect, src: &P, params: &IsingParams, t_max: u32) -> Result<(SpinField, u32)> {
    let q = params.plus_probs();
    for depth in doubling(t_max) {
        let (up, lo) = sandwich(&rect, depth, &q, src);
        if up == lo {
            let field = SpinField::from_vec(rect, up).with_tag(FieldTag { model: "ising".into(), h: params.h, beta: Some(params.beta) });
            return Ok((field, depth));
        }
    }
    Err(Error::NotCoalesced { depth: t_max })
}

/// Exact sample of the infinite-volume measure restricted to `rect`. All
/// vertices share the same space-time randomness, so each coincides with
/// what [`cftp_vertex`] returns for it.
pub fn sample_window(rect: Rect, store: &dyn Realization, params: &IsingParams, t_max: u32) -> Result<SpinField> {
    sample_window_with(rect, &Coupled(store), params, t_max).map(|r| r.0)
}

/// [`sample_window`] on the keyed store's fast path.
pub fn sample_window_store(rect: Rect, store: &RealizationStore, params: &IsingParams, t_max: u32) -> Result<SpinField> {
    sample_window_with(rect, &CoupledStore(store), params, t_max).map(|r| r.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryCondition {
    AllPlus,
    AllMinus,
    /// Spins on exactly `boundary(rect)`.
    Fixed(HashMap<Vertex, Spin>),
}

impl BoundaryCondition {
    fn spin_at(&self, v: Vertex) -> Spin {
        match self {
            BoundaryCondition::AllPlus => Spin::Plus,
            BoundaryCondition::AllMinus => Spin::Minus,
            BoundaryCondition::Fixed(m) => m[&v],
        }
    }

    fn validate(&self, rect: &Rect) -> Result<()> {
        if let BoundaryCondition::Fixed(m) = self {
            let b = boundary(rect);
            if m.len() != b.len() || !b.iter().all(|v| m.contains_key(v)) {
                return Err(Error::Precondition(format!("fixed boundary condition must cover exactly the halo of {rect}")));
            }
        }
        Ok(())
    }
}

/// Exact sample of the finite-volume Gibbs measure on `rect` with frozen
/// boundary spins, by monotone CFTP of the parity dynamics inside `rect`.
pub fn finite_box_gibbs_with<P: PairSource>(
    rect: Rect,
    bc: &BoundaryCondition,
    src: &P,
    params: &IsingParams,
    t_max: u32,
) -> Result<(SpinField, u32)> {
    bc.validate(&rect)?;
    let q = params.plus_probs();
    for depth in doubling(t_max) {
        let mut grid = Grid::new(rect.expand(1), UPPER);
        for v in boundary(&rect) {
            let i = grid.idx(v.x, v.y);
            grid.cells[i] = if bc.spin_at(v).is_plus() { UPPER | LOWER } else { 0 };
        }
        for j in 0..depth {
            let t = -(depth as i32) + j as i32;
            let layer = src.layer(t);
            for y in rect.y0..=rect.y1 {
                let mut x = first_of_parity(rect.x0, y, t);
                while x <= rect.x1 {
                    grid.update_site(x, y, t, layer, &q, src);
                    x += 2;
                }
            }
        }
        let (up, lo) = grid.chains(&rect);
        if up == lo {
            let field =
                SpinField::from_vec(rect, up).with_tag(FieldTag { model: "ising-box".into(), h: params.h, beta: Some(params.beta) });
            return Ok((field, depth));
        }
    }
    Err(Error::NotCoalesced { depth: t_max })
}

pub fn finite_box_gibbs(
    rect: Rect,
    bc: &BoundaryCondition,
    store: &dyn Realization,
    params: &IsingParams,
    t_max: u32,
) -> Result<SpinField> {
    finite_box_gibbs_with(rect, bc, &Coupled(store), params, t_max).map(|r| r.0)
}

/// Size of the L1 ball of radius `r`.
fn diamond_len(r: u32) -> usize {
    let r = r as usize;
    2 * r * r + 2 * r + 1
}

/// Number of indices in the first `d` time levels of a determination sequence.
pub fn cone_prefix_len(d: u32) -> usize {
    (0..d).map(diamond_len).sum()
}

/// Offset of `w` in the lexicographic enumeration of the L1 ball of radius `r` around `v`.
fn diamond_offset(v: Vertex, r: u32, w: Vertex) -> Option<usize> {
    if v.l1(w) > r {
        return None;
    }
    let r = r as i64;
    let dx = w.x as i64 - v.x as i64;
    let dy = w.y as i64 - v.y as i64;
    // Columns -r..dx-1 have heights 2(r - |c|) + 1.
    let before: i64 = (-r..dx).map(|c| 2 * (r - c.abs()) + 1).sum();
    Some((before + dy + (r - dx.abs())) as usize)
}

fn diamond_cell(v: Vertex, r: u32, mut off: usize) -> Vertex {
    let r = r as i32;
    for dx in -r..=r {
        let half = r - dx.abs();
        let height = (2 * half + 1) as usize;
        if off < height {
            return v.offset(dx, off as i32 - half);
        }
        off -= height;
    }
    unreachable!("offset beyond diamond")
}

/// Deviates for the determination test: indices within the first `m` of
/// the sequence are read from the store; unseen ones push the upper chain to
/// `+1` and the lower chain to `-1`.
struct Masked<'a> {
    store: &'a dyn Realization,
    v: Vertex,
    partial_level: u32,
    partial_seen: usize,
}

impl PairSource for Masked<'_> {
    fn layer(&self, _t: i32) -> Option<u64> {
        None
    }

    fn pair(&self, _layer: Option<u64>, w: Vertex, t: i32) -> (f64, f64) {
        let level = t.unsigned_abs();
        let seen = level < self.partial_level
            || (level == self.partial_level && diamond_offset(self.v, level - 1, w).is_some_and(|o| o < self.partial_seen));
        if seen {
            let u = self.store.uniform(IndexId::SpaceTime(SpaceTimeIndex::new(w, t)));
            (u, u)
        } else {
            (U_TOP, U_BOTTOM)
        }
    }
}

/// The Ising model as a finitary representation.
///
/// The determination sequence of `v` is `(v, -1)`, then the L1 ball of
/// radius 1 around `v` at time `-2`, the ball of radius 2 at time `-3`,
/// and so on, each ball in lexicographic order: exactly the space-time
/// variables the value at time 0 can depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsingModel {
    pub levels: IsingLevels,
    pub t_max: u32,
}

impl IsingModel {
    pub fn new(beta: f64, t_max: u32) -> Result<Self> {
        if t_max == 0 {
            return Err(Error::InvalidParams("t_max must be ≥ 1".into()));
        }
        Ok(IsingModel { levels: IsingLevels::new(beta)?, t_max })
    }

    pub fn params(&self, h: f64) -> IsingParams {
        IsingParams { beta: self.levels.beta, h }
    }
}

impl FinitaryModel for IsingModel {
    fn name(&self) -> &'static str {
        "ising"
    }

    fn family(&self) -> &dyn LevelDistribution {
        &self.levels
    }

    fn profile(&self) -> RepresentationProfile {
        // Calibrated for β ≤ 0.3 over m ≤ 64, where the undetermined
        // fraction is still close to 1.
        RepresentationProfile { c0: 5.0e5, gamma: 1.0, alpha: 1.0 }
    }

    fn index_at(&self, v: Vertex, m: usize) -> Option<IndexId> {
        if m == 0 {
            return None;
        }
        let mut rest = m - 1;
        let mut level = 1u32;
        loop {
            let len = diamond_len(level - 1);
            if rest < len {
                let w = diamond_cell(v, level - 1, rest);
                return Some(IndexId::SpaceTime(SpaceTimeIndex::new(w, -(level as i32))));
            }
            rest -= len;
            level += 1;
        }
    }

    fn rank_of(&self, v: Vertex, j: IndexId) -> Option<usize> {
        let IndexId::SpaceTime(st) = j else { return None };
        let level = st.t.unsigned_abs();
        let off = diamond_offset(v, level - 1, st.v)?;
        Some(cone_prefix_len(level - 1) + off + 1)
    }

    fn is_determined(&self, v: Vertex, m: usize, store: &dyn Realization, h: f64) -> Result<bool> {
        if m == 0 {
            return Ok(false);
        }
        let mut full = 0u32;
        while cone_prefix_len(full + 1) <= m {
            full += 1;
        }
        let src = Masked { store, v, partial_level: full + 1, partial_seen: m - cone_prefix_len(full) };
        let q = self.params(h).plus_probs();
        let (up, lo) = sandwich(&Rect::single(v), full + 1, &q, &src);
        Ok(up[0] == lo[0])
    }

    fn spin(&self, v: Vertex, store: &dyn Realization, h: f64) -> Result<Spin> {
        cftp_vertex(v, store, &self.params(h), self.t_max).map(|r| r.spin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{neighbors, Adjacency};
    use crate::representation::{needs, ConstantRealization, Overlay};

    const BETAS: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];
    const HS: [f64; 5] = [-1.0, -0.1, 0.0, 0.1, 1.0];

    fn p(beta: f64, h: f64) -> IsingParams {
        IsingParams::new(beta, h).unwrap()
    }

    #[test]
    fn heat_bath_values() {
        for m in 0..=4 {
            assert_eq!(heat_bath_prob(m, Spin::Plus, &p(0.0, 0.7)).unwrap(), 0.5);
        }
        for beta in BETAS {
            assert!((heat_bath_prob(2, Spin::Plus, &p(beta, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        }
        let e2 = 2f64.exp();
        let want = e2 / (e2 + 1.0 / e2);
        assert!((heat_bath_prob(4, Spin::Plus, &p(0.5, 0.0)).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.982014).abs() < 1e-6);
        for m in 0..=4 {
            let q = heat_bath_prob(m, Spin::Plus, &p(0.3, 0.2)).unwrap() + heat_bath_prob(m, Spin::Minus, &p(0.3, 0.2)).unwrap();
            assert!((q - 1.0).abs() < 1e-15);
        }
        assert!(heat_bath_prob(5, Spin::Plus, &p(0.3, 0.0)).is_err());
        assert!(IsingParams::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn y_pmf_beta_zero() {
        let y = y_pmf(&p(0.0, 0.3)).unwrap();
        assert_eq!(y.pmf, [0.5, 0.0, 0.0, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn y_pmf_sums_and_tails() {
        for beta in BETAS {
            for h in HS {
                let y = y_pmf(&p(beta, h)).unwrap();
                assert!((y.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(y.pmf.iter().all(|&x| x >= 0.0));
                for m in 1..=5 {
                    assert_eq!(y.tail[m], heat_bath_prob(5 - m as u32, Spin::Plus, &p(beta, h)).unwrap());
                }
            }
        }
    }

    #[test]
    fn y_update_reproduces_heat_bath() {
        for beta in BETAS {
            for h in HS {
                let params = p(beta, h);
                let y = y_pmf(&params).unwrap();
                for plus in 0..=4usize {
                    let minus = 4 - plus;
                    // P(minus + 1 ≤ Y')
                    let via_y: f64 = (minus + 1..=5).map(|k| y.pmf[k]).sum();
                    let q = heat_bath_prob(plus as u32, Spin::Plus, &params).unwrap();
                    assert!((via_y - q).abs() < 1e-12, "beta {beta} h {h} m {plus}");
                }
            }
        }
    }

    #[test]
    fn y_pmf_zero_temperature_limit() {
        // β → ∞: Y' = 3 a.s. (q^(m)(+1) → 1 for m > 2, 1/2 at m = 2, 0 below), so
        // the update is +1 iff #minus ≤ 2 when ties break by Y' alone... the
        // mass sits on {2, 3} equally, i.e. strict majority decides and ties
        // are a fair coin.
        let y = y_pmf(&p(20.0, 0.0)).unwrap();
        assert!((y.pmf[2] - 0.5).abs() < 1e-6 && (y.pmf[3] - 0.5).abs() < 1e-6);
        for (plus, want) in [(0, 0.0), (1, 0.0), (2, 0.5), (3, 1.0), (4, 1.0)] {
            let minus = 4 - plus;
            let prob: f64 = (minus + 1..=5).map(|k| y.pmf[k]).sum();
            assert!((prob - want).abs() < 1e-6);
        }
    }

    #[test]
    fn levels_family_axioms() {
        let fam = IsingLevels::new(0.3).unwrap();
        let hs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.3).collect();
        crate::representation::check_family(&fam, &hs).unwrap();
        assert!(fam.tail(60.0, 5) > 1.0 - 1e-12);
        assert!(fam.tail(-60.0, 1) < 1e-12);
    }

    fn cross_config() -> SpinField {
        // Center (1,1) is even with 3 minus neighbours.
        SpinField::parse(Vertex::new(0, 0), &["---", "-++", "---"])
    }

    #[test]
    fn parallel_update_hand_cases() {
        let params = p(0.3, 0.0);
        let y = y_pmf(&params).unwrap();
        let cfg = cross_config();
        let center = IndexId::SpaceTime(SpaceTimeIndex::new(Vertex::new(1, 1), -2));
        let o = Overlay::new(ConstantRealization(0.5)).with(center, y.uniform_for(4));
        let out = parallel_update(&cfg, -2, &o, &params).unwrap();
        assert_eq!(out.rect(), Rect::new(1, 1, 1, 1));
        assert_eq!(out.get(Vertex::new(1, 1)), Spin::Plus);
        let o = Overlay::new(ConstantRealization(0.5)).with(center, y.uniform_for(3));
        assert_eq!(parallel_update(&cfg, -2, &o, &params).unwrap().get(Vertex::new(1, 1)), Spin::Minus);
        // odd time: the even center is copied
        assert_eq!(parallel_update(&cfg, -1, &ConstantRealization(U_BOTTOM), &params).unwrap().get(Vertex::new(1, 1)), Spin::Plus);
    }

    #[test]
    fn parallel_update_extremes() {
        let params = p(0.3, 0.1);
        let r = Rect::new(-3, -3, 3, 3);
        let plus = SpinField::filled(r, Spin::Plus);
        let kept = parallel_update(&plus, -4, &ConstantRealization(U_TOP), &params).unwrap();
        assert_eq!(kept.count(Spin::Plus), kept.rect().len());
        let zeroed = parallel_update(&plus, -4, &ConstantRealization(U_BOTTOM), &params).unwrap();
        for v in zeroed.rect().vertices() {
            assert_eq!(zeroed.get(v).is_plus(), v.parity() == Parity::Odd);
        }
        assert!(matches!(
            parallel_update(&SpinField::filled(Rect::new(0, 0, 1, 5), Spin::Plus), -1, &ConstantRealization(0.5), &params),
            Err(Error::RegionTooSmall { .. })
        ));
    }

    #[test]
    fn parallel_update_monotone_on_3x3() {
        let params = p(0.3, -0.2);
        let r = Rect::new(0, 0, 2, 2);
        let store = RealizationStore::new(4, 4);
        for bits in 0u32..512 {
            let cfg = SpinField::from_fn(r, |v| Spin::from_bool(bits >> r.index_of(v).unwrap() & 1 == 1));
            for t in [-2, -1] {
                let base = parallel_update(&cfg, t, &store, &params).unwrap();
                for k in 0..9 {
                    if bits >> k & 1 == 0 {
                        let up = SpinField::from_fn(r, |v| Spin::from_bool((bits | 1 << k) >> r.index_of(v).unwrap() & 1 == 1));
                        assert!(base.le(&parallel_update(&up, t, &store, &params).unwrap()));
                    }
                }
                // raising the deviate's level: lowering U
                let idx = IndexId::SpaceTime(SpaceTimeIndex::new(Vertex::new(1, 1), t));
                let u = store.uniform(idx);
                let raised = Overlay::new(store).with(idx, u * 0.5);
                assert!(base.le(&parallel_update(&cfg, t, &raised, &params).unwrap()));
            }
        }
    }

    /// Independent reference: full-box simulation with parallel_update from
    /// all-plus / all-minus, shrinking by one per step.
    fn reference_sandwich(v: Vertex, depth: u32, store: &dyn Realization, params: &IsingParams) -> (Spin, Spin) {
        let mut up = SpinField::filled(Rect::single(v).expand(depth), Spin::Plus);
        let mut lo = SpinField::filled(Rect::single(v).expand(depth), Spin::Minus);
        for j in 0..depth {
            let t = -(depth as i32) + j as i32;
            up = parallel_update(&up, t, store, params).unwrap();
            lo = parallel_update(&lo, t, store, params).unwrap();
        }
        (up.get(v), lo.get(v))
    }

    #[test]
    fn cone_engine_matches_reference() {
        let params = p(0.35, 0.05);
        let q = params.plus_probs();
        for seed in 0..10u64 {
            let store = RealizationStore::new(seed, 1);
            let v = Vertex::new(seed as i32 - 3, 2);
            for depth in 1..=9 {
                let (up, lo) = sandwich(&Rect::single(v), depth, &q, &CoupledStore(&store));
                assert_eq!((up[0], lo[0]), reference_sandwich(v, depth, &store, &params), "seed {seed} depth {depth}");
            }
        }
    }

    #[test]
    fn beta_zero_tau() {
        let params = p(0.0, 0.4);
        let store = RealizationStore::new(12, 0);
        for x in -3..3 {
            let v = Vertex::new(x, 1);
            let r = cftp_vertex(v, &store, &params, 64).unwrap();
            let want = if v.parity() == Parity::Odd { -1 } else { -2 };
            assert_eq!(r.tau, want, "{v}");
            // spin is the coin at the vertex's last update
            let u = store.uniform(IndexId::SpaceTime(SpaceTimeIndex::new(v, want)));
            assert_eq!(r.spin, Spin::from_bool(u < 0.5));
        }
    }

    #[test]
    fn strong_field_gives_plus() {
        let params = p(0.3, 50.0);
        let store = RealizationStore::new(3, 3);
        for x in 0..6 {
            let r = cftp_vertex(Vertex::new(x, 0), &store, &params, 64).unwrap();
            assert_eq!(r.spin, Spin::Plus);
            assert!(r.tau >= -2);
        }
        let w = sample_window(Rect::new(0, 0, 5, 5), &store, &params, 64).unwrap();
        assert_eq!(w.count(Spin::Plus), 36);
    }

    #[test]
    fn tau_is_exact_and_deterministic() {
        let params = p(0.3, 0.0);
        let q = params.plus_probs();
        for seed in 0..20u64 {
            let store = RealizationStore::new(seed, 77);
            let v = Vertex::new(1, 0);
            let r = cftp_vertex(v, &store, &params, 1024).unwrap();
            assert_eq!(r, cftp_vertex(v, &store, &params, 1024).unwrap());
            let depth = r.tau.unsigned_abs();
            let (up, lo) = sandwich(&Rect::single(v), depth, &q, &CoupledStore(&store));
            assert!(up[0] == lo[0] && up[0] == r.spin);
            if depth > 1 {
                let (up, lo) = sandwich(&Rect::single(v), depth - 1, &q, &CoupledStore(&store));
                assert_ne!(up[0], lo[0]);
            }
            // agreement persists at all deeper starts
            for extra in [1, 2, 5, 17] {
                let (up, lo) = sandwich(&Rect::single(v), depth + extra, &q, &CoupledStore(&store));
                assert!(up[0] == lo[0] && up[0] == r.spin);
            }
        }
    }

    #[test]
    fn window_agrees_with_vertexwise_cftp() {
        let params = p(0.3, 0.1);
        for seed in 0..5u64 {
            let store = RealizationStore::new(seed, 5);
            let rect = Rect::new(-2, -1, 3, 2);
            let w = sample_window(rect, &store, &params, 1024).unwrap();
            let fast = sample_window_store(rect, &store, &params, 1024).unwrap();
            assert_eq!(w, fast);
            for v in rect.vertices() {
                assert_eq!(w.get(v), cftp_vertex(v, &store, &params, 1024).unwrap().spin);
            }
        }
    }

    #[test]
    fn not_coalesced_is_an_error() {
        let params = p(0.3, 0.0);
        let store = RealizationStore::new(0, 0);
        // Upper and lower chains cannot meet at an even vertex after one step.
        let r = cftp_vertex(Vertex::new(0, 0), &store, &params, 1);
        assert!(matches!(r, Err(Error::NotCoalesced { depth: 1 })));
        assert!(doubling(10).eq([2, 4, 8, 10]));
        assert!(doubling(8).eq([2, 4, 8]));
        assert!(doubling(1).eq([1]));
    }

    #[test]
    fn finite_box_single_site() {
        let params = p(0.3, 0.1);
        let rect = Rect::single(Vertex::ORIGIN);
        let store = RealizationStore::new(8, 0);
        let plus = finite_box_gibbs(rect, &BoundaryCondition::AllPlus, &store, &params, 64).unwrap();
        let minus = finite_box_gibbs(rect, &BoundaryCondition::AllMinus, &store, &params, 64).unwrap();
        assert!(minus.le(&plus));
        // one even-time update decides the origin; it draws against q^(4) or q^(0)
        let u = store.uniform(IndexId::SpaceTime(SpaceTimeIndex::new(Vertex::ORIGIN, -2)));
        assert_eq!(plus.get(Vertex::ORIGIN).is_plus(), u < params.plus_probs()[4]);
        assert_eq!(minus.get(Vertex::ORIGIN).is_plus(), u < params.plus_probs()[0]);
        let fixed: HashMap<Vertex, Spin> = [(1, 0), (0, 1), (-1, 0)].into_iter().map(|(x, y)| (Vertex::new(x, y), Spin::Plus)).collect();
        assert!(finite_box_gibbs(rect, &BoundaryCondition::Fixed(fixed), &store, &params, 64).is_err());
    }

    #[test]
    fn finite_box_bc_monotone() {
        let params = p(0.3, 0.0);
        let rect = Rect::centered(3);
        for seed in 0..10u64 {
            let store = RealizationStore::new(seed, 2);
            let plus = finite_box_gibbs(rect, &BoundaryCondition::AllPlus, &store, &params, 1024).unwrap();
            let minus = finite_box_gibbs(rect, &BoundaryCondition::AllMinus, &store, &params, 1024).unwrap();
            assert!(minus.le(&plus));
            let mixed: HashMap<Vertex, Spin> = boundary(&rect).into_iter().map(|v| (v, Spin::from_bool(v.x > 0))).collect();
            let mid = finite_box_gibbs(rect, &BoundaryCondition::Fixed(mixed), &store, &params, 1024).unwrap();
            assert!(minus.le(&mid) && mid.le(&plus));
        }
    }

    #[test]
    fn beta_zero_box_is_fair() {
        let params = p(0.0, 3.0);
        let rect = Rect::single(Vertex::ORIGIN);
        let n = 4000;
        let plus = (0..n)
            .filter(|&i| {
                let s = RealizationStore::new(1, i);
                finite_box_gibbs(rect, &BoundaryCondition::AllPlus, &s, &params, 64).unwrap().get(Vertex::ORIGIN).is_plus()
            })
            .count() as f64;
        assert!((plus / n as f64 - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn determination_sequence_layout() {
        let m = IsingModel::new(0.3, 256).unwrap();
        let v = Vertex::new(2, -1);
        assert_eq!(m.index_at(v, 1), Some(IndexId::SpaceTime(SpaceTimeIndex::new(v, -1))));
        assert_eq!(m.rank_of(v, IndexId::SpaceTime(SpaceTimeIndex::new(v, -1))), Some(1));
        assert_eq!(m.rank_of(v, IndexId::SpaceTime(SpaceTimeIndex::new(v, -2))), Some(4));
        assert_eq!(m.rank_of(v, IndexId::SpaceTime(SpaceTimeIndex::new(v.offset(1, 0), -1))), None);
        assert_eq!(m.rank_of(v, IndexId::Site(v)), None);
        assert_eq!(cone_prefix_len(3), 1 + 5 + 13);
        let mut seen = std::collections::BTreeSet::new();
        for k in 1..=200 {
            let j = m.index_at(v, k).unwrap();
            assert!(seen.insert(j));
            assert_eq!(m.rank_of(v, j), Some(k));
            let IndexId::SpaceTime(st) = j else { panic!() };
            assert!(st.v.l1(v) < st.t.unsigned_abs());
        }
    }

    #[test]
    fn determination_beta_zero() {
        let m = IsingModel::new(0.0, 64).unwrap();
        let store = RealizationStore::new(21, 0);
        let odd = Vertex::new(1, 0);
        let even = Vertex::new(0, 0);
        assert!(m.is_determined(odd, 1, &store, 0.2).unwrap());
        assert!(!m.is_determined(even, 1, &store, 0.2).unwrap());
        assert!(!m.is_determined(odd, 0, &store, 0.2).unwrap());
        // (even, -2) is the 4th index; the first three leave it open
        assert!(!m.is_determined(even, 3, &store, 0.2).unwrap());
        assert!(m.is_determined(even, 4, &store, 0.2).unwrap());
        let j = IndexId::SpaceTime(SpaceTimeIndex::new(odd, -2));
        assert!(!needs(&m, odd, j, &store, 0.2).unwrap());
        let j = IndexId::SpaceTime(SpaceTimeIndex::new(odd, -1));
        assert!(needs(&m, odd, j, &store, 0.2).unwrap());
    }

    #[test]
    fn determination_monotone_and_consistent() {
        let model = IsingModel::new(0.3, 1024).unwrap();
        for seed in 0..15u64 {
            let store = RealizationStore::new(seed, 31);
            let v = Vertex::new(0, 1);
            let tau = cftp_vertex(v, &store, &model.params(0.0), 1024).unwrap().tau;
            let mut was = false;
            for m in 0..=cone_prefix_len(8) {
                let d = model.is_determined(v, m, &store, 0.0).unwrap();
                assert!(!was || d, "seed {seed}: determined at m-1 but not at m={m}");
                was = d;
            }
            // full levels up to |τ| determine σ_v
            let full = cone_prefix_len(tau.unsigned_abs());
            if tau.unsigned_abs() <= 8 {
                assert!(model.is_determined(v, full, &store, 0.0).unwrap());
            }
        }
    }

    #[test]
    fn ising_disjoint_prefixes() {
        let m = IsingModel::new(0.3, 64).unwrap();
        let alpha = m.profile().alpha;
        let v = Vertex::ORIGIN;
        for dx in -10i32..=10 {
            for dy in -10i32..=10 {
                let w = Vertex::new(dx, dy);
                if w == v {
                    continue;
                }
                let limit = (alpha * v.l1(w) as f64).ceil() as usize;
                let pv: std::collections::BTreeSet<_> = (1..limit).map(|k| m.index_at(v, k).unwrap()).collect();
                let pw: std::collections::BTreeSet<_> = (1..limit).map(|k| m.index_at(w, k).unwrap()).collect();
                assert!(pv.is_disjoint(&pw), "{w}");
            }
        }
    }

    #[test]
    fn neighbours_used_by_engine_are_ordinary() {
        // A vertex's update reads exactly its four L1 neighbours: flipping a
        // diagonal neighbour in the input never changes the output.
        let params = p(0.4, 0.0);
        let store = RealizationStore::new(1, 1);
        let base = SpinField::filled(Rect::new(0, 0, 2, 2), Spin::Minus);
        let mut diag = base.clone();
        diag.set(Vertex::new(2, 2), Spin::Plus);
        let a = parallel_update(&base, -2, &store, &params).unwrap();
        let b = parallel_update(&diag, -2, &store, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(neighbors(Vertex::new(1, 1), Adjacency::Ordinary).len(), 4);
    }
}
