//! Clusters, crossings and their duality on finite windows, plus the
//! survival-function fit used for tail estimates.
//!
//! Paths are confined to the rectangle under study. With that convention a
//! box has a horizontal `+` crossing iff it has no vertical `-*` crossing.

use crate::error::{Error, Result};
use crate::field::{Spin, SpinField};
use crate::lattice::{Adjacency, Rect, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Write as _;

/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] as usize != a {
            let grand = self.parent[self.parent[a] as usize];
            self.parent[a] = grand;
            a = grand as usize;
        }
        a
    }

    /// Returns the root of the merged set.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        ra
    }

    pub fn set_size(&mut self, a: usize) -> usize {
        let r = self.find(a);
        self.size[r] as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Left column to right column.
    Horizontal,
    /// Bottom row to top row.
    Vertical,
}

/// Connected components of the spin-`s` vertices of a field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabeling {
    pub spin: Spin,
    pub adjacency: Adjacency,
    rect: Rect,
    /// Component id per vertex, row-major; `None` off the spin class.
    ids: Vec<Option<u32>>,
    sizes: Vec<usize>,
}

impl ClusterLabeling {
    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn id_at(&self, v: Vertex) -> Option<u32> {
        self.ids[self.rect.index_of(v)?]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn size_of(&self, id: u32) -> usize {
        self.sizes[id as usize]
    }
}

/// Offsets that point "forward" in row-major order, so each edge is visited once.
fn forward_offsets(adj: Adjacency) -> &'static [(i32, i32)] {
    match adj {
        Adjacency::Ordinary => &[(1, 0), (0, 1)],
        Adjacency::Star => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
    }
}

pub fn label_clusters(field: &SpinField, s: Spin, adj: Adjacency) -> ClusterLabeling {
    let rect = field.rect();
    let spins = field.spins();
    let mut uf = UnionFind::new(rect.len());
    for (i, v) in rect.vertices().enumerate() {
        if spins[i] != s {
            continue;
        }
        for &(dx, dy) in forward_offsets(adj) {
            if let Some(j) = rect.index_of(v.offset(dx, dy)) {
                if spins[j] == s {
                    uf.union(i, j);
                }
            }
        }
    }
    let mut root_id = vec![u32::MAX; rect.len()];
    let mut ids = vec![None; rect.len()];
    let mut sizes = Vec::new();
    for i in 0..rect.len() {
        if spins[i] != s {
            continue;
        }
        let r = uf.find(i);
        if root_id[r] == u32::MAX {
            root_id[r] = sizes.len() as u32;
            sizes.push(uf.set_size(r));
        }
        ids[i] = Some(root_id[r]);
    }
    ClusterLabeling { spin: s, adjacency: adj, rect, ids, sizes }
}

/// Size of a cluster seen through a finite window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSize {
    pub size: usize,
    /// The component reaches the border of the window, so its true size may be larger.
    pub truncated: bool,
}

pub fn cluster_size_at(field: &SpinField, v: Vertex, s: Spin, adj: Adjacency) -> Result<ClusterSize> {
    let rect = field.rect();
    if !rect.contains(v) {
        return Err(Error::OutsideWindow { vertex: v, rect });
    }
    explore_cluster(v, s, adj, &rect, usize::MAX, |w| Ok(field.get(w)))
}

/// Breadth-first exploration of the spin-`s` cluster of `start` inside
/// `window`, reading spins on demand. Stops once `cap` vertices have been
/// found, reporting the result as truncated.
pub fn explore_cluster(
    start: Vertex,
    s: Spin,
    adj: Adjacency,
    window: &Rect,
    cap: usize,
    mut spin: impl FnMut(Vertex) -> Result<Spin>,
) -> Result<ClusterSize> {
    if spin(start)? != s {
        return Ok(ClusterSize { size: 0, truncated: false });
    }
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut truncated = false;
    while let Some(u) = queue.pop_front() {
        truncated |= window.on_border(u);
        for &(dx, dy) in adj.offsets() {
            let w = u.offset(dx, dy);
            if window.contains(w) && !seen.contains(&w) && spin(w)? == s {
                seen.insert(w);
                if seen.len() >= cap {
                    return Ok(ClusterSize { size: seen.len(), truncated: true });
                }
                queue.push_back(w);
            }
        }
    }
    Ok(ClusterSize { size: seen.len(), truncated })
}

/// Flood fill from the starting side over `open` cells of a `w × h` grid.
fn crosses(w: usize, h: usize, open: &[bool], dir: Direction, adj: Adjacency, seen: &mut Vec<bool>, stack: &mut Vec<usize>) -> bool {
    seen.clear();
    seen.resize(w * h, false);
    stack.clear();
    let (starts, is_goal): (Vec<usize>, Box<dyn Fn(usize) -> bool>) = match dir {
        Direction::Horizontal => ((0..h).map(|y| y * w).collect(), Box::new(move |i| i % w == w - 1)),
        Direction::Vertical => ((0..w).collect(), Box::new(move |i| i / w == h - 1)),
    };
    for i in starts {
        if open[i] && !seen[i] {
            seen[i] = true;
            stack.push(i);
        }
    }
    let offsets = adj.offsets();
    while let Some(i) = stack.pop() {
        if is_goal(i) {
            return true;
        }
        let (x, y) = ((i % w) as i32, (i / w) as i32);
        for &(dx, dy) in offsets {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if open[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    false
}

/// Scratch buffers for repeated crossing queries.
#[derive(Default)]
pub struct CrossingScratch {
    open: Vec<bool>,
    seen: Vec<bool>,
    stack: Vec<usize>,
}

impl CrossingScratch {
    pub fn has_crossing(&mut self, field: &SpinField, rect: &Rect, dir: Direction, s: Spin, adj: Adjacency) -> Result<bool> {
        if !field.rect().contains_rect(rect) {
            return Err(Error::RectExceedsField { inner: *rect, outer: field.rect() });
        }
        self.open.clear();
        self.open.extend(rect.vertices().map(|v| field.get(v) == s));
        Ok(crosses(rect.width(), rect.height(), &self.open, dir, adj, &mut self.seen, &mut self.stack))
    }

    /// Crossing query on an explicit mask of open cells (row-major over a `w × h` grid).
    pub fn crosses_mask(&mut self, w: usize, h: usize, open: &[bool], dir: Direction, adj: Adjacency) -> bool {
        crosses(w, h, open, dir, adj, &mut self.seen, &mut self.stack)
    }

    pub fn duality_audit(&mut self, field: &SpinField, rect: &Rect) -> Result<CrossingReport> {
        let report = CrossingReport {
            h: self.has_crossing(field, rect, Direction::Horizontal, Spin::Plus, Adjacency::Ordinary)?,
            v: self.has_crossing(field, rect, Direction::Vertical, Spin::Plus, Adjacency::Ordinary)?,
            h_star_minus: self.has_crossing(field, rect, Direction::Horizontal, Spin::Minus, Adjacency::Star)?,
            v_star_minus: self.has_crossing(field, rect, Direction::Vertical, Spin::Minus, Adjacency::Star)?,
        };
        if report.h == report.v_star_minus || report.v == report.h_star_minus {
            return Err(Error::DualityViolation {
                rect: *rect,
                h: report.h,
                v: report.v,
                hs: report.h_star_minus,
                vs: report.v_star_minus,
            });
        }
        Ok(report)
    }
}

/// Whether spin-`s` vertices connect the two opposite sides of `rect`
/// through a path inside `rect`.
pub fn has_crossing(field: &SpinField, rect: &Rect, dir: Direction, s: Spin, adj: Adjacency) -> Result<bool> {
    CrossingScratch::default().has_crossing(field, rect, dir, s, adj)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingReport {
    /// Horizontal `+` crossing, ordinary adjacency.
    pub h: bool,
    pub v: bool,
    /// Horizontal `-` crossing, star adjacency.
    pub h_star_minus: bool,
    pub v_star_minus: bool,
}

/// All four crossing indicators; errors if the duality identity fails.
pub fn duality_audit(field: &SpinField, rect: &Rect) -> Result<CrossingReport> {
    CrossingScratch::default().duality_audit(field, rect)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Decay rate, minus the slope of `log P(|C| ≥ s)`.
    pub lambda: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub s_min: u64,
    pub s_max: u64,
    pub points: usize,
}

/// Least-squares line through `(s, log survival)` pairs; survivals must be positive.
pub fn fit_log_linear(points: &[(f64, f64)], s_min: u64, s_max: u64) -> Result<TailFit> {
    if points.len() < 5 {
        return Err(Error::InsufficientData(format!("{} support points in [{s_min}, {s_max}], need 5", points.len())));
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, p)| (a + x, b + p.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, p) in points {
        let (dx, dy) = (x - mx, p.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|&(x, p)| (p.ln() - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(TailFit { lambda: -slope, intercept, r_squared, s_min, s_max, points: points.len() })
}

/// Empirical survival `P̂(|C| ≥ s)` over all recorded samples, for each
/// `s` in `[s_min, s_max]` where it is positive.
pub fn survival_points(hist: &BTreeMap<u64, u64>, s_min: u64, s_max: u64) -> Vec<(f64, f64)> {
    let total: u64 = hist.values().sum();
    if total == 0 {
        return Vec::new();
    }
    let mut above: u64 = hist.range(s_min..).map(|(_, c)| c).sum();
    let mut out = Vec::new();
    for s in s_min..=s_max {
        if above == 0 {
            break;
        }
        out.push((s as f64, above as f64 / total as f64));
        above -= hist.get(&s).copied().unwrap_or(0);
    }
    out
}

pub fn fit_exponential_tail(hist: &BTreeMap<u64, u64>, range: (u64, u64)) -> Result<TailFit> {
    let (lo, hi) = range;
    if lo > hi {
        return Err(Error::InvalidParams(format!("empty fit range [{lo}, {hi}]")));
    }
    fit_log_linear(&survival_points(hist, lo, hi), lo, hi)
}

/// CSV with columns `size,count,survival`.
pub fn histogram_csv(hist: &BTreeMap<u64, u64>) -> String {
    let total: u64 = hist.values().sum();
    let mut above = total;
    let mut out = String::from("size,count,survival\n");
    for (&s, &c) in hist {
        let surv = if total == 0 { 0.0 } else { above as f64 / total as f64 };
        let _ = writeln!(out, "{s},{c},{surv}");
        above -= c;
    }
    out
}
