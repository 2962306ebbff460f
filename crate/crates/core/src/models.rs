//! Explicit i.i.d. models: Bernoulli site percolation and the
//! windowed-majority field.

use crate::error::{Error, Result};
use crate::field::{FieldTag, Spin, SpinField};
use crate::lattice::{Rect, Vertex};
use crate::representation::{logistic, FinitaryModel, IndexId, LevelDistribution, Logistic, Realization, RepresentationProfile};

/// `p = e^h / (e^h + e^-h)`.
pub fn bernoulli_p(h: f64) -> f64 {
    logistic(h)
}

/// `σ_v = 2 X_v - 1` with `X_v ~ Bernoulli(bernoulli_p(h))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BernoulliModel;

impl BernoulliModel {
    #[inline]
    pub fn spin_at(store: &dyn Realization, v: Vertex, p: f64) -> Spin {
        Spin::from_bool(store.uniform(IndexId::Site(v)) < p)
    }
}

pub fn bernoulli_field<R: Realization + ?Sized>(rect: Rect, store: &R, h: f64) -> SpinField {
    let p = bernoulli_p(h);
    SpinField::from_fn(rect, |v| Spin::from_bool(store.uniform(IndexId::Site(v)) < p)).with_tag(FieldTag {
        model: "bernoulli".into(),
        h,
        beta: None,
    })
}

impl FinitaryModel for BernoulliModel {
    fn name(&self) -> &'static str {
        "bernoulli"
    }

    fn family(&self) -> &dyn LevelDistribution {
        &Logistic
    }

    fn profile(&self) -> RepresentationProfile {
        // One coordinate always determines the spin, so any positive C0 works.
        RepresentationProfile { c0: 1.0, gamma: 1.0, alpha: 1.0 }
    }

    fn index_at(&self, v: Vertex, m: usize) -> Option<IndexId> {
        (m == 1).then_some(IndexId::Site(v))
    }

    fn rank_of(&self, v: Vertex, j: IndexId) -> Option<usize> {
        (j == IndexId::Site(v)).then_some(1)
    }

    fn is_determined(&self, _v: Vertex, m: usize, _store: &dyn Realization, _h: f64) -> Result<bool> {
        Ok(m >= 1)
    }

    fn spin(&self, v: Vertex, store: &dyn Realization, h: f64) -> Result<Spin> {
        Ok(Self::spin_at(store, v, bernoulli_p(h)))
    }
}

/// `σ_v` is the sign of `#1 − #0` in the first window
/// `W_n(v) = [v_x − n, v_x + n − 1] × [v_y − n, v_y + n − 1]` where that
/// difference exceeds `threshold` in absolute value.
#[derive(Clone, Copy, Debug)]
pub struct MajorityWindowModel {
    pub threshold: u32,
    pub scan_cap: u32,
}

impl Default for MajorityWindowModel {
    fn default() -> Self {
        MajorityWindowModel { threshold: 5, scan_cap: 1 << 14 }
    }
}

/// Cells of `W_n(v) \ W_{n-1}(v)`.
pub fn ring_len(n: u32) -> usize {
    8 * n as usize - 4
}

/// Cell `off` of ring `n` in lexicographic (x, then y) order.
pub fn ring_cell(v: Vertex, n: u32, off: usize) -> Vertex {
    let n_i = n as i32;
    let side = 2 * n as usize;
    let lo = Vertex::new(v.x - n_i, v.y - n_i);
    if off < side {
        return lo.offset(0, off as i32);
    }
    let middle = 2 * (side - 2);
    if off < side + middle {
        let k = off - side;
        let x = lo.x + 1 + (k / 2) as i32;
        let y = if k % 2 == 0 { lo.y } else { v.y + n_i - 1 };
        return Vertex::new(x, y);
    }
    let k = off - side - middle;
    Vertex::new(v.x + n_i - 1, lo.y + k as i32)
}

/// Ring index `n` of `w` relative to `v` (the smallest `n` with `w ∈ W_n(v)`).
pub fn ring_of(v: Vertex, w: Vertex) -> u32 {
    let dx = w.x as i64 - v.x as i64;
    let dy = w.y as i64 - v.y as i64;
    (-dx).max(dx + 1).max(-dy).max(dy + 1) as u32
}

/// Inverse of [`ring_cell`].
pub fn ring_offset(v: Vertex, w: Vertex) -> (u32, usize) {
    let n = ring_of(v, w);
    let n_i = n as i32;
    let side = 2 * n as usize;
    let left = v.x - n_i;
    let right = v.x + n_i - 1;
    let bottom = v.y - n_i;
    let off = if w.x == left {
        (w.y - bottom) as usize
    } else if w.x == right {
        side + 2 * (side - 2) + (w.y - bottom) as usize
    } else {
        side + 2 * (w.x - left - 1) as usize + usize::from(w.y != bottom)
    };
    (n, off)
}

impl MajorityWindowModel {
    pub fn new(threshold: u32, scan_cap: u32) -> Result<Self> {
        if threshold == 0 || scan_cap == 0 {
            return Err(Error::InvalidParams("majority threshold and scan cap must be ≥ 1".into()));
        }
        Ok(MajorityWindowModel { threshold, scan_cap })
    }

    /// Runs the window scan with the given cell values, returning the sign and
    /// the window index at which it stopped.
    pub fn scan(&self, v: Vertex, mut one: impl FnMut(Vertex) -> bool) -> Result<(Spin, u32)> {
        let mut diff: i64 = 0;
        let t = self.threshold as i64;
        for n in 1..=self.scan_cap {
            for off in 0..ring_len(n) {
                diff += if one(ring_cell(v, n, off)) { 1 } else { -1 };
            }
            if diff.abs() > t {
                return Ok((Spin::from_bool(diff > 0), n));
            }
        }
        Err(Error::ScanCapExceeded { vertex: v, cap: self.scan_cap })
    }

    pub fn sigma(&self, v: Vertex, store: &dyn Realization, h: f64) -> Result<Spin> {
        let p = logistic(h);
        self.scan(v, |w| store.uniform(IndexId::Site(w)) < p).map(|r| r.0)
    }

    pub fn field(&self, rect: Rect, store: &dyn Realization, h: f64) -> Result<SpinField> {
        let f = SpinField::try_from_fn(rect, |v| self.sigma(v, store, h))?;
        Ok(f.with_tag(FieldTag { model: "majority".into(), h, beta: None }))
    }

    fn rank_site(v: Vertex, w: Vertex) -> usize {
        let (n, off) = ring_offset(v, w);
        let inner = 2 * (n as usize - 1);
        inner * inner + off + 1
    }
}

/// Free-function form of [`MajorityWindowModel::sigma`] for the default model.
pub fn majority_sigma(model: &MajorityWindowModel, v: Vertex, store: &dyn Realization, h: f64) -> Result<Spin> {
    model.sigma(v, store, h)
}

impl FinitaryModel for MajorityWindowModel {
    fn name(&self) -> &'static str {
        "majority"
    }

    fn family(&self) -> &dyn LevelDistribution {
        &Logistic
    }

    fn profile(&self) -> RepresentationProfile {
        // Calibrated against the empirical undetermined fraction at h = 0 for
        // m ≤ 64 (worst case over h); see the decay test below.
        RepresentationProfile { c0: 2.0e5, gamma: 1.0, alpha: 1.0 }
    }

    fn index_at(&self, v: Vertex, m: usize) -> Option<IndexId> {
        if m == 0 {
            return None;
        }
        let mut n = ((m as f64).sqrt() / 2.0).ceil() as u32;
        while 4 * (n as usize) * (n as usize) < m {
            n += 1;
        }
        while n > 1 && 4 * ((n - 1) as usize).pow(2) >= m {
            n -= 1;
        }
        let inner = 4 * ((n - 1) as usize).pow(2);
        Some(IndexId::Site(ring_cell(v, n, m - 1 - inner)))
    }

    fn rank_of(&self, v: Vertex, j: IndexId) -> Option<usize> {
        match j {
            IndexId::Site(w) => Some(Self::rank_site(v, w)),
            IndexId::SpaceTime(_) => None,
        }
    }

    fn is_determined(&self, v: Vertex, m: usize, store: &dyn Realization, h: f64) -> Result<bool> {
        if m == 0 {
            return Ok(false);
        }
        let p = logistic(h);
        // σ_v is increasing in X, so the unseen coordinates matter iff the
        // all-ones and all-zeros completions disagree.
        let completion = |fill: bool| self.scan(v, |w| if Self::rank_site(v, w) <= m { store.uniform(IndexId::Site(w)) < p } else { fill });
        let hi = completion(true)?.0;
        let lo = completion(false)?.0;
        Ok(hi == lo)
    }

    fn spin(&self, v: Vertex, store: &dyn Realization, h: f64) -> Result<Spin> {
        self.sigma(v, store, h)
    }
}
