//! Square-lattice geometry: vertices, ordinary and star adjacency,
//! inclusive rectangles and their L1 halo.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A site of ℤ².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Vertex::new(self.x + dx, self.y + dy)
    }

    /// `|x| + |y|` distance.
    pub fn l1(self, other: Vertex) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// `max(|x|, |y|)` distance.
    pub fn linf(self, other: Vertex) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    pub fn parity(self) -> Parity {
        parity(self)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of an integer (time step or coordinate sum).
    pub fn of(n: i64) -> Parity {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Even iff `x + y` is even.
pub fn parity(v: Vertex) -> Parity {
    Parity::of(v.x as i64 + v.y as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjacency {
    /// Four nearest neighbours.
    Ordinary,
    /// Eight neighbours: the matching lattice.
    Star,
}

impl Adjacency {
    /// The adjacency whose crossings are blocked by crossings of this one.
    pub fn dual(self) -> Adjacency {
        match self {
            Adjacency::Ordinary => Adjacency::Star,
            Adjacency::Star => Adjacency::Ordinary,
        }
    }

    pub fn offsets(self) -> &'static [(i32, i32)] {
        match self {
            Adjacency::Ordinary => &NEIGHBOR_OFFSETS[..4],
            Adjacency::Star => &NEIGHBOR_OFFSETS[..],
        }
    }
}

/// E, N, W, S, then NE, NW, SW, SE.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

pub fn neighbors(v: Vertex, adj: Adjacency) -> Vec<Vertex> {
    adj.offsets().iter().map(|&(dx, dy)| v.offset(dx, dy)).collect()
}

/// Inclusive vertex rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Rect {
    /// Panics if the corners are out of order; use [`Rect::try_new`] for
    /// untrusted input.
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        Self::try_new(x0, y0, x1, y1).expect("rect corners out of order")
    }

    pub fn try_new(x0: i32, y0: i32, x1: i32, y1: i32) -> Option<Self> {
        (x0 <= x1 && y0 <= y1).then_some(Rect { x0, y0, x1, y1 })
    }

    /// The box `[0, n] × [0, m]`, i.e. (n+1)(m+1) vertices.
    pub fn box_nm(n: u32, m: u32) -> Self {
        Rect::new(0, 0, n as i32, m as i32)
    }

    /// `B(n) = [-n, n]²`.
    pub fn centered(n: u32) -> Self {
        let n = n as i32;
        Rect::new(-n, -n, n, n)
    }

    pub fn single(v: Vertex) -> Self {
        Rect::new(v.x, v.y, v.x, v.y)
    }

    pub fn width(&self) -> usize {
        (self.x1 - self.x0) as usize + 1
    }

    pub fn height(&self) -> usize {
        (self.y1 - self.y0) as usize + 1
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.x >= self.x0 && v.x <= self.x1 && v.y >= self.y0 && v.y <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn expand(&self, r: u32) -> Rect {
        let r = r as i32;
        Rect::new(self.x0 - r, self.y0 - r, self.x1 + r, self.y1 + r)
    }

    pub fn translate(&self, dx: i32, dy: i32) -> Rect {
        Rect::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    /// Row-major index (x fastest) of a contained vertex.
    #[inline]
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.contains(v).then(|| (v.y - self.y0) as usize * self.width() + (v.x - self.x0) as usize)
    }

    #[inline]
    pub fn vertex_at(&self, idx: usize) -> Vertex {
        let w = self.width();
        Vertex::new(self.x0 + (idx % w) as i32, self.y0 + (idx / w) as i32)
    }

    /// Vertices in row-major order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| Vertex::new(x, y)))
    }

    pub fn on_border(&self, v: Vertex) -> bool {
        self.contains(v) && (v.x == self.x0 || v.x == self.x1 || v.y == self.y0 || v.y == self.y1)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x0, self.y0, self.x1, self.y1)
    }
}

impl std::str::FromStr for Rect {
    type Err = String;

    /// Parses `x0,y0,x1,y1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<i32> =
            s.split(',').map(|p| p.trim().parse::<i32>().map_err(|e| format!("bad coordinate {p:?}: {e}"))).collect::<Result<_, _>>()?;
        match parts[..] {
            [x0, y0, x1, y1] => Rect::try_new(x0, y0, x1, y1).ok_or_else(|| format!("rect {s:?} has x0 > x1 or y0 > y1")),
            _ => Err(format!("expected x0,y0,x1,y1, got {s:?}")),
        }
    }
}

/// Vertices outside `r` at L1 distance 1 from it: the four sides of the halo,
/// corners excluded. Order: bottom, top (left to right), then left, right
/// (bottom to top).
pub fn boundary(r: &Rect) -> Vec<Vertex> {
    let mut out = Vec::with_capacity(2 * (r.width() + r.height()));
    for x in r.x0..=r.x1 {
        out.push(Vertex::new(x, r.y0 - 1));
    }
    for x in r.x0..=r.x1 {
        out.push(Vertex::new(x, r.y1 + 1));
    }
    for y in r.y0..=r.y1 {
        out.push(Vertex::new(r.x0 - 1, y));
    }
    for y in r.y0..=r.y1 {
        out.push(Vertex::new(r.x1 + 1, y));
    }
    out
}
