//! Spin values and finite windows of spins.

use crate::error::{Error, Result};
use crate::lattice::{Rect, Vertex};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Minus,
    Plus,
}

impl Spin {
    pub fn from_bool(plus: bool) -> Spin {
        if plus {
            Spin::Plus
        } else {
            Spin::Minus
        }
    }

    pub fn is_plus(self) -> bool {
        self == Spin::Plus
    }

    pub fn value(self) -> i8 {
        match self {
            Spin::Plus => 1,
            Spin::Minus => -1,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }
}

impl std::ops::Neg for Spin {
    type Output = Spin;
    fn neg(self) -> Spin {
        self.flip()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_plus() { "+" } else { "-" })
    }
}

/// Which model produced a field, and at which parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct FieldTag {
    pub model: String,
    pub h: f64,
    pub beta: Option<f64>,
}

/// A rectangular window of spins, row-major with x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinField {
    rect: Rect,
    spins: Vec<Spin>,
    pub tag: FieldTag,
}

impl SpinField {
    pub fn filled(rect: Rect, s: Spin) -> Self {
        SpinField { rect, spins: vec![s; rect.len()], tag: FieldTag::default() }
    }

    pub fn from_fn(rect: Rect, mut f: impl FnMut(Vertex) -> Spin) -> Self {
        let spins = rect.vertices().map(&mut f).collect();
        SpinField { rect, spins, tag: FieldTag::default() }
    }

    pub fn try_from_fn<E>(rect: Rect, mut f: impl FnMut(Vertex) -> Result<Spin, E>) -> Result<Self, E> {
        let spins = rect.vertices().map(&mut f).collect::<Result<Vec<_>, E>>()?;
        Ok(SpinField { rect, spins, tag: FieldTag::default() })
    }

    /// `spins` must have `rect.len()` entries in row-major order.
    pub fn from_vec(rect: Rect, spins: Vec<Spin>) -> Self {
        assert_eq!(spins.len(), rect.len(), "spin vector does not cover rect");
        SpinField { rect, spins, tag: FieldTag::default() }
    }

    /// Parses rows of `+`/`-` characters, top row first.
    pub fn parse(origin: Vertex, rows: &[&str]) -> Self {
        let h = rows.len();
        let w = rows[0].len();
        let rect = Rect::new(origin.x, origin.y, origin.x + w as i32 - 1, origin.y + h as i32 - 1);
        SpinField::from_fn(rect, |v| {
            let row = rows[h - 1 - (v.y - origin.y) as usize].as_bytes();
            Spin::from_bool(row[(v.x - origin.x) as usize] == b'+')
        })
    }

    pub fn with_tag(mut self, tag: FieldTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    /// Panics outside the window.
    #[inline]
    pub fn get(&self, v: Vertex) -> Spin {
        self.spins[self.rect.index_of(v).expect("vertex outside field")]
    }

    pub fn try_get(&self, v: Vertex) -> Result<Spin> {
        self.rect.index_of(v).map(|i| self.spins[i]).ok_or(Error::OutsideWindow { vertex: v, rect: self.rect })
    }

    pub fn set(&mut self, v: Vertex, s: Spin) {
        let i = self.rect.index_of(v).expect("vertex outside field");
        self.spins[i] = s;
    }

    pub fn count(&self, s: Spin) -> usize {
        self.spins.iter().filter(|&&x| x == s).count()
    }

    pub fn flipped(&self) -> SpinField {
        SpinField { rect: self.rect, spins: self.spins.iter().map(|s| s.flip()).collect(), tag: self.tag.clone() }
    }

    /// Pointwise `self ≤ other` on a common window.
    pub fn le(&self, other: &SpinField) -> bool {
        self.rect == other.rect && self.spins.iter().zip(&other.spins).all(|(a, b)| a <= b)
    }

    /// Copies out a sub-window.
    pub fn restrict(&self, r: &Rect) -> Result<SpinField> {
        if !self.rect.contains_rect(r) {
            return Err(Error::RectExceedsField { inner: *r, outer: self.rect });
        }
        let mut f = SpinField::from_fn(*r, |v| self.get(v));
        f.tag = self.tag.clone();
        Ok(f)
    }
}

impl fmt::Display for SpinField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in (self.rect.y0..=self.rect.y1).rev() {
            for x in self.rect.x0..=self.rect.x1 {
                write!(f, "{}", self.get(Vertex::new(x, y)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_orientation() {
        let f = SpinField::parse(Vertex::new(0, 0), &["+-", "--"]);
        assert_eq!(f.get(Vertex::new(0, 1)), Spin::Plus);
        assert_eq!(f.get(Vertex::new(0, 0)), Spin::Minus);
        assert_eq!(f.count(Spin::Plus), 1);
        assert_eq!(f.to_string(), "+-\n--\n");
    }

    #[test]
    fn order_and_flip() {
        assert!(Spin::Minus < Spin::Plus);
        assert_eq!(-Spin::Plus, Spin::Minus);
        let r = Rect::new(0, 0, 2, 2);
        let lo = SpinField::filled(r, Spin::Minus);
        let hi = lo.flipped();
        assert!(lo.le(&hi) && !hi.le(&lo));
        assert!(hi.try_get(Vertex::new(3, 0)).is_err());
    }
}
