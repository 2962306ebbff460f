use crate::lattice::{Rect, Vertex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level {j} outside 1..={k}")]
    LevelOutOfRange { j: u32, k: u32 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("majority scan at {vertex} found no window up to n = {cap} exceeding the threshold")]
    ScanCapExceeded { vertex: Vertex, cap: u32 },

    #[error("upper and lower chains did not coalesce by depth {depth}")]
    NotCoalesced { depth: u32 },

    #[error("region {region} too small to update {needed}")]
    RegionTooSmall { region: Rect, needed: Rect },

    #[error("Y tails are not monotone at level {level}")]
    NonMonotoneTails { level: usize },

    #[error("vertex {vertex} outside window {rect}")]
    OutsideWindow { vertex: Vertex, rect: Rect },

    #[error("rect {inner} not contained in field window {outer}")]
    RectExceedsField { inner: Rect, outer: Rect },

    #[error("duality violated on {rect}: H={h} V={v} H*-={hs} V*-={vs}")]
    DualityViolation { rect: Rect, h: bool, v: bool, hs: bool, vs: bool },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("enumeration of {configs} configurations exceeds the limit of {limit}")]
    TooLarge { configs: u128, limit: u64 },

    #[error("degenerate event: P(A) = {0}")]
    DegenerateEvent(f64),

    #[error("invalid event spec: {0}")]
    InvalidEvent(String),

    #[error("bracket [{lo}, {hi}] does not straddle target {target} (P = {p_lo}, {p_hi})")]
    BracketFailure { lo: f64, hi: f64, p_lo: f64, p_hi: f64, target: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
