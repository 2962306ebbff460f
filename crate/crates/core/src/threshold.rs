//! Exact enumeration of increasing events on `{0..k}^n` under product
//! measures: probabilities, internal pivotal probabilities, the Russo
//! derivative, and the constants implied by the sharp-threshold inequalities.
//!
//! Coordinates are encoded in mixed radix `k + 1`, coordinate 0 least
//! significant. Sums are compensated and run in a fixed order.

use crate::error::{Error, Result};
use crate::representation::{LevelDistribution, Logistic};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Largest configuration count enumerated.
pub const ENUMERATION_LIMIT: u64 = 1 << 24;

/// Largest `n` for the exact rational cross-check.
pub const RATIONAL_MAX_N: usize = 16;

/// Step for the five-point central differences.
pub const FD_STEP: f64 = 1e-3;

/// Stability threshold for grid-refined suprema and infima.
pub const GRID_TOL: f64 = 1e-6;

const GRID_MAX_POINTS: usize = 1 << 16;

pub const BUILTINS: [&str; 7] = ["dictator", "maj3", "maj9", "tribes_2_3", "and2", "or2", "crossing_2x2"];

/// An event on `{0..k}^n` given by its truth table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSpec {
    pub name: String,
    pub n: usize,
    pub k: u32,
    table: Vec<bool>,
    pub increasing: bool,
}

fn config_count(n: usize, k: u32) -> Result<usize> {
    let count = (k as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_LIMIT as u128 {
        return Err(Error::TooLarge { configs: count, limit: ENUMERATION_LIMIT });
    }
    Ok(count as usize)
}

/// Decodes a configuration index into its digits.
fn digits_of(mut idx: usize, n: usize, k: u32, out: &mut [u8]) {
    let r = k as usize + 1;
    for d in out.iter_mut().take(n) {
        *d = (idx % r) as u8;
        idx /= r;
    }
}

impl EventSpec {
    /// Builds the truth table from an indicator; verifies monotonicity when
    /// `increasing` is set.
    pub fn from_fn(name: &str, n: usize, k: u32, increasing: bool, indicator: impl Fn(&[u8]) -> bool) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidEvent(format!("need n ≥ 1 and k ≥ 1, got n={n}, k={k}")));
        }
        let count = config_count(n, k)?;
        let mut digits = vec![0u8; n];
        let table = (0..count)
            .map(|idx| {
                digits_of(idx, n, k, &mut digits);
                indicator(&digits)
            })
            .collect();
        Self::from_table(name, n, k, table, increasing)
    }

    pub fn from_table(name: &str, n: usize, k: u32, table: Vec<bool>, increasing: bool) -> Result<Self> {
        let count = config_count(n, k)?;
        if table.len() != count {
            return Err(Error::InvalidEvent(format!("truth table has {} entries, need {count}", table.len())));
        }
        let spec = EventSpec { name: name.to_string(), n, k, table, increasing };
        if increasing {
            spec.check_increasing()?;
        }
        Ok(spec)
    }

    /// Exhaustive check over all single-coordinate raises.
    pub fn check_increasing(&self) -> Result<()> {
        let mut digits = vec![0u8; self.n];
        let strides = self.strides();
        for idx in 0..self.table.len() {
            if !self.table[idx] {
                continue;
            }
            digits_of(idx, self.n, self.k, &mut digits);
            for i in 0..self.n {
                if (digits[i] as u32) < self.k && !self.table[idx + strides[i]] {
                    return Err(Error::InvalidEvent(format!(
                        "{}: raising coordinate {i} of configuration {digits:?} leaves the event",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let count = |w: &[u8]| w.iter().filter(|&&b| b == 1).count();
        match name {
            "dictator" => Self::from_fn(name, 3, 1, true, |w| w[0] == 1),
            "and2" => Self::from_fn(name, 2, 1, true, |w| w[0] == 1 && w[1] == 1),
            "or2" => Self::from_fn(name, 2, 1, true, |w| w[0] == 1 || w[1] == 1),
            "maj3" => Self::from_fn(name, 3, 1, true, |w| count(w) >= 2),
            "maj9" => Self::from_fn(name, 9, 1, true, |w| count(w) >= 5),
            "tribes_2_3" => Self::from_fn(name, 6, 1, true, |w| w[..3].iter().all(|&b| b == 1) || w[3..].iter().all(|&b| b == 1)),
            // Vertices of the box [0,1]², row-major from the bottom row:
            // 0 = BL, 1 = BR, 2 = TL, 3 = TR.
            "crossing_2x2" => Self::from_fn(name, 4, 1, true, |w| (w[0] == 1 && w[1] == 1) || (w[2] == 1 && w[3] == 1)),
            _ => Err(Error::InvalidEvent(format!("unknown builtin {name:?}; known: {}", BUILTINS.join(", ")))),
        }
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.table[idx]
    }

    pub fn config_count(&self) -> usize {
        self.table.len()
    }

    fn strides(&self) -> Vec<usize> {
        let r = self.k as usize + 1;
        (0..self.n).map(|i| r.pow(i as u32)).collect()
    }

    /// Truth table as hex, least significant bit first within each byte.
    pub fn table_hex(&self) -> String {
        self.table
            .chunks(8)
            .map(|c| {
                let b = c.iter().enumerate().fold(0u8, |acc, (j, &x)| acc | (x as u8) << j);
                format!("{b:02x}")
            })
            .collect()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: EventDoc = serde_json::from_str(s)?;
        doc.into_spec()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&EventDoc {
            n: Some(self.n),
            k: Some(self.k),
            builtin: None,
            truth_table: Some(self.table_hex()),
            increasing: Some(self.increasing),
            name: Some(self.name.clone()),
        })
        .expect("event document serializes")
    }
}

/// On-disk form of an event.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDoc {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub truth_table: Option<String>,
    #[serde(default)]
    pub increasing: Option<bool>,
    #[serde(default)]
    pub name: Option<String>,
}

impl EventDoc {
    pub fn into_spec(self) -> Result<EventSpec> {
        match (self.builtin, self.truth_table) {
            (Some(b), None) => {
                let spec = EventSpec::builtin(&b)?;
                if self.n.is_some_and(|n| n != spec.n) || self.k.is_some_and(|k| k != spec.k) {
                    return Err(Error::InvalidEvent(format!("builtin {b} has n={}, k={}", spec.n, spec.k)));
                }
                Ok(spec)
            }
            (None, Some(hex)) => {
                let (n, k) = match (self.n, self.k) {
                    (Some(n), Some(k)) => (n, k),
                    _ => return Err(Error::InvalidEvent("truth_table needs n and k".into())),
                };
                let count = config_count(n, k)?;
                let hex = hex.trim();
                if hex.len() != count.div_ceil(8) * 2 {
                    return Err(Error::InvalidEvent(format!("truth table needs {} hex digits", count.div_ceil(8) * 2)));
                }
                let bytes = (0..hex.len())
                    .step_by(2)
                    .map(|i| u8::from_str_radix(&hex[i..i + 2], 16))
                    .collect::<std::result::Result<Vec<u8>, _>>()
                    .map_err(|e| Error::InvalidEvent(format!("bad hex: {e}")))?;
                let table = (0..count).map(|c| bytes[c / 8] >> (c % 8) & 1 == 1).collect();
                let name = self.name.unwrap_or_else(|| "table".into());
                EventSpec::from_table(&name, n, k, table, self.increasing.unwrap_or(true))
            }
            _ => Err(Error::InvalidEvent("give exactly one of builtin, truth_table".into())),
        }
    }
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// All sums gathered in one pass over the configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub prob: f64,
    /// `P(A_i)`.
    pub pivotal: Vec<f64>,
    /// `joint[i][j] = P(A, ω_i = j)`.
    pub joint: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

fn check_family(spec: &EventSpec, family: &dyn LevelDistribution) -> Result<()> {
    if family.top() != spec.k {
        return Err(Error::InvalidParams(format!("family has k={}, event has k={}", family.top(), spec.k)));
    }
    Ok(())
}

pub fn level_masses(family: &dyn LevelDistribution, h: f64) -> Vec<f64> {
    (0..=family.top()).map(|j| family.mass(h, j)).collect()
}

/// Enumerates under the product of `masses` (one law for every coordinate).
pub fn enumerate_masses(spec: &EventSpec, masses: &[f64]) -> Enumeration {
    let n = spec.n;
    let levels = spec.k as usize + 1;
    let strides = spec.strides();
    let mut prob = KahanSum::default();
    let mut pivotal = vec![KahanSum::default(); n];
    let mut joint = vec![vec![KahanSum::default(); levels]; n];
    let mut digits = vec![0u8; n];
    for idx in 0..spec.table.len() {
        if spec.table[idx] {
            let w: f64 = digits.iter().map(|&d| masses[d as usize]).product();
            prob.add(w);
            for i in 0..n {
                let d = digits[i] as usize;
                joint[i][d].add(w);
                if d > 0 && !spec.table[idx - d * strides[i]] {
                    pivotal[i].add(w);
                }
            }
        }
        for d in digits.iter_mut() {
            if (*d as usize) + 1 < levels {
                *d += 1;
                break;
            }
            *d = 0;
        }
    }
    Enumeration {
        prob: prob.value(),
        pivotal: pivotal.iter().map(KahanSum::value).collect(),
        joint: joint.iter().map(|r| r.iter().map(KahanSum::value).collect()).collect(),
        masses: masses.to_vec(),
    }
}

pub fn enumerate(spec: &EventSpec, family: &dyn LevelDistribution, h: f64) -> Result<Enumeration> {
    check_family(spec, family)?;
    Ok(enumerate_masses(spec, &level_masses(family, h)))
}

/// `P^(h)(A)`.
pub fn exact_prob(spec: &EventSpec, family: &dyn LevelDistribution, h: f64) -> Result<f64> {
    enumerate(spec, family, h).map(|e| e.prob)
}

/// `P^(h)(A)` for `k = 1` at success probability `p`.
pub fn exact_prob_p(spec: &EventSpec, p: f64) -> f64 {
    enumerate_masses(spec, &[1.0 - p, p]).prob
}

/// `P(ω ∈ A, ω with coordinate i set to 0 ∉ A)`.
pub fn internal_pivotal_prob(spec: &EventSpec, i: usize, family: &dyn LevelDistribution, h: f64) -> Result<f64> {
    if i >= spec.n {
        return Err(Error::InvalidParams(format!("coordinate {i} out of range 0..{}", spec.n)));
    }
    enumerate(spec, family, h).map(|e| e.pivotal[i])
}

/// Exact rational `P(A)` under the product of rational level masses.
pub fn exact_prob_rational(spec: &EventSpec, masses: &[BigRational]) -> Result<BigRational> {
    if spec.n > RATIONAL_MAX_N {
        return Err(Error::Precondition(format!("rational mode needs n ≤ {RATIONAL_MAX_N}")));
    }
    if masses.len() != spec.k as usize + 1 {
        return Err(Error::InvalidParams(format!("need {} masses", spec.k + 1)));
    }
    let mut total = BigRational::zero();
    let mut digits = vec![0u8; spec.n];
    for idx in 0..spec.table.len() {
        if spec.table[idx] {
            digits_of(idx, spec.n, spec.k, &mut digits);
            let w = digits.iter().fold(BigRational::one(), |acc, &d| acc * &masses[d as usize]);
            total += w;
        }
    }
    Ok(total)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Derivative of `P(A)`. For `k = 1` the variable is `p` and the closed
/// form is the Russo sum `Σ P(A_i) / p`; for `k > 1` the variable is `h` and
/// the closed form is `Σ_i Σ_j t_j'(h) (P(A | ω_i = j) − P(A | ω_i = j−1))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RussoDerivative {
    pub closed_form: f64,
    pub finite_difference: f64,
    pub variable: DerivativeVariable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeVariable {
    P,
    H,
}

fn five_point(f: impl Fn(f64) -> f64, x: f64, d: f64) -> f64 {
    (-f(x + 2.0 * d) + 8.0 * f(x + d) - 8.0 * f(x - d) + f(x - 2.0 * d)) / (12.0 * d)
}

fn closed_form_dh(e: &Enumeration, family: &dyn LevelDistribution, h: f64) -> f64 {
    let mut total = KahanSum::default();
    for row in &e.joint {
        for j in 1..row.len() {
            let cond = |l: usize| if e.masses[l] > 0.0 { row[l] / e.masses[l] } else { 0.0 };
            total.add(family.tail_derivative(h, j as u32) * (cond(j) - cond(j - 1)));
        }
    }
    total.value()
}

pub fn russo_derivative(spec: &EventSpec, family: &dyn LevelDistribution, h: f64) -> Result<RussoDerivative> {
    let e = enumerate(spec, family, h)?;
    if spec.k == 1 {
        let p = family.tail(h, 1);
        let d = FD_STEP.min(p / 4.0).min((1.0 - p) / 4.0);
        Ok(RussoDerivative {
            closed_form: e.pivotal.iter().sum::<f64>() / p,
            finite_difference: five_point(|x| exact_prob_p(spec, x), p, d),
            variable: DerivativeVariable::P,
        })
    } else {
        Ok(RussoDerivative {
            closed_form: closed_form_dh(&e, family, h),
            finite_difference: five_point(|x| enumerate_masses(spec, &level_masses(family, x)).prob, h, FD_STEP),
            variable: DerivativeVariable::H,
        })
    }
}

/// Ingredients of the influence inequality at one parameter value, and the
/// smallest constant that makes it hold there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub event: String,
    pub h: f64,
    /// `k = 1` only.
    pub p: Option<f64>,
    pub prob: f64,
    pub pivotal: Vec<f64>,
    pub epsilon: f64,
    pub derivative: RussoDerivative,
    /// `log(1/ε) P(A)(1 − P(A)) / P'(A)`.
    pub implied_k1: f64,
    /// `implied_k1 / (p(1−p) log(2/(p(1−p))))`, `k = 1` only.
    pub implied_k_sharp: Option<f64>,
}

pub fn talagrand_report(spec: &EventSpec, family: &dyn LevelDistribution, h: f64) -> Result<InfluenceReport> {
    let e = enumerate(spec, family, h)?;
    if e.prob <= 0.0 || e.prob >= 1.0 {
        return Err(Error::DegenerateEvent(e.prob));
    }
    let epsilon = e.pivotal.iter().cloned().fold(0.0, f64::max);
    if epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::DegenerateEvent(e.prob));
    }
    let derivative = russo_derivative(spec, family, h)?;
    let implied_k1 = (1.0 / epsilon).ln() * e.prob * (1.0 - e.prob) / derivative.closed_form;
    let p = (spec.k == 1).then(|| family.tail(h, 1));
    let implied_k_sharp = p.map(|p| {
        let v = p * (1.0 - p);
        implied_k1 / (v * (2.0 / v).ln())
    });
    Ok(InfluenceReport {
        event: spec.name.clone(),
        h,
        p,
        prob: e.prob,
        pivotal: e.pivotal,
        epsilon,
        derivative,
        implied_k1,
        implied_k_sharp,
    })
}

/// [`talagrand_report`] for `k = 1` at success probability `p`.
pub fn talagrand_report_p(spec: &EventSpec, p: f64) -> Result<InfluenceReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams(format!("p = {p} outside (0, 1)")));
    }
    talagrand_report(spec, &Logistic, crate::representation::logit_half(p))
}

/// The interval form of the inequality over `[h1, h2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub event: String,
    pub h1: f64,
    pub h2: f64,
    /// `P^(h1)(A) (1 − P^(h2)(A))`.
    pub lhs: f64,
    /// `sup_i sup_h P^(h)(A_i)` over the interval.
    pub epsilon_bar: f64,
    /// `inf_h min_j d/dh μ^(h)({j..k})` over the interval.
    pub c: f64,
    /// `(h2 − h1) c log(1/ε̄) / log(1/lhs)`.
    pub implied_k2: f64,
    /// Same supremum in the `p` parametrization, `k = 1` only.
    pub epsilon_prime: Option<f64>,
    /// `(p2 − p1) log(1/ε') / log(1/lhs)`, `k = 1` only.
    pub implied_k1_interval: Option<f64>,
    pub grid_points: usize,
}

fn grid_extrema(spec: &EventSpec, family: &dyn LevelDistribution, h1: f64, h2: f64, points: usize) -> (f64, f64) {
    let mut eps = 0.0f64;
    let mut c = f64::INFINITY;
    for g in 0..points {
        let h = h1 + (h2 - h1) * g as f64 / (points - 1) as f64;
        let e = enumerate_masses(spec, &level_masses(family, h));
        eps = e.pivotal.iter().cloned().fold(eps, f64::max);
        for j in 1..=family.top() {
            c = c.min(family.tail_derivative(h, j));
        }
    }
    (eps, c)
}

pub fn corollary_interval_report(spec: &EventSpec, family: &dyn LevelDistribution, h1: f64, h2: f64) -> Result<IntervalReport> {
    check_family(spec, family)?;
    if !(h1 < h2) || !h1.is_finite() || !h2.is_finite() {
        return Err(Error::InvalidParams(format!("need finite h1 < h2, got [{h1}, {h2}]")));
    }
    let lhs = exact_prob(spec, family, h1)? * (1.0 - exact_prob(spec, family, h2)?);
    let mut points = 17;
    let (mut eps, mut c) = grid_extrema(spec, family, h1, h2, points);
    loop {
        let next = 2 * points - 1;
        let (e2, c2) = grid_extrema(spec, family, h1, h2, next);
        let stable = (e2 - eps).abs() <= GRID_TOL && (c2 - c).abs() <= GRID_TOL;
        points = next;
        eps = e2;
        c = c2;
        if stable || points >= GRID_MAX_POINTS {
            break;
        }
    }
    if eps <= 0.0 {
        return Err(Error::DegenerateEvent(lhs));
    }
    let log_inv_lhs = -lhs.ln();
    let implied = |width: f64, e: f64| if lhs > 0.0 { width * (1.0 / e).ln() / log_inv_lhs } else { 0.0 };
    let (epsilon_prime, implied_k1_interval) = if spec.k == 1 {
        let (p1, p2) = (family.tail(h1, 1), family.tail(h2, 1));
        (Some(eps), Some(implied(p2 - p1, eps)))
    } else {
        (None, None)
    };
    Ok(IntervalReport {
        event: spec.name.clone(),
        h1,
        h2,
        lhs,
        epsilon_bar: eps,
        c,
        implied_k2: implied((h2 - h1) * c, eps),
        epsilon_prime,
        implied_k1_interval,
        grid_points: points,
    })
}

/// Largest `implied_k1` over the builtin suite at `p ∈ {0.1, …, 0.9}`,
/// attained by `tribes_2_3` at `p = 0.3`; a regression value.
pub const SUITE_MAX_IMPLIED_K1: f64 = 0.349_322_490_164_085_8;

/// The builtin suite's maximal `implied_k1` and where it occurs.
pub fn suite_max_implied_k1() -> Result<(f64, String, f64)> {
    let mut best = (0.0, String::new(), 0.0);
    for name in BUILTINS {
        let spec = EventSpec::builtin(name)?;
        for t in 1..=9 {
            let p = t as f64 / 10.0;
            let r = talagrand_report_p(&spec, p)?;
            if r.implied_k1 > best.0 {
                best = (r.implied_k1, name.to_string(), p);
            }
        }
    }
    Ok(best)
}
