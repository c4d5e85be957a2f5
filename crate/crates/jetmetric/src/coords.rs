//! Coordinates on the first jet bundle of metrics and exact points of it.
//!
//! A chart on the base induces the chart `(x^i, y_ij, y_ij,k)` on the jet
//! space, where `y_ij` (`i ≤ j`) are the metric coefficients and `y_ij,k`
//! their first partials. Only the normalized slots `i ≤ j` are independent
//! variables; constructing a coordinate with `i > j` swaps the indices.

use crate::rational::{fraction_string, parse_rational, rat, rat_int, Rational};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// One jet coordinate. Indices are 1-based; `Metric`/`MetricJet` keep `i ≤ j`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum JetCoordinate {
    /// `x^i`
    Base(u8),
    /// `y_ij`, `i ≤ j`
    Metric(u8, u8),
    /// `y_ij,k`, `i ≤ j`
    MetricJet(u8, u8, u8),
}

impl JetCoordinate {
    pub fn base(i: usize) -> Self {
        debug_assert!(i >= 1);
        JetCoordinate::Base(i as u8)
    }

    pub fn metric(i: usize, j: usize) -> Self {
        debug_assert!(i >= 1 && j >= 1);
        let (i, j) = (i.min(j) as u8, i.max(j) as u8);
        JetCoordinate::Metric(i, j)
    }

    pub fn metric_jet(i: usize, j: usize, k: usize) -> Self {
        debug_assert!(i >= 1 && j >= 1 && k >= 1);
        let (i, j) = (i.min(j) as u8, i.max(j) as u8);
        JetCoordinate::MetricJet(i, j, k as u8)
    }

    /// All coordinates for dimension `n`, in the canonical order
    /// (base, metric, metric jets; each block lexicographic).
    pub fn enumerate(n: usize) -> Vec<JetCoordinate> {
        let mut out = Vec::with_capacity(Self::count(n));
        for i in 1..=n {
            out.push(Self::base(i));
        }
        for i in 1..=n {
            for j in i..=n {
                out.push(Self::metric(i, j));
            }
        }
        for i in 1..=n {
            for j in i..=n {
                for k in 1..=n {
                    out.push(Self::metric_jet(i, j, k));
                }
            }
        }
        out
    }

    /// `n + n(n+1)/2 + n²(n+1)/2`
    pub fn count(n: usize) -> usize {
        n + n * (n + 1) / 2 + n * n * (n + 1) / 2
    }

    /// Stable numeric id, used as the polynomial variable index. Indices are
    /// single digits (n ≤ 4), so the decimal packing is injective and its
    /// numeric order agrees with the coordinate order.
    pub fn var_id(&self) -> u32 {
        match *self {
            JetCoordinate::Base(i) => i as u32,
            JetCoordinate::Metric(i, j) => 100 + 10 * i as u32 + j as u32,
            JetCoordinate::MetricJet(i, j, k) => {
                1000 + 100 * i as u32 + 10 * j as u32 + k as u32
            }
        }
    }

    pub fn from_var_id(id: u32) -> Option<JetCoordinate> {
        match id {
            1..=9 => Some(JetCoordinate::Base(id as u8)),
            100..=199 => Some(JetCoordinate::metric(
                ((id - 100) / 10) as usize,
                ((id - 100) % 10) as usize,
            )),
            1000..=1999 => {
                let rest = id - 1000;
                Some(JetCoordinate::metric_jet(
                    (rest / 100) as usize,
                    ((rest / 10) % 10) as usize,
                    (rest % 10) as usize,
                ))
            }
            _ => None,
        }
    }

    /// Text key used in JSON files: `x1`, `y12`, `y12,1`.
    pub fn name(&self) -> String {
        match *self {
            JetCoordinate::Base(i) => format!("x{i}"),
            JetCoordinate::Metric(i, j) => format!("y{i}{j}"),
            JetCoordinate::MetricJet(i, j, k) => format!("y{i}{j},{k}"),
        }
    }

    pub fn parse(name: &str) -> Option<JetCoordinate> {
        let name = name.trim();
        let digits = |s: &str| -> Option<Vec<usize>> {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).filter(|&d| d >= 1))
                .collect()
        };
        if let Some(rest) = name.strip_prefix('x') {
            let d = digits(rest)?;
            if d.len() == 1 {
                return Some(Self::base(d[0]));
            }
            return None;
        }
        if let Some(rest) = name.strip_prefix('y') {
            match rest.split_once(',') {
                Some((ij, k)) => {
                    let ij = digits(ij)?;
                    let k = digits(k)?;
                    if ij.len() == 2 && k.len() == 1 {
                        return Some(Self::metric_jet(ij[0], ij[1], k[0]));
                    }
                    None
                }
                None => {
                    let ij = digits(rest)?;
                    if ij.len() == 2 {
                        return Some(Self::metric(ij[0], ij[1]));
                    }
                    None
                }
            }
        } else {
            None
        }
    }
}

impl fmt::Display for JetCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetPointError {
    #[error("coordinate {0} missing from point data")]
    MissingCoordinate(String),
    #[error("unknown coordinate {0:?} for dimension {1}")]
    UnknownCoordinate(String, usize),
    #[error("metric matrix is not positive definite (leading minor {0} is not > 0)")]
    NotPositiveDefinite(usize),
}

/// An exact point of the jet space: a full assignment of rationals to the
/// coordinates at fixed `n`, with `(y_ij)` positive definite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetPoint {
    n: usize,
    values: BTreeMap<JetCoordinate, Rational>,
}

impl JetPoint {
    /// `y = δ`, all jets and base coordinates zero.
    pub fn normal(n: usize) -> JetPoint {
        let mut values = BTreeMap::new();
        for c in JetCoordinate::enumerate(n) {
            let v = match c {
                JetCoordinate::Metric(i, j) if i == j => rat_int(1),
                _ => rat_int(0),
            };
            values.insert(c, v);
        }
        JetPoint { n, values }
    }

    /// Builds a point from explicit assignments; unspecified coordinates
    /// default to the normal point values.
    pub fn from_assignments<I>(n: usize, assignments: I) -> Result<JetPoint, JetPointError>
    where
        I: IntoIterator<Item = (JetCoordinate, Rational)>,
    {
        let mut p = JetPoint::normal(n);
        for (c, v) in assignments {
            if !p.values.contains_key(&c) {
                return Err(JetPointError::UnknownCoordinate(c.name(), n));
            }
            p.values.insert(c, v);
        }
        p.check_positive_definite()?;
        Ok(p)
    }

    /// Returns a copy with one coordinate replaced. Positivity is not
    /// re-checked; use for sweeps over non-metric coordinates or re-validate.
    pub fn with(&self, c: JetCoordinate, v: Rational) -> JetPoint {
        let mut p = self.clone();
        p.values.insert(c, v);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, c: JetCoordinate) -> &Rational {
        self.values
            .get(&c)
            .unwrap_or_else(|| panic!("coordinate {c} outside dimension {}", self.n))
    }

    pub fn values(&self) -> &BTreeMap<JetCoordinate, Rational> {
        &self.values
    }

    /// The metric block `(y_ij)` as a full symmetric matrix.
    pub fn metric_matrix(&self) -> Vec<Vec<Rational>> {
        (1..=self.n)
            .map(|i| {
                (1..=self.n)
                    .map(|j| self.get(JetCoordinate::metric(i, j)).clone())
                    .collect()
            })
            .collect()
    }

    pub fn check_positive_definite(&self) -> Result<(), JetPointError> {
        let m = self.metric_matrix();
        for k in 1..=self.n {
            let minor: Vec<Vec<Rational>> =
                (0..k).map(|i| m[i][0..k].to_vec()).collect();
            if crate::rational::det_rational(&minor) <= rat_int(0) {
                return Err(JetPointError::NotPositiveDefinite(k));
            }
        }
        Ok(())
    }

    /// Deterministic pseudo-random point: `y = δ + s` with symmetric `s`,
    /// entries in `[-1/4, 1/4]`, jets uniform in `[-2, 2]`, base in `[-1, 1]`.
    /// Resamples (bounded) if the perturbed metric fails the positivity check.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> JetPoint {
        for _ in 0..64 {
            let mut p = JetPoint::normal(n);
            for c in JetCoordinate::enumerate(n) {
                let v = match c {
                    JetCoordinate::Base(_) => rat(rng.gen_range(-8..=8), 8),
                    JetCoordinate::Metric(i, j) => {
                        let delta = if i == j { rat_int(1) } else { rat_int(0) };
                        delta + rat(rng.gen_range(-4..=4), 16)
                    }
                    JetCoordinate::MetricJet(..) => rat(rng.gen_range(-16..=16), 8),
                };
                p.values.insert(c, v);
            }
            if p.check_positive_definite().is_ok() {
                return p;
            }
        }
        // Diagonal dominance makes failure here practically impossible.
        unreachable!("random metric perturbation kept failing positive definiteness")
    }

    /// JSON shape `{"n": 2, "coords": {"x1": "0/1", ...}}` with every value a
    /// fraction string. Sparse on input (missing coordinates default to the
    /// normal point), dense and sorted on output.
    pub fn to_json(&self) -> serde_json::Value {
        let coords: serde_json::Map<String, serde_json::Value> = self
            .values
            .iter()
            .map(|(c, v)| (c.name(), serde_json::Value::String(fraction_string(v))))
            .collect();
        serde_json::json!({ "n": self.n, "coords": coords })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<JetPoint, JetPointError> {
        let bad = |s: &str| JetPointError::UnknownCoordinate(s.to_string(), 0);
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| bad("n"))? as usize;
        let mut assignments = Vec::new();
        if let Some(map) = v.get("coords").and_then(|x| x.as_object()) {
            for (name, val) in map {
                let c = JetCoordinate::parse(name)
                    .ok_or_else(|| JetPointError::UnknownCoordinate(name.clone(), n))?;
                let s = val
                    .as_str()
                    .ok_or_else(|| JetPointError::UnknownCoordinate(name.clone(), n))?;
                let r = parse_rational(s)
                    .map_err(|_| JetPointError::UnknownCoordinate(name.clone(), n))?;
                assignments.push((c, r));
            }
        }
        JetPoint::from_assignments(n, assignments)
    }
}
