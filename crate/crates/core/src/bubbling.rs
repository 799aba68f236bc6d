//! Splittings of a class `kL − Σ l_j E_j` in a blow-up of `ℙ²` into
//! nontrivial parts, with the combinatorial filters that rule them out as
//! limits of a family of curves.
//!
//! A part `A_i = k_i L − Σ l_ij E_j` must have `l_ij ≥ 0` (positivity with
//! the exceptional curves), `k_i > 0` (a part with `k_i = 0` would need
//! `l_ij > 0`, which is excluded), and distinct parts must intersect
//! nonnegatively: `k_i k_m − Σ_j l_ij l_mj ≥ 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlowupClass {
    pub k: i64,
    pub l: Vec<i64>,
}

impl BlowupClass {
    pub fn new(k: i64, l: Vec<i64>) -> Self {
        Self { k, l }
    }

    /// Parses `k,l1,l2,…`.
    pub fn parse(text: &str) -> Result<Self> {
        let nums: Vec<i64> = text
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad class {text:?}: {e}")))?;
        match nums.split_first() {
            Some((k, l)) => Ok(Self::new(*k, l.to_vec())),
            None => Err(Error::InvalidInput("empty class".into())),
        }
    }

    pub fn dot(&self, other: &Self) -> i64 {
        self.k * other.k - self.l.iter().zip(&other.l).map(|(a, b)| a * b).sum::<i64>()
    }

    pub fn is_zero(&self) -> bool {
        self.k == 0 && self.l.iter().all(|&x| x == 0)
    }

    fn sub(&self, other: &Self) -> Self {
        Self::new(self.k - other.k, self.l.iter().zip(&other.l).map(|(a, b)| a - b).collect())
    }

    /// Number of generic points a rational curve in this class can be made
    /// to pass through: `3k − 1 − Σ l_j`.
    pub fn point_conditions(&self) -> i64 {
        3 * self.k - 1 - self.l.iter().sum::<i64>()
    }
}

impl fmt::Display for BlowupClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let term = |c: i64, name: &str, first: bool| -> String {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag == 1 { format!("{sign}{name}") } else { format!("{sign}{mag}{name}") }
        };
        if self.k != 0 {
            out.push_str(&term(self.k, "L", true));
        }
        let single = self.l.len() == 1;
        for (j, &lj) in self.l.iter().enumerate() {
            if lj != 0 {
                let name = if single { "E".to_string() } else { format!("E{}", j + 1) };
                out.push_str(&term(-lj, &name, out.is_empty()));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// `(k − 1)(k − 2)/2 − Σ l_j (l_j − 1)/2`.
pub fn genus(c: &BlowupClass) -> i64 {
    (c.k - 1) * (c.k - 2) / 2 - c.l.iter().map(|l| l * (l - 1) / 2).sum::<i64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    /// Require `A_i · A_m ≥ 0` for distinct parts.
    pub pairwise_nonnegative: bool,
}

impl Default for Constraints {
    fn default() -> Self {
        Self { pairwise_nonnegative: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tag {
    AdjunctionFail,
    Genericity,
    Survives,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartVerdict {
    pub class: String,
    pub genus: i64,
    pub point_conditions: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag: Option<Tag>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub parts: Vec<PartVerdict>,
    pub tags: Vec<Tag>,
    /// One line per triggered rule.
    pub reasons: Vec<String>,
}

impl Verdicts {
    pub fn survives(&self) -> bool {
        self.tags == [Tag::Survives]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassDecomposition {
    /// Parts in ascending `(k, l)` order.
    pub parts: Vec<BlowupClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Verdicts>,
}

impl ClassDecomposition {
    pub fn sum(&self) -> Option<BlowupClass> {
        let first = self.parts.first()?;
        let mut total = BlowupClass::new(0, vec![0; first.l.len()]);
        for p in &self.parts {
            total.k += p.k;
            for (t, x) in total.l.iter_mut().zip(&p.l) {
                *t += x;
            }
        }
        Some(total)
    }

    pub fn labels(&self) -> Vec<String> {
        self.parts.iter().map(ToString::to_string).collect()
    }
}

/// All classes a part may take: `1 ≤ k ≤ k(target)`, `0 ≤ l_j ≤ l_j(target)`.
fn candidate_parts(target: &BlowupClass) -> Vec<BlowupClass> {
    if target.k < 1 || target.l.iter().any(|&l| l < 0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for k in 1..=target.k {
        let mut l = vec![0i64; target.l.len()];
        loop {
            out.push(BlowupClass::new(k, l.clone()));
            // odometer over the l box
            let mut j = 0;
            while j < l.len() {
                if l[j] < target.l[j] {
                    l[j] += 1;
                    break;
                }
                l[j] = 0;
                j += 1;
            }
            if j == l.len() {
                break;
            }
        }
    }
    out.sort();
    out
}

fn extend(
    candidates: &[BlowupClass],
    start: usize,
    remaining: &BlowupClass,
    chosen: &mut Vec<BlowupClass>,
    max_parts: usize,
    constraints: &Constraints,
    out: &mut Vec<ClassDecomposition>,
) {
    if remaining.is_zero() {
        if chosen.len() >= 2 {
            out.push(ClassDecomposition { parts: chosen.clone(), verdicts: None });
        }
        return;
    }
    if chosen.len() == max_parts {
        return;
    }
    for (i, c) in candidates.iter().enumerate().skip(start) {
        let rest = remaining.sub(c);
        if rest.k < 0 || rest.l.iter().any(|&x| x < 0) {
            continue;
        }
        if constraints.pairwise_nonnegative && chosen.iter().any(|p| p.dot(c) < 0) {
            continue;
        }
        chosen.push(c.clone());
        extend(candidates, i, &rest, chosen, max_parts, constraints, out);
        chosen.pop();
    }
}

/// Every multiset of at least two parts summing to `target`, each listed once
/// in canonical order. The search is split over the choice of first part.
pub fn enumerate_decompositions(
    target: &BlowupClass,
    max_parts: usize,
    constraints: &Constraints,
    exec: Execution,
) -> Result<Vec<ClassDecomposition>> {
    if max_parts < 2 {
        return Err(Error::InvalidInput("max_parts must be at least 2".into()));
    }
    let candidates = candidate_parts(target);
    let per_first = par::map_indexed(candidates.len(), exec, |i| {
        let mut out = Vec::new();
        let first = &candidates[i];
        let rest = target.sub(first);
        if rest.k >= 0 && rest.l.iter().all(|&x| x >= 0) {
            let mut chosen = vec![first.clone()];
            extend(&candidates, i, &rest, &mut chosen, max_parts, constraints, &mut out);
        }
        out
    });
    let mut all: Vec<ClassDecomposition> = per_first.into_iter().flatten().collect();
    all.sort_by(|a, b| a.parts.cmp(&b.parts));
    Ok(all)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Point conditions the parts must carry together to survive. Defaults
    /// to those of the target class.
    pub point_budget: Option<i64>,
}

/// Tags parts of negative genus with `ADJUNCTION_FAIL`, and the whole
/// decomposition with `GENERICITY` when its parts together pass through
/// fewer generic points than the target must; `SURVIVES` if neither fires.
/// The genericity rule is a coarse point count and only advisory.
pub fn apply_filters(d: &ClassDecomposition, config: &FilterConfig) -> Verdicts {
    let mut tags = Vec::new();
    let mut reasons = Vec::new();
    let parts: Vec<PartVerdict> = d
        .parts
        .iter()
        .map(|p| {
            let g = genus(p);
            let tag = (g < 0).then_some(Tag::AdjunctionFail);
            if tag.is_some() {
                reasons.push(format!("{p} has genus {g} < 0"));
            }
            PartVerdict { class: p.to_string(), genus: g, point_conditions: p.point_conditions(), tag }
        })
        .collect();
    if parts.iter().any(|p| p.tag.is_some()) {
        tags.push(Tag::AdjunctionFail);
    }

    let budget = config
        .point_budget
        .or_else(|| d.sum().map(|t| t.point_conditions()))
        .unwrap_or(0);
    let carried: i64 = d.parts.iter().map(|p| p.point_conditions().max(0)).sum();
    if carried < budget {
        tags.push(Tag::Genericity);
        reasons.push(format!("parts carry {carried} point conditions, need {budget}"));
    }
    if tags.is_empty() {
        tags.push(Tag::Survives);
    }
    Verdicts { parts, tags, reasons }
}

pub fn with_filters(mut list: Vec<ClassDecomposition>, config: &FilterConfig) -> Vec<ClassDecomposition> {
    for d in &mut list {
        d.verdicts = Some(apply_filters(d, config));
    }
    list
}
