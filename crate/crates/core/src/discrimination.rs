// Copyright 2026 The csi-opt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Social universe model: agents with traits, societies, table-driven
//! discrimination functions, profiles, knowledge maps and the social power
//! ordering.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_UTILITY_TRAIT: &str = "utility";

/// Optional trait added to social utility when present.
pub const PARTICIPATION_TRAIT: &str = "participation";

/// Context key under which a point's aggregated vector may be stored.
pub const DEFAULT_CONTEXT: &str = "*";

const WEIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraitVector {
    pub values: BTreeMap<String, f64>,
}

impl TraitVector {
    pub fn get(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SdpRef {
    Named(String),
    Inline(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: String,
    pub traits: TraitVector,
    /// Missing profile means all-ones (no reweighting).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdp: Option<SdpRef>,
    /// Key into the universe's preference-discrimination functions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Society {
    pub id: String,
    pub members: Vec<String>,
    pub trait_weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdProfile {
    pub vector: Vec<f64>,
}

/// Lookup interface for discrimination vectors; [`DiscriminationFunction`]
/// is the table-backed implementation.
pub trait SdSource {
    fn dimension(&self) -> usize;

    /// Vector for `point`, optionally seen from one context (a society or
    /// agent id).
    fn evaluate(&self, point: &str, context: Option<&str>) -> Result<Vec<f64>>;
}

/// Table of discrimination vectors: `points[point][context] = [v1..vn]`.
///
/// Evaluating without a context returns the entry stored under `"*"` when
/// present, otherwise the componentwise maximum over all contexts of the
/// point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscriminationFunction {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<String>,
    pub points: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

impl DiscriminationFunction {
    pub fn point_ids(&self) -> impl Iterator<Item = &str> {
        self.points.keys().map(String::as_str)
    }

    pub fn contains(&self, point: &str) -> bool {
        self.points.contains_key(point)
    }

    fn check(&self, n: usize, what: &str, problems: &mut Vec<String>) {
        if !self.axes.is_empty() && self.axes.len() != n {
            problems.push(format!(
                "{what}: {} axes for dimension {n}",
                self.axes.len()
            ));
        }
        for (p, ctxs) in &self.points {
            if ctxs.is_empty() {
                problems.push(format!("{what}: point `{p}` has no vectors"));
            }
            for (c, v) in ctxs {
                if v.len() != n {
                    problems.push(format!(
                        "{what}: point `{p}` context `{c}` has length {}, expected {n}",
                        v.len()
                    ));
                }
                if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    problems.push(format!(
                        "{what}: point `{p}` context `{c}` has components outside [0,1]"
                    ));
                }
            }
        }
    }
}

impl SdSource for DiscriminationFunction {
    fn dimension(&self) -> usize {
        self.points
            .values()
            .flat_map(|c| c.values())
            .map(Vec::len)
            .next()
            .unwrap_or(self.axes.len())
    }

    fn evaluate(&self, point: &str, context: Option<&str>) -> Result<Vec<f64>> {
        let ctxs = self
            .points
            .get(point)
            .ok_or_else(|| Error::Domain(format!("no discrimination entry for point `{point}`")))?;
        if let Some(c) = context {
            return ctxs.get(c).cloned().ok_or_else(|| {
                Error::Domain(format!("point `{point}` has no entry for context `{c}`"))
            });
        }
        if let Some(v) = ctxs.get(DEFAULT_CONTEXT) {
            return Ok(v.clone());
        }
        let mut it = ctxs.values();
        let first = it
            .next()
            .ok_or_else(|| Error::Domain(format!("point `{point}` has no vectors")))?;
        Ok(it.fold(first.clone(), |acc, v| {
            acc.iter().zip(v).map(|(a, b)| a.max(*b)).collect()
        }))
    }
}

pub fn evaluate_sd<S: SdSource + ?Sized>(
    sd: &S,
    point: &str,
    context: Option<&str>,
) -> Result<Vec<f64>> {
    sd.evaluate(point, context)
}

/// `point -> (U, D)`: uncertainty and discrimination degree.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KnowledgeMap {
    pub entries: BTreeMap<String, (f64, f64)>,
}

impl KnowledgeMap {
    pub fn get(&self, point: &str) -> Option<(f64, f64)> {
        self.entries.get(point).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarizationMode {
    #[default]
    WeightedSum,
    Max,
}

/// Reduction of a discrimination vector to one cost, plus the uncertainty
/// penalty applied under a knowledge map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scalarization {
    #[serde(default)]
    pub mode: ScalarizationMode,
    #[serde(default)]
    pub weights: Vec<f64>,
    #[serde(default)]
    pub lambda_u: f64,
}

impl Scalarization {
    /// Weighted sum with weights `1/n`.
    pub fn uniform(n: usize) -> Self {
        Scalarization {
            mode: ScalarizationMode::WeightedSum,
            weights: vec![1.0 / n as f64; n],
            lambda_u: 0.0,
        }
    }

    pub fn max() -> Self {
        Scalarization {
            mode: ScalarizationMode::Max,
            weights: Vec::new(),
            lambda_u: 0.0,
        }
    }

    pub fn with_lambda(mut self, lambda_u: f64) -> Self {
        self.lambda_u = lambda_u;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_u >= 0.0 && self.lambda_u.is_finite()) {
            return Err(Error::InvalidParameter(
                "lambda_u must be finite and >= 0".into(),
            ));
        }
        if self.mode == ScalarizationMode::WeightedSum {
            if self.weights.iter().any(|w| w.is_nan() || *w < 0.0) {
                return Err(Error::InvalidParameter(
                    "scalarization weights must be >= 0".into(),
                ));
            }
            let total: f64 = self.weights.iter().sum();
            if (total - 1.0).abs() > WEIGHT_EPS {
                return Err(Error::InvalidParameter(format!(
                    "scalarization weights sum to {total}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

pub fn scalarize(v: &[f64], s: &Scalarization) -> Result<f64> {
    match s.mode {
        ScalarizationMode::WeightedSum => {
            if v.len() != s.weights.len() {
                return Err(Error::InvalidParameter(format!(
                    "vector of length {} against {} weights",
                    v.len(),
                    s.weights.len()
                )));
            }
            Ok(v.iter().zip(&s.weights).map(|(x, w)| x * w).sum())
        }
        ScalarizationMode::Max => Ok(v.iter().copied().fold(0.0, f64::max)),
    }
}

/// `D + lambda_u * U` for the knowledge-map entry of `point`.
pub fn pessimistic_cost(km: &KnowledgeMap, point: &str, s: &Scalarization) -> Result<f64> {
    let (u, d) = km
        .get(point)
        .ok_or_else(|| Error::Domain(format!("knowledge map has no entry for `{point}`")))?;
    Ok(d + s.lambda_u * u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialUniverse {
    pub dimension: usize,
    pub agents: Vec<Agent>,
    pub societies: Vec<Society>,
    #[serde(default)]
    pub sd: DiscriminationFunction,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sdp_bank: BTreeMap<String, SdProfile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pd_functions: BTreeMap<String, DiscriminationFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_map: Option<KnowledgeMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalarization: Option<Scalarization>,
    /// Coordinates of candidate points for continuous descent.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub embedding: BTreeMap<String, Vec<f64>>,
    #[serde(default = "default_utility_trait")]
    pub utility_trait: String,
}

fn default_utility_trait() -> String {
    DEFAULT_UTILITY_TRAIT.to_owned()
}

impl SocialUniverse {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let u: SocialUniverse = serde_json::from_str(s)?;
        u.validate()?;
        Ok(u)
    }

    /// Checks every type invariant, reporting all problems at once.
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        let mut problems = Vec::new();
        if n == 0 {
            problems.push("dimension must be at least 1".to_owned());
        }
        let mut ids = BTreeSet::new();
        for a in &self.agents {
            if !ids.insert(a.id.as_str()) {
                problems.push(format!("duplicate agent `{}`", a.id));
            }
            if !a.traits.values.contains_key(&self.utility_trait) {
                problems.push(format!(
                    "agent `{}` lacks utility trait `{}`",
                    a.id, self.utility_trait
                ));
            }
            if a.traits.values.values().any(|v| !v.is_finite()) {
                problems.push(format!("agent `{}` has non-finite traits", a.id));
            }
            match self.profile_of(a) {
                Ok(p) if p.len() != n => problems.push(format!(
                    "agent `{}` profile has length {}, expected {n}",
                    a.id,
                    p.len()
                )),
                Ok(p) if p.iter().any(|x| !(0.0..=1.0).contains(x)) => {
                    problems.push(format!("agent `{}` profile outside [0,1]", a.id))
                }
                Ok(_) => {}
                Err(e) => problems.push(e.to_string()),
            }
            if let Some(pd) = &a.pd {
                if !self.pd_functions.contains_key(pd) {
                    problems.push(format!("agent `{}` references unknown pd `{pd}`", a.id));
                }
            }
        }
        let mut soc_ids = BTreeSet::new();
        for s in &self.societies {
            if !soc_ids.insert(s.id.as_str()) {
                problems.push(format!("duplicate society `{}`", s.id));
            }
            if s.members.is_empty() {
                problems.push(format!("society `{}` has no members", s.id));
            }
            for m in &s.members {
                if !ids.contains(m.as_str()) {
                    problems.push(format!("society `{}` member `{m}` is not an agent", s.id));
                }
            }
            let total: f64 = s.trait_weights.values().sum();
            if s.trait_weights.values().any(|w| w.is_nan() || *w < 0.0)
                || (total - 1.0).abs() > WEIGHT_EPS
            {
                problems.push(format!(
                    "society `{}` trait weights must be nonnegative and sum to 1",
                    s.id
                ));
            }
        }
        self.sd.check(n, "sd", &mut problems);
        for (name, pd) in &self.pd_functions {
            pd.check(n, &format!("pd `{name}`"), &mut problems);
        }
        for (name, p) in &self.sdp_bank {
            if p.vector.iter().any(|x| !(0.0..=1.0).contains(x)) {
                problems.push(format!("profile `{name}` outside [0,1]"));
            }
        }
        if let Some(km) = &self.knowledge_map {
            for (p, (u, d)) in &km.entries {
                if !(0.0..=1.0).contains(u) || !(0.0..=1.0).contains(d) {
                    problems.push(format!("knowledge map entry `{p}` outside [0,1]"));
                }
            }
        }
        if let Some(s) = &self.scalarization {
            if let Err(e) = s.validate() {
                problems.push(e.to_string());
            } else if s.mode == ScalarizationMode::WeightedSum && s.weights.len() != n {
                problems.push(format!(
                    "scalarization has {} weights for dimension {n}",
                    s.weights.len()
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn agent(&self, id: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn society(&self, id: &str) -> Option<&Society> {
        self.societies.iter().find(|s| s.id == id)
    }

    /// Configured scalarization, defaulting to a uniform weighted sum.
    pub fn scalarization(&self) -> Scalarization {
        self.scalarization
            .clone()
            .unwrap_or_else(|| Scalarization::uniform(self.dimension))
    }

    pub fn profile_of(&self, a: &Agent) -> Result<Vec<f64>> {
        match &a.sdp {
            None => Ok(vec![1.0; self.dimension]),
            Some(SdpRef::Inline(v)) => Ok(v.clone()),
            Some(SdpRef::Named(name)) => self
                .sdp_bank
                .get(name)
                .map(|p| p.vector.clone())
                .ok_or_else(|| {
                    Error::Integrity(format!(
                        "agent `{}` references unknown profile `{name}`",
                        a.id
                    ))
                }),
        }
    }

    /// Arithmetic mean of all agents' profiles; all ones for an empty
    /// universe.
    pub fn mean_profile(&self) -> Result<Vec<f64>> {
        let n = self.dimension;
        if self.agents.is_empty() {
            return Ok(vec![1.0; n]);
        }
        let mut acc = vec![0.0; n];
        for a in &self.agents {
            let p = self.profile_of(a)?;
            if p.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "agent `{}` profile length {} differs from dimension {n}",
                    a.id,
                    p.len()
                )));
            }
            for (x, y) in acc.iter_mut().zip(p) {
                *x += y;
            }
        }
        let m = self.agents.len() as f64;
        Ok(acc.into_iter().map(|x| x / m).collect())
    }
}

/// Sum over members of the weighted traits, plus each member's
/// `participation` trait when the society does not already weight it.
pub fn social_utility(u: &SocialUniverse, soc: &Society) -> Result<f64> {
    let mut total = 0.0;
    for m in &soc.members {
        let a = u.agent(m).ok_or_else(|| {
            Error::Integrity(format!("society `{}` member `{m}` not found", soc.id))
        })?;
        total += soc
            .trait_weights
            .iter()
            .map(|(t, w)| w * a.traits.get(t))
            .sum::<f64>();
        if !soc.trait_weights.contains_key(PARTICIPATION_TRAIT) {
            total += a.traits.get(PARTICIPATION_TRAIT);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRank {
    pub society: String,
    pub utility: f64,
    /// Set when another society has exactly the same utility.
    pub tied: bool,
}

/// Societies by social utility, descending; equal utilities fall back to
/// society id order and are flagged as tied.
pub fn social_power_order(u: &SocialUniverse) -> Result<Vec<PowerRank>> {
    if u.societies.is_empty() {
        return Err(Error::InvalidParameter("universe has no societies".into()));
    }
    let mut ranks = u
        .societies
        .iter()
        .map(|s| {
            Ok(PowerRank {
                society: s.id.clone(),
                utility: social_utility(u, s)?,
                tied: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranks.sort_by(|a, b| {
        b.utility
            .total_cmp(&a.utility)
            .then_with(|| a.society.cmp(&b.society))
    });
    for i in 0..ranks.len() {
        let tied = (i > 0 && ranks[i - 1].utility == ranks[i].utility)
            || (i + 1 < ranks.len() && ranks[i + 1].utility == ranks[i].utility);
        ranks[i].tied = tied;
    }
    Ok(ranks)
}
