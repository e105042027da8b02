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

//! Traffic-signal policy scenario: car drivers and pedestrians vote on four
//! signalling options whose discrimination profiles obey fixed orderings.
//!
//! Magnitudes in the default fixture are chosen by this crate; only the
//! orderings between the two societies are constrained.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::discrimination::{
    social_power_order, Agent, DiscriminationFunction, PowerRank, Scalarization, SocialUniverse,
    Society, TraitVector, DEFAULT_UTILITY_TRAIT,
};
use crate::election::{tallies, ApprovalElection, Ballot, CandidateId};
use crate::error::{Error, Result};
use crate::mwsr::av_top_k;
use crate::pipelines::{oav_csi, pnm_tav, sd_scalar, PipelineConfig, PipelineReport, StageParams};

pub const NONE: &str = "none";
pub const CROSS_WALKS: &str = "cross-walks";
pub const TRAFFIC_LIGHTS: &str = "traffic-lights";
pub const MIXED: &str = "mixed";
pub const OPTIONS: [&str; 4] = [NONE, CROSS_WALKS, TRAFFIC_LIGHTS, MIXED];

pub const CARS: &str = "cars";
pub const PEDESTRIANS: &str = "pedestrians";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioRule {
    AbsoluteMajority,
    LdmWsr,
}

/// Which discrimination-aware rule stands in for the less-discriminatory
/// majority rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LdmVariant {
    #[default]
    Oav,
    Pnm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallotTemplate {
    pub approve: Vec<String>,
    pub disapprove: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerSociety {
    pub cars: f64,
    pub pedestrians: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub car_count: usize,
    pub pedestrian_count: usize,
    pub options: Vec<String>,
    /// `option -> society -> vector`
    pub sd_table: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    /// Per-capita utility of each society once an option is in force.
    pub utility_table: BTreeMap<String, PerSociety>,
    /// Per-capita utility before any option is adopted.
    pub base_utility: PerSociety,
    pub car_ballot: BallotTemplate,
    pub pedestrian_ballot: BallotTemplate,
    pub rule: ScenarioRule,
    #[serde(default)]
    pub variant: LdmVariant,
    pub tau: f64,
    pub params: StageParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalarization: Option<Scalarization>,
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl ScenarioSpec {
    /// Built-in fixture. Drivers approve `none` and `cross-walks` and reject
    /// `traffic-lights`; pedestrians approve `traffic-lights` and `mixed`
    /// and reject `none`.
    pub fn fixture(car_count: usize, pedestrian_count: usize, rule: ScenarioRule) -> Self {
        let sd = |cars: [f64; 2], peds: [f64; 2]| -> BTreeMap<String, Vec<f64>> {
            [
                (CARS.to_owned(), cars.to_vec()),
                (PEDESTRIANS.to_owned(), peds.to_vec()),
            ]
            .into()
        };
        let pc = |cars: f64, pedestrians: f64| PerSociety { cars, pedestrians };
        ScenarioSpec {
            car_count,
            pedestrian_count,
            options: strs(&OPTIONS),
            sd_table: [
                (NONE.to_owned(), sd([0.1, 0.1], [0.8, 0.7])),
                (CROSS_WALKS.to_owned(), sd([0.2, 0.2], [0.5, 0.6])),
                (TRAFFIC_LIGHTS.to_owned(), sd([0.6, 0.5], [0.2, 0.3])),
                (MIXED.to_owned(), sd([0.3, 0.3], [0.3, 0.3])),
            ]
            .into(),
            utility_table: [
                (NONE.to_owned(), pc(1.0, 0.2)),
                (CROSS_WALKS.to_owned(), pc(0.9, 0.6)),
                (TRAFFIC_LIGHTS.to_owned(), pc(0.5, 0.9)),
                (MIXED.to_owned(), pc(0.8, 0.8)),
            ]
            .into(),
            base_utility: pc(1.0, 1.0),
            car_ballot: BallotTemplate {
                approve: strs(&[NONE, CROSS_WALKS]),
                disapprove: strs(&[TRAFFIC_LIGHTS]),
            },
            pedestrian_ballot: BallotTemplate {
                approve: strs(&[TRAFFIC_LIGHTS, MIXED]),
                disapprove: strs(&[NONE]),
            },
            rule,
            variant: LdmVariant::Oav,
            tau: 0.4,
            params: StageParams { l: 3, j: 2, k: 1 },
            scalarization: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the option set and the required orderings between the two
    /// societies' vectors; every violated inequality is listed.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.options != strs(&OPTIONS) {
            problems.push(format!("options must be {OPTIONS:?} in that order"));
        }
        if self.car_count == 0 || self.pedestrian_count == 0 {
            problems.push("both societies need at least one member".to_owned());
        }
        for (option, relation) in [
            (NONE, '<'),
            (CROSS_WALKS, '<'),
            (TRAFFIC_LIGHTS, '>'),
            (MIXED, '='),
        ] {
            let Some(row) = self.sd_table.get(option) else {
                problems.push(format!("sd_table lacks option `{option}`"));
                continue;
            };
            let (Some(c), Some(p)) = (row.get(CARS), row.get(PEDESTRIANS)) else {
                problems.push(format!(
                    "sd_table `{option}` needs `{CARS}` and `{PEDESTRIANS}` vectors"
                ));
                continue;
            };
            if c.len() != p.len() || c.is_empty() {
                problems.push(format!("sd_table `{option}` vectors differ in length"));
                continue;
            }
            let holds = match relation {
                '<' => c.iter().zip(p).all(|(a, b)| a < b),
                '>' => c.iter().zip(p).all(|(a, b)| a > b),
                _ => c == p,
            };
            if !holds {
                problems.push(format!(
                    "violated: SD(cars) {relation} SD(pedestrians) under `{option}`"
                ));
            }
            if !self.utility_table.contains_key(option) {
                problems.push(format!("utility_table lacks option `{option}`"));
            }
        }
        if !(0.0..=1.0).contains(&self.tau) {
            problems.push(format!("tau {} outside [0,1]", self.tau));
        }
        if let Err(e) = self.params.validate() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    fn dimension(&self) -> usize {
        self.sd_table
            .values()
            .flat_map(|r| r.values())
            .map(Vec::len)
            .next()
            .unwrap_or(1)
    }

    pub fn election(&self) -> ApprovalElection {
        let ballot = |voter: String, t: &BallotTemplate| {
            Ballot::new(
                voter,
                t.approve.iter().map(String::as_str),
                t.disapprove.iter().map(String::as_str),
            )
        };
        let mut ballots = Vec::with_capacity(self.car_count + self.pedestrian_count);
        ballots.extend((1..=self.car_count).map(|i| ballot(format!("car_{i}"), &self.car_ballot)));
        ballots.extend(
            (1..=self.pedestrian_count)
                .map(|i| ballot(format!("pedestrian_{i}"), &self.pedestrian_ballot)),
        );
        ApprovalElection::new(
            self.options
                .iter()
                .map(|o| CandidateId::new(o.as_str()))
                .collect(),
            ballots,
        )
    }

    /// Universe whose agents carry the given per-capita utilities.
    pub fn universe(&self, utility: PerSociety) -> SocialUniverse {
        let agent = |id: String, u: f64| Agent {
            id,
            traits: TraitVector {
                values: [(DEFAULT_UTILITY_TRAIT.to_owned(), u)].into(),
            },
            sdp: None,
            pd: None,
        };
        let cars: Vec<String> = (1..=self.car_count).map(|i| format!("car_{i}")).collect();
        let peds: Vec<String> = (1..=self.pedestrian_count)
            .map(|i| format!("pedestrian_{i}"))
            .collect();
        let agents = cars
            .iter()
            .map(|id| agent(id.clone(), utility.cars))
            .chain(peds.iter().map(|id| agent(id.clone(), utility.pedestrians)))
            .collect();
        let society = |id: &str, members: Vec<String>| Society {
            id: id.to_owned(),
            members,
            trait_weights: [(DEFAULT_UTILITY_TRAIT.to_owned(), 1.0)].into(),
        };
        SocialUniverse {
            dimension: self.dimension(),
            agents,
            societies: vec![society(CARS, cars), society(PEDESTRIANS, peds)],
            sd: DiscriminationFunction {
                axes: Vec::new(),
                points: self.sd_table.clone(),
            },
            sdp_bank: BTreeMap::new(),
            pd_functions: BTreeMap::new(),
            knowledge_map: None,
            scalarization: self.scalarization.clone(),
            embedding: BTreeMap::new(),
            utility_trait: DEFAULT_UTILITY_TRAIT.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub option: String,
    pub approve: usize,
    pub disapprove: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub spec: ScenarioSpec,
    pub winners: Vec<String>,
    pub tallies: Vec<Tally>,
    pub sd_scalars: BTreeMap<String, f64>,
    /// `"<"`, `">"` or `"="` comparing the cars vector to the pedestrians
    /// vector componentwise; `"~"` when neither dominates.
    pub sd_relation: BTreeMap<String, String>,
    pub social_power_before: Vec<PowerRank>,
    pub social_power_after: Vec<PowerRank>,
    /// Whether the winner is approved by more than half of the voters.
    pub absolute_majority: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineReport>,
}

impl ScenarioReport {
    pub fn power_tie_before(&self) -> bool {
        self.social_power_before.iter().all(|r| r.tied)
    }

    pub fn power_tie_after(&self) -> bool {
        self.social_power_after.iter().all(|r| r.tied)
    }
}

fn relation(c: &[f64], p: &[f64]) -> &'static str {
    if c == p {
        "="
    } else if c.iter().zip(p).all(|(a, b)| a <= b) {
        "<"
    } else if c.iter().zip(p).all(|(a, b)| a >= b) {
        ">"
    } else {
        "~"
    }
}

pub fn run_traffic_scenario(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    spec.validate()?;
    let election = spec.election();
    election.ensure_valid()?;
    let before = spec.universe(spec.base_utility);
    let scal = spec
        .scalarization
        .clone()
        .unwrap_or_else(|| Scalarization::uniform(before.dimension));
    let mut cfg = PipelineConfig::for_universe(&before);
    cfg.scalarization = scal.clone();

    let (winners, pipeline) = match spec.rule {
        ScenarioRule::AbsoluteMajority => (av_top_k(&election, spec.params.k)?, None),
        ScenarioRule::LdmWsr => {
            let report = match spec.variant {
                LdmVariant::Oav => oav_csi(&before, &election, spec.params.k, spec.tau, &cfg)?,
                LdmVariant::Pnm => pnm_tav(&before, &election, spec.params, &cfg)?,
            };
            (report.final_committee.clone(), Some(report))
        }
    };
    let winners: Vec<String> = winners.members.iter().map(|c| c.0.clone()).collect();

    let tallies: Vec<Tally> = tallies(&election)
        .into_iter()
        .map(|(c, approve, disapprove)| Tally {
            option: c.0,
            approve,
            disapprove,
        })
        .collect();
    let voters = election.ballots.len();
    let absolute_majority = winners.first().is_some_and(|w| {
        tallies
            .iter()
            .find(|t| &t.option == w)
            .is_some_and(|t| 2 * t.approve > voters)
    });

    let mut sd_scalars = BTreeMap::new();
    let mut sd_relation = BTreeMap::new();
    for o in &spec.options {
        sd_scalars.insert(o.clone(), sd_scalar(&before, o, &scal)?);
        let row = &spec.sd_table[o];
        sd_relation.insert(
            o.clone(),
            relation(&row[CARS], &row[PEDESTRIANS]).to_owned(),
        );
    }

    let after_utility = winners
        .first()
        .and_then(|w| spec.utility_table.get(w))
        .copied()
        .unwrap_or(spec.base_utility);
    Ok(ScenarioReport {
        spec: spec.clone(),
        winners,
        tallies,
        sd_scalars,
        sd_relation,
        social_power_before: social_power_order(&before)?,
        social_power_after: social_power_order(&spec.universe(after_utility))?,
        absolute_majority,
        pipeline,
    })
}
