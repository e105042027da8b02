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

//! Approval elections carrying both approval and disapproval sets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(pub String);

impl CandidateId {
    pub fn new(id: impl Into<String>) -> Self {
        CandidateId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CandidateId {
    fn from(s: &str) -> Self {
        CandidateId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ballot {
    #[serde(rename = "voter")]
    pub voter_id: String,
    #[serde(default)]
    pub approve: BTreeSet<CandidateId>,
    #[serde(default)]
    pub disapprove: BTreeSet<CandidateId>,
}

impl Ballot {
    pub fn new<'a>(
        voter: impl Into<String>,
        approve: impl IntoIterator<Item = &'a str>,
        disapprove: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Ballot {
            voter_id: voter.into(),
            approve: approve.into_iter().map(CandidateId::from).collect(),
            disapprove: disapprove.into_iter().map(CandidateId::from).collect(),
        }
    }
}

/// Candidates plus ballots. The candidate order is the global tie-break
/// order: earlier candidates win ties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApprovalElection {
    pub candidates: Vec<CandidateId>,
    #[serde(default)]
    pub ballots: Vec<Ballot>,
}

impl ApprovalElection {
    pub fn new(candidates: Vec<CandidateId>, ballots: Vec<Ballot>) -> Self {
        ApprovalElection {
            candidates,
            ballots,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Reads `voter,a|b,c` rows. Without an explicit candidate list the
    /// candidates are taken in order of first appearance.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        candidates: Option<Vec<CandidateId>>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut ballots = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let voter = record.get(0).unwrap_or("").to_owned();
            if row == 0 && voter.eq_ignore_ascii_case("voter") {
                continue;
            }
            if voter.is_empty() {
                return Err(Error::Parse(format!("row {}: empty voter id", row + 1)));
            }
            let split = |field: Option<&str>| -> BTreeSet<CandidateId> {
                field
                    .unwrap_or("")
                    .split('|')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(CandidateId::from)
                    .collect()
            };
            ballots.push(Ballot {
                voter_id: voter,
                approve: split(record.get(1)),
                disapprove: split(record.get(2)),
            });
        }
        let candidates = candidates.unwrap_or_else(|| {
            let mut seen = BTreeSet::new();
            let mut order = Vec::new();
            for b in &ballots {
                for c in b.approve.iter().chain(&b.disapprove) {
                    if seen.insert(c.clone()) {
                        order.push(c.clone());
                    }
                }
            }
            order
        });
        Ok(ApprovalElection {
            candidates,
            ballots,
        })
    }

    pub fn index_of(&self, c: &str) -> Option<usize> {
        self.candidates.iter().position(|x| x.0 == c)
    }

    pub(crate) fn index_map(&self) -> HashMap<&str, usize> {
        self.candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect()
    }

    pub(crate) fn require(&self, c: &str) -> Result<usize> {
        self.index_of(c)
            .ok_or_else(|| Error::UnknownCandidate(c.to_owned()))
    }

    /// Approval sets as sorted candidate indices. Unknown candidates are
    /// dropped; callers validate first.
    pub(crate) fn approval_indices(&self) -> Vec<Vec<usize>> {
        let idx = self.index_map();
        self.ballots
            .iter()
            .map(|b| {
                let mut v: Vec<usize> = b
                    .approve
                    .iter()
                    .filter_map(|c| idx.get(c.as_str()).copied())
                    .collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    /// The same ballots over a sub-list of candidates, in global order.
    /// Approvals and disapprovals of dropped candidates are removed.
    pub fn restrict_to(&self, keep: &[CandidateId]) -> Result<ApprovalElection> {
        let mut flags = vec![false; self.candidates.len()];
        for c in keep {
            flags[self.require(c.as_str())?] = true;
        }
        let candidates: Vec<CandidateId> = self
            .candidates
            .iter()
            .zip(&flags)
            .filter(|(_, &f)| f)
            .map(|(c, _)| c.clone())
            .collect();
        let kept: BTreeSet<&CandidateId> = candidates.iter().collect();
        let ballots = self
            .ballots
            .iter()
            .map(|b| Ballot {
                voter_id: b.voter_id.clone(),
                approve: b
                    .approve
                    .iter()
                    .filter(|c| kept.contains(c))
                    .cloned()
                    .collect(),
                disapprove: b
                    .disapprove
                    .iter()
                    .filter(|c| kept.contains(c))
                    .cloned()
                    .collect(),
            })
            .collect();
        Ok(ApprovalElection {
            candidates,
            ballots,
        })
    }

    /// Fails with a validation error listing every violation.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_election(self);
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(
                report.iter().map(|v| v.to_string()).collect(),
            ))
        }
    }
}

/// A winner set. Members are kept in the election's candidate order when
/// built through the rules; equality is set equality.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
pub struct Committee {
    pub members: Vec<CandidateId>,
    pub size: usize,
}

impl Committee {
    pub fn new(members: Vec<CandidateId>) -> Self {
        let size = members.len();
        Committee { members, size }
    }

    pub fn empty() -> Self {
        Committee::new(Vec::new())
    }

    pub(crate) fn from_indices(e: &ApprovalElection, idx: &[usize]) -> Self {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        Committee::new(idx.iter().map(|&i| e.candidates[i].clone()).collect())
    }

    pub fn contains(&self, c: &str) -> bool {
        self.members.iter().any(|m| m.0 == c)
    }

    pub fn is_subset_of(&self, other: &Committee) -> bool {
        self.members.iter().all(|m| other.contains(m.as_str()))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.members.iter().map(CandidateId::as_str).collect()
    }
}

impl PartialEq for Committee {
    fn eq(&self, other: &Self) -> bool {
        let a: BTreeSet<_> = self.members.iter().collect();
        let b: BTreeSet<_> = other.members.iter().collect();
        a == b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    EmptyCandidateId,
    DuplicateCandidate,
    UnknownCandidate,
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// `None` for violations of the candidate list itself.
    pub ballot: Option<usize>,
    pub kind: ViolationKind,
    pub candidate: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::EmptyCandidateId => "empty candidate id",
            ViolationKind::DuplicateCandidate => "duplicate candidate",
            ViolationKind::UnknownCandidate => "unknown candidate",
            ViolationKind::Overlap => "candidate both approved and disapproved",
        };
        match self.ballot {
            Some(b) => write!(f, "ballot {b}: {what} `{}`", self.candidate),
            None => write!(f, "candidates: {what} `{}`", self.candidate),
        }
    }
}

/// One entry per invariant violation; an empty report means the election is
/// well formed.
pub fn validate_election(election: &ApprovalElection) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for c in &election.candidates {
        if c.0.is_empty() {
            out.push(Violation {
                ballot: None,
                kind: ViolationKind::EmptyCandidateId,
                candidate: String::new(),
            });
        } else if !seen.insert(c.as_str()) {
            out.push(Violation {
                ballot: None,
                kind: ViolationKind::DuplicateCandidate,
                candidate: c.0.clone(),
            });
        }
    }
    for (i, b) in election.ballots.iter().enumerate() {
        for c in b.approve.iter().chain(&b.disapprove) {
            if !seen.contains(c.as_str()) {
                out.push(Violation {
                    ballot: Some(i),
                    kind: ViolationKind::UnknownCandidate,
                    candidate: c.0.clone(),
                });
            }
        }
        for c in b.approve.intersection(&b.disapprove) {
            out.push(Violation {
                ballot: Some(i),
                kind: ViolationKind::Overlap,
                candidate: c.0.clone(),
            });
        }
    }
    out
}

pub fn approval_score(election: &ApprovalElection, c: &str) -> Result<usize> {
    election.require(c)?;
    Ok(election
        .ballots
        .iter()
        .filter(|b| b.approve.iter().any(|x| x.0 == c))
        .count())
}

pub fn disapproval_score(election: &ApprovalElection, c: &str) -> Result<usize> {
    election.require(c)?;
    Ok(election
        .ballots
        .iter()
        .filter(|b| b.disapprove.iter().any(|x| x.0 == c))
        .count())
}

/// Approval and disapproval counts for every candidate, in candidate order.
pub fn tallies(election: &ApprovalElection) -> Vec<(CandidateId, usize, usize)> {
    let idx = election.index_map();
    let mut approve = vec![0usize; election.candidates.len()];
    let mut disapprove = vec![0usize; election.candidates.len()];
    for b in &election.ballots {
        for c in &b.approve {
            if let Some(&i) = idx.get(c.as_str()) {
                approve[i] += 1;
            }
        }
        for c in &b.disapprove {
            if let Some(&i) = idx.get(c.as_str()) {
                disapprove[i] += 1;
            }
        }
    }
    election
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), approve[i], disapprove[i]))
        .collect()
}
