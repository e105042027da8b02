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

//! Brute-force reference answers: full committee enumeration, simple-path
//! enumeration and two-stage enumeration. These share no search code with
//! the fast rules and refuse instances above small hard caps.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::discrimination::{scalarize, Scalarization};
use crate::election::{ApprovalElection, CandidateId, Committee};
use crate::error::{Error, Result};
use crate::graph::{PathResult, PreferenceGraph};
use crate::mwsr::{PavWeights, RuleResult};

pub const MAX_ORACLE_CANDIDATES: usize = 12;
pub const MAX_ORACLE_NODES: usize = 8;

fn check_candidates(e: &ApprovalElection) -> Result<()> {
    if e.candidates.len() > MAX_ORACLE_CANDIDATES {
        return Err(Error::Capacity {
            what: "oracle candidate count",
            actual: e.candidates.len(),
            cap: MAX_ORACLE_CANDIDATES,
        });
    }
    Ok(())
}

/// All `k`-subsets of `0..n` as sorted index lists, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for t in i + 1..k {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

fn members(e: &ApprovalElection, idx: &[usize]) -> Vec<CandidateId> {
    idx.iter().map(|&i| e.candidates[i].clone()).collect()
}

fn direct_pav_score(
    e: &ApprovalElection,
    chosen: &[CandidateId],
    alpha: &[BigRational],
) -> BigRational {
    let chosen: BTreeSet<&CandidateId> = chosen.iter().collect();
    let mut total = BigRational::zero();
    for b in &e.ballots {
        let t = b.approve.iter().filter(|c| chosen.contains(c)).count();
        total = alpha[..t].iter().fold(total, |acc, a| acc + a);
    }
    total
}

/// Best PAV committee over every `k`-subset; the first optimum in
/// lexicographic order of member indices wins, `ties` counts all optima.
pub fn oracle_pav(e: &ApprovalElection, k: usize, w: &PavWeights) -> Result<RuleResult> {
    check_candidates(e)?;
    if k == 0 || k > e.candidates.len() || w.len() < k {
        return Err(Error::InvalidParameter(format!(
            "bad oracle committee size {k}"
        )));
    }
    let mut best: Option<(BigRational, Vec<CandidateId>)> = None;
    let mut ties = 0;
    for idx in combinations(e.candidates.len(), k) {
        let m = members(e, &idx);
        let s = direct_pav_score(e, &m, &w.alpha);
        match &best {
            Some((b, _)) if &s < b => {}
            Some((b, _)) if &s == b => ties += 1,
            _ => {
                best = Some((s, m));
                ties = 1;
            }
        }
    }
    let (objective, m) = best.expect("at least one committee");
    Ok(RuleResult {
        committee: Committee::new(m),
        objective,
        ties,
    })
}

/// Cheapest simple path from any source to `target` found by enumerating
/// every simple path. Ties prefer fewer edges, then the smaller id sequence.
pub fn oracle_path(
    g: &PreferenceGraph,
    sources: &[&str],
    target: &str,
    s: &Scalarization,
) -> Result<Option<PathResult>> {
    if g.nodes().len() > MAX_ORACLE_NODES {
        return Err(Error::Capacity {
            what: "oracle node count",
            actual: g.nodes().len(),
            cap: MAX_ORACLE_NODES,
        });
    }
    for id in sources.iter().chain([&target]) {
        if !g.contains(id) {
            return Err(Error::Domain(format!("unknown node `{id}`")));
        }
    }
    fn walk(
        g: &PreferenceGraph,
        s: &Scalarization,
        target: &str,
        path: &mut Vec<String>,
        cost: f64,
        best: &mut Option<(f64, Vec<String>)>,
    ) -> Result<()> {
        let here = path.last().expect("non-empty").clone();
        if here == target {
            let better = match best {
                None => true,
                Some((bc, bp)) => {
                    cost < *bc || (cost == *bc && (path.len(), &*path) < (bp.len(), &*bp))
                }
            };
            if better {
                *best = Some((cost, path.clone()));
            }
            return Ok(());
        }
        for e in g.edges().iter().filter(|e| e.from == here) {
            if path.contains(&e.to) {
                continue;
            }
            let c = scalarize(&e.cost_vector, s)?;
            path.push(e.to.clone());
            walk(g, s, target, path, cost + c, best)?;
            path.pop();
        }
        Ok(())
    }
    let mut best = None;
    for src in sources {
        walk(g, s, target, &mut vec![(*src).to_owned()], 0.0, &mut best)?;
    }
    Ok(best.map(|(cost, path)| PathResult { path, cost }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageAnswer {
    pub stage1: Committee,
    #[serde(rename = "final")]
    pub final_committee: Committee,
}

/// Stage one: the `l`-subset with the most approvals in total; stage two:
/// the `k`-subset of it with the fewest disapprovals in total. Both stages
/// take the first optimum in lexicographic index order.
pub fn oracle_minimax_tav(e: &ApprovalElection, l: usize, k: usize) -> Result<TwoStageAnswer> {
    check_candidates(e)?;
    if !(e.candidates.len() >= l && l > k && k >= 1) {
        return Err(Error::InvalidParameter(
            "oracle needs |C| >= l > k >= 1".into(),
        ));
    }
    let count = |c: &CandidateId, approve: bool| {
        e.ballots
            .iter()
            .filter(|b| {
                if approve {
                    b.approve.contains(c)
                } else {
                    b.disapprove.contains(c)
                }
            })
            .count()
    };
    let approvals: Vec<usize> = e.candidates.iter().map(|c| count(c, true)).collect();
    let disapprovals: Vec<usize> = e.candidates.iter().map(|c| count(c, false)).collect();

    // max_by_key keeps the last maximum, so walk the subsets backwards.
    let stage1 = combinations(e.candidates.len(), l)
        .into_iter()
        .rev()
        .max_by_key(|idx| idx.iter().map(|&i| approvals[i]).sum::<usize>())
        .expect("l <= |C|");
    let pick = combinations(l, k)
        .into_iter()
        .min_by_key(|sub| sub.iter().map(|&t| disapprovals[stage1[t]]).sum::<usize>())
        .expect("k < l");
    let final_idx: Vec<usize> = pick.iter().map(|&t| stage1[t]).collect();
    Ok(TwoStageAnswer {
        stage1: Committee::new(members(e, &stage1)),
        final_committee: Committee::new(members(e, &final_idx)),
    })
}
