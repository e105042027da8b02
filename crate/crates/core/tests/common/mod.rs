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

//! Generators and brute-force references shared by the integration tests.
//! Nothing here calls into the search code it is used to check.

#![allow(dead_code)]

use csi_core::{
    ApprovalElection, Ballot, CandidateId, PrefEdge, PrefNode, PreferenceGraph, SocialUniverse,
};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i:02}")).collect()
}

/// Every `k`-subset of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Approval-only election; each voter approves each candidate with a
/// per-election probability.
pub fn approval_election(r: &mut ChaCha8Rng, max_c: usize, max_v: usize) -> ApprovalElection {
    let m = r.random_range(1..=max_c);
    let v = r.random_range(1..=max_v);
    let p: f64 = r.random_range(0.1..0.7);
    let cands = names(m);
    let ballots = (0..v)
        .map(|i| {
            let approve: Vec<&str> = cands
                .iter()
                .filter(|_| r.random_bool(p))
                .map(String::as_str)
                .collect();
            Ballot::new(format!("v{i}"), approve, [])
        })
        .collect();
    ApprovalElection::new(
        cands.iter().map(|c| CandidateId::new(c.as_str())).collect(),
        ballots,
    )
}

/// Ballots with both approvals and disapprovals (never of the same candidate).
pub fn trinary_election(
    r: &mut ChaCha8Rng,
    min_c: usize,
    max_c: usize,
    max_v: usize,
) -> ApprovalElection {
    let m = r.random_range(min_c..=max_c);
    let v = r.random_range(1..=max_v);
    let cands = names(m);
    let ballots = (0..v)
        .map(|i| {
            let mut approve = Vec::new();
            let mut reject = Vec::new();
            for c in &cands {
                match r.random_range(0..3) {
                    0 => approve.push(c.as_str()),
                    1 => reject.push(c.as_str()),
                    _ => {}
                }
            }
            Ballot::new(format!("v{i}"), approve, reject)
        })
        .collect();
    ApprovalElection::new(
        cands.iter().map(|c| CandidateId::new(c.as_str())).collect(),
        ballots,
    )
}

fn approved(e: &ApprovalElection) -> Vec<Vec<bool>> {
    e.ballots
        .iter()
        .map(|b| e.candidates.iter().map(|c| b.approve.contains(c)).collect())
        .collect()
}

fn disapproved(e: &ApprovalElection) -> Vec<Vec<bool>> {
    e.ballots
        .iter()
        .map(|b| {
            e.candidates
                .iter()
                .map(|c| b.disapprove.contains(c))
                .collect()
        })
        .collect()
}

/// Harmonic PAV value of a committee given by candidate indices.
pub fn pav_value(e: &ApprovalElection, committee: &[usize]) -> BigRational {
    let mut total = BigRational::zero();
    for row in approved(e) {
        let hits = committee.iter().filter(|&&c| row[c]).count();
        for i in 1..=hits {
            total += BigRational::new(1.into(), (i as i64).into());
        }
    }
    total
}

pub fn indices_of(e: &ApprovalElection, ids: &[&str]) -> Vec<usize> {
    ids.iter()
        .map(|id| {
            e.candidates
                .iter()
                .position(|c| c.as_str() == *id)
                .expect("known candidate")
        })
        .collect()
}

/// Best harmonic PAV value over all `k`-subsets, with the lexicographically
/// first subset reaching it and how many subsets reach it.
pub fn brute_pav(e: &ApprovalElection, k: usize) -> (BigRational, Vec<usize>, usize) {
    let mut best: Option<(BigRational, Vec<usize>, usize)> = None;
    for s in subsets(e.candidates.len(), k) {
        let v = pav_value(e, &s);
        best = match best {
            Some((b, w, n)) if v < b => Some((b, w, n)),
            Some((b, w, n)) if v == b => Some((b, w, n + 1)),
            _ => Some((v, s, 1)),
        };
    }
    best.expect("k <= m")
}

/// Two-stage reference: the lexicographically first `l`-subset with the
/// most approvals, then its lexicographically first `k`-subset with the
/// fewest disapprovals.
pub fn brute_minimax(e: &ApprovalElection, l: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
    let app = approved(e);
    let dis = disapproved(e);
    let count = |rows: &Vec<Vec<bool>>, set: &[usize]| -> usize {
        rows.iter()
            .map(|r| set.iter().filter(|&&c| r[c]).count())
            .sum()
    };
    let mut stage1: Option<(usize, Vec<usize>)> = None;
    for s in subsets(e.candidates.len(), l) {
        let v = count(&app, &s);
        if stage1.as_ref().is_none_or(|(b, _)| v > *b) {
            stage1 = Some((v, s));
        }
    }
    let stage1 = stage1.expect("l <= m").1;
    let mut stage2: Option<(usize, Vec<usize>)> = None;
    for pick in subsets(l, k) {
        let s: Vec<usize> = pick.iter().map(|&i| stage1[i]).collect();
        let v = count(&dis, &s);
        if stage2.as_ref().is_none_or(|(b, _)| v < *b) {
            stage2 = Some((v, s));
        }
    }
    (stage1, stage2.expect("k <= l").1)
}

/// Random directed graph over `n` nodes with one-dimensional costs in [0,1].
pub fn random_graph(
    r: &mut ChaCha8Rng,
    n: usize,
    density: f64,
) -> (PreferenceGraph, Vec<(usize, usize, f64)>) {
    let ids = names(n);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && r.random_bool(density) {
                // Occasional exact zeros and repeats exercise tie handling.
                let c = match r.random_range(0..10) {
                    0 => 0.0,
                    1 => 0.5,
                    _ => r.random_range(0.0..=1.0),
                };
                edges.push((a, b, c));
            }
        }
    }
    let g = PreferenceGraph::new(
        1,
        ids.iter().map(|i| PrefNode::new(i.as_str())).collect(),
        edges
            .iter()
            .map(|&(a, b, c)| PrefEdge::new(&ids[a], &ids[b], vec![c]))
            .collect(),
    )
    .expect("generated graph is valid");
    (g, edges)
}

/// Cheapest simple path from any source to `target` by enumerating all
/// simple paths.
pub fn brute_path(
    n: usize,
    edges: &[(usize, usize, f64)],
    sources: &[usize],
    target: usize,
) -> Option<f64> {
    fn dfs(
        at: usize,
        target: usize,
        cost: f64,
        edges: &[(usize, usize, f64)],
        seen: &mut Vec<bool>,
        best: &mut Option<f64>,
    ) {
        if at == target {
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        for &(a, b, c) in edges {
            if a == at && !seen[b] {
                seen[b] = true;
                dfs(b, target, cost + c, edges, seen, best);
                seen[b] = false;
            }
        }
    }
    let mut best = None;
    for &s in sources {
        let mut seen = vec![false; n];
        seen[s] = true;
        dfs(s, target, 0.0, edges, &mut seen, &mut best);
    }
    best
}

/// One agent, one society, and a one-dimensional default-context SD entry
/// per point.
pub fn universe_1d(points: &[(&str, f64)]) -> SocialUniverse {
    let sd: serde_json::Map<String, serde_json::Value> = points
        .iter()
        .map(|(p, v)| (p.to_string(), serde_json::json!({ "*": [v] })))
        .collect();
    let doc = serde_json::json!({
        "dimension": 1,
        "agents": [{ "id": "x", "traits": { "utility": 1.0 } }],
        "societies": [{ "id": "s", "members": ["x"], "trait_weights": { "utility": 1.0 } }],
        "sd": { "points": sd },
    });
    SocialUniverse::from_json_str(&doc.to_string()).expect("valid universe")
}

/// Election where each listed candidate gets the given number of
/// single-candidate approvals and disapprovals.
pub fn tallied(rows: &[(&str, usize, usize)]) -> ApprovalElection {
    let mut ballots = Vec::new();
    for (c, approve, reject) in rows {
        for i in 0..*approve {
            ballots.push(Ballot::new(format!("{c}+{i}"), [*c], []));
        }
        for i in 0..*reject {
            ballots.push(Ballot::new(format!("{c}-{i}"), [], [*c]));
        }
    }
    ApprovalElection::new(
        rows.iter().map(|r| CandidateId::new(r.0)).collect(),
        ballots,
    )
}
