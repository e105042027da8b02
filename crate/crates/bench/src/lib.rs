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

//! Instance generators shared by the benchmarks.

use csi_core::{ApprovalElection, Ballot, CandidateId, PrefEdge, PrefNode, PreferenceGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `m` candidates, `v` voters, each approval drawn with probability `p`.
pub fn election(seed: u64, m: usize, v: usize, p: f64) -> ApprovalElection {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
    let ballots = (0..v)
        .map(|i| {
            let approve: Vec<&str> = ids
                .iter()
                .filter(|_| r.random_bool(p))
                .map(String::as_str)
                .collect();
            Ballot::new(format!("v{i}"), approve, [])
        })
        .collect();
    ApprovalElection::new(
        ids.iter().map(|c| CandidateId::new(c.as_str())).collect(),
        ballots,
    )
}

/// Directed graph with about `out` random out-edges per node and
/// `dim`-dimensional costs in [0,1].
pub fn graph(seed: u64, n: usize, out: usize, dim: usize) -> PreferenceGraph {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for a in 0..n {
        for _ in 0..out {
            let b = r.random_range(0..n);
            if a != b && seen.insert((a, b)) {
                let cost = (0..dim).map(|_| r.random_range(0.0..=1.0)).collect();
                edges.push(PrefEdge::new(&ids[a], &ids[b], cost));
            }
        }
    }
    PreferenceGraph::new(
        dim,
        ids.iter().map(|i| PrefNode::new(i.as_str())).collect(),
        edges,
    )
    .expect("generated graph is valid")
}
