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

//! Directed preference graphs whose edges carry a discrimination vector per
//! direction, with multi-source shortest paths and path-history tools.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::discrimination::{pessimistic_cost, scalarize, KnowledgeMap, Scalarization};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefNode {
    pub id: String,
    /// Candidate or norm the node stands for; defaults to the id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
}

impl PrefNode {
    pub fn new(id: impl Into<String>) -> Self {
        PrefNode {
            id: id.into(),
            payload: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefEdge {
    pub from: String,
    pub to: String,
    #[serde(rename = "cost")]
    pub cost_vector: Vec<f64>,
    /// Transiting this edge cannot be undone.
    #[serde(default)]
    pub irreversible: bool,
}

impl PrefEdge {
    pub fn new(from: &str, to: &str, cost: Vec<f64>) -> Self {
        PrefEdge {
            from: from.into(),
            to: to.into(),
            cost_vector: cost,
            irreversible: false,
        }
    }

    pub fn irreversible(mut self) -> Self {
        self.irreversible = true;
        self
    }
}

#[derive(Debug, Clone, Deserialize)]
struct GraphData {
    dimension: usize,
    nodes: Vec<PrefNode>,
    #[serde(default)]
    edges: Vec<PrefEdge>,
}

impl TryFrom<GraphData> for PreferenceGraph {
    type Error = Error;

    fn try_from(d: GraphData) -> Result<Self> {
        PreferenceGraph::new(d.dimension, d.nodes, d.edges)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GraphData")]
pub struct PreferenceGraph {
    pub dimension: usize,
    nodes: Vec<PrefNode>,
    edges: Vec<PrefEdge>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    /// Outgoing edge indices per node.
    #[serde(skip)]
    out: Vec<Vec<usize>>,
    /// Position of each node in id order, for lexicographic tie-breaks.
    #[serde(skip)]
    rank: Vec<usize>,
}

impl PreferenceGraph {
    pub fn new(dimension: usize, nodes: Vec<PrefNode>, edges: Vec<PrefEdge>) -> Result<Self> {
        let mut problems = Vec::new();
        if dimension == 0 {
            problems.push("dimension must be at least 1".to_owned());
        }
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.id.is_empty() {
                problems.push("empty node id".to_owned());
            }
            if index.insert(n.id.clone(), i).is_some() {
                problems.push(format!("duplicate node `{}`", n.id));
            }
        }
        let mut out = vec![Vec::new(); nodes.len()];
        let mut pairs = BTreeSet::new();
        for (k, e) in edges.iter().enumerate() {
            let (Some(&u), Some(&v)) = (index.get(&e.from), index.get(&e.to)) else {
                problems.push(format!("edge {}->{} has a missing endpoint", e.from, e.to));
                continue;
            };
            if u == v {
                problems.push(format!("self-loop on `{}`", e.from));
            }
            if !pairs.insert((u, v)) {
                problems.push(format!("duplicate edge {}->{}", e.from, e.to));
            }
            if e.cost_vector.len() != dimension {
                problems.push(format!(
                    "edge {}->{} cost has length {}, expected {dimension}",
                    e.from,
                    e.to,
                    e.cost_vector.len()
                ));
            }
            if e.cost_vector.iter().any(|c| !(0.0..=1.0).contains(c)) {
                problems.push(format!("edge {}->{} cost outside [0,1]", e.from, e.to));
            }
            out[u].push(k);
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let mut by_id: Vec<usize> = (0..nodes.len()).collect();
        by_id.sort_by(|&a, &b| nodes[a].id.cmp(&nodes[b].id));
        let mut rank = vec![0; nodes.len()];
        for (r, &i) in by_id.iter().enumerate() {
            rank[i] = r;
        }
        Ok(PreferenceGraph {
            dimension,
            nodes,
            edges,
            index,
            out,
            rank,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn nodes(&self) -> &[PrefNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[PrefEdge] {
        &self.edges
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    fn node(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Domain(format!("unknown node `{id}`")))
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&PrefEdge> {
        let u = *self.index.get(from)?;
        self.out[u]
            .iter()
            .map(|&k| &self.edges[k])
            .find(|e| e.to == to)
    }

    /// Returns a copy with one more edge.
    pub fn with_edge(&self, e: PrefEdge) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.push(e);
        PreferenceGraph::new(self.dimension, self.nodes.clone(), edges)
    }
}

fn cost_of(e: &PrefEdge, s: &Scalarization, km: Option<&KnowledgeMap>) -> Result<f64> {
    match km {
        None => scalarize(&e.cost_vector, s),
        Some(km) => {
            let key = format!("{}->{}", e.from, e.to);
            if km.get(&key).is_some() {
                pessimistic_cost(km, &key, s)
            } else {
                pessimistic_cost(km, &e.to, s)
            }
        }
    }
}

/// Scalarized cost of the edge `u -> v`. With a knowledge map the
/// uncertainty-penalized cost of the entry keyed `"u->v"` (falling back to
/// the entry of `v`) is used instead.
pub fn edge_cost(
    g: &PreferenceGraph,
    u: &str,
    v: &str,
    s: &Scalarization,
    km: Option<&KnowledgeMap>,
) -> Result<f64> {
    let e = g
        .edge(u, v)
        .ok_or_else(|| Error::Domain(format!("no edge {u}->{v}")))?;
    cost_of(e, s, km)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub path: Vec<String>,
    pub cost: f64,
}

#[derive(Debug, Clone)]
struct Label {
    cost: f64,
    path: Vec<usize>,
}

impl Label {
    fn cmp_with(&self, other: &Label, rank: &[usize]) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.path.len().cmp(&other.path.len()))
            .then_with(|| {
                self.path
                    .iter()
                    .map(|&n| rank[n])
                    .cmp(other.path.iter().map(|&n| rank[n]))
            })
    }
}

struct Queued<'a> {
    label: Label,
    rank: &'a [usize],
}

impl PartialEq for Queued<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued<'_> {}

impl PartialOrd for Queued<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap
        other.label.cmp_with(&self.label, self.rank)
    }
}

/// Cheapest directed path from any source to `target` (Dijkstra; edge costs
/// are nonnegative). Equal costs prefer fewer edges, then the
/// lexicographically smaller node-id sequence. `Ok(None)` when the target
/// is unreachable.
pub fn shortest_path(
    g: &PreferenceGraph,
    sources: &[&str],
    target: &str,
    s: &Scalarization,
    km: Option<&KnowledgeMap>,
) -> Result<Option<PathResult>> {
    if sources.is_empty() {
        return Err(Error::InvalidParameter(
            "shortest path needs at least one source".into(),
        ));
    }
    let src = sources
        .iter()
        .map(|id| g.node(id))
        .collect::<Result<Vec<_>>>()?;
    let tgt = g.node(target)?;
    let costs = g
        .edges
        .iter()
        .map(|e| cost_of(e, s, km))
        .collect::<Result<Vec<_>>>()?;
    if costs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
        return Err(Error::Domain(
            "edge costs must be finite and nonnegative".into(),
        ));
    }

    let mut best: Vec<Option<Label>> = vec![None; g.nodes.len()];
    let mut done = vec![false; g.nodes.len()];
    let mut heap = BinaryHeap::new();
    for &u in &src {
        let l = Label {
            cost: 0.0,
            path: vec![u],
        };
        if best[u]
            .as_ref()
            .is_none_or(|b| l.cmp_with(b, &g.rank).is_lt())
        {
            best[u] = Some(l.clone());
            heap.push(Queued {
                label: l,
                rank: &g.rank,
            });
        }
    }
    while let Some(Queued { label, .. }) = heap.pop() {
        let u = *label.path.last().expect("paths are non-empty");
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == tgt {
            return Ok(Some(PathResult {
                path: label.path.iter().map(|&i| g.nodes[i].id.clone()).collect(),
                cost: label.cost,
            }));
        }
        for &k in &g.out[u] {
            let v = g.index[&g.edges[k].to];
            if done[v] {
                continue;
            }
            let mut path = label.path.clone();
            path.push(v);
            let next = Label {
                cost: label.cost + costs[k],
                path,
            };
            if best[v]
                .as_ref()
                .is_none_or(|b| next.cmp_with(b, &g.rank).is_lt())
            {
                best[v] = Some(next.clone());
                heap.push(Queued {
                    label: next,
                    rank: &g.rank,
                });
            }
        }
    }
    Ok(None)
}

/// Node ids in the order they were transited.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathHistory {
    pub steps: Vec<String>,
}

impl PathHistory {
    pub fn new<S: Into<String>>(steps: impl IntoIterator<Item = S>) -> Self {
        PathHistory {
            steps: steps.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.steps.iter().all(|s| seen.insert(s))
    }

    /// Every consecutive pair is an edge of `g`.
    pub fn is_consistent_with(&self, g: &PreferenceGraph) -> bool {
        self.steps.iter().all(|s| g.contains(s))
            && self
                .steps
                .windows(2)
                .all(|w| g.edge(&w[0], &w[1]).is_some())
    }

    pub fn last(&self) -> Option<&str> {
        self.steps.last().map(String::as_str)
    }
}

/// Left-to-right scan that cuts the enclosed cycle whenever a node is
/// reached again. The result is a simple path with the same endpoints.
pub fn compact_history(h: &PathHistory) -> PathHistory {
    let mut out: Vec<String> = Vec::with_capacity(h.steps.len());
    let mut pos: HashMap<&str, usize> = HashMap::new();
    for s in &h.steps {
        if let Some(&p) = pos.get(s.as_str()) {
            for removed in out.drain(p + 1..) {
                pos.remove(removed.as_str());
            }
        } else {
            pos.insert(s.as_str(), out.len());
            out.push(s.clone());
        }
    }
    PathHistory { steps: out }
}

/// Whether the walk from the end of `h` back to the last occurrence of
/// `back_to` can be undone: every transited edge on that stretch must be
/// reversible and have a reversible edge in the opposite direction.
pub fn derogation_check(g: &PreferenceGraph, h: &PathHistory, back_to: &str) -> Result<bool> {
    let pos = h
        .steps
        .iter()
        .rposition(|s| s == back_to)
        .ok_or_else(|| Error::InvalidParameter(format!("`{back_to}` is not in the history")))?;
    Ok(h.steps[pos..].windows(2).all(|w| {
        let forward_ok = g.edge(&w[0], &w[1]).is_none_or(|e| !e.irreversible);
        let back_ok = g.edge(&w[1], &w[0]).is_some_and(|e| !e.irreversible);
        forward_ok && back_ok
    }))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn s1() -> Scalarization {
        Scalarization::uniform(1)
    }

    /// Enumerates every simple path from `src` to `dst`.
    fn all_simple_paths(g: &PreferenceGraph, src: &str, dst: &str) -> Vec<(Vec<String>, f64)> {
        fn go(
            g: &PreferenceGraph,
            path: &mut Vec<String>,
            cost: f64,
            dst: &str,
            out: &mut Vec<(Vec<String>, f64)>,
        ) {
            let u = path.last().unwrap().clone();
            if u == dst {
                out.push((path.clone(), cost));
                return;
            }
            for e in g.edges().iter().filter(|e| e.from == u) {
                if !path.contains(&e.to) {
                    path.push(e.to.clone());
                    go(g, path, cost + e.cost_vector[0], dst, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(g, &mut vec![src.to_owned()], 0.0, dst, &mut out);
        out
    }

    #[test]
    fn edge_costs() {
        let g = PreferenceGraph::new(
            2,
            nodes(&["u", "v"]),
            vec![
                PrefEdge::new("u", "v", vec![0.0, 0.0]),
                PrefEdge::new("v", "u", vec![0.2, 0.4]),
            ],
        )
        .unwrap();
        let s = Scalarization::uniform(2);
        assert_eq!(edge_cost(&g, "u", "v", &s, None).unwrap(), 0.0);
        let back = edge_cost(&g, "v", "u", &s, None).unwrap();
        assert!((back - 0.3).abs() < 1e-15);
        assert!(matches!(
            edge_cost(&g, "u", "w", &s, None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn edge_cost_with_knowledge_map() {
        let g = diamond();
        let km = KnowledgeMap {
            entries: [
                ("A->B".to_owned(), (0.5, 0.1)),
                ("D".to_owned(), (0.2, 0.1)),
            ]
            .into(),
        };
        let s = s1().with_lambda(1.0);
        assert!((edge_cost(&g, "A", "B", &s, Some(&km)).unwrap() - 0.6).abs() < 1e-15);
        assert!((edge_cost(&g, "C", "D", &s, Some(&km)).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            edge_cost(&g, "A", "C", &s, Some(&km)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn diamond_shortest_path() {
        let g = diamond();
        let paths = all_simple_paths(&g, "A", "D");
        assert_eq!(paths.len(), 2);
        let min = paths.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let r = shortest_path(&g, &["A"], "D", &s1(), None)
            .unwrap()
            .unwrap();
        assert_eq!(r.path, vec!["A", "B", "D"]);
        assert_eq!(r.cost, min);
        assert!((r.cost - 0.2).abs() < 1e-12);
    }

    #[test]
    fn source_is_target() {
        let r = shortest_path(&diamond(), &["C"], "C", &s1(), None)
            .unwrap()
            .unwrap();
        assert_eq!(r.path, vec!["C"]);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn unreachable_is_not_an_error() {
        assert_eq!(
            shortest_path(&diamond(), &["D"], "A", &s1(), None).unwrap(),
            None
        );
        assert!(matches!(
            shortest_path(&diamond(), &["X"], "A", &s1(), None),
            Err(Error::Domain(_))
        ));
        assert!(shortest_path(&diamond(), &[], "A", &s1(), None).is_err());
    }

    #[test]
    fn ties_prefer_fewer_edges_then_lexicographic() {
        let g = PreferenceGraph::new(
            1,
            nodes(&["s", "x", "y", "t"]),
            vec![
                PrefEdge::new("s", "y", vec![0.0]),
                PrefEdge::new("y", "t", vec![0.0]),
                PrefEdge::new("s", "x", vec![0.0]),
                PrefEdge::new("x", "t", vec![0.0]),
            ],
        )
        .unwrap();
        let r = shortest_path(&g, &["s"], "t", &s1(), None)
            .unwrap()
            .unwrap();
        assert_eq!(r.path, vec!["s", "x", "t"]);
        let g = g.with_edge(PrefEdge::new("s", "t", vec![0.0])).unwrap();
        let r = shortest_path(&g, &["s"], "t", &s1(), None)
            .unwrap()
            .unwrap();
        assert_eq!(r.path, vec!["s", "t"]);
    }

    #[test]
    fn multi_source() {
        let r = shortest_path(&diamond(), &["A", "C"], "D", &s1(), None)
            .unwrap()
            .unwrap();
        assert_eq!(r.path, vec!["C", "D"]);
    }

    #[test]
    fn graph_invariants_are_checked() {
        let bad = PreferenceGraph::new(
            1,
            nodes(&["a", "a", "b"]),
            vec![
                PrefEdge::new("a", "a", vec![0.1]),
                PrefEdge::new("a", "b", vec![1.5]),
                PrefEdge::new("a", "b", vec![0.1]),
                PrefEdge::new("a", "zz", vec![0.1]),
            ],
        );
        let Err(Error::Validation(p)) = bad else {
            panic!()
        };
        assert_eq!(p.len(), 5, "{p:?}");
    }

    #[test]
    fn graph_json() {
        let g = PreferenceGraph::from_json_str(
            r#"{"dimension":1,"nodes":[{"id":"A"},{"id":"B"}],
                "edges":[{"from":"A","to":"B","cost":[0.5],"irreversible":true}]}"#,
        )
        .unwrap();
        assert!(g.edge("A", "B").unwrap().irreversible);
        let back = PreferenceGraph::from_json_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert!(PreferenceGraph::from_json_str(
            r#"{"dimension":1,"nodes":[{"id":"A"}],"edges":[{"from":"A","to":"A","cost":[0.5]}]}"#
        )
        .is_err());
    }

    #[test]
    fn compaction_examples() {
        let h = PathHistory::new(["A", "B", "C", "B", "D"]);
        let c = compact_history(&h);
        assert_eq!(c.steps, vec!["A", "B", "D"]);
        assert!(c.is_simple());
        // Output is a subsequence of the input.
        let mut it = h.steps.iter();
        assert!(c.steps.iter().all(|s| it.any(|x| x == s)));

        let simple = PathHistory::new(["A", "B", "C"]);
        assert_eq!(compact_history(&simple), simple);
        assert_eq!(
            compact_history(&PathHistory::new(["A", "B", "A"])).steps,
            vec!["A"]
        );
        assert_eq!(
            compact_history(&PathHistory::new(["A", "B", "C", "D", "B", "E", "C", "F"])).steps,
            vec!["A", "B", "E", "C", "F"]
        );
    }

    #[test]
    fn derogation_examples() {
        let g = PreferenceGraph::new(
            1,
            nodes(&["A", "B"]),
            vec![
                PrefEdge::new("A", "B", vec![0.1]),
                PrefEdge::new("B", "A", vec![0.1]),
            ],
        )
        .unwrap();
        let h = PathHistory::new(["A", "B"]);
        assert!(derogation_check(&g, &h, "A").unwrap());

        let g = PreferenceGraph::new(
            1,
            nodes(&["A", "B"]),
            vec![PrefEdge::new("A", "B", vec![0.1]).irreversible()],
        )
        .unwrap();
        assert!(!derogation_check(&g, &h, "A").unwrap());

        // C->B exists but B->A does not, and no other reverse route counts.
        let g = PreferenceGraph::new(
            1,
            nodes(&["A", "A2", "B", "C"]),
            vec![
                PrefEdge::new("A", "B", vec![0.1]),
                PrefEdge::new("B", "C", vec![0.1]),
                PrefEdge::new("C", "B", vec![0.1]),
            ],
        )
        .unwrap();
        let h = PathHistory::new(["A", "B", "C"]);
        assert!(!derogation_check(&g, &h, "A").unwrap());
        assert!(derogation_check(&g, &h, "B").unwrap());
        assert!(derogation_check(&g, &h, "C").unwrap());
        assert!(matches!(
            derogation_check(&g, &h, "Z"),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn reverse_edge_marked_irreversible_blocks() {
        let g = PreferenceGraph::new(
            1,
            nodes(&["A", "B"]),
            vec![
                PrefEdge::new("A", "B", vec![0.1]),
                PrefEdge::new("B", "A", vec![0.1]).irreversible(),
            ],
        )
        .unwrap();
        assert!(!derogation_check(&g, &PathHistory::new(["A", "B"]), "A").unwrap());
    }
}
