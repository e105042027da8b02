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

//! Approval elections with positive and negative votes, PAV committee rules,
//! discrimination-aware selection pipelines and directed preference graphs.
//!
//! Every rule is deterministic: candidate order in the election defines the
//! tie-break order used everywhere downstream.

pub mod discrimination;
pub mod election;
pub mod error;
pub mod graph;
pub mod mwsr;
pub mod optimizer;
pub mod oracle;
pub mod pipelines;
pub mod scenario;

pub use discrimination::{
    evaluate_sd, pessimistic_cost, scalarize, social_power_order, social_utility, Agent,
    DiscriminationFunction, KnowledgeMap, PowerRank, Scalarization, ScalarizationMode, SdProfile,
    SdSource, SocialUniverse, Society, TraitVector,
};
pub use election::{
    approval_score, disapproval_score, validate_election, ApprovalElection, Ballot, CandidateId,
    Committee, Violation, ViolationKind,
};
pub use error::{Error, Result};
pub use graph::{
    compact_history, derogation_check, edge_cost, shortest_path, PathHistory, PathResult, PrefEdge,
    PrefNode, PreferenceGraph,
};
pub use mwsr::{av_top_k, pav_exact, pav_greedy, pav_score, PavWeights, RuleResult};
pub use optimizer::{coordinate_descent, DescentConfig, DescentTrace, FnObjective, Objective};
pub use pipelines::{
    minimax_tav, oav_csi, pa_step, pm_run, pnm_tav, PipelineConfig, PipelineReport, PolicyState,
    ScoredCandidate, SpSelector, StageParams, StepStatus,
};
