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

//! File loading. Every loader validates before handing data on.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use csi_core::scenario::ScenarioSpec;
use csi_core::{ApprovalElection, PavWeights, PolicyState, PreferenceGraph, SocialUniverse};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parses an election without validating it.
pub fn raw_election(path: &Path) -> Result<ApprovalElection> {
    let is_csv = path
        .extension()
        .is_some_and(|x| x.eq_ignore_ascii_case("csv"));
    let e = if is_csv {
        let f = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
        ApprovalElection::from_csv_reader(f, None)?
    } else {
        ApprovalElection::from_json_str(&read(path)?)?
    };
    Ok(e)
}

pub fn election(path: &Path) -> Result<ApprovalElection> {
    let e = raw_election(path)?;
    e.ensure_valid()?;
    Ok(e)
}

pub fn universe(path: &Path) -> Result<SocialUniverse> {
    Ok(SocialUniverse::from_json_str(&read(path)?)?)
}

pub fn graph(path: &Path) -> Result<PreferenceGraph> {
    Ok(PreferenceGraph::from_json_str(&read(path)?)?)
}

pub fn scenario(path: &Path) -> Result<ScenarioSpec> {
    Ok(ScenarioSpec::from_json_str(&read(path)?)?)
}

pub fn state(path: &Path) -> Result<PolicyState> {
    let s: PolicyState = serde_json::from_str(&read(path)?).map_err(csi_core::Error::from)?;
    Ok(s)
}

pub fn alpha(spec: &str, k: usize) -> Result<PavWeights> {
    if spec == "harmonic" {
        return Ok(PavWeights::harmonic(k));
    }
    Ok(PavWeights::from_json_str(&read(Path::new(spec))?)?)
}
