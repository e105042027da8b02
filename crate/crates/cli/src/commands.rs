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

use anyhow::{bail, Result};
use csi_core::election::tallies;
use csi_core::mwsr::{av_result, pav_exact_with_cap};
use csi_core::optimizer::ObjectiveSpec;
use csi_core::oracle::{oracle_minimax_tav, oracle_path, oracle_pav};
use csi_core::scenario::{run_traffic_scenario, LdmVariant, ScenarioRule, ScenarioSpec};
use csi_core::{
    coordinate_descent, minimax_tav, oav_csi, pa_step, pav_greedy, pm_run, pnm_tav,
    validate_election, ApprovalElection, CandidateId, DescentConfig, PavWeights, PipelineConfig,
    PipelineReport, PolicyState, PreferenceGraph, Scalarization, StageParams, StepStatus,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::cli::*;
use crate::input;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NO_PATH: u8 = 4;

/// What a command produced: the JSON document, the election it ran on
/// (for `--format csv`) and the exit status.
pub struct Outcome {
    pub value: Value,
    pub election: Option<ApprovalElection>,
    pub code: u8,
}

impl Outcome {
    fn json(value: Value) -> Self {
        Outcome {
            value,
            election: None,
            code: 0,
        }
    }

    fn on(mut self, e: ApprovalElection) -> Self {
        self.election = Some(e);
        self
    }

    fn code(mut self, code: u8) -> Self {
        self.code = code;
        self
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn stages(s: &Stages) -> Result<StageParams> {
    Ok(StageParams::new(s.l, s.j, s.k)?)
}

fn path_code(r: &PipelineReport) -> u8 {
    match r.status {
        StepStatus::NoPath | StepStatus::BlockedDerogation => EXIT_NO_PATH,
        _ => 0,
    }
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Mwsr(a) => mwsr(a),
        Command::Tav(a) => {
            let e = input::election(&a.election)?;
            let r = minimax_tav(&e, a.l, a.k)?;
            Ok(Outcome::json(to_value(&r)?).on(e))
        }
        Command::Csi(c) => csi(c),
        Command::Scenario(a) => scenario(a),
        Command::Oracle(o) => oracle(o),
        Command::Validate(a) => validate(a),
        Command::Descend(a) => descend(a),
    }
}

fn mwsr(a: &MwsrArgs) -> Result<Outcome> {
    let e = input::election(&a.election)?;
    let r = match a.rule {
        RuleName::Av => av_result(&e, a.k)?,
        RuleName::PavExact => pav_exact_with_cap(&e, a.k, &input::alpha(&a.alpha, a.k)?, a.cap)?,
        RuleName::PavGreedy => pav_greedy(&e, a.k, &input::alpha(&a.alpha, a.k)?)?,
    };
    Ok(Outcome::json(to_value(&r)?).on(e))
}

fn csi(c: &CsiCommand) -> Result<Outcome> {
    match c {
        CsiCommand::Oav { inputs, k, tau } => {
            let u = input::universe(&inputs.universe)?;
            let e = input::election(&inputs.election)?;
            let r = oav_csi(&u, &e, *k, *tau, &PipelineConfig::for_universe(&u))?;
            Ok(Outcome::json(to_value(&r)?).on(e))
        }
        CsiCommand::Pnm { inputs, stages: s } => {
            let u = input::universe(&inputs.universe)?;
            let e = input::election(&inputs.election)?;
            let r = pnm_tav(&u, &e, stages(s)?, &PipelineConfig::for_universe(&u))?;
            Ok(Outcome::json(to_value(&r)?).on(e))
        }
        CsiCommand::Pa { run, state } => {
            let (u, g, e) = graph_inputs(run)?;
            let start = match state {
                Some(p) => input::state(p)?,
                None => PolicyState::default(),
            };
            let cfg = PipelineConfig::for_universe(&u).with_sp(run.sp.clone());
            let (next, r) = pa_step(&u, &g, &e, &start, stages(&run.stages)?, &cfg, run.seed)?;
            let code = path_code(&r);
            Ok(Outcome::json(json!({ "state": next, "report": r }))
                .on(e)
                .code(code))
        }
        CsiCommand::Pm { run, steps } => {
            let (u, g, e) = graph_inputs(run)?;
            let cfg = PipelineConfig::for_universe(&u).with_sp(run.sp.clone());
            let (state, reports) =
                pm_run(&u, &g, &e, stages(&run.stages)?, *steps, &cfg, run.seed)?;
            let code = reports.last().map_or(0, path_code);
            Ok(Outcome::json(json!({ "state": state, "reports": reports }))
                .on(e)
                .code(code))
        }
    }
}

fn graph_inputs(
    run: &GraphRun,
) -> Result<(csi_core::SocialUniverse, PreferenceGraph, ApprovalElection)> {
    Ok((
        input::universe(&run.inputs.universe)?,
        input::graph(&run.graph)?,
        input::election(&run.inputs.election)?,
    ))
}

fn scenario(a: &ScenarioArgs) -> Result<Outcome> {
    let rule = match a.rule {
        Some(ScenarioRuleArg::AbsoluteMajority) => Some(ScenarioRule::AbsoluteMajority),
        Some(ScenarioRuleArg::LdmWsr) => Some(ScenarioRule::LdmWsr),
        None => None,
    };
    let mut spec = match &a.spec {
        Some(p) => input::scenario(p)?,
        None => ScenarioSpec::fixture(
            a.cars.unwrap_or(1000),
            a.pedestrians.unwrap_or(10),
            rule.unwrap_or(ScenarioRule::LdmWsr),
        ),
    };
    if let Some(c) = a.cars {
        spec.car_count = c;
    }
    if let Some(p) = a.pedestrians {
        spec.pedestrian_count = p;
    }
    if let Some(r) = rule {
        spec.rule = r;
    }
    match a.variant {
        Some(VariantArg::Oav) => spec.variant = LdmVariant::Oav,
        Some(VariantArg::Pnm) => spec.variant = LdmVariant::Pnm,
        None => {}
    }
    let report = run_traffic_scenario(&spec)?;
    Ok(Outcome::json(to_value(&report)?).on(spec.election()))
}

#[derive(Deserialize)]
struct PavInstance {
    election: ApprovalElection,
    k: usize,
    #[serde(default)]
    alpha: Option<Value>,
}

#[derive(Deserialize)]
struct PathInstance {
    graph: PreferenceGraph,
    sources: Vec<String>,
    target: String,
    #[serde(default)]
    scalarization: Option<Scalarization>,
}

#[derive(Deserialize)]
struct TavInstance {
    election: ApprovalElection,
    l: usize,
    k: usize,
}

fn instance<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    Ok(serde_json::from_str(&input::read(path)?).map_err(csi_core::Error::from)?)
}

fn oracle(o: &OracleCommand) -> Result<Outcome> {
    match o {
        OracleCommand::Pav { instance: p } => {
            let inst: PavInstance = instance(p)?;
            inst.election.ensure_valid()?;
            let w = match &inst.alpha {
                Some(a) => PavWeights::from_json_str(&a.to_string())?,
                None => PavWeights::harmonic(inst.k),
            };
            let r = oracle_pav(&inst.election, inst.k, &w)?;
            Ok(Outcome::json(to_value(&r)?).on(inst.election))
        }
        OracleCommand::Path { instance: p } => {
            let inst: PathInstance = instance(p)?;
            let s = inst
                .scalarization
                .unwrap_or_else(|| Scalarization::uniform(inst.graph.dimension));
            s.validate()?;
            let sources: Vec<&str> = inst.sources.iter().map(String::as_str).collect();
            match oracle_path(&inst.graph, &sources, &inst.target, &s)? {
                Some(r) => Ok(Outcome::json(to_value(&r)?)),
                None => Ok(Outcome::json(Value::Null).code(EXIT_NO_PATH)),
            }
        }
        OracleCommand::Tav { instance: p } => {
            let inst: TavInstance = instance(p)?;
            inst.election.ensure_valid()?;
            let r = oracle_minimax_tav(&inst.election, inst.l, inst.k)?;
            Ok(Outcome::json(to_value(&r)?).on(inst.election))
        }
    }
}

fn problems(err: anyhow::Error) -> Result<Vec<String>> {
    match err.downcast::<csi_core::Error>() {
        Ok(csi_core::Error::Validation(list)) => Ok(list),
        Ok(
            e @ (csi_core::Error::Parse(_)
            | csi_core::Error::InvalidParameter(_)
            | csi_core::Error::Domain(_)
            | csi_core::Error::Integrity(_)
            | csi_core::Error::UnknownCandidate(_)),
        ) => Ok(vec![e.to_string()]),
        Ok(e) => Err(e.into()),
        Err(e) => Err(e),
    }
}

fn validate(a: &ValidateArgs) -> Result<Outcome> {
    let checked: Result<(Value, Option<ApprovalElection>)> = match a.kind {
        Kind::Election => input::raw_election(&a.file).and_then(|e| {
            let violations = validate_election(&e);
            if violations.is_empty() {
                let summary =
                    json!({ "candidates": e.candidates.len(), "ballots": e.ballots.len() });
                Ok((summary, Some(e)))
            } else {
                Err(csi_core::Error::Validation(
                    violations.iter().map(ToString::to_string).collect(),
                )
                .into())
            }
        }),
        Kind::Universe => input::universe(&a.file).map(|u| {
            let summary = json!({
                "dimension": u.dimension,
                "agents": u.agents.len(),
                "societies": u.societies.len(),
                "points": u.sd.points.len(),
            });
            (summary, None)
        }),
        Kind::Graph => input::graph(&a.file).map(|g| {
            (
                json!({ "nodes": g.nodes().len(), "edges": g.edges().len() }),
                None,
            )
        }),
        Kind::Scenario => input::scenario(&a.file).map(|s| {
            let e = s.election();
            (
                json!({ "cars": s.car_count, "pedestrians": s.pedestrian_count }),
                Some(e),
            )
        }),
        Kind::Objective => input::read(&a.file).and_then(|text| {
            let spec: ObjectiveSpec = serde_json::from_str(&text).map_err(csi_core::Error::from)?;
            spec.validate()?;
            Ok((
                json!({ "dimension": csi_core::Objective::dimension(&spec) }),
                None,
            ))
        }),
    };
    let kind = format!("{:?}", a.kind).to_lowercase();
    match checked {
        Ok((summary, election)) => {
            let out = Outcome::json(json!({ "kind": kind, "valid": true, "summary": summary }));
            Ok(match election {
                Some(e) => out.on(e),
                None => out,
            })
        }
        Err(err) => {
            let list = problems(err)?;
            Ok(
                Outcome::json(json!({ "kind": kind, "valid": false, "problems": list }))
                    .code(EXIT_VALIDATION),
            )
        }
    }
}

fn descend(a: &DescendArgs) -> Result<Outcome> {
    let spec: ObjectiveSpec =
        serde_json::from_str(&input::read(&a.objective)?).map_err(csi_core::Error::from)?;
    spec.validate()?;
    let n = csi_core::Objective::dimension(&spec);
    if a.x0.len() != n {
        bail!(csi_core::Error::InvalidParameter(format!(
            "x0 has {} coordinates, objective has {n}",
            a.x0.len()
        )));
    }
    let cfg = DescentConfig::new(n)
        .with_tol(a.tol)
        .with_max_evals(a.max_evals);
    let (x, trace) = coordinate_descent(&spec, &a.x0, &cfg)?;
    Ok(Outcome::json(json!({
        "x": x,
        "value": trace.best_value(),
        "evals_used": trace.evals_used,
        "accepted_moves": trace.accepted_moves(),
        "converged": trace.converged,
    })))
}

/// `candidate,approve,disapprove` rows in candidate order.
pub fn tally_csv(e: &ApprovalElection) -> String {
    let mut out = String::from("candidate,approve,disapprove\n");
    for (c, a, d) in tallies(e) {
        let CandidateId(id) = c;
        out.push_str(&format!("{},{a},{d}\n", csv_field(&id)));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
