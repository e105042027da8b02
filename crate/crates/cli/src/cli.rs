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

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csi_core::SpSelector;

#[derive(Debug, Parser)]
#[command(
    name = "csi-opt",
    version,
    about = "Discrimination-aware committee selection"
)]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format. `csv` prints the approval tallies of the election a
    /// command ran on.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multiwinner approval rules.
    Mwsr(MwsrArgs),
    /// Two-stage minimax approval voting.
    Tav(TavArgs),
    /// Discrimination-aware pipelines.
    #[command(subcommand)]
    Csi(CsiCommand),
    /// Traffic-signal scenario.
    Scenario(ScenarioArgs),
    /// Brute-force reference answers for small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Check an input file and report every problem found.
    Validate(ValidateArgs),
    /// Run adaptive coordinate descent on an objective file.
    Descend(DescendArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    Av,
    PavExact,
    PavGreedy,
}

#[derive(Debug, Args)]
pub struct MwsrArgs {
    #[arg(long, value_enum)]
    pub rule: RuleName,
    #[arg(long)]
    pub k: usize,
    /// `harmonic` or a JSON file with the weight sequence.
    #[arg(long, default_value = "harmonic")]
    pub alpha: String,
    /// Largest candidate count `pav-exact` will search.
    #[arg(long, default_value_t = csi_core::mwsr::DEFAULT_EXHAUSTIVE_CAP)]
    pub cap: usize,
    /// Election file (`.json` or `.csv`).
    pub election: PathBuf,
}

#[derive(Debug, Args)]
pub struct TavArgs {
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub k: usize,
    pub election: PathBuf,
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub universe: PathBuf,
    #[arg(long)]
    pub election: PathBuf,
}

#[derive(Debug, Args)]
pub struct Stages {
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub j: usize,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct GraphRun {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub stages: Stages,
    /// Seed for random preference selection.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `all`, `list:a,b`, `random:N` or `bootstrap:N`.
    #[arg(long, default_value = "all")]
    pub sp: SpSelector,
}

#[derive(Debug, Subcommand)]
pub enum CsiCommand {
    /// One-stage filter on discrimination, then approval voting. A universe
    /// with an embedding also gets an audited coordinate descent.
    Oav {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
    },
    /// PAV, keep the least discriminatory, PAV again.
    Pnm {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        stages: Stages,
    },
    /// One preference-aggregation step over a graph.
    Pa {
        #[command(flatten)]
        run: GraphRun,
        /// Policy state to start from (JSON); empty when omitted.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Repeated aggregation with derogation.
    Pm {
        #[command(flatten)]
        run: GraphRun,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioRuleArg {
    AbsoluteMajority,
    LdmWsr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Oav,
    Pnm,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario spec file; the built-in fixture is used when omitted.
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub cars: Option<usize>,
    #[arg(long)]
    pub pedestrians: Option<usize>,
    #[arg(long, value_enum)]
    pub rule: Option<ScenarioRuleArg>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// `{"election", "k", "alpha"?}`
    Pav { instance: PathBuf },
    /// `{"graph", "sources", "target", "scalarization"?}`
    Path { instance: PathBuf },
    /// `{"election", "l", "k"}`
    Tav { instance: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Election,
    Universe,
    Graph,
    Scenario,
    Objective,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Kind::Election)]
    pub kind: Kind,
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct DescendArgs {
    #[arg(long)]
    pub objective: PathBuf,
    /// Starting point, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub x0: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_evals: usize,
}
