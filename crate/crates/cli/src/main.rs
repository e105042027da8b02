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

mod cli;
mod commands;
mod input;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use cli::{Cli, Format};

const EXIT_FAILURE: u8 = 1;
const EXIT_CAPACITY: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<csi_core::Error>() {
        Some(csi_core::Error::Capacity { .. }) => EXIT_CAPACITY,
        Some(csi_core::Error::Numeric { .. }) | None => EXIT_FAILURE,
        Some(_) => commands::EXIT_VALIDATION,
    }
}

fn render(cli: &Cli, out: &commands::Outcome) -> Result<String> {
    match cli.format {
        Format::Json => Ok(serde_json::to_string_pretty(&out.value)? + "\n"),
        Format::Csv => match &out.election {
            Some(e) => Ok(commands::tally_csv(e)),
            None => Err(csi_core::Error::InvalidParameter(
                "csv output is only available for commands that read an election".into(),
            )
            .into()),
        },
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::run(&cli.command).and_then(|out| {
        let text = render(&cli, &out)?;
        emit(&cli, &text)?;
        Ok(out.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
