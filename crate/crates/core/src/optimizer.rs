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

//! Adaptive-step coordinate descent for continuous objectives that need not
//! be differentiable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Objective {
    fn dimension(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// Per-coordinate box `[lo, hi]`, if any.
    fn bounds(&self) -> Option<&[(f64, f64)]> {
        None
    }
}

/// Closure-backed objective.
pub struct FnObjective<F> {
    dimension: usize,
    f: F,
    bounds: Option<Vec<(f64, f64)>>,
}

impl<F: Fn(&[f64]) -> f64> FnObjective<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        FnObjective {
            dimension,
            f,
            bounds: None,
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }
}

impl<F: Fn(&[f64]) -> f64> Objective for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub initial_step: Vec<f64>,
    pub grow: f64,
    pub shrink: f64,
    pub tol: f64,
    pub max_evals: usize,
    /// Handed to the sweep hook; the built-in schedule is deterministic and
    /// does not draw from it.
    pub seed: u64,
}

impl DescentConfig {
    /// Unit steps, doubling on success and halving on failure.
    pub fn new(dimension: usize) -> Self {
        DescentConfig {
            initial_step: vec![1.0; dimension],
            grow: 2.0,
            shrink: 0.5,
            tol: 1e-8,
            max_evals: 100_000,
            seed: 0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.initial_step.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} initial steps for dimension {n}",
                self.initial_step.len()
            )));
        }
        if self
            .initial_step
            .iter()
            .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "initial steps must be positive".into(),
            ));
        }
        if self.grow.is_nan() || self.grow <= 1.0 {
            return Err(Error::InvalidParameter("grow factor must exceed 1".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(
                "shrink factor must lie in (0,1)".into(),
            ));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidParameter(
                "max_evals must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentTrace {
    /// Starting point followed by every accepted move.
    pub iterates: Vec<(Vec<f64>, f64)>,
    pub evals_used: usize,
    pub converged: bool,
}

impl DescentTrace {
    pub fn accepted_moves(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn best_value(&self) -> f64 {
        self.iterates.last().map_or(f64::INFINITY, |(_, v)| *v)
    }
}

/// Called after every full sweep; may rescale the step vector. This is the
/// place for an encoding update that rotates or rescales coordinates.
pub trait SweepHook {
    fn after_sweep(&mut self, sweep: usize, seed: u64, x: &[f64], steps: &mut [f64]);
}

pub struct NoHook;

impl SweepHook for NoHook {
    fn after_sweep(&mut self, _: usize, _: u64, _: &[f64], _: &mut [f64]) {}
}

pub fn coordinate_descent<O: Objective + ?Sized>(
    f: &O,
    x0: &[f64],
    cfg: &DescentConfig,
) -> Result<(Vec<f64>, DescentTrace)> {
    coordinate_descent_with_hook(f, x0, cfg, &mut NoHook)
}

struct Evaluator<'a, O: ?Sized> {
    f: &'a O,
    used: usize,
    budget: usize,
}

impl<O: Objective + ?Sized> Evaluator<'_, O> {
    fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.used += 1;
        let v = self.f.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric { point: x.to_vec() })
        }
    }
}

/// Cyclic sweeps over the coordinates. Each coordinate probes `x - step`
/// and `x + step`, takes the better one if it strictly improves (the minus
/// probe wins exact ties), then grows its step on success and shrinks it
/// on failure. Stops once every step is below `tol` or the evaluation
/// budget is spent.
pub fn coordinate_descent_with_hook<O: Objective + ?Sized, H: SweepHook + ?Sized>(
    f: &O,
    x0: &[f64],
    cfg: &DescentConfig,
    hook: &mut H,
) -> Result<(Vec<f64>, DescentTrace)> {
    let n = f.dimension();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "objective dimension must be at least 1".into(),
        ));
    }
    if x0.len() != n {
        return Err(Error::InvalidParameter(format!(
            "start point has dimension {}, objective has {n}",
            x0.len()
        )));
    }
    cfg.validate(n)?;
    let bounds = f.bounds();
    if let Some(b) = bounds {
        if b.len() != n {
            return Err(Error::InvalidParameter(
                "bounds length differs from dimension".into(),
            ));
        }
        if x0.iter().zip(b).any(|(x, (lo, hi))| x < lo || x > hi) {
            return Err(Error::InvalidParameter("start point outside bounds".into()));
        }
    }
    let clamp = |i: usize, v: f64| match bounds {
        Some(b) => v.clamp(b[i].0, b[i].1),
        None => v,
    };

    let mut ev = Evaluator {
        f,
        used: 0,
        budget: cfg.max_evals,
    };
    let mut x = x0.to_vec();
    let mut fx = ev.eval(&x)?;
    let mut iterates = vec![(x.clone(), fx)];
    let mut steps = cfg.initial_step.clone();
    let mut converged = false;
    let mut sweep = 0;

    'outer: loop {
        if steps.iter().all(|&s| s < cfg.tol) {
            converged = true;
            break;
        }
        for i in 0..n {
            let xi = x[i];
            let mut best: Option<(f64, f64)> = None;
            for cand in [clamp(i, xi - steps[i]), clamp(i, xi + steps[i])] {
                if cand == xi {
                    continue;
                }
                if ev.exhausted() {
                    break 'outer;
                }
                x[i] = cand;
                let v = ev.eval(&x)?;
                x[i] = xi;
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((cand, v));
                }
            }
            match best {
                Some((cand, v)) if v < fx => {
                    x[i] = cand;
                    fx = v;
                    iterates.push((x.clone(), fx));
                    steps[i] *= cfg.grow;
                }
                _ => steps[i] *= cfg.shrink,
            }
        }
        hook.after_sweep(sweep, cfg.seed, &x, &mut steps);
        sweep += 1;
    }

    Ok((
        x,
        DescentTrace {
            iterates,
            evals_used: ev.used,
            converged,
        },
    ))
}

/// Objectives that can be described in a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectiveSpec {
    /// `sum_i w_i (x_i - c_i)^2`
    Quadratic {
        center: Vec<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        bounds: Option<Vec<(f64, f64)>>,
    },
    /// `sum_i w_i |x_i - c_i|`
    L1 {
        center: Vec<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        bounds: Option<Vec<(f64, f64)>>,
    },
}

impl ObjectiveSpec {
    fn parts(&self) -> (&[f64], Option<&[f64]>) {
        match self {
            ObjectiveSpec::Quadratic {
                center, weights, ..
            }
            | ObjectiveSpec::L1 {
                center, weights, ..
            } => (center, weights.as_deref()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (c, w) = self.parts();
        if c.is_empty() {
            return Err(Error::InvalidParameter("objective center is empty".into()));
        }
        if w.is_some_and(|w| w.len() != c.len()) {
            return Err(Error::InvalidParameter(
                "weights length differs from center".into(),
            ));
        }
        Ok(())
    }
}

impl Objective for ObjectiveSpec {
    fn dimension(&self) -> usize {
        self.parts().0.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let (c, w) = self.parts();
        let weight = |i: usize| w.map_or(1.0, |w| w[i]);
        match self {
            ObjectiveSpec::Quadratic { .. } => (0..c.len())
                .map(|i| weight(i) * (x[i] - c[i]).powi(2))
                .sum(),
            ObjectiveSpec::L1 { .. } => (0..c.len()).map(|i| weight(i) * (x[i] - c[i]).abs()).sum(),
        }
    }

    fn bounds(&self) -> Option<&[(f64, f64)]> {
        match self {
            ObjectiveSpec::Quadratic { bounds, .. } | ObjectiveSpec::L1 { bounds, .. } => {
                bounds.as_deref()
            }
        }
    }
}
