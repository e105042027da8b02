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

//! Multi-winner rules: approval top-k, exact PAV by branch-and-bound, and
//! greedy PAV. Scores are exact rationals so ties are detected soundly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde_json::Value;

use crate::election::{ApprovalElection, Committee};
use crate::error::{Error, Result};

/// Candidate count above which [`pav_exact`] refuses to search.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;

/// PAV weights `alpha_1 >= alpha_2 >= ... >= 0` with `alpha_1 > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PavWeights {
    pub alpha: Vec<BigRational>,
}

impl PavWeights {
    /// `alpha_l = 1/l` for `l = 1..=len`.
    pub fn harmonic(len: usize) -> Self {
        PavWeights {
            alpha: (1..=len)
                .map(|l| BigRational::new(BigInt::one(), BigInt::from(l)))
                .collect(),
        }
    }

    /// All ones: PAV with these weights is plain approval voting.
    pub fn constant(len: usize) -> Self {
        PavWeights {
            alpha: vec![BigRational::one(); len],
        }
    }

    pub fn new(alpha: Vec<BigRational>) -> Result<Self> {
        let w = PavWeights { alpha };
        w.check(0)?;
        Ok(w)
    }

    /// Parses a JSON array whose entries are integers, decimals or `"p/q"`
    /// strings. Decimals are read exactly, never through `f64`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("alpha file must hold a JSON array".into()))?;
        let alpha = arr
            .iter()
            .map(|x| match x {
                Value::Number(n) => parse_rational(&n.to_string()),
                Value::String(s) => parse_rational(s),
                other => Err(Error::Parse(format!("bad alpha entry {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PavWeights::new(alpha)
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.alpha.len() < k.max(1) {
            return Err(Error::InvalidParameter(format!(
                "{} PAV weights given, at least {} needed",
                self.alpha.len(),
                k.max(1)
            )));
        }
        if !self.alpha[0].is_positive() {
            return Err(Error::InvalidParameter("alpha_1 must be positive".into()));
        }
        if self.alpha.iter().any(|a| a.is_negative()) {
            return Err(Error::InvalidParameter(
                "PAV weights must be nonnegative".into(),
            ));
        }
        if self.alpha.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "PAV weights must be non-increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Parses `"p/q"`, `"-3"` or a plain decimal such as `"0.125"` / `"2.5e-1"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleResult {
    pub committee: Committee,
    pub objective: BigRational,
    /// Number of optimal committees seen by the search (1 for greedy and AV).
    pub ties: usize,
}

impl Serialize for RuleResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RuleResult", 4)?;
        st.serialize_field("committee", &self.committee.members)?;
        st.serialize_field("objective_num", &bigint_json(self.objective.numer()))?;
        st.serialize_field("objective_den", &bigint_json(self.objective.denom()))?;
        st.serialize_field("ties", &self.ties)?;
        st.end()
    }
}

/// JSON number when it fits in an `i64`, decimal string otherwise.
pub fn bigint_json(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(n.to_string()),
    }
}

fn check_k(e: &ApprovalElection, k: usize) -> Result<()> {
    if k == 0 || k > e.candidates.len() {
        return Err(Error::InvalidParameter(format!(
            "committee size {k} outside 1..={}",
            e.candidates.len()
        )));
    }
    Ok(())
}

/// The `k` most approved candidates, earlier candidates winning ties.
pub fn av_top_k(e: &ApprovalElection, k: usize) -> Result<Committee> {
    check_k(e, k)?;
    let mut counts = vec![0usize; e.candidates.len()];
    for approvals in e.approval_indices() {
        for c in approvals {
            counts[c] += 1;
        }
    }
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(Committee::from_indices(e, &order))
}

/// Sum over voters of `alpha_1 + ... + alpha_t`, `t` being the number of
/// committee members the voter approves.
pub fn pav_score(
    e: &ApprovalElection,
    committee: &Committee,
    w: &PavWeights,
) -> Result<BigRational> {
    let mut member = vec![false; e.candidates.len()];
    for c in &committee.members {
        member[e.require(c.as_str())?] = true;
    }
    let mut total = BigRational::zero();
    for approvals in e.approval_indices() {
        let t = approvals.iter().filter(|&&c| member[c]).count();
        if t > w.len() {
            return Err(Error::InvalidParameter(format!(
                "voter approves {t} members but only {} weights given",
                w.len()
            )));
        }
        for a in &w.alpha[..t] {
            total += a;
        }
    }
    Ok(total)
}

/// Dense form of an election for the committee searches.
struct PavInstance<'a> {
    n: usize,
    approvers: Vec<Vec<usize>>,
    voters: usize,
    alpha: &'a [BigRational],
}

impl<'a> PavInstance<'a> {
    fn new(e: &ApprovalElection, w: &'a PavWeights, k: usize) -> Self {
        let approvals = e.approval_indices();
        let mut approvers = vec![Vec::new(); e.candidates.len()];
        for (v, a) in approvals.iter().enumerate() {
            for &c in a {
                approvers[c].push(v);
            }
        }
        PavInstance {
            n: e.candidates.len(),
            approvers,
            voters: approvals.len(),
            alpha: &w.alpha[..k],
        }
    }

    /// Marginal gain of adding `c` given per-voter approved-member counts.
    fn gain(&self, c: usize, load: &[usize]) -> BigRational {
        let mut levels = vec![0u64; self.alpha.len()];
        for &v in &self.approvers[c] {
            if load[v] < levels.len() {
                levels[load[v]] += 1;
            }
        }
        let mut g = BigRational::zero();
        for (l, &count) in levels.iter().enumerate() {
            if count > 0 {
                g += &self.alpha[l] * BigRational::from_integer(BigInt::from(count));
            }
        }
        g
    }

    fn add(&self, c: usize, load: &mut [usize]) {
        for &v in &self.approvers[c] {
            load[v] += 1;
        }
    }

    fn remove(&self, c: usize, load: &mut [usize]) {
        for &v in &self.approvers[c] {
            load[v] -= 1;
        }
    }
}

struct BranchAndBound<'a> {
    inst: PavInstance<'a>,
    k: usize,
    load: Vec<usize>,
    chosen: Vec<usize>,
    best: Option<(BigRational, Vec<usize>)>,
    ties: usize,
}

impl BranchAndBound<'_> {
    /// Include-first depth-first search visits committees in lexicographic
    /// order of their sorted index lists, so the first optimum found is the
    /// canonical one. Only strictly worse bounds are pruned, which keeps the
    /// tie count exact.
    fn search(&mut self, next: usize, score: &BigRational) {
        let slots = self.k - self.chosen.len();
        if slots == 0 {
            match &self.best {
                Some((b, _)) if score < b => {}
                Some((b, _)) if score == b => self.ties += 1,
                _ => {
                    self.best = Some((score.clone(), self.chosen.clone()));
                    self.ties = 1;
                }
            }
            return;
        }
        if self.inst.n - next < slots {
            return;
        }
        if let Some((best, _)) = &self.best {
            // Gains are submodular for non-increasing alpha, so the sum of
            // the largest single gains bounds any completion.
            let mut gains: Vec<BigRational> = (next..self.inst.n)
                .map(|c| self.inst.gain(c, &self.load))
                .collect();
            gains.sort_unstable_by(|a, b| b.cmp(a));
            let bound: BigRational = gains
                .into_iter()
                .take(slots)
                .fold(score.clone(), |acc, g| acc + g);
            if &bound < best {
                return;
            }
        }
        let g = self.inst.gain(next, &self.load);
        self.inst.add(next, &mut self.load);
        self.chosen.push(next);
        self.search(next + 1, &(score + g));
        self.chosen.pop();
        self.inst.remove(next, &mut self.load);
        self.search(next + 1, score);
    }
}

/// Exact PAV with the default exhaustive-search cap.
pub fn pav_exact(e: &ApprovalElection, k: usize, w: &PavWeights) -> Result<RuleResult> {
    pav_exact_with_cap(e, k, w, DEFAULT_EXHAUSTIVE_CAP)
}

/// Committee of size `k` maximizing [`pav_score`]; among optimal committees
/// the one whose member list comes first in candidate order wins.
pub fn pav_exact_with_cap(
    e: &ApprovalElection,
    k: usize,
    w: &PavWeights,
    cap: usize,
) -> Result<RuleResult> {
    check_k(e, k)?;
    w.check(k)?;
    if e.candidates.len() > cap {
        return Err(Error::Capacity {
            what: "candidate count",
            actual: e.candidates.len(),
            cap,
        });
    }
    let inst = PavInstance::new(e, w, k);
    let voters = inst.voters;
    let mut bb = BranchAndBound {
        inst,
        k,
        load: vec![0; voters],
        chosen: Vec::with_capacity(k),
        best: None,
        ties: 0,
    };
    bb.search(0, &BigRational::zero());
    let (objective, idx) = bb.best.expect("k <= n guarantees a feasible committee");
    Ok(RuleResult {
        committee: Committee::from_indices(e, &idx),
        objective,
        ties: bb.ties,
    })
}

/// `k` rounds of adding the candidate with the largest marginal PAV gain.
pub fn pav_greedy(e: &ApprovalElection, k: usize, w: &PavWeights) -> Result<RuleResult> {
    check_k(e, k)?;
    w.check(k)?;
    let inst = PavInstance::new(e, w, k);
    let mut load = vec![0; inst.voters];
    let mut taken = vec![false; inst.n];
    let mut chosen = Vec::with_capacity(k);
    let mut objective = BigRational::zero();
    for _ in 0..k {
        let mut pick: Option<(usize, BigRational)> = None;
        for c in (0..inst.n).filter(|&c| !taken[c]) {
            let g = inst.gain(c, &load);
            if pick.as_ref().is_none_or(|(_, best)| &g > best) {
                pick = Some((c, g));
            }
        }
        let (c, g) = pick.expect("k <= n leaves a candidate each round");
        taken[c] = true;
        inst.add(c, &mut load);
        chosen.push(c);
        objective += g;
    }
    Ok(RuleResult {
        committee: Committee::from_indices(e, &chosen),
        objective,
        ties: 1,
    })
}

/// Exact PAV when the election fits under `cap`, greedy otherwise.
pub fn pav_auto(e: &ApprovalElection, k: usize, w: &PavWeights, cap: usize) -> Result<RuleResult> {
    if e.candidates.len() > cap {
        pav_greedy(e, k, w)
    } else {
        pav_exact_with_cap(e, k, w, cap)
    }
}

/// Approval voting reported in the same shape as the PAV rules; its
/// objective is the total number of approvals the committee collects.
pub fn av_result(e: &ApprovalElection, k: usize) -> Result<RuleResult> {
    let committee = av_top_k(e, k)?;
    let objective = pav_score(e, &committee, &PavWeights::constant(k))?;
    Ok(RuleResult {
        committee,
        objective,
        ties: 1,
    })
}
