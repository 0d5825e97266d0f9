//! Policies, policy sequences, the measured value function and backwards
//! induction.
//!
//! A policy at `(t, steps_remaining)` assigns a feasible control to every
//! state of layer `t` that is both reachable and viable for the remaining
//! steps; states that are viable but unreachable are excluded from the
//! domain. Backwards induction repeatedly prepends the optimal extension
//! of the tail sequence, sweeping whole layers through the value tables.

use crate::error::Error;
use crate::problem::{CtrlValue, SdpProblem, StateValue};
use crate::viability::{ReachabilityTable, ViabilityTable};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A state-to-control table for one decision step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub t: usize,
    pub steps_remaining: usize,
    pub table: BTreeMap<StateValue, CtrlValue>,
}

/// Policies for consecutive times with `steps_remaining` descending to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicySeq {
    start_t: usize,
    policies: Vec<Policy>,
}

impl PolicySeq {
    pub fn empty(start_t: usize) -> Self {
        PolicySeq {
            start_t,
            policies: Vec::new(),
        }
    }

    /// Validates the two-index chaining: policy `i` sits at `start_t + i`
    /// with `len - i` steps remaining.
    pub fn new(start_t: usize, policies: Vec<Policy>) -> Result<Self, Error> {
        let len = policies.len();
        for (i, pol) in policies.iter().enumerate() {
            if pol.t != start_t + i || pol.steps_remaining != len - i {
                return Err(Error::DomainMiss {
                    t: pol.t,
                    key: format!(
                        "policy chaining broken at index {i}: t={} steps_remaining={}",
                        pol.t, pol.steps_remaining
                    ),
                });
            }
        }
        Ok(PolicySeq { start_t, policies })
    }

    pub fn start_t(&self) -> usize {
        self.start_t
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    /// New sequence with `head` prepended; `head` must sit one step
    /// before this sequence.
    pub fn prepend(&self, head: Policy) -> Result<Self, Error> {
        let start_t = head.t;
        let mut policies = Vec::with_capacity(self.len() + 1);
        policies.push(head);
        policies.extend(self.policies.iter().cloned());
        PolicySeq::new(start_t, policies)
    }
}

/// Optimal values for one `(t, n)` layer, over the reachable-and-viable
/// domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub t: usize,
    pub n: usize,
    pub values: BTreeMap<StateValue, f64>,
}

/// Output of backwards induction: the policy sequence plus the value
/// tables it was computed from. With [`TableRetention::All`], `tables[i]`
/// is the table at `(start_t + i, n - i)`, ending in the terminal zero
/// table; with [`TableRetention::FinalOnly`], only the top table remains.
#[derive(Debug, Clone)]
pub struct Solution {
    pub policies: PolicySeq,
    pub tables: Vec<ValueTable>,
}

impl Solution {
    /// Canonical text: one block per time step, one `x -> ctrl : value`
    /// line per domain state.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (i, pol) in self.policies.policies().iter().enumerate() {
            let _ = writeln!(out, "t={} n={}", pol.t, pol.steps_remaining);
            let table = self.tables.get(i);
            for (x, y) in &pol.table {
                let v = table.and_then(|tab| tab.values.get(x)).copied();
                match v {
                    Some(v) => {
                        let _ = writeln!(out, "{} -> {} : {:.9}", x.key(), y.key(), v);
                    }
                    None => {
                        let _ = writeln!(out, "{} -> {}", x.key(), y.key());
                    }
                }
            }
        }
        if self.policies.is_empty() {
            if let Some(tab) = self.tables.first() {
                let _ = writeln!(out, "t={} n={}", tab.t, tab.n);
                for (x, v) in &tab.values {
                    let _ = writeln!(out, "{} : {:.9}", x.key(), v);
                }
            }
        }
        out
    }
}

/// Numeric maximum and the first control attaining it, in input order.
pub fn max_and_argmax(choices: &[(CtrlValue, f64)]) -> Result<(f64, CtrlValue), Error> {
    let mut best: Option<(f64, &CtrlValue)> = None;
    for (y, v) in choices {
        match best {
            Some((bv, _)) if *v <= bv => {}
            _ => best = Some((*v, y)),
        }
    }
    best.map(|(v, y)| (v, y.clone()))
        .ok_or(Error::EmptyChoice)
}

/// The measured value of following `ps` from `x`: zero for the empty
/// sequence, otherwise the measure of `reward + value of the tail` over
/// the possible next states.
pub fn mval(p: &dyn SdpProblem, ps: &PolicySeq, x: &StateValue) -> Result<f64, Error> {
    mval_at(p, ps.start_t(), ps.policies(), x)
}

fn mval_at(
    p: &dyn SdpProblem,
    t: usize,
    policies: &[Policy],
    x: &StateValue,
) -> Result<f64, Error> {
    let Some((head, tail)) = policies.split_first() else {
        return Ok(0.0);
    };
    let y = head.table.get(x).ok_or_else(|| Error::DomainMiss {
        t,
        key: x.key().to_owned(),
    })?;
    let tagged = p.step(t, x, y).tag_members();
    let mut err = None;
    let values = tagged.fmap(|(x_next, _)| match mval_at(p, t + 1, tail, x_next) {
        Ok(v) => p.reward(t, x, y, x_next) + v,
        Err(e) => {
            err = Some(e);
            f64::NAN
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    p.meas(&values)
}

/// One backwards-induction sweep: given the value table at `(t+1, n)`,
/// scores every feasible control of every reachable-and-viable state at
/// `t` and keeps the argmax, producing the policy and value table at
/// `(t, n+1)`.
pub fn opt_ext(
    p: &dyn SdpProblem,
    vt: &mut ViabilityTable,
    rt: &ReachabilityTable,
    value_next: &ValueTable,
) -> Result<(Policy, ValueTable), Error> {
    let t = value_next.t - 1;
    let n = value_next.n;
    let mut policy_table = BTreeMap::new();
    let mut values = BTreeMap::new();
    for x in p.enumerate_states(t) {
        if !rt.reachable(t, &x)? || !vt.viable(p, n + 1, t, &x)? {
            continue;
        }
        let mut scored = Vec::new();
        for good in vt.good_ctrls(p, t, n, &x)? {
            let y = good.ctrl;
            let tagged = p.step(t, &x, &y).tag_members();
            let mut missing = None;
            let outcome_values = tagged.fmap(|(x_next, _)| {
                match value_next.values.get(x_next) {
                    Some(v) => p.reward(t, &x, &y, x_next) + v,
                    None => {
                        missing = Some(Error::TableMiss { t: t + 1, n });
                        f64::NAN
                    }
                }
            });
            if let Some(e) = missing {
                return Err(e);
            }
            let score = p.meas(&outcome_values)?;
            scored.push((y, score));
        }
        let (best, argmax) = max_and_argmax(&scored)?;
        policy_table.insert(x.clone(), argmax);
        values.insert(x, best);
    }
    Ok((
        Policy {
            t,
            steps_remaining: n + 1,
            table: policy_table,
        },
        ValueTable {
            t,
            n: n + 1,
            values,
        },
    ))
}

/// How many value tables [`backwards_induction`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableRetention {
    All,
    /// Streaming mode: hold only the two tables of the current sweep and
    /// return the top one, for memory proportional to one layer.
    FinalOnly,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub allow_unchecked_measure: bool,
    pub retention: TableRetention,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            allow_unchecked_measure: false,
            retention: TableRetention::All,
        }
    }
}

/// Computes an optimal policy sequence of length `n` from time `t0` by
/// backwards induction. The problem is validated up to `t0 + n` first.
pub fn backwards_induction(
    p: &dyn SdpProblem,
    t0: usize,
    n: usize,
    opts: &SolveOptions,
) -> Result<Solution, Error> {
    let report = crate::problem::validate(p, t0 + n);
    if !report.is_ok() {
        return Err(Error::IllPosed(report));
    }
    if !opts.allow_unchecked_measure && !p.measure().is_checked() {
        return Err(Error::UncheckedMeasure {
            name: p.measure().name().to_owned(),
        });
    }
    let rt = ReachabilityTable::build(p, t0, t0 + n);
    let mut vt = ViabilityTable::new();

    let terminal = ValueTable {
        t: t0 + n,
        n: 0,
        values: p
            .enumerate_states(t0 + n)
            .into_iter()
            .filter(|x| rt.reachable(t0 + n, x).unwrap_or(false))
            .map(|x| (x, 0.0))
            .collect(),
    };

    let mut rev_policies: Vec<Policy> = Vec::with_capacity(n);
    let mut rev_tables: Vec<ValueTable> = vec![terminal];
    for _ in 0..n {
        let (policy, table) = opt_ext(p, &mut vt, &rt, rev_tables.last().unwrap())?;
        rev_policies.push(policy);
        if opts.retention == TableRetention::FinalOnly {
            rev_tables.clear();
        }
        rev_tables.push(table);
    }
    rev_policies.reverse();
    rev_tables.reverse();
    Ok(Solution {
        policies: PolicySeq::new(t0, rev_policies)?,
        tables: rev_tables,
    })
}

/// Lifts a bare `(t, state) -> control` rule to a policy sequence over
/// the reachable-and-viable domains, rejecting infeasible choices.
pub fn policy_seq_from_rule(
    p: &dyn SdpProblem,
    t0: usize,
    n: usize,
    rule: &dyn Fn(usize, &StateValue) -> Option<CtrlValue>,
) -> Result<PolicySeq, Error> {
    let rt = ReachabilityTable::build(p, t0, t0 + n);
    let mut vt = ViabilityTable::new();
    let mut policies = Vec::with_capacity(n);
    for i in 0..n {
        let t = t0 + i;
        let steps_remaining = n - i;
        let mut table = BTreeMap::new();
        for x in p.enumerate_states(t) {
            if !rt.reachable(t, &x)? || !vt.viable(p, steps_remaining, t, &x)? {
                continue;
            }
            let y = rule(t, &x).ok_or_else(|| Error::DomainMiss {
                t,
                key: x.key().to_owned(),
            })?;
            if !p.enumerate_ctrls(t, &x).contains(&y) {
                return Err(Error::InvalidCtrl {
                    t,
                    state: x.key().to_owned(),
                    key: y.key().to_owned(),
                });
            }
            vt.ensure(p, t + 1, steps_remaining - 1);
            if !vt.feasible(p, steps_remaining - 1, t, &x, &y)? {
                return Err(Error::InfeasibleCtrl {
                    t,
                    state: x.key().to_owned(),
                    key: y.key().to_owned(),
                });
            }
            table.insert(x, y);
        }
        policies.push(Policy {
            t,
            steps_remaining,
            table,
        });
    }
    PolicySeq::new(t0, policies)
}
